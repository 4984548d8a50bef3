//! JSON structure format.
//!
//! ```json
//! {
//!   "points": ["A", "B", {"name": "meet(AB,CD)", "stage": 1}],
//!   "lines": [
//!     {"name": "AB", "points": ["A", "B"]},
//!     {"name": "join(A,meet(AB,CD))", "stage": 2, "points": ["A"]}
//!   ]
//! }
//! ```
//!
//! Base points may be written as bare strings. Generated elements are written
//! with their term as the name and an explicit `"stage"`, which must agree with
//! the stage implied by the term. Under strict parsing unknown keys are
//! rejected and generated elements must carry their stage.

use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use std::sync::Arc;

use crate::extension::{ExtensionMode, ExtensionTrace, StopReason};
use crate::structure::{IncidenceStructure, StructureError};
use crate::term::{Term, TermError};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("invalid JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Schema(String),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    pub strict: bool,
}

impl ParseOptions {
    pub fn strict() -> Self {
        Self { strict: true }
    }
}

fn schema(msg: impl Into<String>) -> FormatError {
    FormatError::Schema(msg.into())
}

fn check_keys(obj: &Map<String, Value>, allowed: &[&str], ctx: &str, opts: ParseOptions) -> Result<(), FormatError> {
    if opts.strict {
        if let Some(k) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(schema(format!("unknown field {k:?} in {ctx}")));
        }
    }
    Ok(())
}

fn named_term(obj: &Map<String, Value>, ctx: &str, opts: ParseOptions) -> Result<Term, FormatError> {
    let name = obj
        .get("name")
        .and_then(Value::as_str)
        .ok_or_else(|| schema(format!("{ctx} without a string \"name\"")))?;
    let term = Term::parse(name)?;
    match obj.get("stage") {
        Some(v) => {
            let stage = v
                .as_u64()
                .ok_or_else(|| schema(format!("stage of {name} is not a natural number")))?;
            if stage != u64::from(term.stage()) {
                return Err(schema(format!(
                    "stage of {name} is {stage} but its term has stage {}",
                    term.stage()
                )));
            }
        }
        None if opts.strict && !term.is_base() => {
            return Err(schema(format!("generated element {name} has no \"stage\"")));
        }
        None => {}
    }
    Ok(term)
}

/// Parses a structure from a JSON value.
pub fn structure_from_value(value: &Value, opts: ParseOptions) -> Result<IncidenceStructure, FormatError> {
    let obj = value
        .as_object()
        .ok_or_else(|| schema("structure must be a JSON object"))?;
    check_keys(obj, &["points", "lines"], "structure", opts)?;
    let mut points = Vec::new();
    if let Some(v) = obj.get("points") {
        let arr = v.as_array().ok_or_else(|| schema("\"points\" must be an array"))?;
        for entry in arr {
            let term = match entry {
                Value::String(s) => {
                    let t = Term::parse(s)?;
                    if opts.strict && !t.is_base() {
                        return Err(schema(format!("generated point {s} has no \"stage\"")));
                    }
                    t
                }
                Value::Object(o) => {
                    check_keys(o, &["name", "stage"], "point", opts)?;
                    named_term(o, "point", opts)?
                }
                _ => return Err(schema("point entries must be strings or objects")),
            };
            points.push(term);
        }
    }
    let mut lines = Vec::new();
    if let Some(v) = obj.get("lines") {
        let arr = v.as_array().ok_or_else(|| schema("\"lines\" must be an array"))?;
        for entry in arr {
            let o = entry
                .as_object()
                .ok_or_else(|| schema("line entries must be objects"))?;
            check_keys(o, &["name", "stage", "points"], "line", opts)?;
            let term = named_term(o, "line", opts)?;
            let members = match o.get("points") {
                None => Vec::new(),
                Some(Value::Array(ps)) => ps
                    .iter()
                    .map(|p| {
                        p.as_str()
                            .ok_or_else(|| schema(format!("points of line {term} must be strings")))
                            .and_then(|s| Ok(Term::parse(s)?))
                    })
                    .collect::<Result<Vec<_>, _>>()?,
                Some(_) => return Err(schema(format!("\"points\" of line {term} must be an array"))),
            };
            lines.push((term, members));
        }
    }
    Ok(IncidenceStructure::new(points, lines)?)
}

pub fn parse_structure(text: &str, opts: ParseOptions) -> Result<IncidenceStructure, FormatError> {
    let value: Value = serde_json::from_str(text)?;
    structure_from_value(&value, opts)
}

#[derive(Serialize)]
#[serde(untagged)]
enum PointEntry {
    Base(String),
    Generated { name: String, stage: u32 },
}

#[derive(Serialize)]
struct LineEntry {
    name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    stage: Option<u32>,
    points: Vec<String>,
}

#[derive(Serialize)]
struct StructureDoc {
    points: Vec<PointEntry>,
    lines: Vec<LineEntry>,
}

fn doc(s: &IncidenceStructure) -> StructureDoc {
    let points = s
        .points()
        .iter()
        .map(|t| {
            if t.is_base() {
                PointEntry::Base(t.to_string())
            } else {
                PointEntry::Generated {
                    name: t.to_string(),
                    stage: t.stage(),
                }
            }
        })
        .collect();
    let lines = s
        .lines()
        .iter()
        .enumerate()
        .map(|(i, t)| LineEntry {
            name: t.to_string(),
            stage: (!t.is_base()).then(|| t.stage()),
            points: s.points_on(i).iter().map(|&p| s.point(p).to_string()).collect(),
        })
        .collect();
    StructureDoc { points, lines }
}

pub fn structure_to_value(s: &IncidenceStructure) -> Value {
    serde_json::to_value(doc(s)).expect("structure documents serialize")
}

/// Canonical pretty-printed JSON with a trailing newline.
pub fn structure_to_string(s: &IncidenceStructure) -> String {
    let mut out = serde_json::to_string_pretty(&doc(s)).expect("structure documents serialize");
    out.push('\n');
    out
}

#[derive(Serialize)]
struct TraceDoc<'a> {
    mode: ExtensionMode,
    budget: usize,
    requested: usize,
    stop: &'a StopReason,
    stages: Vec<StructureDoc>,
}

pub fn trace_to_value(t: &ExtensionTrace) -> Value {
    serde_json::to_value(trace_doc(t)).expect("trace documents serialize")
}

fn trace_doc(t: &ExtensionTrace) -> TraceDoc<'_> {
    TraceDoc {
        mode: t.mode,
        budget: t.budget,
        requested: t.requested,
        stop: &t.stop,
        stages: t.stages.iter().map(|s| doc(s)).collect(),
    }
}

pub fn trace_to_string(t: &ExtensionTrace) -> String {
    let mut out = serde_json::to_string_pretty(&trace_doc(t)).expect("trace documents serialize");
    out.push('\n');
    out
}

/// Parses a trace written by [`trace_to_string`]. Each stage must be an
/// induced substructure of the next.
pub fn parse_trace(text: &str, opts: ParseOptions) -> Result<ExtensionTrace, FormatError> {
    let value: Value = serde_json::from_str(text)?;
    let obj = value
        .as_object()
        .ok_or_else(|| schema("trace must be a JSON object"))?;
    check_keys(obj, &["mode", "budget", "requested", "stop", "stages"], "trace", opts)?;
    let field = |k: &str| obj.get(k).ok_or_else(|| schema(format!("trace without {k:?}")));
    let mode: ExtensionMode =
        serde_json::from_value(field("mode")?.clone()).map_err(|e| schema(format!("trace mode: {e}")))?;
    let stop: StopReason =
        serde_json::from_value(field("stop")?.clone()).map_err(|e| schema(format!("trace stop: {e}")))?;
    let number = |k: &str| -> Result<usize, FormatError> {
        field(k)?
            .as_u64()
            .map(|n| n as usize)
            .ok_or_else(|| schema(format!("trace {k:?} is not a natural number")))
    };
    let (budget, requested) = (number("budget")?, number("requested")?);
    let stages = field("stages")?
        .as_array()
        .ok_or_else(|| schema("trace \"stages\" must be an array"))?
        .iter()
        .map(|v| structure_from_value(v, opts).map(Arc::new))
        .collect::<Result<Vec<_>, _>>()?;
    if stages.is_empty() {
        return Err(schema("trace has no stages"));
    }
    for (k, w) in stages.windows(2).enumerate() {
        if !w[0].is_induced_substructure_of(&w[1]) {
            return Err(schema(format!("stage {k} is not contained in stage {}", k + 1)));
        }
    }
    Ok(ExtensionTrace {
        stages,
        mode,
        budget,
        requested,
        stop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_round_trip() {
        let trace = crate::extension::extend(&crate::fixtures::quad(), 4, ExtensionMode::Full, 30).unwrap();
        assert!(trace.is_truncated());
        let text = trace_to_string(&trace);
        let back = parse_trace(&text, ParseOptions::strict()).unwrap();
        assert_eq!(back, trace);
        assert_eq!(trace_to_string(&back), text);
    }

    #[test]
    fn trace_stages_must_nest() {
        let a = structure_to_value(&crate::fixtures::fano());
        let b = structure_to_value(&crate::fixtures::quad());
        let text = serde_json::json!({
            "mode": "full", "budget": 10, "requested": 1,
            "stop": {"reason": "completed"}, "stages": [a, b]
        })
        .to_string();
        assert!(matches!(parse_trace(&text, ParseOptions::default()), Err(FormatError::Schema(_))));
    }

    #[test]
    fn generated_elements_carry_stage() {
        let text = r#"{"points":["A",{"name":"meet(l,m)","stage":1}],
                       "lines":[{"name":"l","points":["A","meet(l,m)"]},{"name":"m","points":["meet(l,m)"]}]}"#;
        let s = parse_structure(text, ParseOptions::strict()).unwrap();
        assert_eq!(s.size(), (2, 2));
        let again = parse_structure(&structure_to_string(&s), ParseOptions::strict()).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn stage_mismatch_is_rejected() {
        let text = r#"{"points":[{"name":"meet(l,m)","stage":2}],"lines":[]}"#;
        assert!(matches!(parse_structure(text, ParseOptions::default()), Err(FormatError::Schema(_))));
    }

    #[test]
    fn strict_rejects_unknown_fields() {
        let text = r#"{"points":["A"],"lines":[],"comment":"x"}"#;
        assert!(parse_structure(text, ParseOptions::default()).is_ok());
        assert!(matches!(parse_structure(text, ParseOptions::strict()), Err(FormatError::Schema(_))));
        let text = r#"{"points":["meet(l,m)"],"lines":[]}"#;
        assert!(parse_structure(text, ParseOptions::default()).is_ok());
        assert!(parse_structure(text, ParseOptions::strict()).is_err());
    }

    #[test]
    fn syntax_errors_report_position() {
        let err = parse_structure("{\n  \"points\": [\"A\",,]\n}", ParseOptions::default()).unwrap_err();
        match err {
            FormatError::Json { line, column, .. } => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reserved_names_are_rejected() {
        let text = r#"{"points":["0"],"lines":[]}"#;
        assert!(matches!(
            parse_structure(text, ParseOptions::default()),
            Err(FormatError::Term(TermError::Reserved(_)))
        ));
    }
}

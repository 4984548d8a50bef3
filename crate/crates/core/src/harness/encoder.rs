//! Structure encoders: deterministic maps from finite structures to finite
//! structures whose transfer properties the harness measures.

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Stdio};

use crate::io::{parse_structure, structure_to_string, ParseOptions};
use crate::structure::IncidenceStructure;
use crate::term::Term;

use super::HarnessError;

pub trait Encoder: Sync {
    fn name(&self) -> String;
    fn version(&self) -> String {
        env!("CARGO_PKG_VERSION").to_string()
    }
    fn encode(&self, s: &IncidenceStructure) -> Result<IncidenceStructure, HarnessError>;
}

fn rebuild(
    name: &str,
    points: Vec<Term>,
    lines: Vec<(Term, Vec<Term>)>,
) -> Result<IncidenceStructure, HarnessError> {
    IncidenceStructure::new(points, lines).map_err(|e| HarnessError::Encoder {
        encoder: name.to_string(),
        message: e.to_string(),
    })
}

fn line_members(s: &IncidenceStructure) -> Vec<(Term, Vec<Term>)> {
    (0..s.line_count())
        .map(|l| {
            (
                s.line(l).clone(),
                s.points_on(l).iter().map(|&p| s.point(p).clone()).collect(),
            )
        })
        .collect()
}

/// Returns its input unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityEncoder;

impl Encoder for IdentityEncoder {
    fn name(&self) -> String {
        "identity".into()
    }

    fn encode(&self, s: &IncidenceStructure) -> Result<IncidenceStructure, HarnessError> {
        Ok(s.clone())
    }
}

/// Reads the input as a (hyper)graph with points as vertices and lines as
/// edges, and gives each edge `e` a point `e_p` of its own on the line `e`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NaiveGraphEncoder;

impl Encoder for NaiveGraphEncoder {
    fn name(&self) -> String {
        "naive".into()
    }

    fn encode(&self, s: &IncidenceStructure) -> Result<IncidenceStructure, HarnessError> {
        let mut points = s.points().to_vec();
        let mut lines = line_members(s);
        for (line, members) in &mut lines {
            if !line.is_base() {
                return Err(HarnessError::Encoder {
                    encoder: self.name(),
                    message: format!("edge {line} does not have a plain name"),
                });
            }
            let edge_point = Term::base(&format!("{line}_p")).map_err(|e| HarnessError::Encoder {
                encoder: self.name(),
                message: e.to_string(),
            })?;
            members.push(edge_point.clone());
            points.push(edge_point);
        }
        rebuild(&self.name(), points, lines)
    }
}

/// Attaches a small rigid gadget to the first point: a new point on a line
/// through the first point, plus a line holding only the new point.
/// Deliberately not isomorphism-invariant.
#[derive(Debug, Clone, Copy, Default)]
pub struct BrokenEncoder;

pub const GADGET_POINT: &str = "gadget_p";
pub const GADGET_LINE: &str = "gadget_a";
pub const GADGET_STUB: &str = "gadget_b";

impl Encoder for BrokenEncoder {
    fn name(&self) -> String {
        "broken".into()
    }

    fn encode(&self, s: &IncidenceStructure) -> Result<IncidenceStructure, HarnessError> {
        let gadget = Term::base(GADGET_POINT).expect("valid name");
        let mut points = s.points().to_vec();
        let mut lines = line_members(s);
        let mut attached = vec![gadget.clone()];
        if let Some(first) = s.points().first() {
            attached.insert(0, first.clone());
        }
        points.push(gadget.clone());
        lines.push((Term::base(GADGET_LINE).expect("valid name"), attached));
        lines.push((Term::base(GADGET_STUB).expect("valid name"), vec![gadget]));
        rebuild(&self.name(), points, lines)
    }
}

/// An external executable reading structure JSON on stdin and writing the
/// encoded structure as JSON on stdout.
#[derive(Debug, Clone)]
pub struct PluginEncoder {
    pub path: PathBuf,
}

impl Encoder for PluginEncoder {
    fn name(&self) -> String {
        format!("plugin:{}", self.path.display())
    }

    fn version(&self) -> String {
        "external".into()
    }

    fn encode(&self, s: &IncidenceStructure) -> Result<IncidenceStructure, HarnessError> {
        let fail = |message: String| HarnessError::Encoder {
            encoder: self.name(),
            message,
        };
        let mut child = Command::new(&self.path)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| fail(format!("cannot start: {e}")))?;
        let input = structure_to_string(s);
        {
            let mut stdin = child.stdin.take().expect("stdin is piped");
            stdin
                .write_all(input.as_bytes())
                .map_err(|e| fail(format!("writing input: {e}")))?;
        }
        let out = child
            .wait_with_output()
            .map_err(|e| fail(format!("waiting for plugin: {e}")))?;
        if !out.status.success() {
            return Err(fail(format!(
                "exited with {}: {}",
                out.status,
                String::from_utf8_lossy(&out.stderr).trim()
            )));
        }
        let text = String::from_utf8(out.stdout).map_err(|_| fail("output is not UTF-8".into()))?;
        parse_structure(&text, ParseOptions::default()).map_err(|e| fail(format!("output: {e}")))
    }
}

/// `identity`, `naive`, `broken` or `plugin:<path>`.
pub fn encoder_by_name(name: &str) -> Result<Box<dyn Encoder>, HarnessError> {
    match name {
        "identity" => Ok(Box::new(IdentityEncoder)),
        "naive" => Ok(Box::new(NaiveGraphEncoder)),
        "broken" => Ok(Box::new(BrokenEncoder)),
        _ => match name.strip_prefix("plugin:") {
            Some(path) if !path.is_empty() => Ok(Box::new(PluginEncoder { path: path.into() })),
            _ => Err(HarnessError::UnknownEncoder(name.to_string())),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn naive_encoding_of_a_path() {
        let out = NaiveGraphEncoder.encode(&fixtures::path3()).unwrap();
        assert_eq!(out.size(), (5, 2));
        for l in 0..2 {
            assert_eq!(out.points_on(l).len(), 3);
        }
        assert!(out.is_linear());
    }

    #[test]
    fn broken_gadget_shape() {
        let out = BrokenEncoder.encode(&fixtures::two_points()).unwrap();
        assert_eq!(out.size(), (3, 2));
        let g = out.point_index(&Term::base(GADGET_POINT).unwrap()).unwrap();
        assert_eq!(out.lines_through(g).len(), 2);
        let empty = BrokenEncoder.encode(&IncidenceStructure::empty()).unwrap();
        assert_eq!(empty.size(), (1, 2));
    }

    #[test]
    fn encoder_names() {
        assert_eq!(encoder_by_name("naive").unwrap().name(), "naive");
        assert_eq!(encoder_by_name("plugin:/bin/cat").unwrap().name(), "plugin:/bin/cat");
        assert!(encoder_by_name("plugin:").is_err());
        assert!(encoder_by_name("other").is_err());
    }

    #[test]
    fn cat_is_an_identity_plugin() {
        let plugin = PluginEncoder { path: "cat".into() };
        let fano = fixtures::fano();
        assert_eq!(plugin.encode(&fano).unwrap(), fano);
        let missing = PluginEncoder {
            path: "/nonexistent/encoder".into(),
        };
        assert!(matches!(missing.encode(&fano), Err(HarnessError::Encoder { .. })));
    }
}

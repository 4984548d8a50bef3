//! Staged free extension.
//!
//! Stage `m + 1` is obtained from stage `m` by adding, simultaneously for every
//! pair existing at stage `m`:
//!
//! * a point `meet(l,m)` on exactly `l` and `m`, for each pair of parallel lines;
//! * in [`ExtensionMode::Full`], a line `join(p,q)` through exactly `p` and `q`,
//!   for each pair of points with no common line.
//!
//! New elements are named by their terms, so repeated runs agree element by
//! element and truncations of different structures can be compared by name.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::axioms::{parallel_pairs, unjoined_pairs};
use crate::structure::{IncidenceStructure, StructureError};
use crate::term::Term;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtensionMode {
    /// Meets of parallel lines and joins of unjoined points.
    #[default]
    Full,
    /// Meets of parallel lines only.
    #[serde(rename = "meets")]
    MeetsOnly,
}

impl std::str::FromStr for ExtensionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(ExtensionMode::Full),
            "meets" => Ok(ExtensionMode::MeetsOnly),
            other => Err(format!("unknown extension mode {other:?} (expected full or meets)")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtensionError {
    #[error("element budget {budget} exceeded: stage would have {points} points and {lines} lines")]
    Budget {
        budget: usize,
        points: usize,
        lines: usize,
    },
    #[error("two points share two lines ({p} and {q}); free extension needs unique joins")]
    NotLinear { p: String, q: String },
    #[error("generated element {0} already exists with a different incidence")]
    NameClash(String),
}

/// Counts of what one extension step would add.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepCounts {
    pub new_points: usize,
    pub new_lines: usize,
}

fn require_linear(s: &IncidenceStructure) -> Result<(), ExtensionError> {
    match s.uniqueness_violation() {
        Some(v) => Err(ExtensionError::NotLinear {
            p: s.point(v.points.0).to_string(),
            q: s.point(v.points.1).to_string(),
        }),
        None => Ok(()),
    }
}

/// One extension step with no element cap.
pub fn extend_once(s: &IncidenceStructure, mode: ExtensionMode) -> Result<IncidenceStructure, ExtensionError> {
    extend_once_within(s, mode, usize::MAX)
}

/// One extension step, failing if the result would have more than `budget`
/// elements (points plus lines).
pub fn extend_once_within(
    s: &IncidenceStructure,
    mode: ExtensionMode,
    budget: usize,
) -> Result<IncidenceStructure, ExtensionError> {
    require_linear(s)?;
    let parallels = parallel_pairs(s);
    let unjoined = match mode {
        ExtensionMode::Full => unjoined_pairs(s),
        ExtensionMode::MeetsOnly => Vec::new(),
    };
    let points = s.point_count() + parallels.len();
    let lines = s.line_count() + unjoined.len();
    if points.saturating_add(lines) > budget {
        return Err(ExtensionError::Budget {
            budget,
            points,
            lines,
        });
    }
    if parallels.is_empty() && unjoined.is_empty() {
        return Ok(s.clone());
    }

    let mut line_members: Vec<(Term, Vec<Term>)> = (0..s.line_count())
        .map(|l| {
            (
                s.line(l).clone(),
                s.points_on(l).iter().map(|&p| s.point(p).clone()).collect(),
            )
        })
        .collect();
    let mut point_terms = s.points().to_vec();
    for &(l, m) in &parallels {
        let meet = Term::meet(s.line(l), s.line(m));
        line_members[l].1.push(meet.clone());
        line_members[m].1.push(meet.clone());
        point_terms.push(meet);
    }
    for &(p, q) in &unjoined {
        let join = Term::join(s.point(p), s.point(q));
        line_members.push((join, vec![s.point(p).clone(), s.point(q).clone()]));
    }
    IncidenceStructure::new(point_terms, line_members).map_err(|e| match e {
        StructureError::Duplicate(name) | StructureError::PointLineClash(name) => {
            ExtensionError::NameClash(name)
        }
        other => unreachable!("extension produced a malformed structure: {other}"),
    })
}

/// What an extension step would add, without building it.
pub fn step_counts(s: &IncidenceStructure, mode: ExtensionMode) -> StepCounts {
    StepCounts {
        new_points: parallel_pairs(s).len(),
        new_lines: match mode {
            ExtensionMode::Full => unjoined_pairs(s).len(),
            ExtensionMode::MeetsOnly => 0,
        },
    }
}

/// Whether one extension step leaves the structure unchanged.
pub fn is_fixed_point(s: &IncidenceStructure, mode: ExtensionMode) -> bool {
    parallel_pairs(s).is_empty()
        && (mode == ExtensionMode::MeetsOnly || unjoined_pairs(s).is_empty())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum StopReason {
    /// All requested stages were computed without reaching a fixed point.
    Completed,
    /// Stage `stage` equals stage `stage + 1`; later stages repeat it.
    FixedPoint { stage: usize },
    /// Computing stage `stage` would exceed the budget; the trace ends before it.
    Budget {
        stage: usize,
        points: usize,
        lines: usize,
    },
}

/// The chain `P = P_0 ⊆ P_1 ⊆ … ⊆ P_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionTrace {
    pub stages: Vec<Arc<IncidenceStructure>>,
    pub mode: ExtensionMode,
    pub budget: usize,
    pub requested: usize,
    pub stop: StopReason,
}

impl ExtensionTrace {
    pub fn base(&self) -> &IncidenceStructure {
        &self.stages[0]
    }

    pub fn stage(&self, n: usize) -> Option<&IncidenceStructure> {
        self.stages.get(n).map(Arc::as_ref)
    }

    /// Index of the last computed stage.
    pub fn last_stage(&self) -> usize {
        self.stages.len() - 1
    }

    pub fn last(&self) -> &IncidenceStructure {
        self.stages.last().expect("a trace has at least its base stage")
    }

    pub fn is_truncated(&self) -> bool {
        matches!(self.stop, StopReason::Budget { .. })
    }

    pub fn sizes(&self) -> Vec<(usize, usize)> {
        self.stages.iter().map(|s| s.size()).collect()
    }
}

/// Applies `n` extension steps, stopping early if the budget trips.
///
/// Once a fixed point is reached the remaining stages are filled with the same
/// structure, so a completed trace always has `n + 1` stages.
pub fn extend(
    s: &IncidenceStructure,
    n: usize,
    mode: ExtensionMode,
    budget: usize,
) -> Result<ExtensionTrace, ExtensionError> {
    let mut stages = vec![Arc::new(s.clone())];
    let mut stop = StopReason::Completed;
    if s.element_count() > budget {
        let (points, lines) = s.size();
        return Ok(ExtensionTrace {
            stages,
            mode,
            budget,
            requested: n,
            stop: StopReason::Budget {
                stage: 0,
                points,
                lines,
            },
        });
    }
    let mut fixed_at = None;
    for stage in 1..=n {
        let prev = stages.last().expect("non-empty").clone();
        if fixed_at.is_some() {
            stages.push(prev);
            continue;
        }
        match extend_once_within(&prev, mode, budget) {
            Ok(next) => {
                if next == *prev {
                    fixed_at = Some(stage - 1);
                    stages.push(prev);
                } else {
                    stages.push(Arc::new(next));
                }
            }
            Err(ExtensionError::Budget { points, lines, .. }) => {
                stop = StopReason::Budget {
                    stage,
                    points,
                    lines,
                };
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if let (Some(stage), StopReason::Completed) = (fixed_at, &stop) {
        stop = StopReason::FixedPoint { stage };
    }
    Ok(ExtensionTrace {
        stages,
        mode,
        budget,
        requested: n,
        stop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn fano_is_fixed_in_both_modes() {
        let fano = fixtures::fano();
        for mode in [ExtensionMode::Full, ExtensionMode::MeetsOnly] {
            assert_eq!(extend_once(&fano, mode).unwrap(), fano);
            assert!(is_fixed_point(&fano, mode));
        }
        let trace = extend(&fano, 5, ExtensionMode::Full, 1000).unwrap();
        assert_eq!(trace.stages.len(), 6);
        assert_eq!(trace.stop, StopReason::FixedPoint { stage: 0 });
        assert!(trace.stages.iter().all(|s| **s == fano));
    }

    #[test]
    fn quad_meets_only_adds_diagonal_points() {
        let s = extend_once(&fixtures::quad(), ExtensionMode::MeetsOnly).unwrap();
        assert_eq!(s.size(), (7, 6));
        let names: Vec<_> = s.points()[4..].iter().map(|t| t.to_string()).collect();
        assert_eq!(names, ["meet(AB,CD)", "meet(AC,BD)", "meet(AD,BC)"]);
        assert!(!is_fixed_point(&fixtures::quad(), ExtensionMode::Full));
    }

    #[test]
    fn quad_full_two_stages() {
        let trace = extend(&fixtures::quad(), 2, ExtensionMode::Full, 100_000).unwrap();
        assert_eq!(trace.sizes(), vec![(4, 6), (7, 6), (7, 9)]);
        assert_eq!(trace.stop, StopReason::Completed);
        let last = trace.last();
        for l in 6..9 {
            assert_eq!(last.line(l).stage(), 2);
            assert_eq!(last.points_on(l).len(), 2);
        }
    }

    #[test]
    fn budget_truncates_trace() {
        let trace = extend(&fixtures::quad(), 4, ExtensionMode::Full, 15).unwrap();
        assert_eq!(trace.sizes(), vec![(4, 6), (7, 6)]);
        assert_eq!(
            trace.stop,
            StopReason::Budget {
                stage: 2,
                points: 7,
                lines: 9
            }
        );
        assert!(trace.is_truncated());
        let err = extend_once_within(&fixtures::quad(), ExtensionMode::Full, 12).unwrap_err();
        assert_eq!(
            err,
            ExtensionError::Budget {
                budget: 12,
                points: 7,
                lines: 6
            }
        );
    }

    #[test]
    fn nonlinear_input_is_rejected() {
        let s = IncidenceStructure::from_names(&["p", "q"], &[("l", &["p", "q"]), ("m", &["p", "q"])])
            .unwrap();
        assert!(matches!(
            extend_once(&s, ExtensionMode::Full),
            Err(ExtensionError::NotLinear { .. })
        ));
    }

    #[test]
    fn name_clash_is_reported() {
        // a point already named like the meet of two parallel lines, but not on them
        let text = r#"{"points":["a","b","c","d",{"name":"meet(l,m)","stage":1}],
            "lines":[{"name":"l","points":["a","b"]},{"name":"m","points":["c","d"]}]}"#;
        let s = crate::io::parse_structure(text, Default::default()).unwrap();
        assert!(matches!(
            extend_once(&s, ExtensionMode::MeetsOnly),
            Err(ExtensionError::NameClash(_))
        ));
    }
}

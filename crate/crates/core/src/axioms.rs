//! Plane axioms and the classifications built on them.
//!
//! The axioms checked by [`validate`]:
//!
//! * **A** every two distinct points lie on exactly one common line;
//! * **B** every two distinct lines share at most one point;
//! * **C** every line has at least two points;
//! * **D** there are three points not on a common line;
//! * **B′** every two distinct lines share exactly one point;
//! * **pairwise uniqueness** every two distinct points share at most one line.
//!
//! A structure satisfying A–D is a plane; a plane satisfying B′ is projective.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::structure::IncidenceStructure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Axiom {
    A,
    B,
    C,
    D,
    #[serde(rename = "B'")]
    BPrime,
    #[serde(rename = "pairwise-uniqueness")]
    PairwiseUniqueness,
}

impl Axiom {
    pub const ALL: [Axiom; 6] = [
        Axiom::A,
        Axiom::B,
        Axiom::C,
        Axiom::D,
        Axiom::BPrime,
        Axiom::PairwiseUniqueness,
    ];

    /// The axioms defining a plane.
    pub const PLANE: [Axiom; 4] = [Axiom::A, Axiom::B, Axiom::C, Axiom::D];
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axiom::A => "A",
            Axiom::B => "B",
            Axiom::C => "C",
            Axiom::D => "D",
            Axiom::BPrime => "B'",
            Axiom::PairwiseUniqueness => "pairwise-uniqueness",
        })
    }
}

/// Witness tuples, by element name:
///
/// * A: `[p, q]` (no common line) or `[p, q, l, m]` (two common lines)
/// * B: `[l, m, p, q]`
/// * C: `[l]`
/// * D: all points (fewer than three, or all on one line)
/// * B′: `[l, m]`
/// * pairwise uniqueness: `[p, q, l, m]`
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomResult {
    pub axiom: Axiom,
    pub satisfied: bool,
    pub violations: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub axioms: Vec<AxiomResult>,
}

impl ValidationReport {
    pub fn result(&self, axiom: Axiom) -> &AxiomResult {
        self.axioms
            .iter()
            .find(|r| r.axiom == axiom)
            .expect("every axiom is reported")
    }

    pub fn satisfied(&self, axiom: Axiom) -> bool {
        self.result(axiom).satisfied
    }

    /// Axioms A–D.
    pub fn is_plane(&self) -> bool {
        Axiom::PLANE.iter().all(|&a| self.satisfied(a))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("not a plane: axiom {axiom} fails")]
pub struct NotAPlane {
    pub axiom: Axiom,
}

/// Checks every axiom and collects witnesses for each failure.
pub fn validate(s: &IncidenceStructure) -> ValidationReport {
    let name_p = |p: usize| s.point(p).to_string();
    let name_l = |l: usize| s.line(l).to_string();

    // point pair -> lines through both
    let mut joins: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for l in 0..s.line_count() {
        let ps = s.points_on(l);
        for (i, &p) in ps.iter().enumerate() {
            for &q in &ps[i + 1..] {
                joins.entry((p, q)).or_default().push(l);
            }
        }
    }
    // line pair -> points on both
    let mut meets: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for p in 0..s.point_count() {
        let ls = s.lines_through(p);
        for (i, &l) in ls.iter().enumerate() {
            for &m in &ls[i + 1..] {
                meets.entry((l, m)).or_default().push(p);
            }
        }
    }

    let mut a = Vec::new();
    let mut uniq = Vec::new();
    for p in 0..s.point_count() {
        for q in p + 1..s.point_count() {
            match joins.get(&(p, q)).map(Vec::as_slice) {
                None | Some([]) => a.push(vec![name_p(p), name_p(q)]),
                Some([_]) => {}
                Some([l, m, ..]) => {
                    let w = vec![name_p(p), name_p(q), name_l(*l), name_l(*m)];
                    a.push(w.clone());
                    uniq.push(w);
                }
            }
        }
    }

    let mut b = Vec::new();
    let mut b_prime = Vec::new();
    for l in 0..s.line_count() {
        for m in l + 1..s.line_count() {
            match meets.get(&(l, m)).map(Vec::as_slice) {
                None | Some([]) => b_prime.push(vec![name_l(l), name_l(m)]),
                Some([_]) => {}
                Some([p, q, ..]) => {
                    b.push(vec![name_l(l), name_l(m), name_p(*p), name_p(*q)]);
                    b_prime.push(vec![name_l(l), name_l(m)]);
                }
            }
        }
    }

    let c: Vec<Vec<String>> = (0..s.line_count())
        .filter(|&l| s.points_on(l).len() < 2)
        .map(|l| vec![name_l(l)])
        .collect();

    let d = if has_noncollinear_triple(s) {
        Vec::new()
    } else {
        vec![(0..s.point_count()).map(name_p).collect()]
    };

    let result = |axiom, violations: Vec<Vec<String>>| AxiomResult {
        axiom,
        satisfied: violations.is_empty(),
        violations,
    };
    ValidationReport {
        axioms: vec![
            result(Axiom::A, a),
            result(Axiom::B, b),
            result(Axiom::C, c),
            result(Axiom::D, d),
            result(Axiom::BPrime, b_prime),
            result(Axiom::PairwiseUniqueness, uniq),
        ],
    }
}

fn collinear(s: &IncidenceStructure, p: usize, q: usize, r: usize) -> bool {
    s.common_lines(p, q).iter().any(|&l| s.incident(r, l))
}

fn has_noncollinear_triple(s: &IncidenceStructure) -> bool {
    let n = s.point_count();
    if n < 3 {
        return false;
    }
    if s.is_linear() {
        // With unique joins, all triples are collinear iff one line holds every point.
        return match s.joining_line(0, 1) {
            None => true,
            Some(l) => s.points_on(l).len() != n,
        };
    }
    for p in 0..n {
        for q in p + 1..n {
            for r in q + 1..n {
                if !collinear(s, p, q, r) {
                    return true;
                }
            }
        }
    }
    false
}

fn require_plane(s: &IncidenceStructure) -> Result<(), NotAPlane> {
    let report = validate(s);
    match Axiom::PLANE.iter().find(|&&a| !report.satisfied(a)) {
        Some(&axiom) => Err(NotAPlane { axiom }),
        None => Ok(()),
    }
}

/// Whether a plane has no parallel lines.
pub fn is_projective(s: &IncidenceStructure) -> Result<bool, NotAPlane> {
    require_plane(s)?;
    Ok(parallel_pairs(s).is_empty())
}

/// Lines with exactly two points.
pub fn trivial_lines(s: &IncidenceStructure) -> Vec<usize> {
    (0..s.line_count()).filter(|&l| s.points_on(l).len() == 2).collect()
}

/// Lines with at least three points.
pub fn nontrivial_lines(s: &IncidenceStructure) -> Vec<usize> {
    (0..s.line_count()).filter(|&l| s.points_on(l).len() >= 3).collect()
}

/// Points on three or more non-trivial lines. A simple plane has only finitely
/// many of these, which every finite structure trivially does; the set itself
/// is the useful diagnostic.
pub fn exceptional_points(s: &IncidenceStructure) -> Vec<usize> {
    (0..s.point_count())
        .filter(|&p| {
            s.lines_through(p)
                .iter()
                .filter(|&&l| s.points_on(l).len() >= 3)
                .count()
                >= 3
        })
        .collect()
}

/// Unordered pairs of distinct lines with no common point, lexicographic.
pub fn parallel_pairs(s: &IncidenceStructure) -> Vec<(usize, usize)> {
    let n = s.line_count();
    let mut meets = vec![false; n];
    let mut out = Vec::new();
    for l in 0..n {
        for &p in s.points_on(l) {
            for &m in s.lines_through(p) {
                meets[m] = true;
            }
        }
        out.extend((l + 1..n).filter(|&m| !meets[m]).map(|m| (l, m)));
        for &p in s.points_on(l) {
            for &m in s.lines_through(p) {
                meets[m] = false;
            }
        }
    }
    out
}

/// Unordered pairs of distinct points with no common line, lexicographic.
pub fn unjoined_pairs(s: &IncidenceStructure) -> Vec<(usize, usize)> {
    let n = s.point_count();
    let mut joined = vec![false; n];
    let mut out = Vec::new();
    for p in 0..n {
        for &l in s.lines_through(p) {
            for &q in s.points_on(l) {
                joined[q] = true;
            }
        }
        out.extend((p + 1..n).filter(|&q| !joined[q]).map(|q| (p, q)));
        for &l in s.lines_through(p) {
            for &q in s.points_on(l) {
                joined[q] = false;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn names(s: &IncidenceStructure, ls: &[usize]) -> Vec<String> {
        ls.iter().map(|&l| s.line(l).to_string()).collect()
    }

    #[test]
    fn fano_is_a_projective_plane() {
        let s = fixtures::fano();
        let r = validate(&s);
        assert!(Axiom::ALL.iter().all(|&a| r.satisfied(a)), "{r:?}");
        assert_eq!(is_projective(&s), Ok(true));
        assert!(trivial_lines(&s).is_empty());
        assert_eq!(exceptional_points(&s).len(), 7);
        assert!(parallel_pairs(&s).is_empty());
        assert!(unjoined_pairs(&s).is_empty());
    }

    #[test]
    fn empty_structure_only_fails_d() {
        let r = validate(&IncidenceStructure::empty());
        for a in Axiom::ALL {
            assert_eq!(r.satisfied(a), a != Axiom::D, "{a}");
        }
        assert_eq!(r.result(Axiom::D).violations, vec![Vec::<String>::new()]);
    }

    #[test]
    fn quad_is_a_plane_with_three_parallel_classes() {
        let s = fixtures::quad();
        let r = validate(&s);
        assert!(r.is_plane());
        assert!(!r.satisfied(Axiom::BPrime));
        assert!(r
            .result(Axiom::BPrime)
            .violations
            .contains(&vec!["AB".to_string(), "CD".to_string()]));
        assert_eq!(is_projective(&s), Ok(false));
        assert_eq!(trivial_lines(&s).len(), 6);
        assert!(exceptional_points(&s).is_empty());
        let par: Vec<_> = parallel_pairs(&s)
            .into_iter()
            .map(|(l, m)| names(&s, &[l, m]))
            .collect();
        assert_eq!(par, vec![vec!["AB", "CD"], vec!["AC", "BD"], vec!["AD", "BC"]]);
        assert!(unjoined_pairs(&s).is_empty());
    }

    #[test]
    fn single_line_is_not_a_plane() {
        let s = IncidenceStructure::from_names(&["a", "b", "c"], &[("l", &["a", "b", "c"])]).unwrap();
        assert_eq!(is_projective(&s), Err(NotAPlane { axiom: Axiom::D }));
    }

    #[test]
    fn star_has_only_its_centre_exceptional() {
        let s = fixtures::star();
        let ex = exceptional_points(&s);
        assert_eq!(ex.len(), 1);
        assert_eq!(s.point(ex[0]).to_string(), "O");
    }

    #[test]
    fn fano_with_pendant_point() {
        let fano = fixtures::fano();
        let mut lines: Vec<_> = (0..fano.line_count())
            .map(|l| {
                (
                    fano.line(l).clone(),
                    fano.points_on(l).iter().map(|&p| fano.point(p).clone()).collect::<Vec<_>>(),
                )
            })
            .collect();
        let x = crate::term::Term::base("x").unwrap();
        for p in fano.points() {
            lines.push((
                crate::term::Term::base(&format!("x{p}")).unwrap(),
                vec![p.clone(), x.clone()],
            ));
        }
        let mut points = fano.points().to_vec();
        points.push(x);
        let s = IncidenceStructure::new(points, lines).unwrap();
        assert_eq!(trivial_lines(&s).len(), 7);
        assert_eq!(nontrivial_lines(&s).len(), 7);
    }

    #[test]
    fn isolated_points_are_unjoined() {
        let s = IncidenceStructure::from_names(&["a", "b", "c"], &[]).unwrap();
        assert!(parallel_pairs(&s).is_empty());
        assert_eq!(unjoined_pairs(&s), vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn double_join_violates_a_b_and_uniqueness() {
        let s = IncidenceStructure::from_names(
            &["p", "q", "r"],
            &[("l", &["p", "q"]), ("m", &["p", "q", "r"])],
        )
        .unwrap();
        let r = validate(&s);
        assert!(!r.satisfied(Axiom::A));
        assert!(!r.satisfied(Axiom::B));
        assert!(!r.satisfied(Axiom::PairwiseUniqueness));
        assert_eq!(r.result(Axiom::B).violations, vec![vec!["l", "m", "p", "q"]]);
        // all three points lie on m
        assert!(!r.satisfied(Axiom::D));
    }
}

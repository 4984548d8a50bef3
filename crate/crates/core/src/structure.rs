//! The finite incidence structure that carries planes, partial planes and
//! truncated free extensions alike.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::term::{ElementKind, Term};

/// Structural errors: these make a structure unrepresentable, as opposed to
/// axiom violations which are reported by [`crate::axioms::validate`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("element {0} declared more than once")]
    Duplicate(String),
    #[error("name {0} used for both a point and a line")]
    PointLineClash(String),
    #[error("{name} declared as a {declared} but its term denotes a {implied}")]
    WrongKind {
        name: String,
        declared: ElementKind,
        implied: ElementKind,
    },
    #[error("line {line} lists unknown point {point}")]
    DanglingIncidence { line: String, point: String },
    #[error("line {line} lists point {point} twice")]
    RepeatedIncidence { line: String, point: String },
}

/// Reference to an element of one structure by canonical index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementRef {
    Point(usize),
    Line(usize),
}

/// Two distinct points lying on two distinct common lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniquenessViolation {
    pub points: (usize, usize),
    pub lines: (usize, usize),
}

/// A finite set of points and lines with an incidence relation.
///
/// Elements are kept in canonical term order, so two structures with the same
/// elements and incidences are equal regardless of declaration order.
/// The constructor enforces only the identifier invariants; the "at most one
/// common line" law is checked by [`IncidenceStructure::uniqueness_violation`]
/// and required by the operations that depend on it.
#[derive(Clone)]
pub struct IncidenceStructure {
    points: Vec<Term>,
    lines: Vec<Term>,
    line_points: Vec<Vec<usize>>,
    point_lines: Vec<Vec<usize>>,
    point_index: HashMap<Term, usize>,
    line_index: HashMap<Term, usize>,
}

impl PartialEq for IncidenceStructure {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points
            && self.lines == other.lines
            && self.line_points == other.line_points
    }
}

impl Eq for IncidenceStructure {}

impl fmt::Debug for IncidenceStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<_> = self
            .lines
            .iter()
            .zip(&self.line_points)
            .map(|(l, ps)| {
                let names: Vec<_> = ps.iter().map(|&p| self.points[p].to_string()).collect();
                format!("{l}: {{{}}}", names.join(", "))
            })
            .collect();
        f.debug_struct("IncidenceStructure")
            .field("points", &self.points)
            .field("lines", &lines)
            .finish()
    }
}

impl IncidenceStructure {
    /// Builds a structure from point terms and lines given with their points.
    pub fn new(points: Vec<Term>, lines: Vec<(Term, Vec<Term>)>) -> Result<Self, StructureError> {
        let mut point_set = BTreeSet::new();
        for p in points {
            if let Some(ElementKind::Line) = p.implied_kind() {
                return Err(StructureError::WrongKind {
                    name: p.to_string(),
                    declared: ElementKind::Point,
                    implied: ElementKind::Line,
                });
            }
            let name = p.to_string();
            if !point_set.insert(p) {
                return Err(StructureError::Duplicate(name));
            }
        }
        let points: Vec<Term> = point_set.into_iter().collect();
        let point_index: HashMap<Term, usize> =
            points.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();

        let mut line_map = std::collections::BTreeMap::new();
        for (l, members) in lines {
            if let Some(ElementKind::Point) = l.implied_kind() {
                return Err(StructureError::WrongKind {
                    name: l.to_string(),
                    declared: ElementKind::Line,
                    implied: ElementKind::Point,
                });
            }
            if point_index.contains_key(&l) {
                return Err(StructureError::PointLineClash(l.to_string()));
            }
            let mut idx = Vec::with_capacity(members.len());
            for p in &members {
                match point_index.get(p) {
                    Some(&i) => idx.push(i),
                    None => {
                        return Err(StructureError::DanglingIncidence {
                            line: l.to_string(),
                            point: p.to_string(),
                        })
                    }
                }
            }
            idx.sort_unstable();
            if let Some(w) = idx.windows(2).find(|w| w[0] == w[1]) {
                return Err(StructureError::RepeatedIncidence {
                    line: l.to_string(),
                    point: points[w[0]].to_string(),
                });
            }
            let name = l.to_string();
            if line_map.insert(l, idx).is_some() {
                return Err(StructureError::Duplicate(name));
            }
        }
        let (lines, line_points): (Vec<Term>, Vec<Vec<usize>>) = line_map.into_iter().unzip();
        Ok(Self::from_sorted(points, lines, line_points))
    }

    /// Builds a structure from base names, e.g. `from_names(&["A","B"], &[("AB", &["A","B"])])`.
    pub fn from_names(points: &[&str], lines: &[(&str, &[&str])]) -> Result<Self, crate::Error> {
        let pts = points
            .iter()
            .map(|p| Term::base(p))
            .collect::<Result<Vec<_>, _>>()?;
        let mut ls = Vec::with_capacity(lines.len());
        for (name, members) in lines {
            let members = members
                .iter()
                .map(|p| Term::base(p))
                .collect::<Result<Vec<_>, _>>()?;
            ls.push((Term::base(name)?, members));
        }
        Ok(Self::new(pts, ls)?)
    }

    /// `points` and `lines` must be strictly increasing and disjoint, and each
    /// `line_points` entry sorted and in range.
    pub(crate) fn from_sorted(
        points: Vec<Term>,
        lines: Vec<Term>,
        line_points: Vec<Vec<usize>>,
    ) -> Self {
        debug_assert!(points.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(lines.windows(2).all(|w| w[0] < w[1]));
        let mut point_lines = vec![Vec::new(); points.len()];
        for (l, ps) in line_points.iter().enumerate() {
            for &p in ps {
                point_lines[p].push(l);
            }
        }
        let point_index = points.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        let line_index = lines.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self {
            points,
            lines,
            line_points,
            point_lines,
            point_index,
            line_index,
        }
    }

    pub fn empty() -> Self {
        Self::from_sorted(Vec::new(), Vec::new(), Vec::new())
    }

    pub fn points(&self) -> &[Term] {
        &self.points
    }

    pub fn lines(&self) -> &[Term] {
        &self.lines
    }

    pub fn point_count(&self) -> usize {
        self.points.len()
    }

    pub fn line_count(&self) -> usize {
        self.lines.len()
    }

    pub fn element_count(&self) -> usize {
        self.points.len() + self.lines.len()
    }

    /// `(points, lines)`.
    pub fn size(&self) -> (usize, usize) {
        (self.points.len(), self.lines.len())
    }

    pub fn point(&self, i: usize) -> &Term {
        &self.points[i]
    }

    pub fn line(&self, i: usize) -> &Term {
        &self.lines[i]
    }

    pub fn term(&self, e: ElementRef) -> &Term {
        match e {
            ElementRef::Point(i) => &self.points[i],
            ElementRef::Line(i) => &self.lines[i],
        }
    }

    pub fn point_index(&self, t: &Term) -> Option<usize> {
        self.point_index.get(t).copied()
    }

    pub fn line_index(&self, t: &Term) -> Option<usize> {
        self.line_index.get(t).copied()
    }

    /// Sorted point indices on line `l`.
    pub fn points_on(&self, l: usize) -> &[usize] {
        &self.line_points[l]
    }

    /// Sorted line indices through point `p`.
    pub fn lines_through(&self, p: usize) -> &[usize] {
        &self.point_lines[p]
    }

    pub fn incident(&self, p: usize, l: usize) -> bool {
        self.line_points[l].binary_search(&p).is_ok()
    }

    pub fn incidence_count(&self) -> usize {
        self.line_points.iter().map(Vec::len).sum()
    }

    /// All incidences as `(point, line)` index pairs, line-major.
    pub fn incidences(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.line_points
            .iter()
            .enumerate()
            .flat_map(|(l, ps)| ps.iter().map(move |&p| (p, l)))
    }

    pub fn common_lines(&self, p: usize, q: usize) -> Vec<usize> {
        sorted_intersection(&self.point_lines[p], &self.point_lines[q])
    }

    pub fn common_points(&self, l: usize, m: usize) -> Vec<usize> {
        sorted_intersection(&self.line_points[l], &self.line_points[m])
    }

    /// First (canonical) line through both points.
    pub fn joining_line(&self, p: usize, q: usize) -> Option<usize> {
        first_common(&self.point_lines[p], &self.point_lines[q])
    }

    /// First (canonical) point on both lines.
    pub fn meet_point(&self, l: usize, m: usize) -> Option<usize> {
        first_common(&self.line_points[l], &self.line_points[m])
    }

    /// The first pair of points sharing two lines, if any.
    pub fn uniqueness_violation(&self) -> Option<UniquenessViolation> {
        // shared[m] = (l, p): line m was last seen through point p of line l
        let mut shared: Vec<(usize, usize)> = vec![(usize::MAX, 0); self.line_points.len()];
        for (l, ps) in self.line_points.iter().enumerate() {
            for &q in ps {
                for &m in &self.point_lines[q] {
                    if m >= l {
                        continue;
                    }
                    match shared[m] {
                        (seen, p) if seen == l => {
                            return Some(UniquenessViolation {
                                points: (p, q),
                                lines: (m, l),
                            })
                        }
                        _ => shared[m] = (l, q),
                    }
                }
            }
        }
        None
    }

    /// Whether any two points share at most one line (equivalently any two
    /// lines share at most one point).
    pub fn is_linear(&self) -> bool {
        self.uniqueness_violation().is_none()
    }

    /// The substructure on the given elements with the induced incidence.
    pub fn induced(&self, points: &[usize], lines: &[usize]) -> IncidenceStructure {
        let mut points = points.to_vec();
        points.sort_unstable();
        points.dedup();
        let mut lines = lines.to_vec();
        lines.sort_unstable();
        lines.dedup();
        let mut remap = vec![usize::MAX; self.points.len()];
        for (new, &old) in points.iter().enumerate() {
            remap[old] = new;
        }
        let line_points = lines
            .iter()
            .map(|&l| {
                self.line_points[l]
                    .iter()
                    .filter(|&&p| remap[p] != usize::MAX)
                    .map(|&p| remap[p])
                    .collect()
            })
            .collect();
        IncidenceStructure::from_sorted(
            points.iter().map(|&p| self.points[p].clone()).collect(),
            lines.iter().map(|&l| self.lines[l].clone()).collect(),
            line_points,
        )
    }

    /// Whether every element of `self` is an element of `other` of the same kind
    /// and incidence between them is the same in both.
    pub fn is_induced_substructure_of(&self, other: &IncidenceStructure) -> bool {
        self.inclusion_into(other).is_some()
    }

    /// Index maps `(points, lines)` from `self` into `other` when `self` is an
    /// induced substructure of `other`.
    pub fn inclusion_into(&self, other: &IncidenceStructure) -> Option<(Vec<usize>, Vec<usize>)> {
        let pmap: Vec<usize> = self
            .points
            .iter()
            .map(|t| other.point_index(t))
            .collect::<Option<_>>()?;
        let lmap: Vec<usize> = self
            .lines
            .iter()
            .map(|t| other.line_index(t))
            .collect::<Option<_>>()?;
        for (l, &ol) in lmap.iter().enumerate() {
            let mut inside = 0;
            for &op in other.points_on(ol) {
                if let Some(p) = self.point_index(&other.points[op]) {
                    if !self.incident(p, l) {
                        return None;
                    }
                    inside += 1;
                }
            }
            if inside != self.line_points[l].len() {
                return None;
            }
        }
        Some((pmap, lmap))
    }

    /// Applies a renaming to every element. The renaming must be injective and
    /// kind-compatible; the result is re-sorted canonically.
    pub fn renamed(&self, rename: impl Fn(&Term) -> Term) -> Result<Self, StructureError> {
        let points = self.points.iter().map(&rename).collect::<Vec<_>>();
        let lines = self
            .lines
            .iter()
            .zip(&self.line_points)
            .map(|(l, ps)| (rename(l), ps.iter().map(|&p| points[p].clone()).collect()))
            .collect();
        Self::new(points, lines)
    }

    /// Largest term stage among the elements.
    pub fn max_stage(&self) -> u32 {
        self.points
            .iter()
            .chain(&self.lines)
            .map(Term::stage)
            .max()
            .unwrap_or(0)
    }
}

pub(crate) fn sorted_intersection(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn first_common(a: &[usize], b: &[usize]) -> Option<usize> {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return Some(a[i]),
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn declaration_order_does_not_matter() {
        let a = IncidenceStructure::from_names(&["A", "B", "C"], &[("x", &["A", "B"]), ("y", &["C"])])
            .unwrap();
        let b = IncidenceStructure::from_names(&["C", "B", "A"], &[("y", &["C"]), ("x", &["B", "A"])])
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn structural_errors() {
        let dangling = IncidenceStructure::from_names(&["A"], &[("x", &["A", "B"])]);
        assert!(matches!(
            dangling,
            Err(crate::Error::Structure(StructureError::DanglingIncidence { .. }))
        ));
        let clash = IncidenceStructure::from_names(&["A"], &[("A", &[])]);
        assert!(matches!(
            clash,
            Err(crate::Error::Structure(StructureError::PointLineClash(_)))
        ));
        let dup = IncidenceStructure::from_names(&["A", "A"], &[]);
        assert!(matches!(dup, Err(crate::Error::Structure(StructureError::Duplicate(_)))));
        let rep = IncidenceStructure::from_names(&["A"], &[("x", &["A", "A"])]);
        assert!(matches!(
            rep,
            Err(crate::Error::Structure(StructureError::RepeatedIncidence { .. }))
        ));
    }

    #[test]
    fn uniqueness_detects_double_join() {
        let s = IncidenceStructure::from_names(&["A", "B"], &[("x", &["A", "B"]), ("y", &["A", "B"])])
            .unwrap();
        let v = s.uniqueness_violation().unwrap();
        assert_eq!(v.points, (0, 1));
        assert_eq!(v.lines, (0, 1));
    }

    #[test]
    fn induced_substructure_roundtrip() {
        let s = crate::fixtures::fano();
        let sub = s.induced(&[0, 1, 2], &[0, 1]);
        assert!(sub.is_induced_substructure_of(&s));
        let mut bad_lines: Vec<_> = sub
            .lines()
            .iter()
            .map(|l| (l.clone(), Vec::new()))
            .collect();
        bad_lines[0].1 = Vec::new();
        let stripped = IncidenceStructure::new(sub.points().to_vec(), bad_lines).unwrap();
        assert_eq!(stripped.incidence_count(), 0);
        assert_eq!(sub.incidence_count() > 0, !stripped.is_induced_substructure_of(&s));
    }
}

//! The lattice view of a plane: `{0} ∪ points ∪ lines ∪ {1}` with the join of
//! two points being their line and the meet of two lines being their common
//! point.
//!
//! For partial structures the tables stay total: the meet of parallel lines is
//! `0` and the join of two points with no common line is `1`.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::axioms::validate;
use crate::structure::IncidenceStructure;
use crate::term::{ElementKind, Term, TermError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("element {0} is neither bottom, top, an atom nor a coatom")]
    NotLength3(String),
    #[error("malformed lattice: {0}")]
    Malformed(String),
    #[error("lattice element name {name:?}: {source}")]
    Name {
        name: String,
        #[source]
        source: TermError,
    },
    #[error("{0} is not an induced substructure of the ambient structure")]
    NotInduced(String),
}

/// Position of an element in a length-3 lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Rank {
    Bottom,
    Atom,
    Coatom,
    Top,
    /// Not classifiable as any of the above.
    Unranked,
}

impl Rank {
    fn height(self) -> Option<usize> {
        match self {
            Rank::Bottom => Some(0),
            Rank::Atom => Some(1),
            Rank::Coatom => Some(2),
            Rank::Top => Some(3),
            Rank::Unranked => None,
        }
    }
}

/// A finite bounded lattice given by explicit join and meet tables.
#[derive(Debug, Clone)]
pub struct GeometricLattice {
    names: Vec<String>,
    ranks: Vec<Rank>,
    join: Vec<u32>,
    meet: Vec<u32>,
    source: Option<Arc<IncidenceStructure>>,
}

impl PartialEq for GeometricLattice {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
            && self.ranks == other.ranks
            && self.join == other.join
            && self.meet == other.meet
    }
}

impl GeometricLattice {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rank(&self, i: usize) -> Rank {
        self.ranks[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn join(&self, a: usize, b: usize) -> usize {
        self.join[a * self.len() + b] as usize
    }

    pub fn meet(&self, a: usize, b: usize) -> usize {
        self.meet[a * self.len() + b] as usize
    }

    /// `a ≤ b`, read off the meet table.
    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.meet(a, b) == a
    }

    pub fn bottom(&self) -> Option<usize> {
        self.ranks.iter().position(|r| *r == Rank::Bottom)
    }

    pub fn top(&self) -> Option<usize> {
        self.ranks.iter().position(|r| *r == Rank::Top)
    }

    /// The structure this lattice was built from, if any.
    pub fn source(&self) -> Option<&IncidenceStructure> {
        self.source.as_deref()
    }

    /// Builds a lattice from raw tables (`join[a][b]`, `meet[a][b]`), ranking
    /// elements by the length of the longest chain from the bottom in the
    /// order `a ≤ b ⇔ a ∧ b = a`.
    pub fn from_tables(
        names: Vec<String>,
        join: Vec<Vec<usize>>,
        meet: Vec<Vec<usize>>,
    ) -> Result<Self, LatticeError> {
        let n = names.len();
        let square = |t: &Vec<Vec<usize>>| t.len() == n && t.iter().all(|r| r.len() == n && r.iter().all(|&x| x < n));
        if !square(&join) || !square(&meet) {
            return Err(LatticeError::Malformed(format!(
                "tables must be {n}x{n} with entries below {n}"
            )));
        }
        let mut lattice = GeometricLattice {
            names,
            ranks: vec![Rank::Unranked; n],
            join: join.into_iter().flatten().map(|x| x as u32).collect(),
            meet: meet.into_iter().flatten().map(|x| x as u32).collect(),
            source: None,
        };
        lattice.ranks = lattice.rank_by_height()?;
        Ok(lattice)
    }

    fn rank_by_height(&self) -> Result<Vec<Rank>, LatticeError> {
        let n = self.len();
        let is_bottom = |x: usize| (0..n).all(|y| self.leq(x, y));
        let is_top = |x: usize| (0..n).all(|y| self.leq(y, x));
        let bottoms: Vec<usize> = (0..n).filter(|&x| is_bottom(x)).collect();
        let tops: Vec<usize> = (0..n).filter(|&x| is_top(x)).collect();
        let (bottom, top) = match (bottoms.as_slice(), tops.as_slice()) {
            ([b], [t]) if b != t => (*b, *t),
            _ => return Err(LatticeError::Malformed("no distinct bottom and top".into())),
        };
        // longest chain from bottom, by relaxation over the strict order
        let mut height = vec![0usize; n];
        for _ in 0..n {
            let mut changed = false;
            for x in 0..n {
                for y in 0..n {
                    if x != y && self.leq(x, y) && height[y] < height[x] + 1 {
                        height[y] = height[x] + 1;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
            if height.iter().any(|&h| h > n) {
                return Err(LatticeError::Malformed("order has a cycle".into()));
            }
        }
        Ok((0..n)
            .map(|x| {
                if x == bottom {
                    Rank::Bottom
                } else if x == top {
                    Rank::Top
                } else {
                    match height[x] {
                        1 => Rank::Atom,
                        2 if height[top] == 3 => Rank::Coatom,
                        _ => Rank::Unranked,
                    }
                }
            })
            .collect())
    }

    /// Rows of the join table, for serialization.
    pub fn join_table(&self) -> Vec<Vec<usize>> {
        self.join
            .chunks(self.len().max(1))
            .take(self.len())
            .map(|r| r.iter().map(|&x| x as usize).collect())
            .collect()
    }

    pub fn meet_table(&self) -> Vec<Vec<usize>> {
        self.meet
            .chunks(self.len().max(1))
            .take(self.len())
            .map(|r| r.iter().map(|&x| x as usize).collect())
            .collect()
    }

    /// Pairs `(a, b)` with `a` covered by `b`.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if a != b
                    && self.leq(a, b)
                    && !(0..n).any(|c| c != a && c != b && self.leq(a, c) && self.leq(c, b))
                {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

/// The lattice of a structure. Element order: `0`, points, lines, `1`.
pub fn to_lattice(s: &IncidenceStructure) -> GeometricLattice {
    let (np, nl) = s.size();
    let n = np + nl + 2;
    let top = n - 1;
    let point = |p: usize| 1 + p;
    let line = |l: usize| 1 + np + l;
    let mut names = Vec::with_capacity(n);
    names.push("0".to_string());
    names.extend(s.points().iter().map(Term::to_string));
    names.extend(s.lines().iter().map(Term::to_string));
    names.push("1".to_string());
    let mut ranks = vec![Rank::Bottom];
    ranks.extend(std::iter::repeat_n(Rank::Atom, np));
    ranks.extend(std::iter::repeat_n(Rank::Coatom, nl));
    ranks.push(Rank::Top);

    let mut join = vec![0u32; n * n];
    let mut meet = vec![0u32; n * n];
    let mut set = |a: usize, b: usize, j: usize, m: usize| {
        join[a * n + b] = j as u32;
        join[b * n + a] = j as u32;
        meet[a * n + b] = m as u32;
        meet[b * n + a] = m as u32;
    };
    for x in 0..n {
        set(x, x, x, x);
        set(0, x, x, 0);
        set(top, x, top, x);
    }
    set(0, top, top, 0);
    for p in 0..np {
        for q in p + 1..np {
            let j = s.joining_line(p, q).map_or(top, line);
            set(point(p), point(q), j, 0);
        }
        for l in 0..nl {
            if s.incident(p, l) {
                set(point(p), line(l), line(l), point(p));
            } else {
                set(point(p), line(l), top, 0);
            }
        }
    }
    for l in 0..nl {
        for m in l + 1..nl {
            let mt = s.meet_point(l, m).map_or(0, point);
            set(line(l), line(m), top, mt);
        }
    }
    GeometricLattice {
        names,
        ranks,
        join,
        meet,
        source: Some(Arc::new(s.clone())),
    }
}

/// Points are the atoms, lines the coatoms, and `a` lies on `b` iff `a ∨ b = b`.
pub fn from_lattice(l: &GeometricLattice) -> Result<IncidenceStructure, LatticeError> {
    if let Some(i) = (0..l.len()).find(|&i| l.rank(i) == Rank::Unranked) {
        return Err(LatticeError::NotLength3(l.name(i).to_string()));
    }
    let parse = |i: usize| {
        Term::parse(l.name(i)).map_err(|source| LatticeError::Name {
            name: l.name(i).to_string(),
            source,
        })
    };
    let atoms: Vec<usize> = (0..l.len()).filter(|&i| l.rank(i) == Rank::Atom).collect();
    let coatoms: Vec<usize> = (0..l.len()).filter(|&i| l.rank(i) == Rank::Coatom).collect();
    let points = atoms.iter().map(|&a| parse(a)).collect::<Result<Vec<_>, _>>()?;
    let mut lines = Vec::with_capacity(coatoms.len());
    for &b in &coatoms {
        let members = atoms
            .iter()
            .zip(&points)
            .filter(|(&a, _)| l.join(a, b) == b)
            .map(|(_, t)| t.clone())
            .collect();
        lines.push((parse(b)?, members));
    }
    IncidenceStructure::new(points, lines).map_err(|e| LatticeError::Malformed(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeCheck {
    Bounded,
    /// Commutative, idempotent, associative, absorptive.
    LatticeLaws,
    /// `a ∨ b` is the least upper bound and `a ∧ b` the greatest lower bound.
    WellDefined,
    /// Every covering step raises the rank by one and the top has rank 3.
    GradedLength3,
    Atomistic,
    Semimodular,
}

impl LatticeCheck {
    pub const ALL: [LatticeCheck; 6] = [
        LatticeCheck::Bounded,
        LatticeCheck::LatticeLaws,
        LatticeCheck::WellDefined,
        LatticeCheck::GradedLength3,
        LatticeCheck::Atomistic,
        LatticeCheck::Semimodular,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub check: LatticeCheck,
    pub passed: bool,
    /// Up to [`MAX_WITNESSES`] offending element tuples, by name.
    pub witnesses: Vec<Vec<String>>,
}

pub const MAX_WITNESSES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LatticeReport {
    pub checks: Vec<CheckResult>,
}

impl LatticeReport {
    pub fn passed(&self, check: LatticeCheck) -> bool {
        self.checks.iter().any(|c| c.check == check && c.passed)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn result(&self, check: LatticeCheck) -> &CheckResult {
        self.checks.iter().find(|c| c.check == check).expect("all checks reported")
    }
}

struct Witnesses<'a> {
    lattice: &'a GeometricLattice,
    found: Vec<Vec<String>>,
    any: bool,
}

impl<'a> Witnesses<'a> {
    fn new(lattice: &'a GeometricLattice) -> Self {
        Self {
            lattice,
            found: Vec::new(),
            any: false,
        }
    }

    fn add(&mut self, elems: &[usize]) {
        self.any = true;
        if self.found.len() < MAX_WITNESSES {
            self.found
                .push(elems.iter().map(|&i| self.lattice.name(i).to_string()).collect());
        }
    }

    fn finish(self, check: LatticeCheck) -> CheckResult {
        CheckResult {
            check,
            passed: !self.any,
            witnesses: self.found,
        }
    }
}

/// Exhaustive check of the finite geometric-lattice axioms for length 3.
pub fn check_geometric_length3(l: &GeometricLattice) -> LatticeReport {
    let n = l.len();
    let mut checks = Vec::new();

    let mut w = Witnesses::new(l);
    match (l.bottom(), l.top()) {
        (Some(b), Some(t)) => {
            for x in 0..n {
                if !(l.leq(b, x) && l.leq(x, t)) {
                    w.add(&[x]);
                }
                if l.join(b, x) != x || l.meet(t, x) != x {
                    w.add(&[x]);
                }
            }
        }
        _ => w.add(&[]),
    }
    checks.push(w.finish(LatticeCheck::Bounded));

    let mut w = Witnesses::new(l);
    for a in 0..n {
        if l.join(a, a) != a || l.meet(a, a) != a {
            w.add(&[a]);
        }
        for b in 0..n {
            if l.join(a, b) != l.join(b, a) || l.meet(a, b) != l.meet(b, a) {
                w.add(&[a, b]);
            }
            if l.join(a, l.meet(a, b)) != a || l.meet(a, l.join(a, b)) != a {
                w.add(&[a, b]);
            }
            for c in 0..n {
                if l.join(l.join(a, b), c) != l.join(a, l.join(b, c))
                    || l.meet(l.meet(a, b), c) != l.meet(a, l.meet(b, c))
                {
                    w.add(&[a, b, c]);
                }
            }
        }
    }
    checks.push(w.finish(LatticeCheck::LatticeLaws));

    let mut w = Witnesses::new(l);
    for a in 0..n {
        for b in 0..n {
            let j = l.join(a, b);
            let m = l.meet(a, b);
            if !(l.leq(a, j) && l.leq(b, j)) || !(l.leq(m, a) && l.leq(m, b)) {
                w.add(&[a, b]);
                continue;
            }
            for u in 0..n {
                if l.leq(a, u) && l.leq(b, u) && !l.leq(j, u) {
                    w.add(&[a, b, j, u]);
                }
                if l.leq(u, a) && l.leq(u, b) && !l.leq(u, m) {
                    w.add(&[a, b, m, u]);
                }
            }
        }
    }
    checks.push(w.finish(LatticeCheck::WellDefined));

    let covers = l.covers();
    let mut w = Witnesses::new(l);
    if let Some(t) = l.top() {
        if l.rank(t).height() != Some(3) {
            w.add(&[t]);
        }
    }
    for &(a, b) in &covers {
        match (l.rank(a).height(), l.rank(b).height()) {
            (Some(ha), Some(hb)) if hb == ha + 1 => {}
            _ => w.add(&[a, b]),
        }
    }
    checks.push(w.finish(LatticeCheck::GradedLength3));

    let mut w = Witnesses::new(l);
    let atoms: Vec<usize> = (0..n).filter(|&i| l.rank(i) == Rank::Atom).collect();
    for x in 0..n {
        let below: Vec<usize> = atoms.iter().copied().filter(|&a| l.leq(a, x)).collect();
        let joined = match l.bottom() {
            Some(b) => below.iter().fold(b, |acc, &a| l.join(acc, a)),
            None => continue,
        };
        if joined != x {
            w.add(&[x]);
        }
    }
    checks.push(w.finish(LatticeCheck::Atomistic));

    let mut covered = vec![false; n * n];
    for &(a, b) in &covers {
        covered[a * n + b] = true;
    }
    let mut w = Witnesses::new(l);
    for a in 0..n {
        for b in 0..n {
            if covered[l.meet(a, b) * n + a] && !covered[b * n + l.join(a, b)] {
                w.add(&[a, b]);
            }
        }
    }
    checks.push(w.finish(LatticeCheck::Semimodular));

    LatticeReport { checks }
}

/// Whether `map` (indices of `l1` to indices of `l2`) is injective and
/// preserves `0`, `1`, joins and meets.
pub fn is_sublattice(l1: &GeometricLattice, l2: &GeometricLattice, map: &[usize]) -> bool {
    sublattice_violation(l1, l2, map).is_none()
}

/// The first pair of `l1` elements whose join or meet is not preserved, or
/// `(x, x)` for an element breaking injectivity or the bounds.
pub fn sublattice_violation(
    l1: &GeometricLattice,
    l2: &GeometricLattice,
    map: &[usize],
) -> Option<(usize, usize)> {
    let n = l1.len();
    if map.len() != n {
        return Some((0, 0));
    }
    let mut used = vec![false; l2.len()];
    for (x, &y) in map.iter().enumerate() {
        if y >= l2.len() || std::mem::replace(&mut used[y], true) {
            return Some((x, x));
        }
    }
    for (b1, b2) in [(l1.bottom(), l2.bottom()), (l1.top(), l2.top())] {
        match (b1, b2) {
            (Some(x), Some(y)) if map[x] == y => {}
            (Some(x), _) => return Some((x, x)),
            (None, _) => return Some((0, 0)),
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            if map[l1.join(a, b)] != l2.join(map[a], map[b])
                || map[l1.meet(a, b)] != l2.meet(map[a], map[b])
            {
                return Some((a, b));
            }
        }
    }
    None
}

/// Index map from `to_lattice(s1)` into `to_lattice(s2)` sending each element
/// to the element of the same name, when `s1` is an induced substructure.
pub fn inclusion_lattice_map(s1: &IncidenceStructure, s2: &IncidenceStructure) -> Option<Vec<usize>> {
    let (pmap, lmap) = s1.inclusion_into(s2)?;
    let (np2, nl2) = s2.size();
    let mut map = vec![0];
    map.extend(pmap.iter().map(|&p| 1 + p));
    map.extend(lmap.iter().map(|&l| 1 + np2 + l));
    map.push(np2 + nl2 + 1);
    Some(map)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClosureWitness {
    /// `meet` for two lines meeting outside the substructure, `join` for two
    /// points joined by a line outside it.
    pub operation: ElementKind,
    pub arguments: (String, String),
    pub missing: String,
}

/// Plane-axiom status and closure status of an induced substructure, kept
/// apart because closure alone is what the sublattice test sees.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompleteSubplaneReport {
    pub is_plane: bool,
    pub closed: bool,
    pub unclosed: Vec<ClosureWitness>,
}

impl CompleteSubplaneReport {
    pub fn is_complete_subplane(&self) -> bool {
        self.is_plane && self.closed
    }
}

pub fn complete_subplane_report(
    sub: &IncidenceStructure,
    ambient: &IncidenceStructure,
) -> Result<CompleteSubplaneReport, LatticeError> {
    let (pmap, lmap) = sub
        .inclusion_into(ambient)
        .ok_or_else(|| LatticeError::NotInduced(format!("{:?}", sub.size())))?;
    let mut unclosed = Vec::new();
    for (i, &l) in lmap.iter().enumerate() {
        for (j, &m) in lmap.iter().enumerate().skip(i + 1) {
            for q in ambient.common_points(l, m) {
                if sub.point_index(ambient.point(q)).is_none() {
                    unclosed.push(ClosureWitness {
                        operation: ElementKind::Point,
                        arguments: (sub.line(i).to_string(), sub.line(j).to_string()),
                        missing: ambient.point(q).to_string(),
                    });
                }
            }
        }
    }
    for (i, &p) in pmap.iter().enumerate() {
        for (j, &q) in pmap.iter().enumerate().skip(i + 1) {
            for l in ambient.common_lines(p, q) {
                if sub.line_index(ambient.line(l)).is_none() {
                    unclosed.push(ClosureWitness {
                        operation: ElementKind::Line,
                        arguments: (sub.point(i).to_string(), sub.point(j).to_string()),
                        missing: ambient.line(l).to_string(),
                    });
                }
            }
        }
    }
    Ok(CompleteSubplaneReport {
        is_plane: validate(sub).is_plane(),
        closed: unclosed.is_empty(),
        unclosed,
    })
}

/// A plane that is an induced substructure closed under the ambient meets and joins.
pub fn is_complete_subplane(sub: &IncidenceStructure, ambient: &IncidenceStructure) -> Result<bool, LatticeError> {
    Ok(complete_subplane_report(sub, ambient)?.is_complete_subplane())
}

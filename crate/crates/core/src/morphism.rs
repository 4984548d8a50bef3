//! Embeddings and isomorphisms between finite structures.
//!
//! Three kinds of map are searched for, all injective and sending points to
//! points and lines to lines:
//!
//! * incidence embeddings: `p` on `l` iff `f(p)` on `f(l)`;
//! * lattice embeddings: maps whose extension to the lattice view preserves
//!   `0`, `1`, joins and meets. On structures with unique joins this means an
//!   incidence embedding that also keeps unjoined points unjoined and parallel
//!   lines parallel;
//! * isomorphisms: bijective incidence embeddings.
//!
//! The search assigns points then lines in canonical order, trying targets in
//! canonical order, so results come out lexicographically sorted.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{is_sublattice, to_lattice};
use crate::structure::IncidenceStructure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MorphismKind {
    IncidenceEmbedding,
    LatticeEmbedding,
    Isomorphism,
}

impl std::str::FromStr for MorphismKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "incidence" | "incidence-embedding" => Ok(MorphismKind::IncidenceEmbedding),
            "lattice" | "lattice-embedding" => Ok(MorphismKind::LatticeEmbedding),
            "iso" | "isomorphism" => Ok(MorphismKind::Isomorphism),
            other => Err(format!("unknown morphism kind {other:?}")),
        }
    }
}

/// A map between two structures, as canonical indices of the target.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Morphism {
    pub kind: MorphismKind,
    pub points: Vec<usize>,
    pub lines: Vec<usize>,
}

impl Morphism {
    pub fn identity(s: &IncidenceStructure, kind: MorphismKind) -> Self {
        Morphism {
            kind,
            points: (0..s.point_count()).collect(),
            lines: (0..s.line_count()).collect(),
        }
    }

    /// `then ∘ self`: first `self`, then `then`. The kind is the weaker of the two.
    pub fn then(&self, then: &Morphism) -> Morphism {
        let kind = match (self.kind, then.kind) {
            (MorphismKind::Isomorphism, k) | (k, MorphismKind::Isomorphism) => k,
            (MorphismKind::LatticeEmbedding, MorphismKind::LatticeEmbedding) => MorphismKind::LatticeEmbedding,
            _ => MorphismKind::IncidenceEmbedding,
        };
        Morphism {
            kind,
            points: self.points.iter().map(|&p| then.points[p]).collect(),
            lines: self.lines.iter().map(|&l| then.lines[l]).collect(),
        }
    }

    /// Inverse of a bijective map.
    pub fn inverse(&self) -> Option<Morphism> {
        let invert = |v: &[usize]| {
            let mut inv = vec![usize::MAX; v.len()];
            for (i, &x) in v.iter().enumerate() {
                if x >= v.len() || inv[x] != usize::MAX {
                    return None;
                }
                inv[x] = i;
            }
            Some(inv)
        };
        Some(Morphism {
            kind: self.kind,
            points: invert(&self.points)?,
            lines: invert(&self.lines)?,
        })
    }

    pub fn to_named(&self, src: &IncidenceStructure, dst: &IncidenceStructure) -> NamedMorphism {
        NamedMorphism {
            kind: self.kind,
            points: self
                .points
                .iter()
                .enumerate()
                .map(|(p, &q)| (src.point(p).to_string(), dst.point(q).to_string()))
                .collect(),
            lines: self
                .lines
                .iter()
                .enumerate()
                .map(|(l, &m)| (src.line(l).to_string(), dst.line(m).to_string()))
                .collect(),
        }
    }
}

/// A morphism written with element names, as stored in JSON output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedMorphism {
    pub kind: MorphismKind,
    pub points: Vec<(String, String)>,
    pub lines: Vec<(String, String)>,
}

impl NamedMorphism {
    /// Resolves names against the two structures.
    pub fn resolve(&self, src: &IncidenceStructure, dst: &IncidenceStructure) -> Option<Morphism> {
        let lookup = |pairs: &[(String, String)], n: usize, by_src: &dyn Fn(&str) -> Option<usize>, by_dst: &dyn Fn(&str) -> Option<usize>| {
            let mut out = vec![usize::MAX; n];
            for (a, b) in pairs {
                let i = by_src(a)?;
                out[i] = by_dst(b)?;
            }
            out.iter().all(|&x| x != usize::MAX).then_some(out)
        };
        let pidx = |s: &IncidenceStructure, name: &str| {
            crate::term::Term::parse(name).ok().and_then(|t| s.point_index(&t))
        };
        let lidx = |s: &IncidenceStructure, name: &str| {
            crate::term::Term::parse(name).ok().and_then(|t| s.line_index(&t))
        };
        Some(Morphism {
            kind: self.kind,
            points: lookup(&self.points, src.point_count(), &|n| pidx(src, n), &|n| pidx(dst, n))?,
            lines: lookup(&self.lines, src.line_count(), &|n| lidx(src, n), &|n| lidx(dst, n))?,
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("search node cap {cap} reached after {found} results")]
    ResourceExhausted {
        cap: u64,
        found: usize,
        partial: Vec<Morphism>,
    },
    #[error("{which} structure has two points on two common lines; lattice embeddings need unique joins")]
    NotLinear { which: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_results: Option<usize>,
    /// Maximum number of candidate assignments tried.
    pub node_cap: u64,
}

pub const DEFAULT_NODE_CAP: u64 = 50_000_000;

impl Default for SearchLimits {
    fn default() -> Self {
        Self {
            max_results: None,
            node_cap: DEFAULT_NODE_CAP,
        }
    }
}

impl SearchLimits {
    pub fn first() -> Self {
        Self {
            max_results: Some(1),
            ..Self::default()
        }
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.node_cap = cap;
        self
    }
}

fn injective(map: &[usize], n: usize) -> Option<Vec<usize>> {
    let mut inv = vec![usize::MAX; n];
    for (i, &x) in map.iter().enumerate() {
        if x >= n || inv[x] != usize::MAX {
            return None;
        }
        inv[x] = i;
    }
    Some(inv)
}

/// `p` on `l` iff `f(p)` on `f(l)`, with `f` injective on points and lines.
pub fn is_incidence_embedding(src: &IncidenceStructure, dst: &IncidenceStructure, m: &Morphism) -> bool {
    incidence_inverse(src, dst, m).is_some()
}

fn incidence_inverse(src: &IncidenceStructure, dst: &IncidenceStructure, m: &Morphism) -> Option<(Vec<usize>, Vec<usize>)> {
    if m.points.len() != src.point_count() || m.lines.len() != src.line_count() {
        return None;
    }
    let pinv = injective(&m.points, dst.point_count())?;
    let linv = injective(&m.lines, dst.line_count())?;
    for l in 0..src.line_count() {
        let target = m.lines[l];
        if !src.points_on(l).iter().all(|&p| dst.incident(m.points[p], target)) {
            return None;
        }
        let image_points = dst
            .points_on(target)
            .iter()
            .filter(|&&q| pinv[q] != usize::MAX)
            .count();
        if image_points != src.points_on(l).len() {
            return None;
        }
    }
    Some((pinv, linv))
}

/// Lattice-embedding check. Uses the incidence characterization when both
/// structures have unique joins, and the lattice tables otherwise.
pub fn is_lattice_embedding(src: &IncidenceStructure, dst: &IncidenceStructure, m: &Morphism) -> bool {
    if !(src.is_linear() && dst.is_linear()) {
        return is_lattice_embedding_by_tables(src, dst, m);
    }
    let Some((pinv, linv)) = incidence_inverse(src, dst, m) else {
        return false;
    };
    // two image points on a target line: the line must be an image line
    for t in 0..dst.line_count() {
        if linv[t] == usize::MAX
            && dst.points_on(t).iter().filter(|&&q| pinv[q] != usize::MAX).count() >= 2
        {
            return false;
        }
    }
    // two image lines through a target point: the point must be an image point
    for q in 0..dst.point_count() {
        if pinv[q] == usize::MAX
            && dst.lines_through(q).iter().filter(|&&t| linv[t] != usize::MAX).count() >= 2
        {
            return false;
        }
    }
    true
}

/// Extends a morphism to the lattice views (`0`, points, lines, `1`).
pub fn lattice_map(src: &IncidenceStructure, dst: &IncidenceStructure, m: &Morphism) -> Vec<usize> {
    let (np, nl) = dst.size();
    let mut map = vec![0];
    map.extend(m.points.iter().map(|&p| 1 + p));
    map.extend(m.lines.iter().map(|&l| 1 + np + l));
    map.push(np + nl + 1);
    debug_assert_eq!(map.len(), src.element_count() + 2);
    map
}

/// Lattice-embedding check on fully materialized join/meet tables.
pub fn is_lattice_embedding_by_tables(src: &IncidenceStructure, dst: &IncidenceStructure, m: &Morphism) -> bool {
    if m.points.len() != src.point_count() || m.lines.len() != src.line_count() {
        return false;
    }
    if m.points.iter().any(|&p| p >= dst.point_count()) || m.lines.iter().any(|&l| l >= dst.line_count()) {
        return false;
    }
    is_sublattice(&to_lattice(src), &to_lattice(dst), &lattice_map(src, dst, m))
}

/// Whether `m` is a bijective incidence embedding.
pub fn is_isomorphism(src: &IncidenceStructure, dst: &IncidenceStructure, m: &Morphism) -> bool {
    src.size() == dst.size() && is_incidence_embedding(src, dst, m)
}

/// Checks `m` against its declared kind.
pub fn verify(src: &IncidenceStructure, dst: &IncidenceStructure, m: &Morphism) -> bool {
    match m.kind {
        MorphismKind::IncidenceEmbedding => is_incidence_embedding(src, dst, m),
        MorphismKind::LatticeEmbedding => is_lattice_embedding(src, dst, m),
        MorphismKind::Isomorphism => is_isomorphism(src, dst, m),
    }
}

/// For each point, how many other points share no line with it.
fn unjoined_degrees(s: &IncidenceStructure) -> Vec<usize> {
    let n = s.point_count();
    let mut mark = vec![usize::MAX; n];
    (0..n)
        .map(|p| {
            let mut joined = 0;
            for &l in s.lines_through(p) {
                for &q in s.points_on(l) {
                    if q != p && mark[q] != p {
                        mark[q] = p;
                        joined += 1;
                    }
                }
            }
            n - 1 - joined
        })
        .collect()
}

/// For each line, how many other lines share no point with it.
fn parallel_degrees(s: &IncidenceStructure) -> Vec<usize> {
    let n = s.line_count();
    let mut mark = vec![usize::MAX; n];
    (0..n)
        .map(|l| {
            let mut meeting = 0;
            for &p in s.points_on(l) {
                for &m in s.lines_through(p) {
                    if m != l && mark[m] != l {
                        mark[m] = l;
                        meeting += 1;
                    }
                }
            }
            n - 1 - meeting
        })
        .collect()
}

struct Search<'a> {
    src: &'a IncidenceStructure,
    dst: &'a IncidenceStructure,
    kind: MorphismKind,
    limits: SearchLimits,
    point_candidates: Vec<Vec<usize>>,
    line_ok: Vec<Vec<bool>>,
    /// For each source line, the earlier source lines parallel to it.
    earlier_parallels: Vec<Vec<usize>>,
    pmap: Vec<usize>,
    lmap: Vec<usize>,
    pinv: Vec<usize>,
    lused: Vec<bool>,
    nodes: u64,
    results: Vec<Morphism>,
}

enum Flow {
    Continue,
    Stop,
    Exhausted,
}

impl<'a> Search<'a> {
    fn new(src: &'a IncidenceStructure, dst: &'a IncidenceStructure, kind: MorphismKind, limits: SearchLimits) -> Self {
        let exact = kind == MorphismKind::Isomorphism;
        let lattice = kind != MorphismKind::IncidenceEmbedding;
        let fits = |a: usize, b: usize| if exact { a == b } else { a <= b };

        let (su, du) = if lattice {
            (unjoined_degrees(src), unjoined_degrees(dst))
        } else {
            (Vec::new(), Vec::new())
        };
        let (sp, dp) = if lattice {
            (parallel_degrees(src), parallel_degrees(dst))
        } else {
            (Vec::new(), Vec::new())
        };
        let point_candidates = (0..src.point_count())
            .map(|p| {
                (0..dst.point_count())
                    .filter(|&q| {
                        fits(src.lines_through(p).len(), dst.lines_through(q).len())
                            && (!lattice || fits(su[p], du[q]))
                    })
                    .collect()
            })
            .collect();
        let line_ok = (0..src.line_count())
            .map(|l| {
                (0..dst.line_count())
                    .map(|m| {
                        fits(src.points_on(l).len(), dst.points_on(m).len())
                            && (!lattice || fits(sp[l], dp[m]))
                    })
                    .collect()
            })
            .collect();
        let earlier_parallels = if lattice {
            let mut v = vec![Vec::new(); src.line_count()];
            for (l, m) in crate::axioms::parallel_pairs(src) {
                v[m].push(l);
            }
            v
        } else {
            vec![Vec::new(); src.line_count()]
        };
        Search {
            src,
            dst,
            kind,
            limits,
            point_candidates,
            line_ok,
            earlier_parallels,
            pmap: Vec::with_capacity(src.point_count()),
            lmap: Vec::with_capacity(src.line_count()),
            pinv: vec![usize::MAX; dst.point_count()],
            lused: vec![false; dst.line_count()],
            nodes: 0,
            results: Vec::new(),
        }
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        self.nodes <= self.limits.node_cap
    }

    fn point_consistent(&self, p: usize, q: usize) -> bool {
        let strict = self.kind != MorphismKind::IncidenceEmbedding;
        for (r, &fr) in self.pmap.iter().enumerate() {
            let sj = self.src.joining_line(p, r).is_some();
            let tj = self.dst.joining_line(q, fr).is_some();
            if (sj && !tj) || (strict && tj && !sj) {
                return false;
            }
        }
        true
    }

    fn line_consistent(&self, l: usize, m: usize) -> bool {
        let sp = self.src.points_on(l);
        if !sp.iter().all(|&p| self.dst.incident(self.pmap[p], m)) {
            return false;
        }
        let image_points = self
            .dst
            .points_on(m)
            .iter()
            .filter(|&&q| self.pinv[q] != usize::MAX)
            .count();
        if image_points != sp.len() {
            return false;
        }
        self.earlier_parallels[l]
            .iter()
            .all(|&k| self.dst.meet_point(m, self.lmap[k]).is_none())
    }

    fn line_candidates(&self, l: usize) -> Vec<usize> {
        let ok = &self.line_ok[l];
        match self.src.points_on(l).first() {
            Some(&p) => self
                .dst
                .lines_through(self.pmap[p])
                .iter()
                .copied()
                .filter(|&m| ok[m] && !self.lused[m])
                .collect(),
            None => (0..self.dst.line_count())
                .filter(|&m| ok[m] && !self.lused[m])
                .collect(),
        }
    }

    fn run(&mut self) -> Flow {
        let np = self.src.point_count();
        if self.pmap.len() < np {
            let p = self.pmap.len();
            for i in 0..self.point_candidates[p].len() {
                let q = self.point_candidates[p][i];
                if self.pinv[q] != usize::MAX {
                    continue;
                }
                if !self.tick() {
                    return Flow::Exhausted;
                }
                if !self.point_consistent(p, q) {
                    continue;
                }
                self.pmap.push(q);
                self.pinv[q] = p;
                let flow = self.run();
                self.pinv[q] = usize::MAX;
                self.pmap.pop();
                if !matches!(flow, Flow::Continue) {
                    return flow;
                }
            }
            return Flow::Continue;
        }
        if self.lmap.len() < self.src.line_count() {
            let l = self.lmap.len();
            for m in self.line_candidates(l) {
                if !self.tick() {
                    return Flow::Exhausted;
                }
                if !self.line_consistent(l, m) {
                    continue;
                }
                self.lmap.push(m);
                self.lused[m] = true;
                let flow = self.run();
                self.lused[m] = false;
                self.lmap.pop();
                if !matches!(flow, Flow::Continue) {
                    return flow;
                }
            }
            return Flow::Continue;
        }
        self.results.push(Morphism {
            kind: self.kind,
            points: self.pmap.clone(),
            lines: self.lmap.clone(),
        });
        match self.limits.max_results {
            Some(k) if self.results.len() >= k => Flow::Stop,
            _ => Flow::Continue,
        }
    }
}

/// All maps of the given kind from `src` to `dst` (up to `limits.max_results`),
/// in lexicographic order of `(points, lines)`.
pub fn embeddings(
    src: &IncidenceStructure,
    dst: &IncidenceStructure,
    kind: MorphismKind,
    limits: SearchLimits,
) -> Result<Vec<Morphism>, SearchError> {
    if kind == MorphismKind::LatticeEmbedding {
        if !src.is_linear() {
            return Err(SearchError::NotLinear { which: "source" });
        }
        if !dst.is_linear() {
            return Err(SearchError::NotLinear { which: "target" });
        }
    }
    if kind == MorphismKind::Isomorphism && src.size() != dst.size() {
        return Ok(Vec::new());
    }
    if src.point_count() > dst.point_count() || src.line_count() > dst.line_count() {
        return Ok(Vec::new());
    }
    let mut search = Search::new(src, dst, kind, limits);
    let flow = search.run();
    let mut results = search.results;
    results.sort();
    match flow {
        Flow::Exhausted => Err(SearchError::ResourceExhausted {
            cap: limits.node_cap,
            found: results.len(),
            partial: results,
        }),
        Flow::Continue | Flow::Stop => Ok(results),
    }
}

pub fn isomorphisms(
    src: &IncidenceStructure,
    dst: &IncidenceStructure,
    limits: SearchLimits,
) -> Result<Vec<Morphism>, SearchError> {
    embeddings(src, dst, MorphismKind::Isomorphism, limits)
}

/// The first map of the given kind, if any.
pub fn find_embedding(
    src: &IncidenceStructure,
    dst: &IncidenceStructure,
    kind: MorphismKind,
    node_cap: u64,
) -> Result<Option<Morphism>, SearchError> {
    Ok(embeddings(src, dst, kind, SearchLimits::first().with_cap(node_cap))?
        .into_iter()
        .next())
}

/// Whether maps of the kind exist in both directions.
pub fn bi_embeddable(
    a: &IncidenceStructure,
    b: &IncidenceStructure,
    kind: MorphismKind,
    node_cap: u64,
) -> Result<bool, SearchError> {
    Ok(find_embedding(a, b, kind, node_cap)?.is_some() && find_embedding(b, a, kind, node_cap)?.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn quad_has_no_lattice_embedding_into_fano() {
        let (quad, fano) = (fixtures::quad(), fixtures::fano());
        let lat = embeddings(&quad, &fano, MorphismKind::LatticeEmbedding, SearchLimits::default()).unwrap();
        assert!(lat.is_empty());
        let inc = embeddings(&quad, &fano, MorphismKind::IncidenceEmbedding, SearchLimits::default()).unwrap();
        assert!(!inc.is_empty());
        assert!(inc.iter().all(|m| is_incidence_embedding(&quad, &fano, m)));
        assert!(inc.iter().all(|m| !is_lattice_embedding(&quad, &fano, m)));
        assert_eq!(bi_embeddable(&quad, &fano, MorphismKind::LatticeEmbedding, DEFAULT_NODE_CAP), Ok(false));
    }

    #[test]
    fn identity_is_found() {
        for (name, s) in fixtures::all() {
            for kind in [MorphismKind::IncidenceEmbedding, MorphismKind::LatticeEmbedding, MorphismKind::Isomorphism] {
                let first = embeddings(&s, &s, kind, SearchLimits::first()).unwrap();
                assert_eq!(first, vec![Morphism::identity(&s, kind)], "{name} {kind:?}");
            }
        }
    }

    #[test]
    fn fano_has_168_automorphisms() {
        let fano = fixtures::fano();
        let isos = isomorphisms(&fano, &fano, SearchLimits::default()).unwrap();
        assert_eq!(isos.len(), 168);
        assert!(isos.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn node_cap_reports_partial_results() {
        let fano = fixtures::fano();
        let err = isomorphisms(&fano, &fano, SearchLimits::default().with_cap(200)).unwrap_err();
        match err {
            SearchError::ResourceExhausted { cap, found, partial } => {
                assert_eq!(cap, 200);
                assert_eq!(found, partial.len());
                assert!(partial.iter().all(|m| is_isomorphism(&fano, &fano, m)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lattice_search_requires_unique_joins() {
        let s = IncidenceStructure::from_names(&["p", "q"], &[("l", &["p", "q"]), ("m", &["p", "q"])]).unwrap();
        assert_eq!(
            embeddings(&s, &s, MorphismKind::LatticeEmbedding, SearchLimits::default()),
            Err(SearchError::NotLinear { which: "source" })
        );
        // isomorphisms are still defined
        assert_eq!(isomorphisms(&s, &s, SearchLimits::default()).unwrap().len(), 4);
    }

    #[test]
    fn named_round_trip() {
        let fano = fixtures::fano();
        let m = &isomorphisms(&fano, &fano, SearchLimits::default()).unwrap()[17];
        let named = m.to_named(&fano, &fano);
        assert_eq!(named.resolve(&fano, &fano).as_ref(), Some(m));
    }

    #[test]
    fn composition_and_inverse() {
        let fano = fixtures::fano();
        let isos = isomorphisms(&fano, &fano, SearchLimits::default()).unwrap();
        let (f, g) = (&isos[5], &isos[100]);
        let fg = f.then(g);
        assert!(is_isomorphism(&fano, &fano, &fg));
        let inv = f.inverse().unwrap();
        assert_eq!(f.then(&inv), Morphism::identity(&fano, MorphismKind::Isomorphism));
    }
}

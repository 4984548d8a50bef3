//! Graphviz output: incidence graphs of stages and Hasse diagrams of lattices.

use std::fmt::Write;

use crate::extension::ExtensionTrace;
use crate::lattice::{GeometricLattice, Rank};
use crate::structure::IncidenceStructure;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Bipartite incidence graph: points as circles, lines as boxes.
pub fn incidence_dot(s: &IncidenceStructure, name: &str) -> String {
    let mut out = String::new();
    writeln!(out, "graph {} {{", quote(name)).unwrap();
    writeln!(out, "  node [shape=circle];").unwrap();
    for p in s.points() {
        writeln!(out, "  {} [label={}];", quote(&format!("p:{p}")), quote(&p.to_string())).unwrap();
    }
    writeln!(out, "  node [shape=box];").unwrap();
    for l in s.lines() {
        writeln!(out, "  {} [label={}];", quote(&format!("l:{l}")), quote(&l.to_string())).unwrap();
    }
    for (p, l) in s.incidences() {
        writeln!(
            out,
            "  {} -- {};",
            quote(&format!("p:{}", s.point(p))),
            quote(&format!("l:{}", s.line(l)))
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

/// One incidence graph per stage, in a single file.
pub fn trace_dot(t: &ExtensionTrace) -> String {
    t.stages
        .iter()
        .enumerate()
        .map(|(k, s)| incidence_dot(s, &format!("stage{k}")))
        .collect()
}

fn hasse_edges(l: &GeometricLattice) -> Vec<(usize, usize)> {
    let n = l.len();
    if (0..n).any(|i| l.rank(i) == Rank::Unranked) {
        return l.covers();
    }
    let of = |r: Rank| (0..n).filter(move |&i| l.rank(i) == r);
    let (Some(bottom), Some(top)) = (l.bottom(), l.top()) else {
        return l.covers();
    };
    let mut edges = Vec::new();
    for a in of(Rank::Atom) {
        edges.push((bottom, a));
    }
    for c in of(Rank::Coatom) {
        let mut below = of(Rank::Atom).filter(|&a| l.leq(a, c)).peekable();
        if below.peek().is_none() {
            edges.push((bottom, c));
        }
        edges.extend(below.map(|a| (a, c)));
        edges.push((c, top));
    }
    for a in of(Rank::Atom) {
        if !of(Rank::Coatom).any(|c| l.leq(a, c)) {
            edges.push((a, top));
        }
    }
    if n == 2 {
        edges.push((bottom, top));
    }
    edges.sort_unstable();
    edges
}

/// Hasse diagram drawn bottom-up, one row per rank.
pub fn hasse_dot(l: &GeometricLattice, name: &str) -> String {
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quote(name)).unwrap();
    writeln!(out, "  rankdir=BT;").unwrap();
    writeln!(out, "  edge [arrowhead=none];").unwrap();
    for rank in [Rank::Bottom, Rank::Atom, Rank::Coatom, Rank::Top, Rank::Unranked] {
        let members: Vec<String> = (0..l.len())
            .filter(|&i| l.rank(i) == rank)
            .map(|i| quote(l.name(i)))
            .collect();
        if !members.is_empty() {
            writeln!(out, "  {{ rank=same; {}; }}", members.join("; ")).unwrap();
        }
    }
    for (a, b) in hasse_edges(l) {
        writeln!(out, "  {} -> {};", quote(l.name(a)), quote(l.name(b))).unwrap();
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::lattice::to_lattice;

    #[test]
    fn fano_hasse_has_35_edges() {
        // 7 + 21 + 7 covers
        let l = to_lattice(&fixtures::fano());
        let dot = hasse_dot(&l, "fano");
        assert_eq!(dot.matches(" -> ").count(), 35);
        let mut general = l.covers();
        general.sort_unstable();
        assert_eq!(hasse_edges(&l), general);
    }

    #[test]
    fn rank_shortcut_matches_covers() {
        for (_, s) in fixtures::all() {
            let l = to_lattice(&s);
            let mut general = l.covers();
            general.sort_unstable();
            assert_eq!(hasse_edges(&l), general);
        }
        let l = to_lattice(&IncidenceStructure::empty());
        assert_eq!(hasse_edges(&l), vec![(0, 1)]);
    }

    #[test]
    fn incidence_graph_counts() {
        let dot = incidence_dot(&fixtures::quad(), "quad");
        assert_eq!(dot.matches(" -- ").count(), 12);
        assert!(dot.starts_with("graph \"quad\" {"));
    }
}

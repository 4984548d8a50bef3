//! Structures shipped with the crate (also available as JSON under `fixtures/`).

use crate::io::{parse_structure, ParseOptions};
use crate::structure::IncidenceStructure;

const SOURCES: &[(&str, &str)] = &[
    ("fano", include_str!("../fixtures/fano.json")),
    ("quad", include_str!("../fixtures/quad.json")),
    ("star", include_str!("../fixtures/star.json")),
    ("rigid_path", include_str!("../fixtures/rigid_path.json")),
    ("two_points", include_str!("../fixtures/two_points.json")),
    ("triangle", include_str!("../fixtures/triangle.json")),
    ("path3", include_str!("../fixtures/path3.json")),
    ("near_pencil", include_str!("../fixtures/near_pencil.json")),
    ("desargues", include_str!("../fixtures/desargues.json")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    SOURCES.iter().map(|(n, _)| *n)
}

pub fn by_name(name: &str) -> Option<IncidenceStructure> {
    SOURCES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(n, src)| {
            parse_structure(src, ParseOptions::strict())
                .unwrap_or_else(|e| panic!("fixture {n} is invalid: {e}"))
        })
}

/// Every fixture, in a fixed order.
pub fn all() -> Vec<(&'static str, IncidenceStructure)> {
    names().map(|n| (n, by_name(n).unwrap())).collect()
}

/// The projective plane of order 2.
pub fn fano() -> IncidenceStructure {
    by_name("fano").unwrap()
}

/// Four points, no three collinear, with their six joining lines.
pub fn quad() -> IncidenceStructure {
    by_name("quad").unwrap()
}

/// A centre on three 3-point lines.
pub fn star() -> IncidenceStructure {
    by_name("star").unwrap()
}

/// Point-line path `a - x - b - y - c - z`; its automorphism group is trivial.
pub fn rigid_path() -> IncidenceStructure {
    by_name("rigid_path").unwrap()
}

pub fn two_points() -> IncidenceStructure {
    by_name("two_points").unwrap()
}

pub fn triangle() -> IncidenceStructure {
    by_name("triangle").unwrap()
}

/// The path graph on three vertices, edges as two-point lines.
pub fn path3() -> IncidenceStructure {
    by_name("path3").unwrap()
}

/// Three collinear points and a fourth point joined to each.
pub fn near_pencil() -> IncidenceStructure {
    by_name("near_pencil").unwrap()
}

/// Desargues configuration: 2-subsets of {1..5} on 3-subsets.
pub fn desargues() -> IncidenceStructure {
    by_name("desargues").unwrap()
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_fixtures_parse_and_are_linear() {
        for (name, s) in super::all() {
            assert!(s.is_linear(), "{name}");
        }
    }
}

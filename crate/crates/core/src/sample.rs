//! Seeded random structures for tests and the `sample` subcommand.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::structure::IncidenceStructure;
use crate::term::Term;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleParams {
    pub max_points: usize,
    pub max_lines: usize,
    /// Probability of each incidence.
    pub density: f64,
    /// Reject incidences that would give two points two common lines.
    pub linear: bool,
}

impl Default for SampleParams {
    fn default() -> Self {
        Self {
            max_points: 10,
            max_lines: 10,
            density: 0.35,
            linear: false,
        }
    }
}

/// A random structure with point names `p0, p1, …` and line names `l0, l1, …`.
pub fn random_structure<R: Rng>(rng: &mut R, params: SampleParams) -> IncidenceStructure {
    let np = rng.gen_range(0..=params.max_points);
    let nl = rng.gen_range(0..=params.max_lines);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); nl];
    // joined[p][q]: p and q already share a line
    let mut joined = vec![vec![false; np]; np];
    for line in members.iter_mut() {
        for p in 0..np {
            if !rng.gen_bool(params.density) {
                continue;
            }
            if params.linear && line.iter().any(|&q| joined[p][q]) {
                continue;
            }
            line.push(p);
        }
        for (i, &p) in line.iter().enumerate() {
            for &q in &line[..i] {
                joined[p][q] = true;
                joined[q][p] = true;
            }
        }
    }
    let point = |p: usize| Term::base(&format!("p{p}")).expect("valid name");
    IncidenceStructure::new(
        (0..np).map(point).collect(),
        members
            .into_iter()
            .enumerate()
            .map(|(l, pts)| {
                (
                    Term::base(&format!("l{l}")).expect("valid name"),
                    pts.into_iter().map(point).collect(),
                )
            })
            .collect(),
    )
    .expect("generated names are distinct")
}

/// `count` structures from a fixed seed.
pub fn sample(seed: u64, count: usize, params: SampleParams) -> Vec<IncidenceStructure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_structure(&mut rng, params)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_and_bounded() {
        let a = sample(7, 50, SampleParams::default());
        assert_eq!(a, sample(7, 50, SampleParams::default()));
        assert!(a.iter().all(|s| s.point_count() <= 10 && s.line_count() <= 10));
        assert_ne!(a, sample(8, 50, SampleParams::default()));
    }

    #[test]
    fn linear_mode_gives_unique_joins() {
        let params = SampleParams {
            density: 0.6,
            linear: true,
            ..Default::default()
        };
        assert!(sample(1, 100, params).iter().all(IncidenceStructure::is_linear));
    }
}

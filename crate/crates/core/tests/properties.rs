use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use freeplane::axioms::{validate, Axiom};
use freeplane::confinement::{confined_core, confined_core_with_order};
use freeplane::extension::{extend, ExtensionMode};
use freeplane::group::{automorphism_group, compare_groups, DEFAULT_GROUP_CAP, DEFAULT_ISO_ORDER_CAP};
use freeplane::io::{parse_structure, structure_to_string, ParseOptions};
use freeplane::lattice::{from_lattice, to_lattice};
use freeplane::morphism::{
    embeddings, is_incidence_embedding, is_lattice_embedding, is_lattice_embedding_by_tables, isomorphisms,
    MorphismKind, SearchLimits, DEFAULT_NODE_CAP,
};
use freeplane::sample::{random_structure, SampleParams};
use freeplane::structure::{ElementRef, IncidenceStructure};
use freeplane::term::Term;

fn structure(max: usize, linear: bool) -> impl Strategy<Value = IncidenceStructure> {
    (any::<u64>(), 0.1f64..0.8).prop_map(move |(seed, density)| {
        let params = SampleParams {
            max_points: max,
            max_lines: max,
            density,
            linear,
        };
        random_structure(&mut ChaCha8Rng::seed_from_u64(seed), params)
    })
}

fn any_structure(max: usize) -> impl Strategy<Value = IncidenceStructure> {
    prop_oneof![structure(max, false), structure(max, true)]
}

/// Renames `p_i` and `l_i` through a seeded shuffle of fresh names.
fn shuffled_names(s: &IncidenceStructure, seed: u64) -> IncidenceStructure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pn: Vec<usize> = (0..s.point_count()).collect();
    let mut ln: Vec<usize> = (0..s.line_count()).collect();
    pn.shuffle(&mut rng);
    ln.shuffle(&mut rng);
    s.renamed(|t| {
        let name = if let Some(p) = s.point_index(t) {
            format!("x{}", pn[p])
        } else {
            format!("y{}", ln[s.line_index(t).unwrap()])
        };
        Term::base(&name).unwrap()
    })
    .unwrap()
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn core_ignores_deletion_order(s in any_structure(9), seed in any::<u64>()) {
        let mut order: Vec<ElementRef> = (0..s.point_count())
            .map(ElementRef::Point)
            .chain((0..s.line_count()).map(ElementRef::Line))
            .collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let core = confined_core(&s).core;
        prop_assert_eq!(&confined_core_with_order(&s, &order).core, &core);
        prop_assert_eq!(&confined_core(&core).core, &core);
        prop_assert!(core.is_induced_substructure_of(&s));
    }

    #[test]
    fn core_contains_every_confined_substructure(s in any_structure(5)) {
        let core = confined_core(&s).core;
        let (np, nl) = s.size();
        for pm in 0u32..1 << np {
            for lm in 0u32..1 << nl {
                let pts: Vec<usize> = (0..np).filter(|&p| pm >> p & 1 == 1).collect();
                let lns: Vec<usize> = (0..nl).filter(|&l| lm >> l & 1 == 1).collect();
                let sub = s.induced(&pts, &lns);
                let confined = (0..sub.point_count()).all(|p| sub.lines_through(p).len() >= 3)
                    && (0..sub.line_count()).all(|l| sub.points_on(l).len() >= 3);
                if confined {
                    prop_assert!(sub.points().iter().all(|t| core.point_index(t).is_some()));
                    prop_assert!(sub.lines().iter().all(|t| core.line_index(t).is_some()));
                }
            }
        }
    }

    #[test]
    fn lattice_round_trip(s in any_structure(10)) {
        let back = from_lattice(&to_lattice(&s)).unwrap();
        prop_assert_eq!(structure_to_string(&back), structure_to_string(&s));
    }

    #[test]
    fn json_round_trip(s in any_structure(10)) {
        let text = structure_to_string(&s);
        prop_assert_eq!(parse_structure(&text, ParseOptions::default()).unwrap(), s);
    }

    #[test]
    fn extension_stages_nest_and_stay_linear(s in structure(6, true), meets_only in any::<bool>()) {
        let mode = if meets_only { ExtensionMode::MeetsOnly } else { ExtensionMode::Full };
        let trace = extend(&s, 3, mode, 20_000).unwrap();
        for pair in trace.stages.windows(2) {
            prop_assert!(pair[0].is_induced_substructure_of(&pair[1]));
            prop_assert!(pair[1].is_linear());
        }
        for (k, stage) in trace.stages.iter().enumerate() {
            prop_assert!(stage.max_stage() as usize <= k);
            for t in stage.points().iter().chain(stage.lines()) {
                prop_assert_eq!(&Term::parse(&t.to_string()).unwrap(), t);
            }
        }
    }

    #[test]
    fn search_results_are_sound(a in structure(4, true), b in structure(5, true)) {
        let inc = embeddings(&a, &b, MorphismKind::IncidenceEmbedding, SearchLimits::default()).unwrap();
        let lat = embeddings(&a, &b, MorphismKind::LatticeEmbedding, SearchLimits::default()).unwrap();
        for m in &inc {
            prop_assert!(is_incidence_embedding(&a, &b, m));
            // lattice embeddings are exactly the incidence embeddings that pass the table check
            let by_tables = is_lattice_embedding_by_tables(&a, &b, m);
            prop_assert_eq!(by_tables, is_lattice_embedding(&a, &b, m));
            prop_assert_eq!(by_tables, lat.iter().any(|l| l.points == m.points && l.lines == m.lines));
        }
        prop_assert!(lat.len() <= inc.len());
    }

    #[test]
    fn renaming_preserves_everything_structural(s in any_structure(7), seed in any::<u64>()) {
        let r = shuffled_names(&s, seed);
        let (vs, vr) = (validate(&s), validate(&r));
        for axiom in Axiom::ALL {
            prop_assert_eq!(vs.satisfied(axiom), vr.satisfied(axiom));
        }
        prop_assert_eq!(confined_core(&s).core.size(), confined_core(&r).core.size());
        let isos = isomorphisms(&s, &r, SearchLimits::first()).unwrap();
        prop_assert_eq!(isos.len(), 1);
        let g = automorphism_group(&s, DEFAULT_GROUP_CAP, DEFAULT_NODE_CAP).unwrap();
        let h = automorphism_group(&r, DEFAULT_GROUP_CAP, DEFAULT_NODE_CAP).unwrap();
        prop_assert_eq!(g.order, h.order);
        prop_assert!(compare_groups(&g, &h, DEFAULT_ISO_ORDER_CAP).is_isomorphic());
    }

    #[test]
    fn automorphism_order_divides_symmetric_order(s in any_structure(6)) {
        let g = automorphism_group(&s, DEFAULT_GROUP_CAP, DEFAULT_NODE_CAP).unwrap();
        let order = g.order.unwrap() as u128;
        prop_assert_eq!(factorial(s.point_count()) * factorial(s.line_count()) % order, 0);
        prop_assert!(g.verify_generated().is_ok());
    }

    #[test]
    fn group_comparison_is_symmetric(a in any_structure(5), b in any_structure(5)) {
        let g = automorphism_group(&a, DEFAULT_GROUP_CAP, DEFAULT_NODE_CAP).unwrap();
        let h = automorphism_group(&b, DEFAULT_GROUP_CAP, DEFAULT_NODE_CAP).unwrap();
        prop_assert_eq!(
            compare_groups(&g, &h, DEFAULT_ISO_ORDER_CAP).is_isomorphic(),
            compare_groups(&h, &g, DEFAULT_ISO_ORDER_CAP).is_isomorphic()
        );
    }
}

//! Transfer-property checks for structure encoders and for embeddings of
//! free extensions.

mod encoder;
mod extend;

pub use encoder::{
    encoder_by_name, BrokenEncoder, Encoder, IdentityEncoder, NaiveGraphEncoder, PluginEncoder, GADGET_LINE,
    GADGET_POINT, GADGET_STUB,
};
pub use extend::{
    check_restriction, extend_embedding, unclosed_image, Certificate, ExtendedEmbedding, RestrictionCounterexample,
    RestrictionReport, VerificationMethod, TABLE_CHECK_LIMIT,
};

use serde::Serialize;
use thiserror::Error;

use crate::extension::ExtensionError;
use crate::group::{automorphism_group, compare_groups, GroupComparison, DEFAULT_GROUP_CAP, DEFAULT_ISO_ORDER_CAP};
use crate::lattice::ClosureWitness;
use crate::morphism::{
    embeddings, find_embedding, isomorphisms, verify, MorphismKind, NamedMorphism, SearchError, SearchLimits,
    DEFAULT_NODE_CAP,
};
use crate::structure::IncidenceStructure;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
    #[error("extension would exceed the element budget {0}")]
    Budget(usize),
    #[error("embedding image is not complete: {} of {} and {} is {} but lies outside the image",
        match .0.operation { crate::term::ElementKind::Point => "meet", crate::term::ElementKind::Line => "join" },
        .0.arguments.0, .0.arguments.1, .0.missing)]
    NotComplete(ClosureWitness),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("stage {stage} requested but only stages up to {available} exist")]
    StageOutOfRange { stage: usize, available: usize },
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("encoder {encoder}: {message}")]
    Encoder { encoder: String, message: String },
    #[error("encoder {encoder} gave different outputs on two runs over instance {instance}")]
    NonDeterministic { encoder: String, instance: String },
    #[error("unknown encoder {0:?} (expected identity, naive, broken or plugin:<path>)")]
    UnknownEncoder(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HarnessOptions {
    /// Embedding notion for the `⊑` checks.
    pub kind: MorphismKind,
    pub node_cap: u64,
    pub group_cap: usize,
    pub iso_order_cap: usize,
    pub jobs: usize,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        Self {
            kind: MorphismKind::LatticeEmbedding,
            node_cap: DEFAULT_NODE_CAP,
            group_cap: DEFAULT_GROUP_CAP,
            iso_order_cap: DEFAULT_ISO_ORDER_CAP,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckName {
    IsoForward,
    IsoBackward,
    EmbedForward,
    EmbedBackward,
    AutIsomorphism,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    /// A group was too large to decide.
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Source,
    Encoded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Witness {
    /// A map that exists on `side`, while exhaustive search found none on the
    /// other side.
    Morphism { side: Side, morphism: NamedMorphism },
    Groups { comparison: GroupComparison },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub check: CheckName,
    pub x: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<String>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FullnessCounts {
    pub x: String,
    pub y: String,
    pub source: usize,
    pub encoded: usize,
    pub equal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InstanceSummary {
    pub name: String,
    pub size: (usize, usize),
    pub encoded_size: (usize, usize),
    pub aut_order: Option<usize>,
    pub encoded_aut_order: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EncoderInfo {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HarnessReport {
    pub encoder: EncoderInfo,
    pub kind: MorphismKind,
    pub instances: Vec<InstanceSummary>,
    pub checks: Vec<Verdict>,
    pub fullness: Vec<FullnessCounts>,
    pub passed: bool,
}

impl HarnessReport {
    pub fn failures(&self) -> impl Iterator<Item = &Verdict> {
        self.checks.iter().filter(|v| v.status != Status::Pass)
    }

    pub fn verdicts(&self, check: CheckName) -> impl Iterator<Item = &Verdict> {
        self.checks.iter().filter(move |v| v.check == check)
    }
}

/// Runs `f` over `items` on up to `jobs` threads, keeping input order.
fn parallel_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let jobs = jobs.max(1).min(items.len().max(1));
    if jobs == 1 {
        return items.iter().map(f).collect();
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut slots: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    let results = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                results.lock().expect("no worker panicked")[i] = Some(r);
            });
        }
    });
    slots.into_iter().map(|r| r.expect("every item processed")).collect()
}

/// Encodes every instance twice and insists on identical results.
pub fn encode_all(
    encoder: &dyn Encoder,
    instances: &[(String, IncidenceStructure)],
) -> Result<Vec<IncidenceStructure>, HarnessError> {
    instances
        .iter()
        .map(|(name, s)| {
            let a = encoder.encode(s)?;
            let b = encoder.encode(s)?;
            if a != b {
                return Err(HarnessError::NonDeterministic {
                    encoder: encoder.name(),
                    instance: name.clone(),
                });
            }
            Ok(a)
        })
        .collect()
}

/// Checks `x ≅ y ⇔ F(x) ≅ F(y)` and `x ⊑ y ⇔ F(x) ⊑ F(y)` for all pairs and
/// `Aut(x) ≅ Aut(F(x))` for every instance, plus isomorphism-count equality.
pub fn spb_check(
    encoder: &dyn Encoder,
    instances: &[(String, IncidenceStructure)],
    opts: HarnessOptions,
) -> Result<HarnessReport, HarnessError> {
    let encoded = encode_all(encoder, instances)?;
    let limits = SearchLimits::default().with_cap(opts.node_cap);
    let n = instances.len();

    // per-instance groups
    let idx: Vec<usize> = (0..n).collect();
    let groups = parallel_map(&idx, opts.jobs, |&i| -> Result<_, HarnessError> {
        let g = automorphism_group(&instances[i].1, opts.group_cap, opts.node_cap)?;
        let h = automorphism_group(&encoded[i], opts.group_cap, opts.node_cap)?;
        let cmp = compare_groups(&g, &h, opts.iso_order_cap);
        Ok((g, h, cmp))
    });
    let groups = groups.into_iter().collect::<Result<Vec<_>, _>>()?;

    // ordered pairs for embeddings; iso checks on i < j
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let pair_results = parallel_map(&pairs, opts.jobs, |&(i, j)| -> Result<_, HarnessError> {
        let (x, y) = (&instances[i].1, &instances[j].1);
        let (fx, fy) = (&encoded[i], &encoded[j]);
        let mut out = Vec::new();
        let mut counts = None;
        if i < j {
            let iso_src = isomorphisms(x, y, limits)?;
            let iso_enc = isomorphisms(fx, fy, limits)?;
            out.push(implication(
                CheckName::IsoForward,
                iso_src.first().map(|m| m.to_named(x, y)),
                !iso_enc.is_empty(),
                Side::Source,
            ));
            out.push(implication(
                CheckName::IsoBackward,
                iso_enc.first().map(|m| m.to_named(fx, fy)),
                !iso_src.is_empty(),
                Side::Encoded,
            ));
            counts = Some((iso_src.len(), iso_enc.len()));
        }
        let emb_src = find_embedding(x, y, opts.kind, opts.node_cap)?;
        let emb_enc = find_embedding(fx, fy, opts.kind, opts.node_cap)?;
        out.push(implication(
            CheckName::EmbedForward,
            emb_src.as_ref().map(|m| m.to_named(x, y)),
            emb_enc.is_some(),
            Side::Source,
        ));
        out.push(implication(
            CheckName::EmbedBackward,
            emb_enc.as_ref().map(|m| m.to_named(fx, fy)),
            emb_src.is_some(),
            Side::Encoded,
        ));
        Ok((out, counts))
    });

    let name = |i: usize| instances[i].0.clone();
    let mut checks = Vec::new();
    let mut fullness = Vec::new();
    for (i, (g, h, cmp)) in groups.iter().enumerate() {
        let status = match cmp {
            GroupComparison::Isomorphic { .. } => Status::Pass,
            GroupComparison::Undecided { .. } => Status::Undecided,
            _ => Status::Fail,
        };
        checks.push(Verdict {
            check: CheckName::AutIsomorphism,
            x: name(i),
            y: None,
            status,
            witness: (status != Status::Pass).then(|| Witness::Groups { comparison: cmp.clone() }),
        });
        if g.complete && h.complete {
            fullness.push(FullnessCounts {
                x: name(i),
                y: name(i),
                source: g.elements.len(),
                encoded: h.elements.len(),
                equal: g.elements.len() == h.elements.len(),
            });
        }
    }
    for (&(i, j), r) in pairs.iter().zip(pair_results) {
        let (verdicts, counts) = r?;
        for (check, status, witness) in verdicts {
            checks.push(Verdict {
                check,
                x: name(i),
                y: Some(name(j)),
                status,
                witness,
            });
        }
        if let Some((a, b)) = counts {
            fullness.push(FullnessCounts {
                x: name(i),
                y: name(j),
                source: a,
                encoded: b,
                equal: a == b,
            });
        }
    }
    // deterministic order: by check, then instance order
    checks.sort_by_key(|v| {
        let pos = |s: &str| instances.iter().position(|(n, _)| n == s).unwrap_or(usize::MAX);
        (v.check as u8, pos(&v.x), v.y.as_deref().map(pos))
    });
    fullness.sort_by_key(|c| {
        let pos = |s: &str| instances.iter().position(|(n, _)| n == s).unwrap_or(usize::MAX);
        (pos(&c.x), pos(&c.y))
    });

    let instances_out = instances
        .iter()
        .zip(&encoded)
        .zip(&groups)
        .map(|(((name, s), fs), (g, h, _))| InstanceSummary {
            name: name.clone(),
            size: s.size(),
            encoded_size: fs.size(),
            aut_order: g.order,
            encoded_aut_order: h.order,
        })
        .collect();
    let passed = checks.iter().all(|v| v.status == Status::Pass);
    Ok(HarnessReport {
        encoder: EncoderInfo {
            name: encoder.name(),
            version: encoder.version(),
        },
        kind: opts.kind,
        instances: instances_out,
        checks,
        fullness,
        passed,
    })
}

/// `premise ⇒ holds`, where `premise` is witnessed by a morphism on `side`.
fn implication(
    check: CheckName,
    premise: Option<NamedMorphism>,
    holds: bool,
    side: Side,
) -> (CheckName, Status, Option<Witness>) {
    match premise {
        Some(morphism) if !holds => (check, Status::Fail, Some(Witness::Morphism { side, morphism })),
        _ => (check, Status::Pass, None),
    }
}

/// `|Iso(x, y)|` against `|Iso(F(x), F(y))|`.
pub fn fullness_check(
    encoder: &dyn Encoder,
    x: &(String, IncidenceStructure),
    y: &(String, IncidenceStructure),
    node_cap: u64,
) -> Result<FullnessCounts, HarnessError> {
    let limits = SearchLimits::default().with_cap(node_cap);
    let fx = encoder.encode(&x.1)?;
    let fy = encoder.encode(&y.1)?;
    let a = isomorphisms(&x.1, &y.1, limits)?.len();
    let b = isomorphisms(&fx, &fy, limits)?.len();
    Ok(FullnessCounts {
        x: x.0.clone(),
        y: y.0.clone(),
        source: a,
        encoded: b,
        equal: a == b,
    })
}

/// Independently re-checks a failing verdict: the witness morphism must verify
/// on its side and exhaustive search must find nothing on the other side; a
/// group witness must show non-isomorphic groups on recomputation.
pub fn reverify_failure(
    verdict: &Verdict,
    instances: &[(String, IncidenceStructure)],
    encoder: &dyn Encoder,
    opts: HarnessOptions,
) -> Result<bool, HarnessError> {
    let find = |name: &str| instances.iter().find(|(n, _)| n == name).map(|(_, s)| s);
    let Some(x) = find(&verdict.x) else { return Ok(false) };
    let fx = encoder.encode(x)?;
    match (&verdict.witness, verdict.check) {
        (Some(Witness::Groups { .. }), CheckName::AutIsomorphism) => {
            let g = automorphism_group(x, opts.group_cap, opts.node_cap)?;
            let h = automorphism_group(&fx, opts.group_cap, opts.node_cap)?;
            Ok(!compare_groups(&h, &g, opts.iso_order_cap).is_isomorphic()
                && g.complete
                && h.complete
                && g.verify_closure_exhaustive().is_ok()
                && h.verify_closure_exhaustive().is_ok())
        }
        (Some(Witness::Morphism { side, morphism }), check) => {
            let Some(y) = verdict.y.as_deref().and_then(find) else {
                return Ok(false);
            };
            let fy = encoder.encode(y)?;
            let (witness_pair, other_pair) = match side {
                Side::Source => ((x, y), (&fx, &fy)),
                Side::Encoded => ((&fx, &fy), (x, y)),
            };
            let Some(m) = morphism.resolve(witness_pair.0, witness_pair.1) else {
                return Ok(false);
            };
            if !verify(witness_pair.0, witness_pair.1, &m) {
                return Ok(false);
            }
            let kind = match check {
                CheckName::IsoForward | CheckName::IsoBackward => MorphismKind::Isomorphism,
                _ => opts.kind,
            };
            let none = embeddings(
                other_pair.0,
                other_pair.1,
                kind,
                SearchLimits::first().with_cap(opts.node_cap),
            )?
            .is_empty();
            Ok(m.kind == kind && none)
        }
        _ => Ok(false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn small_instances() -> Vec<(String, IncidenceStructure)> {
        ["two_points", "triangle", "path3", "near_pencil", "quad", "rigid_path"]
            .iter()
            .map(|n| (n.to_string(), fixtures::by_name(n).unwrap()))
            .collect()
    }

    #[test]
    fn identity_passes() {
        let r = spb_check(&IdentityEncoder, &small_instances(), HarnessOptions::default()).unwrap();
        assert!(r.passed, "{:?}", r.failures().collect::<Vec<_>>());
        assert!(r.fullness.iter().all(|c| c.equal));
    }

    #[test]
    fn broken_fails_with_checkable_witness() {
        let inst = small_instances();
        let opts = HarnessOptions::default();
        let r = spb_check(&BrokenEncoder, &inst, opts).unwrap();
        assert!(!r.passed);
        let aut_fail = r
            .verdicts(CheckName::AutIsomorphism)
            .find(|v| v.x == "two_points")
            .unwrap();
        assert_eq!(aut_fail.status, Status::Fail);
        for v in r.failures() {
            assert!(reverify_failure(v, &inst, &BrokenEncoder, opts).unwrap(), "{v:?}");
        }
        let counts = fullness_check(&BrokenEncoder, &inst[0], &inst[0], DEFAULT_NODE_CAP).unwrap();
        assert_eq!((counts.source, counts.encoded, counts.equal), (2, 1, false));
    }

    #[test]
    fn jobs_do_not_change_the_report() {
        let inst = small_instances();
        let one = spb_check(&NaiveGraphEncoder, &inst, HarnessOptions::default()).unwrap();
        let four = spb_check(
            &NaiveGraphEncoder,
            &inst,
            HarnessOptions {
                jobs: 4,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(one, four);
    }

    struct Flaky(std::sync::atomic::AtomicUsize);

    impl Encoder for Flaky {
        fn name(&self) -> String {
            "flaky".into()
        }

        fn encode(&self, s: &IncidenceStructure) -> Result<IncidenceStructure, HarnessError> {
            if self.0.fetch_add(1, std::sync::atomic::Ordering::SeqCst).is_multiple_of(2) {
                Ok(s.clone())
            } else {
                BrokenEncoder.encode(s)
            }
        }
    }

    #[test]
    fn nondeterminism_is_detected() {
        let err = spb_check(
            &Flaky(0.into()),
            &small_instances(),
            HarnessOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, HarnessError::NonDeterministic { .. }));
    }
}

//! Extending embeddings along free extensions, and restricting embeddings of
//! extensions back to confined bases.

use serde::Serialize;

use crate::confinement::{confined_core, is_confined_finite};
use crate::extension::{extend, ExtensionTrace};
use crate::lattice::ClosureWitness;
use crate::morphism::{
    embeddings, is_lattice_embedding, is_lattice_embedding_by_tables, Morphism, MorphismKind, NamedMorphism,
    SearchLimits,
};
use crate::structure::{ElementRef, IncidenceStructure};
use crate::term::{ElementKind, TermKind};

use super::HarnessError;

/// Structures up to this many elements are re-verified on full lattice tables;
/// larger ones through the incidence characterization.
pub const TABLE_CHECK_LIMIT: usize = 1500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerificationMethod {
    Tables,
    IncidenceCharacterization,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub stage: usize,
    pub source_size: (usize, usize),
    pub target_size: (usize, usize),
    pub method: VerificationMethod,
    /// Generated elements whose substituted term was already present in the
    /// target under another name.
    pub resolved_existing: usize,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedEmbedding {
    pub morphism: Morphism,
    pub certificate: Certificate,
}

/// A meet or join of image elements that exists in the target but lies
/// outside the image.
pub fn unclosed_image(dst: &IncidenceStructure, f: &Morphism) -> Option<ClosureWitness> {
    let mut pin = vec![false; dst.point_count()];
    let mut lin = vec![false; dst.line_count()];
    for &p in &f.points {
        pin[p] = true;
    }
    for &l in &f.lines {
        lin[l] = true;
    }
    for t in 0..dst.line_count() {
        if lin[t] {
            continue;
        }
        let inside: Vec<usize> = dst.points_on(t).iter().copied().filter(|&q| pin[q]).take(2).collect();
        if let [a, b] = inside[..] {
            return Some(ClosureWitness {
                operation: ElementKind::Line,
                arguments: (dst.point(a).to_string(), dst.point(b).to_string()),
                missing: dst.line(t).to_string(),
            });
        }
    }
    for q in 0..dst.point_count() {
        if pin[q] {
            continue;
        }
        let inside: Vec<usize> = dst.lines_through(q).iter().copied().filter(|&t| lin[t]).take(2).collect();
        if let [a, b] = inside[..] {
            return Some(ClosureWitness {
                operation: ElementKind::Point,
                arguments: (dst.line(a).to_string(), dst.line(b).to_string()),
                missing: dst.point(q).to_string(),
            });
        }
    }
    None
}

fn check_shape(src: &IncidenceStructure, dst: &IncidenceStructure, f: &Morphism) -> Result<(), HarnessError> {
    let ok = f.points.len() == src.point_count()
        && f.lines.len() == src.line_count()
        && f.points.iter().all(|&p| p < dst.point_count())
        && f.lines.iter().all(|&l| l < dst.line_count());
    if ok {
        Ok(())
    } else {
        Err(HarnessError::Precondition(
            "morphism does not match the base structures".into(),
        ))
    }
}

/// Extends a complete lattice embedding `f` of the bases of two traces to
/// stage `n`, mapping `meet(l,m)` to the meet of the images of `l` and `m`
/// and `join(p,q)` to the join of the images of `p` and `q`. The result is
/// re-verified before it is returned.
pub fn extend_embedding(
    f: &Morphism,
    trace1: &ExtensionTrace,
    trace2: &ExtensionTrace,
    n: usize,
) -> Result<ExtendedEmbedding, HarnessError> {
    if trace1.mode != trace2.mode {
        return Err(HarnessError::Precondition("traces use different extension modes".into()));
    }
    let (b1, b2) = (trace1.base(), trace2.base());
    let (Some(s1), Some(s2)) = (trace1.stage(n), trace2.stage(n)) else {
        return Err(HarnessError::StageOutOfRange {
            stage: n,
            available: trace1.last_stage().min(trace2.last_stage()),
        });
    };
    check_shape(b1, b2, f)?;
    if let Some(witness) = unclosed_image(b2, f) {
        return Err(HarnessError::NotComplete(witness));
    }
    if !is_lattice_embedding(b1, b2, f) {
        return Err(HarnessError::Precondition("the base map is not a lattice embedding".into()));
    }

    let mut pmap = vec![usize::MAX; s1.point_count()];
    let mut lmap = vec![usize::MAX; s1.line_count()];
    let missing = |t: &crate::term::Term| HarnessError::Internal(format!("{t} is missing from a later stage"));
    for p in 0..b1.point_count() {
        let i = s1.point_index(b1.point(p)).ok_or_else(|| missing(b1.point(p)))?;
        let j = s2.point_index(b2.point(f.points[p])).ok_or_else(|| missing(b2.point(f.points[p])))?;
        pmap[i] = j;
    }
    for l in 0..b1.line_count() {
        let i = s1.line_index(b1.line(l)).ok_or_else(|| missing(b1.line(l)))?;
        let j = s2.line_index(b2.line(f.lines[l])).ok_or_else(|| missing(b2.line(f.lines[l])))?;
        lmap[i] = j;
    }

    // generated elements, arguments before results
    let mut generated: Vec<ElementRef> = (0..s1.point_count())
        .filter(|&p| pmap[p] == usize::MAX)
        .map(ElementRef::Point)
        .chain((0..s1.line_count()).filter(|&l| lmap[l] == usize::MAX).map(ElementRef::Line))
        .collect();
    generated.sort_by(|a, b| s1.term(*a).cmp(s1.term(*b)));

    let mut resolved_existing = 0;
    for e in generated {
        let term = s1.term(e);
        let (image, named) = match (e, term.kind()) {
            (ElementRef::Point(p), TermKind::Meet(a, b)) => {
                let (la, lb) = (s1.line_index(a), s1.line_index(b));
                let (Some(la), Some(lb)) = (la, lb) else {
                    return Err(HarnessError::Internal(format!("arguments of {term} are not lines")));
                };
                let (x, y) = (lmap[la], lmap[lb]);
                let q = s2
                    .meet_point(x, y)
                    .ok_or_else(|| HarnessError::Internal(format!("no meet for the image of {term}")))?;
                pmap[p] = q;
                let named = crate::term::Term::meet(s2.line(x), s2.line(y));
                (s2.point(q).clone(), named)
            }
            (ElementRef::Line(l), TermKind::Join(a, b)) => {
                let (pa, pb) = (s1.point_index(a), s1.point_index(b));
                let (Some(pa), Some(pb)) = (pa, pb) else {
                    return Err(HarnessError::Internal(format!("arguments of {term} are not points")));
                };
                let (x, y) = (pmap[pa], pmap[pb]);
                let t = s2
                    .joining_line(x, y)
                    .ok_or_else(|| HarnessError::Internal(format!("no join for the image of {term}")))?;
                lmap[l] = t;
                let named = crate::term::Term::join(s2.point(x), s2.point(y));
                (s2.line(t).clone(), named)
            }
            _ => {
                return Err(HarnessError::Internal(format!(
                    "{term} is in a later stage but not generated from earlier elements"
                )))
            }
        };
        if image != named {
            resolved_existing += 1;
        }
    }

    let morphism = Morphism {
        kind: MorphismKind::LatticeEmbedding,
        points: pmap,
        lines: lmap,
    };
    let method = if s1.element_count().max(s2.element_count()) <= TABLE_CHECK_LIMIT {
        VerificationMethod::Tables
    } else {
        VerificationMethod::IncidenceCharacterization
    };
    let verified = match method {
        VerificationMethod::Tables => is_lattice_embedding_by_tables(s1, s2, &morphism),
        VerificationMethod::IncidenceCharacterization => is_lattice_embedding(s1, s2, &morphism),
    };
    if !verified {
        return Err(HarnessError::Internal(format!(
            "extended map at stage {n} failed re-verification"
        )));
    }
    Ok(ExtendedEmbedding {
        morphism,
        certificate: Certificate {
            stage: n,
            source_size: s1.size(),
            target_size: s2.size(),
            method,
            resolved_existing,
            verified,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RestrictionCounterexample {
    pub morphism: NamedMorphism,
    /// A base element of the source whose image lies outside the target base.
    pub element: String,
    pub image: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RestrictionReport {
    pub n: usize,
    pub m: usize,
    pub kind: MorphismKind,
    pub confined: (bool, bool),
    /// The restriction claim only concerns confined bases.
    pub vacuous: bool,
    /// `core(F_n(S)) = core(S)`, for each input.
    pub core_identity: (bool, bool),
    pub embeddings: usize,
    pub counterexamples: Vec<RestrictionCounterexample>,
    pub passed: bool,
}

/// Enumerates every embedding `F_n(S1) -> F_m(S2)` and checks that each one
/// sends the elements of `S1` into `S2`; also checks that extension leaves the
/// confined core unchanged.
pub fn check_restriction(
    s1: &IncidenceStructure,
    s2: &IncidenceStructure,
    n: usize,
    m: usize,
    kind: MorphismKind,
    budget: usize,
    limits: SearchLimits,
) -> Result<RestrictionReport, HarnessError> {
    let mode = crate::extension::ExtensionMode::Full;
    let t1 = extend(s1, n, mode, budget)?;
    let t2 = extend(s2, m, mode, budget)?;
    for t in [&t1, &t2] {
        if t.is_truncated() {
            return Err(HarnessError::Budget(budget));
        }
    }
    let (f1, f2) = (t1.last(), t2.last());
    let core_identity = (
        confined_core(f1).core == confined_core(s1).core,
        confined_core(f2).core == confined_core(s2).core,
    );
    let confined = (is_confined_finite(s1), is_confined_finite(s2));
    let vacuous = !(confined.0 && confined.1);

    let found = embeddings(f1, f2, kind, limits)?;
    let mut counterexamples = Vec::new();
    for h in &found {
        let bad_point = (0..s1.point_count()).find_map(|p| {
            let i = f1.point_index(s1.point(p))?;
            let image = f2.point(h.points[i]);
            s2.point_index(image).is_none().then(|| (s1.point(p), image))
        });
        let bad_line = || {
            (0..s1.line_count()).find_map(|l| {
                let i = f1.line_index(s1.line(l))?;
                let image = f2.line(h.lines[i]);
                s2.line_index(image).is_none().then(|| (s1.line(l), image))
            })
        };
        if let Some((element, image)) = bad_point.or_else(bad_line) {
            counterexamples.push(RestrictionCounterexample {
                morphism: h.to_named(f1, f2),
                element: element.to_string(),
                image: image.to_string(),
            });
        }
    }
    let passed = core_identity.0 && core_identity.1 && (vacuous || counterexamples.is_empty());
    Ok(RestrictionReport {
        n,
        m,
        kind,
        confined,
        vacuous,
        core_identity,
        embeddings: found.len(),
        counterexamples,
        passed,
    })
}

//! Automorphism groups as explicit permutation groups, and a decision
//! procedure for isomorphism of two such groups.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::morphism::{isomorphisms, Morphism, SearchError, SearchLimits};
use crate::structure::IncidenceStructure;

/// A permutation of `0..n`, stored as its image list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Permutation(pub Vec<u32>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n as u32).collect())
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.0[x] as usize
    }

    /// First `self`, then `other`.
    pub fn then(&self, other: &Permutation) -> Permutation {
        Permutation(self.0.iter().map(|&x| other.0[x as usize]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u32; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x as usize] = i as u32;
        }
        Permutation(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    /// Smallest `k ≥ 1` with `self^k = id`.
    pub fn order(&self) -> usize {
        let n = self.0.len();
        let mut seen = vec![false; n];
        let mut order = 1usize;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.0[x] as usize;
                len += 1;
            }
            order = lcm(order, len);
        }
        order
    }

    /// The automorphism as a permutation of elements: points first, then lines.
    pub fn from_morphism(m: &Morphism) -> Permutation {
        let np = m.points.len();
        Permutation(
            m.points
                .iter()
                .map(|&p| p as u32)
                .chain(m.lines.iter().map(|&l| (np + l) as u32))
                .collect(),
        )
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Default cap on the number of automorphisms stored explicitly.
pub const DEFAULT_GROUP_CAP: usize = 1_000_000;
/// Default cap on group orders for isomorphism testing.
pub const DEFAULT_ISO_ORDER_CAP: usize = 10_000;

/// A finite permutation group. When `complete` is false only the listed
/// elements were found (the cap was hit) and `order` is unknown.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PermutationGroup {
    pub degree: usize,
    /// Sorted, so the identity comes first.
    pub elements: Vec<Permutation>,
    pub order: Option<usize>,
    pub complete: bool,
    /// Indices into `elements`.
    pub generators: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClosureFailure {
    MissingIdentity,
    Product { a: usize, b: usize },
    Inverse { a: usize },
    /// The generators do not reach this element.
    NotGenerated { a: usize },
}

impl PermutationGroup {
    /// Packages a set of permutations assumed to form a group, computing a
    /// generating set. Fails if the set is not closed.
    pub fn from_elements(degree: usize, mut elements: Vec<Permutation>) -> Result<Self, ClosureFailure> {
        elements.sort();
        elements.dedup();
        let generators = greedy_generators(&elements, degree);
        let group = PermutationGroup {
            degree,
            order: Some(elements.len()),
            elements,
            complete: true,
            generators,
        };
        group.verify_generated()?;
        Ok(group)
    }

    pub fn order(&self) -> Option<usize> {
        self.order
    }

    pub fn index_of(&self) -> HashMap<&Permutation, usize> {
        self.elements.iter().enumerate().map(|(i, p)| (p, i)).collect()
    }

    pub fn generator_perms(&self) -> Vec<&Permutation> {
        self.generators.iter().map(|&i| &self.elements[i]).collect()
    }

    /// The subgroup generated by the generators equals the element set.
    /// Cost is `|G|` times the number of generators.
    pub fn verify_generated(&self) -> Result<(), ClosureFailure> {
        let index = self.index_of();
        let id = Permutation::identity(self.degree);
        let Some(&id_idx) = index.get(&id) else {
            return Err(ClosureFailure::MissingIdentity);
        };
        let mut seen = vec![false; self.elements.len()];
        seen[id_idx] = true;
        let mut queue = VecDeque::from([id_idx]);
        let mut reached = 1;
        while let Some(a) = queue.pop_front() {
            for &g in &self.generators {
                let prod = self.elements[a].then(&self.elements[g]);
                match index.get(&prod) {
                    Some(&c) => {
                        if !seen[c] {
                            seen[c] = true;
                            reached += 1;
                            queue.push_back(c);
                        }
                    }
                    None => return Err(ClosureFailure::Product { a, b: g }),
                }
            }
        }
        if reached != self.elements.len() {
            let a = seen.iter().position(|s| !s).unwrap_or(0);
            return Err(ClosureFailure::NotGenerated { a });
        }
        Ok(())
    }

    /// Checks every product and every inverse. Quadratic in the order.
    pub fn verify_closure_exhaustive(&self) -> Result<(), ClosureFailure> {
        let index = self.index_of();
        if !index.contains_key(&Permutation::identity(self.degree)) {
            return Err(ClosureFailure::MissingIdentity);
        }
        for (a, pa) in self.elements.iter().enumerate() {
            if !index.contains_key(&pa.inverse()) {
                return Err(ClosureFailure::Inverse { a });
            }
            for (b, pb) in self.elements.iter().enumerate() {
                if !index.contains_key(&pa.then(pb)) {
                    return Err(ClosureFailure::Product { a, b });
                }
            }
        }
        Ok(())
    }
}

/// Picks generators greedily, preferring elements of large order, until the
/// generated subgroup covers `elements`.
fn greedy_generators(elements: &[Permutation], degree: usize) -> Vec<usize> {
    let index: HashMap<&Permutation, usize> = elements.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut by_order: Vec<usize> = (0..elements.len()).collect();
    let orders: Vec<usize> = elements.iter().map(Permutation::order).collect();
    by_order.sort_by_key(|&i| (std::cmp::Reverse(orders[i]), i));

    let mut in_span = vec![false; elements.len()];
    let mut span: Vec<usize> = Vec::new();
    if let Some(&id) = index.get(&Permutation::identity(degree)) {
        in_span[id] = true;
        span.push(id);
    }
    let mut generators = Vec::new();
    for &cand in &by_order {
        if in_span[cand] {
            continue;
        }
        generators.push(cand);
        // close the current span under all generators, old and new
        let mut queue: VecDeque<usize> = span.iter().copied().collect();
        while let Some(a) = queue.pop_front() {
            for &g in &generators {
                if let Some(&c) = index.get(&elements[a].then(&elements[g])) {
                    if !in_span[c] {
                        in_span[c] = true;
                        span.push(c);
                        queue.push_back(c);
                    }
                }
            }
        }
        if span.len() == elements.len() {
            break;
        }
    }
    generators.sort_unstable();
    generators
}

/// All automorphisms of `s`, as permutations of its elements (points, then
/// lines). If more than `cap` are found the search stops and the group is
/// returned incomplete, with generators picked from what was found.
pub fn automorphism_group(s: &IncidenceStructure, cap: usize, node_cap: u64) -> Result<PermutationGroup, SearchError> {
    let limits = SearchLimits {
        max_results: Some(cap.saturating_add(1)),
        node_cap,
    };
    let isos = isomorphisms(s, s, limits)?;
    let degree = s.element_count();
    let perms: Vec<Permutation> = isos.iter().map(Permutation::from_morphism).collect();
    if perms.len() <= cap {
        return Ok(PermutationGroup::from_elements(degree, perms)
            .expect("automorphisms of a structure form a group"));
    }
    let mut elements = perms;
    elements.truncate(cap);
    elements.sort();
    let generators = greedy_generators(&elements, degree);
    Ok(PermutationGroup {
        degree,
        elements,
        order: None,
        complete: false,
        generators,
    })
}

/// Abstract-group invariants compared before any pairing search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupInvariants {
    pub order: usize,
    /// `(element order, count)`, sorted.
    pub element_orders: Vec<(usize, usize)>,
    /// Sorted conjugacy class sizes.
    pub class_sizes: Vec<usize>,
}

pub fn invariants(g: &PermutationGroup) -> GroupInvariants {
    let mut hist: HashMap<usize, usize> = HashMap::new();
    for p in &g.elements {
        *hist.entry(p.order()).or_default() += 1;
    }
    let mut element_orders: Vec<_> = hist.into_iter().collect();
    element_orders.sort_unstable();
    let mut class_sizes: Vec<usize> = conjugacy_classes(g).iter().map(Vec::len).collect();
    class_sizes.sort_unstable();
    GroupInvariants {
        order: g.elements.len(),
        element_orders,
        class_sizes,
    }
}

/// Conjugacy classes, as orbits under conjugation by the generators.
pub fn conjugacy_classes(g: &PermutationGroup) -> Vec<Vec<usize>> {
    let index = g.index_of();
    let gens: Vec<(Permutation, Permutation)> = g
        .generator_perms()
        .into_iter()
        .map(|p| (p.inverse(), p.clone()))
        .collect();
    let mut class_of = vec![usize::MAX; g.elements.len()];
    let mut classes = Vec::new();
    for start in 0..g.elements.len() {
        if class_of[start] != usize::MAX {
            continue;
        }
        let id = classes.len();
        let mut class = vec![start];
        class_of[start] = id;
        let mut i = 0;
        while i < class.len() {
            let x = &g.elements[class[i]];
            for (inv, p) in &gens {
                let y = inv.then(x).then(p);
                if let Some(&j) = index.get(&y) {
                    if class_of[j] == usize::MAX {
                        class_of[j] = id;
                        class.push(j);
                    }
                }
            }
            i += 1;
        }
        class.sort_unstable();
        classes.push(class);
    }
    classes
}

/// Result of comparing two groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum GroupComparison {
    /// An isomorphism, given by generator images: `pairing[i] = (g_i, φ(g_i))`.
    Isomorphic { pairing: Vec<(Permutation, Permutation)> },
    /// The invariants differ; the first differing one is named.
    InvariantMismatch {
        invariant: String,
        left: GroupInvariants,
        right: GroupInvariants,
    },
    /// Invariants agree but no generator pairing extends to an isomorphism.
    NoPairing { order: usize, generators: usize },
    /// A group was incomplete or over the order cap.
    Undecided { reason: String },
}

impl GroupComparison {
    pub fn is_isomorphic(&self) -> bool {
        matches!(self, GroupComparison::Isomorphic { .. })
    }
}

/// Decides whether two finite permutation groups are isomorphic as abstract
/// groups. Returns a generator pairing on success.
pub fn compare_groups(g: &PermutationGroup, h: &PermutationGroup, order_cap: usize) -> GroupComparison {
    if !g.complete || !h.complete {
        return GroupComparison::Undecided {
            reason: "a group was not enumerated completely".into(),
        };
    }
    let (ig, ih) = (invariants(g), invariants(h));
    let mismatch = if ig.order != ih.order {
        Some("order")
    } else if ig.element_orders != ih.element_orders {
        Some("element-orders")
    } else if ig.class_sizes != ih.class_sizes {
        Some("class-sizes")
    } else {
        None
    };
    if let Some(name) = mismatch {
        return GroupComparison::InvariantMismatch {
            invariant: name.into(),
            left: ig,
            right: ih,
        };
    }
    if ig.order > order_cap {
        return GroupComparison::Undecided {
            reason: format!("order {} exceeds the cap {order_cap}", ig.order),
        };
    }
    match find_pairing(g, h) {
        Some(images) => GroupComparison::Isomorphic {
            pairing: g
                .generators
                .iter()
                .zip(images)
                .map(|(&a, b)| (g.elements[a].clone(), h.elements[b].clone()))
                .collect(),
        },
        None => GroupComparison::NoPairing {
            order: ig.order,
            generators: g.generators.len(),
        },
    }
}

/// Backtracking over images of `g`'s generators in `h`. After each choice the
/// partial map is extended over the generated subgroup and checked for
/// consistency and injectivity.
fn find_pairing(g: &PermutationGroup, h: &PermutationGroup) -> Option<Vec<usize>> {
    let gi = g.index_of();
    let hi = h.index_of();
    let h_orders: Vec<usize> = h.elements.iter().map(Permutation::order).collect();
    let gens = &g.generators;
    let mut images: Vec<usize> = Vec::with_capacity(gens.len());

    fn extend_map(
        g: &PermutationGroup,
        h: &PermutationGroup,
        gi: &HashMap<&Permutation, usize>,
        hi: &HashMap<&Permutation, usize>,
        gens: &[usize],
        images: &[usize],
    ) -> Option<usize> {
        let n = g.elements.len();
        let g_id = gi[&Permutation::identity(g.degree)];
        let h_id = hi[&Permutation::identity(h.degree)];
        let mut phi = vec![usize::MAX; n];
        let mut used = vec![false; h.elements.len()];
        phi[g_id] = h_id;
        used[h_id] = true;
        let mut queue = VecDeque::from([g_id]);
        let mut count = 1;
        while let Some(x) = queue.pop_front() {
            for (k, &gen) in gens[..images.len()].iter().enumerate() {
                let y = gi[&g.elements[x].then(&g.elements[gen])];
                let fy = hi[&h.elements[phi[x]].then(&h.elements[images[k]])];
                if phi[y] == usize::MAX {
                    if used[fy] {
                        return None;
                    }
                    phi[y] = fy;
                    used[fy] = true;
                    count += 1;
                    queue.push_back(y);
                } else if phi[y] != fy {
                    return None;
                }
            }
        }
        Some(count)
    }

    fn search(
        g: &PermutationGroup,
        h: &PermutationGroup,
        gi: &HashMap<&Permutation, usize>,
        hi: &HashMap<&Permutation, usize>,
        h_orders: &[usize],
        images: &mut Vec<usize>,
    ) -> bool {
        let k = images.len();
        if k == g.generators.len() {
            return extend_map(g, h, gi, hi, &g.generators, images) == Some(h.elements.len());
        }
        let want = g.elements[g.generators[k]].order();
        for cand in 0..h.elements.len() {
            if h_orders[cand] != want {
                continue;
            }
            images.push(cand);
            if extend_map(g, h, gi, hi, &g.generators, images).is_some()
                && search(g, h, gi, hi, h_orders, images)
            {
                return true;
            }
            images.pop();
        }
        false
    }

    if search(g, h, &gi, &hi, &h_orders, &mut images) {
        Some(images)
    } else {
        None
    }
}

/// Checks a claimed generator pairing: the induced map must be a well-defined
/// bijective homomorphism between the groups.
pub fn verify_pairing(g: &PermutationGroup, h: &PermutationGroup, pairing: &[(Permutation, Permutation)]) -> bool {
    let gi = g.index_of();
    let hi = h.index_of();
    let mut gens = Vec::new();
    let mut images = Vec::new();
    for (a, b) in pairing {
        match (gi.get(a), hi.get(b)) {
            (Some(&x), Some(&y)) => {
                gens.push(x);
                images.push(y);
            }
            _ => return false,
        }
    }
    if g.elements.len() != h.elements.len() {
        return false;
    }
    // the generators must generate g for the map to be defined everywhere
    let n = g.elements.len();
    let (Some(&g_id), Some(&h_id)) = (
        gi.get(&Permutation::identity(g.degree)),
        hi.get(&Permutation::identity(h.degree)),
    ) else {
        return false;
    };
    let mut phi = vec![usize::MAX; n];
    let mut used = HashSet::new();
    phi[g_id] = h_id;
    used.insert(h_id);
    let mut queue = VecDeque::from([g_id]);
    while let Some(x) = queue.pop_front() {
        for (k, &gen) in gens.iter().enumerate() {
            let Some(&y) = gi.get(&g.elements[x].then(&g.elements[gen])) else {
                return false;
            };
            let Some(&fy) = hi.get(&h.elements[phi[x]].then(&h.elements[images[k]])) else {
                return false;
            };
            if phi[y] == usize::MAX {
                if !used.insert(fy) {
                    return false;
                }
                phi[y] = fy;
                queue.push_back(y);
            } else if phi[y] != fy {
                return false;
            }
        }
    }
    if phi.contains(&usize::MAX) {
        return false;
    }
    // consistency along generator steps already makes phi a homomorphism;
    // small groups are also checked on every pair
    if n > 256 {
        return true;
    }
    for a in 0..n {
        for b in 0..n {
            let ab = gi[&g.elements[a].then(&g.elements[b])];
            let fab = hi.get(&h.elements[phi[a]].then(&h.elements[phi[b]]));
            if fab != Some(&phi[ab]) {
                return false;
            }
        }
    }
    true
}

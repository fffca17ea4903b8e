//! Brambles, their covers, k-linked sets and bramble-induced havens.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digraph::{Digraph, GraphError, VertexSet};
use crate::game::combinations_upto;
use crate::minors::{model_from_witness, MinorError, MinorWitness};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BrambleKind {
    /// Elements pairwise share a vertex.
    Strong,
    /// Elements pairwise share a vertex or are joined by edges both ways.
    Weak,
}

impl fmt::Display for BrambleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BrambleKind::Strong => "strong",
            BrambleKind::Weak => "weak",
        })
    }
}

#[derive(Debug, Error)]
pub enum ObstructionError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Minor(#[from] MinorError),
    #[error("not a valid {0} bramble")]
    InvalidBramble(BrambleKind),
    #[error("lifting is defined for strong brambles only")]
    WeakLift,
    #[error("{n} vertices exceed the cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("search budget of {0} steps exhausted")]
    Budget(u64),
    #[error("the set is not {0}-linked")]
    NotLinked(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bramble {
    pub kind: BrambleKind,
    pub elements: Vec<VertexSet>,
}

/// `{"kind": "strong", "elements": [["1", "2"], ["2", "3"]]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct BrambleJson {
    pub kind: BrambleKind,
    pub elements: Vec<Vec<String>>,
}

impl Bramble {
    pub fn to_json(&self, d: &Digraph) -> BrambleJson {
        BrambleJson {
            kind: self.kind,
            elements: self.elements.iter().map(|&e| d.set_names(e)).collect(),
        }
    }

    pub fn from_json(d: &Digraph, j: &BrambleJson) -> Result<Bramble, GraphError> {
        Ok(Bramble {
            kind: j.kind,
            elements: j.elements.iter().map(|e| d.set_of(e)).collect::<Result<_, _>>()?,
        })
    }
}

/// Whether two vertex sets may both belong to a bramble of this kind.
pub fn compatible(d: &Digraph, kind: BrambleKind, a: VertexSet, b: VertexSet) -> bool {
    if a.intersects(b) {
        return true;
    }
    kind == BrambleKind::Weak && edge_between(d, a, b) && edge_between(d, b, a)
}

fn edge_between(d: &Digraph, a: VertexSet, b: VertexSet) -> bool {
    a.iter().any(|v| d.out_neighbors(v).intersects(b))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "kebab-case")]
pub enum BrambleViolation {
    NotStronglyConnected { element: Vec<String> },
    Incompatible { first: Vec<String>, second: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrambleReport {
    pub valid: bool,
    pub violations: Vec<BrambleViolation>,
}

pub fn validate_bramble(d: &Digraph, b: &Bramble) -> BrambleReport {
    let mut violations = Vec::new();
    for &e in &b.elements {
        if !d.is_strongly_connected_set(e) {
            violations.push(BrambleViolation::NotStronglyConnected {
                element: d.set_names(e),
            });
        }
    }
    for (i, &x) in b.elements.iter().enumerate() {
        for &y in &b.elements[i + 1..] {
            if !compatible(d, b.kind, x, y) {
                violations.push(BrambleViolation::Incompatible {
                    first: d.set_names(x),
                    second: d.set_names(y),
                });
            }
        }
    }
    BrambleReport {
        valid: violations.is_empty(),
        violations,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverCertificate {
    pub cover: VertexSet,
    /// The branch and bound ran to completion.
    pub optimal: bool,
}

impl CoverCertificate {
    pub fn order(&self) -> usize {
        self.cover.len()
    }
}

/// Minimum hitting set of `sets`.
pub fn min_hitting_set(sets: &[VertexSet]) -> VertexSet {
    let mut sets: Vec<VertexSet> = sets.to_vec();
    sets.sort_by_key(|s| (s.len(), s.0));
    sets.dedup();
    // Supersets of other members are hit whenever those are.
    let minimal: Vec<VertexSet> = sets
        .iter()
        .copied()
        .filter(|&s| !sets.iter().any(|&t| t != s && t.is_subset(s)))
        .collect();
    let mut best = greedy_cover(&minimal);
    hit(&minimal, VertexSet::EMPTY, &mut best);
    best
}

fn greedy_cover(sets: &[VertexSet]) -> VertexSet {
    let mut cover = VertexSet::EMPTY;
    let mut open: Vec<VertexSet> = sets.to_vec();
    while !open.is_empty() {
        let all = open.iter().fold(VertexSet::EMPTY, |a, &s| a | s);
        let v = all
            .iter()
            .max_by_key(|&v| (open.iter().filter(|s| s.contains(v)).count(), std::cmp::Reverse(v)))
            .expect("nonempty");
        cover.insert(v);
        open.retain(|s| !s.contains(v));
    }
    cover
}

fn hit(sets: &[VertexSet], chosen: VertexSet, best: &mut VertexSet) {
    let open: Vec<VertexSet> = sets.iter().copied().filter(|s| !s.intersects(chosen)).collect();
    if open.is_empty() {
        if chosen.len() < best.len() {
            *best = chosen;
        }
        return;
    }
    // Pairwise disjoint open sets each need their own vertex.
    let mut packed = VertexSet::EMPTY;
    let mut bound = 0;
    for &s in &open {
        if !s.intersects(packed) {
            packed |= s;
            bound += 1;
        }
    }
    if chosen.len() + bound >= best.len() {
        return;
    }
    let pick = *open.iter().min_by_key(|s| (s.len(), s.0)).expect("nonempty");
    let mut order: Vec<usize> = pick.iter().collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(open.iter().filter(|s| s.contains(v)).count()), v));
    for v in order {
        hit(sets, chosen.with(v), best);
    }
}

/// Exact order of a valid bramble.
pub fn bramble_order(d: &Digraph, b: &Bramble) -> Result<CoverCertificate, ObstructionError> {
    if !validate_bramble(d, b).valid {
        return Err(ObstructionError::InvalidBramble(b.kind));
    }
    Ok(CoverCertificate {
        cover: min_hitting_set(&b.elements),
        optimal: true,
    })
}

/// Default vertex cap for [`bramble_number`].
pub const BRAMBLE_NUMBER_CAP: usize = 8;

/// Largest order of a bramble of the given kind, with a witness.
///
/// A bramble of order at least `k` exists exactly when every `X` with
/// `|X| < k` can be assigned a strong component of `D - X` such that the
/// assigned components are pairwise compatible: an element avoiding `X`
/// can always be grown to its whole component without losing
/// compatibility. That assignment problem is solved by backtracking.
pub fn bramble_number(d: &Digraph, kind: BrambleKind, cap: usize) -> Result<(usize, Bramble), ObstructionError> {
    if d.n() > cap {
        return Err(ObstructionError::TooLarge { n: d.n(), cap });
    }
    let mut best = Bramble {
        kind,
        elements: Vec::new(),
    };
    let mut order = 0;
    for k in 1..=d.n() {
        match assign_components(d, kind, k) {
            Some(elements) => {
                best = Bramble { kind, elements };
                order = k;
            }
            None => break,
        }
    }
    if order > 0 {
        order = min_hitting_set(&best.elements).len();
    }
    Ok((order, best))
}

fn assign_components(d: &Digraph, kind: BrambleKind, k: usize) -> Option<Vec<VertexSet>> {
    let xs = combinations_upto(d.vertices(), k - 1);
    let domains: Vec<Vec<VertexSet>> = xs.iter().map(|&x| d.scc_sets(d.vertices() - x)).collect();
    if domains.iter().any(|dom| dom.is_empty()) {
        return None;
    }
    let mut chosen: Vec<VertexSet> = Vec::with_capacity(xs.len());
    fn go(d: &Digraph, kind: BrambleKind, domains: &[Vec<VertexSet>], chosen: &mut Vec<VertexSet>) -> bool {
        let i = chosen.len();
        if i == domains.len() {
            return true;
        }
        for &c in &domains[i] {
            if chosen.iter().all(|&p| compatible(d, kind, p, c)) {
                chosen.push(c);
                if go(d, kind, domains, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    if !go(d, kind, &domains, &mut chosen) {
        return None;
    }
    chosen.sort_by_key(|s| s.0);
    chosen.dedup();
    Some(chosen)
}

/// Carries a strong bramble of `minor` into `host` through the model of a
/// minor witness: each element becomes the strong component, inside the
/// union of its vertices' images, that holds their branching roots.
pub fn lift_bramble(
    minor: &Digraph,
    host: &Digraph,
    w: &MinorWitness,
    b: &Bramble,
) -> Result<Bramble, ObstructionError> {
    if b.kind != BrambleKind::Strong {
        return Err(ObstructionError::WeakLift);
    }
    if !validate_bramble(minor, b).valid {
        return Err(ObstructionError::InvalidBramble(b.kind));
    }
    let mu = model_from_witness(minor, host, w)?;
    let mut elements = Vec::with_capacity(b.elements.len());
    for &e in &b.elements {
        let mut span = VertexSet::EMPTY;
        let mut roots = VertexSet::EMPTY;
        for v in e.iter() {
            span |= mu.vertex_images[v].vertices;
            roots.insert(mu.vertex_images[v].root);
        }
        let Some(r) = roots.first() else {
            return Err(ObstructionError::InvalidBramble(b.kind));
        };
        let comp = host.scc_of(r, span);
        debug_assert!(roots.is_subset(comp));
        elements.push(comp);
    }
    Ok(Bramble {
        kind: BrambleKind::Strong,
        elements,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkedSetReport {
    pub w: VertexSet,
    pub k: usize,
    /// A balanced separator of order at most `k`; `None` certifies that
    /// `w` is `k`-linked.
    pub balanced_separator: Option<VertexSet>,
}

impl LinkedSetReport {
    pub fn linked(&self) -> bool {
        self.balanced_separator.is_none()
    }
}

/// Whether every strong component of `D - s` holds at most `|w|/2`
/// vertices of `w`.
pub fn is_balanced_separator(d: &Digraph, w: VertexSet, s: VertexSet) -> bool {
    d.scc_sets(d.vertices() - s)
        .iter()
        .all(|c| 2 * (*c & w).len() <= w.len())
}

pub fn is_k_linked(d: &Digraph, w: VertexSet, k: usize, budget: u64) -> Result<LinkedSetReport, ObstructionError> {
    let mut steps = 0u64;
    let mut found = None;
    for s in combinations_upto(d.vertices(), k) {
        steps += 1;
        if steps > budget {
            return Err(ObstructionError::Budget(budget));
        }
        if is_balanced_separator(d, w, s) {
            found = Some(s);
            break;
        }
    }
    Ok(LinkedSetReport {
        w,
        k,
        balanced_separator: found,
    })
}

/// Default vertex cap for [`klinked_to_bramble`].
pub const MAJORITY_BRAMBLE_CAP: usize = 16;

/// The strongly connected vertex sets holding more than half of `w`; for a
/// `k`-linked `w` these pairwise intersect and need more than `k` vertices
/// to cover.
pub fn klinked_to_bramble(d: &Digraph, w: VertexSet, k: usize, budget: u64) -> Result<Bramble, ObstructionError> {
    if d.n() > MAJORITY_BRAMBLE_CAP {
        return Err(ObstructionError::TooLarge {
            n: d.n(),
            cap: MAJORITY_BRAMBLE_CAP,
        });
    }
    if !is_k_linked(d, w, k, budget)?.linked() {
        return Err(ObstructionError::NotLinked(k));
    }
    let elements = d
        .vertices()
        .subsets()
        .filter(|&s| 2 * (s & w).len() > w.len() && d.is_strongly_connected_set(s))
        .collect();
    Ok(Bramble {
        kind: BrambleKind::Strong,
        elements,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HavenFailure {
    /// Every element meets `x`.
    Undefined { x: VertexSet },
    /// `h(x)` is not inside `h(y)` although `y ⊆ x`.
    NotNested { x: VertexSet, y: VertexSet },
}

/// Default limits for [`bramble_haven_check`].
pub const HAVEN_VERTEX_CAP: usize = 10;
pub const HAVEN_ORDER_CAP: usize = 4;

/// Checks that `h(X)`, the strong component of `D - X` around the first
/// element of `b` avoiding `X`, is a haven of order `k`.
pub fn bramble_haven_check(d: &Digraph, b: &Bramble, k: usize) -> Result<Result<(), HavenFailure>, ObstructionError> {
    if d.n() > HAVEN_VERTEX_CAP || k > HAVEN_ORDER_CAP {
        return Err(ObstructionError::TooLarge {
            n: d.n(),
            cap: HAVEN_VERTEX_CAP,
        });
    }
    let h = |x: VertexSet| -> Option<VertexSet> {
        let e = b.elements.iter().find(|e| !e.intersects(x))?;
        Some(d.scc_of(e.first()?, d.vertices() - x))
    };
    if k == 0 {
        return Ok(Ok(()));
    }
    for x in combinations_upto(d.vertices(), k - 1) {
        let Some(hx) = h(x) else {
            return Ok(Err(HavenFailure::Undefined { x }));
        };
        for v in x.iter() {
            let y = x.without(v);
            let hy = h(y).expect("defined on smaller sets first");
            if !hx.is_subset(hy) {
                return Ok(Err(HavenFailure::NotNested { x, y }));
            }
        }
    }
    Ok(Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> Digraph {
        let e: Vec<_> = (0..n)
            .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
            .collect();
        Digraph::from_indices(n, &e).unwrap()
    }

    fn random(rng: &mut impl rand::Rng, n: usize, p: f64) -> Digraph {
        let mut e = Vec::new();
        for u in 0..n {
            for v in 0..n {
                if u != v && rng.gen_bool(p) {
                    e.push((u, v));
                }
            }
        }
        Digraph::from_indices(n, &e).unwrap()
    }

    /// Largest order over all families of strongly connected sets.
    fn brute_bramble_number(d: &Digraph, kind: BrambleKind) -> usize {
        let sc: Vec<VertexSet> = d
            .vertices()
            .subsets()
            .filter(|&s| d.is_strongly_connected_set(s))
            .collect();
        assert!(sc.len() <= 16);
        let mut best = 0;
        for mask in 1u32..(1 << sc.len()) {
            let fam: Vec<VertexSet> = (0..sc.len()).filter(|i| mask >> i & 1 == 1).map(|i| sc[i]).collect();
            let ok = fam
                .iter()
                .enumerate()
                .all(|(i, &a)| fam[i + 1..].iter().all(|&b| compatible(d, kind, a, b)));
            if ok {
                best = best.max(min_hitting_set(&fam).len());
            }
        }
        best
    }

    #[test]
    fn triangle_pairs() {
        let d = complete(3);
        let b = Bramble {
            kind: BrambleKind::Strong,
            elements: vec![
                VertexSet::from_indices([0, 1]),
                VertexSet::from_indices([1, 2]),
                VertexSet::from_indices([0, 2]),
            ],
        };
        assert!(validate_bramble(&d, &b).valid);
        assert_eq!(bramble_order(&d, &b).unwrap().order(), 2);
        assert!(bramble_haven_check(&d, &b, 2).unwrap().is_ok());
        assert!(matches!(
            bramble_haven_check(&d, &b, 3).unwrap(),
            Err(HavenFailure::Undefined { .. })
        ));
        let single = Bramble {
            kind: BrambleKind::Strong,
            elements: vec![VertexSet::singleton(1)],
        };
        assert_eq!(bramble_order(&d, &single).unwrap().cover, VertexSet::singleton(1));
    }

    #[test]
    fn bramble_number_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let mut checked = 0;
        while checked < 60 {
            let n = rng.gen_range(1..=4);
            let d = random(&mut rng, n, 0.5);
            if d.vertices()
                .subsets()
                .filter(|&s| d.is_strongly_connected_set(s))
                .count()
                > 16
            {
                continue;
            }
            for kind in [BrambleKind::Strong, BrambleKind::Weak] {
                let (order, wit) = bramble_number(&d, kind, 8).unwrap();
                assert!(validate_bramble(&d, &wit).valid);
                assert_eq!(order, brute_bramble_number(&d, kind), "{kind} {d:?}");
            }
            checked += 1;
        }
        let cycle = Digraph::from_indices(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_eq!(bramble_number(&cycle, BrambleKind::Strong, 8).unwrap().0, 1);
    }

    #[test]
    fn complete_graph_is_linked() {
        let d = complete(5);
        let r = is_k_linked(&d, d.vertices(), 2, 1_000_000).unwrap();
        assert!(r.linked());
        let b = klinked_to_bramble(&d, d.vertices(), 2, 1_000_000).unwrap();
        assert!(bramble_order(&d, &b).unwrap().order() >= 3);
        assert!(!is_k_linked(&d, VertexSet::EMPTY, 0, 10).unwrap().linked());
    }
}

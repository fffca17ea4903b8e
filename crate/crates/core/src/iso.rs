//! Isomorphism, monomorphism and canonical forms for small digraphs.

use std::collections::{BTreeMap, HashSet};

use crate::digraph::{Digraph, VertexSet};

/// Colour refinement run jointly on several graphs so colours are comparable
/// across them.
pub fn refine_colours(graphs: &[&Digraph]) -> Vec<Vec<u32>> {
    let mut colours: Vec<Vec<u32>> = graphs
        .iter()
        .map(|g| {
            (0..g.n())
                .map(|v| ((g.out_degree(v) as u32) << 16) | g.in_degree(v) as u32)
                .collect()
        })
        .collect();
    let mut classes = usize::MAX;
    loop {
        let mut table: BTreeMap<(u32, Vec<u32>, Vec<u32>), u32> = BTreeMap::new();
        let mut sigs = Vec::with_capacity(graphs.len());
        for (gi, g) in graphs.iter().enumerate() {
            let c = &colours[gi];
            let mut per = Vec::with_capacity(g.n());
            for v in 0..g.n() {
                let mut outs: Vec<u32> = g.out_neighbors(v).iter().map(|w| c[w]).collect();
                let mut ins: Vec<u32> = g.in_neighbors(v).iter().map(|w| c[w]).collect();
                outs.sort_unstable();
                ins.sort_unstable();
                per.push((c[v], outs, ins));
            }
            sigs.push(per);
        }
        for per in &sigs {
            for s in per {
                let next = table.len() as u32;
                table.entry(s.clone()).or_insert(next);
            }
        }
        // Renumber in sorted signature order so colours do not depend on
        // vertex order.
        for (i, v) in table.values_mut().enumerate() {
            *v = i as u32;
        }
        let next: Vec<Vec<u32>> = sigs.iter().map(|per| per.iter().map(|s| table[s]).collect()).collect();
        colours = next;
        if table.len() == classes {
            return colours;
        }
        classes = table.len();
    }
}

struct Matcher<'a> {
    p: &'a Digraph,
    h: &'a Digraph,
    induced: bool,
    order: Vec<usize>,
    cand: Vec<VertexSet>,
    map: Vec<usize>,
    mapped: VertexSet,
    used: VertexSet,
}

impl Matcher<'_> {
    fn search(&mut self, i: usize) -> bool {
        if i == self.order.len() {
            return true;
        }
        let v = self.order[i];
        let mut c = self.cand[v] - self.used;
        for w in (self.p.out_neighbors(v) & self.mapped).iter() {
            c &= self.h.in_neighbors(self.map[w]);
        }
        for w in (self.p.in_neighbors(v) & self.mapped).iter() {
            c &= self.h.out_neighbors(self.map[w]);
        }
        if self.induced {
            for w in (self.mapped - self.p.out_neighbors(v)).iter() {
                c -= self.h.in_neighbors(self.map[w]);
            }
            for w in (self.mapped - self.p.in_neighbors(v)).iter() {
                c -= self.h.out_neighbors(self.map[w]);
            }
        }
        for x in c.iter() {
            self.map[v] = x;
            self.mapped.insert(v);
            self.used.insert(x);
            if self.search(i + 1) {
                return true;
            }
            self.mapped.remove(v);
            self.used.remove(x);
        }
        false
    }
}

fn match_order(p: &Digraph) -> Vec<usize> {
    let deg = |v: usize| p.out_degree(v) + p.in_degree(v);
    let mut order = Vec::with_capacity(p.n());
    let mut placed = VertexSet::EMPTY;
    while order.len() < p.n() {
        let best = (p.vertices() - placed)
            .iter()
            .max_by_key(|&v| {
                let nb = p.out_neighbors(v) | p.in_neighbors(v);
                ((nb & placed).len(), deg(v), usize::MAX - v)
            })
            .expect("unplaced vertex");
        order.push(best);
        placed.insert(best);
    }
    order
}

/// An isomorphism `a -> b` as a vector indexed by `a`'s vertices.
pub fn find_isomorphism(a: &Digraph, b: &Digraph) -> Option<Vec<usize>> {
    if a.n() != b.n() || a.edge_count() != b.edge_count() {
        return None;
    }
    let cols = refine_colours(&[a, b]);
    let mut ca = cols[0].clone();
    let mut cb = cols[1].clone();
    ca.sort_unstable();
    cb.sort_unstable();
    if ca != cb {
        return None;
    }
    let cand = (0..a.n())
        .map(|v| (0..b.n()).filter(|&x| cols[1][x] == cols[0][v]).collect())
        .collect();
    run(a, b, true, cand)
}

/// An injective map `pattern -> host` sending edges to edges.
pub fn find_monomorphism(pattern: &Digraph, host: &Digraph) -> Option<Vec<usize>> {
    if pattern.n() > host.n() || pattern.edge_count() > host.edge_count() {
        return None;
    }
    let cand = (0..pattern.n())
        .map(|v| {
            (0..host.n())
                .filter(|&x| host.out_degree(x) >= pattern.out_degree(v) && host.in_degree(x) >= pattern.in_degree(v))
                .collect()
        })
        .collect();
    run(pattern, host, false, cand)
}

fn run(p: &Digraph, h: &Digraph, induced: bool, cand: Vec<VertexSet>) -> Option<Vec<usize>> {
    let mut m = Matcher {
        p,
        h,
        induced,
        order: match_order(p),
        cand,
        map: vec![usize::MAX; p.n()],
        mapped: VertexSet::EMPTY,
        used: VertexSet::EMPTY,
    };
    m.search(0).then_some(m.map)
}

pub fn is_isomorphic(a: &Digraph, b: &Digraph) -> bool {
    find_isomorphism(a, b).is_some()
}

/// Canonical adjacency code under all vertex permutations; for `n <= 8`.
pub fn canonical_code(d: &Digraph) -> Vec<u64> {
    let n = d.n();
    assert!(n <= 8, "canonical_code is for tiny graphs");
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<Vec<u64>> = None;
    loop {
        let code = code_under(d, &perm);
        if best.as_ref().map_or(true, |b| code < *b) {
            best = Some(code);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best.unwrap_or_default()
}

fn code_under(d: &Digraph, perm: &[usize]) -> Vec<u64> {
    let n = d.n();
    let mut inv = vec![0; n];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    let mut rows = vec![0u64; n];
    for (u, v) in d.edges() {
        rows[inv[u]] |= 1 << inv[v];
    }
    rows
}

pub(crate) fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// One representative of every isomorphism class of digraphs on `n`
/// vertices, in order of first appearance when edge sets are enumerated
/// as bitmasks.
pub fn all_digraphs_up_to_iso(n: usize) -> Vec<Digraph> {
    assert!(n <= 4, "exhaustive enumeration is limited to n <= 4");
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
        .collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for mask in 0u32..(1 << pairs.len()) {
        let edges: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        let d = Digraph::from_indices(n, &edges).expect("valid");
        if seen.insert(canonical_code(&d)) {
            out.push(d);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_counts() {
        let counts: Vec<usize> = (1..=4).map(|n| all_digraphs_up_to_iso(n).len()).collect();
        assert_eq!(counts, vec![1, 3, 16, 218]);
    }

    #[test]
    fn isomorphism_of_relabelled_cycle() {
        let a = Digraph::from_indices(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let b = Digraph::from_indices(4, &[(2, 0), (0, 3), (3, 1), (1, 2)]).unwrap();
        let m = find_isomorphism(&a, &b).unwrap();
        for (u, v) in a.edges() {
            assert!(b.has_edge(m[u], m[v]));
        }
        let path = Digraph::from_indices(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert!(!is_isomorphic(&a, &path));
        assert!(find_monomorphism(&path, &a).is_some());
        assert!(find_monomorphism(&a, &path).is_none());
    }

    #[test]
    fn isomorphism_agrees_with_canonical_codes() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let n = rng.gen_range(1..=5);
            let mut gen = || {
                let mut e = Vec::new();
                for u in 0..n {
                    for v in 0..n {
                        if u != v && rng.gen_bool(0.35) {
                            e.push((u, v));
                        }
                    }
                }
                Digraph::from_indices(n, &e).unwrap()
            };
            let (a, b) = (gen(), gen());
            assert_eq!(is_isomorphic(&a, &b), canonical_code(&a) == canonical_code(&b));
        }
    }
}

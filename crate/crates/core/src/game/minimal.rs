//! Robber-monotone strategy trees with the fewest nodes.
//!
//! A subproblem `(C, U)` has the cops on `C` and the robber somewhere in
//! `U`, a union of strong components of `D - C`; its cost is the number of
//! tree nodes below the edges that cover `U`. One edge may cover several
//! components at once, so `U` is either split into two parts or handed to a
//! single child with cops `C'`, whose subproblem is `(C', U - C')`.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use super::{combinations_upto, successor_spaces, GameError, StrategyTree};
use crate::digraph::{Digraph, VertexSet};

#[derive(Debug, Clone)]
pub struct MinTreeResult {
    /// Fewest nodes of a robber-monotone tree rooted at the given cops, or
    /// `None` if no such tree exists.
    pub nodes: Option<usize>,
    pub tree: Option<StrategyTree>,
    pub subproblems: usize,
    pub moves: u64,
}

#[derive(Clone, Copy)]
enum Choice {
    Split(VertexSet),
    Move(VertexSet),
}

type Key = (VertexSet, VertexSet);

struct Node {
    splits: Vec<VertexSet>,
    moves: Vec<VertexSet>,
}

/// Exhaustive search over robber-monotone strategy trees of width at most
/// `k` whose root holds `root_cops`.
pub fn min_monotone_tree(d: &Digraph, k: usize, root_cops: VertexSet, budget: u64) -> Result<MinTreeResult, GameError> {
    let all = d.vertices();
    let start = all - root_cops;
    if start.is_empty() {
        return Ok(MinTreeResult {
            nodes: Some(1),
            tree: Some(StrategyTree::single(root_cops)),
            subproblems: 0,
            moves: 0,
        });
    }
    let mut nodes: HashMap<Key, Node> = HashMap::new();
    let mut todo = vec![(root_cops, start)];
    let mut moves = 0u64;
    while let Some((c, u)) = todo.pop() {
        if nodes.contains_key(&(c, u)) {
            continue;
        }
        let comps = d.scc_sets(u);
        let mut splits = Vec::new();
        for mask in 1..(1u64 << (comps.len() - 1)) {
            // Parts that contain the first component, proper subsets only.
            let mut part = comps[0];
            for (i, comp) in comps.iter().enumerate().skip(1) {
                if mask >> (i - 1) & 1 == 1 {
                    part |= *comp;
                }
            }
            if part == u {
                continue;
            }
            splits.push(part);
            todo.push((c, part));
            todo.push((c, u - part));
        }
        if comps.len() > 1 {
            splits.push(comps[0]);
            todo.push((c, comps[0]));
            todo.push((c, u - comps[0]));
        }
        let mut legal = BTreeSet::new();
        for x in c.subsets() {
            let mut need = x;
            for comp in &comps {
                let s = d.scc_of(comp.first().expect("nonempty"), all - x);
                need |= s - *comp;
            }
            if need.len() > k {
                continue;
            }
            for extra in combinations_upto(all - need, k - need.len()) {
                moves += 1;
                if moves > budget {
                    return Err(GameError::Budget(budget));
                }
                let c2 = need | extra;
                if legal.contains(&c2) {
                    continue;
                }
                debug_assert!(comps
                    .iter()
                    .all(|&r| successor_spaces(d, c, c2, r).iter().all(|s| s.is_subset(r))));
                legal.insert(c2);
                let rest = u - c2;
                if !rest.is_empty() {
                    todo.push((c2, rest));
                }
            }
        }
        nodes.insert(
            (c, u),
            Node {
                splits,
                moves: legal.into_iter().collect(),
            },
        );
    }

    // Solve by growing robber region; within one region only moves that
    // avoid it keep the region, and those form a shortest-path problem.
    let mut by_region: HashMap<VertexSet, Vec<VertexSet>> = HashMap::new();
    for &(c, u) in nodes.keys() {
        by_region.entry(u).or_default().push(c);
    }
    let mut regions: Vec<VertexSet> = by_region.keys().copied().collect();
    regions.sort_by_key(|u| (u.len(), u.0));
    let mut cost: HashMap<Key, (usize, Choice)> = HashMap::new();
    for u in regions {
        let mut members = by_region.remove(&u).expect("region");
        members.sort_by_key(|c| c.0);
        let mut best: HashMap<VertexSet, (usize, Choice)> = HashMap::new();
        let mut back: HashMap<VertexSet, Vec<VertexSet>> = HashMap::new();
        for &c in &members {
            let node = &nodes[&(c, u)];
            let mut b: Option<(usize, Choice)> = None;
            let mut offer = |val: usize, ch: Choice| {
                if b.map_or(true, |(v, _)| val < v) {
                    b = Some((val, ch));
                }
            };
            for &part in &node.splits {
                if let (Some(a), Some(z)) = (cost.get(&(c, part)), cost.get(&(c, u - part))) {
                    offer(a.0 + z.0, Choice::Split(part));
                }
            }
            for &c2 in &node.moves {
                let rest = u - c2;
                if rest.is_empty() {
                    offer(1, Choice::Move(c2));
                } else if rest == u {
                    back.entry(c2).or_default().push(c);
                } else if let Some(&(v, _)) = cost.get(&(c2, rest)) {
                    offer(1 + v, Choice::Move(c2));
                }
            }
            if let Some(v) = b {
                best.insert(c, v);
            }
        }
        let mut heap: BinaryHeap<Reverse<(usize, u128)>> = best.iter().map(|(c, v)| Reverse((v.0, c.0))).collect();
        let mut done: BTreeSet<u128> = BTreeSet::new();
        while let Some(Reverse((val, c))) = heap.pop() {
            if !done.insert(c) || best[&VertexSet(c)].0 != val {
                continue;
            }
            for &p in back.get(&VertexSet(c)).map(|v| v.as_slice()).unwrap_or(&[]) {
                let cand = val + 1;
                if best.get(&p).map_or(true, |&(v, _)| cand < v) {
                    best.insert(p, (cand, Choice::Move(VertexSet(c))));
                    heap.push(Reverse((cand, p.0)));
                }
            }
        }
        for (c, v) in best {
            cost.insert((c, u), v);
        }
    }

    let subproblems = nodes.len();
    let Some(&(total, _)) = cost.get(&(root_cops, start)) else {
        return Ok(MinTreeResult {
            nodes: None,
            tree: None,
            subproblems,
            moves,
        });
    };
    let mut tree = StrategyTree::single(root_cops);
    let mut stack = vec![(0usize, root_cops, start)];
    while let Some((t, c, u)) = stack.pop() {
        match cost[&(c, u)].1 {
            Choice::Split(part) => {
                stack.push((t, c, u - part));
                stack.push((t, c, part));
            }
            Choice::Move(c2) => {
                let child = tree.push_child(t, u, c2);
                let rest = u - c2;
                if !rest.is_empty() {
                    stack.push((child, c2, rest));
                }
            }
        }
    }
    debug_assert_eq!(tree.len(), total + 1);
    Ok(MinTreeResult {
        nodes: Some(total + 1),
        tree: Some(tree),
        subproblems,
        moves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::validate_strategy_tree;

    #[test]
    fn two_cycles_share_a_child() {
        // Two triangles through a common vertex 0.
        let d = Digraph::from_indices(5, &[(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 0)]).unwrap();
        let r = min_monotone_tree(&d, 2, VertexSet::singleton(0), 1_000_000).unwrap();
        let ts = r.tree.unwrap();
        let rep = validate_strategy_tree(&d, &ts);
        assert!(rep.valid && rep.robber_monotone, "{rep:?}");
        assert_eq!(Some(ts.len()), r.nodes);
        // {0} then {0,1} and {0,2} per side would take 5 nodes; covering
        // both sides by a single edge does not help here, {0,1},{0,2},
        // {0,3},{0,4} each needs the robber pinned by 0.
        assert!(r.nodes.unwrap() <= 5);
    }

    #[test]
    fn impossible_root_reports_none() {
        let k3: Vec<(usize, usize)> = (0..3)
            .flat_map(|u| (0..3).filter(move |&v| v != u).map(move |v| (u, v)))
            .collect();
        let d = Digraph::from_indices(3, &k3).unwrap();
        let r = min_monotone_tree(&d, 2, VertexSet::singleton(0), 1_000_000).unwrap();
        assert_eq!(r.nodes, None);
    }
}

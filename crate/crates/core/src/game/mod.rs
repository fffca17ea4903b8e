//! The directed cops-and-robber game: strategy trees, exact solvers and
//! play simulation.

mod minimal;
mod play;
mod solve;

pub use minimal::{min_monotone_tree, MinTreeResult};
pub use play::{
    audit_tree_against_all_robbers, simulate_play, ArenaCops, CopStrategy, GreedyRobber, Play, RobberStrategy,
    StationaryRobber, TreeCops,
};
pub use solve::{audit_escape, cop_number, solve_game, Arena, GameOptions, SolveResult, Winner};

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decomp::{validate, Decomposition};
use crate::digraph::{escape, Digraph, GraphError, VertexSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GameMode {
    Free,
    /// Cops may only announce positions that never enlarge the robber space.
    RobberMonotone,
}

impl fmt::Display for GameMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GameMode::Free => "free",
            GameMode::RobberMonotone => "robber-monotone",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Culprit {
    Cops,
    Robber,
}

impl fmt::Display for Culprit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Culprit::Cops => "cop",
            Culprit::Robber => "robber",
        })
    }
}

#[derive(Debug, Error)]
pub enum GameError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("strategy tree: {0}")]
    Tree(String),
    #[error("decomposition is not a valid {0} decomposition")]
    InvalidDecomposition(String),
    #[error("arena needs {0} states, above the cap of {1}")]
    TooLarge(usize, usize),
    #[error("search budget of {0} steps exhausted")]
    Budget(u64),
    #[error("illegal {culprit} move in round {round}: {detail}")]
    IllegalMove {
        culprit: Culprit,
        round: usize,
        detail: String,
    },
}

/// Cops on `cops`, robber somewhere in the strong component `robber` of
/// the graph minus the cops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position {
    pub cops: VertexSet,
    pub robber: VertexSet,
}

/// A rooted tree with cop positions on nodes and robber spaces on edges.
/// The robber space of an edge is stored at its head.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyTree {
    pub ids: Vec<String>,
    pub cops: Vec<VertexSet>,
    pub parent: Vec<Option<usize>>,
    pub robber: Vec<VertexSet>,
    pub root: usize,
}

impl StrategyTree {
    pub fn single(cops: VertexSet) -> StrategyTree {
        StrategyTree {
            ids: vec!["s0".into()],
            cops: vec![cops],
            parent: vec![None],
            robber: vec![VertexSet::EMPTY],
            root: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn push_child(&mut self, parent: usize, robber: VertexSet, cops: VertexSet) -> usize {
        let i = self.len();
        self.ids.push(format!("s{i}"));
        self.cops.push(cops);
        self.parent.push(Some(parent));
        self.robber.push(robber);
        i
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut kids = vec![Vec::new(); self.len()];
        for (t, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                kids[*p].push(t);
            }
        }
        kids
    }

    pub fn preorder(&self) -> Vec<usize> {
        let kids = self.children();
        let mut out = Vec::with_capacity(self.len());
        let mut stack = vec![self.root];
        while let Some(t) = stack.pop() {
            out.push(t);
            stack.extend(kids[t].iter().rev());
        }
        out
    }

    /// Largest cop position.
    pub fn width(&self) -> usize {
        self.cops.iter().map(|c| c.len()).max().unwrap_or(0)
    }

    pub fn node(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// First node, in preorder, whose cop position is `cops`.
    pub fn node_with_cops(&self, cops: VertexSet) -> Option<usize> {
        self.preorder().into_iter().find(|&t| self.cops[t] == cops)
    }

    pub fn check_tree(&self) -> Result<(), GameError> {
        let n = self.len();
        if n == 0 || self.root >= n || self.parent[self.root].is_some() {
            return Err(GameError::Tree("missing or malformed root".into()));
        }
        if self.cops.len() != n || self.robber.len() != n || self.parent.len() != n {
            return Err(GameError::Tree("label arrays have inconsistent lengths".into()));
        }
        for (i, p) in self.parent.iter().enumerate() {
            match p {
                None if i != self.root => return Err(GameError::Tree(format!("node `{}` has no parent", self.ids[i]))),
                Some(p) if *p >= n => return Err(GameError::Tree("parent out of range".into())),
                _ => {}
            }
        }
        if self.preorder().len() != n {
            return Err(GameError::Tree("tree edges contain a cycle".into()));
        }
        Ok(())
    }

    pub fn to_json(&self, d: &Digraph) -> StrategyJson {
        let order = self.preorder();
        StrategyJson {
            root: self.ids[self.root].clone(),
            nodes: order
                .iter()
                .map(|&t| StrategyNodeJson {
                    id: self.ids[t].clone(),
                    cops: d.set_names(self.cops[t]),
                })
                .collect(),
            edges: order
                .iter()
                .filter_map(|&t| {
                    self.parent[t].map(|p| StrategyEdgeJson {
                        from: self.ids[p].clone(),
                        to: self.ids[t].clone(),
                        robber: d.set_names(self.robber[t]),
                    })
                })
                .collect(),
        }
    }

    pub fn from_json(d: &Digraph, j: &StrategyJson) -> Result<StrategyTree, GameError> {
        let mut index = HashMap::new();
        let mut ids = Vec::new();
        let mut cops = Vec::new();
        for node in &j.nodes {
            if index.insert(node.id.clone(), ids.len()).is_some() {
                return Err(GameError::Tree(format!("duplicate node id `{}`", node.id)));
            }
            ids.push(node.id.clone());
            cops.push(d.set_of(&node.cops)?);
        }
        let n = ids.len();
        let mut parent = vec![None; n];
        let mut robber = vec![VertexSet::EMPTY; n];
        let lookup = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| GameError::Tree(format!("unknown node `{id}`")))
        };
        for e in &j.edges {
            let a = lookup(&e.from)?;
            let b = lookup(&e.to)?;
            if parent[b].is_some() {
                return Err(GameError::Tree(format!("node `{}` has two parents", e.to)));
            }
            parent[b] = Some(a);
            robber[b] = d.set_of(&e.robber)?;
        }
        let ts = StrategyTree {
            ids,
            cops,
            parent,
            robber,
            root: lookup(&j.root)?,
        };
        ts.check_tree()?;
        Ok(ts)
    }

    /// GraphViz rendering: node label = cops, edge label = robber space.
    pub fn to_dot(&self, d: &Digraph) -> String {
        let label = |s: VertexSet| {
            let names = d.set_names(s);
            if names.is_empty() {
                "∅".to_string()
            } else {
                escape(&names.join(","))
            }
        };
        let mut out = String::from("digraph strategy {\n  node [shape=ellipse];\n");
        for t in self.preorder() {
            out.push_str(&format!(
                "  \"{}\" [label=\"{}\"];\n",
                escape(&self.ids[t]),
                label(self.cops[t])
            ));
        }
        for t in self.preorder() {
            if let Some(p) = self.parent[t] {
                out.push_str(&format!(
                    "  \"{}\" -> \"{}\" [label=\"{}\"];\n",
                    escape(&self.ids[p]),
                    escape(&self.ids[t]),
                    label(self.robber[t])
                ));
            }
        }
        out.push_str("}\n");
        out
    }

    /// Keeps only the nodes marked `keep` (closed under parents).
    fn retain(&self, keep: &[bool], root: usize) -> StrategyTree {
        let mut pos = vec![usize::MAX; self.len()];
        let mut out = StrategyTree {
            ids: Vec::new(),
            cops: Vec::new(),
            parent: Vec::new(),
            robber: Vec::new(),
            root: 0,
        };
        let mut order = Vec::new();
        let kids = self.children();
        let mut stack = vec![root];
        while let Some(t) = stack.pop() {
            order.push(t);
            stack.extend(kids[t].iter().rev().filter(|&&c| keep[c]));
        }
        for (i, &t) in order.iter().enumerate() {
            pos[t] = i;
        }
        for &t in &order {
            out.ids.push(self.ids[t].clone());
            out.cops.push(self.cops[t]);
            out.parent.push(if t == root {
                None
            } else {
                self.parent[t].map(|p| pos[p])
            });
            out.robber
                .push(if t == root { VertexSet::EMPTY } else { self.robber[t] });
        }
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct StrategyNodeJson {
    pub id: String,
    pub cops: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct StrategyEdgeJson {
    pub from: String,
    pub to: String,
    pub robber: Vec<String>,
}

/// `{"root": "s0", "nodes": [{"id", "cops"}], "edges": [{"from", "to", "robber"}]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct StrategyJson {
    pub root: String,
    pub nodes: Vec<StrategyNodeJson>,
    pub edges: Vec<StrategyEdgeJson>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverFailure {
    /// No outgoing edge contains the component.
    Uncovered,
    /// The component meets more than one outgoing edge.
    Overlap,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyViolation {
    pub node: String,
    pub component: Vec<String>,
    pub failure: CoverFailure,
}

/// A pair of consecutive edges along which the robber space grows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotonicityBreak {
    pub node: String,
    pub before: Vec<String>,
    pub after: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyReport {
    pub valid: bool,
    pub width: usize,
    pub nodes: usize,
    pub robber_monotone: bool,
    pub violations: Vec<StrategyViolation>,
    pub breaks: Vec<MonotonicityBreak>,
}

/// Strong components of `D - next` the robber can reach from `space`
/// while the cops move from `prev` to `next`.
pub fn successor_spaces(d: &Digraph, prev: VertexSet, next: VertexSet, space: VertexSet) -> Vec<VertexSet> {
    let Some(v) = space.first() else {
        return Vec::new();
    };
    let z = d.scc_of(v, d.vertices() - (prev & next));
    d.scc_sets(z - next)
}

pub fn validate_strategy_tree(d: &Digraph, ts: &StrategyTree) -> StrategyReport {
    let mut report = StrategyReport {
        valid: true,
        width: ts.width(),
        nodes: ts.len(),
        robber_monotone: true,
        violations: Vec::new(),
        breaks: Vec::new(),
    };
    if let Err(e) = ts.check_tree() {
        report.valid = false;
        report.violations.push(StrategyViolation {
            node: e.to_string(),
            component: Vec::new(),
            failure: CoverFailure::Uncovered,
        });
        return report;
    }
    let kids = ts.children();
    let all = d.vertices();
    let cover = |t: usize, comps: &[VertexSet], report: &mut StrategyReport| {
        for &c in comps {
            let containing = kids[t].iter().filter(|&&u| c.is_subset(ts.robber[u])).count();
            let meeting = kids[t].iter().filter(|&&u| c.intersects(ts.robber[u])).count();
            let failure = if containing == 0 {
                CoverFailure::Uncovered
            } else if meeting > 1 {
                CoverFailure::Overlap
            } else {
                continue;
            };
            report.valid = false;
            report.violations.push(StrategyViolation {
                node: ts.ids[t].clone(),
                component: d.set_names(c),
                failure,
            });
        }
    };
    cover(ts.root, &d.scc_sets(all - ts.cops[ts.root]), &mut report);
    for t in ts.preorder() {
        let Some(s) = ts.parent[t] else { continue };
        let mut relevant = BTreeSet::new();
        for c in d.scc_sets(all - ts.cops[s]) {
            if !c.is_subset(ts.robber[t]) {
                continue;
            }
            for c2 in successor_spaces(d, ts.cops[s], ts.cops[t], c) {
                relevant.insert(c2);
                let covered = kids[t].iter().any(|&u| c2.is_subset(ts.robber[u]));
                if covered && !c2.is_subset(c) {
                    report.robber_monotone = false;
                    report.breaks.push(MonotonicityBreak {
                        node: ts.ids[t].clone(),
                        before: d.set_names(c),
                        after: d.set_names(c2),
                    });
                }
            }
        }
        cover(t, &relevant.into_iter().collect::<Vec<_>>(), &mut report);
    }
    report
}

/// Strategy tree with `cops(t) = Γ(t)` and `robber(e) = β(T_t) - γ(e)`.
pub fn dtd_to_strategy_tree(d: &Digraph, t: &Decomposition) -> Result<StrategyTree, GameError> {
    if !validate(d, t).valid {
        return Err(GameError::InvalidDecomposition(t.flavor.to_string()));
    }
    let gamma = t.big_gamma();
    let below = t.subtree_unions();
    Ok(StrategyTree {
        ids: t.ids.clone(),
        cops: gamma,
        parent: t.parent.clone(),
        robber: (0..t.len())
            .map(|i| {
                if i == t.root {
                    VertexSet::EMPTY
                } else {
                    below[i] - t.guard[i]
                }
            })
            .collect(),
        root: t.root,
    })
}

/// Moves the root to `r_new` one tree edge at a time, reassigning robber
/// spaces breadth first and dropping subtrees whose space becomes empty.
pub fn reroot_strategy_tree(d: &Digraph, ts: &StrategyTree, r_new: usize) -> Result<StrategyTree, GameError> {
    if r_new >= ts.len() {
        return Err(GameError::Tree(format!("no node with index {r_new}")));
    }
    let report = validate_strategy_tree(d, ts);
    if !report.valid {
        return Err(GameError::Tree("input strategy tree is not valid".into()));
    }
    let mut path = vec![r_new];
    while let Some(p) = ts.parent[*path.last().expect("nonempty")] {
        path.push(p);
    }
    path.reverse();
    let mut cur = ts.clone();
    let mut alive = vec![true; ts.len()];
    for w in path.windows(2) {
        reroot_step(d, &mut cur, &mut alive, w[0], w[1]);
    }
    Ok(cur.retain(&alive, r_new))
}

fn reroot_step(d: &Digraph, ts: &mut StrategyTree, alive: &mut [bool], r_old: usize, r_new: usize) {
    let kids = ts.children();
    let mut old_side = vec![false; ts.len()];
    let mut stack = vec![r_new];
    while let Some(t) = stack.pop() {
        old_side[t] = true;
        stack.extend(kids[t].iter().filter(|&&c| alive[c]));
    }
    let mut taken = ts.cops[r_new];
    for &c in kids[r_new].iter().filter(|&&c| alive[c]) {
        taken |= ts.robber[c];
    }
    ts.parent[r_old] = Some(r_new);
    ts.parent[r_new] = None;
    ts.robber[r_old] = d.vertices() - taken;
    ts.robber[r_new] = VertexSet::EMPTY;
    ts.root = r_new;

    let kids = ts.children();
    let all = d.vertices();
    let mut queue = VecDeque::from([r_new]);
    while let Some(t) = queue.pop_front() {
        let live: Vec<usize> = kids[t].iter().copied().filter(|&c| alive[c]).collect();
        for c in live {
            if t != r_new && !old_side[t] {
                let s = ts.parent[t].expect("non-root");
                let mut space = VertexSet::EMPTY;
                for comp in d.scc_sets(all - ts.cops[s]) {
                    if !comp.is_subset(ts.robber[t]) {
                        continue;
                    }
                    for c2 in successor_spaces(d, ts.cops[s], ts.cops[t], comp) {
                        if c2.is_subset(ts.robber[c]) {
                            space |= c2;
                        }
                    }
                }
                ts.robber[c] = space;
                if space.is_empty() {
                    let mut stack = vec![c];
                    while let Some(x) = stack.pop() {
                        alive[x] = false;
                        stack.extend(kids[x].iter().copied());
                    }
                    continue;
                }
            }
            queue.push_back(c);
        }
    }
}

/// All subsets of `pool` with at most `k` elements, by size and then
/// lexicographically.
pub fn combinations_upto(pool: VertexSet, k: usize) -> Vec<VertexSet> {
    let items = pool.to_vec();
    let mut out = vec![VertexSet::EMPTY];
    let mut frontier = vec![(VertexSet::EMPTY, 0usize)];
    for _ in 0..k.min(items.len()) {
        let mut next = Vec::new();
        for &(s, from) in &frontier {
            for (i, &v) in items.iter().enumerate().skip(from) {
                let t = s.with(v);
                out.push(t);
                next.push((t, i + 1));
            }
        }
        frontier = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::{exact_width, Flavor};

    fn cycle(n: usize) -> Digraph {
        let e: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Digraph::from_indices(n, &e).unwrap()
    }

    #[test]
    fn root_missing_component_is_reported() {
        let d = Digraph::from_indices(2, &[]).unwrap();
        let mut ts = StrategyTree::single(VertexSet::EMPTY);
        ts.push_child(0, VertexSet::singleton(0), VertexSet::singleton(0));
        let r = validate_strategy_tree(&d, &ts);
        assert!(!r.valid);
        assert_eq!(r.violations[0].node, "s0");
        assert_eq!(r.violations[0].failure, CoverFailure::Uncovered);
    }

    #[test]
    fn path_tree_on_triangle_reroots_at_leaf() {
        let d = cycle(3);
        let mut ts = StrategyTree::single(VertexSet::singleton(0));
        let a = ts.push_child(0, VertexSet::from_indices([1, 2]), VertexSet::from_indices([0, 1]));
        let b = ts.push_child(a, VertexSet::singleton(2), VertexSet::from_indices([0, 2]));
        assert!(validate_strategy_tree(&d, &ts).valid);
        let re = reroot_strategy_tree(&d, &ts, b).unwrap();
        let rep = validate_strategy_tree(&d, &re);
        assert!(rep.valid, "{rep:?}");
        assert!(re.len() <= ts.len());
        assert_eq!(re.ids[re.root], "s2");
        assert_eq!(reroot_strategy_tree(&d, &ts, 0).unwrap(), ts);
    }

    #[test]
    fn decompositions_become_strategy_trees() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..60 {
            let n = rng.gen_range(1..=5);
            let mut e = Vec::new();
            for u in 0..n {
                for v in 0..n {
                    if u != v && rng.gen_bool(0.4) {
                        e.push((u, v));
                    }
                }
            }
            let d = Digraph::from_indices(n, &e).unwrap();
            for flavor in Flavor::ALL {
                let r = exact_width(&d, flavor, None).unwrap();
                let ts = dtd_to_strategy_tree(&d, &r.certificate).unwrap();
                let rep = validate_strategy_tree(&d, &ts);
                assert!(rep.valid, "{flavor:?} {e:?} {rep:?}");
                assert_eq!(rep.width, r.width + 1);
                for t in 0..ts.len() {
                    assert!(validate_strategy_tree(&d, &reroot_strategy_tree(&d, &ts, t).unwrap()).valid);
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let d = cycle(3);
        let mut ts = StrategyTree::single(VertexSet::singleton(0));
        ts.push_child(0, VertexSet::from_indices([1, 2]), VertexSet::from_indices([0, 1]));
        let j = serde_json::to_string(&ts.to_json(&d)).unwrap();
        let back = StrategyTree::from_json(&d, &serde_json::from_str(&j).unwrap()).unwrap();
        assert_eq!(back, ts);
    }
}

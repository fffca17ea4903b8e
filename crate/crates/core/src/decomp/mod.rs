//! Directed tree decompositions in seven flavors, their validation and
//! width.

mod exact;
mod transform;

pub use exact::{
    exact_width, exact_width_capped, sc_width_at_most, ExactError, ExactResult, ScSearchOptions, ScSearchResult,
};
pub use transform::{
    deletable_nodes, lift_contraction, minorize, remove_deletable_empty_bags, reroot_ncwe, restrict_to_subgraph,
    split_bag, usc_to_scv, TransformError,
};

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digraph::{escape, Digraph, GraphError, VertexSet};

/// Which definition the guard condition follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Flavor {
    /// No walk leaves and re-enters a subtree.
    #[serde(rename = "NW")]
    Nw,
    /// No closed walk crosses a subtree boundary; nonempty bags.
    #[serde(rename = "NCW")]
    Ncw,
    /// As `Ncw`, but bags other than the root may be empty.
    #[serde(rename = "NCWE")]
    NcwE,
    /// Subtrees are strong components of the graph minus the guard, at most
    /// `n²` tree nodes.
    #[serde(rename = "SC0")]
    Sc0,
    /// `Sc0` without the bound on the number of tree nodes.
    #[serde(rename = "SC0v")]
    Sc0v,
    /// Subtrees are unions of strong components of the graph minus the guard.
    #[serde(rename = "USC0")]
    Usc0,
    /// Strong components, nonempty bags, children's subtrees avoid incident guards.
    #[serde(rename = "SCd")]
    Scd,
}

impl Flavor {
    pub const ALL: [Flavor; 7] = [
        Flavor::Nw,
        Flavor::Ncw,
        Flavor::NcwE,
        Flavor::Sc0,
        Flavor::Sc0v,
        Flavor::Usc0,
        Flavor::Scd,
    ];

    /// The five flavors compared by the width lattice.
    pub const MAIN: [Flavor; 5] = [Flavor::Nw, Flavor::Ncw, Flavor::NcwE, Flavor::Sc0, Flavor::Scd];

    pub fn as_str(self) -> &'static str {
        match self {
            Flavor::Nw => "NW",
            Flavor::Ncw => "NCW",
            Flavor::NcwE => "NCWE",
            Flavor::Sc0 => "SC0",
            Flavor::Sc0v => "SC0v",
            Flavor::Usc0 => "USC0",
            Flavor::Scd => "SCd",
        }
    }

    /// Whether every bag must be nonempty.
    pub fn nonempty_bags(self) -> bool {
        matches!(self, Flavor::Nw | Flavor::Ncw | Flavor::Scd)
    }

    /// Whether `β(T_t)` must be exactly one strong component of `D - γ(e)`.
    pub fn single_component(self) -> bool {
        matches!(self, Flavor::Sc0 | Flavor::Sc0v | Flavor::Scd)
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Flavor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "NW" | "nw" => Ok(Flavor::Nw),
            "NCW" | "ncw" => Ok(Flavor::Ncw),
            "NCWE" | "NCW0" | "ncwe" | "ncw0" => Ok(Flavor::NcwE),
            "SC0" | "sc0" | "SCE" => Ok(Flavor::Sc0),
            "SC0v" | "sc0v" => Ok(Flavor::Sc0v),
            "USC0" | "usc0" => Ok(Flavor::Usc0),
            "SCd" | "scd" | "SCD" => Ok(Flavor::Scd),
            other => Err(format!("unknown flavor `{other}`")),
        }
    }
}

#[derive(Debug, Error)]
pub enum DecompError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("malformed tree: {0}")]
    Tree(String),
}

/// A rooted tree with bags on nodes and guards on edges.
///
/// Each non-root node stores the guard of the edge from its parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub flavor: Flavor,
    pub ids: Vec<String>,
    pub bags: Vec<VertexSet>,
    pub parent: Vec<Option<usize>>,
    pub guard: Vec<VertexSet>,
    pub root: usize,
}

impl Decomposition {
    /// A one-node decomposition holding every vertex.
    pub fn trivial(d: &Digraph, flavor: Flavor) -> Decomposition {
        Decomposition {
            flavor,
            ids: vec!["n0".into()],
            bags: vec![d.vertices()],
            parent: vec![None],
            guard: vec![VertexSet::EMPTY],
            root: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }

    /// Adds a node below `parent` and returns its index.
    pub fn push_child(&mut self, parent: usize, bag: VertexSet, guard: VertexSet) -> usize {
        let i = self.bags.len();
        self.ids.push(format!("n{i}"));
        self.bags.push(bag);
        self.parent.push(Some(parent));
        self.guard.push(guard);
        i
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.len()];
        for (i, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                ch[*p].push(i);
            }
        }
        ch
    }

    /// Nodes in an order where parents precede children.
    pub fn preorder(&self) -> Vec<usize> {
        let ch = self.children();
        let mut out = Vec::with_capacity(self.len());
        let mut stack = vec![self.root];
        while let Some(t) = stack.pop() {
            out.push(t);
            for &c in ch[t].iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    /// `β(T_t)` for every node.
    pub fn subtree_unions(&self) -> Vec<VertexSet> {
        let mut acc = self.bags.clone();
        for &t in self.preorder().iter().rev() {
            if let Some(p) = self.parent[t] {
                let a = acc[t];
                acc[p] |= a;
            }
        }
        acc
    }

    /// `Γ(t)`: the bag of `t` together with all incident guards.
    pub fn big_gamma(&self) -> Vec<VertexSet> {
        let mut g = self.bags.clone();
        for t in 0..self.len() {
            if let Some(p) = self.parent[t] {
                g[t] |= self.guard[t];
                g[p] |= self.guard[t];
            }
        }
        g
    }

    /// `max |Γ(t)| - 1`.
    pub fn width(&self) -> i64 {
        self.big_gamma().iter().map(|s| s.len() as i64).max().unwrap_or(0) - 1
    }

    /// Checks the rooted-tree structure (single root, no cycles).
    pub fn check_tree(&self) -> Result<(), DecompError> {
        let n = self.len();
        if n == 0 {
            return Err(DecompError::Tree("no nodes".into()));
        }
        if self.ids.len() != n || self.parent.len() != n || self.guard.len() != n {
            return Err(DecompError::Tree("inconsistent array lengths".into()));
        }
        if self.root >= n || self.parent[self.root].is_some() {
            return Err(DecompError::Tree("root has a parent".into()));
        }
        for (i, p) in self.parent.iter().enumerate() {
            match p {
                None if i != self.root => {
                    return Err(DecompError::Tree(format!("node `{}` has no parent", self.ids[i])))
                }
                Some(p) if *p >= n => return Err(DecompError::Tree("parent out of range".into())),
                _ => {}
            }
        }
        if self.preorder().len() != n {
            return Err(DecompError::Tree("tree edges contain a cycle".into()));
        }
        Ok(())
    }

    /// JSON form with vertex names from `d`.
    pub fn to_json(&self, d: &Digraph) -> DecompositionJson {
        let order = self.preorder();
        DecompositionJson {
            flavor: self.flavor,
            root: self.ids[self.root].clone(),
            nodes: order
                .iter()
                .map(|&t| NodeJson {
                    id: self.ids[t].clone(),
                    bag: d.set_names(self.bags[t]),
                })
                .collect(),
            edges: order
                .iter()
                .filter_map(|&t| {
                    self.parent[t].map(|p| EdgeJson {
                        from: self.ids[p].clone(),
                        to: self.ids[t].clone(),
                        guard: d.set_names(self.guard[t]),
                    })
                })
                .collect(),
        }
    }

    pub fn from_json(d: &Digraph, j: &DecompositionJson) -> Result<Decomposition, DecompError> {
        let mut index = HashMap::new();
        let mut ids = Vec::new();
        let mut bags = Vec::new();
        for node in &j.nodes {
            if index.insert(node.id.clone(), ids.len()).is_some() {
                return Err(DecompError::Tree(format!("duplicate node id `{}`", node.id)));
            }
            ids.push(node.id.clone());
            bags.push(d.set_of(&node.bag)?);
        }
        let n = ids.len();
        let mut parent = vec![None; n];
        let mut guard = vec![VertexSet::EMPTY; n];
        let lookup = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| DecompError::Tree(format!("unknown node `{id}`")))
        };
        for e in &j.edges {
            let a = lookup(&e.from)?;
            let b = lookup(&e.to)?;
            if parent[b].is_some() {
                return Err(DecompError::Tree(format!("node `{}` has two parents", e.to)));
            }
            parent[b] = Some(a);
            guard[b] = d.set_of(&e.guard)?;
        }
        let root = lookup(&j.root)?;
        let t = Decomposition {
            flavor: j.flavor,
            ids,
            bags,
            parent,
            guard,
            root,
        };
        t.check_tree()?;
        Ok(t)
    }

    /// GraphViz rendering: node label = bag, edge label = guard.
    pub fn to_dot(&self, d: &Digraph) -> String {
        let label = |s: VertexSet| {
            let names = d.set_names(s);
            if names.is_empty() {
                "∅".to_string()
            } else {
                escape(&names.join(","))
            }
        };
        let mut out = format!("digraph {} {{\n  node [shape=box, style=rounded];\n", self.flavor);
        for t in self.preorder() {
            out.push_str(&format!(
                "  \"{}\" [label=\"{}\"];\n",
                escape(&self.ids[t]),
                label(self.bags[t])
            ));
        }
        for t in self.preorder() {
            if let Some(p) = self.parent[t] {
                out.push_str(&format!(
                    "  \"{}\" -> \"{}\" [label=\"{}\"];\n",
                    escape(&self.ids[p]),
                    escape(&self.ids[t]),
                    label(self.guard[t])
                ));
            }
        }
        out.push_str("}\n");
        out
    }

    /// Replaces node ids by `n0, n1, ...` in preorder.
    pub fn renumber(&self) -> Decomposition {
        let order = self.preorder();
        let mut pos = vec![usize::MAX; self.len()];
        for (i, &t) in order.iter().enumerate() {
            pos[t] = i;
        }
        Decomposition {
            flavor: self.flavor,
            ids: (0..order.len()).map(|i| format!("n{i}")).collect(),
            bags: order.iter().map(|&t| self.bags[t]).collect(),
            parent: order.iter().map(|&t| self.parent[t].map(|p| pos[p])).collect(),
            guard: order.iter().map(|&t| self.guard[t]).collect(),
            root: 0,
        }
    }

    pub fn with_flavor(&self, flavor: Flavor) -> Decomposition {
        let mut t = self.clone();
        t.flavor = flavor;
        t
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct NodeJson {
    pub id: String,
    pub bag: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct EdgeJson {
    pub from: String,
    pub to: String,
    pub guard: Vec<String>,
}

/// `{"flavor": "SC0", "root": "n0", "nodes": [...], "edges": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct DecompositionJson {
    pub flavor: Flavor,
    pub root: String,
    pub nodes: Vec<NodeJson>,
    pub edges: Vec<EdgeJson>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Partition,
    RootEmpty,
    GuardCondition,
    SizeBound,
    ChildGuardDisjointness,
}

/// Where a violation was found.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Location {
    Tree,
    Node(String),
    Edge(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Witness {
    None,
    Set(Vec<String>),
    Walk(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub location: Location,
    pub detail: String,
    pub witness: Witness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlavorReport {
    pub flavor: Flavor,
    pub valid: bool,
    pub width: i64,
    pub violations: Vec<Violation>,
}

/// Checks every condition of `t.flavor`; the width is reported regardless of
/// validity.
pub fn validate(d: &Digraph, t: &Decomposition) -> FlavorReport {
    let mut v = Vec::new();
    if let Err(e) = t.check_tree() {
        v.push(Violation {
            kind: ViolationKind::Partition,
            location: Location::Tree,
            detail: e.to_string(),
            witness: Witness::None,
        });
        return FlavorReport {
            flavor: t.flavor,
            valid: false,
            width: t.width(),
            violations: v,
        };
    }
    let flavor = t.flavor;
    let node = |i: usize| Location::Node(t.ids[i].clone());
    let edge = |i: usize| Location::Edge(t.ids[t.parent[i].expect("non-root")].clone(), t.ids[i].clone());

    // Bags partition V(D).
    let mut seen = VertexSet::EMPTY;
    for i in t.preorder() {
        let b = t.bags[i];
        if !b.is_subset(d.vertices()) {
            v.push(Violation {
                kind: ViolationKind::Partition,
                location: node(i),
                detail: "bag contains an unknown vertex".into(),
                witness: Witness::None,
            });
        }
        if b.intersects(seen) {
            v.push(Violation {
                kind: ViolationKind::Partition,
                location: node(i),
                detail: "bag overlaps an earlier bag".into(),
                witness: Witness::Set(d.set_names(b & seen)),
            });
        }
        seen |= b;
        if b.is_empty() {
            if flavor.nonempty_bags() {
                v.push(Violation {
                    kind: ViolationKind::Partition,
                    location: node(i),
                    detail: "empty bag".into(),
                    witness: Witness::None,
                });
            } else if i == t.root {
                v.push(Violation {
                    kind: ViolationKind::RootEmpty,
                    location: node(i),
                    detail: "root bag is empty".into(),
                    witness: Witness::None,
                });
            }
        }
    }
    if seen != d.vertices() {
        v.push(Violation {
            kind: ViolationKind::Partition,
            location: Location::Tree,
            detail: "bags do not cover every vertex".into(),
            witness: Witness::Set(d.set_names(d.vertices() - seen)),
        });
    }

    let sub = t.subtree_unions();
    let all = d.vertices();
    for i in t.preorder() {
        if t.parent[i].is_none() {
            continue;
        }
        let y = sub[i];
        let g = t.guard[i];
        if let Some((detail, witness)) = edge_condition(d, flavor, y, g) {
            v.push(Violation {
                kind: ViolationKind::GuardCondition,
                location: edge(i),
                detail,
                witness,
            });
        }
        let _ = all;
    }

    if flavor == Flavor::Sc0 && t.len() > d.n() * d.n() {
        v.push(Violation {
            kind: ViolationKind::SizeBound,
            location: Location::Tree,
            detail: format!("{} tree nodes exceed |V(D)|² = {}", t.len(), d.n() * d.n()),
            witness: Witness::None,
        });
    }

    if flavor == Flavor::Scd {
        let ch = t.children();
        for i in t.preorder() {
            let mut below = VertexSet::EMPTY;
            let mut guards = if t.parent[i].is_some() {
                t.guard[i]
            } else {
                VertexSet::EMPTY
            };
            for &c in &ch[i] {
                below |= sub[c];
                guards |= t.guard[c];
            }
            if below.intersects(guards) {
                v.push(Violation {
                    kind: ViolationKind::ChildGuardDisjointness,
                    location: node(i),
                    detail: "children's subtrees meet an incident guard".into(),
                    witness: Witness::Set(d.set_names(below & guards)),
                });
            }
        }
    }

    FlavorReport {
        flavor,
        valid: v.is_empty(),
        width: t.width(),
        violations: v,
    }
}

/// The flavor's condition for an edge whose subtree covers `y` and whose
/// guard is `g`; returns a description and witness when it fails.
pub fn edge_condition(d: &Digraph, flavor: Flavor, y: VertexSet, g: VertexSet) -> Option<(String, Witness)> {
    let rest = d.vertices() - g;
    match flavor {
        Flavor::Nw => {
            if y.intersects(g) {
                return Some(("subtree meets the guard".into(), Witness::Set(d.set_names(y & g))));
            }
            d.normality_violation(g, y).map(|w| {
                (
                    "a walk avoiding the guard leaves and re-enters the subtree".into(),
                    Witness::Walk(w.vertices.iter().map(|&x| d.name(x).to_string()).collect()),
                )
            })
        }
        Flavor::Ncw | Flavor::NcwE => {
            for c in d.scc_sets(rest) {
                if c.intersects(y) && !c.is_subset(y) {
                    let a = (c & y).first().expect("nonempty");
                    let b = (c - y).first().expect("nonempty");
                    return Some((
                        "a closed walk avoiding the guard crosses the subtree boundary".into(),
                        Witness::Walk(closed_walk_through(d, c, a, b)),
                    ));
                }
            }
            None
        }
        Flavor::Sc0 | Flavor::Sc0v | Flavor::Scd => {
            let ok = match (y - g).first() {
                Some(v0) => !y.intersects(g) && d.scc_of(v0, rest) == y,
                None => false,
            };
            if ok {
                None
            } else {
                Some((
                    "subtree is not a strong component of the graph minus the guard".into(),
                    Witness::Set(d.set_names(y)),
                ))
            }
        }
        Flavor::Usc0 => {
            if y.intersects(g) {
                return Some(("subtree meets the guard".into(), Witness::Set(d.set_names(y & g))));
            }
            for c in d.scc_sets(rest) {
                if c.intersects(y) && !c.is_subset(y) {
                    return Some((
                        "subtree is not a union of strong components of the graph minus the guard".into(),
                        Witness::Set(d.set_names(c)),
                    ));
                }
            }
            None
        }
    }
}

/// A closed walk inside the strongly connected set `c` through `a` and `b`.
fn closed_walk_through(d: &Digraph, c: VertexSet, a: usize, b: usize) -> Vec<String> {
    let there = d
        .shortest_path(VertexSet::singleton(a), b, c)
        .expect("strongly connected");
    let back = d
        .shortest_path(VertexSet::singleton(b), a, c)
        .expect("strongly connected");
    let mut w = there;
    w.extend_from_slice(&back[1..]);
    w.into_iter().map(|x| d.name(x).to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> Digraph {
        let e: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Digraph::from_indices(n, &e).unwrap()
    }

    #[test]
    fn single_vertex_valid_everywhere() {
        let d = Digraph::build::<&str>(&["v"], &[]).unwrap();
        for f in Flavor::ALL {
            let r = validate(&d, &Decomposition::trivial(&d, f));
            assert!(r.valid, "{f}");
            assert_eq!(r.width, 0);
        }
    }

    #[test]
    fn star_decomposition_of_cycle() {
        // root {0} with children {1} and {2}, both guarded by {0}
        let d = cycle(3);
        let mut t = Decomposition {
            flavor: Flavor::Nw,
            ids: vec!["n0".into()],
            bags: vec![VertexSet::singleton(0)],
            parent: vec![None],
            guard: vec![VertexSet::EMPTY],
            root: 0,
        };
        t.push_child(0, VertexSet::singleton(1), VertexSet::singleton(0));
        t.push_child(0, VertexSet::singleton(2), VertexSet::singleton(0));
        for f in Flavor::ALL {
            let r = validate(&d, &t.with_flavor(f));
            assert!(r.valid, "{f}: {:?}", r.violations);
            assert_eq!(r.width, 1);
        }
        // Without guards the closed walk crosses every boundary.
        let mut bad = t.clone();
        bad.guard = vec![VertexSet::EMPTY; 3];
        for f in Flavor::ALL {
            let r = validate(&d, &bad.with_flavor(f));
            assert!(!r.valid);
            assert!(r.violations.iter().all(|v| v.kind == ViolationKind::GuardCondition));
        }
        // A path below the root is not a strong component once 0 is removed.
        let mut path = t.clone();
        path.parent[2] = Some(1);
        path.guard[2] = VertexSet::singleton(1);
        assert!(validate(&d, &path.with_flavor(Flavor::Nw)).valid);
        assert!(!validate(&d, &path.with_flavor(Flavor::Sc0)).valid);
    }

    #[test]
    fn empty_bags_depend_on_flavor() {
        let d = cycle(3);
        let mut t = Decomposition::trivial(&d, Flavor::Ncw);
        t.push_child(0, VertexSet::EMPTY, VertexSet::EMPTY);
        assert!(!validate(&d, &t).valid);
        // An empty leaf subtree is not a strong component.
        assert!(!validate(&d, &t.with_flavor(Flavor::Sc0)).valid);
        assert!(validate(&d, &t.with_flavor(Flavor::NcwE)).valid);
        assert!(validate(&d, &t.with_flavor(Flavor::Usc0)).valid);
    }

    #[test]
    fn json_round_trip() {
        let d = cycle(3);
        let mut t = Decomposition::trivial(&d, Flavor::Sc0);
        t.bags[0] = VertexSet::singleton(0);
        t.push_child(0, VertexSet::from_indices([1, 2]), VertexSet::singleton(0));
        let j = t.to_json(&d);
        let s = serde_json::to_string(&j).unwrap();
        assert!(s.contains("\"flavor\":\"SC0\""));
        let back = Decomposition::from_json(&d, &serde_json::from_str(&s).unwrap()).unwrap();
        assert_eq!(back, t);
        assert!(t.to_dot(&d).contains("->"));
    }
}

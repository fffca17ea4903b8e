//! Butterfly minors: contraction scripts, models and containment search.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digraph::{Digraph, GraphError, VertexSet};
use crate::iso::{find_isomorphism, find_monomorphism};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MinorError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("step {index}: edge ({tail}, {head}) is absent")]
    MissingStepEdge { index: usize, tail: String, head: String },
    #[error("step {index}: edge ({tail}, {head}) is not butterfly contractible")]
    NotContractible { index: usize, tail: String, head: String },
    #[error("replayed graph does not match the target: {0}")]
    Mismatch(String),
    #[error("search budget of {0} nodes exhausted")]
    Budget(u64),
    #[error("no butterfly model fits the replayed branch sets")]
    NoModel,
}

/// One contraction: the edge named by its current endpoints and the name of
/// the merged vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub tail: String,
    pub head: String,
    pub name: String,
}

/// Keep a subgraph of the host, then contract edges in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractionScript {
    pub keep: VertexSet,
    pub drop_edges: Vec<(usize, usize)>,
    pub steps: Vec<Step>,
}

impl ContractionScript {
    pub fn identity(host: &Digraph) -> ContractionScript {
        ContractionScript {
            keep: host.vertices(),
            drop_edges: Vec::new(),
            steps: Vec::new(),
        }
    }

    /// The subgraph the steps start from.
    pub fn subgraph(&self, host: &Digraph) -> Result<Digraph, MinorError> {
        for &(u, v) in &self.drop_edges {
            if !host.has_edge(u, v) {
                return Err(GraphError::MissingEdge(host.name(u).into(), host.name(v).into()).into());
            }
        }
        let mut g = host.induced_subgraph(self.keep);
        for &(u, v) in &self.drop_edges {
            if self.keep.contains(u) && self.keep.contains(v) {
                let a = g.vertex(host.name(u)).expect("kept");
                let b = g.vertex(host.name(v)).expect("kept");
                g.remove_edge(a, b);
            }
        }
        Ok(g)
    }
}

/// Result of replaying a script, with bookkeeping back to the host.
#[derive(Debug, Clone)]
pub struct Replay {
    pub graph: Digraph,
    /// Host vertices merged into each replayed vertex.
    pub branch: Vec<VertexSet>,
    /// Host edges that were contracted.
    pub contracted: Vec<(usize, usize)>,
    /// The host subgraph the script started from.
    pub subgraph_edges: Vec<(usize, usize)>,
}

pub fn replay_script(host: &Digraph, script: &ContractionScript) -> Result<Replay, MinorError> {
    let mut g = script.subgraph(host)?;
    let host_of: Vec<usize> = (0..g.n()).map(|i| host.vertex(g.name(i)).expect("kept")).collect();
    let subgraph_edges: Vec<(usize, usize)> = g.edges().map(|(a, b)| (host_of[a], host_of[b])).collect();
    let start = Digraph::from_named_indices(host.names().to_vec(), &subgraph_edges)?;
    let mut branch: Vec<VertexSet> = host_of.iter().map(|&v| VertexSet::singleton(v)).collect();
    let mut contracted = Vec::new();
    for (index, step) in script.steps.iter().enumerate() {
        let missing = || MinorError::MissingStepEdge {
            index,
            tail: step.tail.clone(),
            head: step.head.clone(),
        };
        let u = g.vertex(&step.tail).ok_or_else(missing)?;
        let v = g.vertex(&step.head).ok_or_else(missing)?;
        if !g.has_edge(u, v) {
            return Err(missing());
        }
        if !g.butterfly_contractible(u, v)? {
            return Err(MinorError::NotContractible {
                index,
                tail: step.tail.clone(),
                head: step.head.clone(),
            });
        }
        contracted.push(host_edge_between(&start, branch[u], branch[v]).expect("edge present"));
        g = g.contract_edge(u, v, &step.name)?;
        let bv = branch.remove(v);
        let u2 = if u > v { u - 1 } else { u };
        branch[u2] |= bv;
    }
    Ok(Replay {
        graph: g,
        branch,
        contracted,
        subgraph_edges,
    })
}

fn host_edge_between(host: &Digraph, a: VertexSet, b: VertexSet) -> Option<(usize, usize)> {
    a.iter()
        .find_map(|x| (host.out_neighbors(x) & b).first().map(|y| (x, y)))
}

/// A script plus the correspondence from target vertex names to replayed
/// vertex names; an absent correspondence means names agree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinorWitness {
    pub script: ContractionScript,
    pub correspondence: Option<BTreeMap<String, String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct StepJson {
    pub edge: [String; 2],
    pub name: String,
}

/// `{"keep_vertices": [...], "drop_edges": [...], "steps": [...]}` with an
/// optional `correspondence` object.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct WitnessJson {
    pub keep_vertices: Vec<String>,
    pub drop_edges: Vec<[String; 2]>,
    pub steps: Vec<StepJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correspondence: Option<BTreeMap<String, String>>,
}

impl MinorWitness {
    pub fn identity(host: &Digraph) -> MinorWitness {
        MinorWitness {
            script: ContractionScript::identity(host),
            correspondence: None,
        }
    }

    pub fn to_json(&self, host: &Digraph) -> WitnessJson {
        WitnessJson {
            keep_vertices: host.set_names(self.script.keep),
            drop_edges: self
                .script
                .drop_edges
                .iter()
                .map(|&(u, v)| [host.name(u).to_string(), host.name(v).to_string()])
                .collect(),
            steps: self
                .script
                .steps
                .iter()
                .map(|s| StepJson {
                    edge: [s.tail.clone(), s.head.clone()],
                    name: s.name.clone(),
                })
                .collect(),
            correspondence: self.correspondence.clone(),
        }
    }

    pub fn from_json(host: &Digraph, j: &WitnessJson) -> Result<MinorWitness, MinorError> {
        let keep = host.set_of(&j.keep_vertices)?;
        let drop_edges = j
            .drop_edges
            .iter()
            .map(|[u, v]| host.edge_by_name(u, v))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MinorWitness {
            script: ContractionScript {
                keep,
                drop_edges,
                steps: j
                    .steps
                    .iter()
                    .map(|s| Step {
                        tail: s.edge[0].clone(),
                        head: s.edge[1].clone(),
                        name: s.name.clone(),
                    })
                    .collect(),
            },
            correspondence: j.correspondence.clone(),
        })
    }

    /// Replays the script and checks that it yields `target` under the
    /// correspondence. Returns the replay and the map from target vertices
    /// to replayed vertices.
    pub fn verify(&self, target: &Digraph, host: &Digraph) -> Result<(Replay, Vec<usize>), MinorError> {
        let r = replay_script(host, &self.script)?;
        let g = &r.graph;
        if g.n() != target.n() {
            return Err(MinorError::Mismatch(format!(
                "{} vertices, expected {}",
                g.n(),
                target.n()
            )));
        }
        let mut map = Vec::with_capacity(target.n());
        for v in 0..target.n() {
            let name = match &self.correspondence {
                Some(c) => c
                    .get(target.name(v))
                    .cloned()
                    .ok_or_else(|| MinorError::Mismatch(format!("no correspondent for `{}`", target.name(v))))?,
                None => target.name(v).to_string(),
            };
            let x = g
                .vertex(&name)
                .ok_or_else(|| MinorError::Mismatch(format!("missing vertex `{name}`")))?;
            map.push(x);
        }
        let image: VertexSet = map.iter().copied().collect();
        if image.len() != target.n() {
            return Err(MinorError::Mismatch("correspondence is not injective".into()));
        }
        if g.edge_count() != target.edge_count() || target.edges().any(|(u, v)| !g.has_edge(map[u], map[v])) {
            return Err(MinorError::Mismatch("edge sets differ".into()));
        }
        Ok((r, map))
    }
}

/// One vertex image: an in-branching and an out-branching sharing `root`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branching {
    pub root: usize,
    pub vertices: VertexSet,
    pub in_part: VertexSet,
    pub out_part: VertexSet,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ButterflyModel {
    /// Indexed by the minor's vertices.
    pub vertex_images: Vec<Branching>,
    /// Image of every edge of the minor, keyed by the minor's edge.
    pub edge_images: BTreeMap<(usize, usize), (usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelViolation {
    pub condition: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelVerdict {
    pub valid: bool,
    pub violations: Vec<ModelViolation>,
}

impl ButterflyModel {
    pub fn identity(d: &Digraph) -> ButterflyModel {
        ButterflyModel {
            vertex_images: (0..d.n())
                .map(|v| Branching {
                    root: v,
                    vertices: VertexSet::singleton(v),
                    in_part: VertexSet::singleton(v),
                    out_part: VertexSet::singleton(v),
                    edges: Vec::new(),
                })
                .collect(),
            edge_images: d.edges().map(|e| (e, e)).collect(),
        }
    }
}

/// Checks disjointness, edge endpoints and the branching structure.
pub fn verify_model(minor: &Digraph, host: &Digraph, mu: &ButterflyModel) -> ModelVerdict {
    let mut v = Vec::new();
    let mut bad = |condition: &str, detail: String| {
        v.push(ModelViolation {
            condition: condition.into(),
            detail,
        })
    };
    if mu.vertex_images.len() != minor.n() {
        bad("disjointness", "image count differs from the minor's order".into());
        return ModelVerdict {
            valid: false,
            violations: v,
        };
    }
    let mut seen = VertexSet::EMPTY;
    for (i, b) in mu.vertex_images.iter().enumerate() {
        if b.vertices.is_empty() || !b.vertices.is_subset(host.vertices()) {
            bad(
                "disjointness",
                format!("image of `{}` is empty or foreign", minor.name(i)),
            );
        }
        if b.vertices.intersects(seen) {
            bad(
                "disjointness",
                format!(
                    "image of `{}` overlaps {:?}",
                    minor.name(i),
                    host.set_names(b.vertices & seen)
                ),
            );
        }
        seen |= b.vertices;
        if let Err(e) = check_branching(host, b) {
            bad("branching", format!("image of `{}`: {e}", minor.name(i)));
        }
    }
    for (a, b) in minor.edges() {
        match mu.edge_images.get(&(a, b)) {
            None => bad(
                "edge-endpoints",
                format!("edge ({}, {}) has no image", minor.name(a), minor.name(b)),
            ),
            Some(&(x, y)) => {
                let ia = &mu.vertex_images[a];
                let ib = &mu.vertex_images[b];
                if !host.has_edge(x, y) {
                    bad("edge-endpoints", "edge image is not a host edge".into());
                } else if !ia.out_part.contains(x) || !ib.in_part.contains(y) {
                    bad(
                        "edge-endpoints",
                        format!(
                            "image ({}, {}) of ({}, {}) leaves the out-branching or enters outside the in-branching",
                            host.name(x),
                            host.name(y),
                            minor.name(a),
                            minor.name(b)
                        ),
                    );
                }
            }
        }
    }
    ModelVerdict {
        valid: v.is_empty(),
        violations: v,
    }
}

fn check_branching(host: &Digraph, b: &Branching) -> Result<(), String> {
    if !b.vertices.contains(b.root) {
        return Err("root outside the image".into());
    }
    if b.in_part | b.out_part != b.vertices || b.in_part & b.out_part != VertexSet::singleton(b.root) {
        return Err("parts do not split the image at the root".into());
    }
    if b.edges.len() + 1 != b.vertices.len() {
        return Err("edge count is not that of a tree".into());
    }
    let mut succ = HashMap::new();
    let mut pred = HashMap::new();
    for &(x, y) in &b.edges {
        if !host.has_edge(x, y) || !b.vertices.contains(x) || !b.vertices.contains(y) {
            return Err("branching edge missing from the host or leaving the image".into());
        }
        if b.in_part.contains(x) && b.in_part.contains(y) && x != b.root {
            if succ.insert(x, y).is_some() {
                return Err("in-branching vertex with two out-edges".into());
            }
        } else if b.out_part.contains(x) && b.out_part.contains(y) && y != b.root {
            if pred.insert(y, x).is_some() {
                return Err("out-branching vertex with two in-edges".into());
            }
        } else {
            return Err("edge crosses between the parts or points the wrong way".into());
        }
    }
    for x in (b.in_part.without(b.root)).iter() {
        let mut cur = x;
        for _ in 0..=b.vertices.len() {
            match succ.get(&cur) {
                Some(&n) => cur = n,
                None => break,
            }
        }
        if cur != b.root {
            return Err(format!("`{}` does not reach the root", host.name(x)));
        }
    }
    for x in (b.out_part.without(b.root)).iter() {
        let mut cur = x;
        for _ in 0..=b.vertices.len() {
            match pred.get(&cur) {
                Some(&n) => cur = n,
                None => break,
            }
        }
        if cur != b.root {
            return Err(format!("`{}` is not reached from the root", host.name(x)));
        }
    }
    Ok(())
}

/// Builds a model from a verified witness: vertex images are the replayed
/// branch sets with their contracted edges; roots and edge images are chosen
/// by a small backtracking search.
pub fn model_from_witness(minor: &Digraph, host: &Digraph, w: &MinorWitness) -> Result<ButterflyModel, MinorError> {
    let (r, map) = w.verify(minor, host)?;
    let sub: HashSet<(usize, usize)> = r.subgraph_edges.iter().copied().collect();
    // Options per minor vertex: (root, in_part, out_part).
    let mut options: Vec<Vec<Branching>> = Vec::with_capacity(minor.n());
    for v in 0..minor.n() {
        let set = r.branch[map[v]];
        let tree: Vec<(usize, usize)> = r
            .contracted
            .iter()
            .copied()
            .filter(|&(x, y)| set.contains(x) && set.contains(y))
            .collect();
        let mut opts = Vec::new();
        for root in set.iter() {
            if let Some(b) = orient_tree(set, &tree, root) {
                opts.push(b);
            }
        }
        if opts.is_empty() {
            return Err(MinorError::NoModel);
        }
        options.push(opts);
    }
    let edges: Vec<(usize, usize)> = minor.edges().collect();
    let mut choice = vec![usize::MAX; minor.n()];
    let image_of = |choice: &[usize], options: &[Vec<Branching>], a: usize, b: usize| {
        let oa = &options[a][choice[a]];
        let ob = &options[b][choice[b]];
        oa.out_part.iter().find_map(|x| {
            (host.out_neighbors(x) & ob.in_part)
                .iter()
                .find(|&y| sub.contains(&(x, y)))
                .map(|y| (x, y))
        })
    };
    fn assign(
        i: usize,
        choice: &mut Vec<usize>,
        options: &[Vec<Branching>],
        edges: &[(usize, usize)],
        ok: &dyn Fn(&[usize], usize, usize) -> bool,
    ) -> bool {
        if i == choice.len() {
            return true;
        }
        for c in 0..options[i].len() {
            choice[i] = c;
            let consistent = edges
                .iter()
                .filter(|&&(a, b)| (a == i && b <= i) || (b == i && a <= i))
                .all(|&(a, b)| ok(choice, a, b));
            if consistent && assign(i + 1, choice, options, edges, ok) {
                return true;
            }
        }
        choice[i] = usize::MAX;
        false
    }
    let ok = |choice: &[usize], a: usize, b: usize| image_of(choice, &options, a, b).is_some();
    if !assign(0, &mut choice, &options, &edges, &ok) {
        return Err(MinorError::NoModel);
    }
    let edge_images = edges
        .iter()
        .map(|&(a, b)| ((a, b), image_of(&choice, &options, a, b).expect("consistent")))
        .collect();
    Ok(ButterflyModel {
        vertex_images: choice.iter().enumerate().map(|(v, &c)| options[v][c].clone()).collect(),
        edge_images,
    })
}

/// Splits a tree at `root` into an in-branching and an out-branching,
/// dropping vertices whose tree path to the root changes direction.
fn orient_tree(set: VertexSet, tree: &[(usize, usize)], root: usize) -> Option<Branching> {
    if !set.contains(root) {
        return None;
    }
    let mut in_part = VertexSet::singleton(root);
    let mut out_part = VertexSet::singleton(root);
    let mut edges = Vec::new();
    let mut frontier = vec![root];
    while let Some(x) = frontier.pop() {
        for &(a, b) in tree {
            if b == x && (x == root || in_part.contains(x)) && !(in_part | out_part).contains(a) {
                in_part.insert(a);
                edges.push((a, b));
                frontier.push(a);
            } else if a == x && (x == root || out_part.contains(x)) && !(in_part | out_part).contains(b) {
                out_part.insert(b);
                edges.push((a, b));
                frontier.push(b);
            }
        }
    }
    Some(Branching {
        root,
        vertices: in_part | out_part,
        in_part,
        out_part,
        edges,
    })
}

/// Search statistics and outcome.
#[derive(Debug, Clone)]
pub struct MinorSearch {
    pub witness: Option<MinorWitness>,
    pub nodes: u64,
}

struct SearchState {
    g: Digraph,
    branch: Vec<VertexSet>,
    deleted: Vec<(usize, usize)>,
    steps: Vec<Step>,
}

struct Searcher<'a> {
    host: &'a Digraph,
    target: &'a Digraph,
    target_max_scc: usize,
    budget: Option<u64>,
    nodes: u64,
    seen: HashSet<Vec<(u128, Vec<u128>)>>,
}

impl Searcher<'_> {
    fn key(s: &SearchState) -> Vec<(u128, Vec<u128>)> {
        let mut k: Vec<(u128, Vec<u128>)> = (0..s.g.n())
            .map(|v| {
                let mut outs: Vec<u128> = s.g.out_neighbors(v).iter().map(|w| s.branch[w].0).collect();
                outs.sort_unstable();
                (s.branch[v].0, outs)
            })
            .collect();
        k.sort_unstable();
        k
    }

    fn dfs(&mut self, s: SearchState, left: usize) -> Result<Option<(SearchState, Vec<usize>)>, MinorError> {
        self.nodes += 1;
        if let Some(b) = self.budget {
            if self.nodes > b {
                return Err(MinorError::Budget(b));
            }
        }
        if s.g.edge_count() < self.target.edge_count() + left {
            return Ok(None);
        }
        let max_scc = s.g.scc_sets(s.g.vertices()).iter().map(|c| c.len()).max().unwrap_or(0);
        if max_scc < self.target_max_scc {
            return Ok(None);
        }
        if !self.seen.insert(Self::key(&s)) {
            return Ok(None);
        }
        if left == 0 {
            return Ok(find_monomorphism(self.target, &s.g).map(|m| (s, m)));
        }
        let edges: Vec<(usize, usize)> = s.g.edges().collect();
        for (u, v) in edges {
            let mut variants: Vec<Vec<(usize, usize)>> = Vec::new();
            if s.g.out_degree(u) == 1 || s.g.in_degree(v) == 1 {
                variants.push(Vec::new());
            } else {
                variants.push(s.g.out_neighbors(u).without(v).iter().map(|w| (u, w)).collect());
                variants.push(s.g.in_neighbors(v).without(u).iter().map(|w| (w, v)).collect());
            }
            for drop in variants {
                let mut g = s.g.delete_edges(&drop).expect("edges present");
                let mut deleted = s.deleted.clone();
                for &(a, b) in &drop {
                    for x in s.branch[a].iter() {
                        for y in (self.host.out_neighbors(x) & s.branch[b]).iter() {
                            deleted.push((x, y));
                        }
                    }
                }
                let name = s.g.name(u).to_string();
                g = g.contract_edge(u, v, &name)?;
                if g.edge_count() < self.target.edge_count() + left - 1 {
                    continue;
                }
                let mut branch = s.branch.clone();
                let bv = branch.remove(v);
                let u2 = if u > v { u - 1 } else { u };
                branch[u2] |= bv;
                let mut steps = s.steps.clone();
                steps.push(Step {
                    tail: s.g.name(u).to_string(),
                    head: s.g.name(v).to_string(),
                    name,
                });
                let next = SearchState {
                    g,
                    branch,
                    deleted,
                    steps,
                };
                if let Some(found) = self.dfs(next, left - 1)? {
                    return Ok(Some(found));
                }
            }
        }
        Ok(None)
    }
}

/// Decides `minor ⪯_b host` by iterative deepening over the number of
/// deleted vertices; each level contracts edges (deleting only the edges
/// that block a contraction) and finishes with a subgraph embedding.
pub fn find_butterfly_minor(minor: &Digraph, host: &Digraph, budget: Option<u64>) -> Result<MinorSearch, MinorError> {
    let mut s = Searcher {
        host,
        target: minor,
        target_max_scc: minor
            .scc_sets(minor.vertices())
            .iter()
            .map(|c| c.len())
            .max()
            .unwrap_or(0),
        budget,
        nodes: 0,
        seen: HashSet::new(),
    };
    if minor.n() > host.n() || minor.edge_count() > host.edge_count() {
        return Ok(MinorSearch {
            witness: None,
            nodes: 0,
        });
    }
    let excess = host.n() - minor.n();
    for deletions in 0..=excess {
        s.seen.clear();
        let start = SearchState {
            g: host.clone(),
            branch: (0..host.n()).map(VertexSet::singleton).collect(),
            deleted: Vec::new(),
            steps: Vec::new(),
        };
        if let Some((st, m)) = s.dfs(start, excess - deletions)? {
            let w = witness_from_search(minor, host, &st, &m);
            w.verify(minor, host)?;
            return Ok(MinorSearch {
                witness: Some(w),
                nodes: s.nodes,
            });
        }
    }
    Ok(MinorSearch {
        witness: None,
        nodes: s.nodes,
    })
}

fn witness_from_search(minor: &Digraph, host: &Digraph, st: &SearchState, m: &[usize]) -> MinorWitness {
    let kept_nodes: VertexSet = m.iter().copied().collect();
    let keep: VertexSet = kept_nodes
        .iter()
        .map(|x| st.branch[x])
        .fold(VertexSet::EMPTY, |a, b| a | b);
    let mut inv = vec![usize::MAX; st.g.n()];
    for (t, &x) in m.iter().enumerate() {
        inv[x] = t;
    }
    let node_of = |h: usize| kept_nodes.iter().find(|&x| st.branch[x].contains(h));
    let mut drop: Vec<(usize, usize)> = st
        .deleted
        .iter()
        .copied()
        .filter(|&(a, b)| keep.contains(a) && keep.contains(b))
        .collect();
    for (a, b) in host.edges() {
        let (Some(x), Some(y)) = (node_of(a), node_of(b)) else {
            continue;
        };
        if x != y && !minor.has_edge(inv[x], inv[y]) {
            drop.push((a, b));
        }
    }
    drop.sort_unstable();
    drop.dedup();
    let steps = st
        .steps
        .iter()
        .filter(|s| {
            let hv = host.vertex(&s.tail);
            hv.map_or(true, |h| keep.contains(h))
        })
        .cloned()
        .collect::<Vec<_>>();
    // Steps are named after their tail, which is always an original vertex
    // name; a step belongs to a kept branch iff that vertex was kept.
    let correspondence: BTreeMap<String, String> = (0..minor.n())
        .map(|t| (minor.name(t).to_string(), st.g.name(m[t]).to_string()))
        .collect();
    let identity = correspondence.iter().all(|(a, b)| a == b);
    MinorWitness {
        script: ContractionScript {
            keep,
            drop_edges: drop,
            steps,
        },
        correspondence: (!identity).then_some(correspondence),
    }
}

/// Convenience wrapper: whether the search proves containment.
pub fn is_butterfly_minor(minor: &Digraph, host: &Digraph, budget: Option<u64>) -> Result<bool, MinorError> {
    Ok(find_butterfly_minor(minor, host, budget)?.witness.is_some())
}

/// Greedily deletes edges, then isolated vertices, while containment holds.
/// Returns the minimal major subgraph and a witness for it.
pub fn minimal_major(
    minor: &Digraph,
    host: &Digraph,
    w: &MinorWitness,
    budget: Option<u64>,
) -> Result<(Digraph, MinorWitness), MinorError> {
    w.verify(minor, host)?;
    let mut h = w.script.subgraph(host)?;
    let mut witness = None;
    let edges: Vec<(String, String)> = h
        .edges()
        .map(|(a, b)| (h.name(a).to_string(), h.name(b).to_string()))
        .collect();
    for (a, b) in edges {
        let (x, y) = (h.vertex(&a).expect("present"), h.vertex(&b).expect("present"));
        let mut trial = h.clone();
        trial.remove_edge(x, y);
        if let Some(found) = find_butterfly_minor(minor, &trial, budget)?.witness {
            h = trial;
            witness = Some(found);
        }
    }
    for name in h.names().to_vec() {
        let v = h.vertex(&name).expect("present");
        if h.out_degree(v) + h.in_degree(v) > 0 {
            continue;
        }
        let trial = h.induced_subgraph(h.vertices().without(v));
        if let Some(found) = find_butterfly_minor(minor, &trial, budget)?.witness {
            h = trial;
            witness = Some(found);
        }
    }
    let witness = match witness {
        Some(w) => w,
        None => find_butterfly_minor(minor, &h, budget)?
            .witness
            .ok_or_else(|| MinorError::Mismatch("minimal major lost the minor".into()))?,
    };
    Ok((h, witness))
}

/// All graphs reachable from `host` by choosing a subgraph and contracting;
/// for tiny hosts only. Used to cross-check the search.
pub fn brute_force_contains(minor: &Digraph, host: &Digraph) -> bool {
    let edges: Vec<(usize, usize)> = host.edges().collect();
    assert!(edges.len() <= 12 && host.n() <= 6, "brute force is for tiny graphs");
    for keep_mask in 0u32..(1 << host.n()) {
        let keep: VertexSet = (0..host.n()).filter(|&i| keep_mask >> i & 1 == 1).collect();
        if keep.len() < minor.n() {
            continue;
        }
        let inner: Vec<(usize, usize)> = edges
            .iter()
            .copied()
            .filter(|&(a, b)| keep.contains(a) && keep.contains(b))
            .collect();
        for emask in 0u32..(1 << inner.len()) {
            if (emask.count_ones() as usize) < minor.edge_count() {
                continue;
            }
            let drop: Vec<(usize, usize)> = inner
                .iter()
                .enumerate()
                .filter(|(i, _)| emask >> i & 1 == 0)
                .map(|(_, &e)| e)
                .collect();
            let script = ContractionScript {
                keep,
                drop_edges: drop,
                steps: Vec::new(),
            };
            let g = script.subgraph(host).expect("valid");
            if contract_all(&g, minor, &mut HashSet::new()) {
                return true;
            }
        }
    }
    false
}

fn contract_all(g: &Digraph, minor: &Digraph, seen: &mut HashSet<Vec<u64>>) -> bool {
    if g.n() < minor.n() || !seen.insert(crate::iso::canonical_code(g)) {
        return false;
    }
    if g.n() == minor.n() {
        return find_isomorphism(g, minor).is_some();
    }
    let edges: Vec<(usize, usize)> = g.edges().collect();
    edges.into_iter().any(|(u, v)| {
        g.butterfly_contractible(u, v).unwrap_or(false)
            && contract_all(&g.contract_edge(u, v, g.name(u)).expect("contractible"), minor, seen)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_digraph(rng: &mut impl Rng, n: usize, p: f64) -> Digraph {
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

    #[test]
    fn identity_witness() {
        let d = Digraph::from_indices(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let w = MinorWitness::identity(&d);
        w.verify(&d, &d).unwrap();
        let found = find_butterfly_minor(&d, &d, None).unwrap().witness.unwrap();
        assert!(found.script.steps.is_empty());
        let model = ButterflyModel::identity(&d);
        assert!(verify_model(&d, &d, &model).valid);
        let mut overlapping = model.clone();
        overlapping.vertex_images[1] = overlapping.vertex_images[0].clone();
        let verdict = verify_model(&d, &d, &overlapping);
        assert!(verdict.violations.iter().any(|v| v.condition == "disjointness"));
    }

    #[test]
    fn cycle_not_in_dag() {
        let c3 = Digraph::from_indices(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let dag = Digraph::from_indices(5, &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (1, 4)]).unwrap();
        assert!(find_butterfly_minor(&c3, &dag, None).unwrap().witness.is_none());
    }

    #[test]
    fn long_cycle_contracts_to_digon() {
        let c5 = Digraph::from_indices(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        let digon = Digraph::from_indices(2, &[(0, 1), (1, 0)]).unwrap();
        let w = find_butterfly_minor(&digon, &c5, None).unwrap().witness.unwrap();
        let model = model_from_witness(&digon, &c5, &w).unwrap();
        assert!(verify_model(&digon, &c5, &model).valid);
    }

    #[test]
    fn search_matches_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..120 {
            let n = rng.gen_range(2..=5);
            let host = random_digraph(&mut rng, n, 0.3);
            if host.edge_count() > 9 {
                continue;
            }
            let m = rng.gen_range(1..=3.min(n));
            let minor = random_digraph(&mut rng, m, 0.5);
            let found = find_butterfly_minor(&minor, &host, None).unwrap();
            assert_eq!(
                found.witness.is_some(),
                brute_force_contains(&minor, &host),
                "minor {minor:?} host {host:?}"
            );
            if let Some(w) = found.witness {
                w.verify(&minor, &host).unwrap();
                let model = model_from_witness(&minor, &host, &w)
                    .unwrap_or_else(|e| panic!("{e}: minor {minor:?} host {host:?} witness {w:?}"));
                let verdict = verify_model(&minor, &host, &model);
                assert!(verdict.valid, "{:?}", verdict.violations);
            }
        }
    }

    #[test]
    fn acyclic_hosts_have_no_cyclic_minors() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let digon = Digraph::from_indices(2, &[(0, 1), (1, 0)]).unwrap();
        for _ in 0..40 {
            let n = rng.gen_range(2..=7);
            let mut e = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(0.4) {
                        e.push((u, v));
                    }
                }
            }
            let dag = Digraph::from_indices(n, &e).unwrap();
            assert!(!is_butterfly_minor(&digon, &dag, None).unwrap());
        }
    }

    #[test]
    fn minimal_major_of_subdivided_cycle() {
        let c4 = Digraph::from_indices(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]).unwrap();
        let digon = Digraph::from_indices(2, &[(0, 1), (1, 0)]).unwrap();
        let w = find_butterfly_minor(&digon, &c4, None).unwrap().witness.unwrap();
        let (h, w2) = minimal_major(&digon, &c4, &w, None).unwrap();
        assert!(h.is_strongly_connected_set(h.vertices() - isolated(&h)));
        w2.verify(&digon, &h).unwrap();
        for (a, b) in h.edges() {
            let mut t = h.clone();
            t.remove_edge(a, b);
            assert!(!is_butterfly_minor(&digon, &t, None).unwrap());
        }
    }

    fn isolated(h: &Digraph) -> VertexSet {
        (0..h.n()).filter(|&v| h.out_degree(v) + h.in_degree(v) == 0).collect()
    }
}

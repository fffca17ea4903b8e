//! Constructive operations on decompositions: rerooting, restriction to
//! subgraphs, lifting through contractions, bag splitting, component
//! replication and empty-bag removal.

use thiserror::Error;

use super::{edge_condition, validate, Decomposition, Flavor};
use crate::digraph::{Digraph, GraphError, VertexSet};
use crate::minors::{replay_script, ContractionScript, MinorError};

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("operation needs flavor {expected}, got {got}")]
    WrongFlavor { expected: &'static str, got: Flavor },
    #[error("node `{0}` has an empty bag")]
    EmptyBag(String),
    #[error("node `{0}` has fewer than two bag vertices")]
    SmallBag(String),
    #[error("vertex `{0}` is not in the bag of the chosen node")]
    NotInBag(String),
    #[error("unknown node index {0}")]
    UnknownNode(usize),
    #[error("not a subgraph of the host: {0}")]
    NotSubgraph(String),
    #[error("input decomposition is invalid: {0}")]
    Invalid(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Minor(#[from] MinorError),
}

fn require(t: &Decomposition, allowed: &[Flavor], expected: &'static str) -> Result<(), TransformError> {
    if allowed.contains(&t.flavor) {
        Ok(())
    } else {
        Err(TransformError::WrongFlavor {
            expected,
            got: t.flavor,
        })
    }
}

fn require_valid(d: &Digraph, t: &Decomposition) -> Result<(), TransformError> {
    let r = validate(d, t);
    match r.violations.first() {
        None => Ok(()),
        Some(v) => Err(TransformError::Invalid(v.detail.clone())),
    }
}

/// Moves the root to `r_new` by reversing the edges on the path from the old
/// root; guards stay with their edges.
pub fn reroot_ncwe(t: &Decomposition, r_new: usize) -> Result<Decomposition, TransformError> {
    require(t, &[Flavor::Ncw, Flavor::NcwE], "NCW or NCWE")?;
    if r_new >= t.len() {
        return Err(TransformError::UnknownNode(r_new));
    }
    if t.bags[r_new].is_empty() {
        return Err(TransformError::EmptyBag(t.ids[r_new].clone()));
    }
    Ok(reroot_unchecked(t, r_new))
}

pub(crate) fn reroot_unchecked(t: &Decomposition, r_new: usize) -> Decomposition {
    let mut out = t.clone();
    let mut path = vec![r_new];
    while let Some(p) = t.parent[*path.last().expect("nonempty")] {
        path.push(p);
    }
    // path = r_new, ..., old root
    for w in path.windows(2) {
        let (child, par) = (w[0], w[1]);
        out.parent[par] = Some(child);
        out.guard[par] = t.guard[child];
    }
    out.parent[r_new] = None;
    out.guard[r_new] = VertexSet::EMPTY;
    out.root = r_new;
    out
}

/// Translates a vertex set of `from` into `to` by names, dropping vertices
/// `to` lacks.
fn translate(from: &Digraph, to: &Digraph, s: VertexSet) -> VertexSet {
    s.iter().filter_map(|v| to.vertex(from.name(v))).collect()
}

/// Intersects every bag and guard with `V(H)` and reroots if the root bag
/// became empty. The result is an NCWE decomposition of `h`.
pub fn restrict_to_subgraph(d: &Digraph, t: &Decomposition, h: &Digraph) -> Result<Decomposition, TransformError> {
    require(t, &[Flavor::Ncw, Flavor::NcwE], "NCW or NCWE")?;
    for name in h.names() {
        if d.vertex(name).is_none() {
            return Err(TransformError::NotSubgraph(format!("vertex `{name}`")));
        }
    }
    for (a, b) in h.edges() {
        let (x, y) = (
            d.vertex(h.name(a)).expect("checked"),
            d.vertex(h.name(b)).expect("checked"),
        );
        if !d.has_edge(x, y) {
            return Err(TransformError::NotSubgraph(format!(
                "edge ({}, {})",
                h.name(a),
                h.name(b)
            )));
        }
    }
    let mut out = t.clone();
    out.flavor = Flavor::NcwE;
    for i in 0..t.len() {
        out.bags[i] = translate(d, h, t.bags[i]);
        out.guard[i] = translate(d, h, t.guard[i]);
    }
    Ok(fix_empty_root(out))
}

fn fix_empty_root(t: Decomposition) -> Decomposition {
    if !t.bags[t.root].is_empty() {
        return t;
    }
    match t.preorder().into_iter().find(|&i| !t.bags[i].is_empty()) {
        Some(r) => reroot_unchecked(&t, r),
        None => t,
    }
}

/// Rewrites a decomposition of `h` into one of `h / (u, v)` with the merged
/// vertex named `x`. Returns the contracted graph and the decomposition.
pub fn lift_contraction(
    h: &Digraph,
    t: &Decomposition,
    u: usize,
    v: usize,
    x: &str,
) -> Result<(Digraph, Decomposition), TransformError> {
    require(t, &[Flavor::Ncw, Flavor::NcwE], "NCW or NCWE")?;
    let hx = h.contract_edge(u, v, x)?;
    let xi = hx.vertex(x).expect("merged vertex");
    let image = |s: VertexSet| -> VertexSet {
        let mut r = VertexSet::EMPTY;
        for w in s.iter() {
            if w == u || w == v {
                r.insert(xi);
            } else {
                r.insert(hx.vertex(h.name(w)).expect("kept vertex"));
            }
        }
        r
    };
    let mut out = t.clone();
    out.flavor = Flavor::NcwE;
    let x_with_v = h.out_degree(u) == 1;
    for i in 0..t.len() {
        out.guard[i] = image(t.guard[i]);
        let b = t.bags[i];
        let mut nb = image(b.without(u).without(v));
        let takes_x = if x_with_v { b.contains(v) } else { b.contains(u) };
        if takes_x {
            nb.insert(xi);
        }
        out.bags[i] = nb;
    }
    Ok((hx, fix_empty_root(out)))
}

/// Restricts to the script's subgraph and lifts every contraction in turn.
pub fn minorize(
    d: &Digraph,
    t: &Decomposition,
    script: &ContractionScript,
) -> Result<(Digraph, Decomposition), TransformError> {
    require(t, &[Flavor::Ncw, Flavor::NcwE], "NCW or NCWE")?;
    replay_script(d, script)?;
    let mut g = script.subgraph(d)?;
    let mut cur = restrict_to_subgraph(d, t, &g)?;
    for step in &script.steps {
        let u = g.vertex_or_err(&step.tail)?;
        let v = g.vertex_or_err(&step.head)?;
        let (g2, t2) = lift_contraction(&g, &cur, u, v, &step.name)?;
        g = g2;
        cur = t2;
    }
    Ok((g, cur))
}

/// Moves `v` out of the bag of `node` into a new node inserted between
/// `node` and its children. The result is a USC0 decomposition.
pub fn split_bag(d: &Digraph, t: &Decomposition, node: usize, v: usize) -> Result<Decomposition, TransformError> {
    require(t, &[Flavor::Sc0, Flavor::Sc0v], "SC0 or SC0v")?;
    if node >= t.len() {
        return Err(TransformError::UnknownNode(node));
    }
    if t.bags[node].len() < 2 {
        return Err(TransformError::SmallBag(t.ids[node].clone()));
    }
    if !t.bags[node].contains(v) {
        return Err(TransformError::NotInBag(d.name(v).to_string()));
    }
    let mut out = t.clone();
    out.flavor = Flavor::Usc0;
    let incoming = if t.parent[node].is_some() {
        t.guard[node]
    } else {
        VertexSet::EMPTY
    };
    let rest = t.bags[node].without(v);
    out.bags[node] = rest;
    let children: Vec<usize> = (0..t.len()).filter(|&c| t.parent[c] == Some(node)).collect();
    let new = out.push_child(node, VertexSet::singleton(v), incoming | rest);
    out.ids[new] = fresh_id(&out.ids, &t.ids[node]);
    for c in children {
        out.parent[c] = Some(new);
    }
    Ok(out)
}

fn fresh_id(ids: &[String], base: &str) -> String {
    (1..)
        .map(|i| format!("{base}.{i}"))
        .find(|c| !ids.contains(c))
        .expect("infinite supply")
}

/// Replicates every subtree whose vertex set splits into several strong
/// components, one copy per component. Returns the SC0v decomposition and,
/// per new node, the node it was copied from.
pub fn usc_to_scv(d: &Digraph, t: &Decomposition) -> Result<(Decomposition, Vec<usize>), TransformError> {
    require(t, &[Flavor::Usc0, Flavor::Sc0, Flavor::Sc0v], "USC0")?;
    require_valid(d, &t.with_flavor(Flavor::Usc0))?;
    let sub = t.subtree_unions();
    let ch = t.children();
    let mut out = Decomposition {
        flavor: Flavor::Sc0v,
        ids: vec![t.ids[t.root].clone()],
        bags: vec![t.bags[t.root]],
        parent: vec![None],
        guard: vec![VertexSet::EMPTY],
        root: 0,
    };
    let mut proj = vec![t.root];
    // (original node, copy index, vertex set the copy is responsible for)
    let mut stack = vec![(t.root, 0usize, d.vertices())];
    while let Some((orig, copy, allowed)) = stack.pop() {
        for &c in &ch[orig] {
            let g = t.guard[c];
            let part = sub[c] & allowed;
            let comps: Vec<VertexSet> = d
                .scc_sets(d.vertices() - g)
                .into_iter()
                .filter(|k| k.intersects(part))
                .collect();
            let many = comps.len() > 1;
            for (j, k) in comps.into_iter().enumerate() {
                let i = out.push_child(copy, t.bags[c] & k, g);
                out.ids[i] = if many {
                    format!("{}#{}", t.ids[c], j + 1)
                } else {
                    t.ids[c].clone()
                };
                proj.push(c);
                stack.push((c, i, k));
            }
        }
    }
    dedupe_ids(&mut out.ids);
    Ok((out, proj))
}

fn dedupe_ids(ids: &mut [String]) {
    let mut seen = std::collections::HashSet::new();
    for i in 0..ids.len() {
        if !seen.insert(ids[i].clone()) {
            let fresh = (1..)
                .map(|j| format!("{}~{j}", ids[i]))
                .find(|c| !seen.contains(c) && !ids.contains(c))
                .expect("infinite supply");
            ids[i] = fresh.clone();
            seen.insert(fresh);
        }
    }
}

/// Whether the empty-bag node `t2` (with parent `t1` and single child `t3`)
/// can be bypassed.
fn deletable(d: &Digraph, t: &Decomposition, sub: &[VertexSet], t2: usize) -> Option<usize> {
    t.parent[t2]?;
    if !t.bags[t2].is_empty() {
        return None;
    }
    let kids: Vec<usize> = (0..t.len()).filter(|&c| t.parent[c] == Some(t2)).collect();
    let [t3] = kids[..] else {
        return None;
    };
    let (g1, g2) = (t.guard[t2], t.guard[t3]);
    let ok = g1.is_subset(g2) || g2.is_subset(g1) || edge_condition(d, Flavor::Sc0v, sub[t3], g1 & g2).is_none();
    ok.then_some(t3)
}

/// Bypasses deletable empty bags until none remain, always taking the first
/// candidate in node order. The new edge carries the intersection of the two
/// guards.
pub fn remove_deletable_empty_bags(d: &Digraph, t: &Decomposition) -> Result<Decomposition, TransformError> {
    require(t, &[Flavor::Sc0, Flavor::Sc0v], "SC0 or SC0v")?;
    require_valid(d, &t.with_flavor(Flavor::Sc0v))?;
    let mut cur = t.clone();
    while let Some(next) = remove_one(d, &cur, None) {
        cur = next;
    }
    Ok(cur)
}

/// Bypasses one deletable empty bag, the given one or else the first.
pub(crate) fn remove_one(d: &Digraph, t: &Decomposition, only: Option<usize>) -> Option<Decomposition> {
    let sub = t.subtree_unions();
    let candidates: Vec<usize> = match only {
        Some(i) => vec![i],
        None => (0..t.len()).collect(),
    };
    for t2 in candidates {
        if let Some(t3) = deletable(d, t, &sub, t2) {
            let t1 = t.parent[t2].expect("non-root");
            let mut out = t.clone();
            out.parent[t3] = Some(t1);
            out.guard[t3] = t.guard[t2] & t.guard[t3];
            return Some(remove_node(&out, t2));
        }
    }
    None
}

/// Indices of the deletable empty bags.
pub fn deletable_nodes(d: &Digraph, t: &Decomposition) -> Vec<usize> {
    let sub = t.subtree_unions();
    (0..t.len()).filter(|&i| deletable(d, t, &sub, i).is_some()).collect()
}

/// Drops a node that no longer has children.
fn remove_node(t: &Decomposition, gone: usize) -> Decomposition {
    let shift = |i: usize| if i > gone { i - 1 } else { i };
    let keep: Vec<usize> = (0..t.len()).filter(|&i| i != gone).collect();
    Decomposition {
        flavor: t.flavor,
        ids: keep.iter().map(|&i| t.ids[i].clone()).collect(),
        bags: keep.iter().map(|&i| t.bags[i]).collect(),
        parent: keep.iter().map(|&i| t.parent[i].map(shift)).collect(),
        guard: keep.iter().map(|&i| t.guard[i]).collect(),
        root: shift(t.root),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> Digraph {
        let e: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Digraph::from_indices(n, &e).unwrap()
    }

    /// root {0} -> {1} -> {2}, each guarded by the previous vertex.
    fn path_decomposition(flavor: Flavor) -> Decomposition {
        let mut t = Decomposition {
            flavor,
            ids: vec!["n0".into()],
            bags: vec![VertexSet::singleton(0)],
            parent: vec![None],
            guard: vec![VertexSet::EMPTY],
            root: 0,
        };
        let a = t.push_child(0, VertexSet::singleton(1), VertexSet::singleton(0));
        t.push_child(a, VertexSet::singleton(2), VertexSet::singleton(1));
        t
    }

    #[test]
    fn reroot_at_leaf() {
        let d = cycle(3);
        let t = path_decomposition(Flavor::NcwE);
        assert_eq!(reroot_ncwe(&t, 0).unwrap(), t);
        let r = reroot_ncwe(&t, 2).unwrap();
        let rep = validate(&d, &r);
        assert!(rep.valid, "{:?}", rep.violations);
        assert_eq!(rep.width, 1);
        assert_eq!(r.root, 2);
    }

    #[test]
    fn restrict_to_single_vertex() {
        let d = cycle(3);
        let t = path_decomposition(Flavor::NcwE);
        let h = d.induced_subgraph(VertexSet::singleton(2));
        let r = restrict_to_subgraph(&d, &t, &h).unwrap();
        assert!(validate(&h, &r).valid);
        assert_eq!(r.bags.iter().filter(|b| !b.is_empty()).count(), 1);
        assert!(!r.bags[r.root].is_empty());
        assert_eq!(restrict_to_subgraph(&d, &t, &d).unwrap(), t);
    }

    #[test]
    fn lift_through_path_contraction() {
        // 0 -> 1 -> 2 -> 0; contracting (0, 1), where 0 has out-degree 1,
        // puts the merged vertex where 1 was.
        let d = cycle(3);
        let t = path_decomposition(Flavor::NcwE);
        let (g, r) = lift_contraction(&d, &t, 0, 1, "x").unwrap();
        let x = g.vertex("x").unwrap();
        assert!(r.bags[1].contains(x));
        assert!(r.bags[0].is_empty() || r.root != 0);
        let rep = validate(&g, &r);
        assert!(rep.valid, "{:?}", rep.violations);
        assert!(rep.width <= 1);
    }

    #[test]
    fn split_then_replicate_then_compress() {
        // Bidirected triangle with a single bag of three vertices.
        let d = Digraph::from_indices(3, &[(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)]).unwrap();
        let t = Decomposition::trivial(&d, Flavor::Sc0v);
        let s = split_bag(&d, &t, 0, 2).unwrap();
        assert_eq!(s.bags[1], VertexSet::singleton(2));
        assert_eq!(s.guard[1], VertexSet::from_indices([0, 1]));
        assert!(validate(&d, &s).valid);
        let (c, proj) = usc_to_scv(&d, &s).unwrap();
        assert!(validate(&d, &c).valid);
        assert_eq!(proj.len(), c.len());
        let r = remove_deletable_empty_bags(&d, &c).unwrap();
        assert!(validate(&d, &r).valid);
        assert!(r.width() <= t.width());
        assert!(split_bag(&d, &s, 1, 2).is_err());
    }

    #[test]
    fn replication_splits_components() {
        // Root {0} guards two separate digons below it.
        let d = Digraph::from_indices(5, &[(0, 1), (1, 0), (1, 2), (2, 1), (0, 3), (3, 0), (3, 4), (4, 3)]).unwrap();
        let mut t = Decomposition {
            flavor: Flavor::Usc0,
            ids: vec!["n0".into()],
            bags: vec![VertexSet::singleton(0)],
            parent: vec![None],
            guard: vec![VertexSet::EMPTY],
            root: 0,
        };
        t.push_child(0, VertexSet::from_indices([1, 2, 3, 4]), VertexSet::singleton(0));
        assert!(validate(&d, &t).valid);
        let (c, _) = usc_to_scv(&d, &t).unwrap();
        assert_eq!(c.len(), 3);
        assert!(validate(&d, &c).valid);
    }

    #[test]
    fn empty_bag_with_included_guards_is_bypassed() {
        // 0 -> 1 <-> 2 -> 0; removing 0 leaves the digon {1, 2}.
        let d = Digraph::from_indices(3, &[(0, 1), (1, 2), (2, 1), (2, 0)]).unwrap();
        let mut t = Decomposition {
            flavor: Flavor::Sc0v,
            ids: vec!["n0".into()],
            bags: vec![VertexSet::singleton(0)],
            parent: vec![None],
            guard: vec![VertexSet::EMPTY],
            root: 0,
        };
        let e = t.push_child(0, VertexSet::EMPTY, VertexSet::singleton(0));
        t.push_child(e, VertexSet::from_indices([1, 2]), VertexSet::singleton(0));
        assert!(validate(&d, &t).valid);
        let r = remove_deletable_empty_bags(&d, &t).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r.guard[1], VertexSet::singleton(0));
        assert!(validate(&d, &r).valid);
    }
}

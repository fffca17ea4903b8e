//! Simple digraphs over named vertices with bitset vertex sets.
//!
//! Vertices are identified externally by strings and internally by dense
//! indices in input order. Every vertex set is a fixed 128-bit mask, so a
//! digraph holds at most [`MAX_VERTICES`] vertices.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::ops::{BitAnd, BitAndAssign, BitOr, BitOrAssign, Sub, SubAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest vertex count representable by [`VertexSet`].
pub const MAX_VERTICES: usize = 128;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate vertex name `{0}`")]
    DuplicateVertex(String),
    #[error("self-loop at `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge `{0}` -> `{1}`")]
    DuplicateEdge(String, String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("edge `{0}` -> `{1}` is not in the digraph")]
    MissingEdge(String, String),
    #[error("edge `{0}` -> `{1}` is not butterfly contractible")]
    NotContractible(String, String),
    #[error("name `{0}` already used by another vertex")]
    NameClash(String),
    #[error("too many vertices: {0} (limit {MAX_VERTICES})")]
    TooLarge(usize),
    #[error("invalid walk: {0}")]
    InvalidWalk(String),
}

/// A subset of the dense vertex indices of one digraph.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexSet(pub u128);

impl VertexSet {
    pub const EMPTY: VertexSet = VertexSet(0);

    pub fn singleton(v: usize) -> Self {
        VertexSet(1u128 << v)
    }

    /// The set `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        if n >= 128 {
            VertexSet(u128::MAX)
        } else {
            VertexSet((1u128 << n) - 1)
        }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Self {
        let mut s = VertexSet::EMPTY;
        for v in it {
            s.insert(v);
        }
        s
    }

    #[inline]
    pub fn contains(self, v: usize) -> bool {
        self.0 >> v & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, v: usize) {
        self.0 |= 1u128 << v;
    }

    #[inline]
    pub fn remove(&mut self, v: usize) {
        self.0 &= !(1u128 << v);
    }

    #[inline]
    pub fn with(self, v: usize) -> Self {
        VertexSet(self.0 | 1u128 << v)
    }

    #[inline]
    pub fn without(self, v: usize) -> Self {
        VertexSet(self.0 & !(1u128 << v))
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_subset(self, other: VertexSet) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn intersects(self, other: VertexSet) -> bool {
        self.0 & other.0 != 0
    }

    /// Smallest index in the set.
    #[inline]
    pub fn first(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros() as usize)
        }
    }

    pub fn iter(self) -> VertexSetIter {
        VertexSetIter(self.0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// All subsets of `self`, smallest mask first.
    pub fn subsets(self) -> impl Iterator<Item = VertexSet> {
        let full = self.0;
        let mut cur: Option<u128> = Some(0);
        std::iter::from_fn(move || {
            let out = cur?;
            cur = if out == full {
                None
            } else {
                Some((out.wrapping_sub(full)) & full)
            };
            Some(VertexSet(out))
        })
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

pub struct VertexSetIter(u128);

impl Iterator for VertexSetIter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let v = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(v)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for VertexSetIter {}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        VertexSet::from_indices(iter)
    }
}

macro_rules! set_op {
    ($tr:ident, $f:ident, $tra:ident, $fa:ident, $e:expr) => {
        impl $tr for VertexSet {
            type Output = VertexSet;
            #[inline]
            fn $f(self, rhs: VertexSet) -> VertexSet {
                let op: fn(u128, u128) -> u128 = $e;
                VertexSet(op(self.0, rhs.0))
            }
        }
        impl $tra for VertexSet {
            #[inline]
            fn $fa(&mut self, rhs: VertexSet) {
                let op: fn(u128, u128) -> u128 = $e;
                self.0 = op(self.0, rhs.0);
            }
        }
    };
}

set_op!(BitOr, bitor, BitOrAssign, bitor_assign, |a, b| a | b);
set_op!(BitAnd, bitand, BitAndAssign, bitand_assign, |a, b| a & b);
set_op!(Sub, sub, SubAssign, sub_assign, |a, b| a & !b);

/// A finite simple digraph.
#[derive(Clone)]
pub struct Digraph {
    names: Vec<String>,
    index: HashMap<String, usize>,
    out: Vec<VertexSet>,
    inn: Vec<VertexSet>,
}

impl fmt::Debug for Digraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> = self
            .edges()
            .map(|(u, v)| format!("{}->{}", self.names[u], self.names[v]))
            .collect();
        f.debug_struct("Digraph")
            .field("vertices", &self.names)
            .field("edges", &edges)
            .finish()
    }
}

impl PartialEq for Digraph {
    /// Equality of labelled digraphs: same names in the same order and same edges.
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.out == other.out
    }
}

impl Eq for Digraph {}

impl Digraph {
    /// Builds a digraph from vertex names and named edges.
    pub fn build<S: AsRef<str>>(vertex_names: &[S], edge_pairs: &[(S, S)]) -> Result<Digraph, GraphError> {
        let n = vertex_names.len();
        if n > MAX_VERTICES {
            return Err(GraphError::TooLarge(n));
        }
        let mut index = HashMap::with_capacity(n);
        let mut names = Vec::with_capacity(n);
        for (i, name) in vertex_names.iter().enumerate() {
            let name = name.as_ref().to_string();
            if index.insert(name.clone(), i).is_some() {
                return Err(GraphError::DuplicateVertex(name));
            }
            names.push(name);
        }
        let mut g = Digraph {
            names,
            index,
            out: vec![VertexSet::EMPTY; n],
            inn: vec![VertexSet::EMPTY; n],
        };
        for (a, b) in edge_pairs {
            let (a, b) = (a.as_ref(), b.as_ref());
            let u = g.require(a)?;
            let v = g.require(b)?;
            if u == v {
                return Err(GraphError::SelfLoop(a.to_string()));
            }
            if g.out[u].contains(v) {
                return Err(GraphError::DuplicateEdge(a.to_string(), b.to_string()));
            }
            g.out[u].insert(v);
            g.inn[v].insert(u);
        }
        Ok(g)
    }

    /// Builds a digraph on vertices named `0..n` from index pairs.
    pub fn from_indices(n: usize, edges: &[(usize, usize)]) -> Result<Digraph, GraphError> {
        let names: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        Self::from_named_indices(names, edges)
    }

    /// Builds a digraph with the given names from index pairs, ignoring
    /// repeated edges but rejecting loops.
    pub fn from_named_indices(names: Vec<String>, edges: &[(usize, usize)]) -> Result<Digraph, GraphError> {
        let n = names.len();
        if n > MAX_VERTICES {
            return Err(GraphError::TooLarge(n));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(GraphError::DuplicateVertex(name.clone()));
            }
        }
        let mut g = Digraph {
            names,
            index,
            out: vec![VertexSet::EMPTY; n],
            inn: vec![VertexSet::EMPTY; n],
        };
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::UnknownVertex(format!("#{}", u.max(v))));
            }
            if u == v {
                return Err(GraphError::SelfLoop(g.names[u].clone()));
            }
            g.out[u].insert(v);
            g.inn[v].insert(u);
        }
        Ok(g)
    }

    fn require(&self, name: &str) -> Result<usize, GraphError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| GraphError::UnknownVertex(name.to_string()))
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(|s| s.len()).sum()
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet::full(self.n())
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn vertex(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn vertex_or_err(&self, name: &str) -> Result<usize, GraphError> {
        self.require(name)
    }

    /// Resolves a list of names into a vertex set.
    pub fn set_of<S: AsRef<str>>(&self, names: &[S]) -> Result<VertexSet, GraphError> {
        let mut s = VertexSet::EMPTY;
        for n in names {
            s.insert(self.require(n.as_ref())?);
        }
        Ok(s)
    }

    pub fn set_names(&self, s: VertexSet) -> Vec<String> {
        s.iter().map(|v| self.names[v].clone()).collect()
    }

    #[inline]
    pub fn out_neighbors(&self, v: usize) -> VertexSet {
        self.out[v]
    }

    #[inline]
    pub fn in_neighbors(&self, v: usize) -> VertexSet {
        self.inn[v]
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out[v].len()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.inn[v].len()
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.out[u].contains(v)
    }

    /// Edges in (tail, head) index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |u| self.out[u].iter().map(move |v| (u, v)))
    }

    pub fn edge_by_name(&self, u: &str, v: &str) -> Result<(usize, usize), GraphError> {
        let a = self.require(u)?;
        let b = self.require(v)?;
        if !self.has_edge(a, b) {
            return Err(GraphError::MissingEdge(u.to_string(), v.to_string()));
        }
        Ok((a, b))
    }

    /// Vertices reachable from `from` inside `allowed` (including `from ∩ allowed`).
    pub fn reach(&self, from: VertexSet, allowed: VertexSet) -> VertexSet {
        let mut seen = from & allowed;
        let mut frontier = seen;
        while !frontier.is_empty() {
            let mut next = VertexSet::EMPTY;
            for v in frontier.iter() {
                next |= self.out[v];
            }
            next = next & allowed - seen;
            seen |= next;
            frontier = next;
        }
        seen
    }

    /// Vertices that can reach `to` inside `allowed`.
    pub fn coreach(&self, to: VertexSet, allowed: VertexSet) -> VertexSet {
        let mut seen = to & allowed;
        let mut frontier = seen;
        while !frontier.is_empty() {
            let mut next = VertexSet::EMPTY;
            for v in frontier.iter() {
                next |= self.inn[v];
            }
            next = next & allowed - seen;
            seen |= next;
            frontier = next;
        }
        seen
    }

    /// Strong components of `D - removed`, ordered by smallest member.
    pub fn strong_components(&self, removed: VertexSet) -> SccPartition {
        let comps = self.scc_sets(self.vertices() - removed);
        let mut comp_of = vec![None; self.n()];
        for (i, c) in comps.iter().enumerate() {
            for v in c.iter() {
                comp_of[v] = Some(i);
            }
        }
        SccPartition { comps, comp_of }
    }

    /// Strong components of the subgraph induced by `allowed`, ordered by
    /// smallest member.
    pub fn scc_sets(&self, allowed: VertexSet) -> Vec<VertexSet> {
        let mut rest = allowed;
        let mut comps = Vec::new();
        while let Some(v) = rest.first() {
            let s = VertexSet::singleton(v);
            let c = self.reach(s, rest) & self.coreach(s, rest);
            comps.push(c);
            rest -= c;
        }
        comps
    }

    /// The strong component of `D[allowed]` containing `v`.
    pub fn scc_of(&self, v: usize, allowed: VertexSet) -> VertexSet {
        let s = VertexSet::singleton(v);
        self.reach(s, allowed) & self.coreach(s, allowed)
    }

    /// Whether `D[set]` is strongly connected (the empty set is not).
    pub fn is_strongly_connected_set(&self, set: VertexSet) -> bool {
        match set.first() {
            None => false,
            Some(v) => self.scc_of(v, set) == set,
        }
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.n() == 0 || self.is_strongly_connected_set(self.vertices())
    }

    /// Vertices lying on some cycle of `D[allowed]`.
    pub fn cyclic_vertices(&self, allowed: VertexSet) -> VertexSet {
        let mut out = VertexSet::EMPTY;
        for c in self.scc_sets(allowed) {
            if c.len() > 1 {
                out |= c;
            }
        }
        out
    }

    /// True iff some closed walk of `D - removed` contains both `u` and `w`.
    pub fn closed_walk_through_both(&self, removed: VertexSet, u: usize, w: usize) -> Result<bool, GraphError> {
        for x in [u, w] {
            if x >= self.n() {
                return Err(GraphError::UnknownVertex(format!("#{x}")));
            }
            if removed.contains(x) {
                return Err(GraphError::InvalidWalk(format!(
                    "`{}` lies in the removed set",
                    self.names[x]
                )));
            }
        }
        let allowed = self.vertices() - removed;
        let c = self.scc_of(u, allowed);
        if u == w {
            return Ok(c.len() > 1);
        }
        Ok(c.contains(w))
    }

    /// A walk of `D - guard` starting and ending in `a` that visits a vertex
    /// outside `a ∪ guard`, if one exists.
    pub fn normality_violation(&self, guard: VertexSet, a: VertexSet) -> Option<Walk> {
        let allowed = self.vertices() - guard;
        let a = a & allowed;
        let bad = self.reach(a, allowed) & self.coreach(a, allowed) - a;
        let b = bad.first()?;
        let to_b = self.shortest_path(a, b, allowed)?;
        let back = self.shortest_path_to_set(b, a, allowed)?;
        let mut vertices = to_b;
        vertices.extend_from_slice(&back[1..]);
        Some(Walk {
            vertices,
            closed: false,
        })
    }

    /// Shortest path from some vertex of `from` to `to` inside `allowed`.
    pub fn shortest_path(&self, from: VertexSet, to: usize, allowed: VertexSet) -> Option<Vec<usize>> {
        let mut prev = vec![usize::MAX; self.n()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        let mut seen = VertexSet::EMPTY;
        for s in (from & allowed).iter() {
            seen.insert(s);
            queue.push_back(s);
        }
        while let Some(x) = queue.pop_front() {
            if x == to {
                let mut path = vec![x];
                let mut cur = x;
                while prev[cur] != usize::MAX {
                    cur = prev[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for y in (self.out[x] & allowed - seen).iter() {
                seen.insert(y);
                prev[y] = x;
                queue.push_back(y);
            }
        }
        None
    }

    /// Shortest path from `from` to some vertex of `to` inside `allowed`,
    /// using at least one edge.
    pub fn shortest_path_to_set(&self, from: usize, to: VertexSet, allowed: VertexSet) -> Option<Vec<usize>> {
        let mut prev = vec![usize::MAX; self.n()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        let mut seen = VertexSet::EMPTY;
        for y in (self.out[from] & allowed).iter() {
            seen.insert(y);
            prev[y] = from;
            queue.push_back(y);
        }
        while let Some(x) = queue.pop_front() {
            if to.contains(x) {
                let mut path = vec![x];
                let mut cur = x;
                loop {
                    cur = prev[cur];
                    path.push(cur);
                    if cur == from {
                        break;
                    }
                }
                path.reverse();
                return Some(path);
            }
            for y in (self.out[x] & allowed - seen).iter() {
                seen.insert(y);
                prev[y] = x;
                queue.push_back(y);
            }
        }
        None
    }

    /// Whether `(u, v)` may be butterfly contracted.
    pub fn butterfly_contractible(&self, u: usize, v: usize) -> Result<bool, GraphError> {
        if !self.has_edge(u, v) {
            return Err(GraphError::MissingEdge(self.names[u].clone(), self.names[v].clone()));
        }
        Ok(self.out_degree(u) == 1 || self.in_degree(v) == 1)
    }

    /// Contracts the butterfly contractible edge `(u, v)` into a vertex named
    /// `merged`, which takes the position of `u`; loops and parallel edges
    /// are dropped.
    pub fn contract_edge(&self, u: usize, v: usize, merged: &str) -> Result<Digraph, GraphError> {
        if !self.butterfly_contractible(u, v)? {
            return Err(GraphError::NotContractible(
                self.names[u].clone(),
                self.names[v].clone(),
            ));
        }
        if let Some(&w) = self.index.get(merged) {
            if w != u && w != v {
                return Err(GraphError::NameClash(merged.to_string()));
            }
        }
        let map = |x: usize| -> usize {
            let x = if x == v { u } else { x };
            if x > v {
                x - 1
            } else {
                x
            }
        };
        let mut names: Vec<String> = Vec::with_capacity(self.n() - 1);
        for (i, nm) in self.names.iter().enumerate() {
            if i == v {
                continue;
            }
            names.push(if i == u { merged.to_string() } else { nm.clone() });
        }
        let mut edges = Vec::with_capacity(self.edge_count());
        for (a, b) in self.edges() {
            let (a, b) = (map(a), map(b));
            if a != b {
                edges.push((a, b));
            }
        }
        Digraph::from_named_indices(names, &edges)
    }

    /// The subgraph induced by `keep`, preserving vertex order.
    pub fn induced_subgraph(&self, keep: VertexSet) -> Digraph {
        let old: Vec<usize> = keep.iter().filter(|&v| v < self.n()).collect();
        let mut pos = vec![usize::MAX; self.n()];
        for (i, &v) in old.iter().enumerate() {
            pos[v] = i;
        }
        let names = old.iter().map(|&v| self.names[v].clone()).collect();
        let mut edges = Vec::new();
        for &u in &old {
            for v in (self.out[u] & keep).iter() {
                edges.push((pos[u], pos[v]));
            }
        }
        Digraph::from_named_indices(names, &edges).expect("induced subgraph of a valid digraph")
    }

    /// The digraph with the given edges removed.
    pub fn delete_edges(&self, drop: &[(usize, usize)]) -> Result<Digraph, GraphError> {
        let mut g = self.clone();
        for &(u, v) in drop {
            if !g.has_edge(u, v) {
                return Err(GraphError::MissingEdge(self.names[u].clone(), self.names[v].clone()));
            }
            g.out[u].remove(v);
            g.inn[v].remove(u);
        }
        Ok(g)
    }

    /// Adds an edge in place (used by generators).
    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(u != v);
        self.out[u].insert(v);
        self.inn[v].insert(u);
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) {
        self.out[u].remove(v);
        self.inn[v].remove(u);
    }

    /// Checks that a walk uses edges of this digraph and, if closed, returns
    /// to its start.
    pub fn validate_walk(&self, w: &Walk) -> Result<(), GraphError> {
        if w.vertices.is_empty() {
            return Err(GraphError::InvalidWalk("empty walk".into()));
        }
        for &x in &w.vertices {
            if x >= self.n() {
                return Err(GraphError::InvalidWalk(format!("unknown vertex #{x}")));
            }
        }
        for p in w.vertices.windows(2) {
            if !self.has_edge(p[0], p[1]) {
                return Err(GraphError::InvalidWalk(format!(
                    "missing edge {} -> {}",
                    self.names[p[0]], self.names[p[1]]
                )));
            }
        }
        if w.closed && w.vertices.first() != w.vertices.last() {
            return Err(GraphError::InvalidWalk("closed walk does not return".into()));
        }
        Ok(())
    }

    /// Lifts a closed walk of `D/(u,v)` (contracted into `merged`) back to a
    /// closed walk of `D`.
    ///
    /// `walk` is given by vertex names of the contracted digraph. The result
    /// contains every vertex of the walk other than `merged`, and contains `v`
    /// when `deg⁺(u) = 1`, otherwise `u`.
    pub fn lift_closed_walk(
        &self,
        u: usize,
        v: usize,
        merged: &str,
        walk: &[String],
    ) -> Result<Vec<String>, GraphError> {
        let contracted = self.contract_edge(u, v, merged)?;
        if walk.is_empty() || walk.first() != walk.last() {
            return Err(GraphError::InvalidWalk("walk is not closed".into()));
        }
        let idx: Vec<usize> = walk
            .iter()
            .map(|n| contracted.vertex_or_err(n))
            .collect::<Result<_, _>>()?;
        contracted.validate_walk(&Walk {
            vertices: idx.clone(),
            closed: true,
        })?;
        let x = contracted.vertex(merged).expect("merged vertex exists");
        if !idx.contains(&x) {
            return Err(GraphError::InvalidWalk(format!("walk avoids `{merged}`")));
        }
        let orig = |name: &str| -> usize { self.vertex(name).expect("name survives contraction") };
        let cyc = &walk[..walk.len() - 1];
        let m = cyc.len();
        if m == 1 {
            let keep = if self.out_degree(u) == 1 { v } else { u };
            let nm = self.names[keep].clone();
            return Ok(vec![nm.clone(), nm]);
        }
        let mut out: Vec<usize> = Vec::new();
        for i in 0..m {
            let name = &cyc[i];
            if name != merged {
                out.push(orig(name));
                continue;
            }
            let p = orig(&cyc[(i + m - 1) % m]);
            let s = orig(&cyc[(i + 1) % m]);
            let entry = if self.has_edge(p, u) { u } else { v };
            let exit = if self.has_edge(u, s) { u } else { v };
            match (entry == u, exit == u) {
                (true, true) => out.push(u),
                (false, false) => out.push(v),
                (true, false) => {
                    out.push(u);
                    out.push(v);
                }
                (false, true) => return Err(GraphError::InvalidWalk("cannot route through contracted edge".into())),
            }
        }
        out.push(out[0]);
        let lifted = Walk {
            vertices: out,
            closed: true,
        };
        self.validate_walk(&lifted)?;
        Ok(lifted.vertices.iter().map(|&i| self.names[i].clone()).collect())
    }

    /// Plain JSON form.
    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            vertices: self.names.clone(),
            edges: self
                .edges()
                .map(|(u, v)| [self.names[u].clone(), self.names[v].clone()])
                .collect(),
        }
    }

    pub fn from_json(j: &GraphJson) -> Result<Digraph, GraphError> {
        let edges: Vec<(&str, &str)> = j.edges.iter().map(|[a, b]| (a.as_str(), b.as_str())).collect();
        let names: Vec<&str> = j.vertices.iter().map(|s| s.as_str()).collect();
        Digraph::build(&names, &edges)
    }

    /// The digraph with every vertex renamed through `f`.
    pub fn relabel(&self, f: impl Fn(&str) -> String) -> Result<Digraph, GraphError> {
        let names: Vec<String> = self.names.iter().map(|s| f(s)).collect();
        let edges: Vec<(usize, usize)> = self.edges().collect();
        Digraph::from_named_indices(names, &edges)
    }

    /// Whether `perm` (old index -> new index) maps the edge set onto itself.
    pub fn is_automorphism(&self, perm: &[usize]) -> bool {
        if perm.len() != self.n() {
            return false;
        }
        let mut seen = VertexSet::EMPTY;
        for &p in perm {
            if p >= self.n() || seen.contains(p) {
                return false;
            }
            seen.insert(p);
        }
        self.edges().all(|(u, v)| self.has_edge(perm[u], perm[v]))
    }

    /// GraphViz rendering.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph D {\n");
        for (i, n) in self.names.iter().enumerate() {
            s.push_str(&format!("  v{i} [label=\"{}\"];\n", escape(n)));
        }
        for (u, v) in self.edges() {
            s.push_str(&format!("  v{u} -> v{v};\n"));
        }
        s.push_str("}\n");
        s
    }
}

pub(crate) fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// JSON digraph format: `{"vertices": [...], "edges": [[u, v], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct GraphJson {
    pub vertices: Vec<String>,
    pub edges: Vec<[String; 2]>,
}

/// Partition of the remaining vertices into strong components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccPartition {
    pub comps: Vec<VertexSet>,
    pub comp_of: Vec<Option<usize>>,
}

impl SccPartition {
    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn component_of(&self, v: usize) -> Option<VertexSet> {
        self.comp_of.get(v).copied().flatten().map(|i| self.comps[i])
    }
}

/// A walk given by dense vertex indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    pub vertices: Vec<usize>,
    pub closed: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle3() -> Digraph {
        Digraph::build(&["1", "2", "3"], &[("1", "2"), ("2", "3"), ("3", "1")]).unwrap()
    }

    #[test]
    fn build_rejects_bad_input() {
        assert_eq!(
            Digraph::build(&["a", "a"], &[]).unwrap_err(),
            GraphError::DuplicateVertex("a".into())
        );
        assert_eq!(
            Digraph::build(&["a"], &[("a", "a")]).unwrap_err(),
            GraphError::SelfLoop("a".into())
        );
        assert!(matches!(
            Digraph::build(&["a", "b"], &[("a", "b"), ("a", "b")]),
            Err(GraphError::DuplicateEdge(..))
        ));
        assert!(matches!(
            Digraph::build(&["a"], &[("a", "z")]),
            Err(GraphError::UnknownVertex(..))
        ));
        let g = Digraph::build::<&str>(&["a"], &[]).unwrap();
        assert_eq!((g.n(), g.edge_count()), (1, 0));
    }

    #[test]
    fn strong_components_of_cycle() {
        let g = cycle3();
        let p = g.strong_components(VertexSet::EMPTY);
        assert_eq!(p.comps, vec![VertexSet::full(3)]);
        let p = g.strong_components(VertexSet::singleton(1));
        assert_eq!(p.comps, vec![VertexSet::singleton(0), VertexSet::singleton(2)]);
        assert_eq!(p.comp_of[1], None);
    }

    #[test]
    fn closed_walks() {
        let g = cycle3();
        assert!(g.closed_walk_through_both(VertexSet::EMPTY, 0, 2).unwrap());
        assert!(!g.closed_walk_through_both(VertexSet::singleton(1), 0, 2).unwrap());
        assert!(g.closed_walk_through_both(VertexSet::EMPTY, 0, 0).unwrap());
        assert!(!g.closed_walk_through_both(VertexSet::singleton(1), 0, 0).unwrap());
        assert!(g.closed_walk_through_both(VertexSet::singleton(1), 1, 0).is_err());
    }

    #[test]
    fn normality() {
        let g = cycle3();
        let w = g
            .normality_violation(VertexSet::EMPTY, VertexSet::singleton(0))
            .unwrap();
        g.validate_walk(&w).unwrap();
        assert_eq!(w.vertices, vec![0, 1, 2, 0]);
        assert!(g
            .normality_violation(VertexSet::singleton(1), VertexSet::from_indices([0, 2]))
            .is_none());
    }

    #[test]
    fn contraction() {
        let p = Digraph::build(&["u", "v"], &[("u", "v")]).unwrap();
        let c = p.contract_edge(0, 1, "x").unwrap();
        assert_eq!((c.n(), c.edge_count()), (1, 0));
        let g = cycle3();
        let c = g.contract_edge(0, 1, "x").unwrap();
        assert_eq!(c.names(), &["x".to_string(), "3".to_string()]);
        assert!(c.has_edge(0, 1) && c.has_edge(1, 0));
        let k = Digraph::build(&["u", "v", "a", "b"], &[("u", "v"), ("u", "a"), ("b", "v")]).unwrap();
        assert!(!k.butterfly_contractible(0, 1).unwrap());
        assert!(k.contract_edge(0, 1, "x").is_err());
    }

    #[test]
    fn lifting_walks() {
        let g = cycle3();
        let w: Vec<String> = ["x", "3", "x"].iter().map(|s| s.to_string()).collect();
        let lifted = g.lift_closed_walk(0, 1, "x", &w).unwrap();
        assert_eq!(lifted, vec!["1", "2", "3", "1"]);
    }

    #[test]
    fn subsets_enumeration() {
        let s = VertexSet::from_indices([1, 3, 4]);
        let all: Vec<VertexSet> = s.subsets().collect();
        assert_eq!(all.len(), 8);
        assert!(all.iter().all(|x| x.is_subset(s)));
    }
}

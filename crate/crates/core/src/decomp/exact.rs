//! Exact width by dynamic programming over (subtree vertex set, guard)
//! states, and a decision procedure for the strong-component flavors on
//! mid-sized graphs.

use std::collections::HashMap;

use thiserror::Error;

use super::{edge_condition, Decomposition, Flavor};
use crate::digraph::{Digraph, VertexSet};

/// Largest graph `exact_width` accepts by default.
pub const EXACT_CAP: usize = 7;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExactError {
    #[error("graph has {n} vertices; exact search is capped at {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("graph has no vertices")]
    Empty,
    #[error("no decomposition of width at most {0}")]
    AboveBound(usize),
    #[error("search budget of {0} steps exhausted")]
    Budget(u64),
}

#[derive(Debug, Clone)]
pub struct ExactResult {
    pub width: usize,
    pub certificate: Decomposition,
    /// Set when the certificate has more than `n²` nodes, which only the
    /// SC0 flavor forbids.
    pub size_cap_exceeded: bool,
}

#[derive(Clone, Copy, Debug)]
enum Choice {
    /// Bag `b`; children taken from entry `entry` of the union table of `Y - b`.
    Direct { b: usize, entry: usize },
    /// Empty bag with a single child `(Y, g)` under a different guard.
    Swap { g: usize },
}

#[derive(Clone, Copy, Debug)]
struct PuEntry {
    union: usize,
    /// Last block taken: (Y, g), and the entry index for the remainder.
    block: Option<(usize, usize, usize)>,
}

struct Tables {
    n: usize,
    flavor: Flavor,
    /// Inclusion-minimal valid guards per subtree set.
    min_guards: Vec<Vec<usize>>,
}

impl Tables {
    fn new(d: &Digraph, flavor: Flavor) -> Tables {
        let n = d.n();
        let full = 1usize << n;
        let mut min_guards = vec![Vec::new(); full];
        for (y, slot) in min_guards.iter_mut().enumerate().skip(1) {
            let mut valid: Vec<usize> = (0..full)
                .filter(|&g| edge_condition(d, flavor, VertexSet(y as u128), VertexSet(g as u128)).is_none())
                .collect();
            valid.sort_by_key(|g| g.count_ones());
            let mut minimal: Vec<usize> = Vec::new();
            for g in valid {
                if !minimal.iter().any(|&m| m & g == m) {
                    minimal.push(g);
                }
            }
            minimal.sort_unstable();
            *slot = minimal;
        }
        Tables { n, flavor, min_guards }
    }
}

/// Outcome of the decision procedure for one width bound.
struct Level {
    good: HashMap<(usize, usize), Choice>,
    pu: Vec<Vec<PuEntry>>,
    /// Unions from at least two blocks, per set; used by empty bags.
    multi: Vec<Vec<PuEntry>>,
    root: Option<(usize, usize)>,
}

fn decide(tab: &Tables, k: usize) -> Level {
    let n = tab.n;
    let full = 1usize << n;
    let lim = k + 1;
    let empty_ok = !tab.flavor.nonempty_bags();
    let scd = tab.flavor == Flavor::Scd;
    let mut good: HashMap<(usize, usize), Choice> = HashMap::new();
    let mut pu: Vec<Vec<PuEntry>> = vec![Vec::new(); full];
    let mut multis: Vec<Vec<PuEntry>> = vec![Vec::new(); full];
    pu[0] = vec![PuEntry { union: 0, block: None }];
    let mut by_size: Vec<usize> = (1..full).collect();
    by_size.sort_by_key(|s| (s.count_ones(), *s));

    let add = |list: &mut Vec<PuEntry>, e: PuEntry| {
        if e.union.count_ones() as usize > lim {
            return;
        }
        if list.iter().any(|x| x.union & e.union == x.union) {
            return;
        }
        list.retain(|x| x.union & e.union != e.union);
        list.push(e);
    };

    for &y in &by_size {
        // Unions from at least two blocks, all strictly inside y.
        let low = y & y.wrapping_neg();
        let mut multi: Vec<PuEntry> = Vec::new();
        let rest_bits = y & !low;
        let mut sub = rest_bits;
        loop {
            let block = sub | low;
            if block != y {
                for &g in &tab.min_guards[block] {
                    if !good.contains_key(&(block, g)) {
                        continue;
                    }
                    for (ri, r) in pu[y & !block].iter().enumerate() {
                        add(
                            &mut multi,
                            PuEntry {
                                union: r.union | g,
                                block: Some((block, g, ri)),
                            },
                        );
                    }
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest_bits;
        }

        // Direct options for every guard of y.
        let guards: Vec<usize> = tab.min_guards[y]
            .iter()
            .copied()
            .filter(|g| g.count_ones() as usize <= lim)
            .collect();
        for &g in &guards {
            if let Some(c) = direct_option(y, g, lim, empty_ok, scd, &pu, &multi) {
                good.insert((y, g), c);
            }
        }
        if empty_ok {
            // Guard swaps through an empty bag, to a fixpoint.
            loop {
                let mut changed = false;
                for &g in &guards {
                    if good.contains_key(&(y, g)) {
                        continue;
                    }
                    let found = guards.iter().copied().find(|&g2| {
                        good.contains_key(&(y, g2))
                            && ((g | g2).count_ones() as usize) <= lim
                            && !(scd && y & (g | g2) != 0)
                    });
                    if let Some(g2) = found {
                        good.insert((y, g), Choice::Swap { g: g2 });
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
        }
        multis[y] = multi.clone();
        let mut list = multi;
        for &g in &guards {
            if good.contains_key(&(y, g)) {
                add(
                    &mut list,
                    PuEntry {
                        union: g,
                        block: Some((y, g, 0)),
                    },
                );
            }
        }
        pu[y] = list;
    }

    let all = full - 1;
    let mut root = None;
    'outer: for b in by_size.iter().copied() {
        for (ei, e) in pu[all & !b].iter().enumerate() {
            if ((b | e.union).count_ones() as usize) <= lim && !(scd && (all & !b) & e.union != 0) {
                root = Some((b, ei));
                break 'outer;
            }
        }
    }
    Level {
        good,
        pu,
        multi: multis,
        root,
    }
}

fn direct_option(
    y: usize,
    g: usize,
    lim: usize,
    empty_ok: bool,
    scd: bool,
    pu: &[Vec<PuEntry>],
    multi: &[PuEntry],
) -> Option<Choice> {
    // Prefer large bags: they give smaller trees.
    let mut bags: Vec<usize> = Vec::new();
    let mut sub = y;
    loop {
        bags.push(sub);
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & y;
    }
    for b in bags {
        if b == 0 {
            if !empty_ok {
                continue;
            }
            for (ei, e) in multi.iter().enumerate() {
                if ((g | e.union).count_ones() as usize) <= lim && !(scd && y & (g | e.union) != 0) {
                    // For the empty bag the entry indexes the multi-block table.
                    return Some(Choice::Direct { b: 0, entry: ei });
                }
            }
            continue;
        }
        let rest = y & !b;
        for (ei, e) in pu[rest].iter().enumerate() {
            if ((b | g | e.union).count_ones() as usize) <= lim && !(scd && rest & (g | e.union) != 0) {
                return Some(Choice::Direct { b, entry: ei });
            }
        }
    }
    None
}

struct Builder<'a> {
    level: &'a Level,
    t: Decomposition,
}

impl Builder<'_> {
    fn blocks(&self, table: &[PuEntry], mut entry: usize, mut set: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut table = table;
        loop {
            let e = table[entry];
            match e.block {
                None => break,
                Some((y, g, next)) => {
                    out.push((y, g));
                    set &= !y;
                    if set == 0 {
                        break;
                    }
                    table = &self.level.pu[set];
                    entry = next;
                }
            }
        }
        out
    }

    fn children_of(&mut self, node: usize, blocks: Vec<(usize, usize)>) {
        for (y, g) in blocks {
            let c = self.t.push_child(node, VertexSet::EMPTY, VertexSet(g as u128));
            self.fill(c, y, g);
        }
    }

    fn fill(&mut self, node: usize, y: usize, g: usize) {
        match self.level.good[&(y, g)] {
            Choice::Swap { g: g2 } => {
                let c = self.t.push_child(node, VertexSet::EMPTY, VertexSet(g2 as u128));
                self.fill(c, y, g2);
            }
            Choice::Direct { b, entry } => {
                self.t.bags[node] = VertexSet(b as u128);
                let blocks = if b == 0 {
                    self.blocks(&self.level.multi[y], entry, y)
                } else {
                    let rest = y & !b;
                    if rest == 0 {
                        Vec::new()
                    } else {
                        self.blocks(&self.level.pu[rest], entry, rest)
                    }
                };
                self.children_of(node, blocks);
            }
        }
    }
}

/// Minimum width over all decompositions of `flavor`, with a certificate.
pub fn exact_width(d: &Digraph, flavor: Flavor, upper_bound: Option<usize>) -> Result<ExactResult, ExactError> {
    exact_width_capped(d, flavor, upper_bound, EXACT_CAP)
}

pub fn exact_width_capped(
    d: &Digraph,
    flavor: Flavor,
    upper_bound: Option<usize>,
    cap: usize,
) -> Result<ExactResult, ExactError> {
    let n = d.n();
    if n == 0 {
        return Err(ExactError::Empty);
    }
    if n > cap || n > 12 {
        return Err(ExactError::TooLarge { n, cap });
    }
    let tab = Tables::new(d, flavor);
    let top = upper_bound.unwrap_or(n - 1).min(n - 1);
    for k in 0..=top {
        let level = decide(&tab, k);
        if let Some((b, entry)) = level.root {
            let all = (1usize << n) - 1;
            let mut builder = Builder {
                level: &level,
                t: Decomposition {
                    flavor,
                    ids: vec!["n0".into()],
                    bags: vec![VertexSet(b as u128)],
                    parent: vec![None],
                    guard: vec![VertexSet::EMPTY],
                    root: 0,
                },
            };
            let rest = all & !b;
            let blocks = if rest == 0 {
                Vec::new()
            } else {
                builder.blocks(&level.pu[rest], entry, rest)
            };
            builder.children_of(0, blocks);
            let t = builder.t;
            let size_cap_exceeded = t.len() > n * n;
            return Ok(ExactResult {
                width: k,
                certificate: t,
                size_cap_exceeded,
            });
        }
    }
    Err(ExactError::AboveBound(top))
}

/// Options for [`sc_width_at_most`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ScSearchOptions {
    /// Largest bag allowed; `Some(1)` restricts to singleton or empty bags.
    pub max_bag: Option<usize>,
    /// Limit on exact-cover search steps.
    pub budget: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct ScSearchResult {
    pub feasible: bool,
    pub states: usize,
    pub good_states: usize,
    pub steps: u64,
    pub certificate: Option<Decomposition>,
}

#[derive(Clone, Debug)]
struct ScChoice {
    bag: u128,
    children: Vec<usize>,
}

struct Cover<'a> {
    cands: &'a [(u128, usize)],
    steps: u64,
    budget: Option<u64>,
}

impl Cover<'_> {
    fn run(&mut self, rest: u128, chosen: &mut Vec<usize>) -> Result<bool, ExactError> {
        self.steps += 1;
        if let Some(b) = self.budget {
            if self.steps > b {
                return Err(ExactError::Budget(b));
            }
        }
        if rest == 0 {
            return Ok(true);
        }
        let low = rest & rest.wrapping_neg();
        for &(y, s) in self.cands {
            if y & low != 0 && y & rest == y {
                chosen.push(s);
                if self.run(rest & !y, chosen)? {
                    return Ok(true);
                }
                chosen.pop();
            }
        }
        Ok(false)
    }
}

fn combinations_upto(n: usize, k: usize) -> Vec<u128> {
    let mut out = vec![0u128];
    let mut frontier = vec![(0u128, 0usize)];
    for _ in 0..k {
        let mut next = Vec::new();
        for &(s, from) in &frontier {
            for v in from..n {
                let t = s | (1u128 << v);
                out.push(t);
                next.push((t, v + 1));
            }
        }
        frontier = next;
    }
    out
}

fn subsets_of(s: u128) -> Vec<u128> {
    let mut out = Vec::new();
    let mut sub = s;
    loop {
        out.push(sub);
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & s;
    }
    out
}

/// Decides whether `d` has an SC0v decomposition of width at most `k`.
///
/// States are pairs `(Y, g)` with `|g| <= k + 1` and `Y` a strong component
/// of `d - g`. A state is good when some `G ⊇ g` with `|G| <= k + 1` and a
/// bag `B ⊆ G ∩ Y` leave `Y - B` exactly covered by good states whose guards
/// lie in `G`. States are settled in order of `|Y|`, iterating within each
/// size class for chains of empty bags.
pub fn sc_width_at_most(d: &Digraph, k: usize, opts: ScSearchOptions) -> Result<ScSearchResult, ExactError> {
    let n = d.n();
    if n == 0 {
        return Err(ExactError::Empty);
    }
    let lim = k + 1;
    let max_bag = opts.max_bag.unwrap_or(lim);
    let all = d.vertices().0;
    let guards = combinations_upto(n, lim.min(n));
    let mut states: Vec<(u128, u128)> = Vec::new();
    let mut by_guard: HashMap<u128, Vec<usize>> = HashMap::new();
    for &g in &guards {
        for c in d.scc_sets(VertexSet(all & !g)) {
            if c.0 == all {
                continue;
            }
            by_guard.entry(g).or_default().push(states.len());
            states.push((c.0, g));
        }
    }
    let mut order: Vec<usize> = (0..states.len()).collect();
    order.sort_by_key(|&s| (states[s].0.count_ones(), s));
    let mut good: Vec<Option<ScChoice>> = vec![None; states.len()];
    let mut steps = 0u64;

    // Candidate blocks below G: good states whose guard is a subset of G.
    let candidates = |good: &[Option<ScChoice>], big: u128| -> Vec<(u128, usize)> {
        let mut c = Vec::new();
        for g2 in subsets_of(big) {
            if let Some(list) = by_guard.get(&g2) {
                for &s in list {
                    if good[s].is_some() {
                        c.push((states[s].0, s));
                    }
                }
            }
        }
        c
    };

    let mut i = 0;
    while i < order.len() {
        let size = states[order[i]].0.count_ones();
        let mut j = i;
        while j < order.len() && states[order[j]].0.count_ones() == size {
            j += 1;
        }
        loop {
            let mut changed = false;
            for &s in &order[i..j] {
                if good[s].is_some() {
                    continue;
                }
                let (y, g) = states[s];
                let free: Vec<usize> = (0..n).filter(|&v| g >> v & 1 == 0).collect();
                let extra = lim - g.count_ones() as usize;
                'big: for add in combinations_upto(free.len(), extra) {
                    let mut big = g;
                    for (bit, &v) in free.iter().enumerate() {
                        if add >> bit & 1 == 1 {
                            big |= 1u128 << v;
                        }
                    }
                    let cands = candidates(&good, big);
                    for b in subsets_of(big & y) {
                        if b.count_ones() as usize > max_bag {
                            continue;
                        }
                        let mut cover = Cover {
                            cands: &cands,
                            steps,
                            budget: opts.budget,
                        };
                        let mut chosen = Vec::new();
                        let ok = cover.run(y & !b, &mut chosen)?;
                        steps = cover.steps;
                        if ok && !chosen.contains(&s) {
                            good[s] = Some(ScChoice {
                                bag: b,
                                children: chosen,
                            });
                            changed = true;
                            break 'big;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        i = j;
    }

    let mut root: Option<ScChoice> = None;
    'root: for &big in &guards {
        if big.count_ones() as usize != lim.min(n) {
            continue;
        }
        let cands = candidates(&good, big);
        for b in subsets_of(big) {
            if b == 0 || b.count_ones() as usize > max_bag {
                continue;
            }
            let mut cover = Cover {
                cands: &cands,
                steps,
                budget: opts.budget,
            };
            let mut chosen = Vec::new();
            let ok = cover.run(all & !b, &mut chosen)?;
            steps = cover.steps;
            if ok {
                root = Some(ScChoice {
                    bag: b,
                    children: chosen,
                });
                break 'root;
            }
        }
    }

    let certificate = root.map(|r| {
        let mut t = Decomposition {
            flavor: Flavor::Sc0v,
            ids: vec!["n0".into()],
            bags: vec![VertexSet(r.bag)],
            parent: vec![None],
            guard: vec![VertexSet::EMPTY],
            root: 0,
        };
        let mut stack: Vec<(usize, usize)> = r.children.iter().map(|&c| (0, c)).collect();
        while let Some((p, s)) = stack.pop() {
            let ch = good[s].as_ref().expect("good child");
            let node = t.push_child(p, VertexSet(ch.bag), VertexSet(states[s].1));
            for &c in &ch.children {
                stack.push((node, c));
            }
        }
        t
    });
    Ok(ScSearchResult {
        feasible: certificate.is_some(),
        states: states.len(),
        good_states: good.iter().filter(|g| g.is_some()).count(),
        steps,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::super::validate;
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

    fn cycle(n: usize) -> Digraph {
        let e: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Digraph::from_indices(n, &e).unwrap()
    }

    fn clique(n: usize) -> Digraph {
        let mut e = Vec::new();
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    e.push((u, v));
                }
            }
        }
        Digraph::from_indices(n, &e).unwrap()
    }

    #[test]
    fn small_known_widths() {
        let single = Digraph::build::<&str>(&["v"], &[]).unwrap();
        for f in Flavor::ALL {
            assert_eq!(exact_width(&single, f, None).unwrap().width, 0);
            for n in 3..=5 {
                let r = exact_width(&cycle(n), f, None).unwrap();
                assert_eq!(r.width, 1, "{f} cycle {n}");
                assert!(validate(&cycle(n), &r.certificate).valid);
            }
            let r = exact_width(&clique(4), f, None).unwrap();
            assert_eq!(r.width, 3, "{f}");
        }
    }

    #[test]
    fn certificates_validate_on_random_graphs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..60 {
            let n = rng.gen_range(1..=6);
            let d = random_digraph(&mut rng, n, 0.35);
            for f in Flavor::ALL {
                let r = exact_width(&d, f, None).unwrap();
                let rep = validate(&d, &r.certificate);
                assert!(rep.valid, "{f} {d:?} {:?}", rep.violations);
                assert_eq!(rep.width, r.width as i64);
            }
        }
    }

    /// Every decomposition with at most `max_nodes` nodes on a tiny graph.
    fn brute_force_width(d: &Digraph, flavor: Flavor, max_nodes: usize) -> Option<i64> {
        let n = d.n();
        let subsets = 1u128 << n;
        let mut best: Option<i64> = None;
        for nodes in 1..=max_nodes {
            // parent[i] < i, node 0 is the root
            let mut parents = vec![0usize; nodes];
            loop {
                // assign every vertex to a node
                let total_assign = nodes.pow(n as u32);
                for a in 0..total_assign {
                    let mut bags = vec![VertexSet::EMPTY; nodes];
                    let mut x = a;
                    for v in 0..n {
                        bags[x % nodes].insert(v);
                        x /= nodes;
                    }
                    let edges = nodes - 1;
                    let total_guards = (subsets as usize).pow(edges as u32);
                    for gi in 0..total_guards {
                        let mut guard = vec![VertexSet::EMPTY; nodes];
                        let mut x = gi;
                        for slot in guard.iter_mut().skip(1) {
                            *slot = VertexSet((x % subsets as usize) as u128);
                            x /= subsets as usize;
                        }
                        let t = Decomposition {
                            flavor,
                            ids: (0..nodes).map(|i| format!("n{i}")).collect(),
                            bags: bags.clone(),
                            parent: (0..nodes).map(|i| (i > 0).then(|| parents[i])).collect(),
                            guard,
                            root: 0,
                        };
                        let w = t.width();
                        if best.map_or(true, |b| w < b) && validate(d, &t).valid {
                            best = Some(w);
                        }
                    }
                }
                // next parent vector
                let mut i = nodes;
                loop {
                    if i <= 1 {
                        break;
                    }
                    i -= 1;
                    if parents[i] + 1 < i {
                        parents[i] += 1;
                        for p in parents.iter_mut().skip(i + 1) {
                            *p = 0;
                        }
                        break;
                    }
                    if i == 1 {
                        i = 0;
                    }
                }
                if i <= 1 && (nodes < 2 || parents[1..].iter().enumerate().all(|(j, &p)| p == j)) {
                    break;
                }
            }
        }
        best
    }

    #[test]
    fn matches_brute_force_on_three_vertices() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..25 {
            let d = random_digraph(&mut rng, 3, 0.5);
            for f in Flavor::ALL {
                let exact = exact_width(&d, f, None).unwrap().width as i64;
                let brute = brute_force_width(&d, f, 3).unwrap();
                assert!(brute >= exact, "{f} {d:?}: brute {brute} below exact {exact}");
                assert_eq!(brute, exact, "{f} {d:?}");
            }
        }
    }

    #[test]
    fn sc_decision_agrees_with_exact_width() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..60 {
            let n = rng.gen_range(2..=6);
            let d = random_digraph(&mut rng, n, 0.4);
            let w = exact_width(&d, Flavor::Sc0v, None).unwrap().width;
            for k in 0..n {
                let free = sc_width_at_most(&d, k, ScSearchOptions::default()).unwrap();
                let single = sc_width_at_most(
                    &d,
                    k,
                    ScSearchOptions {
                        max_bag: Some(1),
                        budget: None,
                    },
                )
                .unwrap();
                assert_eq!(free.feasible, k >= w, "{d:?} k={k}");
                assert_eq!(single.feasible, free.feasible, "{d:?} k={k}");
                if let Some(t) = free.certificate {
                    let rep = validate(&d, &t);
                    assert!(rep.valid, "{:?}", rep.violations);
                    assert!(rep.width <= k as i64);
                }
            }
        }
    }
}

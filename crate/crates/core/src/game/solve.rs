//! Attractor solvers over positions `(C, R)`: cops on `C`, robber in the
//! strong component `R` of `D - C`. Robber vertices inside one component
//! are interchangeable, so the component is all the solver tracks.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{combinations_upto, successor_spaces, GameError, GameMode, Position, StrategyTree};
use crate::digraph::{Digraph, VertexSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GameOptions {
    /// Upper limit on the number of positions in the arena.
    pub max_states: usize,
    /// Upper limit on enumerated cop moves (robber-monotone mode).
    pub budget: u64,
    /// Upper limit on extracted strategy tree nodes.
    pub max_tree_nodes: usize,
}

impl Default for GameOptions {
    fn default() -> Self {
        GameOptions {
            max_states: 8_000_000,
            budget: 2_000_000_000,
            max_tree_nodes: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Winner {
    Cops,
    Robber,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub winner: Winner,
    pub k: usize,
    pub mode: GameMode,
    pub strategy: Option<StrategyTree>,
    /// Positions from which the robber survives; empty when cops win.
    pub escape: Vec<Position>,
    pub states: usize,
}

/// The solved game for a fixed number of cops.
pub struct Arena {
    d: Digraph,
    k: usize,
    mode: GameMode,
    sets: Vec<VertexSet>,
    index: HashMap<VertexSet, u32>,
    base: Vec<u32>,
    comps: Vec<VertexSet>,
    comp_at: Vec<u8>,
    /// Round in which the cops secured the position; 0 if they never do.
    level: Vec<u32>,
    /// Cop announcement realising `level`.
    witness: Vec<u32>,
}

const NONE: u32 = u32::MAX;

impl Arena {
    pub fn build(d: &Digraph, k: usize, mode: GameMode, opts: &GameOptions) -> Result<Arena, GameError> {
        let n = d.n();
        let k = k.min(n);
        let mut count = 0usize;
        let mut binom = 1usize;
        for i in 0..=k {
            count = count.saturating_add(binom);
            binom = binom.saturating_mul(n - i) / (i + 1);
        }
        if count.saturating_mul(n.max(1)) > opts.max_states.saturating_mul(4) {
            return Err(GameError::TooLarge(count, opts.max_states));
        }
        let sets = combinations_upto(d.vertices(), k);
        let index: HashMap<VertexSet, u32> = sets.iter().enumerate().map(|(i, &s)| (s, i as u32)).collect();
        let mut base = Vec::with_capacity(sets.len() + 1);
        let mut comps = Vec::new();
        let mut comp_at = vec![u8::MAX; sets.len() * n];
        for (i, &c) in sets.iter().enumerate() {
            base.push(comps.len() as u32);
            for (j, comp) in d.scc_sets(d.vertices() - c).into_iter().enumerate() {
                for v in comp.iter() {
                    comp_at[i * n + v] = j as u8;
                }
                comps.push(comp);
            }
            if comps.len() > opts.max_states {
                return Err(GameError::TooLarge(comps.len(), opts.max_states));
            }
        }
        base.push(comps.len() as u32);
        let states = comps.len();
        let mut arena = Arena {
            d: d.clone(),
            k,
            mode,
            sets,
            index,
            base,
            comps,
            comp_at,
            level: vec![0; states],
            witness: vec![NONE; states],
        };
        match mode {
            GameMode::Free => arena.solve_free(),
            GameMode::RobberMonotone => arena.solve_monotone(opts.budget)?,
        }
        Ok(arena)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mode(&self) -> GameMode {
        self.mode
    }

    pub fn states(&self) -> usize {
        self.comps.len()
    }

    fn state_of(&self, c: u32, v: usize) -> u32 {
        let j = self.comp_at[c as usize * self.d.n() + v];
        debug_assert!(j != u8::MAX);
        self.base[c as usize] + j as u32
    }

    fn set_of_state(&self, st: u32) -> u32 {
        (self.base.partition_point(|&b| b <= st) - 1) as u32
    }

    /// The position index for cops on `cops` and the robber in `space`.
    pub fn lookup(&self, cops: VertexSet, space: VertexSet) -> Option<usize> {
        let c = *self.index.get(&cops)?;
        let v = space.first()?;
        if cops.contains(v) {
            return None;
        }
        let st = self.state_of(c, v);
        (self.comps[st as usize] == space).then_some(st as usize)
    }

    pub fn cops_win_from(&self, cops: VertexSet, space: VertexSet) -> bool {
        self.lookup(cops, space).is_some_and(|st| self.level[st] > 0)
    }

    /// Whether the cops win against every starting vertex.
    pub fn cops_win(&self) -> bool {
        (self.base[0]..self.base[1]).all(|st| self.level[st as usize] > 0)
    }

    /// The cops' announcement from a winning position.
    pub fn next_cops(&self, cops: VertexSet, space: VertexSet) -> Option<VertexSet> {
        let st = self.lookup(cops, space)?;
        let w = self.witness[st];
        (w != NONE).then(|| self.sets[w as usize])
    }

    /// Round index at which the cops secure the position (0 = never).
    pub fn rank(&self, cops: VertexSet, space: VertexSet) -> Option<u32> {
        self.lookup(cops, space).map(|st| self.level[st])
    }

    pub fn escape_positions(&self) -> Vec<Position> {
        (0..self.states())
            .filter(|&st| self.level[st] == 0)
            .map(|st| Position {
                cops: self.sets[self.set_of_state(st as u32) as usize],
                robber: self.comps[st],
            })
            .collect()
    }

    /// Free game. An intermediate `(X, S)` keeps cops on `X` while the robber
    /// roams the component `S` of `D - X`; it is good when some `C ⊇ X`
    /// leaves only secured positions inside `S`. A position `(C, R)` is
    /// secured when `(X, S)` is good for some `X ⊆ C`.
    fn solve_free(&mut self) {
        let n = self.d.n();
        let states = self.states();
        // Intermediates share the indexing of positions.
        let mut opt_target: Vec<u32> = Vec::new();
        let mut opt_set: Vec<u32> = Vec::new();
        let mut opt_left: Vec<u32> = Vec::new();
        let mut st_start = vec![0u32; states + 1];
        for c in 0..self.sets.len() {
            let per = 1u32 << self.sets[c].len();
            for st in self.base[c]..self.base[c + 1] {
                st_start[st as usize + 1] = per;
            }
        }
        for i in 0..states {
            st_start[i + 1] += st_start[i];
        }
        let mut st_opts = vec![0u32; st_start[states] as usize];
        let mut down_pairs: Vec<(u32, u32)> = Vec::with_capacity(st_opts.len());
        let mut local: Vec<(u32, u32)> = Vec::new();
        for c in 0..self.sets.len() {
            let (lo, hi) = (self.base[c], self.base[c + 1]);
            for (xpos, x) in self.sets[c].subsets().enumerate() {
                let xi = self.index[&x];
                local.clear();
                for st in lo..hi {
                    let v = self.comps[st as usize].first().expect("nonempty");
                    let target = self.state_of(xi, v);
                    let opt = match local.iter().find(|(t, _)| *t == target) {
                        Some(&(_, o)) => {
                            opt_left[o as usize] += 1;
                            o
                        }
                        None => {
                            let o = opt_target.len() as u32;
                            opt_target.push(target);
                            opt_set.push(c as u32);
                            opt_left.push(1);
                            local.push((target, o));
                            o
                        }
                    };
                    st_opts[(st_start[st as usize] as usize) + xpos] = opt;
                    down_pairs.push((target, st));
                }
            }
        }
        down_pairs.sort_unstable();
        let mut down_start = vec![0u32; states + 1];
        for &(t, _) in &down_pairs {
            down_start[t as usize + 1] += 1;
        }
        for i in 0..states {
            down_start[i + 1] += down_start[i];
        }
        let down: Vec<u32> = down_pairs.into_iter().map(|(_, s)| s).collect();

        let mut good_level = vec![0u32; states];
        let mut good_wit = vec![NONE; states];
        let mut fresh: Vec<u32> = Vec::new();
        for c in 0..self.sets.len() {
            for i in self.base[c]..self.base[c + 1] {
                let all = self.sets[c] | self.comps[i as usize];
                if all.len() <= self.k {
                    good_level[i as usize] = 1;
                    good_wit[i as usize] = self.index[&all];
                    fresh.push(i);
                }
            }
        }
        let mut level = 1u32;
        while !fresh.is_empty() {
            let mut won = Vec::new();
            for &i in &fresh {
                for &st in &down[down_start[i as usize] as usize..down_start[i as usize + 1] as usize] {
                    if self.level[st as usize] == 0 {
                        self.level[st as usize] = level;
                        won.push(st);
                    }
                }
            }
            let mut cand: BTreeMap<u32, u32> = BTreeMap::new();
            for &st in &won {
                for &o in &st_opts[st_start[st as usize] as usize..st_start[st as usize + 1] as usize] {
                    let left = &mut opt_left[o as usize];
                    *left -= 1;
                    if *left == 0 {
                        let t = opt_target[o as usize];
                        if good_level[t as usize] == 0 {
                            let e = cand.entry(t).or_insert(NONE);
                            *e = (*e).min(opt_set[o as usize]);
                        }
                    }
                }
            }
            level += 1;
            fresh.clear();
            for (t, w) in cand {
                good_level[t as usize] = level;
                good_wit[t as usize] = w;
                fresh.push(t);
            }
        }
        for st in 0..states {
            let l = self.level[st];
            if l == 0 {
                continue;
            }
            let mut best = NONE;
            for &o in &st_opts[st_start[st] as usize..st_start[st + 1] as usize] {
                let t = opt_target[o as usize] as usize;
                if good_level[t] == l {
                    best = best.min(good_wit[t]);
                }
            }
            self.witness[st] = best;
        }
        let _ = n;
    }

    /// Robber-monotone game. From `(C, R)` the cops may announce `C'` only
    /// if every space the robber can then reach lies inside `R`; with
    /// `X = C ∩ C'` and `S` the component of `D - X` around `R` this means
    /// `S - R ⊆ C'`, and the new spaces are the components of `D[R - C']`.
    /// Positions are solved in order of growing robber space; moves that
    /// keep the space fixed are resolved by iterating to a fixed point.
    fn solve_monotone(&mut self, budget: u64) -> Result<(), GameError> {
        let n = self.d.n();
        let mut groups: BTreeMap<(usize, u128), Vec<u32>> = BTreeMap::new();
        for st in 0..self.states() {
            let r = self.comps[st];
            groups.entry((r.len(), r.0)).or_default().push(st as u32);
        }
        let mut steps = 0u64;
        let mut level = 0u32;
        for ((_, r), members) in groups {
            let r = VertexSet(r);
            let v0 = r.first().expect("nonempty");
            let mut needs: Vec<VertexSet> = Vec::new();
            let mut need_id: HashMap<VertexSet, usize> = HashMap::new();
            let mut st_needs: Vec<Vec<usize>> = Vec::with_capacity(members.len());
            for &st in &members {
                let c = self.set_of_state(st);
                let mut mine = Vec::new();
                for x in self.sets[c as usize].subsets() {
                    let xi = self.index[&x];
                    let s = self.comps[self.state_of(xi, v0) as usize];
                    let need = x | (s - r);
                    if need.len() > self.k {
                        continue;
                    }
                    let id = *need_id.entry(need).or_insert_with(|| {
                        needs.push(need);
                        needs.len() - 1
                    });
                    if !mine.contains(&id) {
                        mine.push(id);
                    }
                }
                st_needs.push(mine);
            }
            // Options per need: (announcement, resulting positions).
            let mut options: Vec<Vec<(u32, Vec<u32>)>> = Vec::with_capacity(needs.len());
            for &need in &needs {
                let mut opts = Vec::new();
                let room = self.k - need.len();
                for extra in combinations_upto(self.d.vertices() - need, room) {
                    steps += 1;
                    if steps > budget {
                        return Err(GameError::Budget(budget));
                    }
                    let c2 = need | extra;
                    let ci = self.index[&c2];
                    let kids: Vec<u32> = self
                        .d
                        .scc_sets(r - c2)
                        .into_iter()
                        .map(|k| self.state_of(ci, k.first().expect("nonempty")))
                        .collect();
                    opts.push((ci, kids));
                }
                opts.sort_by_key(|o| o.0);
                options.push(opts);
            }
            let mut need_level = vec![0u32; needs.len()];
            let mut need_wit = vec![NONE; needs.len()];
            loop {
                level += 1;
                let mut changed = false;
                for (i, opts) in options.iter().enumerate() {
                    if need_level[i] != 0 {
                        continue;
                    }
                    let hit = opts.iter().find(|(_, kids)| {
                        kids.iter().all(|&k| {
                            let l = self.level[k as usize];
                            l != 0 && l < level
                        })
                    });
                    if let Some((ci, _)) = hit {
                        need_level[i] = level;
                        need_wit[i] = *ci;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
                for (m, &st) in members.iter().enumerate() {
                    if self.level[st as usize] != 0 {
                        continue;
                    }
                    let best = st_needs[m]
                        .iter()
                        .filter(|&&i| need_level[i] == level)
                        .map(|&i| need_wit[i])
                        .min();
                    if let Some(w) = best {
                        self.level[st as usize] = level;
                        self.witness[st as usize] = w;
                    }
                }
            }
        }
        let _ = n;
        Ok(())
    }

    /// Strategy tree following the solver's announcements. The root is the
    /// first announcement when the graph is strongly connected and an empty
    /// cop position otherwise.
    pub fn strategy_tree(&self, max_nodes: usize) -> Result<Option<StrategyTree>, GameError> {
        if !self.cops_win() {
            return Ok(None);
        }
        let d = &self.d;
        let comps = d.scc_sets(d.vertices());
        let mut ts;
        let mut stack: Vec<(usize, VertexSet, VertexSet)> = Vec::new();
        if comps.len() == 1 {
            let first = self.next_cops(VertexSet::EMPTY, comps[0]).expect("winning");
            ts = StrategyTree::single(first);
            stack.push((0, VertexSet::EMPTY, comps[0]));
        } else {
            ts = StrategyTree::single(VertexSet::EMPTY);
            for &k in &comps {
                let next = self.next_cops(VertexSet::EMPTY, k).expect("winning");
                let t = ts.push_child(0, k, next);
                stack.push((t, VertexSet::EMPTY, k));
            }
        }
        while let Some((t, prev, space)) = stack.pop() {
            let here = ts.cops[t];
            for r in successor_spaces(d, prev, here, space) {
                let next = self.next_cops(here, r).expect("winning position");
                let u = ts.push_child(t, r, next);
                if ts.len() > max_nodes {
                    return Err(GameError::TooLarge(ts.len(), max_nodes));
                }
                stack.push((u, here, r));
            }
        }
        Ok(Some(ts))
    }
}

pub fn solve_game(d: &Digraph, k: usize, mode: GameMode, opts: &GameOptions) -> Result<SolveResult, GameError> {
    let arena = Arena::build(d, k, mode, opts)?;
    let win = arena.cops_win();
    Ok(SolveResult {
        winner: if win { Winner::Cops } else { Winner::Robber },
        k,
        mode,
        strategy: arena.strategy_tree(opts.max_tree_nodes)?,
        escape: if win { Vec::new() } else { arena.escape_positions() },
        states: arena.states(),
    })
}

/// Least number of cops with a winning strategy.
pub fn cop_number(d: &Digraph, mode: GameMode, opts: &GameOptions) -> Result<usize, GameError> {
    cop_number_from(d, mode, opts, 0)
}

pub(crate) fn cop_number_from(
    d: &Digraph,
    mode: GameMode,
    opts: &GameOptions,
    from: usize,
) -> Result<usize, GameError> {
    for k in from..=d.n() {
        if Arena::build(d, k, mode, opts)?.cops_win() {
            return Ok(k);
        }
    }
    Ok(d.n())
}

/// Checks that `escape` is closed under cop announcements: from each of its
/// positions, every announcement of at most `k` cops (restricted to
/// monotone ones in that mode) admits a robber reply inside the set, and
/// the set contains a starting position. Returns the first failure.
pub fn audit_escape(d: &Digraph, k: usize, mode: GameMode, escape: &[Position]) -> Result<(), String> {
    let set: std::collections::HashSet<Position> = escape.iter().copied().collect();
    let starts = d.scc_sets(d.vertices());
    if !starts.iter().any(|&r| {
        set.contains(&Position {
            cops: VertexSet::EMPTY,
            robber: r,
        })
    }) {
        return Err("no starting position in the escape set".into());
    }
    let moves = combinations_upto(d.vertices(), k);
    for p in escape {
        for &c2 in &moves {
            let replies = successor_spaces(d, p.cops, c2, p.robber);
            if mode == GameMode::RobberMonotone && replies.iter().any(|r| !r.is_subset(p.robber)) {
                continue;
            }
            if !replies.iter().any(|&r| set.contains(&Position { cops: c2, robber: r })) {
                return Err(format!("{:?} has no safe reply to {:?}", p, c2));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::validate_strategy_tree;

    fn cycle(n: usize) -> Digraph {
        let e: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
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

    #[test]
    fn trivial_games() {
        let o = GameOptions::default();
        let one = Digraph::from_indices(1, &[]).unwrap();
        assert_eq!(solve_game(&one, 1, GameMode::Free, &o).unwrap().winner, Winner::Cops);
        assert_eq!(solve_game(&one, 0, GameMode::Free, &o).unwrap().winner, Winner::Robber);
        for n in 2..6 {
            assert_eq!(cop_number(&cycle(n), GameMode::Free, &o).unwrap(), 2);
            assert_eq!(cop_number(&cycle(n), GameMode::RobberMonotone, &o).unwrap(), 2);
        }
        let k4 = Digraph::from_indices(
            4,
            &[
                (0, 1),
                (1, 0),
                (0, 2),
                (2, 0),
                (0, 3),
                (3, 0),
                (1, 2),
                (2, 1),
                (1, 3),
                (3, 1),
                (2, 3),
                (3, 2),
            ],
        )
        .unwrap();
        assert_eq!(cop_number(&k4, GameMode::Free, &o).unwrap(), 4);
    }

    #[test]
    fn dags_need_one_cop() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let o = GameOptions::default();
        for _ in 0..30 {
            let n = rng.gen_range(1..=8);
            let mut e = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(0.4) {
                        e.push((u, v));
                    }
                }
            }
            let d = Digraph::from_indices(n, &e).unwrap();
            assert_eq!(cop_number(&d, GameMode::Free, &o).unwrap(), 1);
            assert_eq!(cop_number(&d, GameMode::RobberMonotone, &o).unwrap(), 1);
        }
    }

    #[test]
    fn strategies_validate_and_escapes_are_closed() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let o = GameOptions::default();
        for _ in 0..80 {
            let n = rng.gen_range(1..=6);
            let d = random(&mut rng, n, 0.45);
            for mode in [GameMode::Free, GameMode::RobberMonotone] {
                let cn = cop_number(&d, mode, &o).unwrap();
                let win = solve_game(&d, cn, mode, &o).unwrap();
                let ts = win.strategy.expect("cops win");
                let rep = validate_strategy_tree(&d, &ts);
                assert!(rep.valid, "{rep:?}");
                assert!(rep.width <= cn);
                if mode == GameMode::RobberMonotone {
                    assert!(rep.robber_monotone);
                }
                if cn > 0 {
                    let lose = solve_game(&d, cn - 1, mode, &o).unwrap();
                    assert_eq!(lose.winner, Winner::Robber);
                    audit_escape(&d, cn - 1, mode, &lose.escape).unwrap();
                }
            }
            let free = cop_number(&d, GameMode::Free, &o).unwrap();
            let mono = cop_number(&d, GameMode::RobberMonotone, &o).unwrap();
            assert!(free <= mono && mono <= 3 * free + 2);
        }
    }
}

//! Playing the game out round by round.

use super::{solve::Arena, Culprit, GameError, StrategyTree};
use crate::digraph::{Digraph, VertexSet};

pub trait CopStrategy {
    /// The next cop position from `(cops, robber)`; `None` if the strategy
    /// has no answer there.
    fn announce(&mut self, d: &Digraph, cops: VertexSet, robber: usize) -> Option<VertexSet>;
}

pub trait RobberStrategy {
    fn start(&mut self, d: &Digraph) -> usize;
    /// The robber's new vertex, chosen from `reachable` once the cops have
    /// announced `next`.
    fn reply(&mut self, d: &Digraph, cops: VertexSet, next: VertexSet, robber: usize, reachable: VertexSet) -> usize;
}

/// Walks down a strategy tree, following the edge whose robber space holds
/// the robber.
pub struct TreeCops<'a> {
    tree: &'a StrategyTree,
    kids: Vec<Vec<usize>>,
    at: Option<usize>,
}

impl<'a> TreeCops<'a> {
    pub fn new(tree: &'a StrategyTree) -> Self {
        TreeCops {
            tree,
            kids: tree.children(),
            at: None,
        }
    }
}

impl CopStrategy for TreeCops<'_> {
    fn announce(&mut self, _d: &Digraph, _cops: VertexSet, robber: usize) -> Option<VertexSet> {
        let next = match self.at {
            None => self.tree.root,
            Some(t) => *self.kids[t].iter().find(|&&u| self.tree.robber[u].contains(robber))?,
        };
        self.at = Some(next);
        Some(self.tree.cops[next])
    }
}

/// Plays the announcements computed by a solved arena.
pub struct ArenaCops<'a>(pub &'a Arena);

impl CopStrategy for ArenaCops<'_> {
    fn announce(&mut self, d: &Digraph, cops: VertexSet, robber: usize) -> Option<VertexSet> {
        let space = d.scc_of(robber, d.vertices() - cops);
        self.0.next_cops(cops, space)
    }
}

/// Runs to the largest strong component still available, lowest index on
/// ties.
pub struct GreedyRobber;

impl RobberStrategy for GreedyRobber {
    fn start(&mut self, d: &Digraph) -> usize {
        d.scc_sets(d.vertices())
            .into_iter()
            .max_by_key(|c| (c.len(), std::cmp::Reverse(c.first())))
            .and_then(|c| c.first())
            .unwrap_or(0)
    }

    fn reply(&mut self, d: &Digraph, _cops: VertexSet, next: VertexSet, robber: usize, reachable: VertexSet) -> usize {
        let free = d.vertices() - next;
        (reachable - next)
            .iter()
            .max_by_key(|&v| (d.scc_of(v, free).len(), std::cmp::Reverse(v)))
            .unwrap_or(robber)
    }
}

pub struct StationaryRobber(pub usize);

impl RobberStrategy for StationaryRobber {
    fn start(&mut self, _d: &Digraph) -> usize {
        self.0
    }

    fn reply(
        &mut self,
        _d: &Digraph,
        _cops: VertexSet,
        _next: VertexSet,
        robber: usize,
        _reachable: VertexSet,
    ) -> usize {
        robber
    }
}

/// A realised play. `positions[0]` is the start `(∅, v0)`; `spaces[i]` is
/// the robber space after round `i`, with `spaces[0]` the whole vertex set
/// and an empty space once the robber is caught.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Play {
    pub positions: Vec<(VertexSet, usize)>,
    pub spaces: Vec<VertexSet>,
    pub captured: bool,
    pub cop_monotone: bool,
    pub robber_monotone: bool,
}

impl Play {
    pub fn transcript(&self, d: &Digraph) -> String {
        let mut out = String::new();
        for (i, (c, v)) in self.positions.iter().enumerate() {
            out.push_str(&format!(
                "round {i}: cops {{{}}} robber {} space {}\n",
                d.set_names(*c).join(","),
                d.name(*v),
                self.spaces[i].len()
            ));
        }
        out.push_str(if self.captured {
            "captured\n"
        } else {
            "robber escaped\n"
        });
        out
    }
}

pub fn simulate_play(
    d: &Digraph,
    cops: &mut dyn CopStrategy,
    robber: &mut dyn RobberStrategy,
    max_rounds: usize,
) -> Result<Play, GameError> {
    let v0 = robber.start(d);
    if v0 >= d.n() {
        return Err(GameError::IllegalMove {
            culprit: Culprit::Robber,
            round: 0,
            detail: format!("start vertex {v0} out of range"),
        });
    }
    let mut play = Play {
        positions: vec![(VertexSet::EMPTY, v0)],
        spaces: vec![d.vertices()],
        captured: false,
        cop_monotone: true,
        robber_monotone: true,
    };
    let (mut c, mut v) = (VertexSet::EMPTY, v0);
    for round in 1..=max_rounds {
        let next = cops.announce(d, c, v).ok_or_else(|| GameError::IllegalMove {
            culprit: Culprit::Cops,
            round,
            detail: format!("no announcement with the robber on {}", d.name(v)),
        })?;
        let reachable = d.scc_of(v, d.vertices() - (c & next));
        let w = robber.reply(d, c, next, v, reachable);
        if !reachable.contains(w) {
            return Err(GameError::IllegalMove {
                culprit: Culprit::Robber,
                round,
                detail: format!("cannot run from {} to vertex {w}", d.name(v)),
            });
        }
        c = next;
        v = w;
        play.positions.push((c, v));
        if c.contains(v) {
            play.captured = true;
            play.spaces.push(VertexSet::EMPTY);
            break;
        }
        play.spaces.push(d.scc_of(v, d.vertices() - c));
    }
    play.robber_monotone = play.spaces.windows(2).all(|w| w[1].is_subset(w[0]));
    play.cop_monotone = (0..d.n()).all(|x| {
        let times: Vec<usize> = (0..play.positions.len())
            .filter(|&i| play.positions[i].0.contains(x))
            .collect();
        times.windows(2).all(|w| w[1] == w[0] + 1)
    });
    Ok(play)
}

/// Plays the tree against every robber, one representative vertex per
/// reachable strong component, and returns the longest play length.
pub fn audit_tree_against_all_robbers(d: &Digraph, tree: &StrategyTree, max_rounds: usize) -> Result<usize, GameError> {
    let kids = tree.children();
    let mut longest = 0;
    // (tree node the cops are on, previous cop set, robber vertex, round)
    let mut stack: Vec<(Option<usize>, VertexSet, usize, usize)> = d
        .scc_sets(d.vertices())
        .into_iter()
        .map(|c| (None, VertexSet::EMPTY, c.first().expect("nonempty"), 0))
        .collect();
    while let Some((at, c, v, round)) = stack.pop() {
        if round >= max_rounds {
            return Err(GameError::IllegalMove {
                culprit: Culprit::Cops,
                round,
                detail: "no capture within the round limit".into(),
            });
        }
        let next_node = match at {
            None => tree.root,
            Some(t) => {
                *kids[t]
                    .iter()
                    .find(|&&u| tree.robber[u].contains(v))
                    .ok_or_else(|| GameError::IllegalMove {
                        culprit: Culprit::Cops,
                        round: round + 1,
                        detail: format!("no announcement with the robber on {}", d.name(v)),
                    })?
            }
        };
        let next = tree.cops[next_node];
        let reachable = d.scc_of(v, d.vertices() - (c & next));
        let escapes = d.scc_sets(reachable - next);
        if escapes.is_empty() {
            longest = longest.max(round + 1);
        }
        for e in escapes {
            stack.push((Some(next_node), next, e.first().expect("nonempty"), round + 1));
        }
    }
    Ok(longest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{solve_game, GameMode, GameOptions};

    #[test]
    fn no_cops_never_capture() {
        let d = Digraph::from_indices(2, &[(0, 1), (1, 0)]).unwrap();
        struct Idle;
        impl CopStrategy for Idle {
            fn announce(&mut self, _: &Digraph, _: VertexSet, _: usize) -> Option<VertexSet> {
                Some(VertexSet::EMPTY)
            }
        }
        let p = simulate_play(&d, &mut Idle, &mut StationaryRobber(1), 20).unwrap();
        assert!(!p.captured);
        assert_eq!(p.positions.len(), 21);
    }

    #[test]
    fn solver_strategy_captures_greedy_robber() {
        let d = Digraph::from_indices(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (2, 0)]).unwrap();
        let o = GameOptions::default();
        let arena = Arena::build(&d, 2, GameMode::Free, &o).unwrap();
        assert!(arena.cops_win());
        let p = simulate_play(&d, &mut ArenaCops(&arena), &mut GreedyRobber, 50).unwrap();
        assert!(p.captured);
        let ts = solve_game(&d, 2, GameMode::Free, &o).unwrap().strategy.unwrap();
        let p = simulate_play(&d, &mut TreeCops::new(&ts), &mut GreedyRobber, 50).unwrap();
        assert!(p.captured);
        assert!(audit_tree_against_all_robbers(&d, &ts, 50).unwrap() <= ts.len());
    }

    #[test]
    fn robber_cannot_jump() {
        let d = Digraph::from_indices(2, &[(0, 1)]).unwrap();
        struct Jump;
        impl RobberStrategy for Jump {
            fn start(&mut self, _: &Digraph) -> usize {
                0
            }
            fn reply(&mut self, _: &Digraph, _: VertexSet, _: VertexSet, _: usize, _: VertexSet) -> usize {
                1
            }
        }
        struct One;
        impl CopStrategy for One {
            fn announce(&mut self, _: &Digraph, _: VertexSet, _: usize) -> Option<VertexSet> {
                Some(VertexSet::singleton(0))
            }
        }
        let e = simulate_play(&d, &mut One, &mut Jump, 5).unwrap_err();
        assert!(matches!(
            e,
            GameError::IllegalMove {
                culprit: Culprit::Robber,
                ..
            }
        ));
    }
}

//! End-to-end scenarios reproducing the facts about the example graphs and
//! the random sweeps behind them. Each scenario is one acceptance criterion.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::decomp::{
    self, deletable_nodes, exact_width, minorize, remove_deletable_empty_bags, reroot_ncwe, restrict_to_subgraph,
    sc_width_at_most, split_bag, usc_to_scv, Decomposition, Flavor, ScSearchOptions,
};
use crate::digraph::{Digraph, VertexSet};
use crate::fixtures::{FixtureError, FixtureStore};
use crate::game::{
    audit_escape, audit_tree_against_all_robbers, cop_number, dtd_to_strategy_tree, min_monotone_tree,
    reroot_strategy_tree, simulate_play, solve_game, validate_strategy_tree, GameError, GameMode, GameOptions,
    GreedyRobber, StrategyTree, TreeCops, Winner,
};
use crate::iso::all_digraphs_up_to_iso;
use crate::minors::{find_butterfly_minor, model_from_witness, verify_model, ContractionScript, MinorWitness, Step};
use crate::obstructions::{
    bramble_number, bramble_order, is_k_linked, klinked_to_bramble, lift_bramble, validate_bramble, BrambleKind,
};

#[derive(Debug, Error)]
pub enum ReproError {
    #[error(transparent)]
    Fixture(#[from] FixtureError),
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error("{0}")]
    Failed(String),
}

impl From<GameError> for ReproError {
    fn from(e: GameError) -> Self {
        match e {
            GameError::Budget(_) => ReproError::Budget(e.to_string()),
            e => ReproError::Failed(e.to_string()),
        }
    }
}

fn fail(e: impl std::fmt::Display) -> ReproError {
    let s = e.to_string();
    if s.contains("budget") {
        ReproError::Budget(s)
    } else {
        ReproError::Failed(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Criterion {
    pub id: u8,
    pub slug: &'static str,
    pub title: &'static str,
    /// Wall-clock limit; exceeding it fails the criterion.
    pub limit: Duration,
}

pub const CRITERIA: [Criterion; 8] = [
    Criterion {
        id: 1,
        slug: "fixture-certificates",
        title: "stored decompositions validate with width 3",
        limit: Duration::from_secs(1),
    },
    Criterion {
        id: 2,
        slug: "game-facts",
        title: "cop numbers of D1, D2 and D2'",
        limit: Duration::from_secs(300),
    },
    Criterion {
        id: 3,
        slug: "minor-witnesses",
        title: "D1, D2 and bramble_D are butterfly minors of their primed versions",
        limit: Duration::from_secs(90),
    },
    Criterion {
        id: 4,
        slug: "non-closure",
        title: "NCW, SC0 and SCd width grow when passing to a butterfly minor",
        limit: Duration::from_secs(300),
    },
    Criterion {
        id: 5,
        slug: "ncwe-closure",
        title: "NCWE decompositions survive butterfly minors",
        limit: Duration::from_secs(120),
    },
    Criterion {
        id: 6,
        slug: "brambles",
        title: "bramble number under minors, weak-bramble asymmetry, k-linked sets",
        limit: Duration::from_secs(300),
    },
    Criterion {
        id: 7,
        slug: "width-lattice",
        title: "width comparisons, cop numbers and brambles on all small digraphs",
        limit: Duration::from_secs(900),
    },
    Criterion {
        id: 8,
        slug: "transformations",
        title: "rerooting, bag splitting and restriction keep validity and width",
        limit: Duration::from_secs(120),
    },
];

/// Finds a criterion by number or slug.
pub fn lookup(key: &str) -> Option<Criterion> {
    CRITERIA
        .iter()
        .copied()
        .find(|c| c.slug == key || c.id.to_string() == key)
}

#[derive(Debug, Clone, Default)]
pub struct ReproOptions {
    /// Overrides the search budgets of the minor and game searches.
    pub budget: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub criterion: Criterion,
    pub passed: bool,
    pub summary: String,
    /// Every individual check, in order.
    pub log: Vec<String>,
    pub elapsed: Duration,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] {} {}: {} ({:.2}s, limit {}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.criterion.id,
            self.criterion.slug,
            self.summary,
            self.elapsed.as_secs_f64(),
            self.criterion.limit.as_secs()
        )
    }
}

/// Collects checks; the first failure is kept for the summary.
struct Checks {
    log: Vec<String>,
    failure: Option<String>,
}

impl Checks {
    fn new() -> Self {
        Checks {
            log: Vec::new(),
            failure: None,
        }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) -> bool {
        let what = what.into();
        self.log.push(format!("{} {what}", if ok { "ok  " } else { "FAIL" }));
        if !ok && self.failure.is_none() {
            self.failure = Some(what);
        }
        ok
    }

    fn note(&mut self, what: impl Into<String>) {
        self.log.push(format!("     {}", what.into()));
    }
}

pub fn run(c: Criterion, store: &FixtureStore, opts: &ReproOptions) -> Result<Outcome, ReproError> {
    let start = Instant::now();
    let mut ck = Checks::new();
    let summary = match c.id {
        1 => fixture_certificates(store, &mut ck)?,
        2 => game_facts(store, opts, &mut ck)?,
        3 => minor_witnesses(store, opts, &mut ck)?,
        4 => non_closure(store, opts, &mut ck)?,
        5 => ncwe_closure(store, &mut ck)?,
        6 => brambles(store, opts, &mut ck)?,
        7 => width_lattice(&mut ck)?,
        8 => transformations(store, &mut ck)?,
        _ => unreachable!("criteria are numbered 1 to 8"),
    };
    let elapsed = start.elapsed();
    let in_time = elapsed <= c.limit;
    if !in_time {
        ck.check(
            false,
            format!("runtime {:.1}s within {}s", elapsed.as_secs_f64(), c.limit.as_secs()),
        );
    }
    Ok(Outcome {
        criterion: c,
        passed: ck.failure.is_none(),
        summary: match &ck.failure {
            None => summary,
            Some(f) => format!("failed: {f}"),
        },
        log: ck.log,
        elapsed,
    })
}

pub fn random_digraph(rng: &mut impl Rng, n: usize, p: f64) -> Digraph {
    let mut e = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(p) {
                e.push((u, v));
            }
        }
    }
    Digraph::from_indices(n, &e).expect("valid edges")
}

/// A random butterfly minor: delete up to two vertices and a few edges, then
/// contract up to `contractions` butterfly-contractible edges.
pub fn random_minor(rng: &mut impl Rng, host: &Digraph, contractions: usize) -> (Digraph, MinorWitness) {
    let mut keep = host.vertices();
    for _ in 0..rng.gen_range(0..=2.min(host.n() - 1)) {
        let vs = keep.to_vec();
        keep.remove(vs[rng.gen_range(0..vs.len())]);
    }
    let drop_edges: Vec<(usize, usize)> = host
        .edges()
        .filter(|&(u, v)| keep.contains(u) && keep.contains(v) && rng.gen_bool(0.15))
        .collect();
    let mut script = ContractionScript {
        keep,
        drop_edges,
        steps: Vec::new(),
    };
    let mut g = script.subgraph(host).expect("edges from the host");
    for _ in 0..rng.gen_range(0..=contractions) {
        let cands: Vec<(usize, usize)> = g
            .edges()
            .filter(|&(u, v)| g.butterfly_contractible(u, v).unwrap_or(false))
            .collect();
        if cands.is_empty() {
            break;
        }
        let (u, v) = cands[rng.gen_range(0..cands.len())];
        let step = Step {
            tail: g.name(u).to_string(),
            head: g.name(v).to_string(),
            name: g.name(u).to_string(),
        };
        g = g.contract_edge(u, v, &step.name).expect("contractible");
        script.steps.push(step);
    }
    (
        g,
        MinorWitness {
            script,
            correspondence: None,
        },
    )
}

fn fixture_certificates(store: &FixtureStore, ck: &mut Checks) -> Result<String, ReproError> {
    let cases: [(&str, &[Flavor]); 4] = [
        ("dtd_SC0_D1", &[Flavor::Sc0]),
        ("dtd2_D1p", &[Flavor::Ncw]),
        ("dtdNCW_D2", &[Flavor::Ncw]),
        ("dtd3_D2p", &[Flavor::Sc0, Flavor::Scd]),
    ];
    for (name, flavors) in cases {
        let (d, t) = store.decomposition(name)?;
        for &f in flavors {
            let r = decomp::validate(&d, &t.with_flavor(f));
            ck.check(
                r.valid && r.width == 3,
                format!("{name} is a valid {f} decomposition of width {}", r.width),
            );
        }
    }
    Ok("4 certificates, 5 flavor checks, all width 3".into())
}

fn game_opts(opts: &ReproOptions) -> GameOptions {
    let mut o = GameOptions::default();
    if let Some(b) = opts.budget {
        o.budget = b;
    }
    o
}

fn game_facts(store: &FixtureStore, opts: &ReproOptions, ck: &mut Checks) -> Result<String, ReproError> {
    let o = game_opts(opts);
    let d1 = store.graph("D1")?;
    let d2 = store.graph("D2")?;
    let d2p = store.graph("D2p")?;
    let mut nums = Vec::new();
    for (name, d, mode) in [
        ("D1", &d1, GameMode::Free),
        ("D1", &d1, GameMode::RobberMonotone),
        ("D2", &d2, GameMode::Free),
        ("D2", &d2, GameMode::RobberMonotone),
        ("D2p", &d2p, GameMode::RobberMonotone),
    ] {
        let t = Instant::now();
        let k = cop_number(d, mode, &o)?;
        ck.note(format!(
            "cop number of {name} ({mode}) = {k} in {:.2}s",
            t.elapsed().as_secs_f64()
        ));
        nums.push(k);
    }
    ck.check(nums[0] == 4, format!("cop number of D1 (free) is 4, got {}", nums[0]));
    ck.check(
        nums[1] == 4,
        format!("cop number of D1 (robber-monotone) is 4, got {}", nums[1]),
    );
    ck.check(nums[2] == 4, format!("cop number of D2 (free) is 4, got {}", nums[2]));
    ck.check(
        nums[3] >= 5,
        format!("cop number of D2 (robber-monotone) is at least 5, got {}", nums[3]),
    );
    ck.check(
        nums[4] <= 4,
        format!("cop number of D2' (robber-monotone) is at most 4, got {}", nums[4]),
    );

    // Losing sides come with a closed set of robber escapes.
    for (name, d, k, mode) in [("D1", &d1, 3, GameMode::Free), ("D2", &d2, 4, GameMode::RobberMonotone)] {
        let r = solve_game(d, k, mode, &o)?;
        let audit = audit_escape(d, k, mode, &r.escape);
        ck.check(
            r.winner == Winner::Robber && audit.is_ok(),
            format!(
                "{name} with {k} cops ({mode}): robber escape set of {} positions audited",
                r.escape.len()
            ),
        );
    }

    let (host, tree) = store.strategy("strategy_D2p_monotone")?;
    let rep = validate_strategy_tree(&host, &tree);
    ck.check(
        rep.valid && rep.robber_monotone && rep.width == 4,
        format!(
            "stored D2' strategy: valid {}, robber-monotone {}, width {}",
            rep.valid, rep.robber_monotone, rep.width
        ),
    );
    let play = simulate_play(&host, &mut TreeCops::new(&tree), &mut GreedyRobber, 100)?;
    ck.check(
        play.captured && play.robber_monotone,
        format!(
            "stored D2' strategy captures the greedy robber in {} rounds",
            play.positions.len() - 1
        ),
    );
    let longest = audit_tree_against_all_robbers(&host, &tree, 100)?;
    ck.check(
        true,
        format!("stored D2' strategy captures every robber within {longest} rounds"),
    );
    Ok(format!(
        "cn(D1)=4 free and monotone, cn(D2)=4 free, monotone cn(D2)={}, monotone cn(D2')={}",
        nums[3], nums[4]
    ))
}

fn minor_witnesses(store: &FixtureStore, opts: &ReproOptions, ck: &mut Checks) -> Result<String, ReproError> {
    let budget = opts.budget.or(Some(50_000_000));
    for (minor, host, stored) in [
        ("D1", "D1p", "minor_D1_in_D1p"),
        ("D2", "D2p", "minor_D2_in_D2p"),
        ("bramble_D", "bramble_Dp", "minor_bramble_D_in_Dp"),
    ] {
        let m = store.graph(minor)?;
        let h = store.graph(host)?;
        let t = Instant::now();
        let found = find_butterfly_minor(&m, &h, budget).map_err(fail)?;
        let secs = t.elapsed().as_secs_f64();
        let Some(w) = found.witness else {
            ck.check(false, format!("{minor} is a butterfly minor of {host}"));
            continue;
        };
        let replay = w.verify(&m, &h).is_ok();
        let model = model_from_witness(&m, &h, &w).map_err(fail)?;
        let model_ok = verify_model(&m, &h, &model).valid;
        ck.check(
            replay && model_ok && secs < 30.0,
            format!(
                "{minor} in {host}: witness of {} contractions replays, model valid ({} nodes, {secs:.2}s)",
                w.script.steps.len(),
                found.nodes
            ),
        );
        let (sm, sh, sw) = store.witness(stored)?;
        ck.check(sw.verify(&sm, &sh).is_ok(), format!("stored witness {stored} replays"));
    }
    Ok("3 searches found witnesses, each replayed and turned into a valid model".into())
}

fn non_closure(store: &FixtureStore, opts: &ReproOptions, ck: &mut Checks) -> Result<String, ReproError> {
    let o = game_opts(opts);
    // NCW: D1 is a minor of D1', which has an NCW decomposition of width 3.
    let (d1p, t1p) = store.decomposition("dtd2_D1p")?;
    let r = decomp::validate(&d1p, &t1p.with_flavor(Flavor::Ncw));
    ck.check(r.valid && r.width == 3, "D1' has a valid NCW decomposition of width 3");
    let (m, h, w) = store.witness("minor_D1_in_D1p")?;
    ck.check(w.verify(&m, &h).is_ok(), "D1 is a butterfly minor of D1'");
    let d1 = store.graph("D1")?;
    let free3 = solve_game(&d1, 3, GameMode::Free, &o)?;
    let free4 = solve_game(&d1, 4, GameMode::Free, &o)?;
    ck.check(
        free3.winner == Winner::Robber && free4.winner == Winner::Cops,
        "(i) the cop number of D1 is 4",
    );
    let root = d1.set_of(&["0", "0p", "a", "ap"]).map_err(fail)?;
    let budget = opts.budget.unwrap_or(100_000_000);
    let t = Instant::now();
    let mt = min_monotone_tree(&d1, 4, root, budget)?;
    let nodes = mt.nodes.unwrap_or(0);
    let tree_ok = mt.tree.as_ref().map_or(false, |ts| {
        let rep = validate_strategy_tree(&d1, ts);
        rep.valid && rep.robber_monotone && rep.width <= 4
    });
    ck.check(
        nodes >= 36 && nodes > d1.n() && tree_ok,
        format!(
            "(ii) smallest robber-monotone 4-cop strategy tree rooted at {{0,0',a,a'}} has {nodes} nodes > {} ({} subproblems, {:.2}s)",
            d1.n(),
            mt.subproblems,
            t.elapsed().as_secs_f64()
        ),
    );

    // SC0 and SCd: D2 is a minor of D2', which has width-3 certificates.
    let (d2p, t2p) = store.decomposition("dtd3_D2p")?;
    for f in [Flavor::Sc0, Flavor::Scd] {
        let r = decomp::validate(&d2p, &t2p.with_flavor(f));
        ck.check(
            r.valid && r.width == 3,
            format!("D2' has a valid {f} decomposition of width 3"),
        );
    }
    let (m, h, w) = store.witness("minor_D2_in_D2p")?;
    ck.check(w.verify(&m, &h).is_ok(), "D2 is a butterfly minor of D2'");
    let d2 = store.graph("D2")?;
    let single = sc_width_at_most(
        &d2,
        3,
        ScSearchOptions {
            max_bag: Some(1),
            budget: opts.budget,
        },
    )
    .map_err(fail)?;
    ck.check(
        !single.feasible,
        format!(
            "no width-3 SC0v decomposition of D2 with singleton or empty bags ({} states)",
            single.states
        ),
    );
    let any = sc_width_at_most(
        &d2,
        3,
        ScSearchOptions {
            max_bag: None,
            budget: opts.budget,
        },
    )
    .map_err(fail)?;
    ck.check(
        !any.feasible,
        format!("no width-3 SC0v decomposition of D2 at all ({} states)", any.states),
    );
    // SC0 and SCd decompositions are SC0v decompositions, so both bounds follow.
    ck.check(
        decomp::validate(&d2p, &t2p.with_flavor(Flavor::Sc0v)).valid,
        "the SC0/SCd certificate of D2' is also SC0v",
    );
    Ok(format!(
        "NCW: D1' <= 3 < 4 <= D1 ({nodes}-node tree > 34 nodes); SC0/SCd: D2' <= 3 < 4 <= D2"
    ))
}

fn ncwe_closure(store: &FixtureStore, ck: &mut Checks) -> Result<String, ReproError> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let mut worst = 0i64;
    let mut bad = 0;
    for i in 0..200 {
        let n = rng.gen_range(2..=6);
        let p = rng.gen_range(0.25..0.55);
        let d = random_digraph(&mut rng, n, p);
        let cert = exact_width(&d, Flavor::NcwE, None).map_err(fail)?.certificate;
        let roots: Vec<usize> = (0..cert.len()).filter(|&t| !cert.bags[t].is_empty()).collect();
        let t = reroot_ncwe(&cert, roots[rng.gen_range(0..roots.len())]).map_err(fail)?;
        let (minor, w) = random_minor(&mut rng, &d, 3);
        let (g, t2) = minorize(&d, &t, &w.script).map_err(fail)?;
        let r = decomp::validate(&g, &t2.with_flavor(Flavor::NcwE));
        let same =
            g.n() == minor.n() && minor.edges().all(|(u, v)| g.has_edge(u, v)) && g.edge_count() == minor.edge_count();
        let ok = r.valid && r.width <= t.width() && same;
        if !ok {
            bad += 1;
            ck.check(
                false,
                format!(
                    "case {i}: minorized decomposition valid {} width {} <= {}",
                    r.valid,
                    r.width,
                    t.width()
                ),
            );
        }
        worst = worst.max(t.width() - r.width);
    }
    ck.check(
        bad == 0,
        "200 random minorized NCWE decompositions validate without width increase",
    );
    ck.note(format!("largest width drop {worst}"));
    for (dtd, wit, target) in [
        ("dtd2_D1p", "minor_D1_in_D1p", "D1"),
        ("dtd3_D2p", "minor_D2_in_D2p", "D2"),
    ] {
        let (host, t) = store.decomposition(dtd)?;
        let (minor, _, w) = store.witness(wit)?;
        let t = t.with_flavor(Flavor::NcwE);
        ck.check(
            decomp::validate(&host, &t).valid,
            format!("{dtd} is also an NCWE decomposition"),
        );
        let (g, t2) = minorize(&host, &t, &w.script).map_err(fail)?;
        let r = decomp::validate(&g, &t2);
        let same = g.n() == minor.n() && g.edge_count() == minor.edge_count();
        ck.check(
            r.valid && r.width <= 3 && same,
            format!("NCWE width of {target} is at most {} via {dtd}", r.width),
        );
    }
    Ok("200 random lifts valid, NCWE width of D1 and D2 at most 3".into())
}

fn brambles(store: &FixtureStore, opts: &ReproOptions, ck: &mut Checks) -> Result<String, ReproError> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let mut bad = 0;
    let mut seen = std::collections::BTreeMap::new();
    for i in 0..200 {
        let n = rng.gen_range(2..=6);
        let p = rng.gen_range(0.3..0.7);
        let d = random_digraph(&mut rng, n, p);
        let (minor, w) = random_minor(&mut rng, &d, 3);
        let (bm, wit) = bramble_number(&minor, BrambleKind::Strong, 8).map_err(fail)?;
        let (bd, _) = bramble_number(&d, BrambleKind::Strong, 8).map_err(fail)?;
        let lifted = lift_bramble(&minor, &d, &w, &wit).map_err(fail)?;
        let lifted_ok = validate_bramble(&d, &lifted).valid
            && bramble_order(&d, &lifted).map_err(fail)?.order() >= bramble_order(&minor, &wit).map_err(fail)?.order();
        *seen.entry((bm, bd)).or_insert(0) += 1;
        if bm > bd || !lifted_ok {
            bad += 1;
            ck.check(
                false,
                format!("pair {i}: bn(minor) = {bm} <= bn(host) = {bd}, lifted bramble ok {lifted_ok}"),
            );
        }
    }
    ck.check(
        bad == 0,
        "200 random minor pairs: strong bramble number never grows, lifted brambles keep their order",
    );
    ck.note(format!("(minor, host) bramble numbers seen: {seen:?}"));

    let d = store.graph("bramble_D")?;
    let dp = store.graph("bramble_Dp")?;
    let (_, _, w) = store.witness("minor_bramble_D_in_Dp")?;
    ck.check(
        w.verify(&d, &dp).is_ok(),
        "bramble_D is a butterfly minor of bramble_Dp",
    );
    let (h, weak) = store.bramble("weak_bramble_D")?;
    let order = bramble_order(&h, &weak).map_err(fail)?.order();
    ck.check(
        validate_bramble(&h, &weak).valid && order == 2,
        format!("stored weak bramble of bramble_D has order {order}"),
    );
    let strong_view = crate::obstructions::Bramble {
        kind: BrambleKind::Strong,
        elements: weak.elements.clone(),
    };
    ck.check(
        !validate_bramble(&h, &strong_view).valid,
        "the same family is not a strong bramble",
    );
    let (wd, _) = bramble_number(&d, BrambleKind::Weak, 12).map_err(fail)?;
    let (wdp, _) = bramble_number(&dp, BrambleKind::Weak, 12).map_err(fail)?;
    ck.check(
        wd == 2 && wdp == 1,
        format!("weak bramble numbers: {wd} in the minor, {wdp} in the host"),
    );

    let budget = opts.budget.unwrap_or(10_000_000);
    let mut found = 0;
    let mut bad = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0106);
    for _ in 0..300 {
        let n = rng.gen_range(2..=7);
        let p = rng.gen_range(0.4..0.9);
        let d = random_digraph(&mut rng, n, p);
        let w: VertexSet = (0..n).filter(|_| rng.gen_bool(0.7)).collect();
        if w.len() < 2 {
            continue;
        }
        for k in 1..=w.len() {
            if !is_k_linked(&d, w, k, budget).map_err(fail)?.linked() {
                break;
            }
            found += 1;
            let b = klinked_to_bramble(&d, w, k, budget).map_err(fail)?;
            let ord = bramble_order(&d, &b).map_err(fail)?.order();
            if ord < k + 1 {
                bad += 1;
                ck.check(
                    false,
                    format!("{k}-linked set of size {} gave a bramble of order {ord}", w.len()),
                );
            }
        }
    }
    ck.check(
        found > 0 && bad == 0,
        format!("{found} k-linked instances, each giving a bramble of order at least k+1"),
    );
    Ok(format!(
        "monotone on 200 pairs, weak orders 2 vs 1, {found} k-linked instances"
    ))
}

/// Digraphs of the sweeps: every class up to four vertices, then a fixed
/// sample of random five-vertex digraphs.
pub fn sweep_graphs(samples_n5: usize) -> Vec<Digraph> {
    let mut out = Vec::new();
    for n in 1..=4 {
        out.extend(all_digraphs_up_to_iso(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    for _ in 0..samples_n5 {
        let p = rng.gen_range(0.2..0.8);
        out.push(random_digraph(&mut rng, 5, p));
    }
    out
}

fn width_lattice(ck: &mut Checks) -> Result<String, ReproError> {
    let graphs = sweep_graphs(500);
    let small = graphs.iter().filter(|d| d.n() <= 4).count();
    let mut bad = 0;
    let o = GameOptions::default();
    let mut report = |ok: bool, d: &Digraph, what: String, ck: &mut Checks| {
        if !ok {
            bad += 1;
            if bad <= 5 {
                ck.check(false, format!("{what} on {:?}", d.edges().collect::<Vec<_>>()));
            }
        }
    };
    for d in &graphs {
        let mut w = [0i64; 5];
        for (i, f) in Flavor::MAIN.iter().enumerate() {
            w[i] = exact_width(d, *f, None).map_err(fail)?.width as i64;
        }
        let [nw, ncw, ncwe, sc0, scd] = w;
        let arrows = [
            ("NCWE <= NCW", ncwe <= ncw),
            ("NCWE <= SC0", ncwe <= sc0),
            ("NCW <= NW", ncw <= nw),
            ("SC0 <= NW", sc0 <= nw),
            ("NW <= SCd", nw <= scd),
            ("SCd <= 3 NW + 2", scd <= 3 * nw + 2),
            ("SCd <= 3 NCW + 2", scd <= 3 * ncw + 2),
            ("SCd <= 3 NCWE + 2", scd <= 3 * ncwe + 2),
            ("SCd <= 3 SC0 + 2", scd <= 3 * sc0 + 2),
        ];
        for (name, ok) in arrows {
            report(ok, d, name.to_string(), ck);
        }
        let cn = cop_number(d, GameMode::Free, &o)? as i64;
        report(
            w.iter().all(|&x| cn <= x + 1),
            d,
            format!("cop number {cn} <= width + 1 for {w:?}"),
            ck,
        );
        let (bn, _) = bramble_number(d, BrambleKind::Strong, 8).map_err(fail)?;
        let bn = bn as i64;
        report(
            w.iter().all(|&x| x >= bn - 1),
            d,
            format!("widths {w:?} >= bramble number {bn} - 1"),
            ck,
        );
        // Width above 3k + 1 forces a bramble of order k + 1.
        for &x in &w {
            if x >= 2 {
                let k = (x - 2) / 3;
                report(
                    bn >= k + 1,
                    d,
                    format!("width {x} forces bramble number >= {}", k + 1),
                    ck,
                );
            }
        }
    }
    ck.check(
        bad == 0,
        format!(
            "{} digraphs ({small} classes with n <= 4, {} samples with n = 5), {bad} violations",
            graphs.len(),
            graphs.len() - small
        ),
    );
    Ok(format!("{} digraphs, every arrow and bound holds", graphs.len()))
}

/// Counts checks and records failures under a label.
struct Tally<'a> {
    ck: &'a mut Checks,
    label: &'a str,
    count: usize,
}

impl Tally<'_> {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.count += 1;
        if !ok {
            let msg = format!("{}: {}", self.label, what());
            self.ck.check(false, msg);
        }
    }
}

fn ncw_checks(d: &Digraph, t: &Decomposition, tally: &mut Tally) -> Result<(), ReproError> {
    let w0 = t.width();
    for r in 0..t.len() {
        if t.bags[r].is_empty() {
            continue;
        }
        let re = reroot_ncwe(t, r).map_err(fail)?;
        let rep = decomp::validate(d, &re);
        tally.check(rep.valid && rep.width <= w0, || {
            format!("reroot at {} gives width {}", t.ids[r], rep.width)
        });
    }
    for v in 0..d.n() {
        let h = d.induced_subgraph(d.vertices().without(v));
        if h.n() == 0 {
            continue;
        }
        let re = restrict_to_subgraph(d, t, &h).map_err(fail)?;
        let rep = decomp::validate(&h, &re);
        tally.check(rep.valid && rep.width <= w0, || {
            format!("restriction to D - {} gives width {}", d.name(v), rep.width)
        });
    }
    Ok(())
}

fn sc0_checks(d: &Digraph, t: &Decomposition, tally: &mut Tally) -> Result<(), ReproError> {
    let w0 = t.width();
    for node in 0..t.len() {
        if t.bags[node].len() < 2 {
            continue;
        }
        for v in t.bags[node].iter() {
            let split = split_bag(d, t, node, v).map_err(fail)?;
            let r1 = decomp::validate(d, &split);
            let (scv, _) = usc_to_scv(d, &split).map_err(fail)?;
            let r2 = decomp::validate(d, &scv);
            let clean = remove_deletable_empty_bags(d, &scv).map_err(fail)?;
            let r3 = decomp::validate(d, &clean);
            let ok = [&r1, &r2, &r3].iter().all(|r| r.valid && r.width <= w0) && deletable_nodes(d, &clean).is_empty();
            tally.check(ok, || {
                format!(
                    "splitting {} at {} leaves valid {}/{}/{}",
                    t.ids[node],
                    d.name(v),
                    r1.valid,
                    r2.valid,
                    r3.valid
                )
            });
        }
    }
    Ok(())
}

fn strategy_checks(d: &Digraph, ts: &StrategyTree, tally: &mut Tally) -> Result<(), ReproError> {
    let w0 = ts.width();
    for r in 0..ts.len() {
        let re = reroot_strategy_tree(d, ts, r)?;
        let rep = validate_strategy_tree(d, &re);
        tally.check(rep.valid && rep.width <= w0, || {
            format!("strategy reroot at {} valid {}", ts.ids[r], rep.valid)
        });
    }
    Ok(())
}

fn transformations(store: &FixtureStore, ck: &mut Checks) -> Result<String, ReproError> {
    let mut count = 0;
    for name in ["dtd2_D1p", "dtdNCW_D2"] {
        let (d, t) = store.decomposition(name)?;
        let mut tally = Tally {
            ck,
            label: name,
            count: 0,
        };
        ncw_checks(&d, &t, &mut tally)?;
        strategy_checks(&d, &dtd_to_strategy_tree(&d, &t)?, &mut tally)?;
        count += tally.count;
    }
    for name in ["dtd_SC0_D1", "dtd3_D2p"] {
        let (d, t) = store.decomposition(name)?;
        let mut tally = Tally {
            ck,
            label: name,
            count: 0,
        };
        sc0_checks(&d, &t, &mut tally)?;
        strategy_checks(&d, &dtd_to_strategy_tree(&d, &t)?, &mut tally)?;
        count += tally.count;
    }
    for name in ["strategy_D1_sweep", "strategy_D2p_monotone", "strategy_D2_nonmonotone"] {
        let (d, ts) = store.strategy(name)?;
        let mut tally = Tally {
            ck,
            label: name,
            count: 0,
        };
        strategy_checks(&d, &ts, &mut tally)?;
        count += tally.count;
    }
    let graphs = sweep_graphs(200);
    for d in &graphs {
        let ncw = exact_width(d, Flavor::Ncw, None).map_err(fail)?.certificate;
        let sc0 = exact_width(d, Flavor::Sc0, None).map_err(fail)?.certificate;
        let mut tally = Tally {
            ck,
            label: "sweep",
            count: 0,
        };
        ncw_checks(d, &ncw, &mut tally)?;
        sc0_checks(d, &sc0, &mut tally)?;
        strategy_checks(d, &dtd_to_strategy_tree(d, &ncw)?, &mut tally)?;
        strategy_checks(d, &dtd_to_strategy_tree(d, &sc0)?, &mut tally)?;
        count += tally.count;
    }
    let ok = ck.failure.is_none();
    ck.check(
        ok,
        format!(
            "{count} transformation checks on the fixtures and {} sweep digraphs",
            graphs.len()
        ),
    );
    Ok(format!("{count} checks, validity kept and width never grows"))
}

/// Runs every criterion, returning the outcomes in order.
pub fn run_all(store: &FixtureStore, opts: &ReproOptions) -> Vec<Result<Outcome, ReproError>> {
    CRITERIA.iter().map(|&c| run(c, store, opts)).collect()
}

/// Multi-line report of an outcome.
pub fn report(o: &Outcome) -> String {
    let mut s = o.line();
    s.push('\n');
    for l in &o.log {
        let _ = writeln!(s, "    {l}");
    }
    s
}

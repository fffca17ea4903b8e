//! Game-side checks on the stored strategies and decompositions.

use dtwlab::decomp::validate;
use dtwlab::fixtures::FixtureStore;
use dtwlab::game::{
    dtd_to_strategy_tree, min_monotone_tree, reroot_strategy_tree, simulate_play, validate_strategy_tree, GreedyRobber,
    StationaryRobber, TreeCops,
};

fn store() -> FixtureStore {
    FixtureStore::open_default().unwrap()
}

#[test]
fn stored_strategies_validate() {
    let s = store();
    for (name, host, monotone) in [
        ("strategy_D1_sweep", "D1", true),
        ("strategy_D2p_monotone", "D2p", true),
        ("strategy_D2_nonmonotone", "D2", false),
    ] {
        let d = s.graph(host).unwrap();
        let (_, ts) = s.strategy(name).unwrap();
        let r = validate_strategy_tree(&d, &ts);
        assert!(r.valid, "{name}: {:?}", r.violations);
        assert_eq!(r.width, 4, "{name}");
        assert_eq!(r.robber_monotone, monotone, "{name}");
        assert_eq!(r.breaks.is_empty(), monotone, "{name}");
    }
}

#[test]
fn d1_sweep_rerooted_at_a_is_no_smaller_than_the_minimum() {
    let s = store();
    let d = s.graph("D1").unwrap();
    let (_, ts) = s.strategy("strategy_D1_sweep").unwrap();
    let root = d.set_of(&["0", "0p", "a", "ap"]).unwrap();
    let at = ts.node_with_cops(root).expect("sweep visits {0,0',a,a'}");
    let rerooted = reroot_strategy_tree(&d, &ts, at).unwrap();
    let r = validate_strategy_tree(&d, &rerooted);
    assert!(r.valid, "{:?}", r.violations);
    assert!(r.robber_monotone);
    assert_eq!(rerooted.cops[rerooted.root], root);

    let best = min_monotone_tree(&d, 4, root, 50_000_000).unwrap();
    let nodes = best.nodes.expect("4 cops win from {0,0',a,a'}");
    assert_eq!(nodes, 36);
    assert!(rerooted.len() >= nodes);
    let tree = best.tree.unwrap();
    assert_eq!(tree.len(), nodes);
    assert!(validate_strategy_tree(&d, &tree).robber_monotone);
}

#[test]
fn stored_strategies_capture_scripted_robbers() {
    let s = store();
    for (name, host) in [
        ("strategy_D1_sweep", "D1"),
        ("strategy_D2p_monotone", "D2p"),
        ("strategy_D2_nonmonotone", "D2"),
    ] {
        let d = s.graph(host).unwrap();
        let (_, ts) = s.strategy(name).unwrap();
        let play = simulate_play(&d, &mut TreeCops::new(&ts), &mut GreedyRobber, 4 * d.n()).unwrap();
        assert!(play.captured, "{name}: greedy robber escapes");
        for v in d.vertices().iter() {
            let play = simulate_play(&d, &mut TreeCops::new(&ts), &mut StationaryRobber(v), 4 * d.n()).unwrap();
            assert!(play.captured, "{name}: robber sitting on {} escapes", d.name(v));
        }
    }
}

#[test]
fn decompositions_give_strategies() {
    let s = store();
    for (name, host) in [
        ("dtd_SC0_D1", "D1"),
        ("dtd2_D1p", "D1p"),
        ("dtdNCW_D2", "D2"),
        ("dtd3_D2p", "D2p"),
    ] {
        let d = s.graph(host).unwrap();
        let (_, t) = s.decomposition(name).unwrap();
        let ts = dtd_to_strategy_tree(&d, &t).unwrap();
        let r = validate_strategy_tree(&d, &ts);
        assert!(r.valid, "{name}: {:?}", r.violations);
        assert!(
            r.width as i64 <= t.width() + 1,
            "{name}: {} cops from width {}",
            r.width,
            t.width()
        );
        assert!(validate(&d, &t).valid);
    }
}

//! Runs the `dtwlab` binary and checks output and exit codes.

use std::process::{Command, Output};

fn dtwlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dtwlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn validate_dtd_reports_flavor_and_width() {
    let o = dtwlab(&["validate-dtd", "D2p", "dtd3_D2p"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "valid SC0, width 3");

    let o = dtwlab(&["validate-dtd", "D2", "dtdNCW_D2", "--flavor", "SC0"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("invalid SC0, width 3"));
}

#[test]
fn width_commands() {
    let o = dtwlab(&["width", "bramble_D", "--flavor", "NW", "--exact"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "exact NW width 1");

    let o = dtwlab(&["width", "D2", "--flavor", "SC0v", "--at-most", "3", "--max-bag", "1"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("no SC0v decomposition of width at most 3"));

    let o = dtwlab(&["width", "D1", "--flavor", "SC0", "--certify", "dtd_SC0_D1"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("at most 3 (certified)"));
}

#[test]
fn game_and_cop_number() {
    let o = dtwlab(&["cop-number", "D2p", "--monotone"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "cop number (robber-monotone) = 4");

    let o = dtwlab(&["game", "D2", "-k", "4", "--monotone"]);
    assert_eq!(code(&o), 1);

    let o = dtwlab(&["game", "bramble_D", "-k", "2", "--trace"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("captured"));
}

#[test]
fn minor_writes_a_replayable_witness() {
    let dir = std::env::temp_dir().join(format!("dtwlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let w = dir.join("witness.json");
    let ws = w.to_str().unwrap();
    let o = dtwlab(&["minor", "bramble_D", "bramble_Dp", "--witness", ws]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(w.exists());

    let b = dir.join("strong.json");
    let bs = b.to_str().unwrap();
    assert_eq!(code(&dtwlab(&["bramble", "number", "bramble_D", "--out", bs])), 0);
    let o = dtwlab(&["bramble", "lift", "bramble_D", "bramble_Dp", ws, bs]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("valid true"));

    let o = dtwlab(&["minor", "D2p", "D2"]);
    assert_eq!(code(&o), 1);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn brambles_and_linked_sets() {
    let o = dtwlab(&["bramble", "order", "bramble_D", "weak_bramble_D"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("order 2"));

    let o = dtwlab(&["linked", "bramble_D", "-w", "1,2,4,5", "-k", "1"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("balanced separator"));
}

#[test]
fn fixtures_and_export() {
    let o = dtwlab(&["fixture", "list"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 17);

    let o = dtwlab(&["fixture", "audit", "strategy_D2_nonmonotone"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("robber-monotone: false"));

    let o = dtwlab(&["export-dot", "D2p", "--strategy", "strategy_D2p_monotone"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("digraph"));
}

#[test]
fn exit_codes_for_usage_and_budget() {
    assert_eq!(code(&dtwlab(&["width", "D2"])), 2);
    assert_eq!(code(&dtwlab(&["validate-dtd", "D2", "no_such_fixture"])), 2);
    assert_eq!(code(&dtwlab(&["repro", "nine"])), 2);
    assert_eq!(code(&dtwlab(&["game", "D1", "-k", "3", "--budget", "100"])), 3);
}

#[test]
fn repro_runs_a_scenario() {
    let o = dtwlab(&["repro", "minor-witnesses"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("[PASS] 3 minor-witnesses"));
}

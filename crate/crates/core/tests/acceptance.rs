//! One line per acceptance criterion. Tolerances are exact; runtime limits
//! are part of each criterion.

use std::process::ExitCode;

use dtwlab::fixtures::FixtureStore;
use dtwlab::repro::{run, ReproOptions, CRITERIA};

fn main() -> ExitCode {
    let verbose = std::env::args().any(|a| a == "--verbose" || a == "-v");
    let store = match FixtureStore::open_default() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("cannot open the fixture catalog: {e}");
            return ExitCode::FAILURE;
        }
    };
    let opts = ReproOptions::default();
    let mut failed = 0;
    for c in CRITERIA {
        match run(c, &store, &opts) {
            Ok(o) => {
                println!("{}", o.line());
                if verbose || !o.passed {
                    for l in &o.log {
                        println!("    {l}");
                    }
                }
                if !o.passed {
                    failed += 1;
                }
            }
            Err(e) => {
                println!("[FAIL] {} {}: {e}", c.id, c.slug);
                failed += 1;
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        CRITERIA.len() - failed,
        CRITERIA.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

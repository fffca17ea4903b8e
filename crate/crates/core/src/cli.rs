//! The `dtwlab` command line.
//!
//! Exit codes: 0 when the queried property holds, 1 when it fails, 2 for
//! usage and input errors, 3 when a search budget ran out first.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::decomp::{
    self, exact_width, minorize, sc_width_at_most, Decomposition, DecompositionJson, Flavor, ScSearchOptions,
};
use crate::digraph::{Digraph, GraphJson, VertexSet};
use crate::fixtures::{FixtureKind, FixtureStore};
use crate::game::{
    cop_number, simulate_play, solve_game, ArenaCops, GameMode, GameOptions, GreedyRobber, StrategyJson, StrategyTree,
    Winner,
};
use crate::minors::{find_butterfly_minor, MinorWitness, WitnessJson};
use crate::obstructions::{
    bramble_number, bramble_order, is_k_linked, lift_bramble, validate_bramble, Bramble, BrambleJson, BrambleKind,
};
use crate::repro::{self, ReproOptions, CRITERIA};

#[derive(Debug, Parser)]
#[command(
    name = "dtwlab",
    version,
    about = "Directed tree decompositions, butterfly minors, cops and robber, brambles"
)]
pub struct Cli {
    /// Node or position limit for long searches.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    /// Worker threads. Results do not depend on this value.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Write the command's JSON payload (certificate, witness, strategy,
    /// bramble) to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a decomposition against its flavor, or the given one.
    ValidateDtd {
        graph: String,
        dtd: String,
        #[arg(long)]
        flavor: Option<Flavor>,
    },
    /// Exact width, a certified upper bound, or an SC0v feasibility check.
    Width {
        graph: String,
        #[arg(long)]
        flavor: Flavor,
        #[arg(long, conflicts_with_all = ["certify", "at_most"])]
        exact: bool,
        /// Decomposition certifying an upper bound.
        #[arg(long, conflicts_with = "at_most")]
        certify: Option<String>,
        /// Decide whether an SC0v decomposition of width at most K exists.
        #[arg(long, value_name = "K")]
        at_most: Option<usize>,
        /// With --at-most, allow only bags of at most this size.
        #[arg(long, requires = "at_most")]
        max_bag: Option<usize>,
    },
    /// Solve the cops-and-robber game with k cops.
    Game {
        graph: String,
        #[arg(short)]
        k: usize,
        #[arg(long)]
        monotone: bool,
        /// Print a sample play.
        #[arg(long)]
        trace: bool,
    },
    /// Least number of cops with a winning strategy.
    CopNumber {
        graph: String,
        #[arg(long)]
        monotone: bool,
    },
    /// Search for a butterfly minor model of MINOR in HOST.
    Minor {
        minor: String,
        host: String,
        /// Where to write the witness.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Carry an NCW or NCWE decomposition of HOST to the minor given by a
    /// witness.
    Minorize { host: String, dtd: String, witness: String },
    #[command(subcommand)]
    Bramble(BrambleCommand),
    /// Search for a balanced W-separator of order at most k.
    Linked {
        graph: String,
        /// Vertex names, comma separated.
        #[arg(short = 'w', value_delimiter = ',', required = true)]
        w: Vec<String>,
        #[arg(short)]
        k: usize,
    },
    #[command(subcommand)]
    Fixture(FixtureCommand),
    /// Print a graph, or a decomposition or strategy on it, in DOT.
    ExportDot {
        graph: String,
        #[arg(long, conflicts_with = "strategy")]
        dtd: Option<String>,
        #[arg(long)]
        strategy: Option<String>,
    },
    /// Run an acceptance scenario by number or name, or `all`.
    Repro { id: String },
}

#[derive(Debug, Subcommand)]
pub enum BrambleCommand {
    /// Minimum cover of a bramble.
    Order { graph: String, bramble: String },
    /// Largest order of a bramble, with a witness.
    Number {
        graph: String,
        #[arg(long)]
        weak: bool,
        #[arg(long, default_value_t = crate::obstructions::BRAMBLE_NUMBER_CAP)]
        cap: usize,
    },
    /// Lift a strong bramble of MINOR into HOST along a witness.
    Lift {
        minor: String,
        host: String,
        witness: String,
        bramble: String,
    },
    /// Check the bramble conditions.
    Validate { graph: String, bramble: String },
}

#[derive(Debug, Subcommand)]
pub enum FixtureCommand {
    List,
    /// Print a fixture file.
    Dump {
        name: String,
    },
    /// Check fixtures against their catalog claims.
    Audit {
        name: Option<String>,
    },
}

/// Why a command stopped.
#[derive(Debug)]
pub enum Halt {
    /// The property does not hold; the report is already printed.
    Fails,
    Usage(String),
    Budget(String),
}

impl Halt {
    fn code(&self) -> u8 {
        match self {
            Halt::Fails => 1,
            Halt::Usage(_) => 2,
            Halt::Budget(_) => 3,
        }
    }
}

fn usage(e: impl Display) -> Halt {
    let s = e.to_string();
    // Budget exhaustion and size caps are both "ran out before deciding".
    if s.contains("budget") || s.contains("cap") {
        Halt::Budget(s)
    } else {
        Halt::Usage(s)
    }
}

type CmdResult = Result<(), Halt>;

fn holds(ok: bool) -> CmdResult {
    if ok {
        Ok(())
    } else {
        Err(Halt::Fails)
    }
}

struct Ctx {
    budget: Option<u64>,
    out: Option<PathBuf>,
    store: Option<FixtureStore>,
}

impl Ctx {
    fn store(&mut self) -> Result<&FixtureStore, Halt> {
        if self.store.is_none() {
            self.store = Some(FixtureStore::open_default().map_err(usage)?);
        }
        Ok(self.store.as_ref().expect("just opened"))
    }

    /// A file path, or else the name of a catalog fixture.
    fn resolve(&mut self, arg: &str) -> Result<PathBuf, Halt> {
        let p = Path::new(arg);
        if p.exists() {
            return Ok(p.to_owned());
        }
        self.store()?
            .path(arg)
            .map_err(|_| Halt::Usage(format!("`{arg}` is neither a file nor a fixture name")))
    }

    fn json<T: for<'de> serde::Deserialize<'de>>(&mut self, arg: &str) -> Result<T, Halt> {
        let path = self.resolve(arg)?;
        let text = fs::read_to_string(&path).map_err(|e| Halt::Usage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Halt::Usage(format!("{}: {e}", path.display())))
    }

    fn graph(&mut self, arg: &str) -> Result<Digraph, Halt> {
        let j: GraphJson = self.json(arg)?;
        Digraph::from_json(&j).map_err(usage)
    }

    fn dtd(&mut self, d: &Digraph, arg: &str) -> Result<Decomposition, Halt> {
        let j: DecompositionJson = self.json(arg)?;
        Decomposition::from_json(d, &j).map_err(usage)
    }

    fn strategy(&mut self, d: &Digraph, arg: &str) -> Result<StrategyTree, Halt> {
        let j: StrategyJson = self.json(arg)?;
        StrategyTree::from_json(d, &j).map_err(usage)
    }

    fn witness(&mut self, host: &Digraph, arg: &str) -> Result<MinorWitness, Halt> {
        let j: WitnessJson = self.json(arg)?;
        MinorWitness::from_json(host, &j).map_err(usage)
    }

    fn bramble(&mut self, d: &Digraph, arg: &str) -> Result<Bramble, Halt> {
        let j: BrambleJson = self.json(arg)?;
        Bramble::from_json(d, &j).map_err(usage)
    }

    fn game_opts(&self) -> GameOptions {
        let mut o = GameOptions::default();
        if let Some(b) = self.budget {
            o.budget = b;
            o.max_states = usize::try_from(b).unwrap_or(usize::MAX);
        }
        o
    }

    fn emit<T: Serialize>(&self, payload: &T) -> CmdResult {
        if let Some(path) = &self.out {
            write_json(path, payload)?;
            println!("wrote {}", path.display());
        }
        Ok(())
    }
}

fn write_json<T: Serialize>(path: &Path, payload: &T) -> CmdResult {
    let text = serde_json::to_string_pretty(payload).map_err(usage)?;
    fs::write(path, text + "\n").map_err(|e| Halt::Usage(format!("{}: {e}", path.display())))
}

fn set(d: &Digraph, s: VertexSet) -> String {
    format!("{{{}}}", d.set_names(s).join(","))
}

fn mode(monotone: bool) -> GameMode {
    if monotone {
        GameMode::RobberMonotone
    } else {
        GameMode::Free
    }
}

pub fn run(cli: Cli) -> CmdResult {
    let mut cx = Ctx {
        budget: cli.budget,
        out: cli.out,
        store: None,
    };
    match cli.command {
        Command::ValidateDtd { graph, dtd, flavor } => {
            let d = cx.graph(&graph)?;
            let mut t = cx.dtd(&d, &dtd)?;
            if let Some(f) = flavor {
                t = t.with_flavor(f);
            }
            let r = decomp::validate(&d, &t);
            if r.valid {
                println!("valid {}, width {}", r.flavor, r.width);
            } else {
                println!(
                    "invalid {}, width {}: {} violations",
                    r.flavor,
                    r.width,
                    r.violations.len()
                );
                for v in &r.violations {
                    println!("  {:?} at {:?}: {}", v.kind, v.location, v.detail);
                }
            }
            cx.emit(&r)?;
            holds(r.valid)
        }
        Command::Width {
            graph,
            flavor,
            exact,
            certify,
            at_most,
            max_bag,
        } => {
            let d = cx.graph(&graph)?;
            if exact {
                let r = exact_width(&d, flavor, None).map_err(usage)?;
                println!("exact {flavor} width {}", r.width);
                cx.emit(&r.certificate.to_json(&d))
            } else if let Some(c) = certify {
                let t = cx.dtd(&d, &c)?.with_flavor(flavor);
                let r = decomp::validate(&d, &t);
                if r.valid {
                    println!("{flavor} width at most {} (certified)", r.width);
                } else {
                    println!("certificate is not a valid {flavor} decomposition");
                }
                holds(r.valid)
            } else if let Some(k) = at_most {
                if flavor != Flavor::Sc0v {
                    return Err(Halt::Usage("--at-most decides SC0v width; pass --flavor SC0v".into()));
                }
                let r = sc_width_at_most(
                    &d,
                    k,
                    ScSearchOptions {
                        max_bag,
                        budget: cx.budget,
                    },
                )
                .map_err(usage)?;
                let bags = max_bag.map_or(String::new(), |b| format!(" with bags of size at most {b}"));
                if r.feasible {
                    println!("SC0v width at most {k}{bags} ({} states)", r.states);
                } else {
                    println!("no SC0v decomposition of width at most {k}{bags} ({} states)", r.states);
                }
                if let Some(t) = &r.certificate {
                    cx.emit(&t.to_json(&d))?;
                }
                holds(r.feasible)
            } else {
                Err(Halt::Usage("width needs one of --exact, --certify or --at-most".into()))
            }
        }
        Command::Game {
            graph,
            k,
            monotone,
            trace,
        } => {
            let d = cx.graph(&graph)?;
            let m = mode(monotone);
            let o = cx.game_opts();
            let r = solve_game(&d, k, m, &o).map_err(usage)?;
            match r.winner {
                Winner::Cops => println!("{k} cops win the {m} game ({} positions)", r.states),
                Winner::Robber => println!("the robber escapes {k} cops in the {m} game ({} positions)", r.states),
            }
            if trace {
                if r.winner == Winner::Cops {
                    let arena = crate::game::Arena::build(&d, k, m, &o).map_err(usage)?;
                    let play =
                        simulate_play(&d, &mut ArenaCops(&arena), &mut GreedyRobber, 4 * d.n() + 4).map_err(usage)?;
                    print!("{}", play.transcript(&d));
                } else {
                    for p in r.escape.iter().take(10) {
                        println!("  escape: cops {} robber space {}", set(&d, p.cops), set(&d, p.robber));
                    }
                    if r.escape.len() > 10 {
                        println!("  ... {} escape positions in total", r.escape.len());
                    }
                }
            }
            if let Some(ts) = &r.strategy {
                cx.emit(&ts.to_json(&d))?;
            }
            holds(r.winner == Winner::Cops)
        }
        Command::CopNumber { graph, monotone } => {
            let d = cx.graph(&graph)?;
            let m = mode(monotone);
            let k = cop_number(&d, m, &cx.game_opts()).map_err(usage)?;
            println!("cop number ({m}) = {k}");
            Ok(())
        }
        Command::Minor { minor, host, witness } => {
            let m = cx.graph(&minor)?;
            let h = cx.graph(&host)?;
            let r = find_butterfly_minor(&m, &h, cx.budget).map_err(usage)?;
            match r.witness {
                Some(w) => {
                    w.verify(&m, &h).map_err(usage)?;
                    println!(
                        "butterfly minor: {} contractions, replay verified ({} search nodes)",
                        w.script.steps.len(),
                        r.nodes
                    );
                    let j = w.to_json(&h);
                    if let Some(p) = witness {
                        write_json(&p, &j)?;
                        println!("wrote {}", p.display());
                    }
                    cx.emit(&j)
                }
                None => {
                    println!("not a butterfly minor ({} search nodes)", r.nodes);
                    Err(Halt::Fails)
                }
            }
        }
        Command::Minorize { host, dtd, witness } => {
            let h = cx.graph(&host)?;
            let t = cx.dtd(&h, &dtd)?;
            let t = if t.flavor == Flavor::Ncw {
                t
            } else {
                t.with_flavor(Flavor::NcwE)
            };
            let w = cx.witness(&h, &witness)?;
            let (g, t2) = minorize(&h, &t, &w.script).map_err(usage)?;
            let r = decomp::validate(&g, &t2);
            println!(
                "{} decomposition of the {}-vertex minor: valid {}, width {} (input width {})",
                r.flavor,
                g.n(),
                r.valid,
                r.width,
                t.width()
            );
            cx.emit(&t2.to_json(&g))?;
            holds(r.valid && r.width <= t.width())
        }
        Command::Bramble(b) => bramble_command(&mut cx, b),
        Command::Linked { graph, w, k } => {
            let d = cx.graph(&graph)?;
            let ws = d.set_of(&w).map_err(usage)?;
            let r = is_k_linked(&d, ws, k, cx.budget.unwrap_or(100_000_000)).map_err(usage)?;
            match r.balanced_separator {
                None => println!("{} is {k}-linked", set(&d, ws)),
                Some(s) => println!("not {k}-linked: balanced separator {}", set(&d, s)),
            }
            holds(r.linked())
        }
        Command::Fixture(f) => fixture_command(&mut cx, f),
        Command::ExportDot { graph, dtd, strategy } => {
            let d = cx.graph(&graph)?;
            if let Some(p) = dtd {
                print!("{}", cx.dtd(&d, &p)?.to_dot(&d));
            } else if let Some(p) = strategy {
                print!("{}", cx.strategy(&d, &p)?.to_dot(&d));
            } else {
                print!("{}", d.to_dot());
            }
            Ok(())
        }
        Command::Repro { id } => {
            let targets: Vec<_> = if id == "all" {
                CRITERIA.to_vec()
            } else {
                vec![repro::lookup(&id).ok_or_else(|| {
                    let known: Vec<_> = CRITERIA.iter().map(|c| c.slug).collect();
                    Halt::Usage(format!(
                        "unknown scenario `{id}`; known: all, 1-8, {}",
                        known.join(", ")
                    ))
                })?]
            };
            let opts = ReproOptions { budget: cx.budget };
            let store = cx.store()?.clone();
            let mut all = true;
            for c in targets {
                let o = repro::run(c, &store, &opts).map_err(|e| match e {
                    repro::ReproError::Budget(s) => Halt::Budget(s),
                    e => Halt::Usage(e.to_string()),
                })?;
                print!("{}", repro::report(&o));
                all &= o.passed;
            }
            holds(all)
        }
    }
}

fn bramble_command(cx: &mut Ctx, b: BrambleCommand) -> CmdResult {
    match b {
        BrambleCommand::Order { graph, bramble } => {
            let d = cx.graph(&graph)?;
            let br = cx.bramble(&d, &bramble)?;
            let rep = validate_bramble(&d, &br);
            if !rep.valid {
                println!("invalid {} bramble: {:?}", br.kind, rep.violations);
                return Err(Halt::Fails);
            }
            let c = bramble_order(&d, &br).map_err(usage)?;
            println!("order {}, cover {}", c.order(), set(&d, c.cover));
            cx.emit(&d.set_names(c.cover))
        }
        BrambleCommand::Number { graph, weak, cap } => {
            let d = cx.graph(&graph)?;
            let kind = if weak { BrambleKind::Weak } else { BrambleKind::Strong };
            let (k, wit) = bramble_number(&d, kind, cap).map_err(usage)?;
            println!(
                "{kind} bramble number {k} (witness with {} elements)",
                wit.elements.len()
            );
            cx.emit(&wit.to_json(&d))
        }
        BrambleCommand::Lift {
            minor,
            host,
            witness,
            bramble,
        } => {
            let m = cx.graph(&minor)?;
            let h = cx.graph(&host)?;
            let w = cx.witness(&h, &witness)?;
            let br = cx.bramble(&m, &bramble)?;
            let lifted = lift_bramble(&m, &h, &w, &br).map_err(usage)?;
            let ok = validate_bramble(&h, &lifted).valid;
            let before = bramble_order(&m, &br).map_err(usage)?.order();
            let after = if ok {
                bramble_order(&h, &lifted).map_err(usage)?.order()
            } else {
                0
            };
            println!("lifted bramble: valid {ok}, order {after} (was {before})");
            cx.emit(&lifted.to_json(&h))?;
            holds(ok && after >= before)
        }
        BrambleCommand::Validate { graph, bramble } => {
            let d = cx.graph(&graph)?;
            let br = cx.bramble(&d, &bramble)?;
            let rep = validate_bramble(&d, &br);
            if rep.valid {
                println!("valid {} bramble with {} elements", br.kind, br.elements.len());
            } else {
                println!("invalid {} bramble", br.kind);
                for v in &rep.violations {
                    println!("  {v:?}");
                }
            }
            cx.emit(&rep)?;
            holds(rep.valid)
        }
    }
}

fn fixture_command(cx: &mut Ctx, f: FixtureCommand) -> CmdResult {
    let store = cx.store()?.clone();
    match f {
        FixtureCommand::List => {
            for e in &store.catalog.fixtures {
                let on = match (e.kind, &e.host) {
                    (FixtureKind::Graph, _) | (_, None) => String::new(),
                    (_, Some(h)) => format!(" on {h}"),
                };
                println!("{:<24} {:<13} {}{on}", e.name, e.kind.to_string(), e.note);
            }
            Ok(())
        }
        FixtureCommand::Dump { name } => {
            let path = store.path(&name).map_err(usage)?;
            store.load(&name).map_err(usage)?;
            print!("{}", fs::read_to_string(&path).map_err(usage)?);
            Ok(())
        }
        FixtureCommand::Audit { name } => {
            let names: Vec<String> = match name {
                Some(n) => vec![n],
                None => store.names().map(String::from).collect(),
            };
            let mut all = true;
            for n in names {
                match store.audit(&n) {
                    Ok(lines) => println!("{n}: ok ({})", lines.join("; ")),
                    Err(e) => {
                        println!("{n}: FAILED {e}");
                        all = false;
                    }
                }
            }
            holds(all)
        }
    }
}

/// Parses arguments, runs the command and maps the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(h) => {
            match &h {
                Halt::Fails => {}
                Halt::Usage(s) => eprintln!("error: {s}"),
                Halt::Budget(s) => eprintln!("budget exceeded: {s}"),
            }
            ExitCode::from(h.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn argument_definitions_are_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn usage_errors_exit_with_two() {
        let code = main_with_args(["dtwlab", "width", "D2"]);
        assert_eq!(code, ExitCode::from(2));
    }
}

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use poplab::experiment::{resolve_params, run_trials, ParamOverrides, RunProtocol};
use poplab::graphspec::{midpoint_edges, GraphSpec};
use poplab::record::{write_csv, write_json_line, RunRecord, Summary};
use poplab::verify::{impossibility, verify, CheckError, VerifyProtocol};
use poplab::walk::{walk_rows, WalkMode, WalkOptions};
use poplab_core::oracles::{game_brute_force, game_stable_set, GameCounts};
use poplab_core::verifier::{VerifyError, VerifyOptions, DEFAULT_BUDGET};
use poplab_core::{GraphKind, RunLimits};

const GRAPH_HELP: &str = "Graph spec: kind:n[,m][@seed] with kind one of complete, cycle, path, \
star, random (m required for random), or file:path for an edge list (first line `n m`, then \
one `u v` line per edge). Random graphs without @seed use --seed.";

/// Simulation, verification and measurement for self-stabilizing
/// population protocols on arbitrary graphs.
///
/// Output is JSON lines on stdout. Exit codes: 0 success, 1 a trial or
/// bound check failed, 2 bad input, 3 verifier witness, 4 state space over
/// budget.
#[derive(Parser)]
#[command(name = "poplab", version, after_help = GRAPH_HELP)]
struct Cli {
    /// Refuse to run without an explicit --seed.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Randomized self-stabilization trials from uniform initial configurations.
    Run(RunArgs),
    /// `run` over every combination of graph kind and size.
    Sweep(SweepArgs),
    /// Exhaustive final-set verification on a small graph.
    Verify(VerifyArgs),
    /// Token random-walk quantities against their bounds.
    Walk(WalkArgs),
    /// Stable states of the label game.
    Game(GameArgs),
}

#[derive(Args)]
struct TrialArgs {
    #[arg(long, value_enum, default_value = "prank")]
    protocol: RunProtocol,
    #[arg(long, default_value_t = 10)]
    trials: u64,
    /// Master seed; trial i runs with a seed derived from it.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = RunLimits::default().max_steps)]
    max_steps: u64,
    /// Steps simulated after the safe set is first reached.
    #[arg(long, default_value_t = RunLimits::default().closure_window)]
    closure_window: u64,
    #[command(flatten)]
    params: ParamArgs,
    /// Also write the trial records as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    tmax: Option<u32>,
    #[arg(long)]
    pmax: Option<u32>,
    #[arg(long)]
    emax: Option<u32>,
    /// Give the ranking protocol the exact edge count (tmax defaults to 4mn).
    #[arg(long)]
    know_m: bool,
}

impl ParamArgs {
    fn overrides(&self) -> ParamOverrides {
        ParamOverrides {
            tmax: self.tmax,
            pmax: self.pmax,
            emax: self.emax,
            know_m: self.know_m,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, help = GRAPH_HELP)]
    graph: GraphSpec,
    #[command(flatten)]
    trial: TrialArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated graph kinds. Random graphs get the edge count halfway
    /// between a tree and the complete graph.
    #[arg(long, value_delimiter = ',', default_value = "complete,path", value_parser = parse_kind)]
    kinds: Vec<GraphKind>,
    /// Sizes as a list (4,6,8) or an inclusive range (4-8).
    #[arg(long, value_parser = parse_sizes)]
    sizes: Sizes,
    #[command(flatten)]
    trial: TrialArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    protocol: VerifyProtocol,
    #[arg(long, help = GRAPH_HELP, required_unless_present = "impossibility")]
    graph: Option<GraphSpec>,
    /// Search for a degree-recognition counterexample on SUB ⊂ SUPER.
    #[arg(long, value_name = "SUB,SUPER", value_parser = parse_graph_pair, conflicts_with = "graph")]
    impossibility: Option<(GraphSpec, GraphSpec)>,
    /// Configuration-count limit (default: POPLAB_BUDGET, else 10^7).
    #[arg(long)]
    budget: Option<u64>,
    /// Also count safe configurations outside every final set.
    #[arg(long)]
    transient_safe: bool,
    /// Seed for random graph specs.
    #[arg(long)]
    seed: Option<u64>,
    /// Timer overrides; ranking uses tmax = 1 unless given.
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args)]
struct WalkArgs {
    #[arg(long, help = GRAPH_HELP)]
    graph: GraphSpec,
    #[arg(long, value_enum)]
    mode: WalkMode,
    /// Monte Carlo trials per agent (cover, drift).
    #[arg(long, default_value_t = 500)]
    trials: u64,
    #[arg(long)]
    seed: Option<u64>,
    /// Moves per drift measurement (default n).
    #[arg(long)]
    k: Option<u64>,
}

#[derive(Args)]
struct GameArgs {
    /// Players per state, e.g. 3,0,0.
    #[arg(
        long,
        value_delimiter = ',',
        required_unless_present = "states",
        conflicts_with = "states"
    )]
    counts: Option<Vec<usize>>,
    /// State of each player, e.g. 0,0,0.
    #[arg(long, value_delimiter = ',')]
    states: Option<Vec<usize>>,
    /// Cross-check by exhaustive exploration (n <= 6).
    #[arg(long)]
    brute_force: bool,
}

#[derive(Clone)]
struct Sizes(Vec<usize>);

fn parse_kind(s: &str) -> Result<GraphKind, String> {
    GraphKind::from_name(s).ok_or_else(|| format!("unknown graph kind `{s}`"))
}

fn parse_sizes(s: &str) -> Result<Sizes, String> {
    let bad = || format!("`{s}` is neither a list like 4,6,8 nor a range like 4-8");
    if let Some((lo, hi)) = s.split_once('-') {
        let (lo, hi): (usize, usize) = (
            lo.parse().map_err(|_| bad())?,
            hi.parse().map_err(|_| bad())?,
        );
        if lo > hi {
            return Err(bad());
        }
        return Ok(Sizes((lo..=hi).collect()));
    }
    s.split(',')
        .map(|x| x.parse().map_err(|_| bad()))
        .collect::<Result<_, _>>()
        .map(Sizes)
}

/// Splits at the first comma where both halves are valid specs, so
/// `random:5,7,complete:5` reads as (`random:5,7`, `complete:5`).
fn parse_graph_pair(s: &str) -> Result<(GraphSpec, GraphSpec), String> {
    s.match_indices(',')
        .find_map(|(i, _)| Some((s[..i].parse().ok()?, s[i + 1..].parse().ok()?)))
        .ok_or_else(|| format!("`{s}` is not a pair SUB,SUPER of graph specs"))
}

fn master_seed(seed: Option<u64>, strict: bool) -> Result<u64> {
    match seed {
        Some(s) => Ok(s),
        None if strict => bail!("--seed is required with --strict"),
        None => Ok(0),
    }
}

fn budget(arg: Option<u64>) -> Result<u64> {
    if let Some(b) = arg {
        return Ok(b);
    }
    match std::env::var("POPLAB_BUDGET") {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("POPLAB_BUDGET=`{v}` is not a count")),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

struct Cell {
    label: String,
    spec: GraphSpec,
}

/// Runs every cell, streaming records and one summary per cell.
fn trials(cells: &[Cell], args: &TrialArgs, strict: bool) -> Result<u8> {
    let seed = master_seed(args.seed, strict)?;
    if args.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let limits = RunLimits {
        max_steps: args.max_steps,
        closure_window: args.closure_window,
    };
    let overrides = args.params.overrides();
    let mut csv_file = args
        .csv
        .as_ref()
        .map(|p| File::create(p).with_context(|| format!("cannot create {}", p.display())))
        .transpose()?;
    let mut out = BufWriter::new(io::stdout().lock());
    let mut all: Vec<RunRecord> = Vec::new();
    for cell in cells {
        let graph = cell
            .spec
            .build(seed)
            .with_context(|| format!("graph `{}`", cell.label))?;
        let params = resolve_params(args.protocol, &graph, &overrides)?;
        let outcomes = run_trials(args.protocol, &graph, &params, seed, args.trials, limits)?;
        let records: Vec<RunRecord> = outcomes.into_iter().map(|o| o.record).collect();
        for r in &records {
            write_json_line(&mut out, r)?;
        }
        let summary = Summary::new(args.protocol.name(), &cell.label, &graph, &params, &records);
        write_json_line(&mut out, &summary)?;
        out.flush()?;
        all.extend(records);
    }
    if let Some(file) = csv_file.take() {
        write_csv(BufWriter::new(file), &all)?;
    }
    Ok(if all.iter().all(RunRecord::passed) {
        0
    } else {
        1
    })
}

fn cmd_verify(args: &VerifyArgs, strict: bool) -> Result<u8> {
    let seed = master_seed(args.seed, strict)?;
    let budget = budget(args.budget)?;
    let overrides = args.params.overrides();
    let result = match (&args.graph, &args.impossibility) {
        (_, Some((sub, sup))) => {
            let (g_sub, g_super) = (sub.build(seed)?, sup.build(seed)?);
            impossibility(args.protocol, &g_sub, &g_super, &overrides, budget)
        }
        (Some(spec), None) => {
            let graph = spec.build(seed)?;
            let options = VerifyOptions {
                budget,
                count_transient_safe: args.transient_safe,
            };
            verify(args.protocol, &graph, &overrides, options)
        }
        (None, None) => bail!("either --graph or --impossibility is required"),
    };
    let mut out = io::stdout().lock();
    match result {
        Ok(outcome) => {
            write_json_line(&mut out, &outcome.report)?;
            Ok(if outcome.verified { 0 } else { 3 })
        }
        Err(CheckError::Verify(VerifyError::TooLarge {
            configurations,
            budget,
        })) => {
            write_json_line(
                &mut out,
                &serde_json::json!({
                    "verdict": "too_large",
                    "configurations": configurations.to_string(),
                    "budget": budget,
                }),
            )?;
            eprintln!("state space has {configurations} configurations, budget is {budget}");
            Ok(4)
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_walk(args: &WalkArgs, strict: bool) -> Result<u8> {
    let seed = master_seed(args.seed, strict)?;
    if args.trials == 0 || args.k == Some(0) {
        bail!("--trials and --k must be at least 1");
    }
    let graph = args.graph.build(seed)?;
    let options = WalkOptions {
        trials: args.trials,
        seed,
        k: args.k,
    };
    let rows = walk_rows(&graph, args.mode, options)?;
    let mut out = BufWriter::new(io::stdout().lock());
    for row in &rows {
        write_json_line(&mut out, row)?;
    }
    out.flush()?;
    Ok(if rows.iter().all(|r| r.pass) { 0 } else { 1 })
}

fn cmd_game(args: &GameArgs) -> Result<u8> {
    let (counts, states) = match (&args.counts, &args.states) {
        (Some(k), _) => {
            let counts = GameCounts::new(k.clone())?;
            let states: Vec<usize> = k
                .iter()
                .enumerate()
                .flat_map(|(s, &c)| std::iter::repeat_n(s, c))
                .collect();
            (counts, states)
        }
        (None, Some(s)) => (GameCounts::from_states(s)?, s.clone()),
        (None, None) => bail!("either --counts or --states is required"),
    };
    let stable = game_stable_set(&counts);
    let mut report = serde_json::json!({ "counts": counts, "stable": stable });
    let mut code = 0;
    if args.brute_force {
        let brute = game_brute_force(&states)?;
        if brute != stable {
            code = 1;
        }
        report["brute_force"] = serde_json::json!(brute);
        report["agree"] = serde_json::json!(brute == stable);
    }
    write_json_line(&mut io::stdout().lock(), &report)?;
    Ok(code)
}

fn dispatch(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Run(args) => trials(
            &[Cell {
                label: args.graph.to_string(),
                spec: args.graph.clone(),
            }],
            &args.trial,
            cli.strict,
        ),
        Command::Sweep(args) => {
            let mut cells = Vec::new();
            for &kind in &args.kinds {
                for &n in &args.sizes.0 {
                    let m =
                        (kind == GraphKind::RandomConnected && n >= 2).then(|| midpoint_edges(n));
                    let spec = GraphSpec::Generated {
                        kind,
                        n,
                        m,
                        seed: None,
                    };
                    cells.push(Cell {
                        label: spec.to_string(),
                        spec,
                    });
                }
            }
            trials(&cells, &args.trial, cli.strict)
        }
        Command::Verify(args) => cmd_verify(args, cli.strict),
        Command::Walk(args) => cmd_walk(args, cli.strict),
        Command::Game(args) => cmd_game(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn sizes_and_graph_pairs() {
        assert_eq!(parse_sizes("4-7").unwrap().0, [4, 5, 6, 7]);
        assert_eq!(parse_sizes("3,5").unwrap().0, [3, 5]);
        assert!(parse_sizes("5-3").is_err() && parse_sizes("a").is_err());
        let (sub, sup) = parse_graph_pair("random:5,7,complete:5").unwrap();
        assert_eq!(
            (sub.to_string(), sup.to_string()),
            ("random:5,7".into(), "complete:5".into())
        );
        assert!(parse_graph_pair("path:3").is_err());
    }

    #[test]
    fn seeds_and_budgets() {
        assert_eq!(master_seed(None, false).unwrap(), 0);
        assert!(master_seed(None, true).is_err());
        assert_eq!(master_seed(Some(9), true).unwrap(), 9);
        assert_eq!(budget(Some(12)).unwrap(), 12);
    }
}

//! `railsynth` command-line front end.
//!
//! Exit codes: 0 on success, 1 on parse, validation or usage errors, 2 when
//! `--strict` synthesis exceeds its limits, 3 when `oracle-grid` finds a
//! disagreement.

use std::io::Read;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use railsynth::dsl::{parse_system, render_system};
use railsynth::model::{validate_system, ConstrainedRailwaySystem};
use railsynth::pta::Valuation;
use railsynth::rational::{format_rational, parse_rational};
use railsynth::scenario::{gen_serial_parallel, DurationProfile, ScenarioKind, ScenarioSpec};
use railsynth::synth::{check_concrete, ef_synth, format_outcome, Order, SynthError, SynthOptions, SynthStats};
use railsynth::translate::translate_system;
use railsynth_oracle::{grid_compare, GridAxis};

#[derive(Parser)]
#[command(name = "railsynth", version, about = "Timing parameter synthesis for railway systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a model
    Validate { file: String },
    /// Print the translated automata network
    Translate { file: String },
    /// Synthesize the feasible parameter valuations
    Synth {
        file: String,
        #[command(flatten)]
        limits: Limits,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Decide feasibility for one valuation
    Check {
        file: String,
        /// Comma-separated `name=value` pairs
        #[arg(long)]
        set: Option<String>,
        #[command(flatten)]
        limits: Limits,
    },
    /// Print a serial-parallel benchmark model
    Bench {
        #[arg(long, default_value_t = 1)]
        ns: usize,
        #[arg(long, default_value_t = 1)]
        np: usize,
        #[arg(long, default_value_t = 1)]
        nt: usize,
        #[arg(long, default_value = "nop")]
        scenario: ScenarioKind,
        #[arg(long, default_value_t = 10)]
        segment_dur: i64,
        #[arg(long, default_value_t = 1)]
        pair_dur: i64,
    },
    /// Compare synthesis with the integer-time oracle on a grid
    OracleGrid {
        file: String,
        /// `name=lo:hi[:step]`, one per parameter
        #[arg(long = "axis", required = true)]
        axes: Vec<String>,
        #[command(flatten)]
        limits: Limits,
    },
}

#[derive(Args, Clone)]
struct Limits {
    /// Fail with exit code 2 instead of reporting a bounded result
    #[arg(long)]
    strict: bool,
    #[arg(long, default_value_t = 1_000_000)]
    max_states: usize,
    #[arg(long, default_value_t = 10_000)]
    max_depth: usize,
    #[arg(long, value_enum, default_value_t = OrderArg::Bfs)]
    order: OrderArg,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

impl Limits {
    fn options(&self) -> SynthOptions {
        SynthOptions {
            max_states: self.max_states,
            max_depth: self.max_depth,
            strict: self.strict,
            order: match self.order {
                OrderArg::Bfs => Order::Bfs,
                OrderArg::Dfs => Order::Dfs,
            },
            threads: self.threads.max(1),
            ..SynthOptions::default()
        }
    }
}

#[derive(ValueEnum, Clone, Copy)]
enum OrderArg {
    Bfs,
    Dfs,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

fn read_input(file: &str) -> Result<String> {
    if file == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading stdin")?;
        Ok(s)
    } else {
        std::fs::read_to_string(file).with_context(|| format!("reading {file}"))
    }
}

fn load(file: &str) -> Result<ConstrainedRailwaySystem> {
    let text = read_input(file)?;
    let sys = parse_system(&text).map_err(|errs| {
        let lines: Vec<String> = errs.iter().map(|e| format!("{file}:{e}")).collect();
        anyhow!(lines.join("\n"))
    })?;
    let report = validate_system(&sys);
    if !report.is_empty() {
        let lines: Vec<String> = report.issues.iter().map(|i| format!("{file}: {i}")).collect();
        bail!(lines.join("\n"));
    }
    Ok(sys)
}

fn print_stats(stats: &SynthStats) {
    eprintln!(
        "states: {} pruned: {} targets: {} depth: {} time: {:.3}s",
        stats.states,
        stats.pruned,
        stats.target_states,
        stats.max_depth,
        stats.elapsed.as_secs_f64()
    );
    if let Some(v) = &stats.first_violation {
        eprintln!("warning: mutual exclusion violated ({} states): {v}", stats.violations);
    }
}

fn parse_valuation(sys: &ConstrainedRailwaySystem, set: Option<&str>) -> Result<Valuation> {
    let mut v = Valuation::new();
    for part in set.unwrap_or("").split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| anyhow!("expected name=value, got `{part}`"))?;
        let name = name.trim();
        let value = parse_rational(value.trim()).ok_or_else(|| anyhow!("invalid number in `{part}`"))?;
        if !sys.params.iter().any(|p| p.id.as_str() == name) {
            bail!("unknown parameter `{name}`");
        }
        v.insert(name.into(), value);
    }
    for p in &sys.params {
        if !v.contains_key(&p.id) {
            bail!("no value for parameter `{}`", p.id);
        }
    }
    Ok(v)
}

fn parse_axis(text: &str) -> Result<GridAxis> {
    let bad = || anyhow!("expected name=lo:hi[:step], got `{text}`");
    let (name, range) = text.split_once('=').ok_or_else(bad)?;
    let nums: Vec<i64> = range
        .split(':')
        .map(|n| n.trim().parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    match nums.as_slice() {
        [lo, hi] => Ok(GridAxis::new(name.trim(), *lo, *hi, 1)),
        [lo, hi, step] if *step > 0 => Ok(GridAxis::new(name.trim(), *lo, *hi, *step)),
        _ => Err(bad()),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Validate { file } => {
            let sys = load(&file)?;
            println!(
                "ok: {} nodes, {} segments, {} trains, {} constraints, {} parameters",
                sys.graph.nodes.len(),
                sys.graph.segments.len(),
                sys.trains.len(),
                sys.constraints.len(),
                sys.params.len()
            );
        }
        Command::Translate { file } => {
            let problem = translate_system(&load(&file)?)?;
            print!("{}", problem.network);
        }
        Command::Synth { file, limits, format } => {
            let problem = translate_system(&load(&file)?)?;
            let out = ef_synth(&problem, &limits.options())?;
            print_stats(&out.stats);
            match format {
                Format::Text => print!("{}", format_outcome(&out)),
                Format::Json => {
                    let disjuncts: Vec<String> = out
                        .result
                        .disjuncts()
                        .iter()
                        .map(|d| out.result.render_disjunct(d))
                        .collect();
                    let params: Vec<&str> = out.result.params().iter().map(|p| p.as_str()).collect();
                    let doc = serde_json::json!({
                        "status": out.status.as_str(),
                        "params": params,
                        "result": out.result.to_string(),
                        "disjuncts": disjuncts,
                    });
                    println!("{doc}");
                }
            }
        }
        Command::Check { file, set, limits } => {
            let sys = load(&file)?;
            let v = parse_valuation(&sys, set.as_deref())?;
            let problem = translate_system(&sys)?;
            let ok = check_concrete(&problem, &v, &limits.options())?;
            println!("{}", if ok { "feasible" } else { "infeasible" });
        }
        Command::Bench {
            ns,
            np,
            nt,
            scenario,
            segment_dur,
            pair_dur,
        } => {
            if ns == 0 || np == 0 || nt == 0 {
                bail!("--ns, --np and --nt must be at least 1");
            }
            if segment_dur < 0 || pair_dur < 0 {
                bail!("durations must be non-negative");
            }
            let mut spec = ScenarioSpec::new(ns, np, nt, scenario);
            spec.profile = DurationProfile {
                segment: segment_dur,
                pair: pair_dur,
            };
            print!("{}", render_system(&gen_serial_parallel(&spec)));
        }
        Command::OracleGrid { file, axes, limits } => {
            let sys = load(&file)?;
            let axes: Vec<GridAxis> = axes.iter().map(|a| parse_axis(a)).collect::<Result<_>>()?;
            let report = grid_compare(&sys, &axes, &limits.options())?;
            print_stats(&report.stats);
            println!("status: {}", report.status.as_str());
            println!("result: {}", report.result);
            println!("points: {}", report.points);
            if report.saturated > 0 {
                eprintln!("warning: oracle reached its horizon at {} points", report.saturated);
            }
            for d in &report.disagreements {
                let point: Vec<String> = d
                    .valuation
                    .iter()
                    .map(|(p, x)| format!("{p}={}", format_rational(x)))
                    .collect();
                println!(
                    "disagreement: {} synth={} oracle={}",
                    point.join(","),
                    d.synth,
                    d.oracle
                );
            }
            println!("disagreements: {}", report.disagreements.len());
            if !report.is_clean() {
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let limit = e
                .downcast_ref::<SynthError>()
                .is_some_and(|s| matches!(s, SynthError::Limit { .. }))
                || e.chain().any(|c| {
                    c.downcast_ref::<railsynth_oracle::GridError>()
                        .is_some_and(|g| matches!(g, railsynth_oracle::GridError::Synth(SynthError::Limit { .. })))
                });
            ExitCode::from(if limit { 2 } else { 1 })
        }
    }
}

//! Batch front end: parse a scenario config, dispatch to the engines, emit a
//! machine-readable report (JSON) or plot-ready tables (CSV).
//!
//! Exit codes are stable contracts: 0 success, 1 configuration or validation
//! failure, 2 engine precondition (for example a non-identically-distributed
//! input to `classify`).

mod config;
mod report;

use clap::{Parser, Subcommand, ValueEnum};
use config::ScenarioConfig;
use report::Report;
use rz2_core::{
    counterexample_search, elimination_schedule, permutation_test, proposition_check, sample,
    verify_elimination, Bit, Character, Error as CoreError, Q,
};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

#[derive(Debug)]
pub enum CliError {
    /// Configuration problem: exit code 1.
    Config(String),
    /// Engine precondition: exit code 2.
    Precondition(String),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Z2Mode {
    /// Exhaustive degeneracy check over grids without vanishing
    /// characteristic functions.
    Proposition,
    /// Witness search with vanishing characteristic functions allowed.
    Search,
}

#[derive(Parser, Debug)]
#[command(name = "rz2", version, about = "Distribution classes and linear-forms checks on R x Z(2)")]
struct Cli {
    /// Scenario configuration file (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// json: structured report; csv: plot-ready table (check-theta,
    /// verify-eq1).
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Overrides the Monte Carlo seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Residual tolerance for identical-distribution verdicts and
    /// elimination checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Probability criterion, kappa bound, fiber masses, density data.
    CheckTheta,
    /// Residual of the functional equation over the character grid.
    VerifyEq1,
    /// Coefficient conditions and class guarantees (refuses problems whose
    /// vectors are not identically distributed).
    Classify,
    /// Elimination schedule and its residual verification.
    FdVerify,
    /// Sample (L1, L2) and (L3, L4) and run the energy permutation test.
    Simulate,
    /// Exact verification on Z(2).
    Z2 {
        #[arg(long, value_enum)]
        mode: Z2Mode,
        /// Enumerate problems with up to this many variables.
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Comma-separated rationals, e.g. "0,1/4,1/3,1".
        #[arg(long)]
        q_grid: Option<String>,
    },
    /// Build the conditional-symmetry problem (L3 = L1, L4 = -L2) from a and
    /// b, then classify.
    Heyde,
    /// Build the independence problem from duplicated variables, then
    /// classify the originals.
    Ds,
}

enum Output {
    Json(Box<Report>),
    Csv(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match run(&cli) {
        Ok(output) => match write_output(&cli, output) {
            Ok(()) => ExitCode::SUCCESS,
            Err(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
        },
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Precondition(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    match std::env::var("RZ2_THREADS") {
        Err(_) => Ok(()),
        Ok(v) => {
            let n: usize = v
                .parse()
                .map_err(|_| format!("RZ2_THREADS must be a positive integer, got {v:?}"))?;
            if n == 0 {
                return Err("RZ2_THREADS must be positive".into());
            }
            // ignore the error if a pool already exists
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            Ok(())
        }
    }
}

fn write_output(cli: &Cli, output: Output) -> Result<(), String> {
    let text = match output {
        Output::Json(report) => serde_json::to_string_pretty(&report)
            .map_err(|e| format!("cannot serialize report: {e}"))?,
        Output::Csv(table) => table,
    };
    match &cli.out {
        Some(path) => std::fs::write(path, text.as_bytes())
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn load_config(cli: &Cli) -> Result<ScenarioConfig, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("this subcommand requires --config <path>".into()))?;
    ScenarioConfig::load(path)
}

fn base_report(subcommand: &str, config: ScenarioConfig, started: Instant) -> Report {
    Report {
        subcommand: subcommand.to_string(),
        timing_ms: started.elapsed().as_millis(),
        note: None,
        theta: None,
        eq1: None,
        components: None,
        fd: None,
        mc: None,
        z2: None,
        config,
    }
}

fn derive_seed(base: u64, tag: u64) -> u64 {
    base ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    let started = Instant::now();
    match &cli.command {
        Command::CheckTheta => check_theta(cli, started),
        Command::VerifyEq1 => verify_eq1(cli, started),
        Command::Classify => classify(cli, started, "classify", |c| c.problem(), 0),
        Command::Heyde => classify(cli, started, "heyde", |c| c.heyde_problem(), 0),
        Command::Ds => {
            let originals = load_config(cli)?.distributions.len();
            classify(cli, started, "ds", |c| c.ds_problem(), originals)
        }
        Command::FdVerify => fd_verify(cli, started),
        Command::Simulate => simulate(cli, started),
        Command::Z2 { mode, n, q_grid } => z2(cli, started, *mode, *n, q_grid.as_deref()),
    }
}

fn require_csvless(cli: &Cli, subcommand: &str) -> Result<(), CliError> {
    if cli.format == Format::Csv {
        return Err(CliError::Config(format!(
            "csv output is not available for {subcommand}; use --format json"
        )));
    }
    Ok(())
}

fn check_theta(cli: &Cli, started: Instant) -> Result<Output, CliError> {
    let config = load_config(cli)?;
    if config.distributions.is_empty() {
        return Err(CliError::Config("check-theta requires at least one distribution".into()));
    }
    let params = config.params();
    if cli.format == Format::Csv {
        // density table of the first distribution
        let p = &params[0];
        let span = 20.0 * p.sigma.sqrt();
        let mut table = String::from("t,f0,f1\n");
        for i in 0..=1000 {
            let t = p.beta - span + 2.0 * span * i as f64 / 1000.0;
            let f0 = p.fiber_density(Bit::ZERO, t)?;
            let f1 = p.fiber_density(Bit::ONE, t)?;
            table.push_str(&format!("{t},{f0},{f1}\n"));
        }
        return Ok(Output::Csv(table));
    }
    let theta = params.iter().enumerate().map(|(i, p)| report::theta_report(i, p)).collect();
    let mut out = base_report("check-theta", config, started);
    out.theta = Some(theta);
    Ok(Output::Json(Box::new(out)))
}

fn verify_eq1(cli: &Cli, started: Instant) -> Result<Output, CliError> {
    let config = load_config(cli)?;
    let problem = config.problem()?;
    let grid = config.character_grid();
    if cli.format == Format::Csv {
        let mut table = String::from("s1,s2,l1,l2,lhs_re,lhs_im,rhs_re,rhs_im,abs_diff\n");
        let s_values = grid.s_values();
        for &s1 in &s_values {
            for l1 in [Bit::ZERO, Bit::ONE] {
                for &s2 in &s_values {
                    for l2 in [Bit::ZERO, Bit::ONE] {
                        let (lhs, rhs) =
                            problem.eq1_sides(Character::new(s1, l1), Character::new(s2, l2));
                        table.push_str(&format!(
                            "{s1},{s2},{l1},{l2},{},{},{},{},{}\n",
                            lhs.re,
                            lhs.im,
                            rhs.re,
                            rhs.im,
                            (lhs - rhs).norm()
                        ));
                    }
                }
            }
        }
        return Ok(Output::Csv(table));
    }
    let residual = problem.eq1_residual(&grid);
    let mut out = base_report("verify-eq1", config, started);
    out.eq1 = Some(report::Eq1Report {
        residual,
        tol: cli.tol,
        identical: residual <= cli.tol,
        s_max: grid.s_max,
        s_steps: grid.s_steps,
    });
    Ok(Output::Json(Box::new(out)))
}

/// Shared flow for classify / heyde / ds: build, check the functional
/// equation, emit per-variable conditions and labels. `originals` > 0 trims
/// the report to the leading variables (the independence construction
/// duplicates them).
fn classify(
    cli: &Cli,
    started: Instant,
    name: &str,
    build: impl Fn(&ScenarioConfig) -> Result<rz2_core::FormsProblem, CliError>,
    originals: usize,
) -> Result<Output, CliError> {
    require_csvless(cli, name)?;
    let config = load_config(cli)?;
    let problem = build(&config)?;
    let grid = config.character_grid();
    let residual = problem.eq1_residual(&grid);
    let labels = problem.classify_components(&grid, cli.tol, config.allow_vanishing)?;
    let conditions = problem.condition_report();
    let mut components = report::component_reports(&conditions, &labels);
    let mut note = None;
    if originals > 0 {
        components.truncate(originals);
        note = Some(format!(
            "variables {originals}.. are primed copies sharing the originals' distributions; \
             labels reported for the originals"
        ));
    }
    let mut out = base_report(name, config, started);
    out.note = note;
    out.eq1 = Some(report::Eq1Report {
        residual,
        tol: cli.tol,
        identical: true,
        s_max: grid.s_max,
        s_steps: grid.s_steps,
    });
    out.components = Some(components);
    Ok(Output::Json(Box::new(out)))
}

fn fd_verify(cli: &Cli, started: Instant) -> Result<Output, CliError> {
    require_csvless(cli, "fd-verify")?;
    let config = load_config(cli)?;
    let problem = config.problem()?;
    let fd = config.fd.unwrap_or(config::FdConfig { pivot: 0, trials: 50 });
    let seed = cli.seed.unwrap_or_else(|| config.mc.map(|m| m.seed).unwrap_or(0));
    let schedule = elimination_schedule(&problem, fd.pivot)?;
    let check = verify_elimination(&problem, fd.pivot, fd.trials, cli.tol, seed)?;
    let mut out = base_report("fd-verify", config, started);
    out.fd = Some(report::fd_report(&schedule, &check, fd.trials));
    Ok(Output::Json(Box::new(out)))
}

fn simulate(cli: &Cli, started: Instant) -> Result<Output, CliError> {
    require_csvless(cli, "simulate")?;
    let config = load_config(cli)?;
    let problem = config.problem()?;
    let mc = config
        .mc
        .ok_or_else(|| CliError::Config("simulate requires an mc block".into()))?;
    let seed = cli.seed.unwrap_or(mc.seed);
    let n = problem.n();
    let mut left = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    for j in 0..n {
        left.push(sample(&problem.dists[j], mc.n_samples, derive_seed(seed, 1 + j as u64))?);
        right.push(sample(
            &problem.dists[j],
            mc.n_samples,
            derive_seed(seed, 0x1000 + j as u64),
        )?);
    }
    let side_a = rz2_core::apply_forms(&left, &problem.a, &problem.b)?;
    let side_b = rz2_core::apply_forms(&right, &problem.c, &problem.d)?;
    let outcome = permutation_test(&side_a, &side_b, mc.n_perm, derive_seed(seed, 0xFFFF_0000))?;
    let grid = config.character_grid();
    let residual = problem.eq1_residual(&grid);
    let mut out = base_report("simulate", config, started);
    out.eq1 = Some(report::Eq1Report {
        residual,
        tol: cli.tol,
        identical: residual <= cli.tol,
        s_max: grid.s_max,
        s_steps: grid.s_steps,
    });
    out.mc = Some(report::mc_report(&outcome, mc.n_samples, seed));
    Ok(Output::Json(Box::new(out)))
}

fn parse_q_grid(text: &str) -> Result<Vec<Q>, CliError> {
    text.split(',')
        .map(|part| {
            Q::from_str(part.trim())
                .map_err(|e| CliError::Config(format!("invalid rational {part:?} in q-grid: {e}")))
        })
        .collect()
}

fn z2(
    cli: &Cli,
    started: Instant,
    mode: Z2Mode,
    n_max: usize,
    q_grid: Option<&str>,
) -> Result<Output, CliError> {
    require_csvless(cli, "z2")?;
    if n_max == 0 || n_max > 4 {
        return Err(CliError::Config("z2 --n must lie in 1..=4 (exhaustive enumeration)".into()));
    }
    let grid = match q_grid {
        Some(text) => parse_q_grid(text)?,
        None => match mode {
            Z2Mode::Proposition => {
                vec![Q::from_integer(0), Q::new(1, 4), Q::new(1, 3), Q::from_integer(1)]
            }
            Z2Mode::Search => {
                vec![Q::from_integer(0), Q::new(1, 4), Q::new(1, 2), Q::from_integer(1)]
            }
        },
    };
    let grid_strings: Vec<String> = grid.iter().map(|q| q.to_string()).collect();
    let z2_report = match mode {
        Z2Mode::Proposition => {
            let outcome = proposition_check(n_max, &grid)
                .map_err(|e| CliError::Config(e.to_string()))?;
            report::Z2Report {
                mode: "proposition".into(),
                n_max,
                q_grid: grid_strings,
                problems: Some(outcome.problems),
                equation_holds: Some(outcome.equation_holds),
                assertions: Some(outcome.assertions),
                message: format!("{} violations", outcome.violations.len()),
                witnesses: outcome.violations.iter().map(report::witness_report).collect(),
            }
        }
        Z2Mode::Search => {
            let witnesses =
                counterexample_search(n_max, &grid).map_err(|e| CliError::Config(e.to_string()))?;
            report::Z2Report {
                mode: "search".into(),
                n_max,
                q_grid: grid_strings,
                problems: None,
                equation_holds: None,
                assertions: None,
                message: format!("{} witnesses", witnesses.len()),
                witnesses: witnesses.iter().map(report::witness_report).collect(),
            }
        }
    };
    let mut out = base_report("z2", ScenarioConfig::default_empty(), started);
    out.z2 = Some(z2_report);
    Ok(Output::Json(Box::new(out)))
}

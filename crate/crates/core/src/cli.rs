//! Command-line front end.
//!
//! Exit codes: 0 success, 1 infeasible instance or failed verification (JSON
//! diagnostics on stdout), 2 usage or IO error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::algorithm::{run_algorithm, Algorithm, RunStatus};
use crate::embedding::{EmbeddingState, ServiceChain, StateFile};
use crate::ilp::{check_plan, export_lp, solve_exact, AllocationMode, BackupPlan, LpOptions, SolveConfig, SolveError};
use crate::par::Execution;
use crate::scenario::{generate_infrastructure, generate_scenario, run_suite, SuiteConfig, SuiteOptions};
use crate::survivability::{verify_all_failures, Verdict};
use crate::topology::{NetworkFile, PhysicalNetwork};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sfc-survive", version, about = "Survivable shared backup provisioning for service chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a backup plan for one instance.
    Solve(SolveArgs),
    /// Check a plan against an instance and simulate every single-node failure.
    Verify(VerifyArgs),
    /// Write the integer model in CPLEX LP format.
    ExportLp(ExportLpArgs),
    /// Run every algorithm on every generated scenario.
    Suite(SuiteArgs),
    /// Write the instance file of one generated scenario.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct SolveOpts {
    /// Solver settings as JSON; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dmax: Option<u32>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Algorithm::Exact)]
    pub algorithm: Algorithm,
    #[command(flatten)]
    pub opts: SolveOpts,
    #[arg(long, value_enum)]
    pub allocation_mode: Option<AllocationMode>,
    /// Wall-clock limit for the exact solver, in seconds.
    #[arg(long)]
    pub budget: Option<f64>,
    /// Branch-and-bound node limit for the exact solver.
    #[arg(long)]
    pub node_budget: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub instance: PathBuf,
    pub plan: PathBuf,
    #[command(flatten)]
    pub opts: SolveOpts,
}

#[derive(Debug, Args)]
pub struct ExportLpArgs {
    pub instance: PathBuf,
    #[command(flatten)]
    pub opts: SolveOpts,
    #[arg(long)]
    pub big_m: Option<u32>,
    /// Emit one-host rows for every (node, type) pair, hosted VNFs or not.
    #[arg(long)]
    pub literal_eq2: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub dmax: Option<u32>,
    /// Write 0 for every runtime so that outputs are byte-reproducible.
    #[arg(long)]
    pub no_timing: bool,
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// 0-based scenario index.
    #[arg(long, default_value_t = 0)]
    pub scenario: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Instance file: a network plus either per-node counts `m` or a list of
/// chains to embed first-fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(flatten)]
    pub network: NetworkFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub types: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<Vec<u32>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chains: Option<Vec<ServiceChain>>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("invalid instance: {0}")]
    Instance(String),
    #[error("{0}")]
    Other(String),
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_owned(),
        source,
    })
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

impl InstanceFile {
    pub fn load(&self) -> Result<(PhysicalNetwork, EmbeddingState), CliError> {
        let net = PhysicalNetwork::try_from(&self.network)
            .map_err(|e| CliError::Instance(e.to_string()))?;
        let state = match (&self.m, &self.chains) {
            (Some(_), Some(_)) => {
                return Err(CliError::Instance("give either `m` or `chains`, not both".into()))
            }
            (Some(m), None) => {
                if let (Some(t), Some(row)) = (self.types, m.first()) {
                    if row.len() != t {
                        return Err(CliError::Instance(format!(
                            "`types` is {t} but rows of `m` have {} entries",
                            row.len()
                        )));
                    }
                }
                EmbeddingState::from_counts(&net, m).map_err(|e| CliError::Instance(e.to_string()))?
            }
            (None, Some(chains)) => {
                let types = self.types.ok_or_else(|| {
                    CliError::Instance("`types` is required with `chains`".into())
                })?;
                let mut state = EmbeddingState::empty(net.node_count(), types);
                for chain in chains {
                    state
                        .embed_chain(&net, chain)
                        .map_err(|e| CliError::Instance(e.to_string()))?;
                }
                state
            }
            (None, None) => EmbeddingState::empty(net.node_count(), self.types.unwrap_or(0)),
        };
        Ok((net, state))
    }

    pub fn from_parts(net: &PhysicalNetwork, state: &EmbeddingState) -> Self {
        let StateFile { types, m } = state.to_file();
        Self {
            network: net.to_file(),
            types: Some(types),
            m: Some(m),
            chains: None,
        }
    }
}

fn solve_config(opts: &SolveOpts) -> Result<SolveConfig, CliError> {
    let mut cfg = match &opts.config {
        Some(path) => read_json(path)?,
        None => SolveConfig::default(),
    };
    if let Some(d) = opts.dmax {
        cfg.d_max = d;
    }
    Ok(cfg)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn cmd_solve(args: &SolveArgs) -> Result<i32, CliError> {
    let mut cfg = solve_config(&args.opts)?;
    if let Some(mode) = args.allocation_mode {
        cfg.allocation_mode = mode;
    }
    if args.budget.is_some() {
        cfg.time_budget = args.budget;
    }
    if args.node_budget.is_some() {
        cfg.node_budget = args.node_budget;
    }
    let instance: InstanceFile = read_json(&args.instance)?;
    let (net, state) = instance.load()?;

    if args.algorithm == Algorithm::Exact {
        return match solve_exact(&net, &state, &cfg) {
            Ok(sol) => {
                log::info!(
                    "{} search nodes, optimal: {}",
                    sol.stats.nodes,
                    sol.optimal
                );
                write_out(args.out.as_deref(), &to_json(&sol.plan))?;
                Ok(EXIT_OK)
            }
            Err(e) => {
                let diag = match &e {
                    SolveError::Infeasible { witness } => json!({
                        "status": "infeasible",
                        "witness": witness.map(|(node, ty)| json!({"node": node, "type": ty})),
                        "message": e.to_string(),
                    }),
                    SolveError::BudgetExceeded { nodes } => json!({
                        "status": "budget_exceeded",
                        "nodes": nodes,
                        "message": e.to_string(),
                    }),
                };
                write_out(None, &to_json(&diag))?;
                Ok(EXIT_FAILED)
            }
        };
    }
    let run = run_algorithm(&net, &state, &cfg, args.algorithm);
    debug_assert_eq!(run.status, RunStatus::Complete);
    let plan = run.plan.expect("heuristics always return a plan");
    if !plan.unprotected.is_empty() {
        log::warn!("{} VNFs left unprotected", plan.unprotected_vnfs());
    }
    write_out(args.out.as_deref(), &to_json(&plan))?;
    Ok(EXIT_OK)
}

fn cmd_verify(args: &VerifyArgs) -> Result<i32, CliError> {
    let cfg = solve_config(&args.opts)?;
    let instance: InstanceFile = read_json(&args.instance)?;
    let (net, state) = instance.load()?;
    let plan: BackupPlan = read_json(&args.plan)?;
    let check = check_plan(&net, &state, &plan, &cfg);
    let shape_ok = !check.violations.iter().any(|v| {
        matches!(
            v,
            crate::ilp::Violation::Shape { .. } | crate::ilp::Violation::OutOfRange { .. }
        )
    });
    let failures = if shape_ok {
        match verify_all_failures(&net, &state, &plan, &cfg, Execution::Parallel) {
            Verdict::Survivable => Vec::new(),
            Verdict::NotSurvivable(reports) => reports,
        }
    } else {
        Vec::new()
    };
    let valid = check.is_valid();
    let survivable = shape_ok && failures.is_empty();
    let report = json!({
        "valid": valid,
        "survivable": survivable,
        "violations": check.violations,
        "failures": failures,
    });
    write_out(None, &to_json(&report))?;
    Ok(if valid && survivable { EXIT_OK } else { EXIT_FAILED })
}

fn cmd_export_lp(args: &ExportLpArgs) -> Result<i32, CliError> {
    let mut cfg = solve_config(&args.opts)?;
    if let Some(m) = args.big_m {
        cfg.big_m = m;
    }
    let instance: InstanceFile = read_json(&args.instance)?;
    let (net, state) = instance.load()?;
    let opts = LpOptions {
        literal_eq2: args.literal_eq2,
    };
    match &args.out {
        Some(path) => export_lp(&net, &state, &cfg, opts, path),
        None => crate::ilp::write_lp(&net, &state, &cfg, opts).map(|text| {
            print!("{text}");
        }),
    }
    .map_err(|e| CliError::Other(e.to_string()))?;
    Ok(EXIT_OK)
}

fn suite_config(path: Option<&Path>, seed: Option<u64>) -> Result<SuiteConfig, CliError> {
    let mut cfg = match path {
        Some(p) => read_json(p)?,
        None => SuiteConfig::default(),
    };
    if let Some(s) = seed {
        cfg.generator.seed = s;
    }
    Ok(cfg)
}

fn cmd_suite(args: &SuiteArgs) -> Result<i32, CliError> {
    let mut cfg = suite_config(args.config.as_deref(), args.seed)?;
    if let Some(d) = args.dmax {
        cfg.solve.d_max = d;
    }
    let opts = SuiteOptions {
        execution: if args.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
        ..SuiteOptions::default()
    };
    let result = run_suite(&cfg.generator, &cfg.solve, opts)
        .map_err(|e| CliError::Other(e.to_string()))?;
    result
        .write_outputs(&args.out, &cfg, !args.no_timing)
        .map_err(|e| CliError::Other(format!("{}: {e}", args.out.display())))?;
    log::info!(
        "{} reports written to {}",
        result.reports.len(),
        args.out.display()
    );
    Ok(EXIT_OK)
}

fn cmd_generate(args: &GenerateArgs) -> Result<i32, CliError> {
    let cfg = suite_config(args.config.as_deref(), args.seed)?;
    let net = generate_infrastructure(&cfg.generator).map_err(|e| CliError::Other(e.to_string()))?;
    let scenario = generate_scenario(&net, &cfg.generator, args.scenario)
        .map_err(|e| CliError::Other(e.to_string()))?;
    let instance = InstanceFile::from_parts(&net, &scenario.state);
    write_out(args.out.as_deref(), &to_json(&instance))?;
    Ok(EXIT_OK)
}

pub fn run(cli: &Cli) -> Result<i32, CliError> {
    match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::ExportLp(a) => cmd_export_lp(a),
        Command::Suite(a) => cmd_suite(a),
        Command::Generate(a) => cmd_generate(a),
    }
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("SFC_SURVIVE_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).try_init();
}

/// Parses `argv`, runs the command, and returns the process exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_file_forms() {
        let text = r#"{"nodes":3,"capacities":[2,2,2],"links":[[0,1],[1,2]],"m":[[1],[0],[1]]}"#;
        let inst: InstanceFile = serde_json::from_str(text).unwrap();
        let (net, state) = inst.load().unwrap();
        assert_eq!(net.node_count(), 3);
        assert_eq!(state.total_vnfs(), 2);

        let text = r#"{"nodes":3,"capacities":[2,2,2],"links":[[0,1],[1,2]],"types":2,
            "chains":[{"id":7,"types":[0,1],"src":0,"dst":2}]}"#;
        let inst: InstanceFile = serde_json::from_str(text).unwrap();
        let (_, state) = inst.load().unwrap();
        assert_eq!((state.m(0, 0), state.m(0, 1)), (1, 1));

        let both = InstanceFile {
            m: Some(vec![vec![0]; 3]),
            ..inst.clone()
        };
        assert!(matches!(both.load(), Err(CliError::Instance(_))));
        let no_types = InstanceFile { types: None, ..inst };
        assert!(matches!(no_types.load(), Err(CliError::Instance(_))));
    }

    #[test]
    fn instance_round_trip() {
        let (net, state) = crate::testkit::path3();
        let inst = InstanceFile::from_parts(&net, &state);
        let back: InstanceFile = serde_json::from_str(&serde_json::to_string(&inst).unwrap()).unwrap();
        assert_eq!(back.load().unwrap(), (net, state));
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(main_with(["sfc-survive", "frobnicate"]), EXIT_USAGE);
        assert_eq!(
            main_with(["sfc-survive", "solve", "/nonexistent/instance.json"]),
            EXIT_USAGE
        );
        assert_eq!(main_with(["sfc-survive", "--version"]), EXIT_OK);
    }
}

//! The `teamplan` command line.
//!
//! Exit codes: 0 success (optimal), 1 internal or I/O failure, 2 invalid or
//! unreadable input, 3 infeasible, 4 search stopped at a limit, 5 oracle state
//! space over its cap.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};

use crate::assign::assign_paths;
use crate::bnb::{solve_milp_observed, MilpStatus, SolveParams};
use crate::export::{itinerary_table, plan_dots, scenario_dot};
use crate::generate::{random_scenario, BENCH_SIZES};
use crate::model::{build_model, write_lp, MipModel};
use crate::oracle::{oracle_solve_with, OracleError, OracleParams, DEFAULT_CAP};
use crate::scenario::{Ablation, Scenario, ScenarioFile};
use crate::solution::{SolutionFile, Solver};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_LIMIT: i32 = 4;
pub const EXIT_CAP: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "teamplan", version, about = "Optimal routing for robot teams on dynamic topological graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output file (or directory for per-step exports).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Relative optimality gap at which the search stops.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub gap: f64,
    /// Wall-clock limit in seconds.
    #[arg(long, global = true, default_value_t = 60.0)]
    pub time_limit: f64,
    #[arg(long, global = true)]
    pub node_limit: Option<u64>,
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Drop every overwatch opportunity.
    #[arg(long, global = true)]
    pub no_overwatch: bool,
    /// Reset every edge to a = 1, m = 0.
    #[arg(long, global = true)]
    pub no_vulnerability: bool,
    /// Set every teaming reward r to 0.
    #[arg(long, global = true)]
    pub no_teaming: bool,
    #[arg(long, short, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a scenario file against every model precondition.
    Validate { scenario: PathBuf },
    /// Solve with branch and bound and write the solution JSON.
    Solve {
        scenario: PathBuf,
        /// Also write the model in LP format.
        #[arg(long)]
        lp: Option<PathBuf>,
    },
    /// Solve exhaustively over team states (small instances only).
    Oracle {
        scenario: PathBuf,
        /// Largest allowed `n_T * C(n_A + n_L - 1, n_A)`.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u64,
    },
    /// Recompute per-robot itineraries from a solution's occupancy.
    Assign { scenario: PathBuf, solution: PathBuf },
    /// Write Graphviz DOT: the scenario, or one file per step of a solution.
    Export {
        scenario: PathBuf,
        #[arg(long)]
        solution: Option<PathBuf>,
    },
    /// Solve random instances of the four benchmark sizes.
    Bench {
        #[arg(long, default_value_t = 10)]
        agents: u32,
        /// Instances per size.
        #[arg(long, default_value_t = 1)]
        instances: u64,
    },
}

impl Common {
    fn ablation(&self) -> Ablation {
        Ablation {
            no_overwatch: self.no_overwatch,
            no_vulnerability: self.no_vulnerability,
            no_teaming: self.no_teaming,
        }
    }

    fn params(&self) -> SolveParams {
        SolveParams {
            gap_tolerance: self.gap,
            node_limit: self.node_limit.unwrap_or(u64::MAX),
            time_limit: Duration::from_secs_f64(self.time_limit.max(0.0)),
            threads: self.threads.max(1),
            seed: self.seed,
            ..SolveParams::default()
        }
    }
}

/// Console streams for one invocation.
pub struct Io<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, io: &mut Io<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = write!(if e.use_stderr() { &mut *io.err } else { &mut *io.out }, "{}", e.render());
            return code;
        }
    };
    match execute(&cli, io) {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(io.err, "error: {msg}");
            code
        }
    }
}

struct Failure(i32, String);

type Outcome = Result<i32, Failure>;

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure(EXIT_FAILURE, format!("cannot write {}: {e}", path.display()))
}

fn load(path: &Path, ablation: &Ablation) -> Result<Scenario, Failure> {
    crate::scenario::load_scenario(path)
        .map(|s| s.masked(ablation))
        .map_err(|e| Failure(EXIT_INVALID, e.to_string()))
}

fn model_for(scn: &Scenario) -> Result<MipModel, Failure> {
    build_model(scn).map_err(|e| Failure(EXIT_INVALID, e.to_string()))
}

fn emit(common: &Common, io: &mut Io<'_>, text: &str) -> Result<(), Failure> {
    match &common.out {
        Some(path) => std::fs::write(path, text).map_err(|e| io_failure(path, e)),
        None => io.out.write_all(text.as_bytes()).map_err(|e| Failure(EXIT_FAILURE, e.to_string())),
    }
}

fn status_code(status: MilpStatus) -> i32 {
    match status {
        // the requested gap is met, which is what the caller asked for
        MilpStatus::Optimal | MilpStatus::GapLimit => EXIT_OK,
        MilpStatus::Infeasible => EXIT_INFEASIBLE,
        MilpStatus::NodeLimit | MilpStatus::TimeLimit => EXIT_LIMIT,
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v}"))
}

fn summary(io: &mut Io<'_>, file: &SolutionFile) {
    let _ = writeln!(
        io.err,
        "{:?} objective {} bound {} gap {} columns {} nodes {} time {:.3}s",
        file.status,
        fmt_opt(file.objective),
        fmt_opt(file.bound),
        fmt_opt(file.gap),
        file.stats.columns.total,
        file.stats.nodes,
        file.stats.wall_time_s
    );
}

fn execute(cli: &Cli, io: &mut Io<'_>) -> Outcome {
    let common = &cli.common;
    match &cli.command {
        Command::Validate { scenario } => validate_cmd(scenario, io),
        Command::Solve { scenario, lp } => solve_cmd(common, scenario, lp.as_deref(), io),
        Command::Oracle { scenario, cap } => oracle_cmd(common, scenario, *cap, io),
        Command::Assign { scenario, solution } => assign_cmd(common, scenario, solution, io),
        Command::Export { scenario, solution } => export_cmd(common, scenario, solution.as_deref(), io),
        Command::Bench { agents, instances } => bench_cmd(common, *agents, *instances, io),
    }
}

fn validate_cmd(path: &Path, io: &mut Io<'_>) -> Outcome {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure(EXIT_INVALID, format!("cannot read {}: {e}", path.display())))?;
    let file = ScenarioFile::from_json(&text).map_err(|e| Failure(EXIT_INVALID, e.to_string()))?;
    match file.resolve().and_then(|scn| {
        let report = crate::scenario::validate(&scn);
        if report.is_ok() {
            Ok(scn)
        } else {
            Err(report)
        }
    }) {
        Ok(scn) => {
            let _ = writeln!(
                io.out,
                "ok: {} nodes, {} edges, {} overwatch opportunities, {} robots, {} steps",
                scn.n_nodes(),
                scn.n_edges(),
                scn.n_opportunities(),
                scn.n_agents,
                scn.n_timesteps
            );
            Ok(EXIT_OK)
        }
        Err(report) => {
            let _ = writeln!(io.out, "{report}");
            Ok(EXIT_INVALID)
        }
    }
}

fn solve_cmd(common: &Common, path: &Path, lp: Option<&Path>, io: &mut Io<'_>) -> Outcome {
    let scn = load(path, &common.ablation())?;
    let model = model_for(&scn)?;
    if let Some(lp) = lp {
        std::fs::write(lp, write_lp(&model)).map_err(|e| io_failure(lp, e))?;
    }
    let quiet = common.quiet;
    let mut last = Instant::now();
    let err = &mut *io.err;
    let sol = solve_milp_observed(&model, &common.params(), &mut |p| {
        if !quiet && last.elapsed() >= Duration::from_secs(1) {
            let _ = writeln!(err, "nodes {} bound {:.6} incumbent {:.6}", p.nodes, p.bound, p.incumbent);
            last = Instant::now();
        }
    })
    .map_err(|e| Failure(EXIT_FAILURE, e.to_string()))?;
    let file = SolutionFile::from_milp(&scn, &model, &sol).map_err(|e| Failure(EXIT_FAILURE, e.to_string()))?;
    emit(common, io, &file.to_json_pretty())?;
    if !quiet {
        summary(io, &file);
    }
    Ok(status_code(sol.status))
}

fn oracle_cmd(common: &Common, path: &Path, cap: u64, io: &mut Io<'_>) -> Outcome {
    let scn = load(path, &common.ablation())?;
    let model = model_for(&scn)?;
    let params = OracleParams {
        cap,
        threads: common.threads.max(1),
    };
    let t0 = Instant::now();
    let file = match oracle_solve_with(&scn, &params) {
        Ok(sol) => SolutionFile::from_oracle(&scn, &model, &sol, t0.elapsed())
            .map_err(|e| Failure(EXIT_FAILURE, e.to_string()))?,
        Err(OracleError::Infeasible) => SolutionFile::infeasible(&scn, &model, Solver::Oracle, t0.elapsed()),
        Err(e @ OracleError::CapExceeded { .. }) => return Err(Failure(EXIT_CAP, e.to_string())),
        Err(e) => return Err(Failure(EXIT_FAILURE, e.to_string())),
    };
    emit(common, io, &file.to_json_pretty())?;
    if !common.quiet {
        summary(io, &file);
    }
    Ok(status_code(file.status))
}

fn assign_cmd(common: &Common, path: &Path, solution: &Path, io: &mut Io<'_>) -> Outcome {
    let scn = load(path, &common.ablation())?;
    let mut file = SolutionFile::load(solution).map_err(|e| Failure(EXIT_INVALID, e.to_string()))?;
    let plan = file
        .plan(&scn)
        .map_err(|e| Failure(EXIT_INVALID, e.to_string()))?
        .ok_or_else(|| Failure(EXIT_INFEASIBLE, "solution holds no plan".to_string()))?;
    let robots = assign_paths(&plan, &scn).map_err(|e| Failure(EXIT_INVALID, e.to_string()))?;
    file.robots = robots
        .iter()
        .map(|r| r.locations.iter().map(|&l| scn.loc_index(l)).collect())
        .collect();
    match &common.out {
        Some(out) => std::fs::write(out, file.to_json_pretty()).map_err(|e| io_failure(out, e))?,
        None => {
            let _ = io.out.write_all(itinerary_table(&scn, &robots).as_bytes());
        }
    }
    Ok(EXIT_OK)
}

fn export_cmd(common: &Common, path: &Path, solution: Option<&Path>, io: &mut Io<'_>) -> Outcome {
    let scn = load(path, &common.ablation())?;
    let Some(solution) = solution else {
        emit(common, io, &scenario_dot(&scn))?;
        return Ok(EXIT_OK);
    };
    let dir = common
        .out
        .as_ref()
        .ok_or_else(|| Failure(EXIT_INVALID, "exporting a solution needs --out DIR".to_string()))?;
    let file = SolutionFile::load(solution).map_err(|e| Failure(EXIT_INVALID, e.to_string()))?;
    let plan = file
        .plan(&scn)
        .map_err(|e| Failure(EXIT_INVALID, e.to_string()))?
        .ok_or_else(|| Failure(EXIT_INFEASIBLE, "solution holds no plan".to_string()))?;
    std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    let scenario_path = dir.join("scenario.dot");
    std::fs::write(&scenario_path, scenario_dot(&scn)).map_err(|e| io_failure(&scenario_path, e))?;
    let dots = plan_dots(&scn, &plan);
    let width = dots.len().to_string().len().max(2);
    for (i, dot) in dots.iter().enumerate() {
        let p = dir.join(format!("step_{:0width$}.dot", i + 1));
        std::fs::write(&p, dot).map_err(|e| io_failure(&p, e))?;
    }
    if !common.quiet {
        let _ = writeln!(io.err, "wrote {} step files to {}", dots.len(), dir.display());
    }
    Ok(EXIT_OK)
}

fn bench_cmd(common: &Common, agents: u32, instances: u64, io: &mut Io<'_>) -> Outcome {
    let params = common.params();
    let mut table = String::from("size          n_L  n_E  n_O  n_T  columns  rows  seed  status      objective    nodes  time_s\n");
    let mut worst = EXIT_OK;
    for preset in BENCH_SIZES {
        for k in 0..instances {
            let seed = common.seed + k;
            let scn = random_scenario(&preset.config(agents), seed).masked(&common.ablation());
            let model = model_for(&scn)?;
            let sol = solve_milp_observed(&model, &params, &mut |_| {}).map_err(|e| Failure(EXIT_FAILURE, e.to_string()))?;
            let line = format!(
                "{:<12} {:>4} {:>4} {:>4} {:>4} {:>8} {:>5} {:>5}  {:<10} {:>10} {:>8} {:>7.3}\n",
                preset.name,
                scn.n_locations(),
                scn.n_edges(),
                scn.n_opportunities(),
                scn.n_timesteps,
                model.n_columns(),
                model.n_rows(),
                seed,
                format!("{:?}", sol.status),
                fmt_opt(sol.incumbent.as_ref().map(|_| sol.objective)),
                sol.nodes,
                sol.wall_time.as_secs_f64()
            );
            if !common.quiet {
                let _ = io.err.write_all(line.as_bytes());
            }
            table.push_str(&line);
            worst = worst.max(status_code(sol.status));
        }
    }
    emit(common, io, &table)?;
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(
            std::iter::once("teamplan").chain(args.iter().copied()),
            &mut Io { out: &mut out, err: &mut err },
        );
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn unknown_command_is_invalid_input() {
        assert_eq!(run_args(&["frobnicate"]).0, EXIT_INVALID);
    }

    #[test]
    fn help_is_success() {
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("validate"));
    }

    #[test]
    fn missing_file_is_invalid_input() {
        let (code, _, err) = run_args(&["validate", "/nonexistent/scenario.json"]);
        assert_eq!(code, EXIT_INVALID);
        assert!(err.contains("cannot read"));
    }
}

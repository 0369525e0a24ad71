//! Command-line driver: solve, sweep, validate and poles subcommands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::cases;
use crate::config::{ConfigError, RunConfig};
use crate::contour;
use crate::solution::FieldGrid;
use crate::solver::{self, PoleRecord, PoleSource, RowWeighting, SolveReport};
use crate::stokes_system::Functional;
use crate::validation::{Suite, CRITERIA};
use crate::C64;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_ACCURACY: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "ratstokes", version, about = "Rational-function solver for bounded 2D Stokes flow")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one configuration and write report, field grid, poles and contour plot.
    Solve(RunArgs),
    /// Solve the constricted channel for several amplitudes and compare with lubrication theory.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated amplitudes; overrides the config's sweep values.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Run the acceptance criteria.
    Validate {
        /// Criteria to run (default: all).
        #[arg(long, value_delimiter = ',')]
        criteria: Option<Vec<u32>>,
        /// Write `validation.json` here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Compute lightning and AAA pole locations without solving.
    Poles(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, num_args = 2, value_names = ["NX", "NY"])]
    pub grid: Option<Vec<usize>>,
    /// Number of evenly spread contour levels (three near-extremum levels are always added).
    #[arg(long)]
    pub levels: Option<usize>,
    /// Required accuracy in digits; exit code 4 when missed.
    #[arg(long)]
    pub accuracy_target: Option<f64>,
    #[arg(long, value_enum)]
    pub weighting: Option<WeightingArg>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum WeightingArg {
    Uniform,
    Spacing,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Solver(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::Config(c) => Failure::Config(c.to_string()),
            crate::Error::Case(c) => Failure::Config(c.to_string()),
            other => Failure::Solver(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Solver(format!("cannot write output: {e}"))
    }
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(&args),
        Command::Sweep { run, values } => cmd_sweep(&run, values),
        Command::Validate { criteria, out_dir } => cmd_validate(criteria, out_dir.as_deref()),
        Command::Poles(args) => cmd_poles(&args),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            EXIT_CONFIG
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("solver failure: {msg}");
            EXIT_SOLVER
        }
    }
}

/// Loads the config and applies command-line overrides.
fn load_config(args: &RunArgs) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(g) = &args.grid {
        cfg.output.grid = [g[0], g[1]];
    }
    if let Some(l) = args.levels {
        cfg.output.levels = l;
    }
    if let Some(t) = args.accuracy_target {
        cfg.accuracy_target = Some(t);
    }
    if let Some(w) = args.weighting {
        cfg.solver.weighting = Some(match w {
            WeightingArg::Uniform => RowWeighting::Uniform,
            WeightingArg::Spacing => RowWeighting::Spacing,
        });
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct RunReport<'a> {
    config: &'a RunConfig,
    accuracy_target: Option<f64>,
    target_met: Option<bool>,
    #[serde(flatten)]
    solve: &'a SolveReport,
}

fn cmd_solve(args: &RunArgs) -> Result<i32, Failure> {
    let cfg = load_config(args)?;
    let problem = cfg.problem()?;
    let outcome = solver::solve_problem(&problem)?;
    let report = &outcome.report;
    let target_met = cfg.accuracy_target.map(|t| report.accuracy_digits >= t);

    let sol = &outcome.solution;
    let bbox = match cfg.output.bbox {
        Some([a, b, c, d]) => (a, b, c, d),
        None => sol.domain.bbox(),
    };
    let [nx, ny] = cfg.output.grid;
    let grid = sol.grid_eval(bbox, nx, ny);
    let outlines = outlines(&sol.domain);
    let scalar = contour::ScalarGrid::from_fields(&grid, Functional::Psi);
    let levels = scalar.range().map(|r| contour::default_levels(r, cfg.output.levels)).unwrap_or_default();

    fs::create_dir_all(&args.out_dir)?;
    let out = |name: &str| args.out_dir.join(name);
    let run_report = RunReport { config: &cfg, accuracy_target: cfg.accuracy_target, target_met, solve: report };
    fs::write(out(&cfg.output.report), to_json(&run_report)?)?;
    fs::write(out(&cfg.output.field_csv), grid_csv(&grid))?;
    fs::write(out(&cfg.output.poles_csv), poles_csv(&outcome.poles))?;
    fs::write(out(&cfg.output.psi_svg), contour::render_svg(&scalar, bbox, &levels, &outlines))?;

    println!(
        "{}: {:.2} digits (max boundary error {:.2e}), {} unknowns, {} samples, {:.2}s",
        report.name,
        report.accuracy_digits,
        report.boundary_residual.max,
        report.unknowns,
        report.sample_count,
        report.timings.total_s
    );
    if let Some(dp) = report.pressure_drop {
        println!("pressure drop {dp:.10}");
    }
    match (cfg.accuracy_target, target_met) {
        (Some(t), Some(false)) => {
            eprintln!("accuracy target {t} digits missed ({:.2} digits)", report.accuracy_digits);
            Ok(EXIT_ACCURACY)
        }
        _ => Ok(EXIT_OK),
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value).map(|s| s + "\n").map_err(|e| Failure::Solver(e.to_string()))
}

fn outlines(domain: &crate::Domain) -> Vec<Vec<C64>> {
    std::iter::once(domain.outer_polyline().to_vec()).chain(domain.hole_polylines().iter().cloned()).collect()
}

/// CSV with columns `x,y,mask,psi,u,v,p,omega`; `mask` is 1 outside the fluid.
pub fn grid_csv(grid: &FieldGrid) -> String {
    let mut s = String::from("x,y,mask,psi,u,v,p,omega\n");
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (x, y) = (grid.xs[i], grid.ys[j]);
            match grid.at(i, j) {
                Some(f) => {
                    let _ = writeln!(s, "{x},{y},0,{},{},{},{},{}", f.psi, f.u, f.v, f.p, f.omega);
                }
                None => {
                    let _ = writeln!(s, "{x},{y},1,,,,,");
                }
            }
        }
    }
    s
}

/// CSV with columns `x,y,source,group`.
pub fn poles_csv(poles: &[PoleRecord]) -> String {
    let mut s = String::from("x,y,source,group\n");
    for p in poles {
        let source = match p.source {
            PoleSource::Lightning => "lightning",
            PoleSource::Aaa => "aaa",
        };
        let _ = writeln!(s, "{},{},{source},{}", p.z.x, p.z.y, p.group);
    }
    s
}

/// One row of the pressure-drop sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub dp_solver: f64,
    pub dp_elt: [f64; 3],
    pub accuracy_digits: f64,
}

impl SweepRow {
    pub fn relative_differences(&self) -> [f64; 3] {
        self.dp_elt.map(|e| (self.dp_solver - e).abs() / self.dp_solver.abs())
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(
        "lambda,dp_solver,dp_elt0,dp_elt2,dp_elt4,rel_diff_elt0,rel_diff_elt2,rel_diff_elt4,accuracy_digits\n",
    );
    for r in rows {
        let [e0, e2, e4] = r.dp_elt;
        let [r0, r2, r4] = r.relative_differences();
        let _ = writeln!(s, "{},{},{e0},{e2},{e4},{r0},{r2},{r4},{}", r.lambda, r.dp_solver, r.accuracy_digits);
    }
    s
}

/// Solves the channel at each amplitude in parallel.
pub fn run_sweep(cfg: &RunConfig, values: &[f64]) -> Result<Vec<SweepRow>, crate::Error> {
    if cfg.case.as_deref() != Some("constricted-channel") {
        return Err(ConfigError::Invalid("sweeps need the constricted-channel case".into()).into());
    }
    let delta = cfg.params.delta.unwrap_or(1.0);
    let problems = values.iter().map(|&l| cfg.problem_with_lambda(Some(l))).collect::<Result<Vec<_>, _>>()?;
    problems
        .par_iter()
        .zip(values.par_iter())
        .map(|(problem, &lambda)| {
            let out = solver::solve_problem(problem)?;
            let dp = out.report.pressure_drop.unwrap_or(f64::NAN);
            let mut dp_elt = [0.0; 3];
            for (slot, order) in dp_elt.iter_mut().zip([0, 2, 4]) {
                *slot = cases::elt_pressure_drop(lambda, delta, order)?;
            }
            Ok(SweepRow { lambda, dp_solver: dp, dp_elt, accuracy_digits: out.report.accuracy_digits })
        })
        .collect()
}

fn cmd_sweep(args: &RunArgs, values: Option<Vec<f64>>) -> Result<i32, Failure> {
    let cfg = load_config(args)?;
    let values = match values.or_else(|| cfg.sweep.as_ref().map(|s| s.values.clone())) {
        Some(v) if !v.is_empty() => v,
        _ => return Err(Failure::Config("no sweep values given".into())),
    };
    if let Some(bad) = values.iter().find(|l| !(0.0..1.0).contains(*l)) {
        return Err(Failure::Config(format!("lambda must lie in [0, 1), got {bad}")));
    }
    let rows = run_sweep(&cfg, &values)?;
    fs::create_dir_all(&args.out_dir)?;
    fs::write(args.out_dir.join(&cfg.output.sweep_csv), sweep_csv(&rows))?;
    for r in &rows {
        let [r0, r2, r4] = r.relative_differences();
        println!(
            "lambda {:.3}: dP {:.6}, vs ELT0/2/4 {:.2}% {:.2}% {:.2}%, {:.1} digits",
            r.lambda,
            r.dp_solver,
            100.0 * r0,
            100.0 * r2,
            100.0 * r4,
            r.accuracy_digits
        );
    }
    let worst = rows.iter().map(|r| r.accuracy_digits).fold(f64::INFINITY, f64::min);
    match cfg.accuracy_target {
        Some(t) if worst < t => Ok(EXIT_ACCURACY),
        _ => Ok(EXIT_OK),
    }
}

fn cmd_validate(criteria: Option<Vec<u32>>, out_dir: Option<&Path>) -> Result<i32, Failure> {
    let ids: Vec<u32> = criteria.unwrap_or_else(|| CRITERIA.iter().map(|c| c.0).collect());
    if let Some(bad) = ids.iter().find(|id| !CRITERIA.iter().any(|c| c.0 == **id)) {
        return Err(Failure::Config(format!("no criterion {bad}")));
    }
    let mut suite = Suite::new();
    let mut outcomes = Vec::new();
    for id in ids {
        let o = suite.run(id);
        println!("{o}");
        outcomes.push(o);
    }
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("validation.json"), to_json(&outcomes)?)?;
    }
    let failed = outcomes.iter().filter(|o| !o.passed && !o.advisory).count();
    println!("{} of {} criteria passed", outcomes.iter().filter(|o| o.passed).count(), outcomes.len());
    Ok(if failed == 0 { EXIT_OK } else { EXIT_ACCURACY })
}

fn cmd_poles(args: &RunArgs) -> Result<i32, Failure> {
    let cfg = load_config(args)?;
    let problem = cfg.problem()?;
    let mut poles = Vec::new();
    for (k, corner) in problem.domain.corners.iter().enumerate() {
        poles.extend(corner.poles().into_iter().map(|z| PoleRecord { z: z.into(), source: PoleSource::Lightning, group: k }));
    }
    let mut removed = 0;
    if let Some(opts) = &problem.aaa {
        let (kept, dropped, _) = solver::aaa_poles(&problem.domain, opts)?;
        removed = dropped;
        poles.extend(kept.into_iter().map(|z| PoleRecord { z: z.into(), source: PoleSource::Aaa, group: 0 }));
    }
    fs::create_dir_all(&args.out_dir)?;
    fs::write(args.out_dir.join(&cfg.output.poles_csv), poles_csv(&poles))?;
    let aaa = poles.iter().filter(|p| p.source == PoleSource::Aaa).count();
    println!("{} lightning poles, {aaa} AAA poles ({removed} discarded in the fluid)", poles.len() - aaa);
    Ok(EXIT_OK)
}

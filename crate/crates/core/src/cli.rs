//! Command-line harness: convergence studies, solver comparisons, spectrum
//! dumps and single solves. Every command produces CSV (or a solution file)
//! either on stdout or at `--out`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::krylov::{precond_spectrum, spectrum};
use crate::problems::{ManufacturedProblem, ProblemParams, ProblemPayload, Registry};
use crate::scheme1d::{max_error_1d, solve_1d, Discretization1D, Setup1D, Solution1D};
use crate::scheme2d::{max_error_2d, solve_2d, Discretization2D, Setup2D, Solution2D};
use crate::stepping::{parse_precond, SolverKind, SolverSettings};
use crate::structured::{CirculantKind, DenseForm, DenseMatrix, DEFAULT_DENSE_CAP};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_CAP: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Library(Error),
    Io(PathBuf, std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(..) => EXIT_CONFIG,
            CliError::Library(e) => library_exit_code(e),
        }
    }
}

fn library_exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter(_) | Error::UnknownProblem { .. } | Error::DimensionMismatch { .. } => EXIT_CONFIG,
        Error::CapExceeded { .. } => EXIT_CAP,
        Error::StepFailed { source, .. } => library_exit_code(source),
        _ => EXIT_SOLVER,
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Library(e) => write!(f, "{e}"),
            CliError::Io(path, e) => write!(f, "{}: {e}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Library(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    Space,
    Time,
    Distorder,
}

impl FromStr for Axis {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        <Axis as ValueEnum>::from_str(s, true).map_err(|_| CliError::Config(format!("unknown axis {s:?}")))
    }
}

/// Everything a command needs. Built from defaults, then a config file,
/// then command-line flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: String,
    pub beta: f64,
    pub gamma: f64,
    pub diffusion: f64,
    pub final_time: f64,
    pub length: f64,
    /// M in 1D, M̃ (both directions) in 2D.
    pub space_steps: usize,
    pub time_steps: usize,
    pub half_count: usize,
    pub solver: SolverKind,
    pub precond: Option<CirculantKind>,
    pub out: Option<PathBuf>,
    pub dense_cap: usize,
    pub levels: usize,
    pub axis: Axis,
    pub level: usize,
    pub history: bool,
    /// Krylov iteration cap per step; `None` means 10 × system size.
    pub max_iter: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: "example1".into(),
            beta: 1.5,
            gamma: 1.5,
            diffusion: 1.0,
            final_time: 1.5,
            length: 1.0,
            space_steps: 64,
            time_steps: 64,
            half_count: 10,
            solver: SolverKind::Pcg,
            precond: Some(CirculantKind::RChan),
            out: None,
            dense_cap: DEFAULT_DENSE_CAP,
            levels: 2,
            axis: Axis::Space,
            level: 1,
            history: false,
            max_iter: None,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("invalid value {value:?} for {key}")))
}

fn parse_bool(key: &str, value: &str) -> CliResult<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(CliError::Config(format!("invalid boolean {value:?} for {key}"))),
    }
}

impl RunConfig {
    /// Applies one `key = value` setting. Keys match the long flag names.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        match key {
            "problem" => self.problem = value.to_string(),
            "beta" => self.beta = parse_value(key, value)?,
            "gamma" => self.gamma = parse_value(key, value)?,
            "K" => self.diffusion = parse_value(key, value)?,
            "T" => self.final_time = parse_value(key, value)?,
            "L" => self.length = parse_value(key, value)?,
            "M" => self.space_steps = parse_value(key, value)?,
            "N" => self.time_steps = parse_value(key, value)?,
            "J" => self.half_count = parse_value(key, value)?,
            "solver" => self.solver = value.parse().map_err(|e: Error| CliError::Config(e.to_string()))?,
            "precond" => self.precond = parse_precond(value).map_err(|e| CliError::Config(e.to_string()))?,
            "out" => self.out = Some(PathBuf::from(value)),
            "dense-cap" | "dense_cap" => self.dense_cap = parse_value(key, value)?,
            "levels" => self.levels = parse_value(key, value)?,
            "axis" => self.axis = value.parse()?,
            "level" => self.level = parse_value(key, value)?,
            "history" => self.history = parse_bool(key, value)?,
            "max-iter" | "max_iter" => self.max_iter = Some(parse_value(key, value)?),
            _ => return Err(CliError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Parses a flat `key = value` file; `#` starts a comment.
    pub fn apply_config_text(&mut self, text: &str) -> CliResult<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| CliError::Config(format!("line {}: {}", lineno + 1, strip_prefix(&e))))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        let mut cfg = Self::default();
        cfg.apply_config_text(&text)?;
        Ok(cfg)
    }

    pub fn solver_settings(&self) -> SolverSettings {
        SolverSettings {
            kind: self.solver,
            precond: self.precond,
            dense_cap: self.dense_cap,
            max_iter: self.max_iter,
            ..SolverSettings::default()
        }
    }

    pub fn problem_params(&self) -> ProblemParams {
        ProblemParams {
            beta: self.beta,
            gamma: self.gamma,
            final_time: self.final_time,
            diffusion: self.diffusion,
            length: self.length,
        }
    }

    pub fn build_problem(&self) -> CliResult<ManufacturedProblem> {
        Ok(Registry::default().lookup(&self.problem, &self.problem_params())?)
    }
}

fn strip_prefix(e: &CliError) -> String {
    match e {
        CliError::Config(msg) => msg.clone(),
        other => other.to_string(),
    }
}

/// Result of one solve in either dimension.
#[derive(Debug, Clone)]
pub enum RunOutput {
    OneD(Solution1D),
    TwoD(Solution2D),
}

impl RunOutput {
    pub fn solve_seconds(&self) -> f64 {
        match self {
            RunOutput::OneD(s) => s.solve_seconds,
            RunOutput::TwoD(s) => s.solve_seconds,
        }
    }

    pub fn average_iterations(&self) -> f64 {
        match self {
            RunOutput::OneD(s) => s.average_iterations(),
            RunOutput::TwoD(s) => s.average_iterations(),
        }
    }
}

/// Solves `problem` with the grid sizes in `cfg` and the given solver.
pub fn run_solve(problem: &ManufacturedProblem, cfg: &RunConfig, settings: SolverSettings) -> CliResult<RunOutput> {
    Ok(match &problem.payload {
        ProblemPayload::OneD(p) => {
            let d = Discretization1D::new(cfg.space_steps, cfg.time_steps, cfg.half_count).with_solver(settings);
            RunOutput::OneD(solve_1d(p, &d)?)
        }
        ProblemPayload::TwoD(p) => {
            let d = Discretization2D::square(cfg.space_steps, cfg.time_steps, cfg.half_count).with_solver(settings);
            RunOutput::TwoD(solve_2d(p, &d)?)
        }
    })
}

/// Maximum error over all nodes and levels; errors if no exact solution.
pub fn run_error(problem: &ManufacturedProblem, output: &RunOutput) -> CliResult<f64> {
    match (&problem.payload, output) {
        (ProblemPayload::OneD(p), RunOutput::OneD(s)) => p
            .exact
            .as_deref()
            .map(|u| max_error_1d(s, u))
            .ok_or_else(|| missing_exact(problem)),
        (ProblemPayload::TwoD(p), RunOutput::TwoD(s)) => p
            .exact
            .as_deref()
            .map(|u| max_error_2d(s, u))
            .ok_or_else(|| missing_exact(problem)),
        _ => Err(CliError::Config("problem and solution dimensions differ".into())),
    }
}

fn missing_exact(problem: &ManufacturedProblem) -> CliError {
    CliError::Config(format!("problem {:?} has no exact solution", problem.name))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub param: usize,
    pub error: f64,
    pub rate: Option<f64>,
}

/// Doubles M, N or J `levels` times starting from the configured value,
/// holding the other two fixed.
pub fn cmd_converge(cfg: &RunConfig, axis: Axis, levels: usize) -> CliResult<Vec<ConvergenceRow>> {
    let problem = cfg.build_problem()?;
    if !problem.has_exact() {
        return Err(missing_exact(&problem));
    }
    let settings = cfg.solver_settings();
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels + 1);
    let mut run = cfg.clone();
    for step in 0..=levels {
        if step > 0 {
            match axis {
                Axis::Space => run.space_steps *= 2,
                Axis::Time => run.time_steps *= 2,
                Axis::Distorder => run.half_count *= 2,
            }
        }
        let output = run_solve(&problem, &run, settings)?;
        let error = run_error(&problem, &output)?;
        let param = match axis {
            Axis::Space => run.space_steps,
            Axis::Time => run.time_steps,
            Axis::Distorder => run.half_count,
        };
        let rate = rows.last().map(|prev| (prev.error / error).log2());
        rows.push(ConvergenceRow { param, error, rate });
    }
    Ok(rows)
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("param,error,rate\n");
    for r in rows {
        match r.rate {
            Some(rate) => writeln!(out, "{},{},{}", r.param, r.error, rate),
            None => writeln!(out, "{},{},", r.param, r.error),
        }
        .expect("writing to a String cannot fail");
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub method: String,
    /// `None` when the method was skipped.
    pub cpu_seconds: Option<f64>,
    pub avg_iters: Option<f64>,
}

/// Runs Cholesky (when within the dense cap), CG and PCG with each
/// circulant preconditioner on the same problem.
pub fn cmd_compare(cfg: &RunConfig) -> CliResult<Vec<CompareRow>> {
    let problem = cfg.build_problem()?;
    let base = cfg.solver_settings();
    let mut methods = vec![
        SolverSettings {
            kind: SolverKind::Cholesky,
            precond: None,
            ..base
        },
        SolverSettings {
            kind: SolverKind::Cg,
            precond: None,
            ..base
        },
    ];
    for kind in CirculantKind::ALL {
        methods.push(SolverSettings {
            kind: SolverKind::Pcg,
            precond: Some(kind),
            ..base
        });
    }
    let dim = interior_dim(&problem, cfg.space_steps);
    let mut rows = Vec::with_capacity(methods.len());
    for settings in methods {
        if settings.kind == SolverKind::Cholesky && dim > settings.dense_cap {
            rows.push(CompareRow {
                method: "cholesky-skipped".into(),
                cpu_seconds: None,
                avg_iters: None,
            });
            continue;
        }
        let output = run_solve(&problem, cfg, settings)?;
        rows.push(CompareRow {
            method: settings.label(),
            cpu_seconds: Some(output.solve_seconds()),
            avg_iters: Some(output.average_iterations()),
        });
    }
    Ok(rows)
}

fn interior_dim(problem: &ManufacturedProblem, space_steps: usize) -> usize {
    let n = space_steps.saturating_sub(1);
    match problem.dimension() {
        1 => n,
        _ => n * n,
    }
}

pub fn compare_csv(rows: &[CompareRow]) -> String {
    let mut out = String::from("method,cpu_seconds,avg_iters\n");
    for r in rows {
        let secs = r.cpu_seconds.map(|v| v.to_string()).unwrap_or_default();
        let iters = r.avg_iters.map(|v| v.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{}", r.method, secs, iters).expect("writing to a String cannot fail");
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    Original,
    Preconditioned,
}

impl SpectrumKind {
    pub fn name(self) -> &'static str {
        match self {
            SpectrumKind::Original => "original",
            SpectrumKind::Preconditioned => "preconditioned",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumDump {
    pub original: Vec<f64>,
    pub preconditioned: Vec<f64>,
}

/// Eigenvalues of the system matrix at time level `level` and of the same
/// matrix preconditioned by the configured circulant (identity if none).
pub fn cmd_spectrum(cfg: &RunConfig, level: usize) -> CliResult<SpectrumDump> {
    if level == 0 {
        return Err(CliError::Config("time level must be at least 1".into()));
    }
    let problem = cfg.build_problem()?;
    let cap = cfg.dense_cap;
    let (a, p): (DenseMatrix, DenseMatrix) = match &problem.payload {
        ProblemPayload::OneD(prob) => {
            let d = Discretization1D::new(cfg.space_steps, cfg.time_steps, cfg.half_count);
            let setup = Setup1D::new(prob, &d)?;
            let a = setup.system(prob, level).to_dense(cap)?;
            let p = match cfg.precond {
                Some(kind) => setup.preconditioner(prob, level, kind)?.to_dense(cap)?,
                None => DenseMatrix::identity(a.size()),
            };
            (a, p)
        }
        ProblemPayload::TwoD(prob) => {
            let d = Discretization2D::square(cfg.space_steps, cfg.time_steps, cfg.half_count);
            let setup = Setup2D::new(prob, &d)?;
            let a = setup.system(level).to_dense(cap)?;
            let p = match cfg.precond {
                Some(kind) => setup.preconditioner(level, kind)?.to_dense(cap)?,
                None => DenseMatrix::identity(a.size()),
            };
            (a, p)
        }
    };
    Ok(SpectrumDump {
        original: spectrum(&a)?,
        preconditioned: precond_spectrum(&a, &p)?,
    })
}

pub fn spectrum_csv(dump: &SpectrumDump) -> String {
    let mut out = String::from("index,eigenvalue,kind\n");
    for (values, kind) in [
        (&dump.original, SpectrumKind::Original),
        (&dump.preconditioned, SpectrumKind::Preconditioned),
    ] {
        for (i, v) in values.iter().enumerate() {
            writeln!(out, "{},{},{}", i, v, kind.name()).expect("writing to a String cannot fail");
        }
    }
    out
}

/// A solution file: `# key = value` metadata lines, a CSV header and rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFile {
    pub meta: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl SolutionFile {
    pub fn meta_f64(&self, key: &str) -> Option<f64> {
        self.meta.get(key).and_then(|v| v.parse().ok())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            writeln!(out, "# {k} = {v}").expect("writing to a String cannot fail");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut meta = BTreeMap::new();
        let mut columns = None;
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.split_once('=') {
                    meta.insert(k.trim().to_string(), v.trim().to_string());
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            if columns.is_none() {
                columns = Some(line.split(',').map(str::to_string).collect::<Vec<_>>());
                continue;
            }
            let row = line
                .split(',')
                .map(|c| c.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Config(format!("solution file line {}: {e}", lineno + 1)))?;
            rows.push(row);
        }
        let columns = columns.ok_or_else(|| CliError::Config("solution file has no header row".into()))?;
        if let Some(bad) = rows.iter().position(|r| r.len() != columns.len()) {
            return Err(CliError::Config(format!("solution file row {bad} has the wrong width")));
        }
        Ok(Self { meta, columns, rows })
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        Self::parse(&text)
    }
}

/// Runs one solve and packages the final field (or the whole history).
pub fn cmd_solve(cfg: &RunConfig) -> CliResult<SolutionFile> {
    let problem = cfg.build_problem()?;
    let output = run_solve(&problem, cfg, cfg.solver_settings())?;
    let mut meta = BTreeMap::new();
    meta.insert("problem".to_string(), problem.name.clone());
    meta.insert("dimension".to_string(), problem.dimension().to_string());
    meta.insert("beta".to_string(), cfg.beta.to_string());
    if problem.dimension() == 2 {
        meta.insert("gamma".to_string(), cfg.gamma.to_string());
    }
    meta.insert("T".to_string(), cfg.final_time.to_string());
    meta.insert("M".to_string(), cfg.space_steps.to_string());
    meta.insert("N".to_string(), cfg.time_steps.to_string());
    meta.insert("J".to_string(), cfg.half_count.to_string());
    meta.insert("solver".to_string(), cfg.solver_settings().label());
    meta.insert("avg_iters".to_string(), output.average_iterations().to_string());
    if let Ok(err) = run_error(&problem, &output) {
        meta.insert("max_error".to_string(), err.to_string());
    }
    let levels = |n: usize| if cfg.history { 0..=n } else { n..=n };
    let (columns, rows) = match &output {
        RunOutput::OneD(s) => {
            meta.insert("sigma".to_string(), s.sigma.to_string());
            meta.insert("chat0_first".to_string(), s.leading_coefficients[0].to_string());
            meta.insert("chat0_rest".to_string(), s.leading_coefficients[1].to_string());
            let mut rows = Vec::new();
            for n in levels(cfg.time_steps) {
                let t = n as f64 * s.tau;
                for (i, &u) in s.history[n].iter().enumerate() {
                    rows.push(vec![t, i as f64 * s.h, u]);
                }
            }
            (vec!["t", "x", "u"], rows)
        }
        RunOutput::TwoD(s) => {
            meta.insert("sigma".to_string(), s.sigma.to_string());
            meta.insert("chat0_first".to_string(), s.leading_coefficients[0].to_string());
            meta.insert("chat0_rest".to_string(), s.leading_coefficients[1].to_string());
            let [mx, my] = s.space_steps;
            let mut rows = Vec::new();
            for n in levels(cfg.time_steps) {
                let t = n as f64 * s.tau;
                for j in 0..=my {
                    for i in 0..=mx {
                        rows.push(vec![t, i as f64 * s.h[0], j as f64 * s.h[1], s.value(n, i, j)]);
                    }
                }
            }
            (vec!["t", "x", "y", "u"], rows)
        }
    };
    Ok(SolutionFile {
        meta,
        columns: columns.into_iter().map(str::to_string).collect(),
        rows,
    })
}

#[derive(Debug, Parser)]
#[command(name = "fracdiff", version, about = "Distributed-order Riesz space fractional diffusion solvers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Refine one of h, τ, Δα and report errors and observed orders.
    Converge(RunArgs),
    /// Time Cholesky, CG and PCG with each preconditioner.
    Compare(RunArgs),
    /// Dump eigenvalues of the system and preconditioned matrices.
    Spectrum(RunArgs),
    /// Run one solve and write the field.
    Solve(RunArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Registered problem name (example1, example2, zero1d, zero2d).
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Diffusion coefficient.
    #[arg(long = "K")]
    pub diffusion: Option<f64>,
    /// Domain length.
    #[arg(long = "L")]
    pub length: Option<f64>,
    /// Space intervals (per direction in 2D).
    #[arg(long = "M")]
    pub space_steps: Option<usize>,
    /// Time steps.
    #[arg(long = "N")]
    pub time_steps: Option<usize>,
    /// Half the number of α intervals.
    #[arg(long = "J")]
    pub half_count: Option<usize>,
    /// Final time.
    #[arg(long = "T")]
    pub final_time: Option<f64>,
    /// cholesky, cg or pcg.
    #[arg(long)]
    pub solver: Option<String>,
    /// strang, tchan, rchan or none.
    #[arg(long)]
    pub precond: Option<String>,
    /// Number of refinements for `converge`.
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long, value_enum)]
    pub axis: Option<Axis>,
    /// Time level of the system for `spectrum` (1 or 2; higher levels equal 2).
    #[arg(long)]
    pub level: Option<usize>,
    /// Write every time level in `solve`, not just the last.
    #[arg(long)]
    pub history: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "dense-cap")]
    pub dense_cap: Option<usize>,
    /// Krylov iteration cap per time step.
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
}

impl RunArgs {
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.problem {
            cfg.problem = v.clone();
        }
        if let Some(v) = self.beta {
            cfg.beta = v;
        }
        if let Some(v) = self.gamma {
            cfg.gamma = v;
        }
        if let Some(v) = self.diffusion {
            cfg.diffusion = v;
        }
        if let Some(v) = self.length {
            cfg.length = v;
        }
        if let Some(v) = self.space_steps {
            cfg.space_steps = v;
        }
        if let Some(v) = self.time_steps {
            cfg.time_steps = v;
        }
        if let Some(v) = self.half_count {
            cfg.half_count = v;
        }
        if let Some(v) = self.final_time {
            cfg.final_time = v;
        }
        if let Some(v) = &self.solver {
            cfg.set("solver", v)?;
        }
        if let Some(v) = &self.precond {
            cfg.set("precond", v)?;
        }
        if let Some(v) = self.levels {
            cfg.levels = v;
        }
        if let Some(v) = self.axis {
            cfg.axis = v;
        }
        if let Some(v) = self.level {
            cfg.level = v;
        }
        if self.history {
            cfg.history = true;
        }
        if let Some(v) = &self.out {
            cfg.out = Some(v.clone());
        }
        if let Some(v) = self.dense_cap {
            cfg.dense_cap = v;
        }
        if let Some(v) = self.max_iter {
            cfg.max_iter = Some(v);
        }
        Ok(cfg)
    }
}

fn emit(cfg: &RunConfig, text: &str) -> CliResult<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(path.clone(), e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn execute(command: &Command) -> CliResult<()> {
    match command {
        Command::Converge(args) => {
            let cfg = args.resolve()?;
            let rows = cmd_converge(&cfg, cfg.axis, cfg.levels)?;
            emit(&cfg, &convergence_csv(&rows))
        }
        Command::Compare(args) => {
            let cfg = args.resolve()?;
            let rows = cmd_compare(&cfg)?;
            if rows.iter().any(|r| r.cpu_seconds.is_none()) {
                eprintln!("note: cholesky skipped, system size exceeds dense cap {}", cfg.dense_cap);
            }
            emit(&cfg, &compare_csv(&rows))
        }
        Command::Spectrum(args) => {
            let cfg = args.resolve()?;
            let dump = cmd_spectrum(&cfg, cfg.level)?;
            emit(&cfg, &spectrum_csv(&dump))
        }
        Command::Solve(args) => {
            let cfg = args.resolve()?;
            let file = cmd_solve(&cfg)?;
            emit(&cfg, &file.to_text())
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

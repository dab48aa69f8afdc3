//! Pipelines behind each command, output layout and the run index.

use std::fmt;
use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime};

use nls_core::assembly::{assemble_form_with, AssemblyOptions, SparseForm};
use nls_core::diagnostics::{
    dichotomy_sweep_with_progress, hardy_check, loglog_slope, ratio_certificate, sss_table, super_poincare_profile, PoincareOptions, RatioOptions, SweepSpec,
    SweepStage, TestProfile,
};
use nls_core::grid::{BoundaryMode, GridSpec};
use nls_core::spectral::{smallest_eigs_with, EigOptions};
use nls_core::weights::build_v_lambda;
use nls_core::Error;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::formats::{num, write_csv, write_eigenvectors, write_matrix_market};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Assemble,
    Eigs,
    Ratio,
    Sss,
    Poincare,
    Sweep,
}

impl Command {
    pub const ALL: [Command; 6] = [Command::Assemble, Command::Eigs, Command::Ratio, Command::Sss, Command::Poincare, Command::Sweep];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Assemble => "assemble",
            Command::Eigs => "eigs",
            Command::Ratio => "ratio",
            Command::Sss => "sss",
            Command::Poincare => "poincare",
            Command::Sweep => "sweep",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exit {
    Success,
    Validation,
    Budget,
    CertificateFailed,
    Internal,
}

impl Exit {
    pub fn code(self) -> i32 {
        match self {
            Exit::Success => 0,
            Exit::Validation => 2,
            Exit::Budget => 3,
            Exit::CertificateFailed => 4,
            Exit::Internal => 5,
        }
    }

    pub fn of(e: &Error) -> Exit {
        match e {
            Error::InvalidSpec(_) | Error::DimensionMismatch { .. } | Error::OutOfBox { .. } | Error::NonIntegrable => Exit::Validation,
            Error::BudgetExceeded(_) => Exit::Budget,
            Error::CertificateFailed { .. } | Error::CertificateUnavailable(_) | Error::GrowthInsufficient { .. } | Error::DominationFailed { .. } => {
                Exit::CertificateFailed
            }
            _ => Exit::Internal,
        }
    }

    /// The more severe of two outcomes.
    fn worst(self, other: Exit) -> Exit {
        if other.code() > self.code() {
            other
        } else {
            self
        }
    }
}

/// Files written by a run, relative to the output root.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Outputs {
    pub report: Option<PathBuf>,
    pub tables: Vec<PathBuf>,
    pub matrices: Vec<PathBuf>,
}

/// One line of `index.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub record_id: String,
    pub config_hash: String,
    pub artifact_version: String,
    pub command: String,
    pub seed: u64,
    pub started: String,
    pub finished: String,
    pub outputs: Outputs,
    pub exit_status: i32,
    pub partial: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_root: PathBuf,
    /// Worker threads; the global pool when `None`.
    pub workers: Option<usize>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub record: RunRecord,
    pub exit: Exit,
    /// `out_root/<hash prefix>-<command>`.
    pub dir: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("output directory {} is locked by another run", .0.display())]
    Locked(PathBuf),
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("cannot build worker pool: {0}")]
    Pool(String),
}

struct Lock(PathBuf);

impl Lock {
    fn acquire(dir: &Path) -> Result<Lock, RunError> {
        let path = dir.join(".lock");
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
                Ok(Lock(path))
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(RunError::Locked(dir.to_path_buf())),
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for Lock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

struct Clock {
    start: Instant,
    limit: Option<f64>,
}

impl Clock {
    fn check(&self, stage: &str) -> nls_core::Result<()> {
        match self.limit {
            Some(l) if self.start.elapsed().as_secs_f64() > l => Err(Error::BudgetExceeded(format!("max_seconds = {l} exceeded before {stage}"))),
            _ => Ok(()),
        }
    }
}

/// Everything a pipeline produces before it is written out.
struct Ctx<'a> {
    cfg: &'a RunConfig,
    dir: &'a Path,
    root: &'a Path,
    clock: Clock,
    outputs: Outputs,
    /// Set when the pipeline finished but a requested certificate did not hold.
    verdict: Exit,
}

impl Ctx<'_> {
    fn table<R: AsRef<[String]>>(&mut self, name: &str, header: &[&str], rows: &[R]) -> io::Result<()> {
        let p = self.dir.join("tables").join(name);
        write_csv(&p, header, rows)?;
        self.outputs.tables.push(rel(self.root, &p));
        Ok(())
    }

    fn assembly_options(&self) -> AssemblyOptions {
        AssemblyOptions { max_n: self.cfg.budgets.max_n, max_nnz: self.cfg.budgets.max_nnz, ..AssemblyOptions::default() }
    }

    fn assemble(&mut self) -> nls_core::Result<SparseForm> {
        self.clock.check("assembly")?;
        assemble_form_with(&self.cfg.grid, &self.cfg.kernel, &self.cfg.weight, &self.assembly_options())
    }

    fn ratio_options(&self) -> RatioOptions {
        let r = &self.cfg.ratio;
        RatioOptions {
            c: r.c,
            delta: r.delta,
            r_max_factor: r.r_max_factor,
            radii: r.radii,
            directions: r.directions,
            radius_budget: r.radius_budget,
            tol: r.tol,
            seed: self.cfg.seed,
        }
    }
}

fn rel(root: &Path, p: &Path) -> PathBuf {
    p.strip_prefix(root).map(Path::to_path_buf).unwrap_or_else(|_| p.to_path_buf())
}

fn grid_json(g: &GridSpec) -> Value {
    serde_json::to_value(g).expect("grid serializes")
}

/// Failure inside a pipeline: the error plus whatever result was computed before it.
struct Failure {
    error: Error,
    partial: Value,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure { error, partial: Value::Null }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure { error: Error::Unsupported(format!("io: {e}")), partial: Value::Null }
    }
}

type Step = Result<Value, Failure>;

fn row_sum_ratio(a: &SparseForm) -> f64 {
    let m = &a.matrix;
    (0..m.n())
        .map(|i| {
            let (_, v) = m.row(i);
            let s: f64 = v.iter().sum();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                s.abs() / norm
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

fn assemble_step(ctx: &mut Ctx) -> Step {
    let a = ctx.assemble()?;
    let meta = json!({
        "config_hash": ctx.cfg.hash(),
        "grid": grid_json(&a.grid),
        "kernel": a.kernel,
        "weight": a.weight,
        "cell_volume": a.cell_volume(),
        "note": "entries A with f^T A f approximating E(f,f); eigenvalues of A / cell_volume",
    });
    let path = ctx.dir.join("matrices").join("form.mtx");
    write_matrix_market(&path, &a, &meta)?;
    ctx.outputs.matrices.push(rel(ctx.root, &path));
    let ratio = row_sum_ratio(&a);
    let restricted = a.mode() == BoundaryMode::Restricted;
    Ok(json!({
        "n": a.n(),
        "nnz": a.matrix.nnz(),
        "kernel": a.kernel,
        "weight": a.weight,
        "grid": grid_json(&a.grid),
        "symmetric": a.matrix.is_bitwise_symmetric(),
        "max_row_sum_ratio": ratio,
        "row_sums_zero": if restricted { Value::Bool(ratio <= 1e-12) } else { Value::Null },
        "gershgorin_bound": a.matrix.gershgorin(),
    }))
}

fn eigs_step(ctx: &mut Ctx) -> Step {
    let a = ctx.assemble()?;
    ctx.clock.check("eigensolver")?;
    let e = &ctx.cfg.eigs;
    let opts = EigOptions::new(e.k).with_tol(e.tol).with_path(e.path).with_seed(ctx.cfg.seed);
    let (spec, err) = match smallest_eigs_with(&a, &opts) {
        Ok(s) => (s, None),
        Err(Error::NoConvergence { iterations, partial }) => (*partial, Some(Error::NoConvergence { iterations, partial: Box::default() })),
        Err(e) => return Err(e.into()),
    };
    let rows: Vec<Vec<String>> =
        spec.eigenvalues.iter().zip(&spec.residual_norms).enumerate().map(|(i, (l, r))| vec![i.to_string(), num(*l), num(*r)]).collect();
    ctx.table("eigenvalues.csv", &["index", "eigenvalue", "relative_residual"], &rows)?;
    if e.save_vectors && !spec.eigenvectors.is_empty() {
        let path = ctx.dir.join("matrices").join("eigenvectors.bin");
        write_eigenvectors(&path, &spec.eigenvectors, &spec.eigenvalues, grid_json(&a.grid))?;
        ctx.outputs.matrices.push(rel(ctx.root, &path));
    }
    let v = json!({ "n": a.n(), "spectrum": spec });
    match err {
        None => Ok(v),
        Some(error) => Err(Failure { error, partial: v }),
    }
}

fn ratio_step(ctx: &mut Ctx) -> Step {
    ctx.clock.check("ratio certificate")?;
    let opts = ctx.ratio_options();
    let (cert, failure) = match ratio_certificate(&ctx.cfg.nu, &ctx.cfg.weight, &opts) {
        Ok(c) => (c, None),
        Err(Error::CertificateFailed { x_norm, ratio, certificate }) => {
            let c = (*certificate).clone();
            (c, Some(Error::CertificateFailed { x_norm, ratio, certificate }))
        }
        Err(e) => return Err(e.into()),
    };
    let mut out = json!({ "certificate": cert });
    if ctx.cfg.ratio.hardy_trials > 0 {
        let lambda = ctx.cfg.ratio.hardy_lambda.unwrap_or(cert.lambda);
        let vlam = build_v_lambda(lambda, &ctx.cfg.weight, opts.radius_budget, ctx.cfg.seed)?;
        let a = ctx.assemble()?;
        ctx.clock.check("hardy check")?;
        let profile = TestProfile::new(opts.delta)?;
        let h = hardy_check(&a, &profile, &ctx.cfg.nu, &vlam, ctx.cfg.ratio.hardy_trials, ctx.cfg.seed)?;
        let rows: Vec<Vec<String>> = h.margins.iter().zip(&h.tolerances).enumerate().map(|(i, (m, t))| vec![i.to_string(), num(*m), num(*t)]).collect();
        ctx.table("hardy.csv", &["trial", "margin", "tolerance"], &rows)?;
        if h.violations > 0 {
            ctx.verdict = ctx.verdict.worst(Exit::CertificateFailed);
        }
        out["hardy"] = json!({ "lambda": lambda, "r0": vlam.r0, "report": h });
    }
    match failure {
        None => Ok(out),
        Some(error) => Err(Failure { error, partial: out }),
    }
}

fn sss_rows(t: &[(f64, f64)]) -> Vec<Vec<String>> {
    t.iter().map(|(l, s)| vec![num(*l), num(*s)]).collect()
}

fn sss_step(ctx: &mut Ctx) -> Step {
    ctx.clock.check("scaling functional")?;
    let t = sss_table(&ctx.cfg.sss.ls, &ctx.cfg.kernel, &ctx.cfg.weight, ctx.cfg.sss.tol)?;
    ctx.table("sss.csv", &["l", "S"], &sss_rows(&t))?;
    Ok(json!({ "table": t, "loglog_slope": loglog_slope(&t) }))
}

fn poincare_step(ctx: &mut Ctx) -> Step {
    let a = ctx.assemble()?;
    ctx.clock.check("super Poincare profile")?;
    let opts = PoincareOptions { ratio: ctx.ratio_options(), trials: ctx.cfg.poincare.trials, seed: ctx.cfg.seed, ..PoincareOptions::default() };
    let p = &ctx.cfg.poincare;
    let entries = super_poincare_profile(&p.rs, &ctx.cfg.nu, &ctx.cfg.weight, &a, &p.psi, &opts)?;
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    let rows: Vec<Vec<String>> =
        entries.iter().map(|e| vec![num(e.r), opt(e.beta), opt(e.empirical_pass), e.constant_pass.map(|b| b.to_string()).unwrap_or_default()]).collect();
    ctx.table("beta.csv", &["r", "beta", "empirical_pass", "constant_pass"], &rows)?;
    let ok = entries.iter().all(|e| e.beta.is_some() && e.empirical_pass == Some(1.0) && e.constant_pass == Some(true));
    if !ok {
        ctx.verdict = ctx.verdict.worst(Exit::CertificateFailed);
    }
    Ok(json!({ "psi": p.psi, "entries": entries }))
}

fn sweep_step(ctx: &mut Ctx) -> Step {
    let cfg = ctx.cfg;
    let mut spec = SweepSpec::new(cfg.kernel.clone(), cfg.weight.clone(), cfg.sweep.ls.clone(), cfg.grid.h, cfg.sweep.level);
    spec.boundary_mode = cfg.grid.boundary_mode;
    spec.centers = cfg.sweep.centers.clone();
    spec.bump_width = cfg.sweep.bump_width;
    spec.sss_ls = cfg.sss.ls.clone();
    spec.sss_tol = cfg.sss.tol;
    spec.ratio = ctx.ratio_options();
    spec.assembly = ctx.assembly_options();
    spec.eig = EigOptions::new(1).with_tol(cfg.eigs.tol).with_path(cfg.eigs.path).with_seed(cfg.seed);
    let clock = &ctx.clock;
    let report = dichotomy_sweep_with_progress(&spec, &mut |stage| {
        let name = match stage {
            SweepStage::Box { half_width } => format!("box L = {half_width}"),
            SweepStage::ScalingFunctional => "scaling functional".into(),
            SweepStage::Certificate => "ratio certificate".into(),
        };
        clock.check(&name)
    })?;
    let weyl: Vec<Vec<String>> = report.weyl_counts.iter().map(|(l, c)| vec![num(*l), c.to_string()]).collect();
    ctx.table("weyl.csv", &["half_width", "count"], &weyl)?;
    ctx.table("sss.csv", &["l", "S"], &sss_rows(&report.sss_table))?;
    if !report.bump_quotients.is_empty() {
        let rows: Vec<Vec<String>> = report.bump_quotients.iter().map(|b| vec![num(b.half_width), num(b.center), num(b.quotient)]).collect();
        ctx.table("bumps.csv", &["half_width", "center", "quotient"], &rows)?;
    }
    Ok(serde_json::to_value(&report).expect("report serializes"))
}

fn now() -> String {
    humantime::format_rfc3339_seconds(SystemTime::now()).to_string()
}

/// Directory of `command` for `cfg`, relative to the output root.
pub fn run_dir_name(command: Command, cfg: &RunConfig) -> String {
    format!("{}-{}", cfg.short_hash(), command.as_str())
}

/// Execute `command` for `cfg`, write its outputs under `out_root/<hash prefix>-<command>` and
/// append the run record to `out_root/index.jsonl`.
pub fn run(command: Command, cfg: &RunConfig, opts: &RunOptions) -> Result<RunOutcome, RunError> {
    let root = opts.out_root.as_path();
    let dir = root.join(run_dir_name(command, cfg));
    fs::create_dir_all(dir.join("tables"))?;
    fs::create_dir_all(dir.join("matrices"))?;
    let _lock = Lock::acquire(&dir)?;
    let started = now();
    let mut ctx = Ctx {
        cfg,
        dir: &dir,
        root,
        clock: Clock { start: Instant::now(), limit: cfg.budgets.max_seconds },
        outputs: Outputs::default(),
        verdict: Exit::Success,
    };
    let exec = |ctx: &mut Ctx| match command {
        Command::Assemble => assemble_step(ctx),
        Command::Eigs => eigs_step(ctx),
        Command::Ratio => ratio_step(ctx),
        Command::Sss => sss_step(ctx),
        Command::Poincare => poincare_step(ctx),
        Command::Sweep => sweep_step(ctx),
    };
    let step = match opts.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| RunError::Pool(e.to_string()))?;
            pool.install(|| exec(&mut ctx))
        }
        None => exec(&mut ctx),
    };
    let (result, exit, error) = match step {
        Ok(v) => (v, ctx.verdict, None),
        Err(f) => (f.partial, ctx.verdict.worst(Exit::of(&f.error)), Some(f.error.to_string())),
    };
    // Outputs written before a budget or internal failure are incomplete.
    let partial = error.is_some() && exit != Exit::CertificateFailed;
    let status = match exit {
        Exit::Success => "ok",
        Exit::Validation => "validation_error",
        Exit::Budget => "budget_exceeded",
        Exit::CertificateFailed => "certificate_failed",
        Exit::Internal => "internal_error",
    };
    let report = json!({
        "schema_version": REPORT_SCHEMA_VERSION,
        "artifact_version": ARTIFACT_VERSION,
        "command": command.as_str(),
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
        "status": status,
        "partial": partial,
        "error": error,
        "result": result,
    });
    let report_path = dir.join("report.json");
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    fs::write(&report_path, text)?;
    ctx.outputs.report = Some(rel(root, &report_path));
    let record = RunRecord {
        record_id: cfg.record_id(),
        config_hash: cfg.hash(),
        artifact_version: ARTIFACT_VERSION.into(),
        command: command.as_str().into(),
        seed: cfg.seed,
        started,
        finished: now(),
        outputs: ctx.outputs,
        exit_status: exit.code(),
        partial,
        error,
    };
    append_record(root, &record)?;
    Ok(RunOutcome { record, exit, dir })
}

fn append_record(root: &Path, record: &RunRecord) -> io::Result<()> {
    let mut line = serde_json::to_string(record).map_err(io::Error::other)?;
    line.push('\n');
    let mut f = OpenOptions::new().create(true).append(true).open(root.join("index.jsonl"))?;
    // One write per record keeps concurrent appends line-atomic.
    f.write_all(line.as_bytes())
}

/// Parse `index.jsonl`.
pub fn read_index(root: &Path) -> io::Result<Vec<RunRecord>> {
    let text = match fs::read_to_string(root.join("index.jsonl")) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    text.lines().filter(|l| !l.trim().is_empty()).map(|l| serde_json::from_str(l).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))).collect()
}

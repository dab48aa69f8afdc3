//! Run configuration: JSON loading, validation located by JSON pointers, canonical hashing.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use nls_core::diagnostics::PsiSpec;
use nls_core::grid::GridSpec;
use nls_core::kernels::{JumpKernelSpec, LevyMeasureSpec};
use nls_core::spectral::SolverPath;
use nls_core::weights::{RadialProfile, WeightSpec};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

fn one() -> f64 {
    1.0
}

/// Weight `W` as written in a config file. Tables replace the power profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    #[serde(default)]
    pub p: f64,
    #[serde(default)]
    pub q: f64,
    #[serde(default = "one")]
    pub scale: f64,
    /// Two-column CSV `(radius, value)`, relative to the config file.
    #[serde(default)]
    pub u1_table: Option<PathBuf>,
    #[serde(default)]
    pub u2_table: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EigsConfig {
    pub k: usize,
    pub tol: f64,
    pub path: SolverPath,
    /// Write eigenvectors next to the report.
    pub save_vectors: bool,
}

impl Default for EigsConfig {
    fn default() -> Self {
        EigsConfig { k: 6, tol: 1e-8, path: SolverPath::Auto, save_vectors: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RatioConfig {
    pub c: f64,
    pub delta: f64,
    /// Outer sweep radius as a multiple of `R0`.
    pub r_max_factor: f64,
    pub radii: usize,
    pub directions: usize,
    pub radius_budget: f64,
    pub tol: f64,
    /// Random bumps for the Hardy check on the configured grid; 0 skips it.
    pub hardy_trials: usize,
    /// `λ` of the Hardy check; the certificate's `λ` when absent.
    pub hardy_lambda: Option<f64>,
}

impl Default for RatioConfig {
    fn default() -> Self {
        RatioConfig {
            c: 10.0,
            delta: 0.5,
            r_max_factor: 10.0,
            radii: 40,
            directions: 16,
            radius_budget: (1u64 << 20) as f64,
            tol: 1e-7,
            hardy_trials: 0,
            hardy_lambda: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SssConfig {
    pub ls: Vec<f64>,
    pub tol: f64,
}

impl Default for SssConfig {
    fn default() -> Self {
        SssConfig { ls: vec![8.0, 16.0, 32.0, 64.0], tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PoincareConfig {
    pub rs: Vec<f64>,
    pub psi: PsiSpec,
    pub trials: usize,
}

impl Default for PoincareConfig {
    fn default() -> Self {
        PoincareConfig { rs: vec![0.1, 1.0], psi: PsiSpec::Poly { theta: 1.0 }, trials: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub ls: Vec<f64>,
    /// Weyl-count level `Λ*`.
    pub level: f64,
    pub centers: Vec<f64>,
    pub bump_width: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { ls: vec![8.0, 16.0, 32.0], level: 10.0, centers: Vec::new(), bump_width: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Budgets {
    pub max_n: usize,
    pub max_nnz: usize,
    /// Wall-clock limit, checked between pipeline stages.
    pub max_seconds: Option<f64>,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { max_n: 1 << 18, max_nnz: 60_000_000, max_seconds: None }
    }
}

/// Where results go; excluded from the config hash.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub root: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kernel: JumpKernelSpec,
    #[serde(default)]
    nu: Option<LevyMeasureSpec>,
    weight: WeightConfig,
    grid: GridSpec,
    #[serde(default)]
    eigs: EigsConfig,
    #[serde(default)]
    ratio: RatioConfig,
    #[serde(default)]
    sss: SssConfig,
    #[serde(default)]
    poincare: PoincareConfig,
    #[serde(default)]
    sweep: SweepConfig,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    budgets: Budgets,
    #[serde(default)]
    output: OutputConfig,
}

/// Validated configuration. Tabulated profiles are loaded, so the hash covers their values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub kernel: JumpKernelSpec,
    /// Defaults to the unit truncation of `kernel`.
    pub nu: LevyMeasureSpec,
    pub weight: WeightSpec,
    pub grid: GridSpec,
    pub eigs: EigsConfig,
    pub ratio: RatioConfig,
    pub sss: SssConfig,
    pub poincare: PoincareConfig,
    pub sweep: SweepConfig,
    pub seed: u64,
    pub budgets: Budgets,
    #[serde(skip)]
    pub output: OutputConfig,
}

/// One validation problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub pointer: String,
    pub message: String,
}

impl Issue {
    fn new(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Issue { pointer: pointer.into(), message: message.into() }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = if self.pointer.is_empty() { "/" } else { &self.pointer };
        write!(f, "{p}: {}", self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{} validation error(s): {}", .0.len(), .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
    Validation(Vec<Issue>),
}

impl ConfigError {
    pub fn issues(&self) -> &[Issue] {
        match self {
            ConfigError::Validation(v) => v,
            _ => &[],
        }
    }
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => {
                out.push('/');
                out.push_str(&key.replace('~', "~0").replace('/', "~1"));
            }
            Segment::Enum { .. } | Segment::Unknown => {}
        }
    }
    out
}

/// Read and validate a config file, reporting every semantic problem at once.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_config(&text, path.parent().unwrap_or(Path::new(".")))
}

/// Parse config text; tables are resolved against `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<RunConfig, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse { line: e.line(), column: e.column(), message: e.to_string() })?;
    let raw: RawConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let pointer = pointer_of(e.path());
        ConfigError::Validation(vec![Issue::new(pointer, e.into_inner().to_string())])
    })?;
    resolve(raw, base)
}

fn load_table(path: &Path) -> Result<RadialProfile, String> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut radii = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        if rec.len() != 2 {
            return Err(format!("row {}: expected 2 columns, found {}", i + 1, rec.len()));
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(r), Ok(v)) => {
                radii.push(r);
                values.push(v);
            }
            // A header line.
            _ if i == 0 => {}
            _ => return Err(format!("row {}: non-numeric entry", i + 1)),
        }
    }
    RadialProfile::table(radii, values).map_err(|e| e.to_string())
}

fn check_positive(v: f64, pointer: &str, issues: &mut Vec<Issue>) {
    if !(v > 0.0 && v.is_finite()) {
        issues.push(Issue::new(pointer, format!("must be positive and finite, got {v}")));
    }
}

fn resolve(raw: RawConfig, base: &Path) -> Result<RunConfig, ConfigError> {
    let mut issues = Vec::new();
    for i in raw.kernel.issues() {
        let p = if i.pointer == "/dim" { i.pointer } else { format!("/variant{}", i.pointer) };
        issues.push(Issue::new(format!("/kernel{p}"), i.message));
    }
    let nu = raw.nu.clone().unwrap_or_else(|| raw.kernel.truncated());
    if raw.nu.is_some() {
        for i in nu.issues() {
            let p = if i.pointer == "/dim" { i.pointer } else { format!("/variant{}", i.pointer) };
            issues.push(Issue::new(format!("/nu{p}"), i.message));
        }
    }
    for (p, m) in raw.grid.issues() {
        issues.push(Issue::new(format!("/grid{p}"), m));
    }
    if raw.kernel.dim != raw.grid.d {
        issues.push(Issue::new("/kernel/dim", format!("kernel dimension {} differs from grid dimension {}", raw.kernel.dim, raw.grid.d)));
    }
    if nu.dim != raw.grid.d {
        issues.push(Issue::new("/nu/dim", format!("measure dimension {} differs from grid dimension {}", nu.dim, raw.grid.d)));
    }

    let w = &raw.weight;
    let alpha = raw.kernel.variant.min_alpha();
    let u1 = match &w.u1_table {
        Some(t) => load_table(&base.join(t)).map_err(|m| issues.push(Issue::new("/weight/u1_table", m))).ok(),
        None => {
            if !(w.p >= 0.0 && w.p.is_finite()) {
                issues.push(Issue::new("/weight/p", format!("p must be finite and nonnegative, got {}", w.p)));
            }
            Some(RadialProfile::power(w.p))
        }
    };
    let u2 = match &w.u2_table {
        Some(t) => load_table(&base.join(t)).map_err(|m| issues.push(Issue::new("/weight/u2_table", m))).ok(),
        None => {
            if !(w.q >= 0.0 && w.q.is_finite()) {
                issues.push(Issue::new("/weight/q", format!("q must be finite and nonnegative, got {}", w.q)));
            } else if alpha.is_finite() && !(w.q < alpha) {
                issues.push(Issue::new(
                    "/weight/q",
                    format!("q must satisfy q < alpha = {alpha} so that U2 growth (1+|x|)^q stays integrable against the kernel tail, got {}", w.q),
                ));
            }
            Some(RadialProfile::power(w.q))
        }
    };
    check_positive(w.scale, "/weight/scale", &mut issues);

    if raw.eigs.k == 0 {
        issues.push(Issue::new("/eigs/k", "k must be at least 1"));
    }
    check_positive(raw.eigs.tol, "/eigs/tol", &mut issues);

    let r = &raw.ratio;
    check_positive(r.c, "/ratio/c", &mut issues);
    if !(r.delta > 0.0 && r.delta < 1.0) {
        issues.push(Issue::new("/ratio/delta", format!("delta must lie in (0, 1), got {}", r.delta)));
    }
    if !(r.r_max_factor >= 1.0 && r.r_max_factor.is_finite()) {
        issues.push(Issue::new("/ratio/r_max_factor", format!("must be at least 1, got {}", r.r_max_factor)));
    }
    if r.radii < 2 {
        issues.push(Issue::new("/ratio/radii", "at least 2 sweep radii are needed"));
    }
    check_positive(r.radius_budget, "/ratio/radius_budget", &mut issues);
    check_positive(r.tol, "/ratio/tol", &mut issues);
    if let Some(l) = r.hardy_lambda {
        check_positive(l, "/ratio/hardy_lambda", &mut issues);
    }

    if raw.sss.ls.is_empty() {
        issues.push(Issue::new("/sss/ls", "at least one scale is needed"));
    }
    for (i, l) in raw.sss.ls.iter().enumerate() {
        if !(*l >= 1.0 && l.is_finite()) {
            issues.push(Issue::new(format!("/sss/ls/{i}"), format!("scales must be at least 1, got {l}")));
        }
    }
    check_positive(raw.sss.tol, "/sss/tol", &mut issues);

    for (i, v) in raw.poincare.rs.iter().enumerate() {
        check_positive(*v, &format!("/poincare/rs/{i}"), &mut issues);
    }
    for (p, m) in raw.poincare.psi.issues() {
        issues.push(Issue::new(format!("/poincare/psi{p}"), m));
    }

    if raw.sweep.ls.is_empty() {
        issues.push(Issue::new("/sweep/ls", "at least one box size is needed"));
    }
    let h_ok = raw.grid.h > 0.0 && raw.grid.h < 1.0;
    for (i, l) in raw.sweep.ls.iter().enumerate().filter(|_| h_ok) {
        let g = GridSpec { half_width: *l, ..raw.grid };
        for (p, m) in g.issues() {
            if p == "/half_width" {
                issues.push(Issue::new(format!("/sweep/ls/{i}"), m));
            }
        }
    }
    if !raw.sweep.level.is_finite() {
        issues.push(Issue::new("/sweep/level", "level must be finite"));
    }
    check_positive(raw.sweep.bump_width, "/sweep/bump_width", &mut issues);

    if raw.budgets.max_n == 0 {
        issues.push(Issue::new("/budgets/max_n", "must be positive"));
    }
    if raw.budgets.max_nnz == 0 {
        issues.push(Issue::new("/budgets/max_nnz", "must be positive"));
    }
    if let Some(s) = raw.budgets.max_seconds {
        check_positive(s, "/budgets/max_seconds", &mut issues);
    }

    if !issues.is_empty() {
        return Err(ConfigError::Validation(issues));
    }
    let mut weight = WeightSpec::new(u1.expect("checked"), u2.expect("checked"));
    weight.scale = w.scale;
    Ok(RunConfig {
        kernel: raw.kernel,
        nu,
        weight,
        grid: raw.grid,
        eigs: raw.eigs,
        ratio: raw.ratio,
        sss: raw.sss,
        poincare: raw.poincare,
        sweep: raw.sweep,
        seed: raw.seed,
        budgets: raw.budgets,
        output: raw.output,
    })
}

/// Compact JSON with object keys sorted at every level.
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_canonical(v, &mut out);
    out
}

fn write_canonical(v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_canonical(&map[k], out);
            }
            out.push('}');
        }
        Value::Array(items) => {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(x, out);
            }
            out.push(']');
        }
        other => out.push_str(&other.to_string()),
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunConfig {
    /// SHA-256 of the canonical JSON of every numerics-relevant field.
    pub fn hash(&self) -> String {
        let v = serde_json::to_value(self).expect("config serializes");
        sha256_hex(canonical_json(&v).as_bytes())
    }

    /// Output directory name: a prefix of [`RunConfig::hash`].
    pub fn short_hash(&self) -> String {
        self.hash()[..16].to_string()
    }

    /// Identity of a run record: shares the hash prefix, differs when output settings differ.
    pub fn record_id(&self) -> String {
        let out = serde_json::to_value(&self.output).expect("output serializes");
        let tail = sha256_hex(format!("{}{}", self.hash(), canonical_json(&out)).as_bytes());
        format!("{}-{}", self.short_hash(), &tail[..8])
    }
}

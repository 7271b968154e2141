//! Experiment configuration: a sectioned TOML file.
//!
//! ```toml
//! seed = 7
//!
//! [model]
//! id = "kuramoto"
//! params = { kappa = 1.0, freq_lo = -0.5, freq_hi = 0.5 }
//!
//! [sweep]
//! n = [128, 512]
//! replicates = 2
//! sparsity = { rule = "power", c = 1.0, gamma = 0.5 }
//!
//! [run]
//! horizon = 1.0
//! dt = 0.001
//! ```
//!
//! Every section but `model` is optional; unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sparsemf_core::dynamics::{DenseEvaluation, StepConfig};
use sparsemf_core::graph::ENUMERATION_CAP;
use sparsemf_core::model::{
    kuramoto_with, spatial_kuramoto, FourierAtom, FourierMeasure, InitialLaw, InteractionModel,
    Kernel, MediaLaw,
};

/// A configuration problem, located at a line of the source when possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        Self { line: None, message: message.into() }
    }

    fn at(mut self, line: Option<usize>) -> Self {
        if self.line.is_none() {
            self.line = line;
        }
        self
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed; per-run seeds derive from it.
    pub seed: u64,
    pub model: ModelConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub distances: DistanceConfig,
    #[serde(default)]
    pub mckv: McKvConfig,
    #[serde(default)]
    pub approx: ApproxConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// `kuramoto`, `spatial_kuramoto` or `fourier`.
    pub id: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// JSON atom list for `fourier`, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    Uniform { lo: f64, hi: f64 },
    Gaussian { mean: f64, sd: f64 },
    CosinePerturbed { amplitude: f64 },
}

impl From<InitialConfig> for InitialLaw {
    fn from(c: InitialConfig) -> Self {
        match c {
            InitialConfig::Uniform { lo, hi } => InitialLaw::Uniform { lo, hi },
            InitialConfig::Gaussian { mean, sd } => InitialLaw::Gaussian { mean, sd },
            InitialConfig::CosinePerturbed { amplitude } => InitialLaw::CosinePerturbed { amplitude },
        }
    }
}

/// How `p` depends on `n`. `list` and `degree` sweep every value at each `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum Sparsity {
    /// `p(n) = c n^{-γ}`.
    Power { c: f64, gamma: f64 },
    /// Fixed `p` values.
    List { values: Vec<f64> },
    /// `p = k / n` for each mean degree `k`.
    Degree { values: Vec<f64> },
}

impl Sparsity {
    pub fn values(&self, n: usize) -> Vec<f64> {
        let nf = n as f64;
        match self {
            Sparsity::Power { c, gamma } => vec![c * nf.powf(-gamma)],
            Sparsity::List { values } => values.clone(),
            Sparsity::Degree { values } => values.iter().map(|k| k / nf).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub n: Vec<usize>,
    pub replicates: usize,
    pub sparsity: Sparsity,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n: vec![128, 512],
            replicates: 2,
            sparsity: Sparsity::Power { c: 1.0, gamma: 0.5 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DenseMode {
    Pairwise,
    Factorized,
}

impl From<DenseMode> for DenseEvaluation {
    fn from(m: DenseMode) -> Self {
        match m {
            DenseMode::Pairwise => DenseEvaluation::Pairwise,
            DenseMode::Factorized => DenseEvaluation::Factorized,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub horizon: f64,
    pub dt: f64,
    pub noise_scale: f64,
    /// `pairwise` sums `W φ` directly; `factorized` uses the Fourier atoms.
    pub dense_evaluation: DenseMode,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            dt: 1e-3,
            noise_scale: 1.0,
            dense_evaluation: DenseMode::Pairwise,
        }
    }
}

impl RunConfig {
    pub fn step_config(&self, seed: u64) -> StepConfig {
        StepConfig::new(self.horizon, self.dt, seed)
            .noise_scale(self.noise_scale)
            .dense_evaluation(self.dense_evaluation.into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistanceConfig {
    pub dictionary_size: usize,
    pub norm_restarts: usize,
    /// Largest `n` for which `‖D‖_{∞→1}` is enumerated exactly.
    pub exact_cap: usize,
    /// Largest `n` for which any norm certificate is computed.
    pub norm_max_n: usize,
}

impl Default for DistanceConfig {
    fn default() -> Self {
        Self {
            dictionary_size: 256,
            norm_restarts: 32,
            exact_cap: ENUMERATION_CAP,
            norm_max_n: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McKvConfig {
    pub media_atoms: usize,
    pub grid_points: usize,
    /// Defaults to `0.4 dx²`, inside the diffusive limit `dx²/2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt_pde: Option<f64>,
    pub checkpoints: usize,
    /// Interval for non-periodic models; derived from the model when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<[f64; 2]>,
    /// Particles in the comparison run; defaults to the largest swept `n`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compare_n: Option<usize>,
    /// Also solve at two finer resolutions and report self-distances.
    pub refine: bool,
}

impl Default for McKvConfig {
    fn default() -> Self {
        Self {
            media_atoms: 8,
            grid_points: 256,
            dt_pde: None,
            checkpoints: 4,
            domain: None,
            compare_n: None,
            refine: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApproxConfig {
    pub n: usize,
    pub epsilons: Vec<f64>,
    pub radii: Vec<f64>,
    /// Grid points per axis in the mollifier checks.
    pub grid_points: usize,
    pub tolerance: f64,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        Self {
            n: 256,
            epsilons: vec![0.1, 0.01],
            radii: vec![8.0, 16.0, 32.0],
            grid_points: 101,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write each run's trajectories (binary and downsampled CSV).
    pub trajectories: bool,
    /// Write each sampled graph (binary and JSON).
    pub graphs: bool,
    /// Time stride of the downsampled trajectory CSV.
    pub csv_stride: usize,
    /// Particles kept in the downsampled trajectory CSV.
    pub csv_particles: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            trajectories: false,
            graphs: false,
            csv_stride: 10,
            csv_particles: 16,
        }
    }
}

/// A JSON list of Fourier atoms for `model.id = "fourier"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomFile {
    pub media_dim: usize,
    pub atoms: Vec<AtomEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomEntry {
    pub frequency: Vec<f64>,
    pub re: f64,
    pub im: f64,
}

impl ExperimentConfig {
    /// Parses and validates; errors carry the offending line.
    pub fn parse(src: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(src).map_err(|e| {
            let line = e.span().map(|s| line_of(src, s.start));
            ConfigError::new(e.message().trim().to_string()).at(line)
        })?;
        cfg.validate(None).map_err(|e| {
            let line = locate(src, &e.message);
            e.at(line)
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new(format!("cannot read {}: {e}", path.display())))?;
        let cfg: Self = toml::from_str(&src).map_err(|e| {
            let line = e.span().map(|s| line_of(&src, s.start));
            ConfigError::new(e.message().trim().to_string()).at(line)
        })?;
        cfg.validate(path.parent())
            .map_err(|e| {
                let line = locate(&src, &e.message);
                e.at(line)
            })?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable")
    }

    /// Builds the model; `base` resolves a relative atom file.
    pub fn build_model(&self, base: Option<&Path>) -> Result<InteractionModel, ConfigError> {
        let m = &self.model;
        let param = |key: &str, default: f64| m.params.get(key).copied().unwrap_or(default);
        let allowed: &[&str] = match m.id.as_str() {
            "kuramoto" => &["kappa", "freq_lo", "freq_hi"],
            "spatial_kuramoto" => &["kappa", "c", "alpha"],
            "fourier" => &["media_lo", "media_hi"],
            other => {
                return Err(ConfigError::new(format!(
                    "`model.id`: unknown model `{other}` (expected kuramoto, spatial_kuramoto or fourier)"
                )))
            }
        };
        if let Some(k) = m.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(ConfigError::new(format!(
                "`model.params.{k}`: not a parameter of `{}` (allowed: {})",
                m.id,
                allowed.join(", ")
            )));
        }
        let core = |e: sparsemf_core::Error| ConfigError::new(format!("`model`: {e}"));
        let mut model = match m.id.as_str() {
            "kuramoto" => {
                let (lo, hi) = (param("freq_lo", -0.5), param("freq_hi", 0.5));
                let law = if lo == hi {
                    MediaLaw::Point(vec![lo])
                } else if lo < hi {
                    MediaLaw::uniform_interval(lo, hi)
                } else {
                    return Err(ConfigError::new("`model.params.freq_hi`: must be >= freq_lo"));
                };
                kuramoto_with(param("kappa", 1.0), law).map_err(core)?
            }
            "spatial_kuramoto" => {
                spatial_kuramoto(param("kappa", 1.0), param("c", 1.0), param("alpha", 2.0))
                    .map_err(core)?
            }
            _ => fourier_model(m, base, param("media_lo", 0.0), param("media_hi", 1.0))?,
        };
        if let Some(init) = m.initial {
            model = model.with_initial(init.into()).map_err(core)?;
        }
        Ok(model)
    }

    /// The `(n, p)` points of the sweep in output order.
    pub fn sweep_points(&self) -> Vec<(usize, f64)> {
        self.sweep
            .n
            .iter()
            .flat_map(|&n| self.sweep.sparsity.values(n).into_iter().map(move |p| (n, p)))
            .collect()
    }

    /// Checks everything that can be checked before running.
    pub fn validate(&self, base: Option<&Path>) -> Result<(), ConfigError> {
        let model = self.build_model(base)?;
        let s = &self.sweep;
        if s.n.is_empty() || s.n.contains(&0) {
            return Err(ConfigError::new("`sweep.n`: needs at least one positive n"));
        }
        if s.replicates == 0 {
            return Err(ConfigError::new("`sweep.replicates`: must be at least 1"));
        }
        match &s.sparsity {
            Sparsity::Power { c, gamma } if !(c.is_finite() && gamma.is_finite()) => {
                return Err(ConfigError::new("`sweep.sparsity`: c and gamma must be finite"))
            }
            Sparsity::List { values } | Sparsity::Degree { values } if values.is_empty() => {
                return Err(ConfigError::new("`sweep.sparsity`: values must be nonempty"))
            }
            _ => {}
        }
        let sup_w = model.kernel().sup();
        for (n, p) in self.sweep_points() {
            check_p(n, p, sup_w)?;
        }
        if self.approx.n > 0 {
            for p in self.sweep.sparsity.values(self.approx.n) {
                check_p(self.approx.n, p, sup_w)
                    .map_err(|e| ConfigError::new(format!("`approx.n`: {}", e.message)))?;
            }
        }
        let r = &self.run;
        if !(r.noise_scale >= 0.0 && r.noise_scale.is_finite()) {
            return Err(ConfigError::new("`run.noise_scale`: must be finite and nonnegative"));
        }
        r.step_config(0)
            .steps()
            .map_err(|e| ConfigError::new(format!("`run.dt`: {e}")))?;
        if r.dense_evaluation == DenseMode::Factorized && model.fourier().is_none() {
            return Err(ConfigError::new(
                "`run.dense_evaluation`: factorized needs a model with Fourier atoms",
            ));
        }
        let d = &self.distances;
        if d.dictionary_size == 0 {
            return Err(ConfigError::new("`distances.dictionary_size`: must be at least 1"));
        }
        if d.norm_restarts == 0 {
            return Err(ConfigError::new("`distances.norm_restarts`: must be at least 1"));
        }
        if d.exact_cap > 24 {
            return Err(ConfigError::new("`distances.exact_cap`: at most 24"));
        }
        let k = &self.mckv;
        if k.media_atoms == 0 || k.grid_points < 8 || k.checkpoints == 0 {
            return Err(ConfigError::new(
                "`mckv`: needs media_atoms >= 1, grid_points >= 8 and checkpoints >= 1",
            ));
        }
        if let Some([lo, hi]) = k.domain {
            if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                return Err(ConfigError::new("`mckv.domain`: needs lo < hi"));
            }
        }
        if let Some(dt) = k.dt_pde {
            let dx = self.mckv_domain(&model).map(|(lo, hi)| (hi - lo) / k.grid_points as f64);
            if let Some(dx) = dx {
                if dt.is_nan() || dt <= 0.0 || dt > dx * dx / 2.0 {
                    return Err(ConfigError::new(format!(
                        "`mckv.dt_pde`: {dt} violates 0 < dt_pde <= dx^2/2 = {}",
                        dx * dx / 2.0
                    )));
                }
            }
        }
        let steps = r.step_config(0).steps().unwrap_or(0);
        if !steps.is_multiple_of(k.checkpoints) {
            return Err(ConfigError::new(format!(
                "`mckv.checkpoints`: {} does not divide the {steps} run steps, so checkpoints would fall off the time grid",
                k.checkpoints
            )));
        }
        if k.compare_n == Some(0) {
            return Err(ConfigError::new("`mckv.compare_n`: must be positive"));
        }
        let a = &self.approx;
        if a.n == 0 || a.grid_points < 3 || a.tolerance.is_nan() || a.tolerance < 0.0 {
            return Err(ConfigError::new("`approx`: needs n >= 1, grid_points >= 3, tolerance >= 0"));
        }
        if a.epsilons.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
            return Err(ConfigError::new("`approx.epsilons`: each epsilon must lie in (0, 1]"));
        }
        if a.radii.iter().any(|&r| !(r >= 1.0 && r.is_finite())) {
            return Err(ConfigError::new("`approx.radii`: each R must be finite and >= 1"));
        }
        if self.output.csv_stride == 0 {
            return Err(ConfigError::new("`output.csv_stride`: must be at least 1"));
        }
        Ok(())
    }

    /// The PDE interval: `[−π, π)` for periodic models, otherwise the
    /// configured domain or one derived from the initial law and drift.
    pub fn mckv_domain(&self, model: &InteractionModel) -> Option<(f64, f64)> {
        if model.is_periodic() {
            return Some((-std::f64::consts::PI, std::f64::consts::PI));
        }
        if let Some([lo, hi]) = self.mckv.domain {
            return Some((lo, hi));
        }
        let (a, b) = model.initial_law().support();
        let c = model.constants();
        let drift = model.kernel().sup() * c.sup_phi + c.sup_psi;
        let t = self.run.horizon;
        let pad = drift * t + 6.0 * self.run.noise_scale * t.sqrt() + 1.0;
        Some((a - pad, b + pad))
    }
}

fn check_p(n: usize, p: f64, sup_w: f64) -> Result<(), ConfigError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(ConfigError::new(format!(
            "`sweep.sparsity`: p({n}) = {p} is outside (0, 1]"
        )));
    }
    if p * sup_w > 1.0 {
        return Err(ConfigError::new(format!(
            "`sweep.sparsity`: p({n}) * sup W = {} exceeds 1",
            p * sup_w
        )));
    }
    Ok(())
}

fn fourier_model(
    m: &ModelConfig,
    base: Option<&Path>,
    lo: f64,
    hi: f64,
) -> Result<InteractionModel, ConfigError> {
    let rel = m
        .atoms
        .as_ref()
        .ok_or_else(|| ConfigError::new("`model.atoms`: required for the fourier model"))?;
    let path = match base {
        Some(b) if rel.is_relative() => b.join(rel),
        _ => rel.clone(),
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| ConfigError::new(format!("`model.atoms`: cannot read {}: {e}", path.display())))?;
    let file: AtomFile = serde_json::from_str(&text)
        .map_err(|e| ConfigError::new(format!("`model.atoms`: {}: {e}", path.display())))?;
    let atoms = file
        .atoms
        .into_iter()
        .map(|a| FourierAtom {
            frequency: a.frequency,
            weight: Complex64::new(a.re, a.im),
        })
        .collect();
    let measure = FourierMeasure::new(file.media_dim, atoms)
        .map_err(|e| ConfigError::new(format!("`model.atoms`: {e}")))?;
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(ConfigError::new("`model.params.media_hi`: must exceed media_lo"));
    }
    let d = file.media_dim;
    let media = MediaLaw::UniformBox {
        lo: vec![lo; d],
        hi: vec![hi; d],
    };
    InteractionModel::from_fourier(
        "fourier",
        media,
        measure,
        Arc::new(|_, _| 0.0),
        Kernel::constant(1.0),
        0.0,
        0.0,
    )
    .build()
    .map_err(|e| ConfigError::new(format!("`model`: {e}")))
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

/// Finds the line defining the key named in backticks at the start of a
/// validation message, e.g. `` `sweep.n` `` or `` `model.params.kappa` ``.
fn locate(src: &str, message: &str) -> Option<usize> {
    let path = message.strip_prefix('`')?.split('`').next()?;
    let parts: Vec<&str> = path.split('.').collect();
    let (key, section) = parts.split_last()?;
    let section = section.first().copied();
    let mut current: Option<String> = None;
    let mut section_line = None;
    for (k, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = Some(name.trim().to_string());
            if Some(name.trim()) == section {
                section_line = Some(k + 1);
            }
            continue;
        }
        if current.as_deref() != section {
            continue;
        }
        let lhs = line.split('=').next().unwrap_or("").trim();
        if lhs == *key || (line.contains(&format!("{key} =")) && parts.len() > 2) {
            return Some(k + 1);
        }
    }
    section_line
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "seed = 3\n[model]\nid = \"kuramoto\"\n";

    #[test]
    fn defaults_fill_missing_sections() {
        let c = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.sweep, SweepConfig::default());
        assert_eq!(c.run.dt, 1e-3);
        assert_eq!(c.sweep_points().len(), 2);
    }

    #[test]
    fn round_trip_is_idempotent() {
        let src = r#"
seed = 11
[model]
id = "kuramoto"
params = { kappa = 0.5, freq_lo = 0.0, freq_hi = 0.0 }
initial = { law = "cosine_perturbed", amplitude = 0.5 }
[sweep]
n = [16, 32]
replicates = 3
sparsity = { rule = "degree", values = [4.0, 8.0] }
[mckv]
grid_points = 64
domain = [-3.0, 3.0]
"#;
        let a = ExperimentConfig::parse(src).unwrap();
        let text = a.to_toml();
        let b = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(a, b);
        assert_eq!(text, b.to_toml());
    }

    #[test]
    fn unknown_key_reports_its_line() {
        let src = "seed = 3\n[model]\nid = \"kuramoto\"\n[run]\nhorizon = 1.0\nstep = 0.1\n";
        let e = ExperimentConfig::parse(src).unwrap_err();
        assert_eq!(e.line, Some(6), "{e}");
        assert!(e.message.contains("step"));
    }

    #[test]
    fn sparsity_guard_rejects_before_sampling() {
        let src = "seed = 3\n[model]\nid = \"kuramoto\"\n[sweep]\nn = [4]\nsparsity = { rule = \"list\", values = [1.5] }\n";
        let e = ExperimentConfig::parse(src).unwrap_err();
        assert_eq!(e.line, Some(6), "{e}");
        assert!(e.message.contains("outside"));
    }

    #[test]
    fn unknown_parameter_is_located() {
        let src = "seed = 3\n[model]\nid = \"kuramoto\"\nparams = { kapa = 1.0 }\n";
        let e = ExperimentConfig::parse(src).unwrap_err();
        assert_eq!(e.line, Some(4), "{e}");
    }

    #[test]
    fn off_grid_horizon_rejected() {
        let src = "seed = 3\n[model]\nid = \"kuramoto\"\n[run]\nhorizon = 1.0\ndt = 0.3\n";
        let e = ExperimentConfig::parse(src).unwrap_err();
        assert_eq!(e.line, Some(6), "{e}");
    }

    #[test]
    fn degree_rule_divides_by_n() {
        let s = Sparsity::Degree { values: vec![8.0, 32.0] };
        assert_eq!(s.values(512), vec![8.0 / 512.0, 32.0 / 512.0]);
        let s = Sparsity::Power { c: 1.0, gamma: 0.5 };
        assert_eq!(s.values(16), vec![0.25]);
    }
}

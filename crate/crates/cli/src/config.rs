//! Experiment configuration: one JSON file with shared blocks (params,
//! measure, grid) and a task-specific `options` block. Unknown keys are
//! rejected at every level.

use std::path::{Path, PathBuf};

use fracstable::analysis::{DecayGrid, ScanOptions};
use fracstable::grid::Grid;
use fracstable::kernels::{KernelKind, DEFAULT_TAIL_TOL};
use fracstable::params::ModelParams;
use fracstable::solver::{MeshSpec, SolveOptions};
use fracstable::symbol::{build_measure, MeasureSpec, SpectralMeasure, Symbol};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    MlEval,
    KernelEval,
    Solve,
    Simulate,
    Verify,
    FitDecay,
    ScanCritical,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::MlEval => "ml-eval",
            Task::KernelEval => "kernel-eval",
            Task::Solve => "solve",
            Task::Simulate => "simulate",
            Task::Verify => "verify",
            Task::FitDecay => "fit-decay",
            Task::ScanCritical => "scan-critical",
        }
    }
}

/// Grid block; the extent is sized from the tail estimate when omitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub extent: Option<f64>,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub task: Option<Task>,
    #[serde(default = "default_params")]
    pub params: ModelParams,
    #[serde(default)]
    pub measure: Option<MeasureSpec>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub options: serde_json::Value,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_params() -> ModelParams {
    ModelParams { alpha: 0.5, beta: 1.5, gamma: 2.0, lambda: 0.0, dimension: 1 }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            task: None,
            params: default_params(),
            measure: None,
            grid: None,
            options: serde_json::Value::Null,
            output: None,
            seed: None,
        }
    }
}

pub const DEFAULT_SEED: u64 = 20240601;

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn measure_spec(&self) -> MeasureSpec {
        self.measure.clone().unwrap_or_else(|| match self.params.dimension {
            1 => MeasureSpec::unit_atoms_1d(),
            d => MeasureSpec::uniform(d),
        })
    }

    pub fn measure(&self) -> Result<SpectralMeasure, CliError> {
        build_measure(&self.measure_spec()).map_err(|e| CliError::Config(format!("measure: {e}")))
    }

    pub fn symbol(&self) -> Result<Symbol, CliError> {
        Symbol::new(self.measure()?, self.params.beta).map_err(|e| CliError::Config(format!("measure: {e}")))
    }

    /// Checks everything that does not depend on the task.
    pub fn validate(&self) -> Result<(), CliError> {
        self.params.validate().map_err(|e| CliError::Config(format!("params: {e}")))?;
        let m = self.measure()?;
        if m.dimension() != self.params.dimension {
            return Err(CliError::Config(format!(
                "measure dimension {} differs from params d = {}",
                m.dimension(),
                self.params.dimension
            )));
        }
        if let Some(g) = &self.grid {
            Grid::new(self.params.dimension, g.extent.unwrap_or(1.0), g.points)
                .map_err(|e| CliError::Config(format!("grid: {e}")))?;
        }
        Ok(())
    }

    /// The task block, with defaults for absent keys.
    pub fn options<T: DeserializeOwned + Default>(&self) -> Result<T, CliError> {
        match &self.options {
            serde_json::Value::Null => Ok(T::default()),
            v => serde_json::from_value(v.clone()).map_err(|e| CliError::Config(format!("options: {e}"))),
        }
    }

    pub fn default_points(&self) -> usize {
        match self.params.dimension {
            1 => 4096,
            2 => 512,
            _ => 64,
        }
    }

    /// Grid from the grid block, sizing missing pieces for kernel `kind` at time t.
    pub fn grid_for(&self, kind: KernelKind, t: f64, tail_tol: f64) -> Result<Grid, CliError> {
        let symbol = self.symbol()?;
        let points = self.grid.map_or(self.default_points(), |g| g.points);
        let grid = match self.grid.and_then(|g| g.extent) {
            Some(extent) => Grid::new(self.params.dimension, extent, points),
            None => fracstable::kernels::sized_grid(kind, &self.params, &symbol, t, points, tail_tol),
        };
        grid.map_err(|e| CliError::Task(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MlEvalOptions {
    pub alpha: Option<f64>,
    pub delta: f64,
    /// Arguments z ≤ 0; when empty, `count` log-spaced values of -|z| in [1e-3, 1e4].
    pub z: Vec<f64>,
    pub count: usize,
}

impl Default for MlEvalOptions {
    fn default() -> Self {
        Self { alpha: None, delta: 1.0, z: Vec::new(), count: 50 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FieldFormat {
    Csv,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelEvalOptions {
    pub kind: KernelKind,
    pub t: f64,
    pub tail_tol: f64,
    pub format: FieldFormat,
}

impl Default for KernelEvalOptions {
    fn default() -> Self {
        Self { kind: KernelKind::Z, t: 1.0, tail_tol: DEFAULT_TAIL_TOL, format: FieldFormat::Csv }
    }
}

/// Gaussian initial datum of the given mass and standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialData {
    pub mass: f64,
    pub width: f64,
}

impl Default for InitialData {
    fn default() -> Self {
        Self { mass: 1.0, width: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveTaskOptions {
    pub t_final: f64,
    pub mesh: MeshSpec,
    pub solver: SolveOptions,
    pub initial: InitialData,
    /// Write the final field as binary with a sidecar.
    pub emit_final_field: bool,
}

impl Default for SolveTaskOptions {
    fn default() -> Self {
        Self {
            t_final: 1.0,
            mesh: MeshSpec { steps: 64, rho: None },
            solver: SolveOptions::default(),
            initial: InitialData::default(),
            emit_final_field: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateOptions {
    pub t: f64,
    pub n: usize,
    pub emit_samples: bool,
    pub tail_tol: f64,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        Self { t: 1.0, n: 100_000, emit_samples: false, tail_tol: DEFAULT_TAIL_TOL }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Mass,
    Scaling,
    CrossPath,
    Ml,
    Smoothing,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyOptions {
    pub suite: Suite,
    pub times: Vec<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { suite: Suite::All, times: vec![1.0] }
    }
}

/// JSON form of an exponent: a number, or `"inf"` for p = ∞.
pub fn exponent_value(p: f64) -> serde_json::Value {
    if p == f64::INFINITY {
        serde_json::Value::from("inf")
    } else {
        serde_json::Value::from(p)
    }
}

/// Exponent lists that admit `"inf"` alongside numbers.
pub mod exponents {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Exponent {
        Number(f64),
        Word(String),
    }

    pub fn serialize<S: Serializer>(p: &[f64], s: S) -> Result<S::Ok, S::Error> {
        p.iter().map(|&v| super::exponent_value(v)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Exponent>::deserialize(d)?
            .into_iter()
            .map(|e| match e {
                Exponent::Number(v) => Ok(v),
                Exponent::Word(w) if matches!(w.as_str(), "inf" | "infinity" | "Infinity") => Ok(f64::INFINITY),
                Exponent::Word(w) => Err(serde::de::Error::custom(format!("invalid exponent `{w}`"))),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecaySubject {
    Z,
    Y,
    #[serde(rename = "solution")]
    Solution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitDecayOptions {
    pub kind: DecaySubject,
    #[serde(with = "exponents")]
    pub p: Vec<f64>,
    /// Kernel fits only; solution fits use the mesh nodes in [t_min, t_max].
    pub times: Vec<f64>,
    pub t_min: f64,
    pub t_max: f64,
    pub slope_tol: f64,
    pub grids: Option<DecayGrid>,
    /// The run whose decay is fitted, for `kind = "solution"`.
    pub solve: SolveTaskOptions,
    pub emit_csv: bool,
}

impl Default for FitDecayOptions {
    fn default() -> Self {
        Self {
            kind: DecaySubject::Z,
            p: vec![1.0, 2.0],
            times: fracstable::analysis::log_times(1.0, 64.0, 7),
            t_min: 1.0,
            t_max: 64.0,
            slope_tol: fracstable::analysis::DEFAULT_SLOPE_TOL,
            grids: None,
            solve: SolveTaskOptions::default(),
            emit_csv: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeakScan {
    pub p: f64,
    pub times: Vec<f64>,
    pub slope_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanCriticalOptions {
    pub kind: KernelKind,
    #[serde(with = "exponents")]
    pub p: Vec<f64>,
    pub scan: ScanOptions,
    /// Also fit the weak-L_p quasi-norm decay at this exponent.
    pub weak: Option<WeakScan>,
}

impl Default for WeakScan {
    fn default() -> Self {
        Self { p: 4.0, times: fracstable::analysis::log_times(1.0, 64.0, 7), slope_tol: 0.05 }
    }
}

impl Default for ScanCriticalOptions {
    fn default() -> Self {
        Self { kind: KernelKind::Z, p: vec![2.0, 3.5, 4.0, 5.0], scan: ScanOptions::default(), weak: None }
    }
}

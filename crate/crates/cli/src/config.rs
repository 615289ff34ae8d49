//! Experiment configuration: JSON on disk, every field optional, unknown keys rejected.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use instrument_autonomy::fock::Density;
use instrument_autonomy::params::{InstrumentParams, MAX_STEP_COUPLING};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    PhotodetectEnsemble,
    HeterodyneEnsemble,
    EvolveKod,
    VerifyIdentities,
    PovmConvergence,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::PhotodetectEnsemble,
        ExperimentKind::HeterodyneEnsemble,
        ExperimentKind::EvolveKod,
        ExperimentKind::VerifyIdentities,
        ExperimentKind::PovmConvergence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::PhotodetectEnsemble => "photodetect-ensemble",
            ExperimentKind::HeterodyneEnsemble => "heterodyne-ensemble",
            ExperimentKind::EvolveKod => "evolve-kod",
            ExperimentKind::VerifyIdentities => "verify-identities",
            ExperimentKind::PovmConvergence => "povm-convergence",
        }
    }

    /// State used when the config names none.
    pub fn default_state(self) -> StateSpec {
        match self {
            ExperimentKind::HeterodyneEnsemble => StateSpec::Coherent { re: 1.0, im: 0.0 },
            _ => StateSpec::Fock(5),
        }
    }

    /// Plot series written when the config names none.
    pub fn default_series(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::PhotodetectEnsemble => &["lambda"],
            ExperimentKind::HeterodyneEnsemble => &["sigma", "beta-cooling"],
            ExperimentKind::EvolveKod => &["lambda", "sigma"],
            ExperimentKind::VerifyIdentities => &[],
            ExperimentKind::PovmConvergence => &["projector-defect", "het-projector-defect"],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| CliError::Usage(format!("unknown experiment '{s}'")))
    }
}

/// Initial state. `{"fock": 5}`, `{"coherent": {"re": 1, "im": 0}}` or
/// `{"density_file": "rho.json"}`; the file holds `{"re": [[..]], "im": [[..]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Fock(usize),
    Coherent { re: f64, im: f64 },
    DensityFile(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityFile {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl StateSpec {
    pub fn density(&self, dim: usize) -> Result<Density<f64>, CliError> {
        let rho = match self {
            StateSpec::Fock(n) => Density::number(dim, *n)?,
            StateSpec::Coherent { re, im } => Density::coherent(dim, Complex64::new(*re, *im))?,
            StateSpec::DensityFile(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Usage(format!("cannot read density file {}: {e}", path.display()))
                })?;
                let file: DensityFile = serde_json::from_str(&text).map_err(|e| {
                    CliError::Usage(format!("bad density file {}: {e}", path.display()))
                })?;
                let square = |m: &Vec<Vec<f64>>| m.len() == dim && m.iter().all(|r| r.len() == dim);
                if !square(&file.re) || !square(&file.im) {
                    return Err(CliError::Usage(format!(
                        "density file {} must hold two {dim}x{dim} matrices",
                        path.display()
                    )));
                }
                let m = ndarray::Array2::from_shape_fn((dim, dim), |(i, j)| {
                    Complex64::new(file.re[i][j], file.im[i][j])
                });
                Density::from_matrix(m)?
            }
        };
        Ok(rho)
    }
}

/// Finite-difference grid of the heterodyne diffusion solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSettings {
    pub h: f64,
    pub extent: f64,
    pub sigma0_sq: f64,
    pub steps: usize,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self {
            h: 0.05,
            extent: 5.0,
            sigma0_sq: 1e-3,
            steps: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OdeSettings {
    pub n_max: usize,
    pub steps: usize,
    /// Coarse step count of the step-halving convergence check.
    pub ratio_steps: usize,
}

impl Default for OdeSettings {
    fn default() -> Self {
        Self {
            n_max: 40,
            steps: 1000,
            ratio_steps: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Must match the subcommand when present.
    pub experiment: Option<ExperimentKind>,
    pub kappa_o: f64,
    pub dt: f64,
    /// Snapped to the nearest multiple of `dt` for trajectory work.
    pub horizon: f64,
    pub dim: usize,
    pub subblock: usize,
    pub trajectories: usize,
    pub seed: u64,
    pub state: Option<StateSpec>,
    pub output: Option<PathBuf>,
    pub grid: GridSettings,
    pub ode: OdeSettings,
    pub quadrature_order: usize,
    pub cooling_samples: usize,
    pub identity_samples: usize,
    pub trace_dim: usize,
    pub plot_series: Option<Vec<String>>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            kappa_o: 1.0,
            dt: 1e-3,
            horizon: std::f64::consts::LN_2,
            dim: 40,
            subblock: 20,
            trajectories: 10_000,
            seed: 0,
            state: None,
            output: None,
            grid: GridSettings::default(),
            ode: OdeSettings::default(),
            quadrature_order: 32,
            cooling_samples: 100_000,
            identity_samples: 100,
            trace_dim: 50,
            plot_series: None,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| usage(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Fixes the experiment kind and fills the per-experiment defaults, so the hash
    /// covers everything the run depends on.
    pub fn resolve(mut self, kind: ExperimentKind) -> Result<Self, CliError> {
        match self.experiment {
            Some(k) if k != kind => {
                return Err(usage(format!("config is for {k}, subcommand is {kind}")));
            }
            _ => self.experiment = Some(kind),
        }
        self.state.get_or_insert_with(|| kind.default_state());
        self.plot_series.get_or_insert_with(|| {
            kind.default_series()
                .iter()
                .map(|s| s.to_string())
                .collect()
        });
        self.validate()?;
        Ok(self)
    }

    pub fn kind(&self) -> Result<ExperimentKind, CliError> {
        self.experiment
            .ok_or_else(|| usage("experiment kind not set"))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let finite_pos = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(usage(format!("{name} must be finite and > 0, got {x}")))
            }
        };
        finite_pos("kappa_o", self.kappa_o)?;
        finite_pos("dt", self.dt)?;
        finite_pos("horizon", self.horizon)?;
        if self.kappa_o * self.dt > MAX_STEP_COUPLING {
            return Err(usage(format!(
                "kappa_o dt = {} exceeds {MAX_STEP_COUPLING}",
                self.kappa_o * self.dt
            )));
        }
        if self.horizon < self.dt {
            return Err(usage("horizon must be at least one time step"));
        }
        if self.dim < 2 || self.subblock == 0 || self.subblock > self.dim {
            return Err(usage(format!(
                "need dim >= 2 and 0 < subblock <= dim, got {} and {}",
                self.dim, self.subblock
            )));
        }
        if self.subblock < 3 {
            return Err(usage("subblock must hold at least the counts 0, 1, 2"));
        }
        if self.trace_dim < 2 {
            return Err(usage("trace_dim must be >= 2"));
        }
        if !(1..=200).contains(&self.quadrature_order) {
            return Err(usage("quadrature_order must be in 1..=200"));
        }
        finite_pos("grid.h", self.grid.h)?;
        finite_pos("grid.extent", self.grid.extent)?;
        finite_pos("grid.sigma0_sq", self.grid.sigma0_sq)?;
        if self.grid.steps == 0 {
            return Err(usage("grid.steps must be > 0"));
        }
        if self.cooling_samples == 0 {
            return Err(usage("cooling_samples must be > 0"));
        }
        match &self.state {
            Some(StateSpec::Fock(n)) if *n >= self.dim => {
                return Err(usage(format!(
                    "fock state {n} does not fit dim {}",
                    self.dim
                )));
            }
            Some(StateSpec::Coherent { re, im }) if !re.is_finite() || !im.is_finite() => {
                return Err(usage("coherent amplitude must be finite"));
            }
            _ => {}
        }
        if let Some(series) = &self.plot_series {
            for s in series {
                crate::plot::Series::from_str(s)?;
            }
        }
        Ok(())
    }

    pub fn params(&self) -> Result<InstrumentParams<f64>, CliError> {
        Ok(InstrumentParams::on_grid(
            self.kappa_o,
            self.dt,
            self.horizon,
            self.dim,
        )?)
    }

    pub fn state_spec(&self) -> StateSpec {
        self.state.clone().unwrap_or(StateSpec::Fock(5))
    }

    /// SHA-256 of the canonical JSON of the resolved config, hex encoded. Output paths are
    /// excluded: where results go does not change them.
    pub fn hash(&self) -> String {
        let mut canon = self.clone();
        canon.output = None;
        let json = serde_json::to_string(&canon).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

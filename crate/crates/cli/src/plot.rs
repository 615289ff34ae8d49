//! Two-column plot series. Nothing is rendered.

use std::path::Path;
use std::str::FromStr;

use instrument_autonomy::heterodyne::effective_covariance;
use instrument_autonomy::photodetector::effective_mean;

use crate::config::ExperimentConfig;
use crate::experiments::{cooling_sweep, projector_sweep, COOLING_SALT};
use crate::report::{OutputFile, VerificationReport};
use crate::table::{num, Table};
use crate::{sha256_hex, CliError};

/// Points of the time-dependent series on `[0, 5/kappa_o]`.
pub const TIME_POINTS: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Series {
    /// `lambda(t) = 1 - e^{-kappa_o t}`
    Lambda,
    /// `Sigma(t)`, the heterodyne covariance
    Sigma,
    /// empirical `<beta^* beta>` against `kappa_o T`
    BetaCooling,
    /// `|| E_T(0) - |0><0| ||` against `kappa_o T`
    ProjectorDefect,
    /// `|| E_T(0.5) - |0.5><0.5| ||` against `kappa_o T`
    HetProjectorDefect,
}

impl Series {
    pub const ALL: [Series; 5] = [
        Series::Lambda,
        Series::Sigma,
        Series::BetaCooling,
        Series::ProjectorDefect,
        Series::HetProjectorDefect,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Series::Lambda => "lambda",
            Series::Sigma => "sigma",
            Series::BetaCooling => "beta-cooling",
            Series::ProjectorDefect => "projector-defect",
            Series::HetProjectorDefect => "het-projector-defect",
        }
    }
}

impl FromStr for Series {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| CliError::Spec(format!("unknown plot series '{s}'")))
    }
}

pub fn series_table(series: Series, cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let kappa = cfg.kappa_o;
    let times = || (0..TIME_POINTS).map(move |i| 5.0 / kappa * i as f64 / (TIME_POINTS - 1) as f64);
    let name = format!("plot_{}", series.name().replace('-', "_"));
    let table = match series {
        Series::Lambda => {
            let mut t = Table::new(&name, &["t", "lambda"]);
            for x in times() {
                t.push(vec![num(x), num(effective_mean(x, kappa))]);
            }
            t
        }
        Series::Sigma => {
            let mut t = Table::new(&name, &["t", "sigma"]);
            for x in times() {
                t.push(vec![num(x), num(effective_covariance(x, kappa))]);
            }
            t
        }
        Series::BetaCooling => {
            let mut t = Table::new(&name, &["kappa_t", "beta_occupation"]);
            for (kt, b) in cooling_sweep(kappa, cfg.cooling_samples, cfg.seed ^ COOLING_SALT)? {
                t.push(vec![num(kt), num(b)]);
            }
            t
        }
        Series::ProjectorDefect | Series::HetProjectorDefect => {
            let sweep = projector_sweep(cfg)?;
            let mut t = Table::new(&name, &["kappa_t", "defect"]);
            if series == Series::ProjectorDefect {
                for (_, kt, d) in sweep.photodetector.iter().filter(|r| r.0 == 0) {
                    t.push(vec![num(*kt), num(*d)]);
                }
            } else {
                for (_, kt, d) in sweep.heterodyne.iter().filter(|r| r.0 == 0.5) {
                    t.push(vec![num(*kt), num(*d)]);
                }
            }
            t
        }
    };
    Ok(table)
}

/// Writes one CSV per named series into `dir`. The report must come from `cfg`.
pub fn emit_plot_data(
    report: &VerificationReport,
    cfg: &ExperimentConfig,
    series: &[String],
    dir: &Path,
) -> Result<Vec<OutputFile>, CliError> {
    if report.provenance.config_hash != cfg.hash() {
        return Err(CliError::Spec(
            "report was produced by a different config".into(),
        ));
    }
    let parsed = series
        .iter()
        .map(|s| Series::from_str(s))
        .collect::<Result<Vec<_>, _>>()?;
    let mut files = Vec::new();
    for s in parsed {
        let table = series_table(s, cfg)?;
        let bytes = table.write(dir)?;
        files.push(OutputFile {
            file: table.file_name(),
            sha256: sha256_hex(&bytes),
        });
    }
    Ok(files)
}

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    /// measured <= threshold
    #[serde(rename = "<=")]
    AtMost,
    /// measured >= threshold
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// `None` when the computation failed; `error` then says why.
    pub measured: Option<f64>,
    pub threshold: f64,
    pub relation: Relation,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self::new(name.into(), measured, threshold, Relation::AtMost)
    }

    pub fn at_least(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self::new(name.into(), measured, threshold, Relation::AtLeast)
    }

    fn new(name: String, measured: f64, threshold: f64, relation: Relation) -> Self {
        // NaN never passes
        let pass = match relation {
            Relation::AtMost => measured <= threshold,
            Relation::AtLeast => measured >= threshold,
        };
        Self {
            name,
            measured: measured.is_finite().then_some(measured),
            threshold,
            relation,
            pass,
            error: None,
        }
    }

    pub fn failed(
        name: impl Into<String>,
        threshold: f64,
        relation: Relation,
        error: String,
    ) -> Self {
        Self {
            name: name.into(),
            measured: None,
            threshold,
            relation,
            pass: false,
            error: Some(error),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub version: String,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub experiment: String,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub provenance: Provenance,
    pub outputs: Vec<OutputFile>,
}

impl VerificationReport {
    pub fn new(experiment: String, checks: Vec<Check>, provenance: Provenance) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self {
            experiment,
            checks,
            pass,
            provenance,
            outputs: Vec::new(),
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{QqbfError, Result};

/// Environment variable naming a JSON file with policy overrides.
pub const POLICY_ENV: &str = "QQBF_NUM_POLICY";

/// Every tolerance used by the library, in one place.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericPolicy {
    /// Normalized Sylvester resultant below this means "common root".
    pub coprime: f64,
    /// Gram matrix deviation accepted for orthonormal row sets.
    pub orthonormality: f64,
    /// Relative size under which a-b and c count as zero in the x/y/K solve.
    pub residual: f64,
    /// Pivot magnitude treated as zero in Householder steps.
    pub pivot: f64,
    /// Normalized residual of the compatibility conditions.
    pub compat: f64,
    /// Branch probability below which fidelity is not checked.
    pub branch_threshold: f64,
    /// Probability below which `verify` skips the fidelity check.
    pub verify_prob: f64,
    /// Allowed 1 - fidelity.
    pub fidelity: f64,
    /// Perturbation ladder for the compatibility limit trace.
    pub epsilon_ladder: Vec<f64>,
    /// Final/initial ratio under which a ladder sequence counts as vanishing.
    pub ladder_ratio: f64,
    /// Allowed spectral norm excess for contractions.
    pub contraction: f64,
}

impl Default for NumericPolicy {
    fn default() -> Self {
        NumericPolicy {
            coprime: 1e-9,
            orthonormality: 1e-10,
            residual: 1e-12,
            pivot: 1e-12,
            compat: 1e-9,
            branch_threshold: 1e-8,
            verify_prob: 1e-10,
            fidelity: 1e-9,
            epsilon_ladder: vec![1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
            ladder_ratio: 1e-4,
            contraction: 1e-12,
        }
    }
}

impl NumericPolicy {
    pub fn from_json(text: &str) -> Result<Self> {
        let p: NumericPolicy =
            serde_json::from_str(text).map_err(|e| QqbfError::Parse(format!("policy: {e}")))?;
        p.validate()?;
        Ok(p)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| QqbfError::Parse(format!("policy file {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Default policy, overridden by the file named in `QQBF_NUM_POLICY` if set.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(POLICY_ENV) {
            Some(p) if !p.is_empty() => Self::from_file(Path::new(&p)),
            _ => Ok(Self::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let scalars = [
            ("coprime", self.coprime),
            ("orthonormality", self.orthonormality),
            ("residual", self.residual),
            ("pivot", self.pivot),
            ("compat", self.compat),
            ("branch_threshold", self.branch_threshold),
            ("verify_prob", self.verify_prob),
            ("fidelity", self.fidelity),
            ("ladder_ratio", self.ladder_ratio),
            ("contraction", self.contraction),
        ];
        for (name, v) in scalars {
            if !(v.is_finite() && v >= 0.0) {
                return Err(QqbfError::Domain(format!("policy field {name} must be finite and >= 0")));
            }
        }
        if self.epsilon_ladder.len() < 2
            || self.epsilon_ladder.iter().any(|e| !(e.is_finite() && *e > 0.0))
        {
            return Err(QqbfError::Domain("epsilon_ladder needs >= 2 positive values".into()));
        }
        Ok(())
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical thresholds shared by every operation.
///
/// `cluster_rel` and `zero_abs` are relative to `max(1, ‖H‖)` of the matrix
/// being decomposed. `proj_tol` bounds projection identities (idempotence,
/// ordering, products that should vanish) and principal-angle cosines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub cluster_rel: f64,
    pub zero_abs: f64,
    pub proj_tol: f64,
    pub hermitian_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            cluster_rel: 1e-8,
            zero_abs: 1e-10,
            proj_tol: 1e-8,
            hermitian_tol: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn new(cluster_rel: f64, zero_abs: f64, proj_tol: f64, hermitian_tol: f64) -> Result<Self> {
        let t = Self {
            cluster_rel,
            zero_abs,
            proj_tol,
            hermitian_tol,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("cluster_rel", self.cluster_rel),
            ("zero_abs", self.zero_abs),
            ("proj_tol", self.proj_tol),
            ("hermitian_tol", self.hermitian_tol),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidTolerances(format!(
                    "{name} = {v} must lie strictly between 0 and 1"
                )));
            }
        }
        Ok(())
    }

    /// Named presets: `default`, `strict`, `loose`.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "default" => Some(Self::default()),
            "strict" => Some(Self {
                cluster_rel: 1e-10,
                zero_abs: 1e-12,
                proj_tol: 1e-10,
                hermitian_tol: 1e-12,
            }),
            "loose" => Some(Self {
                cluster_rel: 1e-6,
                zero_abs: 1e-8,
                proj_tol: 1e-6,
                hermitian_tol: 1e-8,
            }),
            _ => None,
        }
    }

    pub const PRESETS: [&'static str; 3] = ["default", "strict", "loose"];
}

//! Shared numerical tolerances and run configuration.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Slack allowed on the right-hand side of every checked inequality.
pub const TOL_INEQ: f64 = 1e-9;
/// Relative agreement required between two independent evaluation routes.
pub const TOL_ORACLE: f64 = 1e-10;
/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "UNIFORMITY_LAB_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub ineq: f64,
    pub oracle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ineq: TOL_INEQ,
            oracle: TOL_ORACLE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutFormat {
    Csv,
    Json,
}

/// Settings shared by every subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub tol: Tolerances,
    pub workers: usize,
    pub out_format: OutFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0x5eed,
            tol: Tolerances::default(),
            workers: default_workers(),
            out_format: OutFormat::Csv,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol.ineq > 0.0 && self.tol.oracle > 0.0) {
            return Err(LabError::Domain("tolerances must be positive".into()));
        }
        if self.workers == 0 {
            return Err(LabError::Domain("workers must be at least 1".into()));
        }
        Ok(())
    }

    /// Applies `UNIFORMITY_LAB_WORKERS` if it is set to a positive integer.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(raw) = std::env::var(WORKERS_ENV) {
            let n: usize = raw
                .trim()
                .parse()
                .map_err(|_| LabError::Parse(format!("{WORKERS_ENV}={raw:?} is not an integer")))?;
            if n == 0 {
                return Err(LabError::Domain(format!("{WORKERS_ENV} must be >= 1")));
            }
            self.workers = n;
        }
        Ok(())
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.tol.ineq, 1e-9);
        assert_eq!(cfg.tol.oracle, 1e-10);
    }

    #[test]
    fn rejects_bad_values() {
        let cfg = RunConfig { workers: 0, ..RunConfig::default() };
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.tol.ineq = 0.0;
        assert!(cfg.validate().is_err());
    }
}

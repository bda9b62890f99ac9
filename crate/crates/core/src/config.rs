//! Run configuration shared by the CLI and the flow pipeline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numeric knobs for a deterministic run. A fixed seed makes every flow and
/// every emitted artifact bit-reproducible.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    /// Tolerance for exact matrix predicates.
    pub tol: f64,
    /// Grid points per axis for sampled sphere maps.
    pub resolution: usize,
    /// Gradient/averaging step scale for the explicit flow mode.
    pub step: f64,
    /// Iteration cap per shortening run.
    pub max_iters: usize,
    /// Seed for the deterministic saddle-escape perturbations.
    pub seed: u64,
    /// Output directory for traces and artifacts.
    pub out_dir: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tol: crate::DEFAULT_TOL,
            resolution: 16,
            step: 0.5,
            max_iters: 5000,
            seed: 1,
            out_dir: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::invalid("config: tol must be positive"));
        }
        if self.resolution < 4 {
            return Err(Error::invalid("config: resolution must be at least 4"));
        }
        if !(self.step > 0.0) {
            return Err(Error::invalid("config: step must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("config: max_iters must be positive"));
        }
        Ok(())
    }
}

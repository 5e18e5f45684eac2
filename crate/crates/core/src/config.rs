//! Centralized numerical tolerances and optimizer settings.
//!
//! Every threshold used by the certifier, the reconstruction code and the
//! perturbation checks lives here so that a problem spec can override them
//! in one place.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Number of multi-start restarts for ratio optimization.
    pub restarts: usize,
    /// Master seed from which restart seeds are split.
    pub seed: u64,
    /// Local search stops once the objective changes by less than this.
    pub converge: f64,
    /// Hard iteration cap for one local search.
    pub max_local_iters: usize,
    /// A lower-ratio witness below this value refutes the K-frame property.
    pub refute_ratio: f64,
    /// Relative singular value cutoff for numerical rank.
    pub rank_rel: f64,
    /// Relative least-squares residual accepted for span membership.
    pub span_rel: f64,
    /// IRLS iteration cap.
    pub irls_max_iters: usize,
    /// First-order optimality tolerance for minimal-norm coefficients.
    pub irls_optimality: f64,
    /// Relative residual accepted by reconstruction identities.
    pub reconstruction_rel: f64,
    /// Multiplicative slack used by inequality checks.
    pub inequality_slack: f64,
    /// Absolute floor added to premise comparisons (rounding in `g - f`).
    pub premise_abs: f64,
    /// Run restarts on the rayon pool.
    pub parallel: bool,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            restarts: 64,
            seed: 0x5eed,
            converge: 1e-10,
            max_local_iters: 2000,
            refute_ratio: 1e-8,
            rank_rel: 1e-10,
            span_rel: 1e-8,
            irls_max_iters: 500,
            irls_optimality: 1e-6,
            reconstruction_rel: 1e-7,
            inequality_slack: 1e-6,
            premise_abs: 1e-12,
            parallel: true,
        }
    }
}

impl Tolerances {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn serial(mut self) -> Self {
        self.parallel = false;
        self
    }
}

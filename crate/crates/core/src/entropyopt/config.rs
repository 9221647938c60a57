use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tunables shared by every optimizer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Random starts per pure-state search (in addition to structured seeds).
    pub restarts: usize,
    pub max_iters: usize,
    pub obj_tol: f64,
    pub grad_tol: f64,
    pub seed: u64,
    /// Maximum ensemble size; `None` means `d²` for input dimension `d`.
    pub ensemble_cap: Option<usize>,
    /// Random isometry starts for fixed-average ensemble searches.
    pub ensemble_restarts: usize,
    /// Outer iterations of the capacity loop.
    pub capacity_iters: usize,
    /// Largest product-space input dimension the product analyses accept.
    pub product_dim_cap: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iters: 2000,
            obj_tol: 1e-9,
            grad_tol: 1e-7,
            seed: 0,
            ensemble_cap: None,
            ensemble_restarts: 6,
            capacity_iters: 200,
            product_dim_cap: 16,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive_counts = [
            ("restarts", self.restarts),
            ("max_iters", self.max_iters),
            ("ensemble_restarts", self.ensemble_restarts),
            ("capacity_iters", self.capacity_iters),
            ("product_dim_cap", self.product_dim_cap),
            ("ensemble_cap", self.ensemble_cap.unwrap_or(1)),
        ];
        for (name, value) in positive_counts {
            if value == 0 {
                return Err(Error::ParameterOutOfRange {
                    name: name.into(),
                    value: 0.0,
                });
            }
        }
        for (name, value) in [("obj_tol", self.obj_tol), ("grad_tol", self.grad_tol)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::ParameterOutOfRange {
                    name: name.into(),
                    value,
                });
            }
        }
        Ok(())
    }

    pub fn ensemble_cap_for(&self, dim: usize) -> usize {
        self.ensemble_cap.unwrap_or(dim * dim).max(1)
    }
}

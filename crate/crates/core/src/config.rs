//! Every tunable default in one place. Missing keys in a config file fall
//! back to these values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sdp::SolverConfig;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HinfConfig {
    /// Uniform frequency grid on `[0, 2π)`.
    pub grid_points: usize,
    /// Golden-section tolerance in `ω`.
    pub refine_tol: f64,
}

impl Default for HinfConfig {
    fn default() -> Self {
        Self {
            grid_points: 4096,
            refine_tol: 1e-8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    /// Points of the uniform `Δ` grid for `s = 1`.
    pub delta_grid: usize,
    /// Random unit-norm samples for `s > 1`.
    pub samples: usize,
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            delta_grid: 41,
            samples: 200,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub solver: SolverConfig,
    pub hinf: HinfConfig,
    pub sampling: SamplingConfig,
    pub alpha: f64,
}

impl Config {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(m.to_string()));
        if !(self.solver.margin > 0.0) || !(self.solver.tol > 0.0) || self.solver.max_iter == 0 {
            return bad("solver margin, tol and max_iter must be positive");
        }
        if !(self.solver.bound > 0.0) {
            return bad("solver bound must be positive");
        }
        if self.hinf.grid_points < 3 || !(self.hinf.refine_tol > 0.0) {
            return bad("hinf grid needs at least 3 points and a positive tolerance");
        }
        if self.sampling.delta_grid == 0 || self.sampling.samples == 0 {
            return bad("sampling counts must be positive");
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad("alpha must be nonnegative");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = Config::from_json(r#"{"solver": {"margin": 1e-6}, "sampling": {"seed": 9}}"#).unwrap();
        assert_eq!(cfg.solver.margin, 1e-6);
        assert_eq!(cfg.solver.max_iter, SolverConfig::default().max_iter);
        assert_eq!(cfg.sampling.seed, 9);
        assert_eq!(cfg.sampling.delta_grid, 41);
        assert_eq!(cfg.hinf.grid_points, 4096);
        assert_eq!(cfg.alpha, 0.0);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(Config::from_json(r#"{"alpha": -1}"#).is_err());
        assert!(Config::from_json(r#"{"solver": {"margin": 0}}"#).is_err());
        assert!(Config::from_json(r#"{"unknown": 1}"#).is_err());
    }
}

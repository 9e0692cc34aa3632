use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

/// Shared numeric knobs. Every field has a working default; the CLI overrides
/// individual fields from flags.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Number of points in evaluation grids.
    pub grid_points: usize,
    /// Decreasing eps schedule for Stieltjes inversion (two points give one
    /// Richardson extrapolation step).
    pub eps_schedule: Vec<f64>,
    /// Tolerance on total mass of recovered densities.
    pub mass_tol: f64,
    /// Convergence tolerance for fixed-point and Newton solvers.
    pub solver_tol: f64,
    /// Iteration cap for all solvers.
    pub max_iter: usize,
    /// Fractional padding added to support hulls when building grids.
    pub pad_fraction: f64,
    /// Where CLI output goes; `None` means stdout.
    pub output_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid_points: 2049,
            eps_schedule: vec![1e-2, 5e-3],
            mass_tol: 1e-6,
            solver_tol: 1e-12,
            max_iter: 10_000,
            pad_fraction: 0.1,
            output_path: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 9 {
            return Err(Error::Parse("grid_points must be at least 9".into()));
        }
        if self.eps_schedule.is_empty() {
            return Err(Error::Parse("eps_schedule must be nonempty".into()));
        }
        if self.eps_schedule.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
            return Err(Error::Parse("eps_schedule entries must be positive and finite".into()));
        }
        if self.eps_schedule.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Parse("eps_schedule must be strictly decreasing".into()));
        }
        if !(self.mass_tol > 0.0) || !(self.solver_tol > 0.0) {
            return Err(Error::Parse("tolerances must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Parse("max_iter must be positive".into()));
        }
        if !(self.pad_fraction >= 0.0) || !self.pad_fraction.is_finite() {
            return Err(Error::Parse("pad_fraction must be a nonnegative finite number".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.grid_points, 2049);
        assert_eq!(cfg.eps_schedule, vec![1e-2, 5e-3]);
        assert_eq!(cfg.mass_tol, 1e-6);
        assert_eq!(cfg.solver_tol, 1e-12);
        assert_eq!(cfg.max_iter, 10_000);
        assert_eq!(cfg.pad_fraction, 0.1);
    }

    #[test]
    fn increasing_eps_schedule_rejected() {
        let cfg = RunConfig {
            eps_schedule: vec![5e-3, 1e-2],
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn tiny_grid_rejected() {
        let cfg = RunConfig {
            grid_points: 4,
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}

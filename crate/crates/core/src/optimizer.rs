//! Search for the displacement offset minimizing the displaced-nulling error.
//!
//! The objective is not known to be unimodal over the whole bracket, so a
//! coarse uniform scan (always including zero) locates the best basin first
//! and a golden-section pass polishes it. Everything is plain deterministic
//! arithmetic: identical inputs give bit-identical results.

use crate::receiver::{total_error, ReceiverConfig, ReceiverError};
use std::f64::consts::SQRT_2;
use thiserror::Error;

/// Number of points of the coarse scan (zero is added separately when the
/// bracket does not hit it exactly).
const GRID_POINTS: usize = 41;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("bracket [{0}, {1}] must be finite, non-empty, and contain zero")]
    InvalidBracket(f64, f64),
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error(transparent)]
    Receiver(#[from] ReceiverError),
}

/// Outcome of one displacement optimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaResult {
    pub beta_star: f64,
    /// `beta_star²`, the quantity usually plotted against signal energy.
    pub beta_star_sq: f64,
    pub error_at_beta: f64,
    pub error_at_zero: f64,
}

/// Default search bracket: reaches past the outermost nulling candidate of
/// the arm by two vacuum units on either side.
pub fn default_bracket(scale: f64) -> (f64, f64) {
    let reach = 3.0 * scale / SQRT_2 + 2.0;
    (-reach, reach)
}

/// Minimizes the displaced-nulling symbol error over real `beta`.
///
/// Scans a uniform grid over `bracket` (plus `beta = 0`), then refines the
/// best basin by golden-section search until the interval is narrower than
/// `tol`. The refined point is only kept if it actually improves on the
/// scan, so `error_at_beta ≤ error_at_zero` always holds.
pub fn optimize_beta(
    nbar: f64,
    bracket: (f64, f64),
    tol: f64,
) -> Result<BetaResult, OptimizerError> {
    let (lo, hi) = bracket;
    if !lo.is_finite() || !hi.is_finite() || lo >= hi || lo > 0.0 || hi < 0.0 {
        return Err(OptimizerError::InvalidBracket(lo, hi));
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(OptimizerError::InvalidTolerance(tol));
    }

    let objective = |beta: f64| -> Result<f64, OptimizerError> {
        Ok(total_error(&ReceiverConfig::type_ii(nbar, beta)?))
    };

    let error_at_zero = objective(0.0)?;
    let mut best_beta = 0.0;
    let mut best_error = error_at_zero;
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let mut best_index = None;
    for k in 0..GRID_POINTS {
        let beta = if k == GRID_POINTS - 1 { hi } else { lo + k as f64 * step };
        let err = objective(beta)?;
        if err < best_error {
            best_beta = beta;
            best_error = err;
            best_index = Some(k);
        }
    }

    // Refine inside the cell pair around the best scan point (around zero if
    // the scan never beat it).
    let center = best_beta;
    let (mut a, mut b) = match best_index {
        Some(k) => (
            if k == 0 { lo } else { lo + (k - 1) as f64 * step },
            if k >= GRID_POINTS - 2 { hi } else { lo + (k + 1) as f64 * step },
        ),
        None => ((center - step).max(lo), (center + step).min(hi)),
    };

    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = objective(x1)?;
    let mut f2 = objective(x2)?;
    while (b - a).abs() > tol {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = objective(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = objective(x2)?;
        }
    }
    let (refined_beta, refined_error) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
    if refined_error < best_error {
        best_beta = refined_beta;
        best_error = refined_error;
    }

    Ok(BetaResult {
        beta_star: best_beta,
        beta_star_sq: best_beta * best_beta,
        error_at_beta: best_error,
        error_at_zero,
    })
}

//! Analytic error model of the two-stage receiver.
//!
//! Stage 1 measures the P quadrature of the homodyne arm and picks the
//! nearest of the four row means; stage 2 feeds the chosen row forward and
//! sequentially nulls its four candidates (offset by a displacement `beta`)
//! while counting photons. The click count N selects column `min(N+1, 4)`.
//!
//! A wrong row decision always produces a symbol error because every
//! fed-forward candidate then lies in the wrong row, so the total symbol
//! error factorizes into a row term and a column term. The brute-force
//! enumeration in the tests pins that factorization down.

use crate::constellation::{build_qam16, ConstellationError};
use crate::quantum::{click_distribution, gaussian_tail, Amplitude, RateSequence, QUADRATURE_SIGMA};
use std::f64::consts::SQRT_2;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReceiverError {
    #[error(transparent)]
    Constellation(#[from] ConstellationError),
    #[error("displacement offset must be finite, got {0}")]
    InvalidBeta(f64),
}

/// Receiver operating mode: exact nulling forces `beta = 0`; the displaced
/// mode offsets every nulling stage by the same real `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiverMode {
    TypeI,
    TypeII,
}

/// A validated receiver operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverConfig {
    nbar: f64,
    beta: f64,
    mode: ReceiverMode,
}

impl ReceiverConfig {
    /// Exact-nulling configuration (`beta = 0`).
    pub fn type_i(nbar: f64) -> Result<Self, ReceiverError> {
        Self::validate_nbar(nbar)?;
        Ok(Self { nbar, beta: 0.0, mode: ReceiverMode::TypeI })
    }

    /// Displaced-nulling configuration with a real offset `beta` shared by
    /// all four stages, applied along the Re axis.
    pub fn type_ii(nbar: f64, beta: f64) -> Result<Self, ReceiverError> {
        Self::validate_nbar(nbar)?;
        if !beta.is_finite() {
            return Err(ReceiverError::InvalidBeta(beta));
        }
        Ok(Self { nbar, beta, mode: ReceiverMode::TypeII })
    }

    fn validate_nbar(nbar: f64) -> Result<(), ReceiverError> {
        if !nbar.is_finite() || nbar < 0.0 {
            return Err(ConstellationError::InvalidPhotonNumber(nbar).into());
        }
        Ok(())
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mode(&self) -> ReceiverMode {
        self.mode
    }
}

/// `entry(r, r')` is the probability of deciding row `r'` when row `r` was
/// sent. Rows sum to one; the matrix is symmetric under the reflection
/// `(r, r') → (5−r, 5−r')`.
#[derive(Debug, Clone, PartialEq)]
pub struct RowConfusion {
    entries: [[f64; 4]; 4],
}

impl RowConfusion {
    /// Probability of deciding `decided_row` given `true_row`, both 1-based.
    pub fn entry(&self, true_row: usize, decided_row: usize) -> f64 {
        self.entries[true_row - 1][decided_row - 1]
    }

    /// Mean over rows of the probability of a correct row decision.
    pub fn average_diagonal(&self) -> f64 {
        (0..4).map(|r| self.entries[r][r]).sum::<f64>() / 4.0
    }

    pub fn rows(&self) -> &[[f64; 4]; 4] {
        &self.entries
    }
}

/// Homodyne-arm means of the P quadrature, one per row, ascending.
pub fn row_means(scale: f64) -> [f64; 4] {
    crate::constellation::GRID_LEVELS.map(|b| scale * b / SQRT_2)
}

/// Decision thresholds between adjacent row means (their midpoints).
pub fn row_thresholds(scale: f64) -> [f64; 3] {
    [-2.0, 0.0, 2.0].map(|b| scale * b / SQRT_2)
}

/// Nearest-mean row decision for a homodyne outcome `x`; ties go to the
/// lower row index, which keeps Monte Carlo replay deterministic.
pub fn decide_row(scale: f64, x: f64) -> usize {
    let means = row_means(scale);
    let mut best = 1;
    let mut best_dist = (x - means[0]).abs();
    for (r, mean) in means.iter().enumerate().skip(1) {
        let dist = (x - mean).abs();
        if dist < best_dist {
            best = r + 1;
            best_dist = dist;
        }
    }
    best
}

/// Confusion matrix of the maximum-likelihood row decision at mean photon
/// number `nbar`. Entries are Gaussian cell probabilities between adjacent
/// thresholds with noise `σ = 1/2` on the homodyne arm.
pub fn row_confusion(nbar: f64) -> Result<RowConfusion, ReceiverError> {
    let c = build_qam16(nbar)?;
    let means = row_means(c.scale());
    let thresholds = row_thresholds(c.scale());
    let mut entries = [[0.0; 4]; 4];
    for (r, mu) in means.iter().enumerate() {
        // P(x ≤ T) = Q((μ − T)/σ); cells are (T_{r'−1}, T_{r'}].
        let cdf_at = |t: f64| gaussian_tail((mu - t) / QUADRATURE_SIGMA);
        let mut lower = 0.0;
        for (rd, entry) in entries[r].iter_mut().enumerate() {
            let upper = if rd < 3 { cdf_at(thresholds[rd]) } else { 1.0 };
            *entry = upper - lower;
            lower = upper;
        }
    }
    Ok(RowConfusion { entries })
}

/// Photon rates seen while nulling each candidate in sequence:
/// `rate_k = |true_arm_amp − candidates[k] + beta|²` with `beta` real.
pub fn stage2_rates(
    true_arm_amp: Amplitude,
    candidates: &[Amplitude; 4],
    beta: f64,
) -> RateSequence {
    let offset = Amplitude::new(beta, 0.0);
    let rates = candidates.map(|c| (true_arm_amp - c + offset).norm_sqr());
    RateSequence::new(rates).expect("finite amplitudes give finite non-negative rates")
}

/// Column hypothesis selected by a click count: `min(N + 1, 4)`.
pub fn decide_column(clicks: u64) -> usize {
    (clicks.saturating_add(1)).min(4) as usize
}

/// Probability of deciding the correct column for each true column, given a
/// correct row decision. Independent of which row: within the correct row
/// the nulling residues are purely real, so every row sees the same rates.
pub fn column_success_given_correct_row(
    nbar: f64,
    beta: f64,
) -> Result<[f64; 4], ReceiverError> {
    if !beta.is_finite() {
        return Err(ReceiverError::InvalidBeta(beta));
    }
    let c = build_qam16(nbar)?;
    let (_, nulling_arm) = c.split();
    let candidates = nulling_arm.row_candidates(1)?;
    let mut success = [0.0; 4];
    for (j, s) in success.iter_mut().enumerate() {
        let rates = stage2_rates(candidates[j], &candidates, beta);
        let dist = click_distribution(&rates, 1.0)
            .expect("valid configurations produce finite rates");
        // True column j+1 is decided from N = j clicks (N ≥ 3 for the last).
        *s = dist.as_array()[j];
    }
    Ok(success)
}

/// Total symbol error probability of the receiver at `config`:
/// `1 − P(row correct) · P(column correct | row correct)` averaged over the
/// uniform priors.
pub fn total_error(config: &ReceiverConfig) -> f64 {
    let confusion = row_confusion(config.nbar()).expect("config is validated");
    let success = column_success_given_correct_row(config.nbar(), config.beta())
        .expect("config is validated");
    let column_term = success.iter().sum::<f64>() / 4.0;
    1.0 - confusion.average_diagonal() * column_term
}

//! The 16-QAM coherent-state alphabet and the 50:50 input beam splitter.
//!
//! Symbols live on the grid `s·(a + i·b)` with `a, b ∈ {−3, −1, +1, +3}`.
//! Rows group symbols sharing an imaginary part (the P quadrature measured by
//! the homodyne stage) and are ordered by ascending `Im`; columns are ordered
//! by ascending `Re` within a row, which also fixes the nulling sequence
//! 1 → 2 → 3 → 4 of the photon-counting stage.

use crate::quantum::Amplitude;
use std::f64::consts::SQRT_2;
use thiserror::Error;

/// Quadrature levels of the 4×4 grid, ascending.
pub const GRID_LEVELS: [f64; 4] = [-3.0, -1.0, 1.0, 3.0];

/// Mean of `a² + b²` over the grid; fixes `scale = √(n̄ / 10)`.
const GRID_MEAN_ENERGY: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstellationError {
    #[error("mean photon number must be finite and non-negative, got {0}")]
    InvalidPhotonNumber(f64),
    #[error("row index must be in 1..=4, got {0}")]
    RowIndexOutOfRange(usize),
}

/// The 16 signal amplitudes at a given mean photon number, with uniform
/// priors. Symbol index `m` maps to row `m / 4 + 1` and column `m % 4 + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    amplitudes: [Amplitude; 16],
    scale: f64,
    nbar: f64,
}

/// One output arm of the 50:50 beam splitter: every amplitude divided by √2.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmView {
    amplitudes: [Amplitude; 16],
}

/// Builds the 16-QAM constellation with mean photon number `nbar`.
pub fn build_qam16(nbar: f64) -> Result<Constellation, ConstellationError> {
    if !nbar.is_finite() || nbar < 0.0 {
        return Err(ConstellationError::InvalidPhotonNumber(nbar));
    }
    let scale = (nbar / GRID_MEAN_ENERGY).sqrt();
    let mut amplitudes = [Amplitude::new(0.0, 0.0); 16];
    for (m, amp) in amplitudes.iter_mut().enumerate() {
        let row = m / 4;
        let col = m % 4;
        *amp = Amplitude::new(scale * GRID_LEVELS[col], scale * GRID_LEVELS[row]);
    }
    Ok(Constellation { amplitudes, scale, nbar })
}

impl Constellation {
    pub fn amplitudes(&self) -> &[Amplitude; 16] {
        &self.amplitudes
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    /// Uniform prior of each symbol.
    pub fn prior(&self) -> f64 {
        1.0 / 16.0
    }

    /// Row (1..=4, ascending `Im`) of symbol `m`.
    pub fn row_of(&self, m: usize) -> usize {
        m / 4 + 1
    }

    /// Column (1..=4, ascending `Re`) of symbol `m`.
    pub fn col_of(&self, m: usize) -> usize {
        m % 4 + 1
    }

    /// Symbol index of the (row, column) cell, both 1-based.
    pub fn symbol_index(&self, row: usize, col: usize) -> usize {
        (row - 1) * 4 + (col - 1)
    }

    /// Splits the input on a 50:50 beam splitter into the homodyne arm and
    /// the nulling arm. Both carry `α/√2`, so each arm sees half the energy.
    pub fn split(&self) -> (ArmView, ArmView) {
        let mut arm = [Amplitude::new(0.0, 0.0); 16];
        for (dst, src) in arm.iter_mut().zip(self.amplitudes.iter()) {
            *dst = src / SQRT_2;
        }
        (ArmView { amplitudes: arm }, ArmView { amplitudes: arm })
    }
}

impl ArmView {
    pub fn amplitudes(&self) -> &[Amplitude; 16] {
        &self.amplitudes
    }

    /// The four arm amplitudes in row `row`, ordered by ascending `Re`.
    /// This ordering is the nulling sequence of the photon-counting stage.
    pub fn row_candidates(&self, row: usize) -> Result<[Amplitude; 4], ConstellationError> {
        if !(1..=4).contains(&row) {
            return Err(ConstellationError::RowIndexOutOfRange(row));
        }
        let base = (row - 1) * 4;
        Ok([
            self.amplitudes[base],
            self.amplitudes[base + 1],
            self.amplitudes[base + 2],
            self.amplitudes[base + 3],
        ])
    }
}

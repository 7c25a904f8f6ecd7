//! Closed-form reference values used by tests and the `validate` command.
//!
//! Everything here is independent of the implementation path it checks: the
//! click statistics use the distinct-rate hypoexponential sum instead of the
//! matrix exponential, and the binary discrimination bound is the two-state
//! closed form rather than the iterative solver.

use crate::quantum::{coherent_overlap, Amplitude};

/// `[P(N=0), P(N=1), P(N=2), P(N≥3)]` for a birth process whose k-th stage
/// completes with rate `stage_rates[k]`, observed for time `t`.
///
/// Valid only for pairwise-distinct rates; coincident rates make the
/// partial-fraction denominators vanish.
pub fn hypoexponential_click_pmf(stage_rates: [f64; 3], t: f64) -> [f64; 4] {
    let p0 = count_pmf(&stage_rates[..1], t);
    let p1 = count_pmf(&stage_rates[..2], t);
    let p2 = count_pmf(&stage_rates[..3], t);
    [p0, p1, p2, 1.0 - p0 - p1 - p2]
}

/// `P(N = n)` where `rates` holds the n completed stage rates followed by the
/// rate of the stage still running at time `t`.
fn count_pmf(rates: &[f64], t: f64) -> f64 {
    let n = rates.len() - 1;
    let prefactor: f64 = rates[..n].iter().product();
    let mut sum = 0.0;
    for k in 0..=n {
        let mut denom = 1.0;
        for j in 0..=n {
            if j != k {
                denom *= rates[j] - rates[k];
            }
        }
        sum += (-rates[k] * t).exp() / denom;
    }
    prefactor * sum
}

/// Minimum error probability for discriminating `|a⟩` from `|b⟩` with equal
/// priors: `(1 − √(1 − |⟨a|b⟩|²)) / 2`.
pub fn binary_helstrom_error(a: Amplitude, b: Amplitude) -> f64 {
    let overlap_sq = coherent_overlap(a, b).norm_sqr();
    (1.0 - (1.0 - overlap_sq).sqrt()) / 2.0
}

/// Composite Simpson quadrature of `f` over `[a, b]` with an even number of
/// panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels >= 2 && panels.is_multiple_of(2), "panels must be even");
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for k in 1..panels {
        let weight = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += weight * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

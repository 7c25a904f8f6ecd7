//! Primitive conventions and math shared by every other module: complex
//! field amplitudes, coherent-state overlaps, Gaussian quadrature statistics,
//! and the click-count distribution of a feed-forward photon counter.
//!
//! Conventions fixed here and used everywhere else:
//!
//! * an amplitude `α` has quadrature means `⟨x̂⟩ = Re α`, `⟨p̂⟩ = Im α` and
//!   vacuum variance 1/4 per quadrature;
//! * a constant residue `γ` held over the unit symbol interval produces
//!   Poisson clicks with mean `|γ|²`, so `|α|²` is a mean photon number.

use nalgebra::Matrix4;
use num_complex::Complex64;
use thiserror::Error;

/// A coherent-state amplitude (or displacement) in phase space.
///
/// Dimensionless; `norm_sqr()` is a mean photon number.
pub type Amplitude = Complex64;

/// Standard deviation of a single quadrature measurement on a coherent state.
pub const QUADRATURE_SIGMA: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("photon rate must be finite and non-negative, got {0}")]
    InvalidRate(f64),
    #[error("symbol interval must be positive and finite, got {0}")]
    InvalidDuration(f64),
}

/// Overlap `⟨a|b⟩ = exp(−(|a|² + |b|²)/2 + a̅·b)` of two coherent states.
///
/// `|result| ≤ 1`, with equality exactly when `a == b`.
pub fn coherent_overlap(a: Amplitude, b: Amplitude) -> Complex64 {
    let exponent = a.conj() * b - Complex64::new((a.norm_sqr() + b.norm_sqr()) / 2.0, 0.0);
    exponent.exp()
}

/// Upper tail `Q(x) = P(Z > x)` of the standard normal distribution.
pub fn gaussian_tail(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)
}

/// Density at `x` of a homodyne measurement of the P quadrature of `|α⟩`:
/// normal with mean `Im α` and variance 1/4.
pub fn homodyne_pdf(alpha: Amplitude, x: f64) -> f64 {
    let z = (x - alpha.im) / QUADRATURE_SIGMA;
    (-0.5 * z * z).exp() / (QUADRATURE_SIGMA * (2.0 * std::f64::consts::PI).sqrt())
}

/// Expected photons per symbol interval while nulling candidates 1..4.
///
/// `rates()[k]` applies between the k-th and (k+1)-th click.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSequence([f64; 4]);

impl RateSequence {
    pub fn new(rates: [f64; 4]) -> Result<Self, QuantumError> {
        for &r in &rates {
            if !r.is_finite() || r < 0.0 {
                return Err(QuantumError::InvalidRate(r));
            }
        }
        Ok(Self(rates))
    }

    pub fn rates(&self) -> [f64; 4] {
        self.0
    }
}

/// Probabilities of seeing 0, 1, 2, or at least 3 clicks in one symbol
/// interval. Counts of 3 and above are collapsed into one bucket because the
/// receiver's decision never distinguishes them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClickDistribution {
    p0: f64,
    p1: f64,
    p2: f64,
    p3plus: f64,
}

impl ClickDistribution {
    fn from_first_three(p0: f64, p1: f64, p2: f64) -> Self {
        let clamp = |p: f64| p.clamp(0.0, 1.0);
        let (p0, p1, p2) = (clamp(p0), clamp(p1), clamp(p2));
        let p3plus = clamp(1.0 - p0 - p1 - p2);
        Self { p0, p1, p2, p3plus }
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }

    pub fn p3plus(&self) -> f64 {
        self.p3plus
    }

    /// `[P(N=0), P(N=1), P(N=2), P(N≥3)]`.
    pub fn as_array(&self) -> [f64; 4] {
        [self.p0, self.p1, self.p2, self.p3plus]
    }
}

/// Click-count distribution of a pure-birth counting process over `duration`.
///
/// The process clicks with rate `rates()[k]` after k clicks have been seen;
/// the count bucket N ≥ 3 is absorbing, so the fourth rate never influences
/// the result. Computed through the matrix exponential of the 4×4 generator,
/// which handles repeated rates without any special casing.
pub fn click_distribution(
    rates: &RateSequence,
    duration: f64,
) -> Result<ClickDistribution, QuantumError> {
    if !duration.is_finite() || duration <= 0.0 {
        return Err(QuantumError::InvalidDuration(duration));
    }
    let [l1, l2, l3, _] = rates.rates();
    #[rustfmt::skip]
    let generator = Matrix4::new(
        -l1,  l1,  0.0, 0.0,
        0.0, -l2,  l2,  0.0,
        0.0,  0.0, -l3, l3,
        0.0,  0.0, 0.0, 0.0,
    ) * duration;
    let transition = generator.exp();
    // Row 0 is the distribution of a process started before the first click.
    Ok(ClickDistribution::from_first_three(
        transition[(0, 0)],
        transition[(0, 1)],
        transition[(0, 2)],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut acc = f(a) + f(b);
        for k in 1..panels {
            let weight = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += weight * f(a + k as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn overlap_of_identical_states_is_one() {
        assert_eq!(coherent_overlap(Amplitude::new(0.0, 0.0), Amplitude::new(0.0, 0.0)), Complex64::new(1.0, 0.0));
        let alpha = Amplitude::new(2.0, 3.0);
        assert_eq!(coherent_overlap(alpha, alpha), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn overlap_of_vacuum_and_unit_amplitude() {
        let o = coherent_overlap(Amplitude::new(0.0, 0.0), Amplitude::new(1.0, 0.0));
        assert!((o.norm_sqr() - (-1.0f64).exp()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn overlap_magnitude_matches_distance_formula(
            (ar, ai, br, bi) in (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64)
        ) {
            let a = Amplitude::new(ar, ai);
            let b = Amplitude::new(br, bi);
            let expected = (-(a - b).norm_sqr()).exp();
            prop_assert!((coherent_overlap(a, b).norm_sqr() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_tail_at_zero_is_half() {
        assert_eq!(gaussian_tail(0.0), 0.5);
    }

    #[test]
    fn gaussian_tail_vanishes_at_infinity() {
        assert_eq!(gaussian_tail(f64::INFINITY), 0.0);
        assert!(gaussian_tail(50.0) < 1e-300);
    }

    #[test]
    fn gaussian_tail_at_one() {
        // Independent route: integrate the standard normal density over [1, 12].
        let density = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let numeric = simpson(density, 1.0, 12.0, 20_000);
        assert!((gaussian_tail(1.0) - numeric).abs() < 1e-10);
        assert!((gaussian_tail(1.0) - 0.158_655_253_931_457_05).abs() < 1e-10);
    }

    #[test]
    fn gaussian_tail_symmetry_and_monotonicity() {
        let mut prev = f64::INFINITY;
        for k in -40..=40 {
            let x = k as f64 / 10.0;
            let q = gaussian_tail(x);
            assert!((q + gaussian_tail(-x) - 1.0).abs() < 1e-15);
            assert!(q < prev);
            prev = q;
        }
    }

    #[test]
    fn homodyne_pdf_peak_of_vacuum() {
        let peak = homodyne_pdf(Amplitude::new(0.0, 0.0), 0.0);
        assert!((peak - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn homodyne_pdf_is_maximal_at_the_p_quadrature_mean() {
        let alpha = Amplitude::new(0.0, 1.0);
        let at_mean = homodyne_pdf(alpha, 1.0);
        for k in -50..=50 {
            let x = 1.0 + k as f64 / 10.0;
            assert!(homodyne_pdf(alpha, x) <= at_mean);
        }
    }

    #[test]
    fn homodyne_pdf_normalizes_and_recovers_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let alpha = Amplitude::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let (lo, hi) = (alpha.im - 12.0, alpha.im + 12.0);
            let mass = simpson(|x| homodyne_pdf(alpha, x), lo, hi, 40_000);
            let mean = simpson(|x| x * homodyne_pdf(alpha, x), lo, hi, 40_000);
            let var = simpson(
                |x| (x - alpha.im).powi(2) * homodyne_pdf(alpha, x),
                lo,
                hi,
                40_000,
            );
            assert!((mass - 1.0).abs() < 1e-10);
            assert!((mean - alpha.im).abs() < 1e-8);
            assert!((var - 0.25).abs() < 1e-8);
        }
    }

    #[test]
    fn click_distribution_rejects_bad_inputs() {
        assert!(RateSequence::new([1.0, -0.5, 0.0, 0.0]).is_err());
        assert!(RateSequence::new([f64::NAN, 0.0, 0.0, 0.0]).is_err());
        let rates = RateSequence::new([1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(click_distribution(&rates, 0.0).is_err());
        assert!(click_distribution(&rates, -1.0).is_err());
        assert!(click_distribution(&rates, f64::INFINITY).is_err());
    }

    #[test]
    fn no_light_means_no_clicks() {
        let rates = RateSequence::new([0.0; 4]).unwrap();
        let d = click_distribution(&rates, 1.0).unwrap();
        assert_eq!(d.as_array(), [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn single_stage_reduces_to_poisson_zero_split() {
        let rates = RateSequence::new([2.0, 0.0, 0.0, 0.0]).unwrap();
        let d = click_distribution(&rates, 1.0).unwrap();
        assert!((d.p0() - (-2.0f64).exp()).abs() < 1e-14);
        assert!((d.p1() - (1.0 - (-2.0f64).exp())).abs() < 1e-14);
        assert!(d.p2().abs() < 1e-14);
        assert!(d.p3plus().abs() < 1e-14);
    }

    #[test]
    fn distinct_rates_match_hypoexponential_closed_form() {
        let rates = RateSequence::new([1.0, 2.0, 3.0, 4.0]).unwrap();
        let d = click_distribution(&rates, 1.0).unwrap();
        let expected = oracles::hypoexponential_click_pmf([1.0, 2.0, 3.0], 1.0);
        for (got, want) in d.as_array().iter().zip(expected.iter()) {
            assert!((got - want).abs() < 1e-10, "got {got}, want {want}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn click_probabilities_sum_to_one(
            (l1, l2, l3, l4) in (0.0..40.0f64, 0.0..40.0f64, 0.0..40.0f64, 0.0..40.0f64)
        ) {
            let rates = RateSequence::new([l1, l2, l3, l4]).unwrap();
            let d = click_distribution(&rates, 1.0).unwrap();
            let sum: f64 = d.as_array().iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            for p in d.as_array() {
                prop_assert!((0.0..=1.0).contains(&p));
            }
        }
    }

    #[test]
    fn click_distribution_is_continuous_in_rates() {
        // Includes exactly repeated rates, where naive closed forms blow up.
        let bases: [[f64; 4]; 5] = [
            [1.0, 1.0, 1.0, 0.0],
            [2.0, 2.0, 0.5, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [3.0, 1.0, 3.0, 0.0],
            [10.0, 10.0, 10.0, 0.0],
        ];
        let eps = 1e-6;
        for base in bases {
            let d0 = click_distribution(&RateSequence::new(base).unwrap(), 1.0).unwrap();
            for k in 0..4 {
                let mut bumped = base;
                bumped[k] += eps;
                let d1 = click_distribution(&RateSequence::new(bumped).unwrap(), 1.0).unwrap();
                for (a, b) in d0.as_array().iter().zip(d1.as_array().iter()) {
                    assert!((a - b).abs() <= 10.0 * eps, "jump {} at rate {k} of {base:?}", (a - b).abs());
                }
            }
        }
    }

    #[test]
    fn click_distribution_matches_interarrival_sampling() {
        let rates = RateSequence::new([1.3, 0.4, 2.2, 0.9]).unwrap();
        let analytic = click_distribution(&rates, 1.0).unwrap().as_array();
        let trials = 1_000_000u64;
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let mut counts = [0u64; 4];
        let lambdas = rates.rates();
        for _ in 0..trials {
            let mut t = 0.0;
            let mut clicks = 0usize;
            while clicks < 3 {
                let rate = lambdas[clicks];
                if rate == 0.0 {
                    break;
                }
                let u: f64 = rng.random();
                t -= (1.0 - u).ln() / rate;
                if t > 1.0 {
                    break;
                }
                clicks += 1;
            }
            counts[clicks] += 1;
        }
        for (bin, (&count, &p)) in counts.iter().zip(analytic.iter()).enumerate() {
            let freq = count as f64 / trials as f64;
            let se = (p * (1.0 - p) / trials as f64).sqrt();
            assert!(
                (freq - p).abs() <= 4.0 * se,
                "bin {bin}: freq {freq}, analytic {p}, se {se}"
            );
        }
    }
}

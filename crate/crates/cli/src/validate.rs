//! Built-in oracle suite behind `qamrx validate`.
//!
//! Every check recomputes a quantity through a route independent of the
//! implementation it validates and compares at the stated tolerance. All
//! randomness is seeded, so a passing binary keeps passing.

use qamrx_core::bounds::{helstrom_bound, min_error_povm, COMPLETENESS_TOL, POSITIVITY_TOL};
use qamrx_core::constellation::build_qam16;
use qamrx_core::montecarlo::estimate_error;
use qamrx_core::oracles::{binary_helstrom_error, hypoexponential_click_pmf};
use qamrx_core::quantum::{click_distribution, Amplitude, RateSequence};
use qamrx_core::receiver::{total_error, ReceiverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::{self, Write};

pub struct Check {
    pub name: &'static str,
    pub tolerance: &'static str,
    pub run: fn() -> Result<(), String>,
}

pub fn checks() -> Vec<Check> {
    vec![
        Check {
            name: "click distribution vs hypoexponential closed form",
            tolerance: "1e-10 absolute, 1000 random rate draws",
            run: check_hypoexponential,
        },
        Check {
            name: "binary discrimination vs closed-form bound",
            tolerance: "1e-9 absolute, 20 random state pairs",
            run: check_binary_helstrom,
        },
        Check {
            name: "analytic symbol error vs Monte Carlo",
            tolerance: "4 standard errors, 2e5 trials, nbar in {0.5, 2, 10}",
            run: check_mc_vs_analytic,
        },
        Check {
            name: "measurement certificates of the bound solver",
            tolerance: "completeness 1e-8, positivity 1e-10, residual 1e-8, nbar in {0.5, 5, 20}",
            run: check_povm_certificates,
        },
    ]
}

/// Runs every check, printing one PASS/FAIL line each; returns whether all
/// of them passed.
pub fn run_checks<W: Write>(checks: &[Check], out: &mut W) -> io::Result<bool> {
    let mut all_passed = true;
    for check in checks {
        match (check.run)() {
            Ok(()) => writeln!(out, "PASS  {}  [{}]", check.name, check.tolerance)?,
            Err(msg) => {
                all_passed = false;
                writeln!(out, "FAIL  {}  [{}]: {msg}", check.name, check.tolerance)?;
            }
        }
    }
    Ok(all_passed)
}

/// Rates in [0.1, 8) kept at least 0.1 apart, where the partial-fraction
/// closed form is well conditioned.
fn distinct_rates(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let r = [
            rng.random_range(0.1..8.0),
            rng.random_range(0.1..8.0),
            rng.random_range(0.1..8.0),
        ];
        let mut sorted = r;
        sorted.sort_by(f64::total_cmp);
        if sorted[1] - sorted[0] >= 0.1 && sorted[2] - sorted[1] >= 0.1 {
            return r;
        }
    }
}

fn check_hypoexponential() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    for draw in 0..1000 {
        let rates = distinct_rates(&mut rng);
        let fourth = rng.random_range(0.1..8.0);
        let sequence = RateSequence::new([rates[0], rates[1], rates[2], fourth])
            .map_err(|e| e.to_string())?;
        let got = click_distribution(&sequence, 1.0).map_err(|e| e.to_string())?;
        let want = hypoexponential_click_pmf(rates, 1.0);
        for (bin, (g, w)) in got.as_array().iter().zip(want.iter()).enumerate() {
            if (g - w).abs() > 1e-10 {
                return Err(format!(
                    "draw {draw} bin {bin}: expected {w:.15e}, got {g:.15e} (rates {rates:?})"
                ));
            }
        }
    }
    Ok(())
}

fn check_binary_helstrom() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    for draw in 0..20 {
        let a = Amplitude::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
        let b = Amplitude::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
        let solution =
            min_error_povm(&[a, b], &[0.5, 0.5], 1e-11).map_err(|e| e.to_string())?;
        let expected = binary_helstrom_error(a, b);
        let got = solution.error_probability();
        if (got - expected).abs() > 1e-9 {
            return Err(format!(
                "draw {draw} states {a}, {b}: expected {expected:.12e}, got {got:.12e}"
            ));
        }
    }
    Ok(())
}

fn check_mc_vs_analytic() -> Result<(), String> {
    let trials = 200_000u64;
    for (i, &nbar) in [0.5, 2.0, 10.0].iter().enumerate() {
        let config = ReceiverConfig::type_i(nbar).map_err(|e| e.to_string())?;
        let analytic = total_error(&config);
        let estimate = estimate_error(&config, trials, 0x5eed_0003 + i as u64);
        let se = (analytic * (1.0 - analytic) / trials as f64).sqrt();
        if (estimate.p_hat - analytic).abs() > 4.0 * se {
            return Err(format!(
                "nbar {nbar}: expected {analytic:.6e} within {:.1e}, got {:.6e}",
                4.0 * se,
                estimate.p_hat
            ));
        }
    }
    Ok(())
}

fn check_povm_certificates() -> Result<(), String> {
    for nbar in [0.5, 5.0, 20.0] {
        let constellation = build_qam16(nbar).map_err(|e| e.to_string())?;
        let (error, solution) =
            helstrom_bound(&constellation, 1e-8).map_err(|e| e.to_string())?;
        if solution.residual() > 1e-8 {
            return Err(format!("nbar {nbar}: residual {:.3e}", solution.residual()));
        }
        if solution.completeness_error() > COMPLETENESS_TOL {
            return Err(format!(
                "nbar {nbar}: completeness defect {:.3e}",
                solution.completeness_error()
            ));
        }
        if solution.min_operator_eigenvalue() < -POSITIVITY_TOL {
            return Err(format!(
                "nbar {nbar}: operator eigenvalue {:.3e}",
                solution.min_operator_eigenvalue()
            ));
        }
        let success = solution.success_probability();
        if !(1.0 / 16.0 - 1e-9..=1.0).contains(&success) || !(0.0..=1.0).contains(&error) {
            return Err(format!("nbar {nbar}: success {success}, error {error}"));
        }
    }
    Ok(())
}

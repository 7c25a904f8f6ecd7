//! Cross-module checks through the public API: the analytic error curves,
//! the optimizer, the bounds, and the Monte Carlo engine must tell one
//! consistent story.

use qamrx_core::bounds::{helstrom_bound, sql_error};
use qamrx_core::constellation::build_qam16;
use qamrx_core::montecarlo::estimate_error;
use qamrx_core::optimizer::{default_bracket, optimize_beta};
use qamrx_core::receiver::{total_error, ReceiverConfig};
use qamrx_core::sweep::{run_sweep, Spacing, SweepSpec};

#[test]
fn analytic_error_matches_monte_carlo_across_the_example_grid() {
    let trials = 1_000_000u64;
    for (k, &nbar) in [0.5, 1.0, 2.0, 5.0, 10.0, 20.0].iter().enumerate() {
        let config = ReceiverConfig::type_i(nbar).unwrap();
        let analytic = total_error(&config);
        let estimate = estimate_error(&config, trials, 11 + k as u64);
        let se = (analytic * (1.0 - analytic) / trials as f64).sqrt();
        assert!(
            (estimate.p_hat - analytic).abs() <= 4.0 * se,
            "nbar {nbar}: analytic {analytic}, monte carlo {} (se {se})",
            estimate.p_hat
        );
    }
}

#[test]
fn displaced_nulling_never_loses_to_exact_nulling() {
    let spec = SweepSpec {
        nbar_min: 0.25,
        nbar_max: 16.0,
        points: 9,
        spacing: Spacing::Log,
        trials: 0,
        seed: 0,
        beta_tol: 1e-5,
        helstrom_tol: 1e-8,
    };
    for record in run_sweep(&spec).unwrap() {
        assert!(record.type2_error <= record.type1_error + 1e-12);
        assert!(record.helstrom_error <= record.type2_error + 1e-6);
        assert!(record.helstrom_error <= record.sql_error + 1e-6);
    }
}

#[test]
fn optimizer_and_receiver_agree_on_the_operating_point() {
    let nbar = 3.0;
    let scale = build_qam16(nbar).unwrap().scale();
    let result = optimize_beta(nbar, default_bracket(scale), 1e-7).unwrap();
    let replayed = total_error(&ReceiverConfig::type_ii(nbar, result.beta_star).unwrap());
    assert_eq!(result.error_at_beta.to_bits(), replayed.to_bits());
    let zero = total_error(&ReceiverConfig::type_i(nbar).unwrap());
    assert_eq!(result.error_at_zero.to_bits(), zero.to_bits());
}

#[test]
fn benchmark_curves_bracket_the_receiver_at_moderate_energy() {
    let nbar = 6.0;
    let (helstrom, _) = helstrom_bound(&build_qam16(nbar).unwrap(), 1e-8).unwrap();
    let sql = sql_error(nbar).unwrap();
    let receiver = total_error(&ReceiverConfig::type_i(nbar).unwrap());
    assert!(helstrom < receiver);
    assert!(helstrom < sql);
}

//! End-to-end stochastic simulation of the receiver, independent of the
//! analytic error model and used to validate it.
//!
//! Reproducibility contract: estimates are a pure function of
//! `(seed, config, trials)`. Trials are split into fixed-size shards, shard
//! `t` draws from stream `t` of a counter-based generator seeded with the
//! caller's seed, and shard results are integer counts, so neither thread
//! count nor scheduling order can change the aggregate.

use crate::constellation::build_qam16;
use crate::quantum::{Amplitude, QUADRATURE_SIGMA};
use crate::receiver::{decide_column, decide_row, stage2_rates, ReceiverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Trials handled by one RNG stream; fixed so the stream↔trial assignment
/// does not depend on the degree of parallelism.
pub const SHARD_SIZE: u64 = 1 << 16;

/// Two-sided 95% normal quantile used by the Wilson interval.
const Z_95: f64 = 1.959_963_984_540_054;

/// What happened in one simulated symbol slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub true_symbol: usize,
    pub decided_symbol: usize,
    /// Photon counts observed (the simulation stops at the third click,
    /// which already forces the last column hypothesis).
    pub clicks: u32,
    pub row_decided: usize,
}

/// Binomial error estimate with a Wilson 95% confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEstimate {
    pub p_hat: f64,
    pub trials: u64,
    pub errors: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

/// Precomputed per-configuration tables for the trial loop.
struct TrialContext {
    arm: [Amplitude; 16],
    candidates: [[Amplitude; 4]; 4],
    scale: f64,
    beta: f64,
}

impl TrialContext {
    fn new(config: &ReceiverConfig) -> Self {
        let c = build_qam16(config.nbar()).expect("config is validated");
        let (_, nulling_arm) = c.split();
        let mut candidates = [[Amplitude::new(0.0, 0.0); 4]; 4];
        for (row, slot) in candidates.iter_mut().enumerate() {
            *slot = nulling_arm.row_candidates(row + 1).expect("row in range");
        }
        Self {
            arm: *nulling_arm.amplitudes(),
            candidates,
            scale: c.scale(),
            beta: config.beta(),
        }
    }
}

fn run_trial<R: Rng>(rng: &mut R, ctx: &TrialContext) -> TrialOutcome {
    let true_symbol = rng.random_range(0..16usize);
    let arm_amp = ctx.arm[true_symbol];

    // Homodyne stage: P-quadrature outcome around the arm mean.
    let noise: f64 = rng.sample(StandardNormal);
    let outcome = arm_amp.im + QUADRATURE_SIGMA * noise;
    let row_decided = decide_row(ctx.scale, outcome);

    // Nulling stage: exponential inter-arrival times with the rate of the
    // currently nulled candidate, switched after every click. The true arm
    // amplitude drives the rates, so a wrong row keeps its Im residue.
    let rates = stage2_rates(arm_amp, &ctx.candidates[row_decided - 1], ctx.beta).rates();
    let mut clicks = 0u32;
    let mut t = 0.0;
    while clicks < 3 {
        let rate = rates[clicks as usize];
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

    let col = decide_column(u64::from(clicks));
    TrialOutcome {
        true_symbol,
        decided_symbol: (row_decided - 1) * 4 + (col - 1),
        clicks,
        row_decided,
    }
}

/// Simulates a single symbol slot: uniform symbol draw, Gaussian homodyne
/// outcome, nearest-mean row decision, and click counting by exponential
/// inter-arrival sampling.
pub fn simulate_trial<R: Rng>(rng: &mut R, config: &ReceiverConfig) -> TrialOutcome {
    run_trial(rng, &TrialContext::new(config))
}

/// Wilson 95% score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Runs `trials` independent trials and estimates the symbol error rate.
///
/// Shards run in parallel; the result is identical for every thread count.
pub fn estimate_error(config: &ReceiverConfig, trials: u64, seed: u64) -> ErrorEstimate {
    assert!(trials >= 1, "at least one trial is required");
    let ctx = TrialContext::new(config);
    let shards = trials.div_ceil(SHARD_SIZE);
    let errors: u64 = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shard);
            let begin = shard * SHARD_SIZE;
            let end = ((shard + 1) * SHARD_SIZE).min(trials);
            let mut errs = 0u64;
            for _ in begin..end {
                let outcome = run_trial(&mut rng, &ctx);
                if outcome.decided_symbol != outcome.true_symbol {
                    errs += 1;
                }
            }
            errs
        })
        .sum();
    let (ci_low, ci_high) = wilson_interval(errors, trials);
    ErrorEstimate {
        p_hat: errors as f64 / trials as f64,
        trials,
        errors,
        ci_low,
        ci_high,
        seed,
    }
}

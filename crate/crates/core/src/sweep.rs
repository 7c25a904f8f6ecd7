//! Photon-number sweeps over the full model, CSV rendering, and atomic file
//! output. Grid points are computed in parallel and assembled in grid order,
//! and every numeric field is printed with 17 significant digits so a sweep
//! is byte-reproducible and parses back to the exact doubles.

use crate::bounds::{helstrom_bound, sql_error, BoundsError};
use crate::constellation::{build_qam16, ConstellationError};
use crate::montecarlo::{estimate_error, ErrorEstimate};
use crate::optimizer::{default_bracket, optimize_beta, OptimizerError};
use crate::receiver::{total_error, ReceiverConfig, ReceiverError};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

pub const CSV_HEADER: &str =
    "nbar,type1_error,type2_error,beta_star,beta_star_sq,sql_error,helstrom_error";
pub const CSV_HEADER_MC: &str = "nbar,type1_error,type2_error,beta_star,beta_star_sq,\
sql_error,helstrom_error,mc_type1_phat,mc_type1_ci_low,mc_type1_ci_high,\
mc_type2_phat,mc_type2_ci_low,mc_type2_ci_high";
pub const BOUNDS_CSV_HEADER: &str = "nbar,sql_error,helstrom_error";
pub const SIMULATE_CSV_HEADER: &str = "nbar,beta,phat,ci_low,ci_high";

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error(transparent)]
    Receiver(#[from] ReceiverError),
    #[error(transparent)]
    Constellation(#[from] ConstellationError),
    #[error("record invariant violated at nbar {nbar}: {detail}")]
    InvariantViolation { nbar: f64, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

impl FromStr for Spacing {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Spacing::Linear),
            "log" => Ok(Spacing::Log),
            other => Err(format!("unknown spacing '{other}' (expected linear or log)")),
        }
    }
}

/// Full description of one sweep run, including everything that influences
/// its output bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub nbar_min: f64,
    pub nbar_max: f64,
    pub points: usize,
    pub spacing: Spacing,
    /// Monte Carlo trials per grid point and receiver mode; 0 disables the
    /// Monte Carlo columns entirely.
    pub trials: u64,
    pub seed: u64,
    pub beta_tol: f64,
    pub helstrom_tol: f64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        let fail = |msg: String| Err(SweepError::InvalidSpec(msg));
        if !self.nbar_min.is_finite() || self.nbar_min < 0.0 {
            return fail(format!("nbar-min must be finite and >= 0, got {}", self.nbar_min));
        }
        if !self.nbar_max.is_finite() || self.nbar_max <= self.nbar_min {
            return fail(format!(
                "nbar-max must be finite and > nbar-min, got {}",
                self.nbar_max
            ));
        }
        if self.points < 2 {
            return fail(format!("points must be >= 2, got {}", self.points));
        }
        if self.spacing == Spacing::Log && self.nbar_min <= 0.0 {
            return fail("log spacing requires nbar-min > 0".into());
        }
        if !self.beta_tol.is_finite() || self.beta_tol <= 0.0 {
            return fail(format!("beta-tol must be positive, got {}", self.beta_tol));
        }
        if !self.helstrom_tol.is_finite() || self.helstrom_tol <= 0.0 {
            return fail(format!(
                "helstrom-tol must be positive, got {}",
                self.helstrom_tol
            ));
        }
        Ok(())
    }

    /// The photon-number grid, endpoints exact.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|k| {
                if k == 0 {
                    self.nbar_min
                } else if k == n - 1 {
                    self.nbar_max
                } else {
                    let frac = k as f64 / (n - 1) as f64;
                    match self.spacing {
                        Spacing::Linear => {
                            self.nbar_min + frac * (self.nbar_max - self.nbar_min)
                        }
                        Spacing::Log => {
                            let (a, b) = (self.nbar_min.ln(), self.nbar_max.ln());
                            (a + frac * (b - a)).exp()
                        }
                    }
                }
            })
            .collect()
    }
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub nbar: f64,
    pub type1_error: f64,
    pub type2_error: f64,
    pub beta_star: f64,
    pub beta_star_sq: f64,
    pub sql_error: f64,
    pub helstrom_error: f64,
    pub mc_type1: Option<ErrorEstimate>,
    pub mc_type2: Option<ErrorEstimate>,
}

/// Deterministic per-point, per-mode Monte Carlo seed derivation.
pub fn derive_seed(seed: u64, point: usize, which: u64) -> u64 {
    splitmix64(seed ^ splitmix64((point as u64).wrapping_mul(2).wrapping_add(which + 1)))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn compute_record(spec: &SweepSpec, index: usize, nbar: f64) -> Result<SweepRecord, SweepError> {
    let type1_config = ReceiverConfig::type_i(nbar)?;
    let type1_error = total_error(&type1_config);
    let scale = build_qam16(nbar)?.scale();
    let beta = optimize_beta(nbar, default_bracket(scale), spec.beta_tol)?;
    let sql = sql_error(nbar)?;
    let (helstrom, _solution) = helstrom_bound(&build_qam16(nbar)?, spec.helstrom_tol)?;

    let (mc_type1, mc_type2) = if spec.trials > 0 {
        let type2_config = ReceiverConfig::type_ii(nbar, beta.beta_star)?;
        (
            Some(estimate_error(&type1_config, spec.trials, derive_seed(spec.seed, index, 0))),
            Some(estimate_error(&type2_config, spec.trials, derive_seed(spec.seed, index, 1))),
        )
    } else {
        (None, None)
    };

    let record = SweepRecord {
        nbar,
        type1_error,
        type2_error: beta.error_at_beta,
        beta_star: beta.beta_star,
        beta_star_sq: beta.beta_star_sq,
        sql_error: sql,
        helstrom_error: helstrom,
        mc_type1,
        mc_type2,
    };
    check_record(&record)?;
    Ok(record)
}

fn check_record(r: &SweepRecord) -> Result<(), SweepError> {
    let fail = |detail: String| {
        Err(SweepError::InvariantViolation { nbar: r.nbar, detail })
    };
    let floor = r.type1_error.min(r.type2_error).min(r.sql_error);
    if r.helstrom_error > floor + 1e-6 {
        return fail(format!(
            "helstrom {} exceeds best receiver/benchmark {}",
            r.helstrom_error, floor
        ));
    }
    if r.type2_error > r.type1_error + 1e-12 {
        return fail(format!(
            "type2 {} exceeds type1 {}",
            r.type2_error, r.type1_error
        ));
    }
    Ok(())
}

/// Runs the sweep. Grid points are independent and evaluated in parallel;
/// records come back in grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRecord>, SweepError> {
    spec.validate()?;
    spec.grid()
        .par_iter()
        .enumerate()
        .map(|(index, &nbar)| compute_record(spec, index, nbar))
        .collect()
}

/// Benchmark curves only, on the same grid.
pub fn run_bounds_sweep(spec: &SweepSpec) -> Result<Vec<BoundsRecord>, SweepError> {
    spec.validate()?;
    spec.grid()
        .par_iter()
        .map(|&nbar| {
            let sql = sql_error(nbar)?;
            let (helstrom, _) = helstrom_bound(&build_qam16(nbar)?, spec.helstrom_tol)?;
            Ok(BoundsRecord { nbar, sql_error: sql, helstrom_error: helstrom })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsRecord {
    pub nbar: f64,
    pub sql_error: f64,
    pub helstrom_error: f64,
}

/// Monte Carlo estimates over the grid at one fixed displacement.
pub fn run_simulate_sweep(
    spec: &SweepSpec,
    beta: f64,
) -> Result<Vec<(f64, ErrorEstimate)>, SweepError> {
    spec.validate()?;
    if spec.trials == 0 {
        return Err(SweepError::InvalidSpec(
            "simulation requires trials >= 1".into(),
        ));
    }
    if !beta.is_finite() {
        return Err(SweepError::InvalidSpec(format!("beta must be finite, got {beta}")));
    }
    spec.grid()
        .par_iter()
        .enumerate()
        .map(|(index, &nbar)| {
            let config = ReceiverConfig::type_ii(nbar, beta)?;
            let estimate = estimate_error(&config, spec.trials, derive_seed(spec.seed, index, 0));
            Ok((nbar, estimate))
        })
        .collect()
}

/// Prints a double with 17 significant digits (round-trippable).
pub fn format_field(value: f64) -> String {
    format!("{value:.16e}")
}

/// Renders records as CSV: '.' decimal point, ',' separators, '\n' line
/// terminator, no trailing separator.
pub fn render_csv(records: &[SweepRecord], with_mc: bool) -> String {
    let mut out = String::new();
    out.push_str(if with_mc { CSV_HEADER_MC } else { CSV_HEADER });
    out.push('\n');
    for r in records {
        let mut fields = vec![
            r.nbar,
            r.type1_error,
            r.type2_error,
            r.beta_star,
            r.beta_star_sq,
            r.sql_error,
            r.helstrom_error,
        ];
        if with_mc {
            let mc1 = r.mc_type1.as_ref().expect("mc columns requested");
            let mc2 = r.mc_type2.as_ref().expect("mc columns requested");
            fields.extend([mc1.p_hat, mc1.ci_low, mc1.ci_high, mc2.p_hat, mc2.ci_low, mc2.ci_high]);
        }
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{f:.16e}");
        }
        out.push('\n');
    }
    out
}

/// CSV for a bounds-only sweep.
pub fn render_bounds_csv(records: &[BoundsRecord]) -> String {
    let mut out = String::from(BOUNDS_CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e}",
            r.nbar, r.sql_error, r.helstrom_error
        );
    }
    out
}

/// CSV for a Monte Carlo-only sweep.
pub fn render_simulate_csv(records: &[(f64, ErrorEstimate)], beta: f64) -> String {
    let mut out = String::from(SIMULATE_CSV_HEADER);
    out.push('\n');
    for (nbar, est) in records {
        let _ = writeln!(
            out,
            "{nbar:.16e},{beta:.16e},{:.16e},{:.16e},{:.16e}",
            est.p_hat, est.ci_low, est.ci_high
        );
    }
    out
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory plus an atomic rename, so failures never leave partial output.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> SweepSpec {
        SweepSpec {
            nbar_min: 0.5,
            nbar_max: 4.0,
            points: 3,
            spacing: Spacing::Log,
            trials: 0,
            seed: 1,
            beta_tol: 1e-4,
            helstrom_tol: 1e-8,
        }
    }

    #[test]
    fn spec_validation_rules() {
        let mut s = small_spec();
        s.points = 1;
        assert!(s.validate().is_err());
        let mut s = small_spec();
        s.nbar_min = -0.1;
        assert!(s.validate().is_err());
        let mut s = small_spec();
        s.nbar_max = s.nbar_min;
        assert!(s.validate().is_err());
        let mut s = small_spec();
        s.nbar_min = 0.0;
        assert!(s.validate().is_err()); // log spacing needs a positive start
        s.spacing = Spacing::Linear;
        assert!(s.validate().is_ok());
        let mut s = small_spec();
        s.beta_tol = 0.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn grids_hit_their_endpoints_exactly() {
        let mut s = small_spec();
        s.nbar_min = 0.1;
        s.nbar_max = 30.0;
        s.points = 7;
        for spacing in [Spacing::Linear, Spacing::Log] {
            s.spacing = spacing;
            let grid = s.grid();
            assert_eq!(grid.len(), 7);
            assert_eq!(grid[0], 0.1);
            assert_eq!(grid[6], 30.0);
            assert!(grid.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn spacing_parses_its_two_names() {
        assert_eq!("linear".parse::<Spacing>().unwrap(), Spacing::Linear);
        assert_eq!("log".parse::<Spacing>().unwrap(), Spacing::Log);
        assert!("geometric".parse::<Spacing>().is_err());
    }

    #[test]
    fn records_satisfy_invariants_and_reruns_are_byte_identical() {
        let spec = small_spec();
        let records = run_sweep(&spec).unwrap();
        assert_eq!(records.len(), 3);
        for r in &records {
            assert!(r.helstrom_error <= r.type1_error.min(r.type2_error).min(r.sql_error) + 1e-6);
            assert!(r.type2_error <= r.type1_error + 1e-12);
            assert!(r.mc_type1.is_none());
        }
        let again = run_sweep(&spec).unwrap();
        assert_eq!(render_csv(&records, false), render_csv(&again, false));
    }

    #[test]
    fn zero_signal_row_prints_the_degenerate_values() {
        let spec = SweepSpec {
            nbar_min: 0.0,
            nbar_max: 1.0,
            points: 2,
            spacing: Spacing::Linear,
            trials: 0,
            seed: 0,
            beta_tol: 1e-4,
            helstrom_tol: 1e-8,
        };
        let records = run_sweep(&spec).unwrap();
        assert_eq!(records[0].type1_error, 0.9375);
        assert_eq!(records[0].sql_error, 0.9375);
        let csv = render_csv(&records, false);
        let first_row = csv.lines().nth(1).unwrap();
        assert!(first_row.starts_with("0.0000000000000000e0,9.3750000000000000e-1,"));
    }

    #[test]
    fn monte_carlo_columns_appear_only_when_requested() {
        let mut spec = small_spec();
        spec.points = 2;
        spec.trials = 5_000;
        let records = run_sweep(&spec).unwrap();
        for r in &records {
            assert!(r.mc_type1.is_some() && r.mc_type2.is_some());
        }
        let csv = render_csv(&records, true);
        let header = csv.lines().next().unwrap();
        assert_eq!(header, CSV_HEADER_MC);
        assert_eq!(header.split(',').count(), 13);
        for line in csv.lines().skip(1) {
            assert_eq!(line.split(',').count(), 13);
            assert!(!line.ends_with(','));
        }
    }

    #[test]
    fn csv_fields_roundtrip_to_exact_doubles() {
        let spec = small_spec();
        let records = run_sweep(&spec).unwrap();
        let csv = render_csv(&records, false);
        for (line, r) in csv.lines().skip(1).zip(&records) {
            let parsed: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
            assert_eq!(parsed[0].to_bits(), r.nbar.to_bits());
            assert_eq!(parsed[1].to_bits(), r.type1_error.to_bits());
            assert_eq!(parsed[6].to_bits(), r.helstrom_error.to_bits());
        }
    }

    #[test]
    fn seed_derivation_separates_points_and_modes() {
        let mut seen = std::collections::HashSet::new();
        for point in 0..50 {
            for which in 0..2 {
                assert!(seen.insert(derive_seed(42, point, which)));
            }
        }
        assert_eq!(derive_seed(42, 3, 1), derive_seed(42, 3, 1));
    }

    #[test]
    fn bounds_sweep_orders_its_two_curves() {
        let spec = small_spec();
        let records = run_bounds_sweep(&spec).unwrap();
        assert_eq!(records.len(), 3);
        for r in &records {
            assert!(r.helstrom_error <= r.sql_error + 1e-6);
        }
        let csv = render_bounds_csv(&records);
        assert!(csv.starts_with("nbar,sql_error,helstrom_error\n"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn simulate_sweep_requires_trials_and_emits_five_columns() {
        let mut spec = small_spec();
        assert!(run_simulate_sweep(&spec, 0.0).is_err());
        spec.trials = 2_000;
        assert!(run_simulate_sweep(&spec, f64::NAN).is_err());
        let records = run_simulate_sweep(&spec, 0.25).unwrap();
        let csv = render_simulate_csv(&records, 0.25);
        assert!(csv.starts_with("nbar,beta,phat,ci_low,ci_high\n"));
        for line in csv.lines().skip(1) {
            assert_eq!(line.split(',').count(), 5);
        }
        let again = render_simulate_csv(&run_simulate_sweep(&spec, 0.25).unwrap(), 0.25);
        assert_eq!(csv, again);
    }

    #[test]
    fn atomic_write_replaces_the_target_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, "first\n").unwrap();
        write_atomic(&path, "second\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second\n");
        let missing = dir.path().join("no/such/dir/out.csv");
        assert!(write_atomic(&missing, "x").is_err());
    }
}

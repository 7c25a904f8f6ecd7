//! Benchmark curves the receiver is measured against: the standard quantum
//! limit of an ideal dual-quadrature (heterodyne) receiver on the undivided
//! signal, and the minimum error probability over all measurements.
//!
//! The minimum-error bound is solved in the span of the signal states: the
//! Gram matrix of pairwise overlaps is factorized, the states become vectors
//! in an n-dimensional inner-product space, and the optimal measurement is
//! found by a fixed-point iteration on the optimality conditions. Because the
//! iterate stays rank-one per outcome, the whole iteration state reduces to
//! one non-negative weight per state; operators are materialized only for the
//! optimality certificate.

use crate::constellation::Constellation;
use crate::quantum::{coherent_overlap, gaussian_tail, Amplitude};
use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::SQRT_2;
use thiserror::Error;

/// Operator-norm tolerance on `Σ Π_i = I`.
pub const COMPLETENESS_TOL: f64 = 1e-8;
/// Most negative eigenvalue tolerated in a returned measurement operator.
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Iteration cap of the fixed-point solver.
pub const MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("mean photon number must be finite and non-negative, got {0}")]
    InvalidPhotonNumber(f64),
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("matrix is not a gram matrix: {0}")]
    MalformedGram(String),
    #[error("gram matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    GramNotPositive(f64),
    #[error("priors must be non-negative, finite, and sum to one")]
    InvalidPriors,
    #[error("no states to discriminate")]
    EmptyStateSet,
    #[error(
        "measurement optimization stalled: residual {residual:.3e} after {iterations} \
         iterations (target {tol:.3e})"
    )]
    NoConvergence { tol: f64, iterations: usize, residual: f64 },
    #[error("solved measurement failed its certificate: {0}")]
    CertificateViolation(String),
}

/// Error probability of an ideal heterodyne receiver on the full 16-QAM
/// input: independent 4-level decisions on both quadratures with noise
/// variance 1/2 per quadrature.
pub fn sql_error(nbar: f64) -> Result<f64, BoundsError> {
    if !nbar.is_finite() || nbar < 0.0 {
        return Err(BoundsError::InvalidPhotonNumber(nbar));
    }
    let scale = (nbar / 10.0).sqrt();
    let per_quadrature = 1.5 * gaussian_tail(scale * SQRT_2);
    Ok(1.0 - (1.0 - per_quadrature) * (1.0 - per_quadrature))
}

/// Matrix of pairwise coherent-state overlaps `G[i][j] = ⟨α_i|α_j⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix(DMatrix<Complex64>);

impl GramMatrix {
    /// Wraps an existing matrix, checking the structural invariants
    /// (square, Hermitian, unit diagonal). Positive semidefiniteness is
    /// verified later, by `embed_states`.
    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self, BoundsError> {
        if !m.is_square() {
            return Err(BoundsError::MalformedGram("matrix is not square".into()));
        }
        for i in 0..m.nrows() {
            if (m[(i, i)] - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
                return Err(BoundsError::MalformedGram(format!(
                    "diagonal entry {i} is {} instead of 1",
                    m[(i, i)]
                )));
            }
            for j in 0..m.ncols() {
                if (m[(i, j)] - m[(j, i)].conj()).norm() > 1e-12 {
                    return Err(BoundsError::MalformedGram(format!(
                        "entries ({i},{j}) and ({j},{i}) are not conjugate"
                    )));
                }
            }
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }
}

/// Gram matrix of the 16 constellation states.
pub fn gram_matrix(c: &Constellation) -> GramMatrix {
    gram_of_states(c.amplitudes())
}

/// Gram matrix of an arbitrary coherent-state set.
pub fn gram_of_states(states: &[Amplitude]) -> GramMatrix {
    let n = states.len();
    let mut g = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for i in 0..n {
        g[(i, i)] = Complex64::new(1.0, 0.0);
        for j in (i + 1)..n {
            let overlap = coherent_overlap(states[i], states[j]);
            g[(i, j)] = overlap;
            g[(j, i)] = overlap.conj();
        }
    }
    GramMatrix(g)
}

/// Factorizes `G = BᴴB` through its eigendecomposition and returns the
/// columns of `B`: unit vectors `v_i` with `⟨v_i, v_j⟩ = G[i][j]`.
///
/// Eigenvalues within rounding error of zero (negative or positive) are
/// zeroed outright: square-rooting noise-level eigenvalues would plant
/// √eps-sized phantom components that fake distinguishability between
/// near-identical states. Anything below −1e−6 signals a broken Gram matrix
/// upstream.
pub fn embed_states(g: &GramMatrix) -> Result<Vec<DVector<Complex64>>, BoundsError> {
    let eig = SymmetricEigen::new(g.0.clone());
    let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eigenvalue < -1e-6 {
        return Err(BoundsError::GramNotPositive(min_eigenvalue));
    }
    let n = g.dim();
    let max_eigenvalue = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let noise_floor = max_eigenvalue * n as f64 * f64::EPSILON;
    let scales: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&l| if l > noise_floor { l.sqrt() } else { 0.0 })
        .collect();
    // B = diag(√λ) Uᴴ.
    let b = DMatrix::from_fn(n, n, |k, i| eig.eigenvectors[(i, k)].conj() * scales[k]);
    Ok((0..n).map(|i| b.column(i).into_owned()).collect())
}

/// An optimized discrimination measurement: one positive operator per state
/// in the embedded space, together with its certificate numbers.
#[derive(Debug, Clone)]
pub struct PovmSolution {
    operators: Vec<DMatrix<Complex64>>,
    success_probability: f64,
    residual: f64,
    completeness_error: f64,
    min_operator_eigenvalue: f64,
    iterations: usize,
}

impl PovmSolution {
    pub fn operators(&self) -> &[DMatrix<Complex64>] {
        &self.operators
    }

    pub fn success_probability(&self) -> f64 {
        self.success_probability
    }

    pub fn error_probability(&self) -> f64 {
        1.0 - self.success_probability
    }

    /// Largest negative part of `Υ − p_i ρ_i` over all states at return time.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Operator norm of `Σ Π_i − I`.
    pub fn completeness_error(&self) -> f64 {
        self.completeness_error
    }

    /// Most negative eigenvalue found across the returned operators.
    pub fn min_operator_eigenvalue(&self) -> f64 {
        self.min_operator_eigenvalue
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }
}

/// Minimum-error bound for the 16 equiprobable constellation states.
///
/// Returns the error probability together with the solved measurement.
pub fn helstrom_bound(
    c: &Constellation,
    tol: f64,
) -> Result<(f64, PovmSolution), BoundsError> {
    let priors = [1.0 / 16.0; 16];
    let solution = min_error_povm(c.amplitudes(), &priors, tol)?;
    Ok((solution.error_probability(), solution))
}

/// Minimum-error measurement for an arbitrary pure coherent-state source.
///
/// Iterates `Π_i ← L⁻¹ p_i ρ_i Π_i ρ_i p_i L⁻¹` (with `L` the positive square
/// root of `Σ_j p_j ρ_j Π_j ρ_j p_j`) from the uniform measurement until the
/// optimality residual — the largest negative part of `Υ − p_i ρ_i`,
/// `Υ = Σ_j p_j ρ_j Π_j` symmetrized — drops below `tol`.
pub fn min_error_povm(
    states: &[Amplitude],
    priors: &[f64],
    tol: f64,
) -> Result<PovmSolution, BoundsError> {
    if states.is_empty() {
        return Err(BoundsError::EmptyStateSet);
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(BoundsError::InvalidTolerance(tol));
    }
    let prior_sum: f64 = priors.iter().sum();
    if priors.len() != states.len()
        || priors.iter().any(|p| !p.is_finite() || *p < 0.0)
        || (prior_sum - 1.0).abs() > 1e-9
    {
        return Err(BoundsError::InvalidPriors);
    }
    let vectors = embed_states(&gram_of_states(states))?;
    solve_fixed_point(&vectors, priors, tol)
}

fn solve_fixed_point(
    vectors: &[DVector<Complex64>],
    priors: &[f64],
    tol: f64,
) -> Result<PovmSolution, BoundsError> {
    let n = vectors.len();
    // For n independent pure states the iterate stays rank one per outcome
    // after the first step, and with n outcomes in an n-dimensional space a
    // complete rank-one family is an orthonormal basis. The update
    // `Π_i ← L⁻¹ ρ̃_i Π_i ρ̃_i L⁻¹` then reads `M ← (ZZᴴ)^(−1/2) Z` with
    // `Z = V diag(c)` and `c_i = p_i |⟨v_i, μ_i⟩|` — exactly the unitary
    // polar factor of Z, which an SVD evaluates without ever dividing by
    // the near-null spectrum of Z. The uniform start has c ∝ p, which lands
    // on the square-root measurement at the first update.
    let states = DMatrix::from_columns(vectors);
    let mut scales: Vec<f64> = priors.to_vec();
    let mut last_residual = f64::INFINITY;

    for iteration in 1..=MAX_ITERATIONS {
        let mut z = states.clone();
        for (i, &c) in scales.iter().enumerate() {
            z.column_mut(i).scale_mut(c);
        }
        let basis = polar_unitary(z, tol, iteration, last_residual)?;
        let overlaps: Vec<Complex64> = (0..n)
            .map(|i| basis.column(i).dotc(&states.column(i)))
            .collect();

        // The residual certificate costs an eigendecomposition per state, so
        // check it on a schedule once the easy cases are gone.
        let check_now = iteration <= 32 || iteration % 16 == 0 || iteration == MAX_ITERATIONS;
        if check_now {
            let operators: Vec<DMatrix<Complex64>> = (0..n)
                .map(|i| {
                    let mu = basis.column(i);
                    mu * mu.adjoint()
                })
                .collect();
            let residual = optimality_residual(&operators, vectors, priors);
            last_residual = residual;
            if residual <= tol {
                return finish(operators, vectors, priors, residual, iteration);
            }
        }

        for (scale, (&overlap, &p)) in scales.iter_mut().zip(overlaps.iter().zip(priors)) {
            *scale = p * overlap.norm();
        }
    }

    Err(BoundsError::NoConvergence {
        tol,
        iterations: MAX_ITERATIONS,
        residual: last_residual,
    })
}

/// Unitary factor of the polar decomposition of `z`.
fn polar_unitary(
    z: DMatrix<Complex64>,
    tol: f64,
    iteration: usize,
    last_residual: f64,
) -> Result<DMatrix<Complex64>, BoundsError> {
    let svd = nalgebra::linalg::SVD::try_new(z, true, true, f64::EPSILON, 10_000).ok_or(
        BoundsError::NoConvergence { tol, iterations: iteration, residual: last_residual },
    )?;
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    Ok(u * v_t)
}

/// Largest negative part over states of `sym(Υ) − p_i ρ_i`,
/// `Υ = Σ_j p_j ρ_j Π_j`. Zero exactly at an optimal measurement.
fn optimality_residual(
    operators: &[DMatrix<Complex64>],
    vectors: &[DVector<Complex64>],
    priors: &[f64],
) -> f64 {
    let dim = vectors[0].len();
    let mut upsilon = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for ((op, v), &p) in operators.iter().zip(vectors).zip(priors) {
        let image = op * v;
        upsilon += (v * image.adjoint()) * Complex64::from(p);
    }
    let herm = (&upsilon + upsilon.adjoint()) * Complex64::from(0.5);
    let mut worst: f64 = 0.0;
    for (v, &p) in vectors.iter().zip(priors) {
        let m = &herm - (v * v.adjoint()) * Complex64::from(p);
        worst = worst.max(-min_eigenvalue(&m));
    }
    worst.max(0.0)
}

fn finish(
    operators: Vec<DMatrix<Complex64>>,
    vectors: &[DVector<Complex64>],
    priors: &[f64],
    residual: f64,
    iterations: usize,
) -> Result<PovmSolution, BoundsError> {
    let dim = vectors[0].len();
    let mut sum = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    let mut min_eig = f64::INFINITY;
    let mut success = 0.0;
    for ((op, v), &p) in operators.iter().zip(vectors).zip(priors) {
        sum += op;
        min_eig = min_eig.min(min_eigenvalue(op));
        success += p * v.dotc(&(op * v)).re;
    }
    let completeness_error = operator_norm(&(sum - DMatrix::identity(dim, dim)));
    if completeness_error > COMPLETENESS_TOL {
        return Err(BoundsError::CertificateViolation(format!(
            "completeness defect {completeness_error:.3e} exceeds {COMPLETENESS_TOL:.1e}"
        )));
    }
    if min_eig < -POSITIVITY_TOL {
        return Err(BoundsError::CertificateViolation(format!(
            "operator eigenvalue {min_eig:.3e} below -{POSITIVITY_TOL:.1e}"
        )));
    }
    if !(0.0..=1.0 + 1e-12).contains(&success) {
        return Err(BoundsError::CertificateViolation(format!(
            "success probability {success} outside [0, 1]"
        )));
    }
    Ok(PovmSolution {
        operators,
        success_probability: success.min(1.0),
        residual,
        completeness_error,
        min_operator_eigenvalue: min_eig,
        iterations,
    })
}

fn min_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Operator (spectral) norm of a Hermitian matrix.
fn operator_norm(m: &DMatrix<Complex64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .fold(0.0, |acc, l| f64::max(acc, l.abs()))
}

//! Numerical model of a hybrid receiver for 16-QAM coherent states.
//!
//! The input is split 50:50; a homodyne measurement of the P quadrature
//! narrows the 16 hypotheses to one row of four, and a feed-forward
//! displacement receiver sequentially nulls the row's candidates while
//! counting photons to pick the column. The crate provides
//!
//! * the analytic symbol-error model for exact and displaced nulling
//!   ([`receiver`]),
//! * the displacement optimizer ([`optimizer`]),
//! * benchmark curves: heterodyne standard quantum limit and the
//!   minimum-error measurement bound ([`bounds`]),
//! * a seeded, shard-deterministic Monte Carlo simulator ([`montecarlo`]),
//! * photon-number sweeps with reproducible CSV output ([`sweep`]),
//! * closed-form reference oracles for validation ([`oracles`]).

pub mod bounds;
pub mod constellation;
pub mod montecarlo;
pub mod optimizer;
pub mod oracles;
pub mod quantum;
pub mod receiver;
pub mod sweep;

pub use quantum::Amplitude;

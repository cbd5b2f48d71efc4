//! Numerical analysis of almost-triangular Markov chains on the nonnegative integers.
//!
//! An *almost upper-triangular* (AUT) transition matrix `U` satisfies
//! `U[i][j] > 0 => j >= i - 1` (down-steps of at most one), an *almost
//! lower-triangular* (ALT) matrix `L` satisfies `L[i][j] > 0 => j <= i + 1`
//! (up-steps of at most one). Tridiagonal (birth-death) chains are both.
//!
//! The crate computes, for such chains:
//!
//! * invariant measures via windowed determinants `det(Id - M_[a,b])` and via
//!   triangular recursions, with built-in cross checks,
//! * recurrence / positive-recurrence classification with an explicit
//!   numerical evidence trail,
//! * hitting probabilities and (defective) hitting-time generating functions,
//! * absorption probabilities when part of the mass at state 0 disappears,
//! * time-reversal partners (`U <-> L`) and the identities binding a pair,
//! * catastrophe / descent-kernel families with closed-form inversions,
//! * classical model families (birth-death, repair shop, column-proportional
//!   chains, explicit counterexamples, continuous-time generators).
//!
//! Every analytic formula is backed by two independent validators: dense
//! finite-state linear algebra ([`sim::finite_oracle_invariant`],
//! [`sim::finite_oracle_hitting`]) and reproducible Monte Carlo simulation
//! ([`sim::simulate`], [`sim::estimate_hit`]). Exact rational oracles for the
//! combinatorial identities (rooted forests, heaps of cycles, the alternating
//! expansion of the determinant) live in [`exact`].

pub mod chain;
pub mod config;
pub mod dets;
pub mod error;
pub mod exact;
pub mod gen;
pub mod linalg;
pub mod logspace;
pub mod lower;
pub mod measure;
pub mod models;
pub mod reversal;
pub mod sim;
pub mod upper;

pub use chain::{ChainSpec, DescentRep, FiniteChain, IrreducibilityReport, Side};
pub use error::{Error, Result};
pub use logspace::SignedLog;
pub use measure::{Classification, GFQuery, Measure, Normalization, Verdict};

//! Exact simulation of projective measurements on small labeled Hilbert
//! spaces, and an executable check of the "no resurrection" no-go argument:
//! if a laboratory forbids the evolution `|D⟩ → |L⟩`, then any projector onto
//! `a|L⟩ + b|D⟩` with `a, b ≠ 0` would let a measurement sequence realize that
//! forbidden evolution.
//!
//! The crate is `no_std` (with `alloc`). File formats, the command line and
//! threaded Monte Carlo live in the `catlab` crate.
//!
//! Modules:
//! - [`qstate`]: states, density matrices, operators, tensor products, partial trace.
//! - [`measure`]: Born-rule distributions, Lüders update, seeded sampling.
//! - [`lab`]: laboratories, steering-path search, no-go verdicts.
//! - [`protocols`]: outcome-tree enumeration, Monte Carlo, discrimination, scenario catalog.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod eigen;
pub mod error;
pub mod lab;
pub mod linalg;
pub mod measure;
pub mod protocols;
pub mod qstate;
pub mod rng;

pub use error::{Error, Result};
pub use lab::{find_steering_path, nogo_verdict, Laboratory, NoGoVerdict, SearchResult, SteeringPath};
pub use measure::{outcome_distribution, sample_outcome, OutcomeRecord, ProjectiveMeasurement};
pub use qstate::{
    Amplitude, BasisLabel, DensityMatrix, HilbertSpace, Operator, OperatorKind, QuantumState, State,
    StateVector,
};
pub use rng::RandomStream;

/// Normalization, Hermiticity and idempotence tolerance.
pub const TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted for a positive semidefinite matrix.
pub const PSD_FLOOR: f64 = -1e-9;
/// Branches with probability below this are pruned and carry no post state.
pub const PRUNE: f64 = 1e-12;
/// Two pure states are "the same" when their squared overlap exceeds `1 - MATCH_TOL`.
pub const MATCH_TOL: f64 = 1e-9;
/// Largest supported Hilbert-space dimension.
pub const MAX_DIM: usize = 16;

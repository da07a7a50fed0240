//! Numerical laboratory for blurring maps on symmetric states and the
//! generalised Stein lemma machinery built on top of them.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: dense complex operators, spectra, norms, partial traces
//! - [`types`]: type vectors, type classes and exact combinatorics
//! - [`hypergeometric`]: univariate and multivariate hypergeometric laws
//! - [`divergences`]: relative entropies, hypothesis testing and max divergences
//! - [`free_sets`]: families of free states and their axiom checks
//! - [`classical_blurring`]: blurring of permutation-invariant distributions
//! - [`quantum_blurring`]: blurring on the symmetric subspace in the type basis
//! - [`fock`]: bosonic lift of the blurring map and its large-n limit
//!
//! All logarithms are base 2 unless stated otherwise.

pub mod classical_blurring;
pub mod divergences;
pub mod fock;
pub mod free_sets;
pub mod hypergeometric;
pub mod linalg;
pub mod oracle;
pub mod quantum_blurring;
pub mod report;
pub mod types;

use std::sync::RwLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("operator is not positive semidefinite (minimum eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("state is not normalised (trace {0})")]
    NotNormalized(f64),
    #[error("operator is not permutation invariant (deviation {0:.3e})")]
    NotPermutationInvariant(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),
    #[error("{0}")]
    Precondition(String),
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}

/// Global numerical tolerances.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Hermiticity, eigenvalue sign and PSD checks.
    pub spectral: f64,
    /// Trace normalisation checks.
    pub normalization: f64,
    /// Eigenvalues below this count as kernel when testing supports.
    pub kernel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        DEFAULT_TOLERANCES
    }
}

const DEFAULT_TOLERANCES: Tolerances = Tolerances {
    spectral: 1e-10,
    normalization: 1e-9,
    kernel: 1e-12,
};

static TOLERANCES: RwLock<Tolerances> = RwLock::new(DEFAULT_TOLERANCES);

/// Current global tolerances.
pub fn tolerances() -> Tolerances {
    *TOLERANCES.read().unwrap_or_else(|e| e.into_inner())
}

/// Replace the global tolerances.
pub fn set_tolerances(t: Tolerances) {
    *TOLERANCES.write().unwrap_or_else(|e| e.into_inner()) = t;
}

/// `floor(x)` that forgives floating-point noise just below an integer.
pub(crate) fn robust_floor(x: f64) -> usize {
    (x + 1e-9).floor().max(0.0) as usize
}

/// `ceil(x)` that forgives floating-point noise just above an integer.
pub(crate) fn robust_ceil(x: f64) -> usize {
    (x - 1e-9).ceil().max(0.0) as usize
}

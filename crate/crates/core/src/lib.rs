//! Compressed-sensing radar over Gabor dictionaries.
//!
//! A probe `f` of length N is sent through an unknown system that is a sparse
//! combination of cyclic delays and modulations. The received signal is
//! `y = Phi s`, where the columns of `Phi` are all N^2 time-frequency shifts of
//! `f` and `s` holds the target reflection coefficients on the delay/doppler grid.
//! With an Alltop probe the dictionary is a union of N mutually unbiased bases,
//! which makes `s` recoverable by l1 minimization or greedy pursuit.

pub mod bounds;
pub mod classical;
pub mod error;
pub mod gabor;
pub mod harness;
pub mod rng;
pub mod scenes;
pub mod solvers;
pub mod tfcore;

pub use error::{Error, Result};
pub use gabor::{build_dictionary, CoefficientVector, GaborDictionary};
pub use scenes::{NoiseSpec, SparseScene};
pub use solvers::{RecoveryResult, SolverOptions};
pub use tfcore::{ComplexVector, ShiftIndex};

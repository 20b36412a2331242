//! Density-matrix simulation toolkit for studying how coherent gate errors
//! can be cancelled by substituting hardware-inverted gates, and for comparing
//! that scheme against randomized compiling and unitary folding.
//!
//! The crate is organized around a small dense simulator (`densim`), a
//! pulse-level model of gate inversion (`pulsekit`), parametric error channels
//! (`noise`), circuit rewrite passes (`transforms`), process tomography
//! (`tomo`), a variational eigensolver stack (`vqe`), and energy-landscape
//! sweeps (`landscape`).
//!
//! Conventions used throughout:
//!
//! * Qubit 0 is the leftmost tensor factor and the most significant bit of a
//!   basis index. `"1100"` on four qubits is basis index 12.
//! * Rotation gates follow `exp(-i * angle * P / 2)` for a Pauli-string
//!   generator `P`.
//! * All randomness flows through explicit `u64` seeds (see [`seeding`]).

pub mod densim;
pub mod error;
pub mod gates;
pub mod landscape;
pub mod noise;
pub mod pulsekit;
pub mod seeding;
pub mod tomo;
pub mod transforms;
pub mod vqe;

pub use error::{Error, Result};

/// Complex scalar used for all operator and state entries.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix type used for operators, states, and process matrices.
pub type CMatrix = nalgebra::DMatrix<C64>;

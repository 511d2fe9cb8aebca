//! ranklab: a simulation laboratory for the arithmetic statistics of
//! elliptic curves.
//!
//! The crate implements and empirically validates probabilistic models for
//! ranks, Selmer groups, and Shafarevich–Tate groups:
//!
//! * intersections of random maximal isotropic direct summands of hyperbolic
//!   quadratic modules over 𝔽_p, ℤ/p^e, and truncated ℤ_p ([`quadspace`],
//!   [`rst`]) — the Selmer-group model;
//! * random alternating matrices over ℤ_p and over bounded integers
//!   ([`altmatrix`]) — the rank and Ш model, with pseudo-rank and pseudo-Ш
//!   extraction;
//! * an exact census of minimal Weierstrass curves ordered by height
//!   ([`census`]);
//! * the calibrated height-indexed rank heuristic ([`rankmodel`]);
//! * closed-form reference densities and averages ([`predictions`]).
//!
//! Core linear algebra is generic over the scalar via `num-traits`
//! ([`scalar::IntScalar`] for ℤ, [`scalar::ModScalar`] for ℤ/p^e); the
//! aliases below fix the concrete types used by the lab: arbitrary-precision
//! integers for ℤ work, machine words for modular work with automatic
//! promotion to big residues when the modulus outgrows u64.

pub mod abelian;
pub mod altmatrix;
pub mod census;
pub mod experiments;
pub mod linalg;
pub mod oracles;
pub mod predictions;
pub mod quadspace;
pub mod rankmodel;
pub mod rng;
pub mod rst;
pub mod scalar;
pub mod stats;

pub use abelian::AbelianInvariants;
pub use linalg::Matrix;

/// Matrices over ℤ with arbitrary-precision entries.
pub type ZMatrix = Matrix<num_bigint::BigInt>;
/// Fixed-width integer matrices for hot loops with a-priori entry bounds.
pub type IMatrix = Matrix<i128>;
/// Matrices over ℤ/p^e when the modulus fits a machine word.
pub type ModMatrix = Matrix<u64>;
/// Matrices over ℤ/p^e beyond the machine-word range.
pub type BigModMatrix = Matrix<num_bigint::BigUint>;

/// ℤ/p^e with word-size residues.
pub type WordRing = scalar::PrimePower<u64>;
/// ℤ/p^e with arbitrary-precision residues.
pub type BigRing = scalar::PrimePower<num_bigint::BigUint>;

//! Certification of fractional moment families.
//!
//! A family `δ(α, β) = ∫ t^α θ(t)^β dμ(t)` indexed by non-negative rational
//! exponents `α` and integers `β` is checked against three conditions over a
//! finite window of indices: agreement with a moment function `γ`, a linear
//! recurrence coming from `θ⁻¹ = 1 + Σ t_j² + Σ p_k²`, and positive
//! semidefiniteness of the Gram matrices shifted by each `p_k`.
//!
//! Everything is generic over [`Scalar`]. [`Rational`] gives exact verdicts;
//! `f64` and `f32` use tolerances. The aliases below fix the scalar type.

pub mod error;
pub mod frac_poly;
pub mod measures;
pub mod moments;
pub mod parser;
pub mod scalar;
pub mod theta_kernel;
pub mod verifier;

pub use error::{Error, Result};
pub use frac_poly::{ExponentVector, FracPoly, Point};
pub use measures::{Atom, AtomicMeasure, LogAtomicMeasure, SupportReport, SupportViolation};
pub use moments::{
    build_basis, gram, psd_check, shifted_gram, DeltaFamily, DeltaIndex, GramVerdict,
    IndexClosure, PsdCertificate, SymMatrix, Window, Witness,
};
pub use parser::{format_extended, format_fracpoly, parse_extended, parse_fracpoly};
pub use scalar::{parse_rational, Exponent, Rational, Scalar};
pub use theta_kernel::{ExtendedPoly, KernelVerdict, KernelWitness, ProblemPolys};
pub use verifier::{verify_all, Certificate, DEFAULT_TOLERANCE};

pub type ExactPoly = FracPoly<Rational>;
pub type FloatPoly = FracPoly<f64>;
pub type ExactExtendedPoly = ExtendedPoly<Rational>;
pub type FloatExtendedPoly = ExtendedPoly<f64>;
pub type ExactProblem = ProblemPolys<Rational>;
pub type FloatProblem = ProblemPolys<f64>;
pub type ExactMeasure = AtomicMeasure<Rational>;
pub type FloatMeasure = AtomicMeasure<f64>;
pub type ExactDelta = DeltaFamily<Rational>;
pub type FloatDelta = DeltaFamily<f64>;
pub type ExactCertificate = Certificate<Rational>;
pub type FloatCertificate = Certificate<f64>;

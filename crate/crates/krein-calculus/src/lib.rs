//! Functional calculus for definitizable normal operators on
//! finite-dimensional Krein spaces.
//!
//! A Krein space here is ℂⁿ with an invertible Hermitian Gram matrix J and
//! the indefinite product [u, v] = v* J u. For a normal operator N (one
//! commuting with its Krein adjoint N⁺ = J⁻¹N*J) that admits definitizing
//! polynomials — real p with J·p(A, B) positive semidefinite, where
//! A = Re N and B = Im N — the crate constructs:
//!
//! * Hilbert-space embeddings T, T_j factoring the semidefinite forms, and
//!   the transfer maps Θ, Θ_j, Γ_j, Ξ, Ξ_j, Λ_j between the spaces;
//! * the exact algebra of the zero-dimensional ideal I = ⟨p_1, …, p_m⟩:
//!   Gröbner bases with cofactor tracking, quotient algebras, variety
//!   points with local primary components Q(a), radicals P(a) and local
//!   algebras 𝒜(a), ℬ(a);
//! * spectral measures of the transported normal operators; and
//! * the functional calculus φ ↦ φ(N) on functions that are scalar on the
//!   Hilbert spectrum and coset-valued at variety points, together with a
//!   battery of machine-checkable identities that the construction must
//!   satisfy (homomorphism laws, transfer identities, Riesz projections,
//!   spectral formula, inverse transport).
//!
//! The exact layer works over Gaussian rationals; floats appear only at
//! evaluation and matrix boundaries.

pub mod calculus;
pub mod embedding;
pub mod error;
pub mod ideal;
pub mod io;
pub mod krein;
pub mod linalg;
pub mod poly;
pub mod rng;
pub mod scalar;
pub mod spectral;
pub mod transforms;

pub use calculus::{CalcFunction, Calculus, Triple};
pub use embedding::EmbeddingSystem;
pub use error::{Error, Result};
pub use ideal::{Coset, IdealData, QuotientAlgebra, VarietyPoint};
pub use krein::{KreinOperator, KreinSpace, Tolerances};
pub use linalg::CMatrix;
pub use poly::{Exp, MaxDegree, Poly2, VarPair};
pub use scalar::GaussianRational;
pub use spectral::SpectralData;

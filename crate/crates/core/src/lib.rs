//! Taylor joint spectra of commuting tuples of complex matrices.
//!
//! The crate builds Koszul complexes of commuting matrix tuples, decides
//! Taylor-spectrum membership through the smallest singular values of the
//! complex's Laplacians, extracts joint approximate adjoint eigenvectors,
//! and verifies spectral mapping statements for the polar transform
//! `S_j = U_j f(|T_j|)` by comparing spectrum point clouds.

pub mod error;
mod eig;
pub mod factory;
pub mod koszul;
pub mod mapping;
pub mod matrix;
pub mod scalar;
pub mod spectrum;
pub mod tuple;

pub use error::{Error, Result};
pub use factory::JointDiagonalSpec;
pub use mapping::{MappingMode, MappingReport, PolynomialNVar};
pub use matrix::{
    eigenvalues, hermitian_eigen, hermitian_function, min_singular_value, polar_decompose,
    ComplexMatrix, PolarFactors,
};
pub use scalar::ScalarFunction;
pub use spectrum::{AdjointWitness, Region, SpectrumPoint, SpectrumPointCloud};
pub use tuple::{ClassificationReport, LogHyponormality, OperatorTuple, Verdict};

/// Re-exported scalar type used across the public API.
pub use num_complex::Complex64;

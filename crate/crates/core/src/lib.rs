//! Left-invariant sub-Riemannian structures on homogeneous spaces: Lie-algebra
//! arithmetic, the normal Hamiltonian flow, homogeneity tests for geodesics,
//! geodesic-orbit analysis and construction of homogeneous geodesics.

pub mod error;
pub mod existence;
pub mod go_analysis;
pub mod hamiltonian;
pub mod homogeneity;
pub mod integrator;
pub mod lie;
pub mod linalg;
pub mod models;
pub mod polynomial;
pub mod rational;
pub mod sampling;
pub mod structure;
pub mod subspace;

pub use error::{Error, Result};
pub use lie::{LieAlgebra, ValidationReport, Violation};
pub use polynomial::Polynomial;
pub use rational::Q;
pub use structure::{HomogeneousSRStructure, Momentum, StructureParts};
pub use subspace::Subspace;

//! Constructive chain-level machinery around rho-invariant bounds: bar complexes of finite
//! abelian groups, G-colored polytopes and covering towers with explicit bounding chains,
//! Delta-complexes with homology and Laplacian torsion, a combinatorial Williams
//! construction, and lens-space triangulations with their rho-invariant formulas.

pub mod barcx;
pub mod fingroup;
pub mod gcp;
pub mod hyperb;
mod jsonint;
pub mod lensrho;
pub mod simplicia;
pub mod towers;

pub use jsonint::to_value as bigint_to_json;

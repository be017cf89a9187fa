//! Two-center electron repulsion integrals over Slater-type orbitals in
//! prolate spheroidal coordinates.
//!
//! An integral is reduced to a finite set of polynomial terms
//! ([`coeffs`]); each term is a sum over the Neumann index `mu` of products
//! of two eta-integrals ([`bfunc`]) and one xi-integral ([`afunc`]). The
//! [`engine`] drives the sum, [`oracle`] holds independent reference paths
//! and [`verify`] bundles the property and oracle checks.

pub mod afunc;
pub mod bfunc;
pub mod coeffs;
pub mod engine;
pub mod error;
pub mod exact;
pub mod model;
pub mod oracle;
pub mod real;
pub mod sum;
pub mod verify;

pub use engine::{evaluate, evaluate_batch, EvalConfig, IntegralResult};


pub use error::{Error, Result};
pub use model::{IntegralClass, IntegralRequest, SlaterOrbital};

//! Hilbert–Schmidt tests for Hankel operators on Bergman spaces of complete
//! Reinhardt domains in ℂ².
//!
//! Everything is built on the squared monomial norms `c_γ²`, held in log form.
//! [`moments`] computes them, [`hankel`] turns them into the partial sums
//! `S_α(N)`, [`growth`] classifies how those sums behave, and [`certificate`]
//! proves a linear lower bound for radial-profile domains with subharmonic
//! weight. [`wiegerinck`] covers the Wiegerinck domains with closed forms.

pub mod certificate;
pub mod domain;
pub mod error;
pub mod growth;
pub mod hankel;
pub mod logvalue;
pub mod moments;
pub mod quadrature;
pub mod wiegerinck;

pub use domain::{BasisLattice, DomainSpec, MultiIndex, ProfileFamily, RadialProfile, RadialRegion};
pub use error::{Error, Result};
pub use growth::{classify_growth, Growth};
pub use logvalue::LogValue;
pub use moments::{log_c_gamma_sq, Moment, MomentTable};
pub use quadrature::QuadratureSettings;

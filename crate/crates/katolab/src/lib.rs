//! Numerical spectral-perturbation laboratory.
//!
//! Desk-scale implementations of the classical machinery around isolated
//! eigenvalues of Hermitian operators: Rayleigh-Schrodinger series,
//! Temple-Kato enclosures, the two-projection algebra, Kato's adiabatic
//! transport, Trotter limits, Pade/Borel resummation, and a collection of
//! named radial model problems with known constants.

pub mod adiabatic;
pub mod asymptotics;
pub mod error;
pub mod models;
pub mod operators;
pub mod perturbation;
pub mod projections;
pub mod sampling;
pub mod temple_kato;
pub mod tridiag;

pub use error::{Error, Result};

//! Brownian heat engines built on a damped harmonic oscillator.
//!
//! The working medium is a single particle in a harmonic trap with
//! controllable stiffness, coupled to a heat bath through a damping
//! rate and a matching noise strength.  Everything the crate computes
//! flows from the second moments ⟨q²⟩, ⟨qp⟩, ⟨p²⟩ of that oscillator:
//! equilibrium state functions, engine cycle efficiencies, exact
//! covariance propagation under time dependent stiffness and noise,
//! finite-time corrections and optimal driving protocols, efficiency
//! at maximum power, and a Langevin Monte Carlo layer that serves as a
//! model independent check on all of the above.
//!
//! Units are natural (ħ = kB = 1) by default; every thermodynamic
//! routine threads an explicit [`core::UnitSystem`] so SI runs work too.

pub mod core;
pub mod num;

pub mod bathswitch;
pub mod dynamics;
pub mod efficiency;
pub mod langevin;
pub mod maxpower;
pub mod perturb;
pub mod thermo;

/// Crate wide error type.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid moments: {0}")]
    InvalidMoments(String),
    #[error("degenerate cycle: {0}")]
    DegenerateCycle(String),
    #[error("quadrature did not converge: {0}")]
    QuadratureFailed(String),
    #[error("ode integration failed: {0}")]
    OdeFailed(String),
    #[error("argument outside validated range: {0}")]
    OutOfRange(String),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Nonparametric estimation of the right-hand side `f` of an autonomous ODE
//! `u'(t) = f(u(t))` from noisy observations of its solutions.
//!
//! Two observation regimes are supported:
//!
//! * **Stubble**: many short trajectories started from a grid of known initial
//!   conditions. Increments are estimated by local polynomial regression and
//!   `f` is read off as the time derivative at zero of the interpolated
//!   increments ([`stubble`]).
//! * **Snake**: one long trajectory. The solution and its velocity are
//!   reconstructed by local polynomial regression in time and `f` is obtained
//!   by nearest-neighbour lookup or by stability-certified multivariate
//!   polynomial interpolation ([`snake`]).
//!
//! The supporting pieces are an ODE flow and synthetic data generator
//! ([`odeflow`]), multivariate local polynomial regression ([`localpoly`]),
//! polynomial interpolation ([`polyinterp`]) and a Monte Carlo harness for
//! convergence-rate studies ([`harness`]).

pub mod error;
pub mod harness;
pub mod localpoly;
pub mod odeflow;
pub mod polyinterp;
pub mod snake;
pub mod stubble;

pub(crate) mod linalg;

pub use error::{Error, Result};

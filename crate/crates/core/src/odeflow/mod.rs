//! Flow of an autonomous ODE, increments, and synthetic noisy observations.
//!
//! Higher-order or non-autonomous equations are handled by stacking
//! derivatives (and time) into the state; see [`field::first_order_reduction`].

pub mod field;
pub mod integrate;
pub mod io;
pub mod noise;

pub use field::{BoundingBox, VectorField};
pub use integrate::{increment, integrate_flow, sample_trajectory, FlowConfig, Method, Trajectory};
pub use noise::{add_noise, NoiseKind, NoiseSpec, Observation};

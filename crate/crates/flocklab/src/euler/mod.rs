//! Semi-Lagrangian solver for the limiting pressureless Euler system with
//! nonlocal alignment, plus the forward characteristics flow.

mod characteristics;
mod solver;

pub use characteristics::{advance_characteristics, pushforward_density, CharacteristicMap};
pub use solver::{
    alignment_source, divergence_field, lipschitz_monitor, velocity_gradient, EulerRunState,
};

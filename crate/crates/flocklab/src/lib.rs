//! flocklab: a desk-scale numerical laboratory for kinetic Cucker-Smale
//! flocking with strong local alignment and its pressureless-Euler limit.
//!
//! The crate provides
//! - a particle-in-cell solver for the scaled kinetic model on the unit torus,
//!   with exact-exponential local relaxation (`kinetic`),
//! - a semi-Lagrangian solver for the limiting pressureless Euler system with
//!   nonlocal alignment (`euler`),
//! - exact Wasserstein-2 distances on the circle plus an LP transport oracle
//!   (`transport`),
//! - entropy, dissipation, flocking and relative-entropy diagnostics together
//!   with a hypothesis audit for the hydrodynamic-limit estimates
//!   (`diagnostics`),
//! - configuration, experiment drivers and report writers (`harness`).
//!
//! Runnable walkthroughs live under `examples/`; try
//! `cargo run --release --example flocking_decay`.

pub mod diagnostics;
pub mod domain;
pub mod euler;
pub mod harness;
pub mod kinetic;
pub mod transport;
pub mod vecmath;

mod error;
pub use error::{Error, Result};

//! Phase-space primitives: the flat torus, communication kernels, particle
//! ensembles, grid-based fluid states, and well-prepared initial data.

mod ensemble;
mod grid;
mod initial;
mod kernel;
mod profile;
mod torus;

pub use ensemble::ParticleEnsemble;
pub use grid::{FluidState, Grid};
pub use initial::{
    build_initial_ensemble, build_monokinetic_ensemble, particle_rng, InitialDataSpec,
};
pub use kernel::{CommKernel, KernelTable};
pub use profile::{FourierMode, FourierProfile};
pub use torus::{torus_distance, torus_distance_sq, wrap, TorusPoint};

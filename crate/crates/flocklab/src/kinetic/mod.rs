//! Particle-in-cell solver for the scaled kinetic Cucker-Smale equation with
//! strong local alignment, plus the microscopic N-body system used for
//! mean-field consistency checks.

mod checkpoint;
mod fields;
mod moments;
mod nbody;
mod step;

pub use checkpoint::{
    read_checkpoint, read_checkpoint_from, write_checkpoint, write_checkpoint_to, Checkpoint,
};
pub use fields::{alignment_field, alignment_field_direct, alignment_field_fft, ConvolvedFields};
pub use moments::{local_moments, stress_tensor, MomentSet};
pub(crate) use moments::{assign_cells, CHUNK};
pub use nbody::microscopic_cs_step;
pub use step::{relaxation_substep, AlignmentIntegrator, ConvolutionPath, KineticRunState, KineticSettings};

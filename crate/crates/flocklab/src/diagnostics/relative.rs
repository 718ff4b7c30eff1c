//! Relative entropy and relative flux between a binned kinetic state and a
//! fluid state sharing one grid.

use crate::domain::FluidState;
use crate::error::{Error, Result};
use crate::euler::EulerRunState;
use crate::kinetic::{local_moments, KineticRunState, MomentSet};
use crate::vecmath::{dist_sq, outer, scale, sub};

/// A kinetic moment set and a fluid state at the same time on the same grid.
///
/// The moment side plays the role of `V = (rho_eps, rho_eps u_eps)` and the
/// fluid side the role of `U = (rho, rho u)` in all comparison functionals.
#[derive(Debug, Clone)]
pub struct HydroPair<const D: usize> {
    pub time: f64,
    pub moments: MomentSet<D>,
    pub fluid: FluidState<D>,
}

impl<const D: usize> HydroPair<D> {
    /// Pairs an already-binned moment set with a fluid state.
    pub fn new(time: f64, moments: MomentSet<D>, fluid: FluidState<D>) -> Result<Self> {
        if moments.grid.cells_per_axis() != fluid.grid.cells_per_axis() {
            return Err(Error::GridMismatch(
                moments.grid.num_cells(),
                fluid.grid.num_cells(),
            ));
        }
        if !time.is_finite() {
            return Err(Error::InvalidConfig("pair time must be finite".into()));
        }
        Ok(HydroPair { time, moments, fluid })
    }

    /// Bins the kinetic run onto its grid and pairs it with the Euler run.
    /// The two runs must sit on the same grid at the same time.
    pub fn from_runs(kinetic: &KineticRunState<D>, euler: &EulerRunState<D>) -> Result<Self> {
        let dt_gap = (kinetic.time - euler.time).abs();
        if dt_gap > 1e-9 * (1.0 + kinetic.time.abs()) {
            return Err(Error::InvalidConfig(format!(
                "cannot pair runs at different times: {} vs {}",
                kinetic.time, euler.time
            )));
        }
        let moments = local_moments(&kinetic.ensemble, kinetic.grid());
        Self::new(kinetic.time, moments, euler.fluid.clone())
    }
}

/// Total relative entropy `sum_c rho_eps_c |u_eps_c - u_c|^2 / 2 * vol`.
/// Vacuum cells of the kinetic side contribute zero.
pub fn relative_entropy_total<const D: usize>(pair: &HydroPair<D>) -> f64 {
    let vol = pair.fluid.grid.cell_volume();
    let mut acc = 0.0;
    for c in 0..pair.fluid.grid.num_cells() {
        if pair.moments.occupied[c] {
            acc += 0.5 * pair.moments.rho[c] * dist_sq(pair.moments.u[c], pair.fluid.u[c]) * vol;
        }
    }
    acc
}

/// Per-cell relative flux `rho_eps (u_eps - u) (x) (u_eps - u)`, the only
/// nonzero block of the flux expansion for the pressureless system.  Each
/// matrix is positive semidefinite and its trace integrates to exactly twice
/// the total relative entropy.
pub fn relative_flux<const D: usize>(pair: &HydroPair<D>) -> Vec<[[f64; D] ; D]> {
    (0..pair.fluid.grid.num_cells())
        .map(|c| {
            if pair.moments.occupied[c] {
                let d = sub(pair.moments.u[c], pair.fluid.u[c]);
                let mut m = outer(d, d);
                for row in m.iter_mut() {
                    *row = scale(*row, pair.moments.rho[c]);
                }
                m
            } else {
                [[0.0; D]; D]
            }
        })
        .collect()
}

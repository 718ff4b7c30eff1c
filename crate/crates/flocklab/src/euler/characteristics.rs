//! Forward characteristics `dX/dt = u(t, X)` seeded at cell centers, and the
//! pushforward of the initial density along them.

use rayon::prelude::*;

use crate::domain::{FluidState, Grid, TorusPoint};
use crate::error::{Error, Result};
use crate::vecmath::scale;

/// Flow positions of every cell center; starts as the identity map.
#[derive(Debug, Clone)]
pub struct CharacteristicMap<const D: usize> {
    pub grid: Grid<D>,
    pub x: Vec<TorusPoint<D>>,
}

impl<const D: usize> CharacteristicMap<D> {
    pub fn identity(grid: Grid<D>) -> Self {
        let x = (0..grid.num_cells()).map(|c| grid.cell_center(c)).collect();
        CharacteristicMap { grid, x }
    }
}

/// One RK2 (midpoint) update of every characteristic along the interpolated
/// velocity field of `fluid`.
pub fn advance_characteristics<const D: usize>(
    map: &mut CharacteristicMap<D>,
    fluid: &FluidState<D>,
    dt: f64,
) -> Result<()> {
    if !dt.is_finite() || !(dt > 0.0) {
        return Err(Error::BadTimeStep(dt));
    }
    if fluid.grid != map.grid {
        return Err(Error::GridMismatch(
            fluid.grid.cells_per_axis(),
            map.grid.cells_per_axis(),
        ));
    }
    let grid = &fluid.grid;
    map.x.par_iter_mut().for_each(|p| {
        let mid = p.translate(scale(grid.interp_vector(&fluid.u, p), 0.5 * dt));
        *p = p.translate(scale(grid.interp_vector(&fluid.u, &mid), dt));
    });
    Ok(())
}

/// Histogram of the flow positions weighted by the initial density: the
/// discrete pushforward `X(t, .) # rho0`, returned as a cell density.
pub fn pushforward_density<const D: usize>(
    map: &CharacteristicMap<D>,
    rho0: &[f64],
) -> Result<Vec<f64>> {
    let grid = &map.grid;
    if rho0.len() != grid.num_cells() {
        return Err(Error::GridMismatch(rho0.len(), grid.num_cells()));
    }
    let vol = grid.cell_volume();
    let mut mass = vec![0.0; grid.num_cells()];
    for (p, r) in map.x.iter().zip(rho0) {
        mass[grid.cell_of(p)] += r * vol;
    }
    Ok(mass.into_iter().map(|m| m / vol).collect())
}

//! Local velocity moments of a particle ensemble on a uniform grid.

use rayon::prelude::*;

use crate::domain::{Grid, ParticleEnsemble};
use crate::vecmath::{outer, scale, sub};

/// Chunk length for the deterministic parallel reductions below.  Partial
/// histograms are accumulated per chunk and merged in chunk order, so the
/// result is bit-identical for any thread count.
pub(crate) const CHUNK: usize = 16_384;

/// Zeroth, first and second velocity moments binned on a grid.
///
/// `rho` and `momentum` are densities (cell sums divided by cell volume);
/// `u` is the bulk velocity on occupied cells and zero on vacuum cells, so
/// `momentum[c] == rho[c] * u[c]` wherever `occupied[c]` holds.
/// `second_moment` keeps the cell-integrated `sum_i w_i |v_i|^2`, which the
/// entropy and audit diagnostics need alongside the first two moments.
#[derive(Debug, Clone)]
pub struct MomentSet<const D: usize> {
    pub grid: Grid<D>,
    pub rho: Vec<f64>,
    pub momentum: Vec<[f64; D]>,
    pub u: Vec<[f64; D]>,
    pub occupied: Vec<bool>,
    pub second_moment: Vec<f64>,
}

impl<const D: usize> MomentSet<D> {
    /// Mass carried by cell `c` (the raw weight sum, undoing the volume
    /// normalisation of `rho`).
    pub fn cell_mass(&self, c: usize) -> f64 {
        self.rho[c] * self.grid.cell_volume()
    }

    /// All cell masses at once; convolution routines work on these.
    pub fn cell_masses(&self) -> Vec<f64> {
        let vol = self.grid.cell_volume();
        self.rho.iter().map(|r| r * vol).collect()
    }

    /// Cell-integrated momenta `sum_{i in c} w_i v_i`.
    pub fn cell_momenta(&self) -> Vec<[f64; D]> {
        let vol = self.grid.cell_volume();
        self.momentum.iter().map(|m| scale(*m, vol)).collect()
    }

    pub fn total_mass(&self) -> f64 {
        let vol = self.grid.cell_volume();
        self.rho.iter().sum::<f64>() * vol
    }

    pub fn total_momentum(&self) -> [f64; D] {
        let vol = self.grid.cell_volume();
        let mut acc = [0.0; D];
        for m in &self.momentum {
            acc = crate::vecmath::axpy(acc, vol, *m);
        }
        acc
    }
}

/// Cell index of every particle, clamped into the periodic grid.
pub(crate) fn assign_cells<const D: usize>(
    ensemble: &ParticleEnsemble<D>,
    grid: &Grid<D>,
) -> Vec<u32> {
    ensemble
        .positions
        .par_chunks(CHUNK)
        .flat_map_iter(|chunk| {
            let grid = *grid;
            chunk.iter().map(move |p| grid.cell_of(p) as u32)
        })
        .collect()
}

/// Cell masses from a precomputed assignment (deterministic chunked sum).
pub(crate) fn bin_masses(weights: &[f64], cells: &[u32], num_cells: usize) -> Vec<f64> {
    let partials: Vec<Vec<f64>> = (0..weights.len())
        .into_par_iter()
        .chunks(CHUNK)
        .map(|idx| {
            let mut mass = vec![0.0; num_cells];
            for i in idx {
                mass[cells[i] as usize] += weights[i];
            }
            mass
        })
        .collect();
    let mut mass = vec![0.0; num_cells];
    for p in partials {
        for c in 0..num_cells {
            mass[c] += p[c];
        }
    }
    mass
}

/// Cell-integrated momenta `sum_{i in c} w_i v_i` from a precomputed
/// assignment; the stage velocities of the alignment integrator get binned
/// through this while positions stay frozen.
pub(crate) fn bin_momenta<const D: usize>(
    weights: &[f64],
    velocities: &[[f64; D]],
    cells: &[u32],
    num_cells: usize,
) -> Vec<[f64; D]> {
    let partials: Vec<Vec<[f64; D]>> = (0..weights.len())
        .into_par_iter()
        .chunks(CHUNK)
        .map(|idx| {
            let mut mom = vec![[0.0; D]; num_cells];
            for i in idx {
                let c = cells[i] as usize;
                mom[c] = crate::vecmath::axpy(mom[c], weights[i], velocities[i]);
            }
            mom
        })
        .collect();
    let mut mom = vec![[0.0; D]; num_cells];
    for p in partials {
        for c in 0..num_cells {
            mom[c] = crate::vecmath::add(mom[c], p[c]);
        }
    }
    mom
}

/// Moments from a precomputed cell assignment.  Splitting this off lets the
/// time stepper reuse one assignment for several moment evaluations within a
/// step, where positions are frozen.
pub(crate) fn moments_from_cells<const D: usize>(
    ensemble: &ParticleEnsemble<D>,
    grid: &Grid<D>,
    cells: &[u32],
) -> MomentSet<D> {
    let n = ensemble.len();
    let nc = grid.num_cells();
    let partials: Vec<(Vec<f64>, Vec<[f64; D]>, Vec<f64>)> = (0..n)
        .into_par_iter()
        .chunks(CHUNK)
        .map(|idx| {
            let mut mass = vec![0.0; nc];
            let mut mom = vec![[0.0; D]; nc];
            let mut sec = vec![0.0; nc];
            for i in idx {
                let c = cells[i] as usize;
                let w = ensemble.weights[i];
                let v = ensemble.velocities[i];
                mass[c] += w;
                mom[c] = crate::vecmath::axpy(mom[c], w, v);
                sec[c] += w * crate::vecmath::norm_sq(v);
            }
            (mass, mom, sec)
        })
        .collect();

    let mut mass = vec![0.0; nc];
    let mut mom = vec![[0.0; D]; nc];
    let mut sec = vec![0.0; nc];
    for (pm, pp, ps) in partials {
        for c in 0..nc {
            mass[c] += pm[c];
            mom[c] = crate::vecmath::add(mom[c], pp[c]);
            sec[c] += ps[c];
        }
    }

    let vol = grid.cell_volume();
    let occupied: Vec<bool> = mass.iter().map(|&m| m > 0.0).collect();
    let u: Vec<[f64; D]> = (0..nc)
        .map(|c| {
            if occupied[c] {
                crate::vecmath::div(mom[c], mass[c])
            } else {
                [0.0; D]
            }
        })
        .collect();
    let rho: Vec<f64> = mass.iter().map(|m| m / vol).collect();
    let momentum: Vec<[f64; D]> = mom.iter().map(|m| scale(*m, 1.0 / vol)).collect();

    MomentSet {
        grid: *grid,
        rho,
        momentum,
        u,
        occupied,
        second_moment: sec,
    }
}

/// Bin mass, momentum and bulk velocity of `ensemble` on `grid`.
pub fn local_moments<const D: usize>(
    ensemble: &ParticleEnsemble<D>,
    grid: &Grid<D>,
) -> MomentSet<D> {
    let cells = assign_cells(ensemble, grid);
    moments_from_cells(ensemble, grid, &cells)
}

/// Cell-integrated velocity fluctuation tensor
/// `sum_{i in c} w_i (v_i - u_c) (v_i - u_c)^T`.
///
/// Its trace summed over cells equals the relaxation dissipation
/// `sum_i w_i |v_i - u(c_i)|^2`, which the tests pin down.
pub fn stress_tensor<const D: usize>(
    ensemble: &ParticleEnsemble<D>,
    moments: &MomentSet<D>,
) -> Vec<[[f64; D]; D]> {
    let cells = assign_cells(ensemble, &moments.grid);
    let nc = moments.grid.num_cells();
    let partials: Vec<Vec<[[f64; D]; D]>> = (0..ensemble.len())
        .into_par_iter()
        .chunks(CHUNK)
        .map(|idx| {
            let mut acc = vec![[[0.0; D]; D]; nc];
            for i in idx {
                let c = cells[i] as usize;
                let d = sub(ensemble.velocities[i], moments.u[c]);
                acc[c] = crate::vecmath::mat_axpy(acc[c], ensemble.weights[i], outer(d, d));
            }
            acc
        })
        .collect();
    let mut out = vec![[[0.0; D]; D]; nc];
    for p in partials {
        for c in 0..nc {
            out[c] = crate::vecmath::mat_add(out[c], p[c]);
        }
    }
    out
}

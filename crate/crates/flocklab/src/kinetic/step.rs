//! Strang-split time stepper for the scaled kinetic equation.
//!
//! One step of size `dt` is: free transport over `dt/2`, the nonlocal
//! alignment substep over `dt`, the local relaxation substep over `dt`
//! (skipped when `epsilon` is infinite), then transport over `dt/2` again.
//! Positions are frozen during the velocity substeps, so cell assignments
//! and cell masses are computed once per step and reused.

use rayon::prelude::*;

use crate::domain::{CommKernel, Grid, KernelTable, ParticleEnsemble};
use crate::error::{Error, Result};
use crate::vecmath::{axpy, div, scale, sub};

use super::fields::fft_circular_convolve;
use super::moments::{assign_cells, bin_masses, bin_momenta, local_moments, MomentSet, CHUNK};

/// How the alignment substep integrates `dv/dt = psi*(rho u) - v psi*rho`.
///
/// `Rk4` re-bins the cell momenta at every stage, so the convolved field is
/// self-consistent with the stage velocities; because each stage derivative
/// has exactly zero weighted sum, the scheme preserves total momentum to
/// roundoff.  `FrozenExponential` freezes the field at the step start and
/// applies the resulting linear flow exactly; it is locally second-order
/// accurate but lets the total momentum drift at `O(dt^2)` per step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlignmentIntegrator {
    Rk4,
    FrozenExponential,
}

/// How grid convolutions are evaluated: `Direct` walks the cached offset
/// table, `Fft` uses circular FFT convolution (one-dimensional grids only).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvolutionPath {
    Direct,
    Fft,
}

#[derive(Clone, Copy, Debug)]
pub struct KineticSettings {
    pub integrator: AlignmentIntegrator,
    pub convolution: ConvolutionPath,
}

impl Default for KineticSettings {
    fn default() -> Self {
        KineticSettings {
            integrator: AlignmentIntegrator::Rk4,
            convolution: ConvolutionPath::Direct,
        }
    }
}

/// A kinetic simulation in flight: the ensemble, the model parameters and
/// the cached kernel table.
pub struct KineticRunState<const D: usize> {
    pub ensemble: ParticleEnsemble<D>,
    pub kernel: CommKernel,
    /// Relaxation scale; `f64::INFINITY` disables the relaxation substep.
    pub epsilon: f64,
    pub time: f64,
    grid: Grid<D>,
    settings: KineticSettings,
    table: KernelTable<D>,
    fft_row: Option<Vec<f64>>,
}

impl<const D: usize> KineticRunState<D> {
    pub fn new(
        ensemble: ParticleEnsemble<D>,
        grid: Grid<D>,
        kernel: CommKernel,
        epsilon: f64,
    ) -> Result<Self> {
        Self::with_settings(ensemble, grid, kernel, epsilon, KineticSettings::default())
    }

    pub fn with_settings(
        ensemble: ParticleEnsemble<D>,
        grid: Grid<D>,
        kernel: CommKernel,
        epsilon: f64,
        settings: KineticSettings,
    ) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "relaxation scale must be positive (or infinite), got {epsilon}"
            )));
        }
        let fft_row = match settings.convolution {
            ConvolutionPath::Direct => None,
            ConvolutionPath::Fft => {
                if D != 1 {
                    return Err(Error::InvalidConfig(
                        "fft convolution is only available on one-dimensional grids".into(),
                    ));
                }
                let origin = grid.cell_center(0);
                Some(
                    (0..grid.num_cells())
                        .map(|c| kernel.eval(&origin, &grid.cell_center(c)))
                        .collect(),
                )
            }
        };
        let table = KernelTable::new(&kernel, &grid);
        Ok(KineticRunState {
            ensemble,
            kernel,
            epsilon,
            time: 0.0,
            grid,
            settings,
            table,
            fft_row,
        })
    }

    pub fn grid(&self) -> &Grid<D> {
        &self.grid
    }

    pub fn settings(&self) -> &KineticSettings {
        &self.settings
    }

    /// Bin the current ensemble on the run's grid.
    pub fn moments(&self) -> MomentSet<D> {
        local_moments(&self.ensemble, &self.grid)
    }

    fn conv_scalar(&self, vals: &[f64]) -> Vec<f64> {
        match self.settings.convolution {
            ConvolutionPath::Direct => self.table.convolve(vals),
            ConvolutionPath::Fft => fft_circular_convolve(self.fft_row.as_ref().unwrap(), vals),
        }
    }

    fn conv_vec(&self, vals: &[[f64; D]]) -> Vec<[f64; D]> {
        match self.settings.convolution {
            ConvolutionPath::Direct => self.table.convolve_vec(vals),
            ConvolutionPath::Fft => {
                let row = self.fft_row.as_ref().unwrap();
                let mut out = vec![[0.0; D]; vals.len()];
                for a in 0..D {
                    let col: Vec<f64> = vals.iter().map(|v| v[a]).collect();
                    for (o, x) in out.iter_mut().zip(fft_circular_convolve(row, &col)) {
                        o[a] = x;
                    }
                }
                out
            }
        }
    }

    /// Advance by one Strang step of size `dt`.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !dt.is_finite() || !(dt > 0.0) {
            return Err(Error::BadTimeStep(dt));
        }
        free_transport(&mut self.ensemble, 0.5 * dt);

        let nc = self.grid.num_cells();
        let cells = assign_cells(&self.ensemble, &self.grid);
        let masses = bin_masses(&self.ensemble.weights, &cells, nc);
        // psi * rho with cell-total quadrature; fixed while positions are.
        let psi_rho = self.conv_scalar(&masses);

        match self.settings.integrator {
            AlignmentIntegrator::Rk4 => self.alignment_rk4(dt, &cells, &psi_rho, nc),
            AlignmentIntegrator::FrozenExponential => {
                self.alignment_frozen_exp(dt, &cells, &psi_rho, nc)
            }
        }

        if self.epsilon.is_finite() {
            let mom = bin_momenta(&self.ensemble.weights, &self.ensemble.velocities, &cells, nc);
            let theta = (-dt / self.epsilon).exp();
            // Bulk velocities once per cell, by true division: when every
            // particle in a cell shares one velocity the quotient is exact
            // and the relaxation below leaves it untouched bit for bit.
            let ub_cell: Vec<[f64; D]> = (0..nc)
                .map(|c| if masses[c] > 0.0 { div(mom[c], masses[c]) } else { [0.0; D] })
                .collect();
            let vels = &mut self.ensemble.velocities;
            vels.par_chunks_mut(CHUNK)
                .zip(cells.par_chunks(CHUNK))
                .for_each(|(vs, cs)| {
                    for (v, &c) in vs.iter_mut().zip(cs) {
                        let ub = ub_cell[c as usize];
                        *v = axpy(ub, theta, sub(*v, ub));
                    }
                });
        }

        free_transport(&mut self.ensemble, 0.5 * dt);
        self.time += dt;
        Ok(())
    }

    fn alignment_rk4(&mut self, dt: f64, cells: &[u32], psi_rho: &[f64], nc: usize) {
        let weights = &self.ensemble.weights;
        let deriv = |vels: &[[f64; D]]| -> Vec<[f64; D]> {
            let mom = bin_momenta(weights, vels, cells, nc);
            let psi_mom = self.conv_vec(&mom);
            vels.par_iter()
                .zip(cells.par_iter())
                .map(|(v, &c)| axpy(psi_mom[c as usize], -psi_rho[c as usize], *v))
                .collect()
        };
        let stage = |base: &[[f64; D]], s: f64, k: &[[f64; D]]| -> Vec<[f64; D]> {
            base.par_iter()
                .zip(k.par_iter())
                .map(|(b, ki)| axpy(*b, s, *ki))
                .collect()
        };

        let v0 = self.ensemble.velocities.clone();
        let k1 = deriv(&v0);
        let k2 = deriv(&stage(&v0, 0.5 * dt, &k1));
        let k3 = deriv(&stage(&v0, 0.5 * dt, &k2));
        let k4 = deriv(&stage(&v0, dt, &k3));

        let sixth = dt / 6.0;
        self.ensemble
            .velocities
            .par_iter_mut()
            .enumerate()
            .for_each(|(i, v)| {
                let mut acc = k1[i];
                acc = axpy(acc, 2.0, k2[i]);
                acc = axpy(acc, 2.0, k3[i]);
                acc = crate::vecmath::add(acc, k4[i]);
                *v = axpy(*v, sixth, acc);
            });
    }

    fn alignment_frozen_exp(&mut self, dt: f64, cells: &[u32], psi_rho: &[f64], nc: usize) {
        let mom = bin_momenta(&self.ensemble.weights, &self.ensemble.velocities, cells, nc);
        let psi_mom = self.conv_vec(&mom);
        // psi*rho >= psi_m * total mass > 0, so the division is safe; doing
        // it (and the exponential) once per cell keeps exact quotients exact
        // and spares a transcendental per particle.
        let cell_data: Vec<([f64; D], f64)> = (0..nc)
            .map(|c| (div(psi_mom[c], psi_rho[c]), (-dt * psi_rho[c]).exp()))
            .collect();
        self.ensemble
            .velocities
            .par_chunks_mut(CHUNK)
            .zip(cells.par_chunks(CHUNK))
            .for_each(|(vs, cs)| {
                for (v, &c) in vs.iter_mut().zip(cs) {
                    let (vbar, damp) = cell_data[c as usize];
                    *v = axpy(vbar, damp, sub(*v, vbar));
                }
            });
    }
}

/// Move every particle along its velocity for a time `dt`, wrapping on the
/// torus.  Velocities are untouched, so kinetic energy is exactly preserved.
pub(crate) fn free_transport<const D: usize>(ensemble: &mut ParticleEnsemble<D>, dt: f64) {
    ensemble
        .positions
        .par_chunks_mut(CHUNK)
        .zip(ensemble.velocities.par_chunks(CHUNK))
        .for_each(|(ps, vs)| {
            for (p, v) in ps.iter_mut().zip(vs) {
                *p = p.translate(scale(*v, dt));
            }
        });
}

/// Damp each particle velocity toward the bulk velocity of its cell:
/// `v <- u_c + (v - u_c) exp(-dt/epsilon)`, the exact solution of the local
/// relaxation flow with the cell means held fixed.  Infinite `epsilon` is a
/// no-op.  The means are taken from `moments`, which the caller computed —
/// normally from this very ensemble.
pub fn relaxation_substep<const D: usize>(
    ensemble: &mut ParticleEnsemble<D>,
    moments: &MomentSet<D>,
    dt: f64,
    epsilon: f64,
) -> Result<()> {
    if !dt.is_finite() || !(dt > 0.0) {
        return Err(Error::BadTimeStep(dt));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "relaxation scale must be positive (or infinite), got {epsilon}"
        )));
    }
    if epsilon.is_infinite() {
        return Ok(());
    }
    let cells = assign_cells(ensemble, &moments.grid);
    let theta = (-dt / epsilon).exp();
    ensemble
        .velocities
        .par_chunks_mut(CHUNK)
        .zip(cells.par_chunks(CHUNK))
        .for_each(|(vs, cs)| {
            for (v, &c) in vs.iter_mut().zip(cs) {
                let ub = moments.u[c as usize];
                *v = axpy(ub, theta, sub(*v, ub));
            }
        });
    Ok(())
}

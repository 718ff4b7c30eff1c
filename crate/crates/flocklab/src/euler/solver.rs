//! The grid solver: backtraced transport, Jacobian-corrected density,
//! alignment source, and the Lipschitz safeguard.

use rayon::prelude::*;

use crate::domain::{CommKernel, FluidState, KernelTable};
use crate::error::{Error, Result};
use crate::vecmath::{axpy, scale, sub};

/// Centered-difference estimate of `div u` per cell, periodic in every axis.
pub fn divergence_field<const D: usize>(fluid: &FluidState<D>) -> Vec<f64> {
    let grid = &fluid.grid;
    let g = grid.cells_per_axis();
    let inv_2h = 0.5 * g as f64;
    (0..grid.num_cells())
        .map(|c| {
            let m = grid.decode(c);
            let mut div = 0.0;
            for a in 0..D {
                let mut plus = m;
                plus[a] = (m[a] + 1) % g;
                let mut minus = m;
                minus[a] = (m[a] + g - 1) % g;
                div += (fluid.u[grid.encode(plus)][a] - fluid.u[grid.encode(minus)][a]) * inv_2h;
            }
            div
        })
        .collect()
}

/// Per-cell velocity gradient by centered differences; entry `[a][b]` of
/// cell `c` holds `du_b/dx_a` at the cell center.
pub fn velocity_gradient<const D: usize>(fluid: &FluidState<D>) -> Vec<[[f64; D]; D]> {
    let grid = &fluid.grid;
    let g = grid.cells_per_axis();
    let inv_2h = 0.5 * g as f64;
    (0..grid.num_cells())
        .map(|c| {
            let m = grid.decode(c);
            let mut out = [[0.0; D]; D];
            for a in 0..D {
                let mut plus = m;
                plus[a] = (m[a] + 1) % g;
                let mut minus = m;
                minus[a] = (m[a] + g - 1) % g;
                let up = fluid.u[grid.encode(plus)];
                let un = fluid.u[grid.encode(minus)];
                for b in 0..D {
                    out[a][b] = (up[b] - un[b]) * inv_2h;
                }
            }
            out
        })
        .collect()
}

/// Largest centered-difference entry of the velocity gradient:
/// `max over cells, derivative axes and components of |du_b/dx_a|`.
pub fn lipschitz_monitor<const D: usize>(fluid: &FluidState<D>) -> f64 {
    let grid = &fluid.grid;
    let g = grid.cells_per_axis();
    let inv_2h = 0.5 * g as f64;
    let mut worst: f64 = 0.0;
    for c in 0..grid.num_cells() {
        let m = grid.decode(c);
        for a in 0..D {
            let mut plus = m;
            plus[a] = (m[a] + 1) % g;
            let mut minus = m;
            minus[a] = (m[a] + g - 1) % g;
            let up = fluid.u[grid.encode(plus)];
            let un = fluid.u[grid.encode(minus)];
            for b in 0..D {
                worst = worst.max(((up[b] - un[b]) * inv_2h).abs());
            }
        }
    }
    worst
}

/// Alignment source of the momentum equation,
/// `S(x) = sum_y psi(x-y) rho(x) rho(y) (u(y) - u(x)) * cell_volume`,
/// evaluated by the direct double loop.  Its discrete integral vanishes by
/// the x <-> y exchange symmetry.
pub fn alignment_source<const D: usize>(
    fluid: &FluidState<D>,
    kernel: &CommKernel,
) -> Vec<[f64; D]> {
    let grid = &fluid.grid;
    let nc = grid.num_cells();
    let vol = grid.cell_volume();
    (0..nc)
        .into_par_iter()
        .map(|c| {
            let xc = grid.cell_center(c);
            let mut acc = [0.0; D];
            for y in 0..nc {
                let w = kernel.eval(&xc, &grid.cell_center(y)) * fluid.rho[y] * vol;
                acc = axpy(acc, w, sub(fluid.u[y], fluid.u[c]));
            }
            scale(acc, fluid.rho[c])
        })
        .collect()
}

/// A fluid simulation in flight.
///
/// `lipschitz_estimate` tracks the current `lipschitz_monitor` value; a step
/// is refused when `lipschitz_estimate * dt` reaches `safeguard` (default
/// 0.5), the sign that the state is leaving the smooth regime the scheme is
/// valid in.
pub struct EulerRunState<const D: usize> {
    pub fluid: FluidState<D>,
    pub time: f64,
    pub kernel: CommKernel,
    pub lipschitz_estimate: f64,
    pub safeguard: f64,
    table: KernelTable<D>,
}

impl<const D: usize> EulerRunState<D> {
    pub fn new(fluid: FluidState<D>, kernel: CommKernel) -> Result<Self> {
        Self::with_safeguard(fluid, kernel, 0.5)
    }

    pub fn with_safeguard(
        fluid: FluidState<D>,
        kernel: CommKernel,
        safeguard: f64,
    ) -> Result<Self> {
        if !(safeguard > 0.0) || !safeguard.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "safeguard threshold must be positive and finite, got {safeguard}"
            )));
        }
        let table = KernelTable::new(&kernel, &fluid.grid);
        let lipschitz_estimate = lipschitz_monitor(&fluid);
        Ok(EulerRunState {
            fluid,
            time: 0.0,
            kernel,
            lipschitz_estimate,
            safeguard,
            table,
        })
    }

    /// One semi-Lagrangian step: RK2 backtrace of each cell center, periodic
    /// linear interpolation of `rho` and `u` at the foot, density times the
    /// local Jacobian factor `exp(-dt div u)`, mass renormalization, then the
    /// alignment source on the transported state.  A final uniform velocity
    /// shift returns the total momentum to its pre-step value, playing the
    /// same role for momentum that the renormalization plays for mass.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !dt.is_finite() || !(dt > 0.0) {
            return Err(Error::BadTimeStep(dt));
        }
        let product = self.lipschitz_estimate * dt;
        if product >= self.safeguard {
            return Err(Error::SafeguardBreach { product, limit: self.safeguard });
        }

        let grid = self.fluid.grid;
        let nc = grid.num_cells();
        let vol = grid.cell_volume();
        let p_before = self.fluid.momentum();
        let div = divergence_field(&self.fluid);

        let rho = &self.fluid.rho;
        let u = &self.fluid.u;
        let (rho_t, u_t): (Vec<f64>, Vec<[f64; D]>) = (0..nc)
            .into_par_iter()
            .map(|c| {
                let x = grid.cell_center(c);
                let mid = x.translate(scale(u[c], -0.5 * dt));
                let u_mid = grid.interp_vector(u, &mid);
                let foot = x.translate(scale(u_mid, -dt));
                let jac = (-dt * grid.interp_scalar(&div, &foot)).exp();
                (grid.interp_scalar(rho, &foot) * jac, grid.interp_vector(u, &foot))
            })
            .unzip();

        let mass: f64 = rho_t.iter().sum::<f64>() * vol;
        let rho_new: Vec<f64> = rho_t.into_iter().map(|r| r / mass).collect();

        // Alignment acceleration psi*(rho u) - u psi*rho on the transported
        // state, with cell-total quadrature.
        let cell_mass: Vec<f64> = rho_new.iter().map(|r| r * vol).collect();
        let cell_mom: Vec<[f64; D]> = rho_new
            .iter()
            .zip(&u_t)
            .map(|(r, v)| scale(*v, r * vol))
            .collect();
        let psi_rho = self.table.convolve(&cell_mass);
        let psi_mom = self.table.convolve_vec(&cell_mom);
        let mut u_new: Vec<[f64; D]> = (0..nc)
            .map(|c| {
                let accel = axpy(psi_mom[c], -psi_rho[c], u_t[c]);
                axpy(u_t[c], dt, accel)
            })
            .collect();

        // Restore the step-start momentum with a uniform shift (total mass
        // is one after renormalization).
        let mut p_now = [0.0; D];
        for (r, v) in rho_new.iter().zip(&u_new) {
            p_now = axpy(p_now, r * vol, *v);
        }
        let delta = sub(p_before, p_now);
        for v in u_new.iter_mut() {
            *v = crate::vecmath::add(*v, delta);
        }

        self.fluid.rho = rho_new;
        self.fluid.u = u_new;
        self.lipschitz_estimate = lipschitz_monitor(&self.fluid);
        self.time += dt;
        Ok(())
    }
}

//! Kernel convolutions of the binned moments: the nonlocal alignment field.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::domain::{CommKernel, Grid, KernelTable};
use crate::vecmath::axpy;

use super::moments::MomentSet;

/// `psi * rho` and `psi * (rho u)` sampled at cell centers, with cell-total
/// quadrature: `(psi * rho)[c] = sum_c' psi(c, c') mass_c'`.
#[derive(Debug, Clone)]
pub struct ConvolvedFields<const D: usize> {
    pub psi_rho: Vec<f64>,
    pub psi_momentum: Vec<[f64; D]>,
}

impl<const D: usize> ConvolvedFields<D> {
    /// Alignment force `L[f](x_c, v) = (psi * rho u)[c] - v (psi * rho)[c]`.
    pub fn force(&self, cell: usize, v: [f64; D]) -> [f64; D] {
        axpy(self.psi_momentum[cell], -self.psi_rho[cell], v)
    }
}

/// Alignment field via the cached per-offset kernel table.
pub fn alignment_field<const D: usize>(
    moments: &MomentSet<D>,
    table: &KernelTable<D>,
) -> ConvolvedFields<D> {
    ConvolvedFields {
        psi_rho: table.convolve(&moments.cell_masses()),
        psi_momentum: table.convolve_vec(&moments.cell_momenta()),
    }
}

/// Reference alignment field evaluating the kernel at cell-center pairs
/// directly, skipping vacuum cells.  Slower than the table but written
/// independently of it, which is what the agreement tests lean on.
pub fn alignment_field_direct<const D: usize>(
    moments: &MomentSet<D>,
    kernel: &CommKernel,
) -> ConvolvedFields<D> {
    let grid = &moments.grid;
    let nc = grid.num_cells();
    let masses = moments.cell_masses();
    let momenta = moments.cell_momenta();
    let mut psi_rho = vec![0.0; nc];
    let mut psi_momentum = vec![[0.0; D]; nc];
    for c in 0..nc {
        let xc = grid.cell_center(c);
        let mut s = 0.0;
        let mut sv = [0.0; D];
        for cp in 0..nc {
            if !moments.occupied[cp] {
                continue;
            }
            let w = kernel.eval(&xc, &grid.cell_center(cp));
            s += w * masses[cp];
            sv = axpy(sv, w, momenta[cp]);
        }
        psi_rho[c] = s;
        psi_momentum[c] = sv;
    }
    ConvolvedFields { psi_rho, psi_momentum }
}

/// Kernel values per one-dimensional cell offset, the convolution stencil of
/// the FFT path.
pub(crate) fn kernel_row(kernel: &CommKernel, grid: &Grid<1>) -> Vec<f64> {
    let origin = grid.cell_center(0);
    (0..grid.num_cells())
        .map(|c| kernel.eval(&origin, &grid.cell_center(c)))
        .collect()
}

/// Circular convolution `out[c] = sum_c' row[(c - c') mod g] vals[c']` by FFT.
pub(crate) fn fft_circular_convolve(row: &[f64], vals: &[f64]) -> Vec<f64> {
    let g = row.len();
    assert_eq!(vals.len(), g);
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(g);
    let inv = planner.plan_fft_inverse(g);
    let mut a: Vec<Complex<f64>> = row.iter().map(|&x| Complex::new(x, 0.0)).collect();
    let mut b: Vec<Complex<f64>> = vals.iter().map(|&x| Complex::new(x, 0.0)).collect();
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    inv.process(&mut a);
    let scale = 1.0 / g as f64;
    a.iter().map(|x| x.re * scale).collect()
}

/// One-dimensional alignment field through the FFT fast path.
pub fn alignment_field_fft(moments: &MomentSet<1>, kernel: &CommKernel) -> ConvolvedFields<1> {
    let row = kernel_row(kernel, &moments.grid);
    let psi_rho = fft_circular_convolve(&row, &moments.cell_masses());
    let mom: Vec<f64> = moments.cell_momenta().iter().map(|m| m[0]).collect();
    let psi_momentum = fft_circular_convolve(&row, &mom)
        .into_iter()
        .map(|x| [x])
        .collect();
    ConvolvedFields { psi_rho, psi_momentum }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{ParticleEnsemble, TorusPoint};
    use crate::kinetic::local_moments;
    use rand::prelude::*;

    fn random_ensemble(n: usize, seed: u64) -> ParticleEnsemble<1> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let pos = (0..n).map(|_| TorusPoint::new([rng.gen()])).collect();
        let vel = (0..n).map(|_| [rng.gen::<f64>() * 2.0 - 1.0]).collect();
        ParticleEnsemble::with_uniform_weights(pos, vel).unwrap()
    }

    #[test]
    fn constant_kernel_collapses_to_global_moments() {
        let e = random_ensemble(400, 3);
        let grid = Grid::<1>::new(16).unwrap();
        let m = local_moments(&e, &grid);
        let k = CommKernel::new(1.0, 0.0).unwrap();
        let f = alignment_field(&m, &KernelTable::new(&k, &grid));
        let p = e.total_momentum();
        for c in 0..grid.num_cells() {
            assert!((f.psi_rho[c] - 1.0).abs() < 1e-12);
            assert!((f.psi_momentum[c][0] - p[0]).abs() < 1e-12);
            // L[f](x, v) = (total momentum) - v for psi = 1
            let g = f.force(c, [0.3]);
            assert!((g[0] - (p[0] - 0.3)).abs() < 1e-12);
        }
    }

    #[test]
    fn table_and_direct_paths_agree() {
        let e = random_ensemble(300, 4);
        let grid = Grid::<1>::new(32).unwrap();
        let m = local_moments(&e, &grid);
        let k = CommKernel::new(1.4, 1.3).unwrap();
        let a = alignment_field(&m, &KernelTable::new(&k, &grid));
        let b = alignment_field_direct(&m, &k);
        for c in 0..grid.num_cells() {
            assert!((a.psi_rho[c] - b.psi_rho[c]).abs() < 1e-12);
            assert!((a.psi_momentum[c][0] - b.psi_momentum[c][0]).abs() < 1e-12);
        }
    }

    #[test]
    fn fft_path_matches_direct_evaluation() {
        let e = random_ensemble(5000, 5);
        let grid = Grid::<1>::new(64).unwrap();
        let m = local_moments(&e, &grid);
        let k = CommKernel::new(1.0, 1.0).unwrap();
        let a = alignment_field_direct(&m, &k);
        let b = alignment_field_fft(&m, &k);
        for c in 0..grid.num_cells() {
            assert!((a.psi_rho[c] - b.psi_rho[c]).abs() < 1e-10);
            assert!((a.psi_momentum[c][0] - b.psi_momentum[c][0]).abs() < 1e-10);
        }
    }

    #[test]
    fn two_dimensional_field_agrees_with_direct() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let n = 500;
        let pos = (0..n)
            .map(|_| TorusPoint::new([rng.gen(), rng.gen()]))
            .collect();
        let vel = (0..n)
            .map(|_| [rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5])
            .collect();
        let e = ParticleEnsemble::<2>::with_uniform_weights(pos, vel).unwrap();
        let grid = Grid::<2>::new(8).unwrap();
        let m = local_moments(&e, &grid);
        let k = CommKernel::new(0.9, 2.0).unwrap();
        let a = alignment_field(&m, &KernelTable::new(&k, &grid));
        let b = alignment_field_direct(&m, &k);
        for c in 0..grid.num_cells() {
            assert!((a.psi_rho[c] - b.psi_rho[c]).abs() < 1e-12);
            for ax in 0..2 {
                assert!((a.psi_momentum[c][ax] - b.psi_momentum[c][ax]).abs() < 1e-12);
            }
        }
    }
}

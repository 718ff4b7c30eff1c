//! Communication kernel `psi(r) = lambda / (1 + r^2)^beta` and a cached
//! cell-offset table for grid convolutions.

use serde::{Deserialize, Serialize};

use super::grid::Grid;
use super::torus::{torus_distance, TorusPoint};
use crate::error::{Error, Result};

/// Bounded, positive, radially decreasing communication weight.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CommKernel {
    pub lambda: f64,
    pub beta: f64,
}

impl CommKernel {
    pub fn new(lambda: f64, beta: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidKernel(format!("lambda must be positive, got {lambda}")));
        }
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::InvalidKernel(format!("beta must be >= 0, got {beta}")));
        }
        Ok(CommKernel { lambda, beta })
    }

    /// Evaluate at a given geodesic distance.
    pub fn eval_at_distance(&self, r: f64) -> f64 {
        self.lambda / (1.0 + r * r).powf(self.beta)
    }

    /// Evaluate at a pair of torus points.
    pub fn eval<const D: usize>(&self, a: &TorusPoint<D>, b: &TorusPoint<D>) -> f64 {
        self.eval_at_distance(torus_distance(a, b))
    }

    /// Lower bound `psi_m = lambda / (1 + d/4)^beta` attained at the torus diameter.
    pub fn kernel_min(&self, dim: usize) -> f64 {
        self.lambda / (1.0 + dim as f64 / 4.0).powf(self.beta)
    }

    /// Numerical bound on the Lipschitz constant of `r -> psi(r)`.
    pub fn lipschitz_bound(&self) -> f64 {
        // |psi'(r)| = 2 lambda beta r / (1+r^2)^(beta+1); scan the compact range.
        let mut m: f64 = 0.0;
        for i in 0..=2000 {
            let r = i as f64 * 0.5e-3 * 2.0_f64.sqrt();
            let d = 2.0 * self.lambda * self.beta * r / (1.0 + r * r).powf(self.beta + 1.0);
            m = m.max(d);
        }
        m
    }
}

/// Kernel values tabulated per cell offset, so that grid convolutions become
/// table lookups. Values match `eval` at cell-center distances.
#[derive(Clone, Debug)]
pub struct KernelTable<const D: usize> {
    grid: Grid<D>,
    values: Vec<f64>,
}

impl<const D: usize> KernelTable<D> {
    pub fn new(kernel: &CommKernel, grid: &Grid<D>) -> Self {
        let origin = grid.cell_center(0);
        let values = (0..grid.num_cells())
            .map(|c| kernel.eval(&origin, &grid.cell_center(c)))
            .collect();
        KernelTable { grid: *grid, values }
    }

    pub fn grid(&self) -> &Grid<D> {
        &self.grid
    }

    /// Kernel value between cells `a` and `b`.
    pub fn between(&self, a: usize, b: usize) -> f64 {
        self.values[self.grid.offset_index(a, b)]
    }

    /// Discrete convolution `(psi * vals)[c] = sum_{c'} psi(c, c') vals[c']`.
    ///
    /// `vals` are per-cell totals (already multiplied by cell volume where
    /// appropriate), so the caller controls the quadrature.
    pub fn convolve(&self, vals: &[f64]) -> Vec<f64> {
        let n = self.grid.num_cells();
        assert_eq!(vals.len(), n);
        let mut out = vec![0.0; n];
        for (c, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for (cp, v) in vals.iter().enumerate() {
                s += self.values[self.grid.offset_index(c, cp)] * v;
            }
            *o = s;
        }
        out
    }

    /// Componentwise convolution of a vector field.
    pub fn convolve_vec(&self, vals: &[[f64; D]]) -> Vec<[f64; D]> {
        let n = self.grid.num_cells();
        assert_eq!(vals.len(), n);
        let mut out = vec![[0.0; D]; n];
        for (c, o) in out.iter_mut().enumerate() {
            let mut s = [0.0; D];
            for (cp, v) in vals.iter().enumerate() {
                let w = self.values[self.grid.offset_index(c, cp)];
                for a in 0..D {
                    s[a] += w * v[a];
                }
            }
            *o = s;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_kernel_at_beta_zero() {
        let k = CommKernel::new(1.0, 0.0).unwrap();
        assert_eq!(k.eval_at_distance(0.37), 1.0);
        assert_eq!(k.kernel_min(1), 1.0);
    }

    #[test]
    fn half_distance_value() {
        let k = CommKernel::new(1.0, 1.0).unwrap();
        assert!((k.eval_at_distance(0.5) - 0.8).abs() < 1e-15);
        assert!((k.kernel_min(1) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn lambda_scales_the_peak() {
        let k = CommKernel::new(2.0, 0.5).unwrap();
        assert_eq!(k.eval_at_distance(0.0), 2.0);
    }

    #[test]
    fn kernel_min_two_dimensional() {
        let k = CommKernel::new(1.0, 2.0).unwrap();
        // (1 + 2/4)^-2 = 4/9
        assert!((k.kernel_min(2) - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(CommKernel::new(0.0, 1.0).is_err());
        assert!(CommKernel::new(-1.0, 1.0).is_err());
        assert!(CommKernel::new(1.0, -0.5).is_err());
        assert!(CommKernel::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn table_matches_direct_evaluation() {
        let k = CommKernel::new(1.3, 1.7).unwrap();
        let g: Grid<2> = Grid::new(8).unwrap();
        let t = KernelTable::new(&k, &g);
        for a in [0usize, 3, 17, 63] {
            for b in [0usize, 5, 40, 63] {
                let direct = k.eval(&g.cell_center(a), &g.cell_center(b));
                assert!((t.between(a, b) - direct).abs() < 1e-12);
                assert!((t.between(a, b) - t.between(b, a)).abs() < 1e-15);
            }
        }
    }

    proptest! {
        #[test]
        fn bounded_below_by_kernel_min(x in 0.0..1.0f64, y in 0.0..1.0f64,
                                       lambda in 0.1..5.0f64, beta in 0.0..3.0f64) {
            let k = CommKernel::new(lambda, beta).unwrap();
            let a = crate::domain::TorusPoint([x, y]);
            let b = crate::domain::TorusPoint([y, x]);
            prop_assert!(k.eval(&a, &b) >= k.kernel_min(2) - 1e-12);
            prop_assert!(k.eval(&a, &b) <= lambda + 1e-12);
            // symmetry
            prop_assert!((k.eval(&a, &b) - k.eval(&b, &a)).abs() < 1e-15);
        }
    }
}

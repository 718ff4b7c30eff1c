//! Uniform periodic grids and grid-based fluid states `(rho, u)`.

use super::profile::FourierProfile;
use super::torus::TorusPoint;
use crate::error::{Error, Result};
use crate::vecmath;

/// Uniform grid with `g` cells per axis on the unit torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid<const D: usize> {
    g: usize,
}

impl<const D: usize> Grid<D> {
    pub fn new(cells_per_axis: usize) -> Result<Self> {
        if cells_per_axis < 2 {
            return Err(Error::InvalidConfig(format!(
                "grid needs at least 2 cells per axis, got {cells_per_axis}"
            )));
        }
        Ok(Grid { g: cells_per_axis })
    }

    pub fn cells_per_axis(&self) -> usize {
        self.g
    }

    pub fn num_cells(&self) -> usize {
        self.g.pow(D as u32)
    }

    pub fn cell_width(&self) -> f64 {
        1.0 / self.g as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_width().powi(D as i32)
    }

    /// Multi-index of a linear cell index (axis 0 fastest).
    pub fn decode(&self, mut idx: usize) -> [usize; D] {
        let mut m = [0usize; D];
        for a in 0..D {
            m[a] = idx % self.g;
            idx /= self.g;
        }
        m
    }

    pub fn encode(&self, m: [usize; D]) -> usize {
        let mut idx = 0usize;
        for a in (0..D).rev() {
            idx = idx * self.g + m[a];
        }
        idx
    }

    /// Cell containing a point.
    pub fn cell_of(&self, p: &TorusPoint<D>) -> usize {
        let mut m = [0usize; D];
        for a in 0..D {
            // p in [0,1) so the product is < g up to rounding; clamp the edge.
            m[a] = ((p.0[a] * self.g as f64) as usize).min(self.g - 1);
        }
        self.encode(m)
    }

    pub fn cell_center(&self, idx: usize) -> TorusPoint<D> {
        let m = self.decode(idx);
        let mut c = [0.0; D];
        for a in 0..D {
            c[a] = (m[a] as f64 + 0.5) * self.cell_width();
        }
        TorusPoint(c)
    }

    /// Linear index of the componentwise offset `(a - b) mod g`.
    pub fn offset_index(&self, a: usize, b: usize) -> usize {
        let ma = self.decode(a);
        let mb = self.decode(b);
        let mut m = [0usize; D];
        for i in 0..D {
            m[i] = (ma[i] + self.g - mb[i]) % self.g;
        }
        self.encode(m)
    }

    /// Periodic multilinear interpolation of a scalar field given at cell centers.
    pub fn interp_scalar(&self, field: &[f64], x: &TorusPoint<D>) -> f64 {
        debug_assert_eq!(field.len(), self.num_cells());
        let (base, frac) = self.interp_anchor(x);
        let mut acc = 0.0;
        for corner in 0..(1usize << D) {
            let (idx, w) = self.corner(base, frac, corner);
            acc += w * field[idx];
        }
        acc
    }

    /// Periodic multilinear interpolation of a vector field.
    pub fn interp_vector(&self, field: &[[f64; D]], x: &TorusPoint<D>) -> [f64; D] {
        debug_assert_eq!(field.len(), self.num_cells());
        let (base, frac) = self.interp_anchor(x);
        let mut acc = [0.0; D];
        for corner in 0..(1usize << D) {
            let (idx, w) = self.corner(base, frac, corner);
            for a in 0..D {
                acc[a] += w * field[idx][a];
            }
        }
        acc
    }

    fn interp_anchor(&self, x: &TorusPoint<D>) -> ([usize; D], [f64; D]) {
        let mut base = [0usize; D];
        let mut frac = [0.0; D];
        for a in 0..D {
            let t = x.0[a] * self.g as f64 - 0.5;
            let f = t.floor();
            base[a] = (f.rem_euclid(self.g as f64)) as usize % self.g;
            frac[a] = t - f;
        }
        (base, frac)
    }

    fn corner(&self, base: [usize; D], frac: [f64; D], corner: usize) -> (usize, f64) {
        let mut m = [0usize; D];
        let mut w = 1.0;
        for a in 0..D {
            if corner >> a & 1 == 1 {
                m[a] = (base[a] + 1) % self.g;
                w *= frac[a];
            } else {
                m[a] = base[a];
                w *= 1.0 - frac[a];
            }
        }
        (self.encode(m), w)
    }
}

/// Density and velocity on a grid; the discrete state of the limiting fluid.
#[derive(Clone, Debug)]
pub struct FluidState<const D: usize> {
    pub grid: Grid<D>,
    /// Cell-centered density values; `sum rho * cell_volume = 1`.
    pub rho: Vec<f64>,
    pub u: Vec<[f64; D]>,
}

impl<const D: usize> FluidState<D> {
    pub fn new(grid: Grid<D>, rho: Vec<f64>, u: Vec<[f64; D]>) -> Result<Self> {
        if rho.len() != grid.num_cells() || u.len() != grid.num_cells() {
            return Err(Error::GridMismatch(rho.len(), grid.num_cells()));
        }
        Ok(FluidState { grid, rho, u })
    }

    /// Sample density and velocity profiles at cell centers; density is
    /// normalized to unit mass and checked positive.
    pub fn from_profiles(
        grid: Grid<D>,
        rho0: &FourierProfile<D>,
        u0: &[FourierProfile<D>; D],
    ) -> Result<Self> {
        let n = grid.num_cells();
        let mut rho = Vec::with_capacity(n);
        let mut u = Vec::with_capacity(n);
        for c in 0..n {
            let x = grid.cell_center(c);
            let r = rho0.eval(&x.coords());
            if !(r > 0.0) {
                return Err(Error::InvalidProfile(format!(
                    "density profile non-positive ({r}) at cell {c}"
                )));
            }
            rho.push(r);
            let mut v = [0.0; D];
            for a in 0..D {
                v[a] = u0[a].eval(&x.coords());
            }
            u.push(v);
        }
        let mass: f64 = rho.iter().sum::<f64>() * grid.cell_volume();
        for r in rho.iter_mut() {
            *r /= mass;
        }
        Ok(FluidState { grid, rho, u })
    }

    pub fn mass(&self) -> f64 {
        self.rho.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn momentum(&self) -> [f64; D] {
        let vol = self.grid.cell_volume();
        let mut m = [0.0; D];
        for (r, v) in self.rho.iter().zip(&self.u) {
            for a in 0..D {
                m[a] += r * v[a] * vol;
            }
        }
        m
    }

    /// Kinetic energy `1/2 int rho |u|^2`.
    pub fn energy(&self) -> f64 {
        let vol = self.grid.cell_volume();
        self.rho
            .iter()
            .zip(&self.u)
            .map(|(r, v)| 0.5 * r * vecmath::norm_sq(*v) * vol)
            .sum()
    }
}

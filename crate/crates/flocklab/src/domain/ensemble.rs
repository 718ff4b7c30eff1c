//! Weighted particle ensembles approximating a kinetic distribution.

use super::torus::TorusPoint;
use crate::error::{Error, Result};
use crate::vecmath;

/// Positions, velocities and positive weights of `N` particles.
///
/// Weights sum to one and never change during a run; mass conservation is
/// therefore exact by construction.
#[derive(Clone, Debug)]
pub struct ParticleEnsemble<const D: usize> {
    pub positions: Vec<TorusPoint<D>>,
    pub velocities: Vec<[f64; D]>,
    pub weights: Vec<f64>,
}

impl<const D: usize> ParticleEnsemble<D> {
    pub fn new(
        positions: Vec<TorusPoint<D>>,
        velocities: Vec<[f64; D]>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        if positions.len() != velocities.len() || positions.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: positions.len(),
                got: velocities.len().min(weights.len()),
            });
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidConfig("weights must be positive".into()));
        }
        Ok(ParticleEnsemble { positions, velocities, weights })
    }

    /// Uniform-weight ensemble.
    pub fn with_uniform_weights(
        positions: Vec<TorusPoint<D>>,
        velocities: Vec<[f64; D]>,
    ) -> Result<Self> {
        let n = positions.len();
        if n == 0 {
            return Err(Error::EmptyEnsemble);
        }
        let w = vec![1.0 / n as f64; n];
        Self::new(positions, velocities, w)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn total_momentum(&self) -> [f64; D] {
        let mut m = [0.0; D];
        for (w, v) in self.weights.iter().zip(&self.velocities) {
            for a in 0..D {
                m[a] += w * v[a];
            }
        }
        m
    }

    /// Kinetic energy `1/2 sum w_i |v_i|^2`.
    pub fn kinetic_energy(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.velocities)
            .map(|(w, v)| 0.5 * w * vecmath::norm_sq(*v))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_weights_sum_to_one() {
        let pos = vec![TorusPoint([0.1]), TorusPoint([0.5]), TorusPoint([0.9])];
        let vel = vec![[1.0], [0.0], [-1.0]];
        let e = ParticleEnsemble::with_uniform_weights(pos, vel).unwrap();
        assert!((e.total_mass() - 1.0).abs() < 1e-15);
        assert!(e.total_momentum()[0].abs() < 1e-15);
    }

    #[test]
    fn energy_of_two_particles() {
        let e = ParticleEnsemble::new(
            vec![TorusPoint([0.2]), TorusPoint([0.8])],
            vec![[1.0], [3.0]],
            vec![0.5, 0.5],
        )
        .unwrap();
        assert!((e.kinetic_energy() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let r = ParticleEnsemble::new(
            vec![TorusPoint([0.2])],
            vec![[1.0], [2.0]],
            vec![1.0],
        );
        assert!(r.is_err());
        assert!(ParticleEnsemble::<1>::new(vec![], vec![], vec![]).is_err());
    }
}

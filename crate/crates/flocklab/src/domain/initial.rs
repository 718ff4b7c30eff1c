//! Well-prepared initial ensembles: positions sampled from a density profile,
//! velocities Gaussian around a velocity profile with variance `epsilon`.
//!
//! Randomness is keyed by `(seed, particle index)` through a counter-based
//! construction, so sampling is reproducible regardless of iteration order or
//! thread count.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::ensemble::ParticleEnsemble;
use super::profile::FourierProfile;
use super::torus::TorusPoint;
use crate::error::{Error, Result};

/// Everything needed to build a well-prepared ensemble.
#[derive(Clone, Debug)]
pub struct InitialDataSpec<const D: usize> {
    pub rho0: FourierProfile<D>,
    pub u0: [FourierProfile<D>; D],
    /// Scale parameter: per-axis velocity variance around `u0`.
    pub epsilon: f64,
    pub particle_count: usize,
    pub seed: u64,
}

impl<const D: usize> InitialDataSpec<D> {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.particle_count == 0 {
            return Err(Error::EmptyEnsemble);
        }
        self.rho0.require_positive()
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Independent stream for one particle, derived from `(seed, index)`.
pub fn particle_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut s = seed ^ index.wrapping_mul(0xd1342543de82ef95).wrapping_add(0x2545f4914f6cdd1d);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Exact rejection sampling from the (unnormalized) density shape.
fn sample_position<const D: usize>(
    rho0: &FourierProfile<D>,
    bound: f64,
    rng: &mut ChaCha8Rng,
) -> TorusPoint<D> {
    loop {
        let mut x = [0.0; D];
        for c in x.iter_mut() {
            *c = rng.gen::<f64>();
        }
        let height = rng.gen::<f64>() * bound;
        if height <= rho0.eval(&x) {
            return TorusPoint::new(x);
        }
    }
}

fn build<const D: usize>(
    spec: &InitialDataSpec<D>,
    mono_kinetic: bool,
) -> Result<ParticleEnsemble<D>> {
    spec.validate()?;
    let bound = spec.rho0.sup_bound();
    let sqrt_eps = spec.epsilon.sqrt();
    let pairs: Vec<(TorusPoint<D>, [f64; D])> = (0..spec.particle_count)
        .into_par_iter()
        .map(|i| {
            let mut rng = particle_rng(spec.seed, i as u64);
            let x = sample_position(&spec.rho0, bound, &mut rng);
            let mut v = [0.0; D];
            for a in 0..D {
                v[a] = spec.u0[a].eval(&x.coords());
                if !mono_kinetic {
                    let g: f64 = rng.sample(StandardNormal);
                    v[a] += sqrt_eps * g;
                }
            }
            (x, v)
        })
        .collect();
    let (positions, velocities) = pairs.into_iter().unzip();
    ParticleEnsemble::with_uniform_weights(positions, velocities)
}

/// Positions from `rho0`, velocities `u0(x) + sqrt(epsilon) * N(0, I)`.
pub fn build_initial_ensemble<const D: usize>(
    spec: &InitialDataSpec<D>,
) -> Result<ParticleEnsemble<D>> {
    build(spec, false)
}

/// Positions from `rho0`, velocities exactly `u0(x)`.
pub fn build_monokinetic_ensemble<const D: usize>(
    spec: &InitialDataSpec<D>,
) -> Result<ParticleEnsemble<D>> {
    build(spec, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::grid::Grid;
    use crate::domain::profile::FourierMode;

    fn spec_1d(epsilon: f64, n: usize, seed: u64) -> InitialDataSpec<1> {
        InitialDataSpec {
            rho0: FourierProfile::new(1.0, vec![FourierMode { k: [1], cos: 0.2, sin: 0.0 }])
                .unwrap(),
            u0: [FourierProfile::new(0.0, vec![FourierMode { k: [1], cos: 0.0, sin: 0.1 }])
                .unwrap()],
            epsilon,
            particle_count: n,
            seed,
        }
    }

    #[test]
    fn weights_are_uniform_and_sum_to_one() {
        let e = build_initial_ensemble(&spec_1d(0.1, 1000, 7)).unwrap();
        assert_eq!(e.len(), 1000);
        assert!((e.total_mass() - 1.0).abs() < 1e-12);
        assert!(e.weights.iter().all(|w| (*w - 1e-3).abs() < 1e-18));
    }

    #[test]
    fn fixed_seed_reproduces_exactly() {
        let a = build_initial_ensemble(&spec_1d(0.05, 16, 42)).unwrap();
        let b = build_initial_ensemble(&spec_1d(0.05, 16, 42)).unwrap();
        for i in 0..16 {
            assert_eq!(a.positions[i].0, b.positions[i].0);
            assert_eq!(a.velocities[i], b.velocities[i]);
        }
        let c = build_initial_ensemble(&spec_1d(0.05, 16, 43)).unwrap();
        assert!(a.positions.iter().zip(&c.positions).any(|(p, q)| p.0 != q.0));
    }

    #[test]
    fn vanishing_epsilon_freezes_speeds_and_flattens_density() {
        let spec = InitialDataSpec::<1> {
            rho0: FourierProfile::constant(1.0),
            u0: [FourierProfile::constant(0.0)],
            epsilon: 1e-12,
            particle_count: 20_000,
            seed: 3,
        };
        let e = build_initial_ensemble(&spec).unwrap();
        let vmax = e.velocities.iter().map(|v| v[0].abs()).fold(0.0, f64::max);
        assert!(vmax < 1e-4, "vmax = {vmax}");

        // empirical density close to uniform: L1 gap at the CLT scale
        let g: Grid<1> = Grid::new(16).unwrap();
        let mut mass = vec![0.0; g.num_cells()];
        for (p, w) in e.positions.iter().zip(&e.weights) {
            mass[g.cell_of(p)] += w;
        }
        let l1: f64 = mass.iter().map(|m| (m - 1.0 / 16.0).abs()).sum();
        assert!(l1 < 4.0 * (16.0f64 / 20_000.0).sqrt(), "l1 = {l1}");
    }

    #[test]
    fn mean_velocity_near_profile_constant() {
        let spec = InitialDataSpec::<1> {
            rho0: FourierProfile::constant(1.0),
            u0: [FourierProfile::constant(0.3)],
            epsilon: 0.04,
            particle_count: 50_000,
            seed: 11,
        };
        let e = build_initial_ensemble(&spec).unwrap();
        let mean = e.total_momentum()[0];
        // CLT: std of the mean is sqrt(eps / N)
        let tol = 5.0 * (0.04f64 / 50_000.0).sqrt();
        assert!((mean - 0.3).abs() < tol, "mean = {mean}");
    }

    #[test]
    fn monokinetic_matches_profile_exactly() {
        let spec = spec_1d(0.1, 500, 9);
        let e = build_monokinetic_ensemble(&spec).unwrap();
        for (p, v) in e.positions.iter().zip(&e.velocities) {
            let want = spec.u0[0].eval(&p.coords());
            assert_eq!(v[0], want);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(build_initial_ensemble(&spec_1d(0.0, 10, 1)).is_err());
        assert!(build_initial_ensemble(&spec_1d(0.1, 0, 1)).is_err());
    }

    #[test]
    fn two_dimensional_sampling_runs() {
        let spec = InitialDataSpec::<2> {
            rho0: FourierProfile::new(
                1.0,
                vec![FourierMode { k: [1, 0], cos: 0.1, sin: 0.0 }],
            )
            .unwrap(),
            u0: [FourierProfile::constant(0.1), FourierProfile::constant(-0.1)],
            epsilon: 0.01,
            particle_count: 2000,
            seed: 5,
        };
        let e = build_initial_ensemble(&spec).unwrap();
        assert_eq!(e.len(), 2000);
        let m = e.total_momentum();
        assert!((m[0] - 0.1).abs() < 0.02 && (m[1] + 0.1).abs() < 0.02);
    }
}

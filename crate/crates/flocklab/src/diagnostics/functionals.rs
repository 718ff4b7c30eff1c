//! Entropy, dissipation and flocking functionals of a kinetic state.
//!
//! All reductions follow the chunked, order-fixed summation pattern of the
//! moment binning code, so every value here is bit-identical for any rayon
//! thread count.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rayon::prelude::*;

use crate::domain::{CommKernel, ParticleEnsemble};
use crate::error::{Error, Result};
use crate::kinetic::{assign_cells, MomentSet, CHUNK};
use crate::vecmath::{dist_sq, norm_sq};

/// Largest ensemble the O(N^2) pairwise dissipation sum will accept.
pub const D2_BRUTE_FORCE_CAP: usize = 20_000;

/// Kinetic entropy `F = sum_i w_i |v_i|^2 / 2`.
pub fn kinetic_entropy<const D: usize>(ensemble: &ParticleEnsemble<D>) -> f64 {
    let partials: Vec<f64> = ensemble
        .weights
        .par_chunks(CHUNK)
        .zip(ensemble.velocities.par_chunks(CHUNK))
        .map(|(ws, vs)| {
            ws.iter()
                .zip(vs)
                .map(|(w, v)| 0.5 * w * norm_sq(*v))
                .sum::<f64>()
        })
        .collect();
    partials.iter().sum()
}

/// Local alignment dissipation `D1 = sum_i w_i |u(cell(x_i)) - v_i|^2`,
/// measured against the bulk velocity of the cell each particle sits in.
pub fn dissipation_d1<const D: usize>(
    ensemble: &ParticleEnsemble<D>,
    moments: &MomentSet<D>,
) -> f64 {
    let cells = assign_cells(ensemble, &moments.grid);
    let partials: Vec<f64> = ensemble
        .weights
        .par_chunks(CHUNK)
        .zip(ensemble.velocities.par_chunks(CHUNK))
        .zip(cells.par_chunks(CHUNK))
        .map(|((ws, vs), cs)| {
            ws.iter()
                .zip(vs)
                .zip(cs)
                .map(|((w, v), c)| w * dist_sq(moments.u[*c as usize], *v))
                .sum::<f64>()
        })
        .collect();
    partials.iter().sum()
}

/// Pairwise communication dissipation
/// `D2 = 1/2 sum_{i,j} w_i w_j psi(x_i - x_j) |v_i - v_j|^2`
/// by the direct O(N^2) double sum.
///
/// Refuses ensembles larger than [`D2_BRUTE_FORCE_CAP`]; use
/// [`dissipation_d2_sampled`] beyond that.
pub fn dissipation_d2<const D: usize>(
    ensemble: &ParticleEnsemble<D>,
    kernel: &CommKernel,
) -> Result<f64> {
    let n = ensemble.len();
    if n > D2_BRUTE_FORCE_CAP {
        return Err(Error::SizeCap {
            size: n,
            cap: D2_BRUTE_FORCE_CAP,
        });
    }
    let idx: Vec<usize> = (0..n).collect();
    let partials: Vec<f64> = idx
        .par_chunks(CHUNK.min(256))
        .map(|is| {
            let mut acc = 0.0;
            for &i in is {
                let xi = &ensemble.positions[i];
                let vi = ensemble.velocities[i];
                let wi = ensemble.weights[i];
                let mut row = 0.0;
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    row += ensemble.weights[j]
                        * kernel.eval(xi, &ensemble.positions[j])
                        * dist_sq(vi, ensemble.velocities[j]);
                }
                acc += wi * row;
            }
            acc
        })
        .collect();
    Ok(0.5 * partials.iter().sum::<f64>())
}

/// Monte-Carlo estimate of a pairwise sum together with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct SampledEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Unbiased sampled estimator of `D2` for ensembles too large for the direct
/// sum.  Draws `samples` independent particle pairs from the weight
/// distribution and averages `M^2/2 * psi |v_i - v_j|^2` (with `M` the total
/// mass), so the expectation equals the full double sum including the zero
/// diagonal.  Sampling is serial and fully determined by the caller's RNG.
pub fn dissipation_d2_sampled<const D: usize>(
    ensemble: &ParticleEnsemble<D>,
    kernel: &CommKernel,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<SampledEstimate> {
    if samples < 2 {
        return Err(Error::InvalidConfig(
            "pair sampling needs at least two samples".into(),
        ));
    }
    let dist = WeightedIndex::new(ensemble.weights.iter().copied())
        .map_err(|e| Error::InvalidConfig(format!("weight distribution: {e}")))?;
    let mass = ensemble.total_mass();
    let scale = 0.5 * mass * mass;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let i = dist.sample(rng);
        let j = dist.sample(rng);
        let x = scale
            * kernel.eval(&ensemble.positions[i], &ensemble.positions[j])
            * dist_sq(ensemble.velocities[i], ensemble.velocities[j]);
        sum += x;
        sum_sq += x * x;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(SampledEstimate {
        value: mean,
        std_error: (var / n).sqrt(),
        samples,
    })
}

/// Hydrodynamic communication dissipation
/// `D2~ = 1/2 sum_{c,c'} m_c m_c' psi(x_c - x_c') |u_c - u_c'|^2`
/// over occupied cell pairs, with cell masses `m_c = rho_c * vol`.
pub fn dissipation_d2_tilde<const D: usize>(moments: &MomentSet<D>, kernel: &CommKernel) -> f64 {
    let masses = moments.cell_masses();
    let occupied: Vec<usize> = (0..masses.len()).filter(|c| moments.occupied[*c]).collect();
    let partials: Vec<f64> = occupied
        .par_chunks(64)
        .map(|cs| {
            let mut acc = 0.0;
            for &c in cs {
                let xc = moments.grid.cell_center(c);
                let uc = moments.u[c];
                let mut row = 0.0;
                for &cp in &occupied {
                    row += masses[cp]
                        * kernel.eval(&xc, &moments.grid.cell_center(cp))
                        * dist_sq(uc, moments.u[cp]);
                }
                acc += masses[c] * row;
            }
            acc
        })
        .collect();
    0.5 * partials.iter().sum::<f64>()
}

/// The two flocking functionals and their combination.
#[derive(Debug, Clone, Copy)]
pub struct FlockingFunctionals {
    /// Local alignment energy (coincides with `D1`).
    pub e1: f64,
    /// Spread of the bulk velocities, `sum_{c,c'} m_c m_c' |u_c - u_c'|^2`.
    pub e2: f64,
    /// Combined functional `E = E1 + E2/2`.
    pub total: f64,
    /// Guaranteed decay rate `2 min(1, psi_min)` of `E` for unit total mass.
    pub decay_rate: f64,
}

/// Evaluates `E1`, `E2` and `E = E1 + E2/2` for a kinetic state, along with
/// the decay rate promised by the minimum communication weight.
pub fn flocking_functionals<const D: usize>(
    ensemble: &ParticleEnsemble<D>,
    moments: &MomentSet<D>,
    kernel: &CommKernel,
) -> FlockingFunctionals {
    let e1 = dissipation_d1(ensemble, moments);
    let masses = moments.cell_masses();
    let occupied: Vec<usize> = (0..masses.len()).filter(|c| moments.occupied[*c]).collect();
    let partials: Vec<f64> = occupied
        .par_chunks(64)
        .map(|cs| {
            let mut acc = 0.0;
            for &c in cs {
                let uc = moments.u[c];
                let mut row = 0.0;
                for &cp in &occupied {
                    row += masses[cp] * dist_sq(uc, moments.u[cp]);
                }
                acc += masses[c] * row;
            }
            acc
        })
        .collect();
    let e2: f64 = partials.iter().sum();
    FlockingFunctionals {
        e1,
        e2,
        total: e1 + 0.5 * e2,
        decay_rate: 2.0 * kernel.kernel_min(D).min(1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Grid, TorusPoint};
    use crate::kinetic::local_moments;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn random_ensemble(n: usize, seed: u64, vel_scale: f64) -> ParticleEnsemble<1> {
        let mut rng = StdRng::seed_from_u64(seed);
        let positions: Vec<TorusPoint<1>> =
            (0..n).map(|_| TorusPoint::new([rng.gen::<f64>()])).collect();
        let velocities: Vec<[f64; 1]> = (0..n)
            .map(|_| [vel_scale * (rng.gen::<f64>() - 0.5) * 2.0])
            .collect();
        ParticleEnsemble::with_uniform_weights(positions, velocities).unwrap()
    }

    #[test]
    fn entropy_of_simple_states() {
        let still = ParticleEnsemble::<1>::with_uniform_weights(
            vec![TorusPoint::new([0.1]), TorusPoint::new([0.7])],
            vec![[0.0], [0.0]],
        )
        .unwrap();
        assert_eq!(kinetic_entropy(&still), 0.0);

        let single = ParticleEnsemble::<2>::new(
            vec![TorusPoint::new([0.5, 0.5])],
            vec![[2.0, 0.0]],
            vec![1.0],
        )
        .unwrap();
        assert_eq!(kinetic_entropy(&single), 2.0);

        let pair = ParticleEnsemble::<1>::new(
            vec![TorusPoint::new([0.2]), TorusPoint::new([0.8])],
            vec![[1.0], [3.0]],
            vec![0.5, 0.5],
        )
        .unwrap();
        assert!((kinetic_entropy(&pair) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn d1_vanishes_for_monokinetic_data_and_matches_the_two_particle_case() {
        let grid = Grid::<1>::new(4).unwrap();
        let mono = ParticleEnsemble::<1>::with_uniform_weights(
            vec![TorusPoint::new([0.1]), TorusPoint::new([0.11])],
            vec![[0.7], [0.7]],
        )
        .unwrap();
        let m = local_moments(&mono, &grid);
        assert!(dissipation_d1(&mono, &m).abs() < 1e-15);

        let split = ParticleEnsemble::<1>::new(
            vec![TorusPoint::new([0.1]), TorusPoint::new([0.1])],
            vec![[1.0], [-1.0]],
            vec![0.5, 0.5],
        )
        .unwrap();
        let m = local_moments(&split, &grid);
        assert!((dissipation_d1(&split, &m) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn d1_equals_the_stress_trace() {
        use crate::kinetic::stress_tensor;
        use crate::vecmath::trace;
        let e = random_ensemble(4000, 9, 1.0);
        let grid = Grid::<1>::new(16).unwrap();
        let m = local_moments(&e, &grid);
        let stress = stress_tensor(&e, &m);
        let total: f64 = stress.iter().map(|s| trace(*s)).sum();
        let d1 = dissipation_d1(&e, &m);
        assert!(
            (d1 - total).abs() < 1e-12 * (1.0 + d1),
            "d1 {d1} vs stress trace {total}"
        );
    }

    #[test]
    fn d2_of_simple_states() {
        let constant = CommKernel::new(1.0, 0.0).unwrap();
        let aligned = ParticleEnsemble::<1>::with_uniform_weights(
            vec![TorusPoint::new([0.2]), TorusPoint::new([0.9])],
            vec![[0.3], [0.3]],
        )
        .unwrap();
        assert_eq!(dissipation_d2(&aligned, &constant).unwrap(), 0.0);

        let pair = ParticleEnsemble::<1>::new(
            vec![TorusPoint::new([0.2]), TorusPoint::new([0.8])],
            vec![[1.0], [-1.0]],
            vec![0.5, 0.5],
        )
        .unwrap();
        assert!((dissipation_d2(&pair, &constant).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn d2_cap_is_enforced() {
        let e = random_ensemble(D2_BRUTE_FORCE_CAP + 1, 3, 1.0);
        let kernel = CommKernel::new(1.0, 1.0).unwrap();
        match dissipation_d2(&e, &kernel) {
            Err(Error::SizeCap { size, cap }) => {
                assert_eq!(size, D2_BRUTE_FORCE_CAP + 1);
                assert_eq!(cap, D2_BRUTE_FORCE_CAP);
            }
            other => panic!("expected a size-cap refusal, got {other:?}"),
        }
    }

    #[test]
    fn sampled_d2_agrees_with_the_direct_sum() {
        let e = random_ensemble(100, 11, 1.0);
        let kernel = CommKernel::new(1.0, 1.0).unwrap();
        let direct = dissipation_d2(&e, &kernel).unwrap();
        let mut rng = StdRng::seed_from_u64(77);
        let est = dissipation_d2_sampled(&e, &kernel, 20_000, &mut rng).unwrap();
        assert!(est.std_error > 0.0);
        assert!(
            (est.value - direct).abs() < 3.0 * est.std_error,
            "sampled {} +- {} vs direct {}",
            est.value,
            est.std_error,
            direct
        );
    }

    #[test]
    fn d2_tilde_of_simple_states() {
        let constant = CommKernel::new(1.0, 0.0).unwrap();
        let grid = Grid::<1>::new(4).unwrap();
        let uniform = ParticleEnsemble::<1>::with_uniform_weights(
            vec![TorusPoint::new([0.1]), TorusPoint::new([0.6])],
            vec![[0.4], [0.4]],
        )
        .unwrap();
        let m = local_moments(&uniform, &grid);
        assert_eq!(dissipation_d2_tilde(&m, &constant), 0.0);

        let split = ParticleEnsemble::<1>::new(
            vec![TorusPoint::new([0.1]), TorusPoint::new([0.6])],
            vec![[0.0], [2.0]],
            vec![0.5, 0.5],
        )
        .unwrap();
        let m = local_moments(&split, &grid);
        assert!((dissipation_d2_tilde(&m, &constant) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn d2_tilde_never_exceeds_d2_on_random_ensembles() {
        let kernel = CommKernel::new(1.0, 1.0).unwrap();
        let grid = Grid::<1>::new(16).unwrap();
        for seed in 0..500 {
            let n = 50 + (seed as usize * 7) % 950;
            let e = random_ensemble(n, 1000 + seed, 1.0);
            let m = local_moments(&e, &grid);
            let d2 = dissipation_d2(&e, &kernel).unwrap();
            let d2t = dissipation_d2_tilde(&m, &kernel);
            assert!(
                d2t <= d2 + 1e-10,
                "seed {seed}: binned dissipation {d2t} above particle dissipation {d2}"
            );
        }
    }

    #[test]
    fn flocking_functionals_of_simple_states() {
        let kernel = CommKernel::new(1.0, 0.0).unwrap();
        let grid = Grid::<1>::new(4).unwrap();
        let mono = ParticleEnsemble::<1>::with_uniform_weights(
            vec![TorusPoint::new([0.1]), TorusPoint::new([0.9])],
            vec![[0.5], [0.5]],
        )
        .unwrap();
        let m = local_moments(&mono, &grid);
        let f = flocking_functionals(&mono, &m, &kernel);
        assert!(f.e1.abs() < 1e-15 && f.e2.abs() < 1e-15 && f.total.abs() < 1e-15);
        assert!((f.decay_rate - 2.0).abs() < 1e-15);

        let split = ParticleEnsemble::<1>::new(
            vec![TorusPoint::new([0.1]), TorusPoint::new([0.6])],
            vec![[0.0], [2.0]],
            vec![0.5, 0.5],
        )
        .unwrap();
        let m = local_moments(&split, &grid);
        let f = flocking_functionals(&split, &m, &kernel);
        assert!(f.e1.abs() < 1e-15);
        assert!((f.e2 - 2.0).abs() < 1e-15);
        assert!((f.total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn e2_matches_its_binomial_expansion() {
        use crate::vecmath::{axpy, norm_sq};
        let kernel = CommKernel::new(1.0, 1.0).unwrap();
        let grid = Grid::<1>::new(32).unwrap();
        for seed in 0..20 {
            let e = random_ensemble(2000, 400 + seed, 1.0);
            let m = local_moments(&e, &grid);
            let f = flocking_functionals(&e, &m, &kernel);
            let masses = m.cell_masses();
            let total: f64 = masses.iter().sum();
            let mut mean = [0.0; 1];
            let mut second = 0.0;
            for c in 0..masses.len() {
                mean = axpy(mean, masses[c], m.u[c]);
                second += masses[c] * norm_sq(m.u[c]);
            }
            let expanded = 2.0 * (total * second - norm_sq(mean));
            assert!(
                (f.e2 - expanded).abs() < 1e-12 * (1.0 + f.e2),
                "seed {seed}: double sum {} vs expansion {expanded}",
                f.e2
            );
        }
    }
}

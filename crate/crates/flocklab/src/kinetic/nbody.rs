//! The microscopic Cucker-Smale system, integrated directly.  This is the
//! `O(N^2)` reference the mean-field consistency experiment compares the
//! binned kinetic solver against.

use rayon::prelude::*;

use crate::domain::{CommKernel, TorusPoint};
use crate::error::{Error, Result};
use crate::vecmath::{axpy, scale, sub};

/// Squared torus distance for raw coordinates that may have drifted slightly
/// outside the fundamental cell during a Runge-Kutta stage.
fn stage_distance_sq<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    let mut s = 0.0;
    for i in 0..D {
        let mut d = a[i] - b[i];
        d -= d.round();
        s += d * d;
    }
    s
}

/// One RK4 step of `dx_i/dt = v_i`, `dv_i/dt = (1/N) sum_j psi(x_j - x_i)(v_j - v_i)`.
///
/// Positions are unwrapped during the stages (stage offsets are far below the
/// torus diameter) and wrapped once at the end.  The pairwise forces are
/// antisymmetric, so total momentum is conserved to roundoff.
pub fn microscopic_cs_step<const D: usize>(
    positions: &mut [TorusPoint<D>],
    velocities: &mut [[f64; D]],
    kernel: &CommKernel,
    dt: f64,
) -> Result<()> {
    if !dt.is_finite() || !(dt > 0.0) {
        return Err(Error::BadTimeStep(dt));
    }
    let n = positions.len();
    if n == 0 {
        return Err(Error::EmptyEnsemble);
    }
    if velocities.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: velocities.len() });
    }

    let accel = |x: &[[f64; D]], v: &[[f64; D]]| -> Vec<[f64; D]> {
        let inv_n = 1.0 / n as f64;
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut a = [0.0; D];
                for j in 0..n {
                    let w = kernel.eval_at_distance(stage_distance_sq(&x[i], &x[j]).sqrt());
                    a = axpy(a, w, sub(v[j], v[i]));
                }
                scale(a, inv_n)
            })
            .collect()
    };
    let shifted = |base: &[[f64; D]], s: f64, k: &[[f64; D]]| -> Vec<[f64; D]> {
        base.iter().zip(k).map(|(b, ki)| axpy(*b, s, *ki)).collect()
    };

    let x0: Vec<[f64; D]> = positions.iter().map(|p| p.coords()).collect();
    let v0: Vec<[f64; D]> = velocities.to_vec();

    let kv1 = accel(&x0, &v0);
    let x1 = shifted(&x0, 0.5 * dt, &v0);
    let v1 = shifted(&v0, 0.5 * dt, &kv1);

    let kv2 = accel(&x1, &v1);
    let x2 = shifted(&x0, 0.5 * dt, &v1);
    let v2 = shifted(&v0, 0.5 * dt, &kv2);

    let kv3 = accel(&x2, &v2);
    let x3 = shifted(&x0, dt, &v2);
    let v3 = shifted(&v0, dt, &kv3);

    let kv4 = accel(&x3, &v3);

    let w = dt / 6.0;
    for i in 0..n {
        // dx/dt stages are the stage velocities v0, v1, v2, v3.
        let mut dx = v0[i];
        dx = axpy(dx, 2.0, v1[i]);
        dx = axpy(dx, 2.0, v2[i]);
        dx = crate::vecmath::add(dx, v3[i]);
        positions[i] = TorusPoint::new(axpy(x0[i], w, dx));

        let mut dv = kv1[i];
        dv = axpy(dv, 2.0, kv2[i]);
        dv = axpy(dv, 2.0, kv3[i]);
        dv = crate::vecmath::add(dv, kv4[i]);
        velocities[i] = axpy(v0[i], w, dv);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;

    fn random_system(n: usize, seed: u64) -> (Vec<TorusPoint<1>>, Vec<[f64; 1]>) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let pos = (0..n).map(|_| TorusPoint::new([rng.gen()])).collect();
        let vel = (0..n).map(|_| [rng.gen::<f64>() * 2.0 - 1.0]).collect();
        (pos, vel)
    }

    #[test]
    fn pair_gap_decays_exponentially_under_constant_kernel() {
        let mut pos = vec![TorusPoint::new([0.25]), TorusPoint::new([0.75])];
        let mut vel = [[0.5], [-0.5]];
        let kernel = CommKernel::new(1.0, 0.0).unwrap();
        let dt = 0.01;
        microscopic_cs_step(&mut pos, &mut vel, &kernel, dt).unwrap();
        let gap = vel[0][0] - vel[1][0];
        assert!((gap - (-dt).exp()).abs() < 1e-11, "gap = {gap}");
        assert!((vel[0][0] + vel[1][0]).abs() < 1e-15);
    }

    #[test]
    fn momentum_conserved_over_a_run() {
        let (mut pos, mut vel) = random_system(50, 21);
        let kernel = CommKernel::new(1.0, 1.0).unwrap();
        let p0: f64 = vel.iter().map(|v| v[0]).sum();
        let mut energy: f64 = vel.iter().map(|v| v[0] * v[0]).sum();
        for _ in 0..100 {
            microscopic_cs_step(&mut pos, &mut vel, &kernel, 0.01).unwrap();
            let p: f64 = vel.iter().map(|v| v[0]).sum();
            assert!((p - p0).abs() < 1e-12, "momentum drifted by {}", p - p0);
            let e_now: f64 = vel.iter().map(|v| v[0] * v[0]).sum();
            assert!(e_now <= energy + 1e-12);
            energy = e_now;
        }
    }

    #[test]
    fn halving_the_step_cuts_the_error_fourth_order() {
        // Keep the flock inside a small arc so no pair crosses the antipodal
        // distance, where the torus metric has a kink that would knock the
        // observed order down.
        let kernel = CommKernel::new(1.0, 1.0).unwrap();
        let run = |dt: f64, steps: usize| -> Vec<[f64; 1]> {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(22);
            let mut pos: Vec<TorusPoint<1>> = (0..10)
                .map(|_| TorusPoint::new([0.3 + 0.15 * rng.gen::<f64>()]))
                .collect();
            let mut vel: Vec<[f64; 1]> =
                (0..10).map(|_| [0.4 * (rng.gen::<f64>() - 0.5)]).collect();
            for _ in 0..steps {
                microscopic_cs_step(&mut pos, &mut vel, &kernel, dt).unwrap();
            }
            vel
        };
        let reference = run(0.0005, 400);
        let err = |v: &[[f64; 1]]| -> f64 {
            v.iter()
                .zip(&reference)
                .map(|(a, b)| (a[0] - b[0]).abs())
                .fold(0.0f64, f64::max)
        };
        let coarse = err(&run(0.02, 10));
        let fine = err(&run(0.01, 20));
        let ratio = coarse / fine;
        assert!(
            (10.0..26.0).contains(&ratio),
            "expected ~16x error drop, got {ratio} (coarse {coarse:.3e}, fine {fine:.3e})"
        );
    }

    #[test]
    fn rejects_degenerate_input() {
        let kernel = CommKernel::new(1.0, 1.0).unwrap();
        let mut pos: Vec<TorusPoint<1>> = vec![];
        let mut vel: Vec<[f64; 1]> = vec![];
        assert!(microscopic_cs_step(&mut pos, &mut vel, &kernel, 0.01).is_err());
        let mut pos = vec![TorusPoint::new([0.5])];
        let mut vel = vec![[0.0], [1.0]];
        assert!(microscopic_cs_step(&mut pos, &mut vel, &kernel, 0.01).is_err());
        let mut vel = vec![[0.0]];
        assert!(microscopic_cs_step(&mut pos, &mut vel, &kernel, -1.0).is_err());
    }
}

//! Exact Wasserstein-2 distance between atomic measures on the unit circle.
//!
//! Lift both quantile functions to the real line (`Q(t + 1) = Q(t) + 1`) and
//! minimize the quadratic quantile-coupling cost over the cyclic shift `m`:
//!
//! `C(m) = int_0^1 ( Q_mu(t) - Q_nu(t - m) )^2 dt`
//!
//! For atomic measures `C` is piecewise linear and convex in `m`, so a ternary
//! search brackets the minimizer and an exact sweep over the cumulative-weight
//! breakpoints inside the bracket finishes the job.

use super::AtomicMeasure;
use crate::error::Result;

struct SortedAtoms {
    x: Vec<f64>,
    /// Cumulative weights; `cum[n-1] == 1`.
    cum: Vec<f64>,
}

impl SortedAtoms {
    fn build(m: &AtomicMeasure<1>) -> Self {
        let mut order: Vec<usize> = (0..m.len()).collect();
        order.sort_by(|&a, &b| m.points[a].0[0].total_cmp(&m.points[b].0[0]));
        let x: Vec<f64> = order.iter().map(|&i| m.points[i].0[0]).collect();
        let mut cum = Vec::with_capacity(x.len());
        let mut acc = 0.0;
        for &i in &order {
            acc += m.weights[i];
            cum.push(acc.min(1.0));
        }
        *cum.last_mut().expect("non-empty measure") = 1.0;
        SortedAtoms { x, cum }
    }
}

/// One pass over the merged quantile segments.
fn shift_cost(mu: &SortedAtoms, nu: &SortedAtoms, m: f64) -> f64 {
    let n2 = nu.x.len();
    let mut i = 0usize; // mu piece: t in [cum[i-1], cum[i])
    // locate the nu piece containing s = -m
    let s0 = -m;
    let mut k = s0.floor();
    let mut r = s0 - k;
    if r >= 1.0 {
        k += 1.0;
        r = 0.0;
    }
    let mut j = nu.cum.partition_point(|c| *c <= r);
    if j == n2 {
        // r sat exactly on the last boundary
        j = 0;
        k += 1.0;
    }
    let mut t = 0.0;
    let mut cost = 0.0;
    while t < 1.0 {
        let mu_end = mu.cum[i];
        let nu_end = m + k + nu.cum[j];
        let t_next = mu_end.min(nu_end).min(1.0);
        if t_next > t {
            let d = mu.x[i] - (nu.x[j] + k);
            cost += d * d * (t_next - t);
            t = t_next;
        }
        if t >= 1.0 {
            break;
        }
        if mu_end <= t_next {
            i += 1;
            if i == mu.x.len() {
                break;
            }
        }
        if nu_end <= t_next {
            j += 1;
            if j == n2 {
                j = 0;
                k += 1.0;
            }
        }
    }
    cost
}

/// Exact W2 on the circle between two atomic measures.
pub fn w2_circle(mu: &AtomicMeasure<1>, nu: &AtomicMeasure<1>) -> Result<f64> {
    let a = SortedAtoms::build(mu);
    let b = SortedAtoms::build(nu);

    // convex, coercive in m; the optimum lies within one full turn
    let mut lo = -1.5;
    let mut hi = 1.5;
    for _ in 0..240 {
        if hi - lo < 1e-13 {
            break;
        }
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if shift_cost(&a, &b, m1) <= shift_cost(&a, &b, m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }

    // exact refinement: the minimum of a convex piecewise-linear function sits
    // on a breakpoint m = cum_mu[i] - k - cum_nu[j]; enumerate those inside
    // the bracket and keep the best value seen.
    let mid = 0.5 * (lo + hi);
    let slack = (hi - lo) + 1e-12;
    let mut best = shift_cost(&a, &b, mid).min(shift_cost(&a, &b, lo)).min(shift_cost(&a, &b, hi));
    let mut boundaries_mu: Vec<f64> = vec![0.0];
    boundaries_mu.extend_from_slice(&a.cum);
    for &am in &boundaries_mu {
        let target = am - mid;
        let k0 = target.floor();
        for dk in -1..=1i64 {
            let k = k0 + dk as f64;
            let r = target - k;
            // nu boundaries within `slack` of r
            let start = b.cum.partition_point(|c| *c < r - slack);
            for j in start..b.cum.len() {
                if b.cum[j] > r + slack {
                    break;
                }
                let cand = am - k - b.cum[j];
                if cand >= lo - 1e-12 && cand <= hi + 1e-12 {
                    best = best.min(shift_cost(&a, &b, cand));
                }
            }
        }
    }
    Ok(best.max(0.0).sqrt())
}

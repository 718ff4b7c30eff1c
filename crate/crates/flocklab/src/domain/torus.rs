//! Points on the flat unit torus `T^d` and the geodesic metric.

/// Wrap a coordinate into `[0, 1)`.
pub fn wrap(x: f64) -> f64 {
    let r = x - x.floor();
    // `x - floor(x)` can round up to exactly 1.0 for tiny negative inputs.
    if r >= 1.0 {
        r - 1.0
    } else {
        r
    }
}

/// A point on the unit torus; every coordinate lies in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusPoint<const D: usize>(pub [f64; D]);

impl<const D: usize> TorusPoint<D> {
    /// Build a point, wrapping each coordinate into the fundamental cell.
    pub fn new(coords: [f64; D]) -> Self {
        let mut c = coords;
        for x in c.iter_mut() {
            *x = wrap(*x);
        }
        TorusPoint(c)
    }

    pub fn coords(&self) -> [f64; D] {
        self.0
    }

    /// Translate by `delta` and wrap.
    pub fn translate(&self, delta: [f64; D]) -> Self {
        let mut c = self.0;
        for i in 0..D {
            c[i] = wrap(c[i] + delta[i]);
        }
        TorusPoint(c)
    }
}

/// Squared geodesic distance on the torus.
pub fn torus_distance_sq<const D: usize>(a: &TorusPoint<D>, b: &TorusPoint<D>) -> f64 {
    let mut s = 0.0;
    for i in 0..D {
        let d = (a.0[i] - b.0[i]).abs();
        let d = d.min(1.0 - d);
        s += d * d;
    }
    s
}

/// Geodesic distance; bounded by `sqrt(d)/2`.
pub fn torus_distance<const D: usize>(a: &TorusPoint<D>, b: &TorusPoint<D>) -> f64 {
    torus_distance_sq(a, b).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn antipodal_points_on_the_circle() {
        let a = TorusPoint([0.0]);
        let b = TorusPoint([0.5]);
        assert_eq!(torus_distance(&a, &b), 0.5);
    }

    #[test]
    fn wraparound_beats_the_long_way() {
        let a = TorusPoint([0.9]);
        let b = TorusPoint([0.1]);
        assert!((torus_distance(&a, &b) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn diameter_in_two_dimensions() {
        let a = TorusPoint([0.0, 0.0]);
        let b = TorusPoint([0.5, 0.5]);
        assert!((torus_distance(&a, &b) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn new_wraps_negative_and_large_coordinates() {
        let p = TorusPoint::new([-0.25, 1.75]);
        assert!((p.0[0] - 0.75).abs() < 1e-15);
        assert!((p.0[1] - 0.75).abs() < 1e-15);
        let q = TorusPoint::new([-1e-18]);
        assert!(q.0[0] >= 0.0 && q.0[0] < 1.0);
    }

    proptest! {
        #[test]
        fn triangle_inequality(ax in 0.0..1.0f64, ay in 0.0..1.0f64,
                               bx in 0.0..1.0f64, by in 0.0..1.0f64,
                               cx in 0.0..1.0f64, cy in 0.0..1.0f64) {
            let a = TorusPoint([ax, ay]);
            let b = TorusPoint([bx, by]);
            let c = TorusPoint([cx, cy]);
            let ab = torus_distance(&a, &b);
            let bc = torus_distance(&b, &c);
            let ac = torus_distance(&a, &c);
            prop_assert!(ac <= ab + bc + 1e-12);
            // symmetry and the diameter bound come along for free
            prop_assert!((ab - torus_distance(&b, &a)).abs() < 1e-15);
            prop_assert!(ac <= 2f64.sqrt() / 2.0 + 1e-15);
        }
    }
}

//! Tiny fixed-size vector helpers shared by the solvers.
//!
//! Velocities and forces are plain `[f64; D]`; these free functions keep the
//! inner loops readable without pulling in a linear-algebra dependency.

pub fn add<const D: usize>(a: [f64; D], b: [f64; D]) -> [f64; D] {
    let mut out = a;
    for i in 0..D {
        out[i] += b[i];
    }
    out
}

pub fn sub<const D: usize>(a: [f64; D], b: [f64; D]) -> [f64; D] {
    let mut out = a;
    for i in 0..D {
        out[i] -= b[i];
    }
    out
}

pub fn scale<const D: usize>(a: [f64; D], s: f64) -> [f64; D] {
    let mut out = a;
    for x in out.iter_mut() {
        *x *= s;
    }
    out
}

/// a / s componentwise.  Unlike `scale(a, 1.0 / s)` this rounds each quotient
/// once, so exact ratios (a bulk velocity over its own mass, say) stay exact.
pub fn div<const D: usize>(a: [f64; D], s: f64) -> [f64; D] {
    let mut out = a;
    for x in out.iter_mut() {
        *x /= s;
    }
    out
}

/// a + s*b
pub fn axpy<const D: usize>(a: [f64; D], s: f64, b: [f64; D]) -> [f64; D] {
    let mut out = a;
    for i in 0..D {
        out[i] += s * b[i];
    }
    out
}

pub fn dot<const D: usize>(a: [f64; D], b: [f64; D]) -> f64 {
    let mut s = 0.0;
    for i in 0..D {
        s += a[i] * b[i];
    }
    s
}

pub fn norm_sq<const D: usize>(a: [f64; D]) -> f64 {
    dot(a, a)
}

pub fn dist_sq<const D: usize>(a: [f64; D], b: [f64; D]) -> f64 {
    norm_sq(sub(a, b))
}

/// Outer product a b^T as a dense d x d matrix.
pub fn outer<const D: usize>(a: [f64; D], b: [f64; D]) -> [[f64; D]; D] {
    let mut m = [[0.0; D]; D];
    for i in 0..D {
        for j in 0..D {
            m[i][j] = a[i] * b[j];
        }
    }
    m
}

pub fn mat_add<const D: usize>(a: [[f64; D]; D], b: [[f64; D]; D]) -> [[f64; D]; D] {
    let mut m = a;
    for i in 0..D {
        for j in 0..D {
            m[i][j] += b[i][j];
        }
    }
    m
}

/// A + s*B entrywise.
pub fn mat_axpy<const D: usize>(a: [[f64; D]; D], s: f64, b: [[f64; D]; D]) -> [[f64; D]; D] {
    let mut m = a;
    for i in 0..D {
        for j in 0..D {
            m[i][j] += s * b[i][j];
        }
    }
    m
}

pub fn mat_scale<const D: usize>(a: [[f64; D]; D], s: f64) -> [[f64; D]; D] {
    let mut m = a;
    for row in m.iter_mut() {
        for x in row.iter_mut() {
            *x *= s;
        }
    }
    m
}

pub fn trace<const D: usize>(a: [[f64; D]; D]) -> f64 {
    (0..D).map(|i| a[i][i]).sum()
}

/// Frobenius inner product A:B.
pub fn mat_dot<const D: usize>(a: [[f64; D]; D], b: [[f64; D]; D]) -> f64 {
    let mut s = 0.0;
    for i in 0..D {
        for j in 0..D {
            s += a[i][j] * b[i][j];
        }
    }
    s
}

//! Truncated Fourier series used to describe initial density and velocity
//! profiles in configuration files.

use crate::error::{Error, Result};

/// One Fourier term `cos * cos(2 pi k.x) + sin * sin(2 pi k.x)`.
#[derive(Clone, Copy, Debug)]
pub struct FourierMode<const D: usize> {
    pub k: [i32; D],
    pub cos: f64,
    pub sin: f64,
}

/// `mean + sum of modes`; smooth and cheap to evaluate anywhere on the torus.
#[derive(Clone, Debug)]
pub struct FourierProfile<const D: usize> {
    pub mean: f64,
    pub modes: Vec<FourierMode<D>>,
}

impl<const D: usize> FourierProfile<D> {
    pub fn new(mean: f64, modes: Vec<FourierMode<D>>) -> Result<Self> {
        for m in &modes {
            if !m.cos.is_finite() || !m.sin.is_finite() {
                return Err(Error::InvalidProfile("non-finite mode amplitude".into()));
            }
        }
        if !mean.is_finite() {
            return Err(Error::InvalidProfile("non-finite mean".into()));
        }
        Ok(FourierProfile { mean, modes })
    }

    pub fn constant(mean: f64) -> Self {
        FourierProfile { mean, modes: Vec::new() }
    }

    pub fn eval(&self, x: &[f64; D]) -> f64 {
        let mut v = self.mean;
        for m in &self.modes {
            let mut phase = 0.0;
            for a in 0..D {
                phase += m.k[a] as f64 * x[a];
            }
            let t = std::f64::consts::TAU * phase;
            v += m.cos * t.cos() + m.sin * t.sin();
        }
        v
    }

    /// Rigorous upper bound: `mean + sum_k sqrt(cos^2 + sin^2)`.
    pub fn sup_bound(&self) -> f64 {
        self.mean + self.amplitude_sum()
    }

    /// Rigorous lower bound: `mean - sum_k sqrt(cos^2 + sin^2)`.
    pub fn inf_bound(&self) -> f64 {
        self.mean - self.amplitude_sum()
    }

    fn amplitude_sum(&self) -> f64 {
        self.modes.iter().map(|m| (m.cos * m.cos + m.sin * m.sin).sqrt()).sum()
    }

    /// Check positivity as a density shape. The cheap amplitude bound is used
    /// first; only profiles failing it are rejected.
    pub fn require_positive(&self) -> Result<()> {
        if self.inf_bound() > 0.0 {
            return Ok(());
        }
        Err(Error::InvalidProfile(format!(
            "density profile may reach {} <= 0; raise the mean or shrink the modes",
            self.inf_bound()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_profile() {
        let p: FourierProfile<1> = FourierProfile::constant(2.5);
        assert_eq!(p.eval(&[0.3]), 2.5);
        assert_eq!(p.sup_bound(), 2.5);
    }

    #[test]
    fn single_mode_values() {
        let p = FourierProfile::new(1.0, vec![FourierMode { k: [1], cos: 0.0, sin: 0.5 }]).unwrap();
        assert!((p.eval(&[0.25]) - 1.5).abs() < 1e-14);
        assert!((p.eval(&[0.75]) - 0.5).abs() < 1e-14);
        assert!((p.eval(&[0.0]) - 1.0).abs() < 1e-14);
        assert!((p.sup_bound() - 1.5).abs() < 1e-14);
        assert!((p.inf_bound() - 0.5).abs() < 1e-14);
        p.require_positive().unwrap();
    }

    #[test]
    fn two_dimensional_mode() {
        let p = FourierProfile::new(
            0.0,
            vec![FourierMode { k: [1, -2], cos: 1.0, sin: 0.0 }],
        )
        .unwrap();
        // cos(2 pi (x - 2y)) at (0.5, 0.25) -> cos(2 pi 0) = 1
        assert!((p.eval(&[0.5, 0.25]) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn positivity_guard() {
        let p = FourierProfile::new(1.0, vec![FourierMode { k: [2], cos: 0.9, sin: 0.9 }]).unwrap();
        assert!(p.require_positive().is_err());
    }
}

//! Experiment configuration: a TOML file with `domain`, `kinetic`, `euler`
//! and `experiment` sections.  Every field has a default; the checked-in
//! `configs/reference.toml` spells all of them out.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{CommKernel, FourierMode, FourierProfile};
use crate::error::{Error, Result};
use crate::kinetic::{AlignmentIntegrator, ConvolutionPath, KineticSettings};

/// One Fourier mode of an initial profile.  `k` must have one entry per
/// dimension; it stays untyped here and is shaped at dimension dispatch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModeConfig {
    pub k: Vec<i32>,
    pub cos: f64,
    pub sin: f64,
}

impl Default for ModeConfig {
    fn default() -> Self {
        ModeConfig { k: vec![1], cos: 0.0, sin: 0.0 }
    }
}

/// Geometry, communication kernel and initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainConfig {
    /// Spatial dimension (1 or 2).
    pub dim: usize,
    /// Cells per axis of the shared grid.
    pub grid: usize,
    /// Kernel strength `lambda` and decay exponent `beta`.
    pub lambda: f64,
    pub beta: f64,
    /// Initial density profile `rho0 = rho_mean + sum of modes` (normalized
    /// to unit mass when realized).
    pub rho_mean: f64,
    pub rho_modes: Vec<ModeConfig>,
    /// Initial velocity profile per component.
    pub u_mean: Vec<f64>,
    pub u_modes: Vec<Vec<ModeConfig>>,
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig {
            dim: 1,
            grid: 64,
            lambda: 1.0,
            beta: 1.0,
            rho_mean: 1.0,
            rho_modes: vec![ModeConfig { k: vec![1], cos: 0.2, sin: 0.0 }],
            u_mean: vec![0.0],
            u_modes: vec![vec![ModeConfig { k: vec![1], cos: 0.0, sin: 0.1 }]],
        }
    }
}

/// Particle solver parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KineticConfig {
    pub particles: usize,
    /// Relaxation scale; `inf` disables local alignment.
    pub epsilon: f64,
    pub dt: f64,
    /// `"rk4"` or `"exponential"`.
    pub integrator: String,
    /// `"direct"` or `"fft"` (one-dimensional grids only).
    pub convolution: String,
    /// Thermal spread coefficient: sampled velocities get an added normal
    /// deviation of standard deviation `vel_spread * sqrt(epsilon)`.
    pub vel_spread: f64,
}

impl Default for KineticConfig {
    fn default() -> Self {
        KineticConfig {
            particles: 100_000,
            epsilon: 0.1,
            dt: 1e-3,
            integrator: "rk4".into(),
            convolution: "direct".into(),
            vel_spread: 0.1,
        }
    }
}

/// Fluid solver parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EulerConfig {
    /// Refuse steps with `lipschitz * dt` at or above this product.
    pub safeguard: f64,
}

impl Default for EulerConfig {
    fn default() -> Self {
        EulerConfig { safeguard: 0.5 }
    }
}

/// Horizons, sampling cadence and output plumbing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    /// Final time of every run.
    pub horizon: f64,
    /// Steps between recorded snapshots.
    pub snapshot_every: usize,
    /// Relaxation scales for the sweep, strictly decreasing.
    pub epsilons: Vec<f64>,
    /// Time at which the sweep slope is fitted (clamped into the horizon the
    /// run actually reached).
    pub eval_time: f64,
    pub seed: u64,
    pub out_dir: String,
    /// Pair samples for the Monte-Carlo `D2` estimate in dense ledgers.
    pub d2_samples: usize,
    /// Audit pass threshold as a multiple of `F(0) + 1`.
    pub audit_tolerance_scale: f64,
    /// Decay-report envelope factor (`E(t) <= factor * E(0) e^{-rt}`).
    pub decay_envelope: f64,
    /// Random atomic pairs checked by the metric self-test.
    pub selftest_pairs: usize,
    /// Random smooth density pairs checked against the L1 bound.
    pub selftest_density_pairs: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            horizon: 0.5,
            snapshot_every: 50,
            epsilons: vec![0.2, 0.1, 0.05, 0.025],
            eval_time: 0.5,
            seed: 42,
            out_dir: "out".into(),
            d2_samples: 2000,
            audit_tolerance_scale: 0.05,
            decay_envelope: 1.05,
            selftest_pairs: 200,
            selftest_density_pairs: 100,
        }
    }
}

/// Full experiment configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainConfig,
    pub kinetic: KineticConfig,
    pub euler: EulerConfig,
    pub experiment: ExperimentSection,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let d = &self.domain;
        if d.dim != 1 && d.dim != 2 {
            return Err(Error::InvalidConfig(format!(
                "dim must be 1 or 2, got {}",
                d.dim
            )));
        }
        if d.grid < 2 {
            return Err(Error::InvalidConfig(format!(
                "grid needs at least 2 cells per axis, got {}",
                d.grid
            )));
        }
        CommKernel::new(d.lambda, d.beta)?;
        if d.u_mean.len() != d.dim || d.u_modes.len() != d.dim {
            return Err(Error::InvalidConfig(format!(
                "u_mean and u_modes need one entry per dimension ({}), got {} and {}",
                d.dim,
                d.u_mean.len(),
                d.u_modes.len()
            )));
        }
        for m in d.rho_modes.iter().chain(d.u_modes.iter().flatten()) {
            if m.k.len() != d.dim {
                return Err(Error::InvalidConfig(format!(
                    "mode wave vector {:?} does not have {} entries",
                    m.k, d.dim
                )));
            }
        }

        let k = &self.kinetic;
        if k.particles == 0 {
            return Err(Error::InvalidConfig("particles must be positive".into()));
        }
        if !(k.epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be positive (or inf), got {}",
                k.epsilon
            )));
        }
        if !(k.dt > 0.0) || !k.dt.is_finite() {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {}", k.dt)));
        }
        self.kinetic_settings()?;
        if !(k.vel_spread >= 0.0) || !k.vel_spread.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "vel_spread must be nonnegative, got {}",
                k.vel_spread
            )));
        }

        if !(self.euler.safeguard > 0.0) || !self.euler.safeguard.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "safeguard must be positive and finite, got {}",
                self.euler.safeguard
            )));
        }

        let e = &self.experiment;
        if !(e.horizon > 0.0) || !e.horizon.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "horizon must be positive, got {}",
                e.horizon
            )));
        }
        if e.snapshot_every == 0 {
            return Err(Error::InvalidConfig("snapshot_every must be positive".into()));
        }
        for eps in &e.epsilons {
            if !(*eps > 0.0) || !eps.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "sweep epsilon values must be positive and finite, got {eps}"
                )));
            }
        }
        for w in e.epsilons.windows(2) {
            if w[1] >= w[0] {
                return Err(Error::InvalidConfig(format!(
                    "sweep epsilons must be strictly decreasing: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        // eval_time may exceed the horizon; the sweep clamps it and reports
        // the snapshot time actually used.
        if !(e.eval_time > 0.0) || !e.eval_time.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "eval_time must be positive and finite, got {}",
                e.eval_time
            )));
        }
        if e.d2_samples < 2 {
            return Err(Error::InvalidConfig(
                "d2_samples must be at least 2".into(),
            ));
        }
        if !(e.audit_tolerance_scale >= 0.0) || !e.audit_tolerance_scale.is_finite() {
            return Err(Error::InvalidConfig(
                "audit_tolerance_scale must be nonnegative".into(),
            ));
        }
        if !(e.decay_envelope >= 1.0) || !e.decay_envelope.is_finite() {
            return Err(Error::InvalidConfig(
                "decay_envelope must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn kernel(&self) -> Result<CommKernel> {
        CommKernel::new(self.domain.lambda, self.domain.beta)
    }

    pub fn kinetic_settings(&self) -> Result<KineticSettings> {
        let integrator = match self.kinetic.integrator.as_str() {
            "rk4" => AlignmentIntegrator::Rk4,
            "exponential" => AlignmentIntegrator::FrozenExponential,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown integrator '{other}' (expected 'rk4' or 'exponential')"
                )))
            }
        };
        let convolution = match self.kinetic.convolution.as_str() {
            "direct" => ConvolutionPath::Direct,
            "fft" => ConvolutionPath::Fft,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown convolution '{other}' (expected 'direct' or 'fft')"
                )))
            }
        };
        if convolution == ConvolutionPath::Fft && self.domain.dim != 1 {
            return Err(Error::InvalidConfig(
                "fft convolution requires dim = 1".into(),
            ));
        }
        Ok(KineticSettings { integrator, convolution })
    }

    /// Number of time steps to reach the horizon.
    pub fn steps(&self) -> usize {
        (self.experiment.horizon / self.kinetic.dt).round().max(1.0) as usize
    }
}

fn shape_mode<const D: usize>(mode: &ModeConfig) -> Result<FourierMode<D>> {
    let k: [i32; D] = mode
        .k
        .clone()
        .try_into()
        .map_err(|_| Error::DimensionMismatch { expected: D, got: mode.k.len() })?;
    Ok(FourierMode { k, cos: mode.cos, sin: mode.sin })
}

impl DomainConfig {
    /// Initial density profile, shaped for dimension `D`.
    pub fn density_profile<const D: usize>(&self) -> Result<FourierProfile<D>> {
        let modes = self.rho_modes.iter().map(shape_mode).collect::<Result<Vec<_>>>()?;
        FourierProfile::new(self.rho_mean, modes)
    }

    /// Initial velocity profiles, one per component.
    pub fn velocity_profiles<const D: usize>(&self) -> Result<[FourierProfile<D>; D]> {
        if self.u_mean.len() != D || self.u_modes.len() != D {
            return Err(Error::DimensionMismatch { expected: D, got: self.u_mean.len() });
        }
        let mut out = Vec::with_capacity(D);
        for a in 0..D {
            let modes =
                self.u_modes[a].iter().map(shape_mode).collect::<Result<Vec<_>>>()?;
            out.push(FourierProfile::new(self.u_mean[a], modes)?);
        }
        out.try_into()
            .map_err(|_| Error::DimensionMismatch { expected: D, got: 0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_file_spells_out_the_defaults() {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/reference.toml");
        let parsed = ExperimentConfig::from_path(path).unwrap();
        assert_eq!(parsed, ExperimentConfig::default());
    }

    #[test]
    fn defaults_validate() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn infinity_epsilon_parses_and_validates() {
        let cfg = ExperimentConfig::from_toml_str("[kinetic]\nepsilon = inf\n").unwrap();
        assert!(cfg.kinetic.epsilon.is_infinite());
    }

    #[test]
    fn bad_sections_are_refused() {
        // Increasing sweep list.
        assert!(ExperimentConfig::from_toml_str("[experiment]\nepsilons = [0.1, 0.2]\n").is_err());
        // Nonpositive horizon.
        assert!(ExperimentConfig::from_toml_str("[experiment]\nhorizon = 0.0\n").is_err());
        // Nonpositive eval_time.
        assert!(ExperimentConfig::from_toml_str("[experiment]\neval_time = 0.0\n").is_err());
        // Unknown integrator.
        assert!(ExperimentConfig::from_toml_str("[kinetic]\nintegrator = \"euler\"\n").is_err());
        // FFT in two dimensions.
        assert!(ExperimentConfig::from_toml_str(
            "[domain]\ndim = 2\nu_mean = [0.0, 0.0]\nu_modes = [[], []]\n\n[kinetic]\nconvolution = \"fft\"\n"
        )
        .is_err());
        // Wrong mode arity.
        assert!(ExperimentConfig::from_toml_str(
            "[domain]\nrho_modes = [{ k = [1, 1], cos = 0.1, sin = 0.0 }]\n"
        )
        .is_err());
        // Unknown keys are typos, not extensions.
        assert!(ExperimentConfig::from_toml_str("[kinetic]\nparticle = 10\n").is_err());
    }

    #[test]
    fn profiles_shape_to_the_requested_dimension() {
        let cfg = ExperimentConfig::default();
        let rho = cfg.domain.density_profile::<1>().unwrap();
        assert!((rho.eval(&[0.0]) - 1.2).abs() < 1e-15);
        let [u] = cfg.domain.velocity_profiles::<1>().unwrap();
        assert!((u.eval(&[0.25]) - 0.1).abs() < 1e-15);
        // Shaping to the wrong dimension fails cleanly.
        assert!(cfg.domain.density_profile::<2>().is_err());
    }

    #[test]
    fn settings_strings_map_to_solver_options() {
        let mut cfg = ExperimentConfig::default();
        cfg.kinetic.integrator = "exponential".into();
        cfg.kinetic.convolution = "fft".into();
        let s = cfg.kinetic_settings().unwrap();
        assert_eq!(s.integrator, AlignmentIntegrator::FrozenExponential);
        assert_eq!(s.convolution, ConvolutionPath::Fft);
    }
}

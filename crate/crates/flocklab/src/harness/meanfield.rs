//! Mean-field consistency experiment: the binned kinetic solver against the
//! microscopic N-body system it is supposed to approximate, run from the
//! same sampled particles with local alignment switched off.

use std::path::Path;

use serde::Serialize;

use crate::domain::Grid;
use crate::error::{Error, Result};
use crate::kinetic::{microscopic_cs_step, KineticRunState};
use crate::vecmath::norm_sq;

use super::config::ExperimentConfig;
use super::csvio::write_numeric_csv;
use super::init::sample_ensemble;
use super::report::write_summary_json;

/// The microscopic system costs `O(N^2)` per stage; refuse sizes that would
/// silently take hours.
pub const MEANFIELD_CAP: usize = 5_000;

#[derive(Debug, Clone, Copy)]
pub struct MeanfieldRow {
    pub time: f64,
    /// Distance between the mean velocities of the two solvers.  Both
    /// conserve momentum to roundoff, so this stays near machine precision.
    pub mean_gap: f64,
    /// Gap between the velocity second moments, which feel the cell-center
    /// kernel quadrature at `O(h)`.
    pub second_moment_gap: f64,
}

#[derive(Debug, Serialize)]
pub struct MeanfieldReport {
    #[serde(skip)]
    pub rows: Vec<MeanfieldRow>,
    pub particles: usize,
    pub mean_gap_max: f64,
    pub second_gap_max: f64,
    /// Budget `5 (dt^2 + h)` for the second-moment gap.
    pub bound: f64,
    pub horizon: f64,
    pub pass: bool,
}

impl MeanfieldReport {
    pub fn write_artifacts(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        let rows: Vec<Vec<f64>> = self
            .rows
            .iter()
            .map(|r| vec![r.time, r.mean_gap, r.second_moment_gap])
            .collect();
        write_numeric_csv(
            dir.join("meanfield.csv"),
            &["time", "mean_gap", "second_moment_gap"],
            &rows,
        )?;
        write_summary_json(dir.join("summary.json"), self)
    }
}

fn mean_and_second<const D: usize>(velocities: &[[f64; D]], weights: &[f64]) -> ([f64; D], f64) {
    let mut mean = [0.0; D];
    let mut second = 0.0;
    for (v, w) in velocities.iter().zip(weights) {
        for a in 0..D {
            mean[a] += w * v[a];
        }
        second += w * norm_sq(*v);
    }
    (mean, second)
}

pub fn run_meanfield<const D: usize>(
    cfg: &ExperimentConfig,
    out: Option<&Path>,
) -> Result<MeanfieldReport> {
    cfg.validate()?;
    let n = cfg.kinetic.particles;
    if n > MEANFIELD_CAP {
        return Err(Error::SizeCap { size: n, cap: MEANFIELD_CAP });
    }
    let grid = Grid::<D>::new(cfg.domain.grid)?;
    let kernel = cfg.kernel()?;
    let ensemble =
        sample_ensemble::<D>(&cfg.domain, n, cfg.kinetic.vel_spread, cfg.experiment.seed)?;
    let weights = ensemble.weights.clone();
    let mut micro_x = ensemble.positions.clone();
    let mut micro_v = ensemble.velocities.clone();
    // The microscopic system weighs every particle 1/N, matching the uniform
    // weights the sampler produced.
    let mut run = KineticRunState::with_settings(
        ensemble,
        grid,
        kernel,
        f64::INFINITY,
        cfg.kinetic_settings()?,
    )?;

    let dt = cfg.kinetic.dt;
    let steps = cfg.steps();
    let every = cfg.experiment.snapshot_every;
    let mut rows = Vec::new();
    let mut record = |time: f64, kin_v: &[[f64; D]], mic_v: &[[f64; D]]| {
        let (km, ks) = mean_and_second(kin_v, &weights);
        let (mm, ms) = mean_and_second(mic_v, &weights);
        let mut gap = 0.0;
        for a in 0..D {
            gap += (km[a] - mm[a]) * (km[a] - mm[a]);
        }
        rows.push(MeanfieldRow {
            time,
            mean_gap: gap.sqrt(),
            second_moment_gap: (ks - ms).abs(),
        });
    };

    record(0.0, &run.ensemble.velocities, &micro_v);
    for s in 1..=steps {
        run.step(dt)?;
        microscopic_cs_step(&mut micro_x, &mut micro_v, &kernel, dt)?;
        if s % every == 0 || s == steps {
            record(run.time, &run.ensemble.velocities, &micro_v);
        }
    }

    let mean_gap_max = rows.iter().map(|r| r.mean_gap).fold(0.0, f64::max);
    let second_gap_max = rows.iter().map(|r| r.second_moment_gap).fold(0.0, f64::max);
    let bound = 5.0 * (dt * dt + grid.cell_width());
    let report = MeanfieldReport {
        particles: n,
        mean_gap_max,
        second_gap_max,
        bound,
        horizon: run.time,
        pass: mean_gap_max <= 1e-10 && second_gap_max <= bound,
        rows,
    };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        report.write_artifacts(dir)?;
    }
    Ok(report)
}

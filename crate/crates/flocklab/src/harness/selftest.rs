//! Transport-metric self-test: the two independent Wasserstein routes (the
//! exact circle method and the transportation LP) against each other on
//! random atomic measures, plus the `W2^2 <= (d/8) L1` bound on random
//! smooth densities.  The dual routes coexist on the circle, so this test is
//! one-dimensional regardless of the configured experiment dimension.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::domain::{FourierMode, FourierProfile, Grid, TorusPoint};
use crate::error::Result;
use crate::transport::{
    w1_discrete, w2_circle, w2_discrete_oracle, w2_l1_bound_margin, AtomicMeasure,
};

use super::config::ExperimentConfig;
use super::csvio::write_numeric_csv;
use super::report::write_summary_json;

/// Largest atom count per side; keeps the LP exact and instant.
const MAX_ATOMS: usize = 8;

#[derive(Debug, Clone, Copy)]
pub struct SelftestRow {
    pub pair: f64,
    pub w2_circle: f64,
    pub w2_lp: f64,
    pub gap: f64,
    pub marginal_error: f64,
    pub w1: f64,
}

#[derive(Debug, Serialize)]
pub struct SelftestReport {
    #[serde(skip)]
    pub rows: Vec<SelftestRow>,
    pub pairs_checked: usize,
    /// Worst disagreement between the circle method and the LP oracle.
    pub max_circle_lp_gap: f64,
    /// Worst violation of the coupling-plan marginal constraints.
    pub max_marginal_error: f64,
    /// Pairs where `W1 > W2` beyond roundoff (there should be none).
    pub w1_le_w2_violations: usize,
    pub density_pairs_checked: usize,
    /// Smallest signed slack of `(1/8) L1 - W2^2` across density pairs.
    pub min_l1_bound_margin: f64,
    /// Atomization allowance: margins above `-2 h` count as satisfying the bound.
    pub margin_allowance: f64,
    pub pass: bool,
}

impl SelftestReport {
    pub fn write_artifacts(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        let rows: Vec<Vec<f64>> = self
            .rows
            .iter()
            .map(|r| vec![r.pair, r.w2_circle, r.w2_lp, r.gap, r.marginal_error, r.w1])
            .collect();
        write_numeric_csv(
            dir.join("metrics_selftest.csv"),
            &["pair", "w2_circle", "w2_lp", "gap", "marginal_error", "w1"],
            &rows,
        )?;
        write_summary_json(dir.join("summary.json"), self)
    }
}

fn random_measure(rng: &mut ChaCha8Rng) -> AtomicMeasure<1> {
    let n = rng.gen_range(1..=MAX_ATOMS);
    let points: Vec<TorusPoint<1>> =
        (0..n).map(|_| TorusPoint::new([rng.gen::<f64>()])).collect();
    let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    AtomicMeasure::new(points, weights).expect("positive weights")
}

fn random_density(grid: &Grid<1>, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let mut modes = Vec::new();
    let mut budget = 0.8;
    for k in 1..=3i32 {
        let amp = rng.gen_range(0.0..budget / 2.0);
        let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        modes.push(FourierMode { k: [k], cos: amp * phase.cos(), sin: amp * phase.sin() });
        budget -= amp;
    }
    let profile = FourierProfile::new(1.0, modes)?;
    profile.require_positive()?;
    let mut rho: Vec<f64> =
        (0..grid.num_cells()).map(|c| profile.eval(&grid.cell_center(c).coords())).collect();
    let mass: f64 = rho.iter().sum::<f64>() * grid.cell_volume();
    for r in rho.iter_mut() {
        *r /= mass;
    }
    Ok(rho)
}

pub fn run_metrics_selftest(
    cfg: &ExperimentConfig,
    out: Option<&Path>,
) -> Result<SelftestReport> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.experiment.seed ^ 0x5e1f_7e57);

    let mut rows = Vec::with_capacity(cfg.experiment.selftest_pairs);
    let mut max_gap = 0.0f64;
    let mut max_marginal = 0.0f64;
    let mut violations = 0usize;
    for k in 0..cfg.experiment.selftest_pairs {
        let mu = random_measure(&mut rng);
        let nu = random_measure(&mut rng);
        let circle = w2_circle(&mu, &nu)?;
        let (lp, plan) = w2_discrete_oracle(&mu, &nu)?;
        let gap = (circle - lp).abs();
        max_gap = max_gap.max(gap);

        let src = plan.source_marginal(mu.len());
        let tgt = plan.target_marginal(nu.len());
        let mut marginal = 0.0f64;
        for (have, want) in src.iter().zip(&mu.weights).chain(tgt.iter().zip(&nu.weights)) {
            marginal = marginal.max((have - want).abs());
        }
        max_marginal = max_marginal.max(marginal);

        let w1 = w1_discrete(&mu, &nu)?;
        if w1 > lp + 1e-9 {
            violations += 1;
        }
        rows.push(SelftestRow {
            pair: k as f64,
            w2_circle: circle,
            w2_lp: lp,
            gap,
            marginal_error: marginal,
            w1,
        });
    }

    let grid = Grid::<1>::new(cfg.domain.grid)?;
    let allowance = 2.0 * grid.cell_width();
    let mut min_margin = f64::INFINITY;
    for _ in 0..cfg.experiment.selftest_density_pairs {
        let a = random_density(&grid, &mut rng)?;
        let b = random_density(&grid, &mut rng)?;
        min_margin = min_margin.min(w2_l1_bound_margin(&grid, &a, &b)?);
    }

    let pass = max_gap <= 1e-9
        && max_marginal <= 1e-12
        && violations == 0
        && min_margin >= -allowance;
    let report = SelftestReport {
        rows,
        pairs_checked: cfg.experiment.selftest_pairs,
        max_circle_lp_gap: max_gap,
        max_marginal_error: max_marginal,
        w1_le_w2_violations: violations,
        density_pairs_checked: cfg.experiment.selftest_density_pairs,
        min_l1_bound_margin: min_margin,
        margin_allowance: allowance,
        pass,
    };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        report.write_artifacts(dir)?;
    }
    Ok(report)
}

//! Start with velocities exactly on the profile and verify the internal
//! spread never leaves the grid-scale floor while the moments track the
//! fluid solution.
//!
//!     cargo run --release --example monokinetic_preservation

use flocklab::harness::{run_monokinetic, ExperimentConfig};

fn main() -> flocklab::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.domain.grid = 64;
    cfg.kinetic.particles = 50_000;
    cfg.kinetic.epsilon = 0.1;
    cfg.kinetic.dt = 1e-3;
    cfg.experiment.horizon = 0.3;
    cfg.experiment.snapshot_every = 50;

    let report = run_monokinetic::<1>(&cfg, None)?;

    println!(
        "{:>6}  {:>12}  {:>12}  {:>12}  {:>10}",
        "t", "E1", "floor", "fluid gap", "W2"
    );
    for row in &report.rows {
        println!(
            "{:>6.2}  {:>12.5e}  {:>12.5e}  {:>12.5e}  {:>10.3e}",
            row.time, row.e1, row.floor_bound, row.moment_gap, row.w2
        );
    }
    println!();
    println!("max spread      : {:.3e}", report.e1_max);
    println!("floor honored   : {}", report.floor_ok);
    println!(
        "gap constant    : {:.3}  (max gap over h + dt)",
        report.gap_constant
    );
    println!("verdict: {}", if report.pass { "PASS" } else { "FAIL" });
    Ok(())
}

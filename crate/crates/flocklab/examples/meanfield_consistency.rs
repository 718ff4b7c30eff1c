//! Run the binned kinetic solver and the exact microscopic N-body system
//! from the same particles and watch the gaps stay small.
//!
//!     cargo run --release --example meanfield_consistency

use flocklab::harness::{run_meanfield, ExperimentConfig};

fn main() -> flocklab::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.domain.grid = 64;
    cfg.kinetic.particles = 256;
    cfg.kinetic.epsilon = f64::INFINITY; // the reference has no relaxation term
    cfg.kinetic.dt = 1e-3;
    cfg.experiment.horizon = 0.5;
    cfg.experiment.snapshot_every = 100;

    let report = run_meanfield::<1>(&cfg, None)?;

    println!("{:>6}  {:>14}  {:>18}", "t", "mean gap", "second-moment gap");
    for row in &report.rows {
        println!(
            "{:>6.2}  {:>14.5e}  {:>18.5e}",
            row.time, row.mean_gap, row.second_moment_gap
        );
    }
    println!();
    println!("momentum agreement : {:.3e} (roundoff scale)", report.mean_gap_max);
    println!(
        "energy agreement   : {:.3e} within budget {:.3e}",
        report.second_gap_max, report.bound
    );
    println!("verdict: {}", if report.pass { "PASS" } else { "FAIL" });
    Ok(())
}

//! Watch the flocking functionals decay exponentially and compare the
//! fitted rate against the guaranteed one.
//!
//!     cargo run --release --example flocking_decay

use flocklab::harness::{run_flocking_decay, ExperimentConfig};

fn main() -> flocklab::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.domain.grid = 32;
    cfg.domain.beta = 0.0; // constant kernel: guaranteed rate 2 min(1, psi) = 2
    cfg.kinetic.particles = 20_000;
    cfg.kinetic.dt = 2e-3;
    cfg.experiment.horizon = 1.0;
    cfg.experiment.snapshot_every = 50;

    let report = run_flocking_decay::<1>(&cfg, None)?;

    println!("{:>6}  {:>12}  {:>12}  {:>12}", "t", "E1", "E2", "E");
    for row in &report.rows {
        println!(
            "{:>6.2}  {:>12.5e}  {:>12.5e}  {:>12.5e}",
            row.time, row.e1, row.e2, row.total
        );
    }
    println!();
    println!("guaranteed rate : {:.3}", report.theory_rate);
    if let Some(rate) = report.fitted_rate {
        println!(
            "fitted rate     : {:.3} +- {:.3}",
            rate,
            report.rate_stderr.unwrap_or(0.0)
        );
    }
    println!(
        "envelope E <= {} E(0) exp(-rate t): {}",
        report.envelope_factor,
        if report.envelope_ok { "held" } else { "violated" }
    );
    println!("verdict: {}", if report.pass { "PASS" } else { "FAIL" });
    Ok(())
}

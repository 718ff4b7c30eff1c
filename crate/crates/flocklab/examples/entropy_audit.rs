//! Audit the structural hypotheses behind the hydrodynamic-limit estimate
//! on a small paired kinetic/fluid run: entropy inequality, well-prepared
//! data, flux control, kernel commutators and the Wasserstein Gronwall
//! bound.
//!
//!     cargo run --release --example entropy_audit

use flocklab::harness::{run_hypothesis_audit, ExperimentConfig};

fn main() -> flocklab::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.domain.grid = 32;
    cfg.kinetic.particles = 20_000;
    cfg.kinetic.epsilon = 0.05;
    cfg.kinetic.dt = 1e-3;
    cfg.experiment.horizon = 0.3;
    cfg.experiment.snapshot_every = 50;
    cfg.experiment.d2_samples = 1000;

    let report = run_hypothesis_audit::<1>(&cfg, None)?;

    println!("epsilon {}  tolerance {:.3e}", report.epsilon, report.tolerance);
    println!("{:>4}  {:>13}  {:>12}  {}", "", "margin", "constant", "verdict");
    for (name, check) in [
        ("H1", &report.h1),
        ("H2", &report.h2),
        ("H3", &report.h3),
        ("H4", &report.h4),
        ("H5", &report.h5),
        ("H6", &report.h6),
        ("H7", &report.h7),
    ] {
        println!(
            "{:>4}  {:>13.5e}  {:>12.5e}  {}{}",
            name,
            check.margin,
            check.constant,
            if check.pass { "ok" } else { "FAILED" },
            if check.bounded_surrogate { " (bounded surrogate)" } else { "" },
        );
    }
    println!();
    println!(
        "final relative entropy {:.3e}, final W2^2 {:.3e}",
        report.relative_entropy_final, report.w2_squared_final
    );
    println!("verdict: {}", if report.all_pass { "PASS" } else { "FAIL" });
    Ok(())
}

//! Thin command-line front end: parse flags, load the configuration, run
//! the requested experiment through the library, print one verdict line.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use flocklab::harness::{
    run_epsilon_sweep, run_flocking_decay, run_hypothesis_audit, run_meanfield,
    run_metrics_selftest, run_monokinetic, ExperimentConfig,
};
use flocklab::{Error, Result};

#[derive(Parser)]
#[command(
    name = "flocklab",
    version,
    about = "Kinetic Cucker-Smale flocking laboratory: solvers, metrics and canned experiments"
)]
struct Cli {
    /// TOML experiment configuration; built-in defaults apply otherwise.
    #[arg(long, global = true, value_name = "path")]
    config: Option<PathBuf>,
    /// Output directory for CSV tables, summary.json and checkpoints.
    #[arg(long, global = true, value_name = "dir")]
    out: Option<PathBuf>,
    /// Random seed override.
    #[arg(long, global = true, value_name = "n")]
    seed: Option<u64>,
    /// Worker thread count (defaults to all cores).
    #[arg(long, global = true, value_name = "n")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Fit the order of the modulated energy in the relaxation scale.
    SweepEpsilon,
    /// Measure the exponential decay of the flocking functionals.
    FlockingDecay,
    /// Check that monokinetic data stays monokinetic up to the grid floor.
    Monokinetic,
    /// Compare the binned solver against the microscopic N-body system.
    Meanfield,
    /// Audit the structural hypotheses on a paired kinetic/fluid run.
    Audit,
    /// Cross-check the two optimal-transport routes against each other.
    MetricsSelftest,
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.experiment.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.experiment.out_dir = out.display().to_string();
    }
    cfg.validate()?;
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    }

    let out_dir = PathBuf::from(&cfg.experiment.out_dir);
    let out = Some(out_dir.as_path());
    let dim = cfg.domain.dim;
    let pass = match cli.command {
        Command::SweepEpsilon => {
            let report = match dim {
                1 => run_epsilon_sweep::<1>(&cfg, out)?,
                _ => run_epsilon_sweep::<2>(&cfg, out)?,
            };
            println!(
                "sweep-epsilon: {} (order {:.3} +- {:.3} at t = {:.3}{}{})",
                verdict(report.pass),
                report.slope,
                report.slope_stderr,
                report.eval_time,
                if report.floor_limited { ", discretization floor reached" } else { "" },
                if report.safeguard_breach { ", fluid horizon truncated" } else { "" },
            );
            report.pass
        }
        Command::FlockingDecay => {
            let report = match dim {
                1 => run_flocking_decay::<1>(&cfg, out)?,
                _ => run_flocking_decay::<2>(&cfg, out)?,
            };
            match report.fitted_rate {
                Some(rate) => println!(
                    "flocking-decay: {} (fitted rate {:.3} vs guaranteed {:.3}, envelope {})",
                    verdict(report.pass),
                    rate,
                    report.theory_rate,
                    if report.envelope_ok { "held" } else { "violated" },
                ),
                None => println!(
                    "flocking-decay: {} (already flocked, envelope {})",
                    verdict(report.pass),
                    if report.envelope_ok { "held" } else { "violated" },
                ),
            }
            report.pass
        }
        Command::Monokinetic => {
            let report = match dim {
                1 => run_monokinetic::<1>(&cfg, out)?,
                _ => run_monokinetic::<2>(&cfg, out)?,
            };
            println!(
                "monokinetic: {} (max spread {:.3e}, grid floor honored: {}, fluid gap {:.3e})",
                verdict(report.pass),
                report.e1_max,
                report.floor_ok,
                report.gap_max,
            );
            report.pass
        }
        Command::Meanfield => {
            let report = match dim {
                1 => run_meanfield::<1>(&cfg, out)?,
                _ => run_meanfield::<2>(&cfg, out)?,
            };
            println!(
                "meanfield: {} (mean gap {:.3e}, second-moment gap {:.3e} vs budget {:.3e})",
                verdict(report.pass),
                report.mean_gap_max,
                report.second_gap_max,
                report.bound,
            );
            report.pass
        }
        Command::Audit => {
            let report = match dim {
                1 => run_hypothesis_audit::<1>(&cfg, out)?,
                _ => run_hypothesis_audit::<2>(&cfg, out)?,
            };
            let checks = [
                ("H1", &report.h1),
                ("H2", &report.h2),
                ("H3", &report.h3),
                ("H4", &report.h4),
                ("H5", &report.h5),
                ("H6", &report.h6),
                ("H7", &report.h7),
            ];
            let failing: Vec<&str> = checks
                .iter()
                .filter(|(_, c)| !c.pass)
                .map(|(name, _)| *name)
                .collect();
            if failing.is_empty() {
                println!(
                    "audit: {} (H1-H7 within tolerance {:.3e}, final W2^2 {:.3e})",
                    verdict(report.all_pass),
                    report.tolerance,
                    report.w2_squared_final,
                );
            } else {
                println!(
                    "audit: {} (failing: {}, tolerance {:.3e})",
                    verdict(report.all_pass),
                    failing.join(" "),
                    report.tolerance,
                );
            }
            report.all_pass
        }
        Command::MetricsSelftest => {
            let report = run_metrics_selftest(&cfg, out)?;
            println!(
                "metrics-selftest: {} ({} atom pairs, max route gap {:.3e}; {} density pairs, min bound margin {:.3e})",
                verdict(report.pass),
                report.pairs_checked,
                report.max_circle_lp_gap,
                report.density_pairs_checked,
                report.min_l1_bound_margin,
            );
            report.pass
        }
    };
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

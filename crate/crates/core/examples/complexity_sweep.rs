//! Memory and kernel evaluations grow with the number of levels only.
//!
//! Halves `h_min` repeatedly at fixed `T = 1`; the step count doubles each
//! time while the stored vectors grow by one level's worth.

use fastconv::harness::config::{Experiment, RunConfig};
use fastconv::harness::run::complexity_sweep;

fn main() -> fastconv::Result<()> {
    let cfg = RunConfig {
        halvings: Some(6),
        ..RunConfig::for_experiment(Experiment::ComplexitySweep)
    };
    let rows = complexity_sweep(&cfg.resolve()?)?;
    println!(
        "{:>10} {:>3} {:>8} {:>6} {:>7} {:>8}",
        "h_min", "L", "steps", "F", "stored", "g/step"
    );
    for r in rows {
        println!(
            "{:>10.3e} {:>3} {:>8} {:>6} {:>7} {:>8}",
            r.h_min,
            r.levels,
            r.steps,
            r.counters.f_evaluations,
            r.counters.stored_vectors_peak,
            r.counters.g_reads_step_peak
        );
    }
    Ok(())
}

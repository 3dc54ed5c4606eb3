//! Blow-up of the nonlinear Abel equation resolved by the adaptive controller.
//!
//! Run with `cargo run --release --example abel_blowup -- -2.5 1e-7`.

use fastconv::apps::abel::{abel_solve, AbelProblem};
use fastconv::harness::Stop;

fn main() -> fastconv::Result<()> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let gamma = args.first().copied().unwrap_or(-2.5);
    let tol = args.get(1).copied().unwrap_or(1e-7);
    let problem = AbelProblem::new(gamma, tol, 1.0);
    let start = std::time::Instant::now();
    let traj = abel_solve(&problem)?;
    let hs = &traj.step_sizes[1..];
    let (hmin, hmax) = hs
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &h| (a.min(h), b.max(h)));
    println!(
        "gamma = {gamma}, Tol = {tol:e}: {} steps in {:.2?}",
        traj.steps(),
        start.elapsed()
    );
    match traj.stop {
        Stop::BlowUp { t, modulus } => println!("|z| = {modulus:.1} > 100 at t = {t:.6}"),
        Stop::Completed => println!(
            "reached t = {} with |z| = {:.6}",
            traj.last_time(),
            traj.values.last().unwrap()[2]
        ),
        Stop::Stalled { t, message } => println!("stopped at t = {t:.6}: {message}"),
    }
    println!("accepted steps between {hmin:.3e} and {hmax:.3e}");
    println!("rejected trials: {}", traj.rejects.iter().sum::<usize>());
    println!("{}", serde_json::to_string_pretty(&traj.counters).unwrap());
    Ok(())
}

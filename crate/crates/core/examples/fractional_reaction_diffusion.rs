//! Subdiffusive three-species reaction on a periodic line.
//!
//! Prints the adaptive step history at a few times and the drift of the
//! conserved total `Σ(u₁ + u₃)`.

use fastconv::apps::fracrd::{fracrd_solve, FracRdProblem};

fn main() -> fastconv::Result<()> {
    let t_end = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(30.0);
    let p = FracRdProblem {
        t_end,
        ..FracRdProblem::default()
    };
    let traj = fracrd_solve(&p)?;
    let sums = traj.column("sum13").expect("conserved column");
    let drift = sums
        .iter()
        .map(|s| ((s - sums[0]) / sums[0]).abs())
        .fold(0.0, f64::max);
    println!(
        "{} steps to t = {}, stop: {:?}",
        traj.steps(),
        traj.last_time(),
        traj.stop
    );
    for mark in [0.01, 0.1, 1.0, 10.0, t_end] {
        if let Some(i) = traj.times.iter().position(|&t| t >= mark) {
            println!("t = {:>8.4}  h = {:.3e}", traj.times[i], traj.step_sizes[i]);
        }
    }
    println!("max relative drift of sum(u1 + u3): {drift:.2e}");
    Ok(())
}

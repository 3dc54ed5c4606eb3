//! Fractionally damped cantilever under a smooth edge load pulse.
//!
//! Integrating controller with `ε = 1e-4`; the step size drops while the
//! load acts on `(2, 3)` and recovers afterwards.

use fastconv::apps::elasticity::{assemble_cantilever, Material};
use fastconv::apps::visco::{visco_solve, ViscoProblem};

fn main() -> fastconv::Result<()> {
    let eps = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(1e-4);
    let beam = assemble_cantilever(8, 2, Material::default())?;
    let run = visco_solve(&ViscoProblem::from_cantilever(&beam, eps))?;
    let traj = &run.trajectory;
    println!(
        "{} unknowns, {} steps in {:.2} s",
        beam.free.len(),
        traj.steps(),
        run.wall_seconds
    );
    for (a, b) in [(0.0, 1.0), (1.0, 2.0), (2.0, 2.2), (2.2, 3.0), (3.0, 6.0)] {
        println!(
            "mean step on ({a}, {b}]: {:.3e}",
            traj.mean_step(a, b).unwrap_or(f64::NAN)
        );
    }
    let u = traj.column("u").unwrap();
    println!("probe displacement at t = 6: {:.6e}", u.last().unwrap());
    Ok(())
}

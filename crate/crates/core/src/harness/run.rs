//! Experiment drivers. Every run writes `<experiment>.csv`, `counters.json`
//! and `manifest.json` into the output directory; adaptive runs also write
//! `<experiment>_control.csv`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{Experiment, Resolved, RunConfig};
use super::io::{
    read_coordinate_matrix, read_vector, write_control_csv, write_json, write_table,
    write_trajectory_csv,
};
use super::{oracle_convolve, Stop, Trajectory};
use crate::apps::abel::{abel_solve, AbelProblem};
use crate::apps::elasticity::{assemble_cantilever, Material};
use crate::apps::fracrd::{fracrd_solve, FracRdProblem};
use crate::apps::visco::{visco_solve, ViscoProblem};
use crate::contour::{build_contour, plan_interval, Which};
use crate::engine::{decompose, ConvolutionEngine, Counters, EngineConfig};
use crate::{Error, Result};

/// Outcome of a run whose files were written.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub experiment: Experiment,
    pub files: Vec<PathBuf>,
    pub stop: Stop,
    pub summary: Value,
}

impl RunReport {
    /// `0`, or `3` when an adaptive run stalled before its final time.
    pub fn exit_code(&self) -> i32 {
        match self.stop {
            Stop::Stalled { .. } => 3,
            _ => 0,
        }
    }
}

/// `n` random steps, each between half and one and a half of the mean,
/// rescaled to end exactly at `t_end`; `n + 1` points starting at zero.
pub fn random_grid(n: usize, t_end: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
    let total: f64 = steps.iter().sum();
    let mut times = Vec::with_capacity(n + 1);
    let mut t = 0.0;
    times.push(0.0);
    for (i, s) in steps.iter().enumerate() {
        t += s * t_end / total;
        times.push(if i + 1 == n { t_end } else { t });
    }
    times
}

/// Fast evaluation along a grid; `u(t_0) = 0`.
pub fn fast_convolve(
    kernel: crate::kernels::SectorialTransform,
    cfg: EngineConfig,
    times: &[f64],
    samples: &[Vec<f64>],
) -> Result<(Vec<Vec<f64>>, Counters)> {
    let mut engine = ConvolutionEngine::new(kernel, cfg, &samples[0])?;
    let mut out = vec![vec![0.0; samples[0].len()]];
    for (&t, g) in times.iter().zip(samples).skip(1) {
        out.push(engine.evaluate(t, g)?);
    }
    Ok((out, engine.counters()))
}

/// One row of the complexity sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub h_min: f64,
    /// Levels `L` of the decomposition of `T`.
    pub levels: usize,
    pub steps: usize,
    pub counters: Counters,
}

/// Fast convolution on a random grid with steps in `[h, 3h]`, for `h_min`
/// halved `halvings` times.
pub fn complexity_sweep(r: &Resolved) -> Result<Vec<SweepRow>> {
    let kernel = r.kernel.build()?;
    let mut rows = Vec::new();
    for i in 0..=r.halvings {
        let h = r.h_min / f64::powi(2.0, i as i32);
        let mut rng = ChaCha8Rng::seed_from_u64(r.seed + i as u64);
        let mut times = vec![0.0];
        let mut t = 0.0;
        while t < r.t_end {
            t = (t + rng.gen_range(h..3.0 * h)).min(r.t_end);
            if r.t_end - t < h {
                t = r.t_end;
            }
            times.push(t);
        }
        let samples: Vec<Vec<f64>> = times.iter().map(|&t| vec![r.signal.eval(t)]).collect();
        let cfg = EngineConfig::new(h, r.base, r.t_end, r.contour);
        let (_, counters) = fast_convolve(kernel.clone(), cfg, &times, &samples)?;
        rows.push(SweepRow {
            h_min: h,
            levels: decompose(r.t_end, h, r.base).levels(),
            steps: times.len() - 1,
            counters,
        });
    }
    Ok(rows)
}

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(p.clone());
        p
    }

    fn trajectory(&mut self, traj: &Trajectory) -> Result<()> {
        write_trajectory_csv(&self.path(&format!("{}.csv", traj.name)), traj)?;
        write_control_csv(&self.path(&format!("{}_control.csv", traj.name)), traj)?;
        write_json(&self.path("counters.json"), &traj.counters)
    }
}

fn trajectory_summary(traj: &Trajectory) -> Value {
    let hs = &traj.step_sizes[1.min(traj.len())..];
    let (hmin, hmax) = hs
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &h| (a.min(h), b.max(h)));
    json!({
        "steps": traj.steps(),
        "final_time": traj.last_time(),
        "rejected_trials": traj.rejects.iter().sum::<usize>(),
        "smallest_step": if hs.is_empty() { Value::Null } else { json!(hmin) },
        "largest_step": if hs.is_empty() { Value::Null } else { json!(hmax) },
        "final_values": traj.columns.iter().zip(traj.values.last().into_iter().flatten())
            .filter(|(_, v)| v.is_finite()).take(8)
            .map(|(c, v)| (c.clone(), json!(v))).collect::<serde_json::Map<_, _>>(),
    })
}

fn run_invert(r: &Resolved, out: &mut Output) -> Result<(Stop, Value)> {
    let kernel = r.kernel.build()?;
    let mut counters = Counters::default();
    let mut rows = Vec::new();
    for &t in &r.times {
        if !(t > 0.0) {
            return Err(Error::config(format!(
                "invert: times must be positive, got {t}"
            )));
        }
        let contour = build_contour(
            plan_interval(0.5 * t, 2.0 * t, &r.contour, kernel.sigma),
            &r.contour,
            &kernel,
        )?;
        let exact = kernel.closed_f(t).unwrap_or(f64::NAN);
        rows.push(vec![
            t,
            contour.invert(Which::F, t),
            contour.invert(Which::F1, t),
            contour.invert(Which::F2, t),
            exact,
        ]);
        counters.f_evaluations += contour.f_evaluations() as u64;
    }
    let header = ["t", "f", "f1", "f2", "f_exact"].map(String::from);
    write_table(&out.path("invert.csv"), &header, &rows)?;
    write_json(&out.path("counters.json"), &counters)?;
    let max_rel = rows
        .iter()
        .filter(|row| row[4].is_finite())
        .map(|row| ((row[1] - row[4]) / row[4]).abs())
        .fold(None, |m: Option<f64>, e| Some(m.map_or(e, |m| m.max(e))));
    Ok((
        Stop::Completed,
        json!({ "points": rows.len(), "max_relative_error": max_rel }),
    ))
}

fn convolution_inputs(r: &Resolved) -> (Vec<f64>, Vec<Vec<f64>>) {
    let times = random_grid(r.n, r.t_end, r.seed);
    let samples = times.iter().map(|&t| vec![r.signal.eval(t)]).collect();
    (times, samples)
}

fn run_convolve(r: &Resolved, out: &mut Output, compare: bool) -> Result<(Stop, Value)> {
    let kernel = r.kernel.build()?;
    let (times, samples) = convolution_inputs(r);
    let cfg = EngineConfig::new(r.h_min, r.base, r.t_end, r.contour);
    let start = Instant::now();
    let (fast, counters) = fast_convolve(kernel.clone(), cfg, &times, &samples)?;
    let fast_seconds = start.elapsed().as_secs_f64();
    let mut header: Vec<String> = ["t", "h", "g", "u"].map(String::from).to_vec();
    let mut rows: Vec<Vec<f64>> = (0..times.len())
        .map(|i| {
            vec![
                times[i],
                if i == 0 { 0.0 } else { times[i] - times[i - 1] },
                samples[i][0],
                fast[i][0],
            ]
        })
        .collect();
    let mut summary = json!({ "grid_points": times.len(), "fast_seconds": fast_seconds });
    if compare {
        let start = Instant::now();
        let oracle = oracle_convolve(&kernel, &times, &samples)?;
        header.push("u_oracle".into());
        let scale = oracle.iter().map(|u| u[0].abs()).fold(0.0, f64::max);
        let mut dev = 0.0f64;
        for (row, o) in rows.iter_mut().zip(&oracle) {
            row.push(o[0]);
            dev = dev.max((row[3] - o[0]).abs());
        }
        summary["oracle_seconds"] = json!(start.elapsed().as_secs_f64());
        summary["max_abs_deviation"] = json!(dev);
        summary["max_relative_deviation"] = json!(if scale > 0.0 { dev / scale } else { dev });
    }
    let name = if compare {
        "oracle-compare.csv"
    } else {
        "convolve.csv"
    };
    write_table(&out.path(name), &header, &rows)?;
    write_json(&out.path("counters.json"), &counters)?;
    Ok((Stop::Completed, summary))
}

fn run_abel(r: &Resolved, out: &mut Output) -> Result<(Stop, Value)> {
    let mut p = AbelProblem::new(r.gamma, r.tol, r.t_end);
    p.h_min = r.h_min;
    p.base = r.base;
    p.contour = r.contour;
    p.max_steps = r.max_steps;
    let traj = abel_solve(&p)?;
    out.trajectory(&traj)?;
    Ok((traj.stop.clone(), trajectory_summary(&traj)))
}

fn run_fracrd(r: &Resolved, out: &mut Output) -> Result<(Stop, Value)> {
    let p = FracRdProblem {
        alpha: r.alpha,
        m_nodes: r.n,
        t_end: r.t_end,
        tol: r.tol,
        h_min: r.h_min,
        base: r.base,
        contour: r.contour,
        ..FracRdProblem::default()
    };
    let traj = fracrd_solve(&p)?;
    out.trajectory(&traj)?;
    let mut summary = trajectory_summary(&traj);
    if let Some(sums) = traj.column("sum13") {
        let drift = sums
            .iter()
            .map(|s| ((s - sums[0]) / sums[0]).abs())
            .fold(0.0, f64::max);
        summary["max_relative_drift_sum13"] = json!(drift);
    }
    Ok((traj.stop.clone(), summary))
}

fn visco_problem(r: &Resolved) -> Result<ViscoProblem> {
    let mut p = match &r.matrices {
        Some(files) => {
            let mass = read_coordinate_matrix(&files.mass, None)?;
            let n = mass.nrows();
            let stiffness = read_coordinate_matrix(&files.stiffness, Some(n))?;
            let load = match &files.load {
                Some(path) => read_vector(path)?,
                None => nalgebra::DVector::zeros(n),
            };
            ViscoProblem::new(mass, stiffness, load, files.probe, r.eps)
        }
        None => {
            let c = assemble_cantilever(r.mesh.nx, r.mesh.ny, Material::default())?;
            ViscoProblem::from_cantilever(&c, r.eps)
        }
    };
    p.alpha = r.alpha;
    p.gamma = r.gamma;
    p.t_end = r.t_end;
    p.h_min = r.h_min;
    p.base = r.base;
    p.contour = r.contour;
    p.max_steps = r.max_steps;
    Ok(p)
}

fn run_visco(r: &Resolved, out: &mut Output) -> Result<(Stop, Value)> {
    let run = visco_solve(&visco_problem(r)?)?;
    out.trajectory(&run.trajectory)?;
    let mut summary = trajectory_summary(&run.trajectory);
    summary["unknowns"] = json!(run.last.u.len());
    summary["wall_seconds"] = json!(run.wall_seconds);
    Ok((run.trajectory.stop.clone(), summary))
}

fn run_sweep(r: &Resolved, out: &mut Output) -> Result<(Stop, Value)> {
    let rows = complexity_sweep(r)?;
    let header = [
        "h_min",
        "L",
        "F_evaluations",
        "stored_vectors_peak",
        "g_reads_step_peak",
        "steps",
    ]
    .map(String::from);
    let table: Vec<Vec<f64>> = rows
        .iter()
        .map(|row| {
            vec![
                row.h_min,
                row.levels as f64,
                row.counters.f_evaluations as f64,
                row.counters.stored_vectors_peak as f64,
                row.counters.g_reads_step_peak as f64,
                row.steps as f64,
            ]
        })
        .collect();
    write_table(&out.path("complexity-sweep.csv"), &header, &table)?;
    write_json(&out.path("counters.json"), &rows)?;
    Ok((Stop::Completed, json!({ "runs": rows.len() })))
}

/// Runs a resolved configuration and writes its files into `r.out`.
pub fn run_resolved(r: &Resolved) -> Result<RunReport> {
    std::fs::create_dir_all(&r.out)?;
    let mut out = Output {
        dir: r.out.clone(),
        files: Vec::new(),
    };
    let start = Instant::now();
    let (stop, summary) = match r.experiment {
        Experiment::Invert => run_invert(r, &mut out)?,
        Experiment::Convolve => run_convolve(r, &mut out, false)?,
        Experiment::OracleCompare => run_convolve(r, &mut out, true)?,
        Experiment::Abel => run_abel(r, &mut out)?,
        Experiment::Fracrd => run_fracrd(r, &mut out)?,
        Experiment::Visco => run_visco(r, &mut out)?,
        Experiment::ComplexitySweep => run_sweep(r, &mut out)?,
    };
    let manifest_path = out.path("manifest.json");
    let manifest = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": r.experiment.name(),
        "config": r,
        "stop": stop,
        "summary": summary,
        "wall_seconds": start.elapsed().as_secs_f64(),
        "files": out.files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    });
    write_json(&manifest_path, &manifest)?;
    Ok(RunReport {
        experiment: r.experiment,
        files: out.files,
        stop,
        summary,
    })
}

pub fn run(config: &RunConfig) -> Result<RunReport> {
    run_resolved(&config.resolve()?)
}

/// Config file (optional) overlaid by command line overrides.
pub fn load_config(path: Option<&Path>, overrides: RunConfig) -> Result<RunConfig> {
    let base = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    Ok(base.merge(overrides))
}

//! Reference oracle, configuration, file formats and experiment drivers.

pub mod config;
pub mod io;
mod oracle;
pub mod run;

use serde::Serialize;

use crate::engine::Counters;

pub use oracle::{oracle_convolve, reference_f12, ORACLE_K};

/// Why an adaptive run ended.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Stop {
    Completed,
    BlowUp {
        t: f64,
        modulus: f64,
    },
    /// The controller or the implicit solver gave up; the trajectory holds
    /// every step accepted before that.
    Stalled {
        t: f64,
        message: String,
    },
}

/// One record per accepted step of an adaptive run, starting with `t_0`.
#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub name: String,
    /// Names of the value columns.
    pub columns: Vec<String>,
    pub times: Vec<f64>,
    /// `t_n − t_{n−1}`, zero for the initial record.
    pub step_sizes: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    /// Rejected trials before each accepted step.
    pub rejects: Vec<usize>,
    /// Name of the controller quantity logged per step (`gamma2`, `gamma1`, `z`).
    pub indicator_name: String,
    pub indicator: Vec<f64>,
    pub counters: Counters,
    pub stop: Stop,
}

impl Trajectory {
    pub fn new(name: &str, columns: &[&str], indicator_name: &str) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            times: Vec::new(),
            step_sizes: Vec::new(),
            values: Vec::new(),
            rejects: Vec::new(),
            indicator_name: indicator_name.to_string(),
            indicator: Vec::new(),
            counters: Counters::default(),
            stop: Stop::Completed,
        }
    }

    pub fn push(&mut self, t: f64, values: Vec<f64>, rejects: usize, indicator: f64) {
        let h = self.times.last().map_or(0.0, |&prev| t - prev);
        debug_assert!(self.times.last().is_none_or(|&prev| t > prev));
        debug_assert_eq!(values.len(), self.columns.len());
        self.times.push(t);
        self.step_sizes.push(h);
        self.values.push(values);
        self.rejects.push(rejects);
        self.indicator.push(indicator);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of accepted steps (records after the initial one).
    pub fn steps(&self) -> usize {
        self.times.len().saturating_sub(1)
    }

    pub fn last_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.values.iter().map(|v| v[i]).collect())
    }

    /// Mean accepted step over steps ending in `(t0, t1]`.
    pub fn mean_step(&self, t0: f64, t1: f64) -> Option<f64> {
        let hs: Vec<f64> = self
            .times
            .iter()
            .zip(&self.step_sizes)
            .skip(1)
            .filter(|(&t, _)| t > t0 && t <= t1)
            .map(|(_, &h)| h)
            .collect();
        (!hs.is_empty()).then(|| hs.iter().sum::<f64>() / hs.len() as f64)
    }
}

//! JSON run configuration.
//!
//! A config names an `experiment` and optionally a `preset`; every other field
//! overrides the preset value. Command line flags override the file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::contour::ContourConstants;
use crate::kernels::{mittag_leffler_kernel, power_kernel, SectorialTransform};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Invert,
    Convolve,
    Abel,
    Fracrd,
    Visco,
    OracleCompare,
    ComplexitySweep,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Invert => "invert",
            Experiment::Convolve => "convolve",
            Experiment::Abel => "abel",
            Experiment::Fracrd => "fracrd",
            Experiment::Visco => "visco",
            Experiment::OracleCompare => "oracle-compare",
            Experiment::ComplexitySweep => "complexity-sweep",
        }
    }

    /// Presets understood by the experiment; the first is the default.
    pub fn presets(self) -> &'static [&'static str] {
        match self {
            Experiment::Abel => &["blowup", "gamma-2"],
            _ => &["paper"],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `F(s) = s^{−ν}`.
    Power { nu: f64 },
    /// `F(s) = 1/(1 + s^α)`.
    MittagLeffler { alpha: f64 },
}

impl KernelSpec {
    pub fn build(&self) -> Result<SectorialTransform> {
        match *self {
            KernelSpec::Power { nu } => power_kernel(nu),
            KernelSpec::MittagLeffler { alpha } => mittag_leffler_kernel(alpha),
        }
    }

    fn with_parameter(self, value: f64) -> Self {
        match self {
            KernelSpec::Power { .. } => KernelSpec::Power { nu: value },
            KernelSpec::MittagLeffler { .. } => KernelSpec::MittagLeffler { alpha: value },
        }
    }
}

/// Named constant triple (`"k50"`, `"k40"`, `"k35"`) or explicit constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ContourSpec {
    Named(String),
    Explicit(ContourConstants),
}

impl ContourSpec {
    pub fn resolve(&self) -> Result<ContourConstants> {
        match self {
            ContourSpec::Named(name) => match name.as_str() {
                "k50" => Ok(ContourConstants::preset_k50()),
                "k40" => Ok(ContourConstants::preset_k40()),
                "k35" => Ok(ContourConstants::preset_k35()),
                other => Err(Error::config(format!(
                    "unknown contour preset '{other}' (k50, k40, k35)"
                ))),
            },
            ContourSpec::Explicit(c) => Ok(*c),
        }
    }
}

/// Test signal for the convolution experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signal {
    One,
    Sin,
    Cos,
    Ramp,
}

impl Signal {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            Signal::One => 1.0,
            Signal::Sin => t.sin(),
            Signal::Cos => t.cos(),
            Signal::Ramp => t,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec {
    pub nx: usize,
    pub ny: usize,
}

/// Coordinate-format matrices replacing the built-in cantilever.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixFiles {
    pub mass: PathBuf,
    pub stiffness: PathBuf,
    /// Load shape, one value per line; zero load when absent.
    #[serde(default)]
    pub load: Option<PathBuf>,
    /// 0-based unknown recorded in the trajectory.
    #[serde(default)]
    pub probe: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Option<Experiment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contour: Option<ContourSpec>,
    /// Overrides the contour node count; known counts select their constant triple.
    #[serde(default, rename = "K", skip_serializing_if = "Option::is_none")]
    pub k_nodes: Option<usize>,
    #[serde(default, rename = "B", skip_serializing_if = "Option::is_none")]
    pub base: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Fractional order; for kernel experiments the kernel parameter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    /// Grid points (convolution experiments) or spatial nodes (fracrd).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal: Option<Signal>,
    /// Evaluation times for `invert`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    /// Number of `h_min` halvings in `complexity-sweep`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halvings: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<MeshSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<MatrixFiles>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn for_experiment(experiment: Experiment) -> Self {
        Self {
            experiment: Some(experiment),
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Fields set in `other` replace those of `self`.
    pub fn merge(mut self, other: RunConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            experiment, preset, kernel, contour, k_nodes, base, h_min, tol, eps, gamma, alpha,
            t_end, n, seed, signal, times, halvings, mesh, matrices, max_steps, out
        );
        self
    }

    /// Preset values overlaid by the explicit fields.
    pub fn resolve(&self) -> Result<Resolved> {
        let experiment = self
            .experiment
            .ok_or_else(|| Error::config("config names no experiment"))?;
        let presets = experiment.presets();
        let preset = self
            .preset
            .clone()
            .unwrap_or_else(|| presets[0].to_string());
        if !presets.contains(&preset.as_str()) {
            return Err(Error::config(format!(
                "unknown preset '{preset}' for {}; available: {}",
                experiment.name(),
                presets.join(", ")
            )));
        }
        let mut r = Resolved::preset(experiment, &preset);
        if let Some(k) = self.kernel {
            r.kernel = k;
        }
        if let Some(c) = &self.contour {
            r.contour = c.resolve()?;
        }
        if let Some(k) = self.k_nodes {
            r.contour = ContourConstants::preset(k).unwrap_or_else(|| r.contour.with_k(k));
        }
        if let Some(a) = self.alpha {
            r.alpha = a;
            if matches!(
                experiment,
                Experiment::Invert
                    | Experiment::Convolve
                    | Experiment::OracleCompare
                    | Experiment::ComplexitySweep
            ) {
                r.kernel = r.kernel.with_parameter(a);
            }
        }
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f.clone() { r.$f = v; } )* };
        }
        set!(
            base, h_min, tol, eps, gamma, t_end, n, seed, signal, times, halvings, mesh, max_steps,
            out
        );
        r.matrices = self.matrices.clone();
        if r.base < 2 {
            return Err(Error::config(format!(
                "B must be at least 2, got {}",
                r.base
            )));
        }
        Ok(r)
    }
}

/// Fully specified run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Resolved {
    pub experiment: Experiment,
    pub preset: String,
    pub kernel: KernelSpec,
    pub contour: ContourConstants,
    #[serde(rename = "B")]
    pub base: u32,
    pub h_min: f64,
    pub tol: f64,
    pub eps: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub t_end: f64,
    pub n: usize,
    pub seed: u64,
    pub signal: Signal,
    pub times: Vec<f64>,
    pub halvings: usize,
    pub mesh: MeshSpec,
    pub matrices: Option<MatrixFiles>,
    pub max_steps: usize,
    pub out: PathBuf,
}

impl Resolved {
    fn preset(experiment: Experiment, preset: &str) -> Self {
        let mut r = Resolved {
            experiment,
            preset: preset.to_string(),
            kernel: KernelSpec::Power { nu: 0.5 },
            contour: ContourConstants::preset_k50(),
            base: 5,
            h_min: 1e-6,
            tol: 1e-4,
            eps: 1e-4,
            gamma: 0.0,
            alpha: 0.5,
            t_end: 5.0,
            n: 200,
            seed: 1,
            signal: Signal::Sin,
            times: vec![0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0],
            halvings: 5,
            mesh: MeshSpec { nx: 8, ny: 2 },
            matrices: None,
            max_steps: 1_000_000,
            out: PathBuf::from("out"),
        };
        match (experiment, preset) {
            (Experiment::Convolve | Experiment::OracleCompare, _) => {
                r.contour = ContourConstants::preset_k40();
                r.h_min = 1e-4;
            }
            (Experiment::ComplexitySweep, _) => {
                r.contour = ContourConstants::preset_k40();
                r.t_end = 1.0;
                r.h_min = 1e-3;
                r.signal = Signal::Cos;
            }
            (Experiment::Abel, "gamma-2") => {
                r.gamma = -2.0;
                r.tol = 1e-4;
                r.t_end = 10.0;
                r.h_min = 1e-12;
            }
            (Experiment::Abel, _) => {
                r.gamma = -2.5;
                r.tol = 1e-7;
                r.t_end = 1.0;
                r.h_min = 1e-12;
            }
            (Experiment::Fracrd, _) => {
                r.contour = ContourConstants::preset_k40();
                r.t_end = 30.0;
                r.n = 50;
            }
            (Experiment::Visco, _) => {
                r.contour = ContourConstants::preset_k35();
                r.kernel = KernelSpec::MittagLeffler { alpha: 0.5 };
                r.gamma = 0.3;
                r.t_end = 6.0;
                r.h_min = 1e-8;
            }
            (Experiment::Invert, _) => {}
        }
        r
    }
}

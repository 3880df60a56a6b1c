//! JSON run configuration.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use lgq_core::scan::{Engine, ScanWindow, DEFAULT_RESOLUTION};
use lgq_core::{ModelParams, OscillatorInit};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EngineChoice {
    #[default]
    Closed,
    Oracle,
}

impl From<EngineChoice> for Engine {
    fn from(e: EngineChoice) -> Self {
        match e {
            EngineChoice::Closed => Engine::Closed,
            EngineChoice::Oracle => Engine::Oracle,
        }
    }
}

/// Oscillator start, tagged by `kind`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitConfig {
    // braces so that stray keys are rejected
    Ground {},
    Thermal { nbar: f64 },
    /// `zeta e^{i theta}`; a negative `zeta` flips the squeezing axis.
    Squeezed {
        zeta: f64,
        #[serde(default)]
        theta: f64,
    },
    CoherentSuperposition { xi0: [f64; 2], xi1: [f64; 2] },
}

impl Default for InitConfig {
    fn default() -> Self {
        InitConfig::Ground {}
    }
}

impl InitConfig {
    pub fn to_init(self) -> OscillatorInit {
        match self {
            InitConfig::Ground {} => OscillatorInit::Ground,
            InitConfig::Thermal { nbar } => OscillatorInit::Thermal { nbar },
            InitConfig::Squeezed { zeta, theta } => OscillatorInit::Squeezed {
                zeta_abs: zeta.abs(),
                theta: if zeta < 0.0 { theta + PI } else { theta },
            },
            InitConfig::CoherentSuperposition { xi0, xi1 } => OscillatorInit::CoherentSuperposition {
                xi0: Complex64::new(xi0[0], xi0[1]),
                xi1: Complex64::new(xi1[0], xi1[1]),
            },
        }
    }
}

/// Scan window; omitted bounds default to `[0, 4 pi]` in `omega t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
}

fn default_resolution() -> usize {
    DEFAULT_RESOLUTION
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig { lo: None, hi: None, resolution: default_resolution() }
    }
}

/// Everything a run needs; omitted fields take the documented defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// `lambda^2`; give this or `lambda`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub omega_ratio: f64,
    #[serde(default)]
    pub phi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<[f64; 3]>,
    #[serde(default)]
    pub init: InitConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2: Option<f64>,
    /// Times and window bounds are multiples of pi.
    #[serde(default)]
    pub period_units: bool,
    #[serde(default)]
    pub engine: EngineChoice,
    #[serde(default)]
    pub window: WindowConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_fock: Option<usize>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if inner.is_data() {
                CliError::Schema { path, message: inner.to_string() }
            } else {
                CliError::Parse(inner.to_string())
            }
        })
    }

    pub fn lambda(&self) -> Result<f64> {
        match (self.lambda, self.lambda2) {
            (Some(_), Some(_)) => Err(CliError::Schema {
                path: "lambda2".into(),
                message: "give either `lambda` or `lambda2`, not both".into(),
            }),
            (Some(l), None) => Ok(l),
            (None, Some(l2)) if l2 >= 0.0 => Ok(l2.sqrt()),
            (None, Some(l2)) => Err(lgq_core::Error::NegativeCoupling(l2).into()),
            (None, None) => Err(CliError::Missing("lambda2")),
        }
    }

    pub fn params(&self) -> Result<ModelParams> {
        let mut p = ModelParams::new(self.lambda()?).with_omega_ratio(self.omega_ratio).with_phi(self.phi);
        if let Some(axis) = self.axis {
            p = p.with_axis(axis);
        }
        Ok(p)
    }

    pub fn init(&self) -> OscillatorInit {
        self.init.to_init()
    }

    /// A time in units of `omega t`.
    pub fn time(&self, raw: f64) -> f64 {
        if self.period_units {
            raw * PI
        } else {
            raw
        }
    }

    pub fn times(&self) -> Result<(f64, f64)> {
        let t1 = self.t1.ok_or(CliError::Missing("t1"))?;
        let t2 = self.t2.ok_or(CliError::Missing("t2"))?;
        Ok((self.time(t1), self.time(t2)))
    }

    pub fn scan_window(&self) -> ScanWindow {
        let lo = self.window.lo.map_or(0.0, |t| self.time(t));
        let hi = self.window.hi.map_or(4.0 * PI, |t| self.time(t));
        ScanWindow::new(lo, hi, self.window.resolution)
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    RunConfig::from_json(&text)
}

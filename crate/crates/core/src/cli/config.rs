//! Run configuration.
//!
//! A config file is a flat TOML document. Every key is optional and falls
//! back to the default listed on the corresponding field. Unknown keys are
//! rejected. Values are resolved in the order
//! defaults → preset → config file → command-line flags.
//!
//! ```toml
//! preset = "example1"
//! beta = 0.5
//! n_paths = 2000
//! out = "runs/example1.csv"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::clock::{StableIndex, TimeGrid};
use crate::error::{Error, Result};
use crate::lyapunov::LyapunovSpec;
use crate::sde::{CoefficientModel, CompensatedDrift, Method, Modulated, Waveform};
use crate::stability::{Example1Settings, Example2Settings, McParams};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "TCSDE_OUT_DIR";

/// Directory used when neither `out` nor the environment variable is set.
pub const FALLBACK_OUT_DIR: &str = "tcsde-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ModelFamily {
    LinearConstant,
    LinearTimeVarying,
    Example2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Experiment {
    /// Stay probability at `horizon` and `2·horizon`.
    Stay,
    /// Convergence probability at `horizon` and `2·horizon`.
    Convergence,
    DeltaSweep,
    Example1,
    Example2,
    Corollary,
}

/// Named parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Preset {
    /// Damped linear equation with strict Lyapunov conditions.
    Example1,
    /// As `example1` with `f1 = 2`: conditions violated.
    Example1Contrast,
    /// `ρ1 = 0`, `f1 = (1 − α) g1² / 2`: conditions hold with equality.
    Example1Equality,
    /// Bounded coefficients with the weighted Lyapunov function.
    Example2,
    /// Stay probabilities over a range of starting points.
    DeltaSweep,
    /// Classical versus time-changed convergence on a 3×3 coefficient grid.
    Corollary,
}

impl Preset {
    pub fn apply(self, c: &mut RunConfig) {
        let example1 = |c: &mut RunConfig| {
            c.model = ModelFamily::LinearConstant;
            c.rho1 = 1.0;
            c.f1 = -1.0;
            c.g1 = 1.0;
            c.alpha = 0.5;
            c.beta = 0.5;
            c.x0 = 0.01;
            c.r = 1.0;
            c.horizon = 10.0;
            c.experiment = Experiment::Example1;
        };
        match self {
            Preset::Example1 => example1(c),
            Preset::Example1Contrast => {
                example1(c);
                c.f1 = 2.0;
            }
            Preset::Example1Equality => {
                example1(c);
                c.rho1 = 0.0;
                c.f1 = 0.25;
            }
            Preset::Example2 => {
                c.model = ModelFamily::Example2;
                c.theta = 0.75;
                c.c = 0.5;
                c.freq = 1.0;
                c.b_offset = 1.0;
                c.b_amplitude = 0.0;
                c.b_freq = 0.0;
                c.alpha = 0.5;
                c.k = 0.5;
                c.beta = 0.8;
                c.x0 = 0.1;
                c.tol = 0.05;
                c.horizon = 20.0;
                c.h = 0.1;
                c.shells = vec![1e-4, 1e-3, 1e-2];
                c.method = Method::Duality;
                c.experiment = Experiment::Example2;
            }
            Preset::DeltaSweep => {
                example1(c);
                c.experiment = Experiment::DeltaSweep;
                c.x0_candidates = vec![0.0, 0.01, 0.05, 0.1, 0.2, 0.4, 0.6, 0.8];
            }
            Preset::Corollary => {
                c.beta = 0.8;
                c.x0 = 0.1;
                c.tol = 0.05;
                c.horizon = 20.0;
                c.f1_grid = vec![-0.5, -1.0, -2.0];
                c.g1_grid = vec![0.5, 1.0, 1.5];
                c.experiment = Experiment::Corollary;
            }
        }
    }
}

/// All settings of one run. Keys not used by a subcommand are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,

    /// Stability index of the subordinator. Default 0.5.
    pub beta: f64,
    /// Length of the real-time grid for `clock`, `simulate` and `validate`. Default 1.
    pub t_max: f64,
    /// Real-time step. Default 1e-3.
    pub dt: f64,
    /// Operational-time step of the subordinator. Default 1e-3.
    pub op_step: f64,

    /// Coefficient family. Default `linear_constant`.
    pub model: ModelFamily,
    /// Damping rate: `ρ = −rho1·x`. Constant part for `linear_time_varying`. Default 0.
    pub rho1: f64,
    /// `f = f1·x`. Default −1.
    pub f1: f64,
    /// `g = g1·x`. Default 1.
    pub g1: f64,
    /// Modulation `[a1, w1, a2, w2]` adding `a1·cos(w1·t) + a2·cos(w2·E_t)`
    /// to `rho1` for `linear_time_varying`. Default zeros.
    pub rho1_mod: [f64; 4],
    /// As `rho1_mod`, for `f1`.
    pub f1_mod: [f64; 4],
    /// As `rho1_mod`, for `g1`.
    pub g1_mod: [f64; 4],
    /// `example2`: `θ`. Default 0.75.
    pub theta: f64,
    /// `example2`: amplitude of the drift oscillation. Default 0.5.
    pub c: f64,
    /// `example2`: frequency of the drift oscillation. Default 1.
    pub freq: f64,
    /// `example2`: `b(s) = b_offset + b_amplitude·cos(b_freq·s)`. Default 1.
    pub b_offset: f64,
    /// Default 0.
    pub b_amplitude: f64,
    /// Default 0.
    pub b_freq: f64,

    /// Lyapunov exponent; the family follows the model. Default 0.5.
    pub alpha: f64,
    /// `example2`: claimed bound on the compensated drift integral. Default 0.5.
    pub k: f64,
    /// Radius of the local scans. Default 1.
    pub h: f64,
    /// Inner radii of the shells scanned for decay rates. Default `[0.1]`.
    pub shells: Vec<f64>,

    /// Initial value. Default 1.
    pub x0: f64,
    /// Integrator. Default `direct`.
    pub method: Method,
    /// Path index written by `simulate` and `clock`. Default 0.
    pub path: u64,
    /// `simulate`: second integrator to compare against.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compare_method: Option<Method>,
    /// `simulate`: largest accepted `|ΔX|` when comparing. Default 0.1.
    pub max_diff: f64,
    /// `clock`: write ensemble moments instead of one path. Default false.
    pub ensemble: bool,
    /// `clock`: also write `(s, U(s))`. Default false.
    pub write_operational: bool,

    /// Number of Monte Carlo paths. Default 10000.
    pub n_paths: usize,
    /// Master seed. Default 42.
    pub seed: u64,
    /// Stability horizon `T`. Default 10.
    pub horizon: f64,
    /// Exit radius. Default 1.
    pub r: f64,
    /// `example1`: starting point of the convergence runs. Default 0.1.
    pub x0_convergence: f64,
    /// Convergence tolerance. Default 0.05.
    pub tol: f64,
    /// Default 0.05.
    pub epsilon: f64,
    /// `stability` experiment. Default `stay`.
    pub experiment: Experiment,
    /// `delta_sweep`: starting points. Default `[0, 0.05, 0.1, 0.2, 0.4]`.
    pub x0_candidates: Vec<f64>,
    /// `corollary`: `f1` values. Default `[-0.5, -1, -2]`.
    pub f1_grid: Vec<f64>,
    /// `corollary`: `g1` values. Default `[0.5, 1, 1.5]`.
    pub g1_grid: Vec<f64>,

    /// `validate`: stability indices. Default `[0.3, 0.5, 0.8]`.
    pub betas: Vec<f64>,
    /// `validate`: factor applied to simulated clock values before the
    /// moment checks; anything but 1 injects a bias. Default 1.
    pub clock_scale: f64,

    /// Output file. Default `$TCSDE_OUT_DIR/<command>.<format>`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Default `csv`.
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            preset: None,
            beta: 0.5,
            t_max: 1.0,
            dt: 1e-3,
            op_step: 1e-3,
            model: ModelFamily::LinearConstant,
            rho1: 0.0,
            f1: -1.0,
            g1: 1.0,
            rho1_mod: [0.0; 4],
            f1_mod: [0.0; 4],
            g1_mod: [0.0; 4],
            theta: 0.75,
            c: 0.5,
            freq: 1.0,
            b_offset: 1.0,
            b_amplitude: 0.0,
            b_freq: 0.0,
            alpha: 0.5,
            k: 0.5,
            h: 1.0,
            shells: vec![0.1],
            x0: 1.0,
            method: Method::Direct,
            path: 0,
            compare_method: None,
            max_diff: 0.1,
            ensemble: false,
            write_operational: false,
            n_paths: 10_000,
            seed: 42,
            horizon: 10.0,
            r: 1.0,
            x0_convergence: 0.1,
            tol: 0.05,
            epsilon: 0.05,
            experiment: Experiment::Stay,
            x0_candidates: vec![0.0, 0.05, 0.1, 0.2, 0.4],
            f1_grid: vec![-0.5, -1.0, -2.0],
            g1_grid: vec![0.5, 1.0, 1.5],
            betas: vec![0.3, 0.5, 0.8],
            clock_scale: 1.0,
            out: None,
            format: Format::Csv,
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub beta: Option<f64>,
    pub dt: Option<f64>,
    pub op_step: Option<f64>,
    pub t_max: Option<f64>,
    pub n_paths: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub method: Option<Method>,
}

fn config_err(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(config_err)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(config_err)
    }

    /// Resolve defaults, preset, config file and overrides, then validate.
    pub fn resolve(file: Option<&Path>, preset: Option<Preset>, overrides: &Overrides) -> Result<Self> {
        let file_table = match file {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                toml::from_str::<toml::Table>(&text).map_err(config_err)?
            }
            None => toml::Table::new(),
        };
        let file_preset = match file_table.get("preset") {
            Some(v) => Some(v.clone().try_into::<Preset>().map_err(config_err)?),
            None => None,
        };
        let preset = preset.or(file_preset);
        let mut base = RunConfig::default();
        if let Some(p) = preset {
            p.apply(&mut base);
        }
        let mut merged = toml::Table::try_from(&base).map_err(config_err)?;
        merged.extend(file_table);
        let mut cfg: RunConfig = toml::Value::Table(merged).try_into().map_err(config_err)?;
        cfg.preset = preset;
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = o.$f.clone() { self.$f = v; })* };
        }
        set!(beta, dt, op_step, t_max, n_paths, seed, format, method);
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
    }

    pub fn validate(&self) -> Result<()> {
        StableIndex::new(self.beta).map_err(config_err)?;
        TimeGrid::new(self.t_max, self.dt).map_err(config_err)?;
        if !(self.op_step > 0.0 && self.op_step.is_finite()) {
            return Err(Error::Config(format!("op_step must be positive, got {}", self.op_step)));
        }
        if self.n_paths == 0 {
            return Err(Error::Config("n_paths must be at least 1".into()));
        }
        if !self.x0.is_finite() {
            return Err(Error::Config("x0 must be finite".into()));
        }
        Ok(())
    }

    pub fn stable_index(&self) -> Result<StableIndex> {
        StableIndex::new(self.beta)
    }

    pub fn coefficient_model(&self) -> CoefficientModel {
        let modulated = |c0: f64, m: [f64; 4]| Modulated { c0, a1: m[0], w1: m[1], a2: m[2], w2: m[3] };
        match self.model {
            ModelFamily::LinearConstant => CoefficientModel::linear(self.rho1, self.f1, self.g1),
            ModelFamily::LinearTimeVarying => CoefficientModel::LinearTimeVarying {
                rho1: modulated(self.rho1, self.rho1_mod),
                f1: modulated(self.f1, self.f1_mod),
                g1: modulated(self.g1, self.g1_mod),
            },
            ModelFamily::Example2 => CoefficientModel::Example2 {
                drift: CompensatedDrift { c: self.c, freq: self.freq },
                b: self.waveform(),
                theta: self.theta,
            },
        }
    }

    pub fn waveform(&self) -> Waveform {
        Waveform { offset: self.b_offset, amplitude: self.b_amplitude, freq: self.b_freq }
    }

    /// Power law for linear models, the weighted form for `example2`.
    pub fn lyapunov_spec(&self) -> Result<LyapunovSpec> {
        match self.model {
            ModelFamily::Example2 => LyapunovSpec::for_model(&self.coefficient_model(), self.alpha),
            _ => LyapunovSpec::power_law(self.alpha),
        }
    }

    pub fn mc_params(&self) -> McParams {
        McParams { n_paths: self.n_paths, seed: self.seed, dt: self.dt, op_step: self.op_step, method: self.method }
    }

    pub fn example1_settings(&self) -> Example1Settings {
        Example1Settings {
            stay_x0: self.x0,
            r: self.r,
            stay_horizon: self.horizon,
            convergence_x0: self.x0_convergence,
            tol: self.tol,
            convergence_horizons: vec![0.5 * self.horizon, self.horizon, 2.0 * self.horizon],
            epsilon: self.epsilon,
            mc: self.mc_params(),
        }
    }

    pub fn example2_settings(&self) -> Example2Settings {
        Example2Settings { x0: self.x0, tol: self.tol, horizon: self.horizon, h: self.h, epsilon: self.epsilon, mc: self.mc_params() }
    }

    /// `out`, or `<dir>/<command>.<ext>` with `dir` from the environment.
    pub fn output_path(&self, command: &str) -> PathBuf {
        match &self.out {
            Some(p) => p.clone(),
            None => {
                let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(FALLBACK_OUT_DIR));
                dir.join(format!("{command}.{}", self.format.extension()))
            }
        }
    }
}

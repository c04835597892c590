//! Coefficient models and integrators for
//!
//! ```text
//! dX(t) = ρ(t, E_t, X) dt + f(t, E_t, X) dE_t + g(t, E_t, X) dB(E_t)
//! ```
//!
//! All coefficients are evaluated at the left end of each step
//! `(t_k, E_{t_k}, X_k)`.
//!
//! The model registry is closed so that every run can be written to and
//! read back from a config file. To add a family, add a variant to
//! [`CoefficientModel`] and extend [`CoefficientModel::rates`] (and
//! [`CoefficientModel::is_autonomous`] / [`CoefficientModel::coefficient_bound`]).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clock::{ClockPath, TimeGrid};
use crate::error::{Error, Result};
use crate::noise::NoisePath;

/// Trajectories whose magnitude exceeds this are cut off and flagged.
pub const DEFAULT_OVERFLOW_GUARD: f64 = 1e12;

/// Default real-time step.
pub const DEFAULT_DT: f64 = 1e-3;

/// Bounded coefficient `c0 + a1·cos(w1·t1) + a2·cos(w2·t2)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Modulated {
    pub c0: f64,
    pub a1: f64,
    pub w1: f64,
    pub a2: f64,
    pub w2: f64,
}

impl Modulated {
    pub fn constant(c0: f64) -> Self {
        Self { c0, ..Self::default() }
    }

    #[inline]
    pub fn eval(&self, t1: f64, t2: f64) -> f64 {
        self.c0 + self.a1 * (self.w1 * t1).cos() + self.a2 * (self.w2 * t2).cos()
    }

    pub fn bound(&self) -> f64 {
        self.c0.abs() + self.a1.abs() + self.a2.abs()
    }

    pub fn depends_on_t1(&self) -> bool {
        self.a1 != 0.0 && self.w1 != 0.0
    }

    pub fn is_zero(&self) -> bool {
        self.c0 == 0.0 && self.a1 == 0.0 && self.a2 == 0.0
    }
}

/// `b(s) = offset + amplitude·cos(freq·s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waveform {
    pub offset: f64,
    pub amplitude: f64,
    pub freq: f64,
}

impl Waveform {
    pub fn constant(offset: f64) -> Self {
        Self { offset, amplitude: 0.0, freq: 0.0 }
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        self.offset + self.amplitude * (self.freq * s).cos()
    }

    /// `sup_s b(s)²`, exact.
    pub fn sup_square(&self) -> f64 {
        if self.amplitude == 0.0 || self.freq == 0.0 {
            (self.offset + self.amplitude).powi(2)
        } else {
            (self.offset.abs() + self.amplitude.abs()).powi(2)
        }
    }
}

/// Drift of the form `a(s) = b(s)²/2 − θ + c·cos(freq·s)`, for which
/// `∫₀ˢ (a − b²/2 + θ) = c·sin(freq·s)/freq` is bounded by `|c|/freq`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompensatedDrift {
    pub c: f64,
    pub freq: f64,
}

impl CompensatedDrift {
    #[inline]
    pub fn eval(&self, b: &Waveform, theta: f64, s: f64) -> f64 {
        let bs = b.eval(s);
        0.5 * bs * bs - theta + self.c * (self.freq * s).cos()
    }

    /// `∫₀ˢ (a(u) − b(u)²/2 + θ) du`.
    #[inline]
    pub fn compensated_integral(&self, s: f64) -> f64 {
        if self.c == 0.0 {
            0.0
        } else {
            self.c * (self.freq * s).sin() / self.freq
        }
    }

    /// `sup_s |∫₀ˢ (a − b²/2 + θ)|`; infinite when the integral is unbounded.
    pub fn certified_bound(&self) -> f64 {
        if self.c == 0.0 {
            0.0
        } else if self.freq > 0.0 {
            self.c.abs() / self.freq
        } else {
            f64::INFINITY
        }
    }
}

/// Rates of a linear model at `(t1, t2)`:
/// `ρ = −rho1·x`, `f = f1·x`, `g = g1·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearRates {
    pub rho1: f64,
    pub f1: f64,
    pub g1: f64,
}

/// The coefficient triple (ρ, f, g).
///
/// Every registered family is linear in `x` and vanishes at `x = 0`. The
/// real-time drift carries a minus sign, `ρ(t1, t2, x) = −rho1(t1, t2)·x`, so
/// a positive `rho1` damps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientModel {
    LinearConstant { rho1: f64, f1: f64, g1: f64 },
    LinearTimeVarying { rho1: Modulated, f1: Modulated, g1: Modulated },
    /// `ρ = 0`, `f = a(t2)·x`, `g = b(t2)·x`.
    Example2 { drift: CompensatedDrift, b: Waveform, theta: f64 },
}

impl CoefficientModel {
    pub fn linear(rho1: f64, f1: f64, g1: f64) -> Self {
        CoefficientModel::LinearConstant { rho1, f1, g1 }
    }

    pub fn zero() -> Self {
        Self::linear(0.0, 0.0, 0.0)
    }

    #[inline]
    pub fn rates(&self, t1: f64, t2: f64) -> LinearRates {
        match *self {
            CoefficientModel::LinearConstant { rho1, f1, g1 } => LinearRates { rho1, f1, g1 },
            CoefficientModel::LinearTimeVarying { rho1, f1, g1 } => LinearRates {
                rho1: rho1.eval(t1, t2),
                f1: f1.eval(t1, t2),
                g1: g1.eval(t1, t2),
            },
            CoefficientModel::Example2 { drift, b, theta } => LinearRates {
                rho1: 0.0,
                f1: drift.eval(&b, theta, t2),
                g1: b.eval(t2),
            },
        }
    }

    /// `(ρ, f, g)` at `(t1, t2, x)`.
    #[inline]
    pub fn coefficients(&self, t1: f64, t2: f64, x: f64) -> (f64, f64, f64) {
        let r = self.rates(t1, t2);
        (-r.rho1 * x, r.f1 * x, r.g1 * x)
    }

    pub fn rho(&self, t1: f64, t2: f64, x: f64) -> f64 {
        self.coefficients(t1, t2, x).0
    }

    pub fn f(&self, t1: f64, t2: f64, x: f64) -> f64 {
        self.coefficients(t1, t2, x).1
    }

    pub fn g(&self, t1: f64, t2: f64, x: f64) -> f64 {
        self.coefficients(t1, t2, x).2
    }

    /// Upper bound `L` on `|rho1| + |f1| + |g1|` over all times.
    pub fn coefficient_bound(&self) -> f64 {
        match *self {
            CoefficientModel::LinearConstant { rho1, f1, g1 } => rho1.abs() + f1.abs() + g1.abs(),
            CoefficientModel::LinearTimeVarying { rho1, f1, g1 } => rho1.bound() + f1.bound() + g1.bound(),
            CoefficientModel::Example2 { drift, b, theta } => {
                let sup_b2 = b.sup_square();
                0.5 * sup_b2 + theta.abs() + drift.c.abs() + sup_b2.sqrt()
            }
        }
    }

    /// `ρ ≡ 0` and no explicit real-time dependence, the form required by the
    /// duality integrator.
    pub fn is_autonomous(&self) -> bool {
        match *self {
            CoefficientModel::LinearConstant { rho1, .. } => rho1 == 0.0,
            CoefficientModel::LinearTimeVarying { rho1, f1, g1 } => {
                rho1.is_zero() && !f1.depends_on_t1() && !g1.depends_on_t1()
            }
            CoefficientModel::Example2 { .. } => true,
        }
    }

    /// Short human-readable identifier for run metadata.
    pub fn id(&self) -> String {
        match *self {
            CoefficientModel::LinearConstant { rho1, f1, g1 } => {
                format!("linear_constant(rho1={rho1},f1={f1},g1={g1})")
            }
            CoefficientModel::LinearTimeVarying { .. } => "linear_time_varying".to_string(),
            CoefficientModel::Example2 { drift, b, theta } => format!(
                "example2(theta={theta},c={},freq={},b=[{},{},{}])",
                drift.c, drift.freq, b.offset, b.amplitude, b.freq
            ),
        }
    }
}

/// Which integrator produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Direct,
    Duality,
    ClosedForm,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Direct => "direct",
            Method::Duality => "duality",
            Method::ClosedForm => "closed_form",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Method::Direct),
            "duality" => Ok(Method::Duality),
            "closed_form" => Ok(Method::ClosedForm),
            other => Err(Error::Config(format!("unknown method '{other}'"))),
        }
    }
}

/// Solution values on the real-time grid.
///
/// When the solution leaves the overflow guard, `x_values` stops at the last
/// value inside the guard and `diverged_at` holds the index of the first
/// step that left it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub x_values: Vec<f64>,
    pub clock_ref: u64,
    pub noise_ref: u64,
    pub method: Method,
    pub diverged_at: Option<usize>,
}

impl Trajectory {
    pub fn is_diverged(&self) -> bool {
        self.diverged_at.is_some()
    }

    pub fn terminal(&self) -> Option<f64> {
        if self.is_diverged() {
            None
        } else {
            self.x_values.last().copied()
        }
    }
}

/// One explicit Euler increment. Shared with the Itô-formula checker so the
/// two evaluate identical floating-point expressions.
#[inline]
pub fn euler_increment(rho: f64, f: f64, g: f64, dt: f64, de: f64, db: f64) -> f64 {
    rho * dt + f * de + g * db
}

fn check_pair(clock: &ClockPath, noise: &NoisePath) -> Result<()> {
    if clock.grid() != noise.grid() {
        return Err(Error::GridMismatch("clock and noise are on different grids".into()));
    }
    if noise.clock_ref() != clock.id() {
        return Err(Error::GridMismatch("noise path was not sampled on this clock".into()));
    }
    Ok(())
}

fn check_x0(x0: f64) -> Result<()> {
    if x0.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("initial value must be finite, got {x0}")))
    }
}

/// Explicit Euler on the hybrid clock:
/// `X_{k+1} = X_k + ρ_k Δt + f_k ΔE_k + g_k ΔB_k`.
pub fn integrate_direct(model: &CoefficientModel, clock: &ClockPath, noise: &NoisePath, x0: f64) -> Result<Trajectory> {
    integrate_direct_with_guard(model, clock, noise, x0, DEFAULT_OVERFLOW_GUARD)
}

pub fn integrate_direct_with_guard(
    model: &CoefficientModel,
    clock: &ClockPath,
    noise: &NoisePath,
    x0: f64,
    guard: f64,
) -> Result<Trajectory> {
    check_pair(clock, noise)?;
    check_x0(x0)?;
    let grid = *clock.grid();
    let (e, b) = (clock.e_values(), noise.values());
    let mut xs = Vec::with_capacity(grid.len());
    xs.push(x0);
    let mut x = x0;
    let mut diverged_at = None;
    for k in 0..grid.n_steps() {
        let (t, t_next) = (grid.t(k), grid.t(k + 1));
        let (rho, f, g) = model.coefficients(t, e[k], x);
        let next = x + euler_increment(rho, f, g, t_next - t, e[k + 1] - e[k], b[k + 1] - b[k]);
        if !(next.abs() <= guard) {
            diverged_at = Some(k + 1);
            break;
        }
        xs.push(next);
        x = next;
    }
    Ok(Trajectory { grid, x_values: xs, clock_ref: clock.id(), noise_ref: noise.id(), method: Method::Direct, diverged_at })
}

/// Solve the classical equation `dY = f(s, Y) ds + g(s, Y) dB_s` by Euler on
/// the operational times visited by the clock, with the same Brownian
/// increments, and report `X(t) = Y(E_t)`.
pub fn integrate_via_duality(model: &CoefficientModel, clock: &ClockPath, noise: &NoisePath, x0: f64) -> Result<Trajectory> {
    if !model.is_autonomous() {
        return Err(Error::UnsupportedModel(format!(
            "duality integration needs ρ ≡ 0 and no real-time dependence, got {}",
            model.id()
        )));
    }
    check_pair(clock, noise)?;
    check_x0(x0)?;
    let grid = *clock.grid();
    let (e, b) = (clock.e_values(), noise.values());
    let mut xs = Vec::with_capacity(grid.len());
    xs.push(x0);
    let mut y = x0;
    let mut diverged_at = None;
    for k in 0..grid.n_steps() {
        let ds = e[k + 1] - e[k];
        if ds > 0.0 {
            let (_, f, g) = model.coefficients(0.0, e[k], y);
            y += euler_increment(0.0, f, g, 0.0, ds, b[k + 1] - b[k]);
            if !(y.abs() <= DEFAULT_OVERFLOW_GUARD) {
                diverged_at = Some(k + 1);
                break;
            }
        }
        xs.push(y);
    }
    Ok(Trajectory { grid, x_values: xs, clock_ref: clock.id(), noise_ref: noise.id(), method: Method::Duality, diverged_at })
}

/// Exact solution of the constant-coefficient linear equation
/// `dX = f1 X dE + g1 X dB(E)`:
/// `X(t) = x0 · exp((f1 − g1²/2) E_t + g1 B(E_t))`.
pub fn closed_form_linear(x0: f64, f1: f64, g1: f64, clock: &ClockPath, noise: &NoisePath) -> Result<Trajectory> {
    closed_form_linear_damped(x0, 0.0, f1, g1, clock, noise)
}

/// As [`closed_form_linear`] with an additional real-time term `−rho1·X dt`,
/// contributing the factor `exp(−rho1·t)`.
pub fn closed_form_linear_damped(
    x0: f64,
    rho1: f64,
    f1: f64,
    g1: f64,
    clock: &ClockPath,
    noise: &NoisePath,
) -> Result<Trajectory> {
    check_pair(clock, noise)?;
    check_x0(x0)?;
    let grid = *clock.grid();
    let (e, b) = (clock.e_values(), noise.values());
    let drift = f1 - 0.5 * g1 * g1;
    let mut xs = Vec::with_capacity(grid.len());
    let mut diverged_at = None;
    for k in 0..grid.len() {
        let x = x0 * (-rho1 * grid.t(k) + drift * e[k] + g1 * b[k]).exp();
        if !(x.abs() <= DEFAULT_OVERFLOW_GUARD) {
            diverged_at = Some(k);
            break;
        }
        xs.push(x);
    }
    Ok(Trajectory {
        grid,
        x_values: xs,
        clock_ref: clock.id(),
        noise_ref: noise.id(),
        method: Method::ClosedForm,
        diverged_at,
    })
}

/// Dispatch on `method`. The closed form is available for
/// [`CoefficientModel::LinearConstant`] only.
pub fn integrate(method: Method, model: &CoefficientModel, clock: &ClockPath, noise: &NoisePath, x0: f64) -> Result<Trajectory> {
    match method {
        Method::Direct => integrate_direct(model, clock, noise, x0),
        Method::Duality => integrate_via_duality(model, clock, noise, x0),
        Method::ClosedForm => match *model {
            CoefficientModel::LinearConstant { rho1, f1, g1 } => closed_form_linear_damped(x0, rho1, f1, g1, clock, noise),
            _ => Err(Error::UnsupportedModel(format!("no closed form for {}", model.id()))),
        },
    }
}

/// Sample point attaining the Lipschitz estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbePoint {
    pub t1: f64,
    pub t2: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipschitzEstimate {
    pub constant: f64,
    pub argmax: Option<ProbePoint>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
}

/// Largest summed difference quotient
/// `(|Δρ| + |Δf| + |Δg|) / |x − y|` over a uniform sample of `samples` points
/// per axis.
pub fn lipschitz_probe(
    model: &CoefficientModel,
    x_range: (f64, f64),
    t1_range: (f64, f64),
    t2_range: (f64, f64),
    samples: usize,
) -> Result<LipschitzEstimate> {
    for (lo, hi) in [x_range, t1_range, t2_range] {
        if !(lo <= hi) {
            return Err(Error::domain(format!("empty probe range [{lo}, {hi}]")));
        }
    }
    if samples < 2 || x_range.0 == x_range.1 {
        return Err(Error::domain("Lipschitz probe needs at least two distinct x samples"));
    }
    let xs: Vec<f64> = linspace(x_range.0, x_range.1, samples).collect();
    let mut best = LipschitzEstimate { constant: 0.0, argmax: None };
    for t1 in linspace(t1_range.0, t1_range.1, samples) {
        for t2 in linspace(t2_range.0, t2_range.1, samples) {
            for (i, &x) in xs.iter().enumerate() {
                let cx = model.coefficients(t1, t2, x);
                for &y in &xs[i + 1..] {
                    let cy = model.coefficients(t1, t2, y);
                    let q = ((cx.0 - cy.0).abs() + (cx.1 - cy.1).abs() + (cx.2 - cy.2).abs()) / (x - y).abs();
                    if q > best.constant {
                        best = LipschitzEstimate { constant: q, argmax: Some(ProbePoint { t1, t2, x, y }) };
                    }
                }
            }
        }
    }
    Ok(best)
}

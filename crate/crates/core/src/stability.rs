//! Monte Carlo estimates of stability probabilities.
//!
//! The events quantify over all `t ≥ 0`; here they are observed on a finite
//! horizon `[0, T]` on the real-time grid:
//!
//! - *stay*: `max_k |X_k| < r` for all grid times up to `T`;
//! - *convergence*: `|X(T)| < tol`.
//!
//! Exits between grid points are not detected, so stay probabilities are
//! biased upwards. Paths that leave the overflow guard count as failures.
//!
//! Path `i` always uses substream `(seed, i)`, and per-path outcomes are
//! collected in path order before being counted, so results do not depend
//! on the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clock::{StableIndex, TimeGrid, DEFAULT_OP_STEP};
use crate::error::{Error, Result};
use crate::lyapunov::{
    default_radial_probe, l2_operator, scan_theorem1, scan_theorem2, scan_theorem3, Axis, ConditionResult, Density,
    LyapunovSpec, ScanBox, ScanPoint, ScanReport, Verdict,
};
use crate::noise::{classical_paths, coupled_paths};
use crate::rng::PathStreams;
use crate::sde::{closed_form_linear_damped, integrate, CoefficientModel, CompensatedDrift, Method, Trajectory, Waveform, DEFAULT_DT};
use crate::stats::proportion_half_width;

pub const DEFAULT_N_PATHS: usize = 10_000;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_R: f64 = 1.0;
pub const DEFAULT_TOL: f64 = 0.05;
pub const DEFAULT_EPSILON: f64 = 0.05;
pub const DEFAULT_HORIZON: f64 = 10.0;

/// Driving clock of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClockSpec {
    /// Inverse β-stable subordinator.
    Inverse(StableIndex),
    /// `E_t = t`: the classical equation.
    Identity,
}

impl From<StableIndex> for ClockSpec {
    fn from(beta: StableIndex) -> Self {
        ClockSpec::Inverse(beta)
    }
}

impl ClockSpec {
    pub fn beta(&self) -> Option<f64> {
        match self {
            ClockSpec::Inverse(b) => Some(b.value()),
            ClockSpec::Identity => None,
        }
    }
}

/// Simulation settings shared by all estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McParams {
    pub n_paths: usize,
    pub seed: u64,
    pub dt: f64,
    pub op_step: f64,
    pub method: Method,
}

impl Default for McParams {
    fn default() -> Self {
        Self { n_paths: DEFAULT_N_PATHS, seed: DEFAULT_SEED, dt: DEFAULT_DT, op_step: DEFAULT_OP_STEP, method: Method::Direct }
    }
}

impl McParams {
    fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::domain("at least one path is required"));
        }
        if !(self.dt > 0.0 && self.op_step > 0.0) {
            return Err(Error::domain("dt and op_step must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    /// `max_{t ≤ T} |X(t)| < r` on the grid.
    Stay,
    /// `|X(T)| < tol`.
    Converge,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateMeta {
    pub event: Event,
    pub seed: u64,
    pub dt: f64,
    pub op_step: f64,
    /// `None` for the identity clock.
    pub beta: Option<f64>,
    pub model: String,
    pub method: Method,
    pub diverged_paths: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityEstimate {
    pub probability: f64,
    /// 95% normal-approximation half width.
    pub ci_half_width: f64,
    pub n_paths: usize,
    pub successes: usize,
    pub horizon: f64,
    /// `r` for stay events, `tol` for convergence events.
    pub threshold: f64,
    pub x0: f64,
    pub metadata: EstimateMeta,
}

impl StabilityEstimate {
    pub fn at_least(&self, level: f64) -> bool {
        self.probability >= level
    }
}

/// One simulated path on the real-time grid.
fn simulate_path(model: &CoefficientModel, clock: ClockSpec, x0: f64, grid: TimeGrid, params: &McParams, path: u64) -> Result<Trajectory> {
    let streams = PathStreams::new(params.seed, path);
    let (c, n) = match clock {
        ClockSpec::Inverse(beta) => coupled_paths(beta, grid, params.op_step, streams)?,
        ClockSpec::Identity => classical_paths(grid, streams)?,
    };
    integrate(params.method, model, &c, &n, x0)
}

/// Grid index of every horizon, checked against a common grid.
fn horizon_indices(horizons: &[f64], dt: f64) -> Result<(TimeGrid, Vec<usize>)> {
    if horizons.is_empty() {
        return Err(Error::domain("at least one horizon is required"));
    }
    let mut indices = Vec::with_capacity(horizons.len());
    let mut longest = 0.0f64;
    for &t in horizons {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::domain(format!("horizon must be positive, got {t}")));
        }
        indices.push(TimeGrid::new(t, dt)?.n_steps());
        longest = longest.max(t);
    }
    Ok((TimeGrid::new(longest, dt)?, indices))
}

/// Whether the event holds up to grid index `k`, and whether the path left
/// the overflow guard by then.
fn event_holds(tr: &Trajectory, event: Event, k: usize, threshold: f64) -> (bool, bool) {
    if tr.x_values.len() <= k {
        return (false, true);
    }
    let hit = match event {
        Event::Stay => tr.x_values[..=k].iter().all(|x| x.abs() < threshold),
        Event::Converge => tr.x_values[k].abs() < threshold,
    };
    (hit, false)
}

#[allow(clippy::too_many_arguments)]
fn estimate_many(
    event: Event,
    model: &CoefficientModel,
    clock: ClockSpec,
    x0: f64,
    threshold: f64,
    horizons: &[f64],
    params: &McParams,
) -> Result<Vec<StabilityEstimate>> {
    params.validate()?;
    let (grid, indices) = horizon_indices(horizons, params.dt)?;
    let outcomes: Vec<Vec<(bool, bool)>> = (0..params.n_paths as u64)
        .into_par_iter()
        .map(|path| {
            let tr = simulate_path(model, clock, x0, grid, params, path)?;
            Ok(indices.iter().map(|&k| event_holds(&tr, event, k, threshold)).collect())
        })
        .collect::<Result<_>>()?;
    let n = params.n_paths;
    Ok(horizons
        .iter()
        .enumerate()
        .map(|(h, &t)| {
            let successes = outcomes.iter().filter(|o| o[h].0).count();
            let diverged = outcomes.iter().filter(|o| o[h].1).count();
            let p = successes as f64 / n as f64;
            StabilityEstimate {
                probability: p,
                ci_half_width: proportion_half_width(p, n),
                n_paths: n,
                successes,
                horizon: t,
                threshold,
                x0,
                metadata: EstimateMeta {
                    event,
                    seed: params.seed,
                    dt: params.dt,
                    op_step: params.op_step,
                    beta: clock.beta(),
                    model: model.id(),
                    method: params.method,
                    diverged_paths: diverged,
                },
            }
        })
        .collect())
}

fn check_stay_inputs(x0: f64, r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("exit radius must be positive, got {r}")));
    }
    if !(x0.abs() < r) {
        return Err(Error::domain(format!("|x0| = {} must be below r = {r}", x0.abs())));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("tolerance must be positive, got {tol}")))
    }
}

/// `P(max_{t ≤ T} |X(t)| < r)` on the grid. `x0 = 0` is accepted.
pub fn estimate_stay_probability(
    model: &CoefficientModel,
    clock: impl Into<ClockSpec>,
    x0: f64,
    r: f64,
    horizon: f64,
    params: &McParams,
) -> Result<StabilityEstimate> {
    Ok(estimate_stay_probabilities(model, clock, x0, r, &[horizon], params)?.remove(0))
}

/// Stay probabilities at several horizons from one set of paths.
pub fn estimate_stay_probabilities(
    model: &CoefficientModel,
    clock: impl Into<ClockSpec>,
    x0: f64,
    r: f64,
    horizons: &[f64],
    params: &McParams,
) -> Result<Vec<StabilityEstimate>> {
    check_stay_inputs(x0, r)?;
    estimate_many(Event::Stay, model, clock.into(), x0, r, horizons, params)
}

/// `P(|X(T)| < tol)`.
pub fn estimate_convergence_probability(
    model: &CoefficientModel,
    clock: impl Into<ClockSpec>,
    x0: f64,
    tol: f64,
    horizon: f64,
    params: &McParams,
) -> Result<StabilityEstimate> {
    Ok(estimate_convergence_probabilities(model, clock, x0, tol, &[horizon], params)?.remove(0))
}

/// Convergence probabilities at several horizons from one set of paths.
pub fn estimate_convergence_probabilities(
    model: &CoefficientModel,
    clock: impl Into<ClockSpec>,
    x0: f64,
    tol: f64,
    horizons: &[f64],
    params: &McParams,
) -> Result<Vec<StabilityEstimate>> {
    check_tol(tol)?;
    if !x0.is_finite() {
        return Err(Error::domain("initial value must be finite"));
    }
    estimate_many(Event::Converge, model, clock.into(), x0, tol, horizons, params)
}

/// Whether consecutive estimates are ordered as expected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotoneFlag {
    Ordered,
    /// Out of order by less than the summed CI half widths.
    WithinNoise,
    Violated,
}

fn monotone_flag(prev: &StabilityEstimate, next: &StabilityEstimate, increasing: bool) -> MonotoneFlag {
    let gap = if increasing { prev.probability - next.probability } else { next.probability - prev.probability };
    if gap <= 0.0 {
        MonotoneFlag::Ordered
    } else if gap <= prev.ci_half_width + next.ci_half_width {
        MonotoneFlag::WithinNoise
    } else {
        MonotoneFlag::Violated
    }
}

/// Flags for a sequence expected to be nondecreasing.
pub fn nondecreasing_flags(estimates: &[StabilityEstimate]) -> Vec<MonotoneFlag> {
    let mut flags = vec![MonotoneFlag::Ordered];
    flags.extend(estimates.windows(2).map(|w| monotone_flag(&w[0], &w[1], true)));
    flags.truncate(estimates.len());
    flags
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaRow {
    pub x0: f64,
    pub estimate: StabilityEstimate,
    /// Against the previous (smaller) candidate; estimates should not increase.
    pub monotone: MonotoneFlag,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaSweep {
    pub r: f64,
    pub epsilon: f64,
    pub rows: Vec<DeltaRow>,
    /// Largest candidate with stay probability at least `1 − ε`.
    pub empirical_delta: Option<f64>,
}

/// Stay probability for each starting point in `candidates`, all run on the
/// same random paths.
pub fn delta_sweep(
    model: &CoefficientModel,
    clock: impl Into<ClockSpec>,
    r: f64,
    epsilon: f64,
    candidates: &[f64],
    horizon: f64,
    params: &McParams,
) -> Result<DeltaSweep> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if candidates.is_empty() || candidates[0] < 0.0 || candidates.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("candidates must be nonnegative and strictly increasing"));
    }
    let clock = clock.into();
    let mut rows: Vec<DeltaRow> = Vec::with_capacity(candidates.len());
    for &x0 in candidates {
        let estimate = estimate_stay_probability(model, clock, x0, r, horizon, params)?;
        let monotone = rows.last().map_or(MonotoneFlag::Ordered, |prev| monotone_flag(&prev.estimate, &estimate, false));
        rows.push(DeltaRow { x0, estimate, monotone });
    }
    let empirical_delta = rows.iter().rev().find(|row| row.estimate.at_least(1.0 - epsilon)).map(|row| row.x0);
    Ok(DeltaSweep { r, epsilon, rows, empirical_delta })
}

/// Threshold event for the transfer test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Stay { r: f64 },
    Converge { tol: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferReport {
    pub f1: f64,
    pub g1: f64,
    pub epsilon: f64,
    pub classical: StabilityEstimate,
    pub time_changed: StabilityEstimate,
    pub classical_stable: bool,
    pub time_changed_stable: bool,
    /// Classical estimate ≥ 1 − ε implies time-changed estimate
    /// ≥ 1 − ε − √(hw_c² + hw_tc²).
    pub implication_holds: bool,
    /// Time-changed estimate ≥ classical − 2·√(hw_c² + hw_tc²). Informational.
    pub no_degradation: bool,
}

/// The same estimator on `dY = f1 Y ds + g1 Y dB_s` (identity clock) and on
/// `dX = f1 X dE + g1 X dB(E)`.
#[allow(clippy::too_many_arguments)]
pub fn corollary_transfer_test(
    f1: f64,
    g1: f64,
    beta: StableIndex,
    x0: f64,
    criterion: Criterion,
    horizon: f64,
    epsilon: f64,
    params: &McParams,
) -> Result<TransferReport> {
    let model = CoefficientModel::linear(0.0, f1, g1);
    let run = |clock: ClockSpec| match criterion {
        Criterion::Stay { r } => estimate_stay_probability(&model, clock, x0, r, horizon, params),
        Criterion::Converge { tol } => estimate_convergence_probability(&model, clock, x0, tol, horizon, params),
    };
    let classical = run(ClockSpec::Identity)?;
    let time_changed = run(ClockSpec::Inverse(beta))?;
    let level = 1.0 - epsilon;
    let classical_stable = classical.at_least(level);
    let time_changed_stable = time_changed.at_least(level);
    let combined = classical.ci_half_width.hypot(time_changed.ci_half_width);
    Ok(TransferReport {
        f1,
        g1,
        epsilon,
        no_degradation: time_changed.probability >= classical.probability - 2.0 * combined,
        implication_holds: !classical_stable || time_changed.probability >= level - combined,
        classical,
        time_changed,
        classical_stable,
        time_changed_stable,
    })
}

/// Agreement of an event between the Euler and the exact solution driven
/// by the same clock and noise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodConsistency {
    pub direct: f64,
    pub closed_form: f64,
    /// Fraction of paths on which the two methods disagree.
    pub flip_rate: f64,
}

pub fn method_consistency(
    model: &CoefficientModel,
    beta: StableIndex,
    x0: f64,
    criterion: Criterion,
    horizon: f64,
    params: &McParams,
) -> Result<MethodConsistency> {
    params.validate()?;
    let CoefficientModel::LinearConstant { rho1, f1, g1 } = *model else {
        return Err(Error::UnsupportedModel(format!("no closed form for {}", model.id())));
    };
    let grid = TimeGrid::new(horizon, params.dt)?;
    let k = grid.n_steps();
    let (event, threshold) = match criterion {
        Criterion::Stay { r } => (Event::Stay, r),
        Criterion::Converge { tol } => (Event::Converge, tol),
    };
    let pairs: Vec<(bool, bool)> = (0..params.n_paths as u64)
        .into_par_iter()
        .map(|path| {
            let (clock, noise) = coupled_paths(beta, grid, params.op_step, PathStreams::new(params.seed, path))?;
            let direct = integrate(Method::Direct, model, &clock, &noise, x0)?;
            let exact = closed_form_linear_damped(x0, rho1, f1, g1, &clock, &noise)?;
            Ok((event_holds(&direct, event, k, threshold).0, event_holds(&exact, event, k, threshold).0))
        })
        .collect::<Result<_>>()?;
    let n = pairs.len() as f64;
    Ok(MethodConsistency {
        direct: pairs.iter().filter(|p| p.0).count() as f64 / n,
        closed_form: pairs.iter().filter(|p| p.1).count() as f64 / n,
        flip_rate: pairs.iter().filter(|p| p.0 != p.1).count() as f64 / n,
    })
}

/// Settings for the linear scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example1Settings {
    pub stay_x0: f64,
    pub r: f64,
    pub stay_horizon: f64,
    pub convergence_x0: f64,
    pub tol: f64,
    pub convergence_horizons: Vec<f64>,
    pub epsilon: f64,
    pub mc: McParams,
}

impl Default for Example1Settings {
    fn default() -> Self {
        Self {
            stay_x0: 0.01,
            r: DEFAULT_R,
            stay_horizon: DEFAULT_HORIZON,
            convergence_x0: 0.1,
            tol: DEFAULT_TOL,
            convergence_horizons: vec![5.0, 10.0, 20.0],
            epsilon: DEFAULT_EPSILON,
            mc: McParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Example1Report {
    pub model: CoefficientModel,
    pub lyapunov: LyapunovSpec,
    pub theorem1: ScanReport,
    pub theorem3: ScanReport,
    /// Stay probability at `T` and `2T`.
    pub stay: Vec<StabilityEstimate>,
    pub convergence: Vec<StabilityEstimate>,
    pub convergence_trend: Vec<MonotoneFlag>,
    /// When the global scan is satisfied: whether the longest-horizon
    /// convergence estimate reaches `1 − ε`.
    pub scan_supported_by_mc: Option<bool>,
}

/// `dX = −ρ1 X dt + f1 X dE + g1 X dB(E)` with `V = |x|^α`.
pub fn run_example1(rho1: f64, f1: f64, g1: f64, alpha: f64, beta: StableIndex, settings: &Example1Settings) -> Result<Example1Report> {
    let model = CoefficientModel::linear(rho1, f1, g1);
    let lyapunov = LyapunovSpec::power_law(alpha)?;
    let theorem1 = scan_theorem1(&lyapunov, &model, &ScanBox::new(settings.r), &Density::default())?;
    let theorem3 = scan_theorem3(&lyapunov, &model, &Axis::default(), &Axis::default(), &default_radial_probe())?;
    let mc = &settings.mc;
    let stay_horizons = [settings.stay_horizon, 2.0 * settings.stay_horizon];
    let stay = estimate_stay_probabilities(&model, beta, settings.stay_x0, settings.r, &stay_horizons, mc)?;
    let convergence =
        estimate_convergence_probabilities(&model, beta, settings.convergence_x0, settings.tol, &settings.convergence_horizons, mc)?;
    let convergence_trend = nondecreasing_flags(&convergence);
    let scan_supported_by_mc = (theorem3.verdict == Verdict::Satisfied).then(|| {
        let longest = convergence.iter().max_by(|a, b| a.horizon.total_cmp(&b.horizon)).expect("nonempty");
        longest.at_least(1.0 - settings.epsilon)
    });
    Ok(Example1Report { model, lyapunov, theorem1, theorem3, stay, convergence, convergence_trend, scan_supported_by_mc })
}

/// Outcome of one analytic parameter gate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gate {
    pub id: &'static str,
    pub detail: String,
}

/// Check the hypotheses of the bounded-coefficient scenario:
/// `θ > 0`, `K > 0`, `|∫₀ᵗ (a − b²/2 + θ)| ≤ K` for all `t`, and
/// `0 < α < θ / sup b²`. The first failing gate is returned as
/// [`Error::ConditionRejected`].
pub fn example2_gates(drift: &CompensatedDrift, b: &Waveform, theta: f64, alpha: f64, k: f64) -> Result<Vec<Gate>> {
    let reject = |condition: &'static str, detail: String| Err(Error::ConditionRejected { condition, detail });
    if !(theta > 0.0 && theta.is_finite()) {
        return reject("theta_positive", format!("θ = {theta}"));
    }
    if !(k > 0.0 && k.is_finite()) {
        return reject("k_positive", format!("K = {k}"));
    }
    let certified = drift.certified_bound();
    if !(certified <= k) {
        return reject("drift_integral_bounded", format!("sup |∫(a − b²/2 + θ)| = {certified} exceeds K = {k}"));
    }
    let sup_b2 = b.sup_square();
    let ratio = if sup_b2 > 0.0 { theta / sup_b2 } else { f64::INFINITY };
    if !(alpha > 0.0) {
        return reject("alpha_positive", format!("α = {alpha}"));
    }
    if !(alpha < ratio) {
        return reject("alpha_below_theta_ratio", format!("α = {alpha} is not below θ / sup b² = {ratio}"));
    }
    Ok(vec![
        Gate { id: "theta_positive", detail: format!("θ = {theta}") },
        Gate { id: "k_positive", detail: format!("K = {k}") },
        Gate { id: "drift_integral_bounded", detail: format!("sup |∫(a − b²/2 + θ)| = {certified} ≤ K = {k}") },
        Gate { id: "alpha_positive", detail: format!("α = {alpha}") },
        Gate { id: "alpha_below_theta_ratio", detail: format!("α = {alpha} < θ / sup b² = {ratio}") },
    ])
}

/// Settings for the bounded-coefficient scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example2Settings {
    pub x0: f64,
    pub tol: f64,
    pub horizon: f64,
    /// Radius of the local L2 check.
    pub h: f64,
    pub epsilon: f64,
    pub mc: McParams,
}

impl Default for Example2Settings {
    fn default() -> Self {
        Self {
            x0: 0.1,
            tol: DEFAULT_TOL,
            horizon: 20.0,
            h: 0.1,
            epsilon: DEFAULT_EPSILON,
            mc: McParams { method: Method::Duality, ..McParams::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Example2Report {
    pub model: CoefficientModel,
    pub lyapunov: LyapunovSpec,
    pub gates: Vec<Gate>,
    /// Rate scan on shells inside `0 < |x| < h`.
    pub theorem2: ScanReport,
    /// `L2V ≤ −½ α θ e^{−αK} |x|^α` on `0 < |x| ≤ h`.
    pub l2_bound: ConditionResult,
    pub convergence: StabilityEstimate,
}

/// `−½ α θ e^{−αK} |x|^α`.
pub fn example2_l2_bound(alpha: f64, theta: f64, k: f64, x: f64) -> f64 {
    -0.5 * alpha * theta * (-alpha * k).exp() * x.abs().powf(alpha)
}

/// Largest `L2V − bound` over the time axis and 41 log-spaced radii up to
/// and including `h`, both signs.
fn l2_bound_check(v: &LyapunovSpec, model: &CoefficientModel, alpha: f64, theta: f64, k: f64, h: f64) -> Result<ConditionResult> {
    let axis = Axis::default();
    let mut worst = (f64::NEG_INFINITY, None);
    let mut ok = true;
    for i in 0..=40 {
        let r = h * 1e-4f64.powf(1.0 - i as f64 / 40.0);
        for &t in &axis.points() {
            for x in [r, -r] {
                let l2 = l2_operator(v, model, t, t, x)?;
                let bound = example2_l2_bound(alpha, theta, k, x);
                let excess = l2 - bound;
                ok &= l2 < 0.0 && excess <= 1e-12 * bound.abs();
                if excess > worst.0 {
                    worst = (excess, Some(ScanPoint { t1: t, t2: t, x }));
                }
            }
        }
    }
    Ok(ConditionResult { id: "l2_below_decay_bound", satisfied: ok, inconclusive: false, worst_point: worst.1, worst_value: worst.0 })
}

/// `dX = a(E_t) X dE + b(E_t) X dB(E)` with the weighted Lyapunov function.
/// Convergence is simulated with `settings.mc.method`; the duality
/// integrator is the default.
#[allow(clippy::too_many_arguments)]
pub fn run_example2(
    drift: CompensatedDrift,
    b: Waveform,
    theta: f64,
    alpha: f64,
    k: f64,
    beta: StableIndex,
    settings: &Example2Settings,
) -> Result<Example2Report> {
    let gates = example2_gates(&drift, &b, theta, alpha, k)?;
    let model = CoefficientModel::Example2 { drift, b, theta };
    let lyapunov = LyapunovSpec::for_model(&model, alpha)?;
    let h = settings.h;
    let theorem2 = scan_theorem2(&lyapunov, &model, &ScanBox::new(h), &[1e-3 * h, 1e-2 * h, 1e-1 * h], &Density::default())?;
    let l2_bound = l2_bound_check(&lyapunov, &model, alpha, theta, k, h)?;
    let convergence = estimate_convergence_probability(&model, beta, settings.x0, settings.tol, settings.horizon, &settings.mc)?;
    Ok(Example2Report { model, lyapunov, gates, theorem2, l2_bound, convergence })
}

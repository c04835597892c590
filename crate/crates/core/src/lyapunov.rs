//! Lyapunov operators and grid scans of the stability hypotheses.
//!
//! For `V(t1, t2, x)` of class C^{1,1,2} the two operators are
//!
//! ```text
//! L1V = V_t1 + V_x ρ
//! L2V = V_t2 + V_x f + ½ V_xx g²
//! ```
//!
//! The scans are sufficiency probes on finite grids. A `Satisfied` verdict
//! means no counterexample was found among the scanned points; it is not a
//! proof over the continuum.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clock::ClockPath;
use crate::error::{Error, Result};
use crate::noise::NoisePath;
use crate::sde::{euler_increment, integrate_direct, CoefficientModel, CompensatedDrift, Waveform};

/// Unit-scale finite-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Operator values within this multiple of the summed magnitudes of their
/// terms are treated as zero.
pub const OPERATOR_REL_TOL: f64 = 1e-12;

/// Minimum log-log growth rate of `inf V` accepted as radial divergence.
pub const RADIAL_SLOPE_MIN: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Partials {
    pub v_t1: f64,
    pub v_t2: f64,
    pub v_x: f64,
    pub v_xx: f64,
}

/// A function of `(t1, t2, x)`, once differentiable in each time argument
/// and twice in `x`.
pub trait C112Function: Sync {
    fn value(&self, t1: f64, t2: f64, x: f64) -> f64;

    fn partials(&self, t1: f64, t2: f64, x: f64) -> Result<Partials>;

    /// Whether derivatives are undefined at `x = 0`. Operators are extended
    /// by zero there.
    fn singular_at_origin(&self) -> bool {
        false
    }
}

/// Registered Lyapunov function families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum LyapunovSpec {
    /// `V = |x|^α`, `0 < α < 1`.
    PowerLaw { alpha: f64 },
    /// `V = |x|^α · exp(−α ∫₀^{t2} (a − b²/2 + θ))`, paired with
    /// [`CoefficientModel::Example2`].
    Example2Form { alpha: f64, theta: f64, drift: CompensatedDrift, b: Waveform },
}

impl LyapunovSpec {
    pub fn power_law(alpha: f64) -> Result<Self> {
        let v = LyapunovSpec::PowerLaw { alpha };
        v.validate()?;
        Ok(v)
    }

    /// The weighted form matching an `Example2` model.
    pub fn for_model(model: &CoefficientModel, alpha: f64) -> Result<Self> {
        match *model {
            CoefficientModel::Example2 { drift, b, theta } => {
                let v = LyapunovSpec::Example2Form { alpha, theta, drift, b };
                v.validate()?;
                Ok(v)
            }
            _ => Err(Error::UnsupportedModel(format!("no weighted Lyapunov form for {}", model.id()))),
        }
    }

    pub fn alpha(&self) -> f64 {
        match *self {
            LyapunovSpec::PowerLaw { alpha } | LyapunovSpec::Example2Form { alpha, .. } => alpha,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            LyapunovSpec::PowerLaw { alpha } if !(alpha > 0.0 && alpha < 1.0) => {
                Err(Error::domain(format!("power-law exponent must lie in (0, 1), got {alpha}")))
            }
            LyapunovSpec::Example2Form { alpha, .. } if !(alpha > 0.0 && alpha.is_finite()) => {
                Err(Error::domain(format!("exponent must be positive, got {alpha}")))
            }
            LyapunovSpec::Example2Form { drift, .. } if drift.c != 0.0 && !(drift.freq > 0.0) => {
                Err(Error::domain("drift frequency must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// Time weight `w(t2)` and its logarithmic derivative `w'/w`.
    fn weight(&self, t2: f64) -> (f64, f64) {
        match *self {
            LyapunovSpec::PowerLaw { .. } => (1.0, 0.0),
            LyapunovSpec::Example2Form { alpha, drift, .. } => {
                let w = (-alpha * drift.compensated_integral(t2)).exp();
                (w, -alpha * drift.c * (drift.freq * t2).cos())
            }
        }
    }

    /// A view of this function whose partials come from finite differences.
    pub fn with_finite_differences(&self, h: f64) -> FiniteDifference<'_, Self> {
        FiniteDifference { inner: self, h }
    }
}

impl C112Function for LyapunovSpec {
    fn value(&self, _t1: f64, t2: f64, x: f64) -> f64 {
        x.abs().powf(self.alpha()) * self.weight(t2).0
    }

    fn partials(&self, _t1: f64, t2: f64, x: f64) -> Result<Partials> {
        if x == 0.0 {
            return Err(Error::domain("Lyapunov derivatives are undefined at x = 0"));
        }
        let alpha = self.alpha();
        let (w, dlog_w) = self.weight(t2);
        let v = x.abs().powf(alpha) * w;
        Ok(Partials {
            v_t1: 0.0,
            v_t2: dlog_w * v,
            v_x: alpha * v / x,
            v_xx: alpha * (alpha - 1.0) * v / (x * x),
        })
    }

    fn singular_at_origin(&self) -> bool {
        true
    }
}

/// Probe functions for the Itô-formula check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeFunction {
    /// `F = x`
    StateIdentity,
    /// `F = t1`
    RealTime,
    /// `F = x²`
    Square,
}

impl C112Function for ProbeFunction {
    fn value(&self, t1: f64, _t2: f64, x: f64) -> f64 {
        match self {
            ProbeFunction::StateIdentity => x,
            ProbeFunction::RealTime => t1,
            ProbeFunction::Square => x * x,
        }
    }

    fn partials(&self, _t1: f64, _t2: f64, x: f64) -> Result<Partials> {
        let zero = Partials::default();
        Ok(match self {
            ProbeFunction::StateIdentity => Partials { v_x: 1.0, ..zero },
            ProbeFunction::RealTime => Partials { v_t1: 1.0, ..zero },
            ProbeFunction::Square => Partials { v_x: 2.0 * x, v_xx: 2.0, ..zero },
        })
    }
}

/// Wraps a function and replaces its partials by central differences.
#[derive(Debug, Clone, Copy)]
pub struct FiniteDifference<'a, F: ?Sized> {
    inner: &'a F,
    h: f64,
}

impl<'a, F: C112Function + ?Sized> FiniteDifference<'a, F> {
    pub fn new(inner: &'a F, h: f64) -> Self {
        Self { inner, h }
    }
}

impl<F: C112Function + ?Sized> C112Function for FiniteDifference<'_, F> {
    fn value(&self, t1: f64, t2: f64, x: f64) -> f64 {
        self.inner.value(t1, t2, x)
    }

    fn partials(&self, t1: f64, t2: f64, x: f64) -> Result<Partials> {
        finite_diff_derivatives(self.inner, t1, t2, x, self.h)
    }

    fn singular_at_origin(&self) -> bool {
        self.inner.singular_at_origin()
    }
}

/// Central differences with step `h·max(1, |coordinate|)`. The second
/// difference in `x` uses ten times that step.
pub fn finite_diff_derivatives<V: C112Function + ?Sized>(v: &V, t1: f64, t2: f64, x: f64, h: f64) -> Result<Partials> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::domain(format!("finite-difference step must be positive, got {h}")));
    }
    check_point(t1, t2, x)?;
    if v.singular_at_origin() && x.abs() <= 10.0 * h {
        return Err(Error::domain(format!("x = {x} is within 10h of the singular origin")));
    }
    let step = |c: f64| h * c.abs().max(1.0);
    let (h1, h2, hx) = (step(t1), step(t2), step(x));
    let hxx = 10.0 * hx;
    let f = |a: f64, b: f64, c: f64| v.value(a, b, c);
    let centre = f(t1, t2, x);
    Ok(Partials {
        v_t1: (f(t1 + h1, t2, x) - f(t1 - h1, t2, x)) / (2.0 * h1),
        v_t2: (f(t1, t2 + h2, x) - f(t1, t2 - h2, x)) / (2.0 * h2),
        v_x: (f(t1, t2, x + hx) - f(t1, t2, x - hx)) / (2.0 * hx),
        v_xx: (f(t1, t2, x + hxx) - 2.0 * centre + f(t1, t2, x - hxx)) / (hxx * hxx),
    })
}

fn check_point(t1: f64, t2: f64, x: f64) -> Result<()> {
    if t1.is_finite() && t2.is_finite() && x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("non-finite evaluation point ({t1}, {t2}, {x})")))
    }
}

/// Operator value together with the summed magnitudes of its terms.
fn l1_terms<V: C112Function + ?Sized>(v: &V, model: &CoefficientModel, t1: f64, t2: f64, x: f64) -> Result<(f64, f64)> {
    check_point(t1, t2, x)?;
    if x == 0.0 && v.singular_at_origin() {
        return Ok((0.0, 0.0));
    }
    let p = v.partials(t1, t2, x)?;
    let (rho, _, _) = model.coefficients(t1, t2, x);
    let (a, b) = (p.v_t1, p.v_x * rho);
    Ok((a + b, a.abs() + b.abs()))
}

fn l2_terms<V: C112Function + ?Sized>(v: &V, model: &CoefficientModel, t1: f64, t2: f64, x: f64) -> Result<(f64, f64)> {
    check_point(t1, t2, x)?;
    if x == 0.0 && v.singular_at_origin() {
        return Ok((0.0, 0.0));
    }
    let p = v.partials(t1, t2, x)?;
    let (_, f, g) = model.coefficients(t1, t2, x);
    let (a, b, c) = (p.v_t2, p.v_x * f, 0.5 * p.v_xx * g * g);
    Ok((a + b + c, a.abs() + b.abs() + c.abs()))
}

/// `L1V = V_t1 + V_x ρ`.
pub fn l1_operator<V: C112Function + ?Sized>(v: &V, model: &CoefficientModel, t1: f64, t2: f64, x: f64) -> Result<f64> {
    l1_terms(v, model, t1, t2, x).map(|(value, _)| value)
}

/// `L2V = V_t2 + V_x f + ½ V_xx g²`.
pub fn l2_operator<V: C112Function + ?Sized>(v: &V, model: &CoefficientModel, t1: f64, t2: f64, x: f64) -> Result<f64> {
    l2_terms(v, model, t1, t2, x).map(|(value, _)| value)
}

/// Cancellation noise is mapped to exactly zero; NaN to +∞.
fn clip((value, magnitude): (f64, f64)) -> f64 {
    if value.is_nan() {
        f64::INFINITY
    } else if value.abs() <= OPERATOR_REL_TOL * magnitude {
        0.0
    } else {
        value
    }
}

/// `n` evenly spaced points on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, n: usize) -> Self {
        Self { lo, hi, n }
    }

    pub fn points(&self) -> Vec<f64> {
        match self.n {
            0 => Vec::new(),
            1 => vec![self.lo],
            n => (0..n).map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64).collect(),
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.n == 0 {
            return Err(Error::domain(format!("{name} axis has no points")));
        }
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi) {
            return Err(Error::domain(format!("{name} axis [{}, {}] is invalid", self.lo, self.hi)));
        }
        Ok(())
    }
}

impl Default for Axis {
    fn default() -> Self {
        Axis::new(0.0, 10.0, 21)
    }
}

/// Time axes and the state radius `h` of a local scan, `0 < |x| < h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanBox {
    pub t1: Axis,
    pub t2: Axis,
    pub h: f64,
}

impl ScanBox {
    pub fn new(h: f64) -> Self {
        Self { t1: Axis::default(), t2: Axis::default(), h }
    }

    fn validate(&self) -> Result<()> {
        self.t1.validate("t1")?;
        self.t2.validate("t2")?;
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::domain(format!("scan radius must be positive, got {}", self.h)));
        }
        Ok(())
    }
}

/// Number of log-spaced radii per shell; the innermost radius of a local
/// scan is `inner_ratio · h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Density {
    pub radii: usize,
    pub inner_ratio: f64,
}

impl Default for Density {
    fn default() -> Self {
        Self { radii: 41, inner_ratio: 1e-3 }
    }
}

/// `n` log-spaced radii from `a` (included) towards `b` (excluded).
fn log_radii(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a * (b / a).powf(i as f64 / n as f64)).collect()
}

/// 61 log-spaced radii on `[1e-3, 1e3]`.
pub fn default_radial_probe() -> Vec<f64> {
    (0..=60).map(|i| 10f64.powf(-3.0 + 0.1 * i as f64)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPoint {
    pub t1: f64,
    pub t2: f64,
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionResult {
    pub id: &'static str,
    pub satisfied: bool,
    /// Neither confirmed nor refuted by the scan.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub inconclusive: bool,
    pub worst_point: Option<ScanPoint>,
    pub worst_value: f64,
}

impl ConditionResult {
    fn new(id: &'static str, satisfied: bool, worst_point: Option<ScanPoint>, worst_value: f64) -> Self {
        Self { id, satisfied, inconclusive: false, worst_point, worst_value }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Satisfied,
    Violated,
    Inconclusive,
}

/// Decay rates on one shell `inner ≤ |x| < outer`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShellEstimate {
    pub inner: f64,
    pub outer: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub theorem: u8,
    pub conditions: Vec<ConditionResult>,
    /// Estimates for the innermost shell, which bounds the others.
    pub gamma1_est: Option<f64>,
    pub gamma2_est: Option<f64>,
    pub shells: Vec<ShellEstimate>,
    /// Monotone lower envelope `(r, μ(r))` of the shell infima of `V`.
    pub envelope: Vec<(f64, f64)>,
    pub verdict: Verdict,
}

impl ScanReport {
    fn assemble(theorem: u8, conditions: Vec<ConditionResult>, shells: Vec<ShellEstimate>, envelope: Vec<(f64, f64)>) -> Self {
        let verdict = if conditions.iter().any(|c| !c.satisfied && !c.inconclusive) {
            Verdict::Violated
        } else if conditions.iter().any(|c| c.inconclusive) {
            Verdict::Inconclusive
        } else {
            Verdict::Satisfied
        };
        let inner = shells.first();
        Self {
            theorem,
            conditions,
            gamma1_est: inner.map(|s| s.gamma1),
            gamma2_est: inner.map(|s| s.gamma2),
            shells,
            envelope,
            verdict,
        }
    }

    pub fn condition(&self, id: &str) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.id == id)
    }

    pub fn failed(&self) -> impl Iterator<Item = &ConditionResult> {
        self.conditions.iter().filter(|c| !c.satisfied)
    }
}

/// Extremes over all scanned `(t1, t2, ±r)` at one radius.
#[derive(Debug, Clone, Copy)]
struct RadiusStats {
    r: f64,
    min_v: (f64, ScanPoint),
    max_l1: (f64, ScanPoint),
    max_l2: (f64, ScanPoint),
}

fn radius_stats<V: C112Function + ?Sized>(
    v: &V,
    model: &CoefficientModel,
    t1s: &[f64],
    t2s: &[f64],
    r: f64,
) -> Result<RadiusStats> {
    let origin = ScanPoint { t1: t1s[0], t2: t2s[0], x: r };
    let mut s = RadiusStats {
        r,
        min_v: (f64::INFINITY, origin),
        max_l1: (f64::NEG_INFINITY, origin),
        max_l2: (f64::NEG_INFINITY, origin),
    };
    for &t1 in t1s {
        for &t2 in t2s {
            for x in [r, -r] {
                let p = ScanPoint { t1, t2, x };
                let value = v.value(t1, t2, x);
                let value = if value.is_nan() { f64::NEG_INFINITY } else { value };
                if value < s.min_v.0 {
                    s.min_v = (value, p);
                }
                let l1 = clip(l1_terms(v, model, t1, t2, x)?);
                if l1 > s.max_l1.0 {
                    s.max_l1 = (l1, p);
                }
                let l2 = clip(l2_terms(v, model, t1, t2, x)?);
                if l2 > s.max_l2.0 {
                    s.max_l2 = (l2, p);
                }
            }
        }
    }
    Ok(s)
}

fn scan_radii<V: C112Function + ?Sized>(
    v: &V,
    model: &CoefficientModel,
    t1: &Axis,
    t2: &Axis,
    radii: &[f64],
) -> Result<Vec<RadiusStats>> {
    let (t1s, t2s) = (t1.points(), t2.points());
    radii.par_iter().map(|&r| radius_stats(v, model, &t1s, &t2s, r)).collect()
}

fn vanishing_condition<V: C112Function + ?Sized>(v: &V, t1: &Axis, t2: &Axis) -> ConditionResult {
    let mut worst = (0.0f64, None);
    for &a in &t1.points() {
        for &b in &t2.points() {
            let value = v.value(a, b, 0.0).abs();
            if !(value <= worst.0) {
                worst = (value, Some(ScanPoint { t1: a, t2: b, x: 0.0 }));
            }
        }
    }
    ConditionResult::new("v_vanishes_at_origin", worst.0 == 0.0, worst.1, worst.0)
}

/// `μ(r_i) = min_{j ≥ i} inf_{|x| = r_j} V`, which is nondecreasing by
/// construction; the condition holds when it is positive at the smallest
/// radius.
fn envelope_condition(stats: &[RadiusStats]) -> (ConditionResult, Vec<(f64, f64)>) {
    let mut envelope = vec![(0.0, 0.0); stats.len()];
    let mut running = f64::INFINITY;
    for (i, s) in stats.iter().enumerate().rev() {
        running = running.min(s.min_v.0);
        envelope[i] = (s.r, running);
    }
    let worst = stats.iter().min_by(|a, b| a.min_v.0.total_cmp(&b.min_v.0)).map(|s| s.min_v);
    let value = worst.map_or(f64::NAN, |w| w.0);
    (ConditionResult::new("positive_definite_envelope", value > 0.0, worst.map(|w| w.1), value), envelope)
}

fn sup_condition(id: &'static str, stats: &[RadiusStats], pick: fn(&RadiusStats) -> (f64, ScanPoint)) -> ConditionResult {
    let mut worst = pick(&stats[0]);
    for s in &stats[1..] {
        let cand = pick(s);
        if cand.0 > worst.0 {
            worst = cand;
        }
    }
    ConditionResult::new(id, worst.0 <= 0.0, Some(worst.1), worst.0)
}

/// Stability in probability: `V(t1, t2, 0) = 0`, `V ≥ μ(|x|)` with `μ` of
/// class K, and `L1V ≤ 0`, `L2V ≤ 0` on `0 < |x| < h`.
pub fn scan_theorem1<V: C112Function + ?Sized>(
    v: &V,
    model: &CoefficientModel,
    scan: &ScanBox,
    density: &Density,
) -> Result<ScanReport> {
    scan.validate()?;
    if density.radii == 0 || !(density.inner_ratio > 0.0 && density.inner_ratio < 1.0) {
        return Err(Error::domain("scan density needs at least one radius and inner ratio in (0, 1)"));
    }
    let radii = log_radii(scan.h * density.inner_ratio, scan.h, density.radii);
    let stats = scan_radii(v, model, &scan.t1, &scan.t2, &radii)?;
    let (envelope_ok, envelope) = envelope_condition(&stats);
    let conditions = vec![
        vanishing_condition(v, &scan.t1, &scan.t2),
        envelope_ok,
        sup_condition("l1_nonpositive", &stats, |s| s.max_l1),
        sup_condition("l2_nonpositive", &stats, |s| s.max_l2),
    ];
    Ok(ScanReport::assemble(1, conditions, Vec::new(), envelope))
}

struct ShellSup {
    estimate: ShellEstimate,
    l1_at: ScanPoint,
    l2_at: ScanPoint,
}

fn shell_sup(stats: &[RadiusStats], outer: f64) -> ShellSup {
    let l1 = sup_condition("", stats, |s| s.max_l1);
    let l2 = sup_condition("", stats, |s| s.max_l2);
    ShellSup {
        estimate: ShellEstimate { inner: stats[0].r, outer, gamma1: -l1.worst_value, gamma2: -l2.worst_value },
        l1_at: l1.worst_point.unwrap(),
        l2_at: l2.worst_point.unwrap(),
    }
}

/// The three rate conditions, each reported at its worst shell.
fn gamma_conditions(shells: &[ShellSup]) -> Vec<ConditionResult> {
    let worst_by = |key: fn(&ShellSup) -> f64| {
        shells.iter().min_by(|a, b| key(a).total_cmp(&key(b))).expect("at least one shell")
    };
    let g1 = worst_by(|s| s.estimate.gamma1);
    let g2 = worst_by(|s| s.estimate.gamma2);
    let both = worst_by(|s| s.estimate.gamma1.max(s.estimate.gamma2));
    let both_value = both.estimate.gamma1.max(both.estimate.gamma2);
    let both_at = if both.estimate.gamma1 >= both.estimate.gamma2 { both.l1_at } else { both.l2_at };
    vec![
        ConditionResult::new("gamma1_nonnegative", g1.estimate.gamma1 >= 0.0, Some(g1.l1_at), g1.estimate.gamma1),
        ConditionResult::new("gamma2_nonnegative", g2.estimate.gamma2 >= 0.0, Some(g2.l2_at), g2.estimate.gamma2),
        ConditionResult::new("gammas_not_both_zero", both_value > 0.0, Some(both_at), both_value),
    ]
}

/// Asymptotic stability: on every shell `a ≤ |x| < h` the rates
/// `γ1 = −sup L1V` and `γ2 = −sup L2V` are nonnegative and not both zero,
/// on top of the vanishing and positive-definiteness conditions.
pub fn scan_theorem2<V: C112Function + ?Sized>(
    v: &V,
    model: &CoefficientModel,
    scan: &ScanBox,
    shells: &[f64],
    density: &Density,
) -> Result<ScanReport> {
    scan.validate()?;
    if shells.is_empty() || density.radii == 0 {
        return Err(Error::domain("theorem 2 scan needs at least one shell and one radius"));
    }
    let mut inner: Vec<f64> = shells.to_vec();
    if let Some(bad) = inner.iter().find(|&&a| !(a > 0.0 && a < scan.h)) {
        return Err(Error::domain(format!("shell radius {bad} must lie in (0, {})", scan.h)));
    }
    inner.sort_by(f64::total_cmp);
    let mut sups = Vec::with_capacity(inner.len());
    let mut all_stats = Vec::new();
    for &a in &inner {
        let stats = scan_radii(v, model, &scan.t1, &scan.t2, &log_radii(a, scan.h, density.radii))?;
        sups.push(shell_sup(&stats, scan.h));
        all_stats.extend(stats);
    }
    all_stats.sort_by(|a, b| a.r.total_cmp(&b.r));
    let (envelope_ok, envelope) = envelope_condition(&all_stats);
    let mut conditions = vec![vanishing_condition(v, &scan.t1, &scan.t2), envelope_ok];
    conditions.extend(gamma_conditions(&sups));
    Ok(ScanReport::assemble(2, conditions, sups.into_iter().map(|s| s.estimate).collect(), envelope))
}

/// Tail behaviour of `m(R) = inf_{t1, t2} V(t1, t2, ±R)` over the last third
/// of the probe radii. Decay fails. Growth passes when it is monotone and the
/// log-log slope over the outer half of the tail keeps at least half of its
/// value over the inner half; a stalling slope is inconclusive.
fn radial_condition(stats: &[RadiusStats]) -> ConditionResult {
    let n = stats.len();
    let tail = &stats[n - (n / 3).max(3).min(n)..];
    let slope = |a: &RadiusStats, b: &RadiusStats| (b.min_v.0.ln() - a.min_v.0.ln()) / (b.r.ln() - a.r.ln());
    let (first, mid, last) = (&tail[0], &tail[tail.len() / 2], &tail[tail.len() - 1]);
    let (early, late) = (slope(first, mid), slope(mid, last));
    let monotone = tail.windows(2).all(|w| w[1].min_v.0 >= w[0].min_v.0);
    let positive = tail.iter().all(|s| s.min_v.0 > 0.0);
    let mut result = ConditionResult::new("radially_unbounded", false, Some(last.min_v.1), late);
    if !positive || late < -RADIAL_SLOPE_MIN {
        return result;
    }
    if monotone && late > RADIAL_SLOPE_MIN && late >= 0.5 * early {
        result.satisfied = true;
    } else {
        result.inconclusive = true;
    }
    result
}

/// Global asymptotic stability: the rate conditions on every shell
/// `r_i ≤ |x| ≤ r_max` of the probe radii plus radial unboundedness of `V`.
pub fn scan_theorem3<V: C112Function + ?Sized>(
    v: &V,
    model: &CoefficientModel,
    t1: &Axis,
    t2: &Axis,
    radii: &[f64],
) -> Result<ScanReport> {
    t1.validate("t1")?;
    t2.validate("t2")?;
    if radii.len() < 3 {
        return Err(Error::domain("radial probe needs at least three radii"));
    }
    if !(radii[0] > 0.0) || radii.windows(2).any(|w| !(w[1] > w[0])) || !radii[radii.len() - 1].is_finite() {
        return Err(Error::domain("probe radii must be positive and strictly increasing"));
    }
    let stats = scan_radii(v, model, t1, t2, radii)?;
    let outer = radii[radii.len() - 1];
    let sups: Vec<ShellSup> = (0..stats.len()).map(|i| shell_sup(&stats[i..], outer)).collect();
    let (envelope_ok, envelope) = envelope_condition(&stats);
    let mut conditions = vec![vanishing_condition(v, t1, t2), envelope_ok];
    conditions.extend(gamma_conditions(&sups));
    conditions.push(radial_condition(&stats));
    Ok(ScanReport::assemble(3, conditions, sups.into_iter().map(|s| s.estimate).collect(), envelope))
}

/// Pathwise check of the time-changed Itô formula for `F` along the Euler
/// trajectory started at `x0`:
///
/// ```text
/// F(t, E_t, X_t) − F(0, 0, x0) = Σ F_t1 Δt + Σ F_t2 ΔE + Σ F_x ΔX + ½ Σ F_xx g² ΔE
/// ```
///
/// with left-endpoint sums. `ΔX` expands into the three driving integrals.
/// Returns `|LHS − RHS|` at the final grid time.
pub fn ito_residual<F: C112Function + ?Sized>(
    f: &F,
    model: &CoefficientModel,
    clock: &ClockPath,
    noise: &NoisePath,
    x0: f64,
) -> Result<f64> {
    let tr = integrate_direct(model, clock, noise, x0)?;
    if tr.is_diverged() {
        return Err(Error::domain("trajectory left the overflow guard"));
    }
    let grid = tr.grid;
    let (e, b, xs) = (clock.e_values(), noise.values(), &tr.x_values);
    let mut acc = f.value(grid.t(0), e[0], xs[0]);
    for k in 0..grid.n_steps() {
        let (t, dt) = (grid.t(k), grid.t(k + 1) - grid.t(k));
        let de = e[k + 1] - e[k];
        let p = f.partials(t, e[k], xs[k])?;
        let (rho, fc, g) = model.coefficients(t, e[k], xs[k]);
        let dx = euler_increment(rho, fc, g, dt, de, b[k + 1] - b[k]);
        acc += p.v_x * dx + ((p.v_t1 * dt + p.v_t2 * de) + 0.5 * p.v_xx * g * g * de);
    }
    let n = grid.n_steps();
    Ok((f.value(grid.t(n), e[n], xs[n]) - acc).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::{StableIndex, TimeGrid};
    use crate::noise::{coupled_paths, refinement_levels};
    use crate::rng::PathStreams;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ex1(rho1: f64, f1: f64, g1: f64) -> CoefficientModel {
        CoefficientModel::linear(rho1, f1, g1)
    }

    fn ex2_model() -> CoefficientModel {
        CoefficientModel::Example2 {
            drift: CompensatedDrift { c: 0.5, freq: 1.0 },
            b: Waveform::constant(1.0),
            theta: 0.75,
        }
    }

    fn pl(alpha: f64) -> LyapunovSpec {
        LyapunovSpec::power_law(alpha).unwrap()
    }

    /// `c · V` for a wrapped function.
    struct Scaled<'a>(f64, &'a LyapunovSpec);

    impl C112Function for Scaled<'_> {
        fn value(&self, t1: f64, t2: f64, x: f64) -> f64 {
            self.0 * self.1.value(t1, t2, x)
        }
        fn partials(&self, t1: f64, t2: f64, x: f64) -> Result<Partials> {
            let p = self.1.partials(t1, t2, x)?;
            Ok(Partials { v_t1: self.0 * p.v_t1, v_t2: self.0 * p.v_t2, v_x: self.0 * p.v_x, v_xx: self.0 * p.v_xx })
        }
        fn singular_at_origin(&self) -> bool {
            true
        }
    }

    /// Bounded radial function `|x|^α / (1 + |x|^α)`.
    struct Capped;

    impl C112Function for Capped {
        fn value(&self, _t1: f64, _t2: f64, x: f64) -> f64 {
            let s = x.abs().sqrt();
            s / (1.0 + s)
        }
        fn partials(&self, t1: f64, t2: f64, x: f64) -> Result<Partials> {
            finite_diff_derivatives(self, t1, t2, x, DEFAULT_FD_STEP)
        }
        fn singular_at_origin(&self) -> bool {
            true
        }
    }

    #[test]
    fn operator_examples() {
        let v = pl(0.5);
        assert!((l1_operator(&v, &ex1(1.0, 0.0, 0.0), 0.0, 0.0, 4.0).unwrap() + 1.0).abs() < 1e-15);
        assert!((l2_operator(&v, &ex1(0.0, 0.0, 1.0), 0.0, 0.0, 4.0).unwrap() + 0.25).abs() < 1e-15);
        assert_eq!(l1_operator(&v, &ex1(0.0, -1.0, 2.0), 3.0, 1.0, -2.0).unwrap(), 0.0);
        assert_eq!(l1_operator(&v, &ex1(1.0, 0.0, 0.0), 0.0, 0.0, 0.0).unwrap(), 0.0);
        let near = l1_operator(&v, &ex1(1.0, 0.0, 0.0), 0.0, 0.0, 1e-12).unwrap();
        assert!(near < 0.0 && near > -1e-5);
    }

    #[test]
    fn equality_bracket_vanishes() {
        for alpha in [0.2, 0.5, 0.9] {
            let g1 = 1.3;
            let model = ex1(0.0, (1.0 - alpha) * g1 * g1 / 2.0, g1);
            for x in [-3.0, -0.1, 0.01, 2.0, 50.0] {
                let (value, mag) = l2_terms(&pl(alpha), &model, 0.0, 1.0, x).unwrap();
                assert!(value.abs() <= 4.0 * f64::EPSILON * mag, "{alpha} {x} {value}");
            }
        }
    }

    #[test]
    fn example2_l2_below_bound_near_origin() {
        let model = ex2_model();
        let v = LyapunovSpec::for_model(&model, 0.5).unwrap();
        let (alpha, theta, k) = (0.5f64, 0.75, 0.5);
        for &t2 in &[0.0, 0.7, 2.0, 5.5] {
            for &x in &[1e-4, -0.003, 0.05, -0.1] {
                let l2 = l2_operator(&v, &model, 0.0, t2, x).unwrap();
                let bound = -0.5 * alpha * theta * (-alpha * k).exp() * x.abs().powf(alpha);
                assert!(l2 < 0.0 && l2 <= bound + 1e-15, "{t2} {x} {l2} {bound}");
            }
        }
    }

    #[test]
    fn example1_closed_forms_at_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let alpha = rng.random_range(0.05..0.95);
            let (rho1, f1, g1) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let x: f64 = rng.random_range(0.01..20.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
            let (t1, t2) = (rng.random_range(0.0..10.0), rng.random_range(0.0..10.0));
            let (v, m) = (pl(alpha), ex1(rho1, f1, g1));
            let p = x.abs().powf(alpha);
            let l1 = -alpha * rho1 * p;
            let l2 = -alpha * ((1.0 - alpha) * g1 * g1 / 2.0 - f1) * p;
            let got1 = l1_operator(&v, &m, t1, t2, x).unwrap();
            let got2 = l2_operator(&v, &m, t1, t2, x).unwrap();
            let scale1 = alpha * rho1.abs() * p;
            let scale2 = alpha * ((1.0 - alpha) * g1 * g1 / 2.0 + f1.abs()) * p;
            assert!((got1 - l1).abs() <= 1e-12 * scale1.max(1.0), "{got1} {l1}");
            assert!((got2 - l2).abs() <= 1e-12 * scale2.max(1.0), "{got2} {l2}");
        }
    }

    #[test]
    fn finite_difference_examples() {
        let v = pl(0.5);
        let p = finite_diff_derivatives(&v, 0.0, 0.0, 4.0, 1e-5).unwrap();
        assert!((p.v_x - 0.25).abs() < 1e-8, "{}", p.v_x);
        assert!((p.v_xx + 0.03125).abs() < 1e-6, "{}", p.v_xx);
        assert_eq!(p.v_t1, 0.0);
        assert!(matches!(finite_diff_derivatives(&v, 0.0, 0.0, 5e-5, 1e-5), Err(Error::Domain(_))));
        assert!(finite_diff_derivatives(&v, 0.0, 0.0, 1.0, 0.0).is_err());
        assert!(finite_diff_derivatives(&ProbeFunction::Square, 0.0, 0.0, 0.0, 1e-5).is_ok());
    }

    #[test]
    fn closed_form_partials_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let ex2 = LyapunovSpec::for_model(&ex2_model(), 0.5).unwrap();
        let families = [pl(0.3), pl(0.5), pl(0.8), ex2];
        for v in &families {
            for _ in 0..100 {
                let x = rng.random_range(0.5..5.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
                let (t1, t2) = (rng.random_range(0.0..10.0), rng.random_range(0.0..10.0));
                let exact = v.partials(t1, t2, x).unwrap();
                let fd = v.with_finite_differences(DEFAULT_FD_STEP).partials(t1, t2, x).unwrap();
                for (a, b) in [(exact.v_t1, fd.v_t1), (exact.v_t2, fd.v_t2), (exact.v_x, fd.v_x), (exact.v_xx, fd.v_xx)] {
                    assert!((a - b).abs() < 1e-6, "{v:?} at ({t1}, {t2}, {x}): {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn registered_families_vanish_at_origin_and_are_nonnegative() {
        let ex2 = LyapunovSpec::for_model(&ex2_model(), 0.5).unwrap();
        for v in [pl(0.5), ex2] {
            for &t in &[0.0, 1.0, 7.3] {
                assert_eq!(v.value(t, t, 0.0), 0.0);
                for &x in &[-2.0, 1e-3, 40.0] {
                    assert!(v.value(t, t, x) > 0.0);
                }
            }
        }
        assert!(LyapunovSpec::power_law(1.0).is_err());
        assert!(LyapunovSpec::power_law(0.0).is_err());
        assert!(LyapunovSpec::for_model(&ex1(1.0, 1.0, 1.0), 0.5).is_err());
    }

    #[test]
    fn theorem1_examples() {
        let v = pl(0.5);
        let (scan, density) = (ScanBox::new(1.0), Density::default());
        let strict = scan_theorem1(&v, &ex1(1.0, -1.0, 1.0), &scan, &density).unwrap();
        assert_eq!(strict.verdict, Verdict::Satisfied);
        assert!(strict.envelope.windows(2).all(|w| w[1].1 >= w[0].1));

        let bad = scan_theorem1(&v, &ex1(1.0, 2.0, 1.0), &scan, &density).unwrap();
        assert_eq!(bad.verdict, Verdict::Violated);
        let witness = bad.condition("l2_nonpositive").unwrap();
        assert!(!witness.satisfied && witness.worst_value > 0.0);
        let p = witness.worst_point.unwrap();
        assert!(l2_operator(&v, &ex1(1.0, 2.0, 1.0), p.t1, p.t2, p.x).unwrap() > 0.0);

        let zero = scan_theorem1(&v, &CoefficientModel::zero(), &scan, &density).unwrap();
        assert_eq!(zero.verdict, Verdict::Satisfied);
        assert_eq!(zero.condition("l1_nonpositive").unwrap().worst_value, 0.0);
        assert_eq!(zero.condition("l2_nonpositive").unwrap().worst_value, 0.0);

        let equality = scan_theorem1(&v, &ex1(0.0, 0.25, 1.0), &scan, &density).unwrap();
        assert_eq!(equality.verdict, Verdict::Satisfied);
    }

    #[test]
    fn theorem2_examples() {
        let v = pl(0.5);
        let scan = ScanBox::new(1.0);
        let density = Density::default();
        let strict = scan_theorem2(&v, &ex1(1.0, -1.0, 1.0), &scan, &[0.1], &density).unwrap();
        assert_eq!(strict.verdict, Verdict::Satisfied);
        let (g1, g2) = (strict.gamma1_est.unwrap(), strict.gamma2_est.unwrap());
        // sup over the shell is attained at the inner radius
        assert!((g1 - 0.5 * 0.1f64.sqrt()).abs() < 1e-12, "{g1}");
        assert!((g2 - 0.5 * 1.25 * 0.1f64.sqrt()).abs() < 1e-12, "{g2}");

        let no_rho = scan_theorem2(&v, &ex1(0.0, -1.0, 1.0), &scan, &[0.1, 0.5], &density).unwrap();
        assert_eq!(no_rho.verdict, Verdict::Satisfied);
        assert_eq!(no_rho.gamma1_est, Some(0.0));
        assert!(no_rho.gamma2_est.unwrap() > 0.0);

        let flat = scan_theorem2(&v, &CoefficientModel::zero(), &scan, &[0.1], &density).unwrap();
        assert_eq!(flat.verdict, Verdict::Violated);
        assert!(!flat.condition("gammas_not_both_zero").unwrap().satisfied);

        assert!(scan_theorem2(&v, &ex1(1.0, -1.0, 1.0), &scan, &[1.5], &density).is_err());
        assert!(scan_theorem2(&v, &ex1(1.0, -1.0, 1.0), &scan, &[], &density).is_err());
    }

    #[test]
    fn theorem3_examples() {
        let radii = default_radial_probe();
        let (t1, t2) = (Axis::default(), Axis::default());
        let strict = scan_theorem3(&pl(0.5), &ex1(1.0, -1.0, 1.0), &t1, &t2, &radii).unwrap();
        assert_eq!(strict.verdict, Verdict::Satisfied);
        let radial = strict.condition("radially_unbounded").unwrap();
        assert!((radial.worst_value - 0.5).abs() < 1e-9);
        for (r, mu) in &strict.envelope {
            assert!((mu - r.sqrt()).abs() <= 1e-12 * r.sqrt());
        }

        let model = ex2_model();
        let v = LyapunovSpec::for_model(&model, 0.5).unwrap();
        let weighted = scan_theorem3(&v, &model, &t1, &t2, &radii).unwrap();
        assert_eq!(weighted.verdict, Verdict::Satisfied);
        for (r, mu) in &weighted.envelope {
            assert!(*mu >= (-0.5f64 * 0.5).exp() * r.sqrt() * (1.0 - 1e-12));
        }

        let capped = scan_theorem3(&Capped, &ex1(1.0, -1.0, 1.0), &t1, &t2, &radii).unwrap();
        assert_eq!(capped.verdict, Verdict::Inconclusive);

        let equality = scan_theorem3(&pl(0.5), &ex1(0.0, 0.25, 1.0), &t1, &t2, &radii).unwrap();
        assert_eq!(equality.verdict, Verdict::Violated);

        assert!(scan_theorem3(&pl(0.5), &ex1(1.0, -1.0, 1.0), &t1, &t2, &[1.0, 0.5, 2.0]).is_err());
        assert!(scan_theorem1(&pl(0.5), &ex1(1.0, -1.0, 1.0), &ScanBox { t1: Axis::new(0.0, 1.0, 0), ..ScanBox::new(1.0) }, &Density::default()).is_err());
    }

    #[test]
    fn ito_residual_is_exact_for_linear_probes() {
        let models = [ex1(1.0, -1.0, 1.0), ex1(0.0, 2.0, 0.5), ex2_model()];
        for seed in 0..5 {
            let (clock, noise) =
                coupled_paths(StableIndex::new(0.6).unwrap(), TimeGrid::new(2.0, 1e-3).unwrap(), 1e-3, PathStreams::new(seed, 0)).unwrap();
            for m in &models {
                assert_eq!(ito_residual(&ProbeFunction::StateIdentity, m, &clock, &noise, 0.3).unwrap(), 0.0);
                assert_eq!(ito_residual(&ProbeFunction::RealTime, m, &clock, &noise, 0.3).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn ito_residual_for_square_shrinks_under_refinement() {
        let model = ex1(0.0, -1.0, 1.0);
        let mut means = [0.0f64; 3];
        for path in 0..200 {
            let levels = refinement_levels(StableIndex::new(0.8).unwrap(), 1.0, 1e-2, 1e-2, 3, PathStreams::new(5, path)).unwrap();
            for (l, (clock, noise)) in levels.iter().enumerate() {
                means[l] += ito_residual(&ProbeFunction::Square, &model, clock, noise, 1.0).unwrap() / 200.0;
            }
        }
        assert!(means[0] > means[1] && means[1] > means[2], "{means:?}");
    }

    proptest! {
        #[test]
        fn operators_scale_linearly(
            c in 0.01f64..100.0,
            alpha in 0.05f64..0.95,
            rho1 in -3.0f64..3.0,
            f1 in -3.0f64..3.0,
            g1 in -3.0f64..3.0,
            x in prop_oneof![-10.0f64..-0.01, 0.01f64..10.0],
            t in 0.0f64..10.0,
        ) {
            let v = pl(alpha);
            let m = ex1(rho1, f1, g1);
            let scaled = Scaled(c, &v);
            let (a1, b1) = (l1_operator(&v, &m, t, t, x).unwrap(), l1_operator(&scaled, &m, t, t, x).unwrap());
            let (a2, b2) = (l2_operator(&v, &m, t, t, x).unwrap(), l2_operator(&scaled, &m, t, t, x).unwrap());
            let (_, mag1) = l1_terms(&v, &m, t, t, x).unwrap();
            let (_, mag2) = l2_terms(&v, &m, t, t, x).unwrap();
            prop_assert!((b1 - c * a1).abs() <= 1e-13 * c * mag1.max(f64::MIN_POSITIVE));
            prop_assert!((b2 - c * a2).abs() <= 1e-13 * c * mag2.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn operators_add_linearly(
            alpha in 0.05f64..0.95,
            beta in 0.05f64..0.95,
            f1 in -3.0f64..3.0,
            g1 in -3.0f64..3.0,
            x in 0.01f64..10.0,
        ) {
            struct Sum(LyapunovSpec, LyapunovSpec);
            impl C112Function for Sum {
                fn value(&self, t1: f64, t2: f64, x: f64) -> f64 {
                    self.0.value(t1, t2, x) + self.1.value(t1, t2, x)
                }
                fn partials(&self, t1: f64, t2: f64, x: f64) -> Result<Partials> {
                    let (p, q) = (self.0.partials(t1, t2, x)?, self.1.partials(t1, t2, x)?);
                    Ok(Partials { v_t1: p.v_t1 + q.v_t1, v_t2: p.v_t2 + q.v_t2, v_x: p.v_x + q.v_x, v_xx: p.v_xx + q.v_xx })
                }
            }
            let (u, w) = (pl(alpha), pl(beta));
            let m = ex1(0.5, f1, g1);
            let sum = l2_operator(&Sum(u, w), &m, 0.0, 0.0, x).unwrap();
            let parts = l2_operator(&u, &m, 0.0, 0.0, x).unwrap() + l2_operator(&w, &m, 0.0, 0.0, x).unwrap();
            let (_, mu) = l2_terms(&u, &m, 0.0, 0.0, x).unwrap();
            let (_, mw) = l2_terms(&w, &m, 0.0, 0.0, x).unwrap();
            prop_assert!((sum - parts).abs() <= 1e-13 * (mu + mw).max(f64::MIN_POSITIVE));
        }

        #[test]
        fn verdicts_invariant_under_positive_scaling(
            c in 0.01f64..100.0,
            f1 in -3.0f64..3.0,
            g1 in 0.0f64..3.0,
        ) {
            let v = pl(0.5);
            let m = ex1(1.0, f1, g1);
            let scan = ScanBox { t1: Axis::new(0.0, 1.0, 2), t2: Axis::new(0.0, 1.0, 2), h: 1.0 };
            let density = Density { radii: 9, inner_ratio: 1e-2 };
            let plain = scan_theorem1(&v, &m, &scan, &density).unwrap();
            let scaled = scan_theorem1(&Scaled(c, &v), &m, &scan, &density).unwrap();
            prop_assert_eq!(plain.verdict, scaled.verdict);
            let plain2 = scan_theorem2(&v, &m, &scan, &[0.1], &density).unwrap();
            let scaled2 = scan_theorem2(&Scaled(c, &v), &m, &scan, &[0.1], &density).unwrap();
            prop_assert_eq!(plain2.verdict, scaled2.verdict);
        }
    }
}

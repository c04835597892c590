//! The random clock: one-sided β-stable variates, the stable subordinator
//! `U(s)` on an operational grid, and its first-passage inverse `E_t` on a
//! real-time grid.
//!
//! Discretisation convention: with operational step `δ`,
//! `E_t ≈ δ · (min{n : U(nδ) > t} − 1)`. This approximates the exact inverse
//! from below and the error is at most `δ`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::Open01;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};

/// Default rejection limits for the stability index. Draws become extremely
/// heavy tailed near the ends of (0, 1).
pub const DEFAULT_BETA_LIMITS: BetaLimits = BetaLimits { lower: 0.05, upper: 0.95 };

/// Default operational step.
pub const DEFAULT_OP_STEP: f64 = 1e-3;

/// Open interval of accepted stability indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaLimits {
    pub lower: f64,
    pub upper: f64,
}

/// Stability index β of the subordinator, `0 < β < 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct StableIndex(f64);

impl StableIndex {
    /// Validates against [`DEFAULT_BETA_LIMITS`].
    pub fn new(beta: f64) -> Result<Self> {
        Self::with_limits(beta, DEFAULT_BETA_LIMITS)
    }

    pub fn with_limits(beta: f64, limits: BetaLimits) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::domain(format!("stability index {beta} outside (0, 1)")));
        }
        if beta <= limits.lower || beta >= limits.upper {
            return Err(Error::domain(format!(
                "stability index {beta} outside the accepted range ({}, {})",
                limits.lower, limits.upper
            )));
        }
        Ok(Self(beta))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for StableIndex {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<StableIndex> for f64 {
    fn from(b: StableIndex) -> f64 {
        b.0
    }
}

/// Uniform real-time grid `t_k = k·dt`, `k = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    dt: f64,
    n_steps: usize,
}

impl TimeGrid {
    /// Grid covering `[0, t_max]`; `t_max` must be an integer multiple of `dt`
    /// up to rounding.
    pub fn new(t_max: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::domain(format!("grid step must be positive, got {dt}")));
        }
        if !(t_max >= 0.0 && t_max.is_finite()) {
            return Err(Error::domain(format!("grid end must be nonnegative, got {t_max}")));
        }
        let n = (t_max / dt).round();
        if (n * dt - t_max).abs() > 1e-9 * t_max.max(1.0) {
            return Err(Error::domain(format!("grid end {t_max} is not a multiple of step {dt}")));
        }
        Ok(Self { dt, n_steps: n as usize })
    }

    pub fn from_steps(n_steps: usize, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::domain(format!("grid step must be positive, got {dt}")));
        }
        Ok(Self { dt, n_steps })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of grid points (`n_steps + 1`).
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn t(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn t_max(&self) -> f64 {
        self.t(self.n_steps)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.t(k)).collect()
    }

    /// Index of the grid point nearest to `t`.
    pub fn nearest_index(&self, t: f64) -> Result<usize> {
        let half = 0.5 * self.dt;
        if !(t >= -half && t <= self.t_max() + half) {
            return Err(Error::domain(format!("time {t} outside grid [0, {}]", self.t_max())));
        }
        Ok(((t / self.dt).round().max(0.0) as usize).min(self.n_steps))
    }
}

/// Sampler for increments of the stable subordinator over an operational
/// interval of length `scale_dt`, i.e. variates with Laplace transform
/// `exp(−scale_dt · s^β)`.
///
/// Uses Kanter's representation of the positive stable law:
/// `S = sin(βV)/sin(V)^{1/β} · (sin((1−β)V)/W)^{(1−β)/β}` with `V ~ U(0, π)`
/// and `W ~ Exp(1)`, scaled by `scale_dt^{1/β}`.
#[derive(Debug, Clone, Copy)]
pub struct StableSampler {
    beta: f64,
    inv_beta: f64,
    tail_exp: f64,
    scale: f64,
}

impl StableSampler {
    pub fn new(beta: StableIndex, scale_dt: f64) -> Result<Self> {
        if !(scale_dt > 0.0 && scale_dt.is_finite()) {
            return Err(Error::domain(format!("operational scale must be positive, got {scale_dt}")));
        }
        let b = beta.value();
        Ok(Self { beta: b, inv_beta: 1.0 / b, tail_exp: (1.0 - b) / b, scale: scale_dt.powf(1.0 / b) })
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let v = PI * rng.sample::<f64, _>(Open01);
            let w = -rng.sample::<f64, _>(Open01).ln();
            let head = (self.beta * v).sin() / v.sin().powf(self.inv_beta);
            let tail = (((1.0 - self.beta) * v).sin() / w).powf(self.tail_exp);
            let x = self.scale * head * tail;
            if x > 0.0 && x.is_finite() {
                return x;
            }
        }
    }
}

/// One increment of `U` over operational time `scale_dt`.
pub fn sample_stable_increment<R: Rng + ?Sized>(beta: StableIndex, scale_dt: f64, rng: &mut R) -> Result<f64> {
    Ok(StableSampler::new(beta, scale_dt)?.sample(rng))
}

/// `U(n_steps · op_step)` as the sum of `n_steps` independent increments.
pub fn subordinator_value<R: Rng + ?Sized>(beta: StableIndex, op_step: f64, n_steps: usize, rng: &mut R) -> Result<f64> {
    let sampler = StableSampler::new(beta, op_step)?;
    Ok((0..n_steps).map(|_| sampler.sample(rng)).sum())
}

/// Subordinator values `U(nδ)` for `n = 0, 1, …`, continued until the running
/// sum exceeds `t_max`. `u[0] = 0`.
pub fn simulate_subordinator<R: Rng + ?Sized>(beta: StableIndex, op_step: f64, t_max: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::domain(format!("t_max must be positive, got {t_max}")));
    }
    subordinator_until(beta, op_step, t_max, 1, rng)
}

/// Like [`simulate_subordinator`] but accepts `level = 0` and keeps drawing
/// until the path length minus one is a multiple of `block`.
pub(crate) fn subordinator_until<R: Rng + ?Sized>(
    beta: StableIndex,
    op_step: f64,
    level: f64,
    block: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let sampler = StableSampler::new(beta, op_step)?;
    let mut u = Vec::with_capacity(1024);
    u.push(0.0);
    let mut acc = 0.0f64;
    while acc <= level || (u.len() - 1) % block != 0 {
        let next = acc + sampler.sample(rng);
        // An increment below the resolution of `acc` still has to move the path.
        acc = if next > acc { next } else { acc.next_up() };
        u.push(acc);
    }
    Ok(u)
}

/// Coupled discrete realisation of `U` on the operational grid and of `E_t`
/// on a real-time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ClockPath {
    op_step: f64,
    u_values: Vec<f64>,
    e_values: Vec<f64>,
    grid: TimeGrid,
    id: u64,
}

impl ClockPath {
    pub fn op_step(&self) -> f64 {
        self.op_step
    }

    pub fn u_values(&self) -> &[f64] {
        &self.u_values
    }

    pub fn e_values(&self) -> &[f64] {
        &self.e_values
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Content fingerprint used to tie noise paths and trajectories back to
    /// the clock that produced them.
    pub fn id(&self) -> u64 {
        self.id
    }

    /// Deterministic identity clock `E_t = t` (and `U(s) = s`) on `grid`,
    /// with operational step equal to the grid step. Used for the classical,
    /// non-time-changed equation.
    pub fn identity(grid: TimeGrid) -> Self {
        let n = grid.n_steps();
        let u_values: Vec<f64> = (0..=n + 1).map(|k| grid.t(k)).collect();
        let e_values: Vec<f64> = (0..=n).map(|k| grid.t(k)).collect();
        let id = fingerprint(&e_values, 0x1d);
        Self { op_step: grid.dt(), u_values, e_values, grid, id }
    }

    #[cfg(test)]
    pub(crate) fn with_e_values_unchecked(&self, e_values: Vec<f64>) -> Self {
        Self { e_values, ..self.clone() }
    }

    /// Check every structural invariant of the path.
    pub fn validate(&self) -> Result<()> {
        let u = &self.u_values;
        if u.first() != Some(&0.0) {
            return Err(Error::InvariantViolation("subordinator must start at 0".into()));
        }
        if let Some(i) = u.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvariantViolation(format!("subordinator not strictly increasing at index {i}")));
        }
        let e = &self.e_values;
        if e.first() != Some(&0.0) {
            return Err(Error::InvariantViolation("inverse clock must start at 0".into()));
        }
        if let Some(i) = e.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InvariantViolation(format!("inverse clock decreases at index {i}")));
        }
        for (k, &ek) in e.iter().enumerate() {
            let m = (ek / self.op_step).round() as usize;
            let t = self.grid.t(k);
            if m + 1 >= u.len() || u[m] > t || u[m + 1] <= t {
                return Err(Error::InvariantViolation(format!("inversion inconsistent at grid index {k}")));
            }
        }
        Ok(())
    }
}

/// Build the inverse clock on `grid` from subordinator values
/// `u_values[n] = U(n·op_step)`:
/// `e[k] = op_step · (min{n : u[n] > t_k} − 1)`.
pub fn invert_subordinator(u_values: Vec<f64>, op_step: f64, grid: TimeGrid) -> Result<ClockPath> {
    if !(op_step > 0.0) {
        return Err(Error::domain(format!("operational step must be positive, got {op_step}")));
    }
    if u_values.first() != Some(&0.0) {
        return Err(Error::InvariantViolation("subordinator must start at 0".into()));
    }
    let e_values = first_passage_indices(&u_values, &grid)?
        .into_iter()
        .map(|m| m as f64 * op_step)
        .collect();
    let id = fingerprint(&u_values, op_step.to_bits());
    Ok(ClockPath { op_step, u_values, e_values, grid, id })
}

/// Operational indices `min{n : u[n] > t_k} − 1` for every grid point.
pub(crate) fn first_passage_indices(u_values: &[f64], grid: &TimeGrid) -> Result<Vec<usize>> {
    let reached = *u_values.last().unwrap_or(&0.0);
    if u_values.len() < 2 || reached <= grid.t_max() {
        return Err(Error::InsufficientPath { reached, required: grid.t_max() });
    }
    let mut out = Vec::with_capacity(grid.len());
    let mut n = 1usize;
    for k in 0..grid.len() {
        let t = grid.t(k);
        while u_values[n] <= t {
            n += 1;
        }
        out.push(n - 1);
    }
    Ok(out)
}

fn fingerprint(values: &[f64], salt: u64) -> u64 {
    // FNV-1a over the bit patterns
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ salt;
    for v in values {
        for byte in v.to_bits().to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// `E[E_t^n] = n! · t^{nβ} / Γ(nβ + 1)`.
pub fn clock_moment(beta: StableIndex, t: f64, n: u32) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("time must be nonnegative, got {t}")));
    }
    if n == 0 {
        return Ok(1.0);
    }
    let nb = n as f64 * beta.value();
    let factorial: f64 = (1..=n).map(f64::from).product();
    Ok(factorial * t.powf(nb) / gamma(nb + 1.0))
}

/// Series evaluation settings for [`mittag_leffler`].
#[derive(Debug, Clone, Copy)]
pub struct MittagLefflerOptions {
    pub max_terms: usize,
    /// Largest accepted |z|.
    pub max_abs_z: f64,
    /// Target absolute accuracy (relative for |E| > 1).
    pub accuracy: f64,
}

impl Default for MittagLefflerOptions {
    fn default() -> Self {
        Self { max_terms: 5000, max_abs_z: 10.0, accuracy: 1e-10 }
    }
}

/// One-parameter Mittag-Leffler function `E_β(z) = Σ z^n / Γ(nβ + 1)`.
pub fn mittag_leffler(beta: f64, z: f64) -> Result<f64> {
    mittag_leffler_with(beta, z, MittagLefflerOptions::default())
}

pub fn mittag_leffler_with(beta: f64, z: f64, opts: MittagLefflerOptions) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::domain(format!("Mittag-Leffler index {beta} outside (0, 1]")));
    }
    if !z.is_finite() || z.abs() > opts.max_abs_z {
        return Err(Error::domain(format!("|z| = {} exceeds the series budget {}", z.abs(), opts.max_abs_z)));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    let ln_abs_z = z.abs().ln();
    let negative = z < 0.0;
    let (mut sum, mut comp) = (1.0f64, 0.0f64);
    let mut max_term = 1.0f64;
    let mut prev = 1.0f64;
    for n in 1..opts.max_terms {
        let nf = n as f64;
        let mag = (nf * ln_abs_z - ln_gamma(nf * beta + 1.0)).exp();
        let term = if negative && n % 2 == 1 { -mag } else { mag };
        // Neumaier summation
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        max_term = max_term.max(mag);
        let total = sum + comp;
        if mag < prev && mag <= f64::EPSILON * 1e-2 * total.abs().max(f64::MIN_POSITIVE) {
            let rounding = 8.0 * f64::EPSILON * max_term;
            if rounding > opts.accuracy * total.abs().max(1.0) {
                return Err(Error::Accuracy {
                    what: "Mittag-Leffler series",
                    detail: format!("cancellation error ~{rounding:e} at z = {z}"),
                });
            }
            return Ok(total);
        }
        prev = mag;
    }
    Err(Error::Accuracy {
        what: "Mittag-Leffler series",
        detail: format!("no convergence within {} terms at z = {z}", opts.max_terms),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Channel};
    use statrs::function::erf::erfc;

    fn beta(b: f64) -> StableIndex {
        StableIndex::new(b).unwrap()
    }

    #[test]
    fn stable_index_limits() {
        assert!(StableIndex::new(0.0).is_err());
        assert!(StableIndex::new(1.0).is_err());
        assert!(StableIndex::new(0.05).is_err());
        assert!(StableIndex::new(0.95).is_err());
        assert!(StableIndex::new(0.5).is_ok());
        let wide = BetaLimits { lower: 0.0, upper: 1.0 };
        assert!(StableIndex::with_limits(0.97, wide).is_ok());
        assert!(StableIndex::with_limits(1.2, wide).is_err());
    }

    #[test]
    fn time_grid_basics() {
        let g = TimeGrid::new(1.0, 1e-3).unwrap();
        assert_eq!(g.len(), 1001);
        assert_eq!(g.t(0), 0.0);
        assert!((g.t_max() - 1.0).abs() < 1e-12);
        assert_eq!(g.nearest_index(0.5004).unwrap(), 500);
        assert!(g.nearest_index(1.1).is_err());
        assert!(TimeGrid::new(1.0, 0.3).is_err());
        assert!(TimeGrid::new(1.0, 0.0).is_err());
        assert!(g.values().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn increments_are_positive_and_reject_bad_scale() {
        let mut rng = substream(1, 0, Channel::Clock);
        for b in [0.1, 0.3, 0.5, 0.8, 0.9] {
            let s = StableSampler::new(StableIndex::with_limits(b, BetaLimits { lower: 0.0, upper: 1.0 }).unwrap(), 1.0).unwrap();
            assert!((0..10_000).all(|_| s.sample(&mut rng) > 0.0));
        }
        assert!(sample_stable_increment(beta(0.5), 0.0, &mut rng).is_err());
        assert!(sample_stable_increment(beta(0.5), -1.0, &mut rng).is_err());
    }

    #[test]
    fn laplace_transform_at_unit_scale() {
        // E[exp(-X)] = exp(-1) for scale 1.
        let mut rng = substream(11, 0, Channel::Clock);
        let s = StableSampler::new(beta(0.5), 1.0).unwrap();
        let v: Vec<f64> = (0..100_000).map(|_| (-s.sample(&mut rng)).exp()).collect();
        let m = crate::stats::MeanEstimate::from_samples(&v);
        assert!(m.z_score((-1.0f64).exp()).abs() < 3.0, "{m:?}");
    }

    #[test]
    fn scaling_property_matches_unit_draws() {
        // A draw at scale δ is distributed as δ^{1/β} times a unit draw:
        // with identical streams the two constructions agree sample by sample.
        let delta = 0.01;
        let mut a = substream(5, 0, Channel::Clock);
        let mut b = substream(5, 0, Channel::Clock);
        let scaled = StableSampler::new(beta(0.5), delta).unwrap();
        let unit = StableSampler::new(beta(0.5), 1.0).unwrap();
        for _ in 0..1000 {
            let x = scaled.sample(&mut a);
            let y = delta.powf(2.0) * unit.sample(&mut b);
            assert!((x - y).abs() <= 1e-12 * y.abs());
        }
        // and the Laplace transform at s = 10 matches exp(-δ s^β)
        let mut rng = substream(6, 0, Channel::Clock);
        let v: Vec<f64> = (0..100_000).map(|_| (-10.0 * scaled.sample(&mut rng)).exp()).collect();
        let m = crate::stats::MeanEstimate::from_samples(&v);
        assert!(m.z_score((-delta * 10f64.sqrt()).exp()).abs() < 4.0, "{m:?}");
    }

    #[test]
    fn subordinator_path_construction() {
        let mut rng = substream(3, 0, Channel::Clock);
        let mut twin = substream(3, 0, Channel::Clock);
        let u = simulate_subordinator(beta(0.5), 0.001, 1.0, &mut rng).unwrap();
        assert_eq!(u[0], 0.0);
        assert!(*u.last().unwrap() > 1.0);
        assert!(u[u.len() - 2] <= 1.0);
        assert!(u.windows(2).all(|w| w[1] > w[0]));
        let first = sample_stable_increment(beta(0.5), 0.001, &mut twin).unwrap();
        assert_eq!(u[1], first);
        assert!(simulate_subordinator(beta(0.5), 0.001, 0.0, &mut rng).is_err());
        assert!(simulate_subordinator(beta(0.5), 0.0, 1.0, &mut rng).is_err());
    }

    #[test]
    fn step_count_variance_grows_with_level() {
        // Number of steps to pass level t is op_step^{-1}·E_t (+1); its
        // variance must grow with t.
        let var_at = |t: f64| {
            let counts: Vec<f64> = (0..10_000)
                .map(|i| {
                    let mut rng = substream(8, i, Channel::Clock);
                    simulate_subordinator(beta(0.5), 0.01, t, &mut rng).unwrap().len() as f64
                })
                .collect();
            let m = counts.iter().sum::<f64>() / counts.len() as f64;
            counts.iter().map(|c| (c - m).powi(2)).sum::<f64>() / (counts.len() - 1) as f64
        };
        let (a, b, c) = (var_at(0.25), var_at(1.0), var_at(4.0));
        assert!(a < b && b < c, "{a} {b} {c}");
    }

    #[test]
    fn inversion_examples() {
        let grid = TimeGrid::new(3.0, 1.0).unwrap();
        let clock = invert_subordinator(vec![0.0, 2.0, 5.0], 0.5, grid).unwrap();
        // t = 0, 1, 2, 3
        assert_eq!(clock.e_values(), &[0.0, 0.0, 0.5, 0.5]);
        clock.validate().unwrap();
    }

    #[test]
    fn inversion_needs_covering_path() {
        let grid = TimeGrid::new(3.0, 1.0).unwrap();
        let err = invert_subordinator(vec![0.0, 2.0, 3.0], 0.5, grid).unwrap_err();
        assert!(matches!(err, Error::InsufficientPath { .. }));
    }

    #[test]
    fn identity_clock_is_consistent() {
        let grid = TimeGrid::new(2.0, 0.01).unwrap();
        let c = ClockPath::identity(grid);
        c.validate().unwrap();
        assert_eq!(c.e_values(), grid.values().as_slice());
    }

    #[test]
    fn simulated_clock_invariants() {
        for seed in 0..20 {
            let mut rng = substream(seed, 0, Channel::Clock);
            let grid = TimeGrid::new(2.0, 0.01).unwrap();
            let u = simulate_subordinator(beta(0.6), 0.001, 2.0, &mut rng).unwrap();
            let c = invert_subordinator(u, 0.001, grid).unwrap();
            c.validate().unwrap();
            assert_eq!(c.e_values()[0], 0.0);
        }
    }

    #[test]
    fn clock_moment_values() {
        // 1/Γ(3/2) = 2/√π
        let m1 = clock_moment(beta(0.5), 1.0, 1).unwrap();
        assert!((m1 - 2.0 / PI.sqrt()).abs() < 1e-13);
        assert!((clock_moment(beta(0.5), 1.0, 2).unwrap() - 2.0).abs() < 1e-13);
        assert_eq!(clock_moment(beta(0.3), 0.0, 3).unwrap(), 0.0);
        assert_eq!(clock_moment(beta(0.3), 2.0, 0).unwrap(), 1.0);
        assert!(clock_moment(beta(0.3), -1.0, 1).is_err());
        // 1/Γ(1.8), high-precision reference value
        assert!((clock_moment(beta(0.8), 1.0, 1).unwrap() - 1.073_671_274_030_834).abs() < 1e-12);
    }

    #[test]
    fn mittag_leffler_special_cases() {
        assert!((mittag_leffler(1.0, 1.0).unwrap() - std::f64::consts::E).abs() < 1e-13);
        assert!((mittag_leffler(1.0, -2.5).unwrap() - (-2.5f64).exp()).abs() < 1e-13);
        assert_eq!(mittag_leffler(0.37, 0.0).unwrap(), 1.0);
        let v = mittag_leffler(0.5, -1.0).unwrap();
        assert!((v - 0.427_583_576_155_807).abs() < 1e-10);
    }

    #[test]
    fn mittag_leffler_half_matches_erfc() {
        for i in 0..=40 {
            let z = -3.0 + 0.15 * i as f64;
            let expected = (z * z).exp() * erfc(-z);
            let got = mittag_leffler(0.5, z).unwrap();
            assert!((got - expected).abs() <= 1e-10 * expected.max(1.0), "z={z}: {got} vs {expected}");
        }
    }

    #[test]
    fn mittag_leffler_rejects_out_of_budget() {
        assert!(mittag_leffler(0.5, 50.0).is_err());
        assert!(mittag_leffler(0.0, 1.0).is_err());
        assert!(matches!(mittag_leffler(0.5, -8.0), Err(Error::Accuracy { .. })));
    }
}

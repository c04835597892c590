//! Time-changed Brownian motion `B(E_t)` sampled on the clock's real-time
//! grid.
//!
//! The Brownian motion is independent of the clock: callers draw the two
//! from separate substreams (see [`crate::rng::PathStreams`]).

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::clock::{first_passage_indices, invert_subordinator, subordinator_until, ClockPath, StableIndex, TimeGrid};
use crate::error::{Error, Result};
use crate::rng::PathStreams;
use crate::stats::MeanEstimate;

/// `B(E_{t_k})` at every grid point of the clock it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    b_of_e: Vec<f64>,
    grid: TimeGrid,
    clock_ref: u64,
}

impl NoisePath {
    pub fn values(&self) -> &[f64] {
        &self.b_of_e
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Id of the [`ClockPath`] this path was sampled on.
    pub fn clock_ref(&self) -> u64 {
        self.clock_ref
    }

    /// Content fingerprint of the path.
    pub fn id(&self) -> u64 {
        self.b_of_e.iter().fold(self.clock_ref, |h, v| (h ^ v.to_bits()).wrapping_mul(0x0000_0100_0000_01b3))
    }

    /// Checks `b[0] = 0` and constancy over flat clock periods.
    pub fn validate_against(&self, clock: &ClockPath) -> Result<()> {
        if self.b_of_e.first() != Some(&0.0) {
            return Err(Error::InvariantViolation("time-changed Brownian motion must start at 0".into()));
        }
        let e = clock.e_values();
        for k in 0..e.len().saturating_sub(1) {
            if e[k + 1] == e[k] && self.b_of_e[k + 1] != self.b_of_e[k] {
                return Err(Error::InvariantViolation(format!("noise moves on a flat clock period at index {k}")));
            }
        }
        Ok(())
    }
}

/// Sample `B(E_t)` given the clock: `b[k+1] = b[k] + sqrt(ΔE_k)·Z_k`.
///
/// One normal draw is consumed per grid step, flat or not, so the stream
/// position depends only on the grid.
pub fn simulate_time_changed_bm<R: Rng + ?Sized>(clock: &ClockPath, rng: &mut R) -> Result<NoisePath> {
    let e = clock.e_values();
    let mut b = Vec::with_capacity(e.len());
    b.push(0.0);
    let mut acc = 0.0f64;
    for k in 0..e.len() - 1 {
        let de = e[k + 1] - e[k];
        if de < 0.0 {
            return Err(Error::InvariantViolation(format!("negative clock increment at index {k}")));
        }
        let z: f64 = rng.sample(StandardNormal);
        if de > 0.0 {
            acc += de.sqrt() * z;
        }
        b.push(acc);
    }
    Ok(NoisePath { b_of_e: b, grid: *clock.grid(), clock_ref: clock.id() })
}

/// Clock and noise for one path, drawn from the path's two substreams.
pub fn coupled_paths(beta: StableIndex, grid: TimeGrid, op_step: f64, streams: PathStreams) -> Result<(ClockPath, NoisePath)> {
    let mut clock_rng = streams.clock();
    let u = subordinator_until(beta, op_step, grid.t_max(), 1, &mut clock_rng)?;
    let clock = invert_subordinator(u, op_step, grid)?;
    let noise = simulate_time_changed_bm(&clock, &mut streams.noise())?;
    Ok((clock, noise))
}

/// Identity clock with a standard Brownian motion on `grid`: the classical,
/// non-time-changed driver, drawn from the same noise substream.
pub fn classical_paths(grid: TimeGrid, streams: PathStreams) -> Result<(ClockPath, NoisePath)> {
    let clock = ClockPath::identity(grid);
    let noise = simulate_time_changed_bm(&clock, &mut streams.noise())?;
    Ok((clock, noise))
}

/// Strongly coupled (clock, noise) pairs at `levels` resolutions, coarsest
/// first. Level `l` uses `dt0 / 2^l` and `op_step0 / 2^l`.
///
/// The subordinator and the Brownian motion are drawn once on the finest
/// operational lattice; coarser levels read the same paths at every
/// `2^{levels-1-l}`-th lattice point. `B(E_t)` is read off the lattice
/// Brownian motion at the inverse clock's lattice index, which has the same
/// law as [`simulate_time_changed_bm`].
pub fn refinement_levels(
    beta: StableIndex,
    t_max: f64,
    dt0: f64,
    op_step0: f64,
    levels: usize,
    streams: PathStreams,
) -> Result<Vec<(ClockPath, NoisePath)>> {
    if levels == 0 || levels > 20 {
        return Err(Error::domain(format!("refinement levels must be in 1..=20, got {levels}")));
    }
    let coarse = TimeGrid::new(t_max, dt0)?;
    let finest_ratio = 1usize << (levels - 1);
    let fine_step = op_step0 / finest_ratio as f64;
    let u_fine = subordinator_until(beta, fine_step, t_max, finest_ratio, &mut streams.clock())?;

    let mut noise_rng = streams.noise();
    let sd = fine_step.sqrt();
    let mut lattice_b = Vec::with_capacity(u_fine.len());
    lattice_b.push(0.0f64);
    for j in 1..u_fine.len() {
        let z: f64 = noise_rng.sample(StandardNormal);
        lattice_b.push(lattice_b[j - 1] + sd * z);
    }

    let mut out = Vec::with_capacity(levels);
    for level in 0..levels {
        let stride = finest_ratio >> level;
        let scale = (1usize << level) as f64;
        let grid = TimeGrid::from_steps(coarse.n_steps() << level, dt0 / scale)?;
        let u: Vec<f64> = u_fine.iter().step_by(stride).copied().collect();
        let indices = first_passage_indices(&u, &grid)?;
        let clock = invert_subordinator(u, op_step0 / scale, grid)?;
        let b_of_e = indices.iter().map(|&m| lattice_b[m * stride]).collect();
        out.push((clock.clone(), NoisePath { b_of_e, grid, clock_ref: clock.id() }));
    }
    Ok(out)
}

/// Ensemble statistics of `B(E_t)` at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MartingaleSummary {
    /// Grid time actually used (nearest grid point to the request).
    pub t: f64,
    pub n_paths: usize,
    pub mean: f64,
    pub mean_se: f64,
    pub second_moment: f64,
    pub second_moment_se: f64,
}

impl MartingaleSummary {
    pub fn from_values(t: f64, values: &[f64]) -> Self {
        let first = MeanEstimate::from_samples(values);
        let squares: Vec<f64> = values.iter().map(|v| v * v).collect();
        let second = MeanEstimate::from_samples(&squares);
        Self {
            t,
            n_paths: values.len(),
            mean: first.mean,
            mean_se: first.std_error,
            second_moment: second.mean,
            second_moment_se: second.std_error,
        }
    }
}

/// Minimum ensemble size accepted by [`martingale_diagnostics`].
pub const MIN_DIAGNOSTIC_PATHS: usize = 100;

/// Sample mean and second moment of `B(E_t)` at the grid point nearest `t`.
pub fn martingale_diagnostics(paths: &[NoisePath], t: f64) -> Result<MartingaleSummary> {
    if paths.len() < MIN_DIAGNOSTIC_PATHS {
        return Err(Error::domain(format!(
            "martingale diagnostics need at least {MIN_DIAGNOSTIC_PATHS} paths, got {}",
            paths.len()
        )));
    }
    let grid = paths[0].grid;
    if paths.iter().any(|p| p.grid != grid) {
        return Err(Error::GridMismatch("ensemble paths use different grids".into()));
    }
    let k = grid.nearest_index(t)?;
    let values: Vec<f64> = paths.iter().map(|p| p.b_of_e[k]).collect();
    Ok(MartingaleSummary::from_values(grid.t(k), &values))
}

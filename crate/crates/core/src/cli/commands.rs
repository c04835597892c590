//! The five subcommands. Each returns the rendered primary output and
//! whether its checks passed; writing files is left to the caller.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::config::{Experiment, Format, ModelFamily, RunConfig};
use crate::clock::{clock_moment, invert_subordinator, mittag_leffler, subordinator_until, subordinator_value, StableIndex, TimeGrid};
use crate::error::{Error, Result};
use crate::lyapunov::{
    default_radial_probe, ito_residual, scan_theorem1, scan_theorem2, scan_theorem3, Axis, Density, ProbeFunction, ScanBox,
    ScanReport,
};
use crate::noise::{coupled_paths, refinement_levels, MartingaleSummary};
use crate::rng::PathStreams;
use crate::sde::{integrate, CoefficientModel, Trajectory};
use crate::stability::{
    corollary_transfer_test, delta_sweep, estimate_convergence_probabilities, estimate_stay_probabilities, example2_gates,
    run_example1, run_example2, Criterion, MonotoneFlag, StabilityEstimate,
};
use crate::stats::MeanEstimate;

/// Rendered output of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub primary: String,
    /// Extra files as (suffix appended to the primary file stem, contents).
    pub extra: Vec<(String, String)>,
    pub passed: bool,
}

impl Output {
    fn ok(primary: String) -> Self {
        Self { primary, extra: Vec::new(), passed: true }
    }
}

/// 17 significant digits, locale independent.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn grid_of(cfg: &RunConfig) -> Result<TimeGrid> {
    TimeGrid::new(cfg.t_max, cfg.dt)
}

/// One inverse-clock path, or ensemble moments of `E_t` at `t_max/2` and `t_max`.
pub fn cmd_clock(cfg: &RunConfig) -> Result<Output> {
    let beta = cfg.stable_index()?;
    if cfg.ensemble {
        return clock_ensemble(cfg, beta);
    }
    let grid = grid_of(cfg)?;
    let streams = PathStreams::new(cfg.seed, cfg.path);
    let u = subordinator_until(beta, cfg.op_step, grid.t_max(), 1, &mut streams.clock())?;
    let clock = invert_subordinator(u, cfg.op_step, grid)?;
    let t = grid.values();
    let e = clock.e_values();
    let u = clock.u_values();
    let s: Vec<f64> = (0..u.len()).map(|j| j as f64 * cfg.op_step).collect();
    let (primary, operational) = match cfg.format {
        Format::Csv => (
            csv(&["t", "E_t"], t.iter().zip(e).map(|(a, b)| vec![num(*a), num(*b)])),
            csv(&["s", "U_s"], s.iter().zip(u).map(|(a, b)| vec![num(*a), num(*b)])),
        ),
        Format::Json => (to_json(&json!({ "t": t, "E_t": e }))?, to_json(&json!({ "s": s, "U_s": u }))?),
    };
    let mut out = Output::ok(primary);
    if cfg.write_operational {
        out.extra.push(("operational".into(), operational));
    }
    Ok(out)
}

#[derive(Serialize)]
struct MomentRow {
    t: f64,
    n_paths: usize,
    mean: f64,
    mean_se: f64,
    expected_mean: f64,
    second_moment: f64,
    second_moment_se: f64,
    expected_second_moment: f64,
}

/// `E_t` at the two times of a two-step grid for every path.
fn clock_values(beta: StableIndex, t_max: f64, op_step: f64, n: usize, seed: u64) -> Result<Vec<[f64; 2]>> {
    let grid = TimeGrid::from_steps(2, 0.5 * t_max)?;
    (0..n as u64)
        .into_par_iter()
        .map(|path| {
            let u = subordinator_until(beta, op_step, t_max, 1, &mut PathStreams::new(seed, path).clock())?;
            let c = invert_subordinator(u, op_step, grid)?;
            Ok([c.e_values()[1], c.e_values()[2]])
        })
        .collect()
}

fn clock_ensemble(cfg: &RunConfig, beta: StableIndex) -> Result<Output> {
    let values = clock_values(beta, cfg.t_max, cfg.op_step, cfg.n_paths, cfg.seed)?;
    let mut rows = Vec::new();
    for (i, t) in [0.5 * cfg.t_max, cfg.t_max].into_iter().enumerate() {
        let e: Vec<f64> = values.iter().map(|v| v[i]).collect();
        let m = MartingaleSummary::from_values(t, &e);
        rows.push(MomentRow {
            t,
            n_paths: m.n_paths,
            mean: m.mean,
            mean_se: m.mean_se,
            expected_mean: clock_moment(beta, t, 1)?,
            second_moment: m.second_moment,
            second_moment_se: m.second_moment_se,
            expected_second_moment: clock_moment(beta, t, 2)?,
        });
    }
    let primary = match cfg.format {
        Format::Csv => csv(
            &["t", "n_paths", "mean_E", "mean_E_se", "expected_mean_E", "mean_E2", "mean_E2_se", "expected_mean_E2"],
            rows.iter().map(|r| {
                vec![
                    num(r.t),
                    r.n_paths.to_string(),
                    num(r.mean),
                    num(r.mean_se),
                    num(r.expected_mean),
                    num(r.second_moment),
                    num(r.second_moment_se),
                    num(r.expected_second_moment),
                ]
            }),
        ),
        Format::Json => to_json(&rows)?,
    };
    Ok(Output::ok(primary))
}

/// One named oracle comparison.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub beta: f64,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: String, beta: f64, value: f64, expected: f64, tolerance: f64) -> Self {
        let passed = (value - expected).abs() <= tolerance;
        Self { name, beta, value, expected, tolerance, passed }
    }

    /// Mean within `max(k·SE, rel·|expected|)`.
    fn mean(name: String, beta: f64, est: MeanEstimate, expected: f64, k_se: f64, rel: f64) -> Self {
        Self::new(name, beta, est.mean, expected, (k_se * est.std_error).max(rel * expected.abs()))
    }
}

/// Per-path draws used by the oracle suite.
struct OracleDraw {
    u1: f64,
    e: [f64; 2],
    b: f64,
}

fn oracle_draws(beta: StableIndex, cfg: &RunConfig) -> Result<Vec<OracleDraw>> {
    let grid = TimeGrid::from_steps(2, 0.5 * cfg.t_max)?;
    (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|path| {
            let streams = PathStreams::new(cfg.seed, path);
            let u1 = subordinator_value(beta, 0.01, 100, &mut streams.aux())?;
            let (clock, noise) = coupled_paths(beta, grid, cfg.op_step, streams)?;
            let e = clock.e_values();
            Ok(OracleDraw { u1, e: [e[1] * cfg.clock_scale, e[2] * cfg.clock_scale], b: noise.values()[2] })
        })
        .collect()
}

fn oracle_checks(beta: StableIndex, cfg: &RunConfig) -> Result<Vec<Check>> {
    let b = beta.value();
    let draws = oracle_draws(beta, cfg)?;
    let mut checks = Vec::new();
    for s in [0.5, 1.0, 2.0] {
        let samples: Vec<f64> = draws.iter().map(|d| (-s * d.u1).exp()).collect();
        let est = MeanEstimate::from_samples(&samples);
        checks.push(Check::new(format!("laplace_s{s}"), b, est.mean, (-s.powf(b)).exp(), 4.0 * est.std_error));
    }
    for (i, t) in [0.5 * cfg.t_max, cfg.t_max].into_iter().enumerate() {
        for n in [1u32, 2] {
            let samples: Vec<f64> = draws.iter().map(|d| d.e[i].powi(n as i32)).collect();
            let est = MeanEstimate::from_samples(&samples);
            checks.push(Check::mean(format!("moment_n{n}_t{t}"), b, est, clock_moment(beta, t, n)?, 3.0, 0.05));
        }
    }
    let t = cfg.t_max;
    let bs: Vec<f64> = draws.iter().map(|d| d.b).collect();
    let m = MartingaleSummary::from_values(t, &bs);
    checks.push(Check::new("martingale_mean".into(), b, m.mean, 0.0, 3.0 * m.mean_se));
    let second = MeanEstimate { n: m.n_paths, mean: m.second_moment, std_error: m.second_moment_se };
    checks.push(Check::mean("martingale_second_moment".into(), b, second, clock_moment(beta, t, 1)?, 3.0, 0.05));
    // X(t) = exp(−E_t) solves dX = −X dE; its mean is E_β(−t^β).
    let decay: Vec<f64> = draws.iter().map(|d| (-d.e[1]).exp()).collect();
    let expected = mittag_leffler(b, -t.powf(b))?;
    checks.push(Check::mean("mittag_leffler_mean".into(), b, MeanEstimate::from_samples(&decay), expected, 3.0, 0.05));
    checks.extend(ito_checks(beta, cfg)?);
    Ok(checks)
}

/// Paths in the refinement check of the oracle suite.
pub const ITO_REFINEMENT_PATHS: u64 = 1000;

/// Exact residuals for `F = x`, `F = t`, and a mean residual for `F = x²`
/// that shrinks over three refinement levels starting at `dt = δ = 0.01`.
fn ito_checks(beta: StableIndex, cfg: &RunConfig) -> Result<Vec<Check>> {
    let b = beta.value();
    let model = CoefficientModel::linear(0.0, -1.0, 1.0);
    let n = ITO_REFINEMENT_PATHS;
    let mut exact_max: f64 = 0.0;
    let mut square = [0.0f64; 3];
    for path in 0..n {
        let levels = refinement_levels(beta, cfg.t_max, 0.01, 0.01, 3, PathStreams::new(cfg.seed, path))?;
        for (l, (clock, noise)) in levels.iter().enumerate() {
            for probe in [ProbeFunction::StateIdentity, ProbeFunction::RealTime] {
                exact_max = exact_max.max(ito_residual(&probe, &model, clock, noise, 1.0)?);
            }
            square[l] += ito_residual(&ProbeFunction::Square, &model, clock, noise, 1.0)? / n as f64;
        }
    }
    let decreasing = square[0] > square[1] && square[1] > square[2];
    let mut refinement = Check::new("ito_residual_square_refines".into(), b, square[2], 0.0, f64::INFINITY);
    refinement.passed = decreasing;
    Ok(vec![Check::new("ito_residual_linear_exact".into(), b, exact_max, 0.0, 0.0), refinement])
}

/// Oracle suite over `cfg.betas`; fails if any check misses its tolerance.
pub fn cmd_validate(cfg: &RunConfig) -> Result<Output> {
    let mut checks = Vec::new();
    for &b in &cfg.betas {
        checks.extend(oracle_checks(StableIndex::new(b)?, cfg)?);
    }
    let passed = checks.iter().all(|c| c.passed);
    let primary = match cfg.format {
        Format::Csv => csv(
            &["check", "beta", "value", "expected", "tolerance", "passed"],
            checks.iter().map(|c| {
                vec![c.name.clone(), num(c.beta), num(c.value), num(c.expected), num(c.tolerance), c.passed.to_string()]
            }),
        ),
        Format::Json => to_json(&json!({ "all_passed": passed, "checks": checks }))?,
    };
    Ok(Output { primary, extra: Vec::new(), passed })
}

/// One trajectory with columns `t, E_t, B_E, X`, optionally compared with a
/// second integrator on the same clock and noise.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Output> {
    let beta = cfg.stable_index()?;
    let grid = grid_of(cfg)?;
    let model = cfg.coefficient_model();
    let (clock, noise) = coupled_paths(beta, grid, cfg.op_step, PathStreams::new(cfg.seed, cfg.path))?;
    let tr = integrate(cfg.method, &model, &clock, &noise, cfg.x0)?;
    let reference = cfg.compare_method.map(|m| integrate(m, &model, &clock, &noise, cfg.x0)).transpose()?;
    let rows = tr.x_values.len().min(reference.as_ref().map_or(usize::MAX, |r: &Trajectory| r.x_values.len()));
    let diffs: Vec<f64> = match &reference {
        Some(r) => (0..rows).map(|k| (tr.x_values[k] - r.x_values[k]).abs()).collect(),
        None => Vec::new(),
    };
    let max_diff = diffs.iter().copied().fold(0.0, f64::max);
    let diverged = tr.is_diverged() || reference.as_ref().is_some_and(|r| r.is_diverged());
    let passed = reference.is_none() || (!diverged && max_diff <= cfg.max_diff);
    let (t, e, b) = (grid.values(), clock.e_values(), noise.values());
    let primary = match cfg.format {
        Format::Csv => {
            let mut header = vec!["t", "E_t", "B_E", "X"];
            if reference.is_some() {
                header.extend(["X_ref", "abs_diff"]);
            }
            csv(
                &header,
                (0..rows).map(|k| {
                    let mut row = vec![num(t[k]), num(e[k]), num(b[k]), num(tr.x_values[k])];
                    if let Some(r) = &reference {
                        row.push(num(r.x_values[k]));
                        row.push(num(diffs[k]));
                    }
                    row
                }),
            )
        }
        Format::Json => to_json(&json!({
            "method": tr.method,
            "reference_method": reference.as_ref().map(|r| r.method),
            "diverged_at": tr.diverged_at,
            "max_abs_diff": reference.as_ref().map(|_| max_diff),
            "t": &t[..rows],
            "E_t": &e[..rows],
            "B_E": &b[..rows],
            "X": &tr.x_values[..rows],
            "X_ref": reference.as_ref().map(|r| &r.x_values[..rows]),
        }))?,
    };
    Ok(Output { primary, extra: Vec::new(), passed })
}

const STABILITY_HEADER: [&str; 10] =
    ["label", "x0", "horizon", "threshold", "probability", "ci_half_width", "n_paths", "successes", "diverged", "flag"];

fn estimate_row(label: &str, e: &StabilityEstimate, flag: &str) -> Vec<String> {
    vec![
        label.to_string(),
        num(e.x0),
        num(e.horizon),
        num(e.threshold),
        num(e.probability),
        num(e.ci_half_width),
        e.n_paths.to_string(),
        e.successes.to_string(),
        e.metadata.diverged_paths.to_string(),
        flag.to_string(),
    ]
}

fn flag_name(f: MonotoneFlag) -> &'static str {
    match f {
        MonotoneFlag::Ordered => "ordered",
        MonotoneFlag::WithinNoise => "within_noise",
        MonotoneFlag::Violated => "violated",
    }
}

/// Stability experiments selected by `cfg.experiment`.
pub fn cmd_stability(cfg: &RunConfig) -> Result<Output> {
    let beta = cfg.stable_index()?;
    let model = cfg.coefficient_model();
    let mc = cfg.mc_params();
    let horizons = [cfg.horizon, 2.0 * cfg.horizon];
    let (rows, report): (Vec<Vec<String>>, serde_json::Value) = match cfg.experiment {
        Experiment::Stay => {
            let est = estimate_stay_probabilities(&model, beta, cfg.x0, cfg.r, &horizons, &mc)?;
            (est.iter().map(|e| estimate_row("stay", e, "")).collect(), json!(est))
        }
        Experiment::Convergence => {
            let est = estimate_convergence_probabilities(&model, beta, cfg.x0, cfg.tol, &horizons, &mc)?;
            (est.iter().map(|e| estimate_row("convergence", e, "")).collect(), json!(est))
        }
        Experiment::DeltaSweep => {
            let sweep = delta_sweep(&model, beta, cfg.r, cfg.epsilon, &cfg.x0_candidates, cfg.horizon, &mc)?;
            let rows = sweep.rows.iter().map(|r| estimate_row("delta_sweep", &r.estimate, flag_name(r.monotone))).collect();
            (rows, json!(sweep))
        }
        Experiment::Example1 => {
            if cfg.model != ModelFamily::LinearConstant {
                return Err(Error::Config("the example1 experiment needs model = \"linear_constant\"".into()));
            }
            let rep = run_example1(cfg.rho1, cfg.f1, cfg.g1, cfg.alpha, beta, &cfg.example1_settings())?;
            let mut rows: Vec<Vec<String>> = rep.stay.iter().map(|e| estimate_row("stay", e, "")).collect();
            rows.extend(
                rep.convergence.iter().zip(&rep.convergence_trend).map(|(e, f)| estimate_row("convergence", e, flag_name(*f))),
            );
            (rows, json!(rep))
        }
        Experiment::Example2 => {
            let CoefficientModel::Example2 { drift, b, theta } = model else {
                return Err(Error::Config("the example2 experiment needs model = \"example2\"".into()));
            };
            let rep = run_example2(drift, b, theta, cfg.alpha, cfg.k, beta, &cfg.example2_settings())?;
            (vec![estimate_row("convergence", &rep.convergence, "")], json!(rep))
        }
        Experiment::Corollary => {
            let mut rows = Vec::new();
            let mut reports = Vec::new();
            for &f1 in &cfg.f1_grid {
                for &g1 in &cfg.g1_grid {
                    let rep = corollary_transfer_test(f1, g1, beta, cfg.x0, Criterion::Converge { tol: cfg.tol }, cfg.horizon, cfg.epsilon, &mc)?;
                    let flag = if rep.implication_holds { "transfer_ok" } else { "transfer_failed" };
                    rows.push(estimate_row(&format!("classical(f1={f1};g1={g1})"), &rep.classical, flag));
                    rows.push(estimate_row(&format!("time_changed(f1={f1};g1={g1})"), &rep.time_changed, flag));
                    reports.push(rep);
                }
            }
            (rows, json!(reports))
        }
    };
    let primary = match cfg.format {
        Format::Csv => csv(&STABILITY_HEADER, rows),
        Format::Json => to_json(&report)?,
    };
    Ok(Output::ok(primary))
}

fn scan_rows(report: &ScanReport) -> Vec<Vec<String>> {
    let mut rows: Vec<Vec<String>> = report
        .conditions
        .iter()
        .map(|c| {
            let p = c.worst_point;
            vec![
                report.theorem.to_string(),
                c.id.to_string(),
                c.satisfied.to_string(),
                c.inconclusive.to_string(),
                p.map_or(String::new(), |p| num(p.t1)),
                p.map_or(String::new(), |p| num(p.t2)),
                p.map_or(String::new(), |p| num(p.x)),
                num(c.worst_value),
            ]
        })
        .collect();
    let verdict = serde_json::to_value(report.verdict).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    rows.push(vec![report.theorem.to_string(), "verdict".into(), verdict, String::new(), String::new(), String::new(), String::new(), String::new()]);
    rows
}

/// Scans of the three sets of Lyapunov conditions for the configured model.
pub fn cmd_lyapunov(cfg: &RunConfig) -> Result<Output> {
    let model = cfg.coefficient_model();
    let gates = match model {
        CoefficientModel::Example2 { drift, b, theta } => Some(example2_gates(&drift, &b, theta, cfg.alpha, cfg.k)?),
        _ => None,
    };
    let v = cfg.lyapunov_spec()?;
    let scan = ScanBox::new(cfg.h);
    let density = Density::default();
    let reports = vec![
        scan_theorem1(&v, &model, &scan, &density)?,
        scan_theorem2(&v, &model, &scan, &cfg.shells, &density)?,
        scan_theorem3(&v, &model, &Axis::default(), &Axis::default(), &default_radial_probe())?,
    ];
    let primary = match cfg.format {
        Format::Csv => csv(
            &["theorem", "condition", "satisfied", "inconclusive", "worst_t1", "worst_t2", "worst_x", "worst_value"],
            reports.iter().flat_map(scan_rows),
        ),
        Format::Json => to_json(&json!({ "model": model, "lyapunov": v, "gates": gates, "scans": reports }))?,
    };
    Ok(Output::ok(primary))
}

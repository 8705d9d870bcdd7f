//! Executes circuits in exact, sampling or estimation mode.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use zakgross_core::estimator::{self, EstimatePlan, EstimateReport, EstimatorError, StreamTally};
use zakgross_core::measure::{exact_probabilities_ideal, MeasureError, MeasurementSpec};
use zakgross_core::wigner::{WignerError, WignerState};

use crate::circuit::CircuitSpec;

/// Tolerance on `M − 1` below which an input counts as a probability density.
pub const POSITIVITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Sample,
    Estimate,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("exact mode needs ideal inputs; mode {0} is realistic (use `estimate`)")]
    NotIdeal(usize),
    #[error(
        "sample mode needs a nonnegative Wigner function (negativity M = 1), \
         but the inputs have M = {0}; use `estimate`"
    )]
    NotPositive(f64),
    #[error("estimate mode needs epsilon and delta_fail (circuit `estimator` block or flags)")]
    MissingPlan,
    #[error(transparent)]
    Wigner(#[from] WignerError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
}

impl RunError {
    /// Process exit code: 2 input/mode mismatch, 3 numeric failure, 4 infeasible plan.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::NotIdeal(_) | RunError::NotPositive(_) | RunError::MissingPlan => 2,
            RunError::Estimator(EstimatorError::Infeasible { .. }) => 4,
            RunError::Estimator(EstimatorError::Epsilon(_) | EstimatorError::Delta(_)) => 2,
            _ => 3,
        }
    }
}

/// Builds the initial state and applies every op.
pub fn evolve(spec: &CircuitSpec) -> Result<WignerState, WignerError> {
    WignerState::new(&spec.params, &spec.inputs)?.apply_all(&spec.ops)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub bins: Vec<u32>,
    pub p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clamped: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactResult {
    pub outcomes: Vec<Outcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleResult {
    pub seed: u64,
    /// Bin labels of every draw, in draw order.
    pub shots: Vec<Vec<u32>>,
    pub frequencies: Vec<Outcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateResult {
    pub outcomes: Vec<Outcome>,
    pub samples: u64,
    pub negativity: f64,
    pub log_negativity: f64,
    pub seed: u64,
    pub epsilon: f64,
    pub delta_fail: f64,
    pub negative_draws: u64,
    pub wall_time_s: f64,
    pub note: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RunResult {
    Exact(ExactResult),
    Sample(SampleResult),
    Estimate(EstimateResult),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub shots: usize,
    pub epsilon: Option<f64>,
    pub delta_fail: Option<f64>,
    pub sample_cap: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed: None,
            shots: 1000,
            epsilon: None,
            delta_fail: None,
            sample_cap: estimator::DEFAULT_SAMPLE_CAP,
        }
    }
}

pub fn run(spec: &CircuitSpec, mode: Mode, opts: &RunOptions) -> Result<RunResult, RunError> {
    if mode == Mode::Exact {
        if let Some(m) = spec.inputs.iter().position(|i| {
            matches!(i, zakgross_core::wigner::ModeInput::Realistic(_))
        }) {
            return Err(RunError::NotIdeal(m));
        }
    }
    let state = evolve(spec)?;
    let seed = opts
        .seed
        .or(spec.estimator.map(|e| e.seed))
        .unwrap_or(0);
    match mode {
        Mode::Exact => {
            let table = exact_probabilities_ideal(&state, &spec.measurement)?;
            Ok(RunResult::Exact(ExactResult {
                outcomes: outcomes(&spec.measurement, &table, None),
            }))
        }
        Mode::Sample => {
            let m = state.negativity();
            if m > 1.0 + POSITIVITY_TOL {
                return Err(RunError::NotPositive(m));
            }
            Ok(RunResult::Sample(sample(&state, &spec.measurement, seed, opts.shots)?))
        }
        Mode::Estimate => {
            let eps = opts.epsilon.or(spec.estimator.map(|e| e.epsilon));
            let delta = opts.delta_fail.or(spec.estimator.map(|e| e.delta_fail));
            let (Some(eps), Some(delta)) = (eps, delta) else {
                return Err(RunError::MissingPlan);
            };
            let plan = EstimatePlan::with_cap(eps, delta, state.negativity(), opts.sample_cap)?;
            let start = Instant::now();
            let report = estimate_parallel(&state, &spec.measurement, &plan, seed)?;
            let wall = start.elapsed().as_secs_f64();
            Ok(RunResult::Estimate(estimate_result(&spec.measurement, &report, wall)))
        }
    }
}

/// Weak simulation: `shots` outcome draws.
pub fn sample(
    state: &WignerState,
    spec: &MeasurementSpec,
    seed: u64,
    shots: usize,
) -> Result<SampleResult, WignerError> {
    let mut sampler = state.sampler(seed, 0);
    let mut counts = vec![0u64; spec.outcomes()];
    let mut out = Vec::with_capacity(shots);
    for _ in 0..shots {
        let s = sampler.draw()?;
        let idx = spec.bin_index(state.params(), &s.point);
        counts[idx] += 1;
        out.push(spec.labels(idx));
    }
    let freq: Vec<f64> = counts
        .iter()
        .map(|&c| c as f64 / shots.max(1) as f64)
        .collect();
    Ok(SampleResult {
        seed,
        shots: out,
        frequencies: outcomes(spec, &freq, None),
    })
}

/// Runs the plan's streams on the current rayon pool. The result does not
/// depend on the number of threads.
pub fn estimate_parallel(
    state: &WignerState,
    spec: &MeasurementSpec,
    plan: &EstimatePlan,
    seed: u64,
) -> Result<EstimateReport, EstimatorError> {
    let streams: Vec<(u64, u64)> = plan.streams().collect();
    let tallies: Vec<StreamTally> = streams
        .par_iter()
        .map(|&(k, n)| estimator::run_stream(state, spec, seed, k, n))
        .collect::<Result<_, _>>()?;
    Ok(estimator::combine(plan, seed, &tallies))
}

fn estimate_result(spec: &MeasurementSpec, r: &EstimateReport, wall: f64) -> EstimateResult {
    let mut outs = outcomes(spec, &r.estimates, Some(&r.std_errors));
    for (o, c) in outs.iter_mut().zip(r.clamped()) {
        o.clamped = Some(c);
    }
    EstimateResult {
        outcomes: outs,
        samples: r.samples,
        negativity: r.negativity,
        log_negativity: r.negativity.ln(),
        seed: r.seed,
        epsilon: r.epsilon,
        delta_fail: r.delta_fail,
        negative_draws: r.negative_draws,
        wall_time_s: wall,
        note: "the Hoeffding guarantee holds for each bin separately, not jointly",
    }
}

fn outcomes(spec: &MeasurementSpec, p: &[f64], se: Option<&[f64]>) -> Vec<Outcome> {
    p.iter()
        .enumerate()
        .map(|(i, &p)| Outcome {
            bins: spec.labels(i),
            p,
            std_error: se.map(|s| s[i]),
            clamped: None,
        })
        .collect()
}

/// CSV rows `bins,p[,std_error]` of a result's outcome table.
pub fn outcome_rows(result: &RunResult) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let (outs, with_se) = match result {
        RunResult::Exact(r) => (&r.outcomes, false),
        RunResult::Sample(r) => (&r.frequencies, false),
        RunResult::Estimate(r) => (&r.outcomes, true),
    };
    let header = if with_se {
        vec!["bins", "p", "std_error"]
    } else {
        vec!["bins", "p"]
    };
    let rows = outs
        .iter()
        .map(|o| {
            let bins = o
                .bins
                .iter()
                .map(u32::to_string)
                .collect::<Vec<_>>()
                .join(" ");
            let mut row = vec![bins, format!("{:.17e}", o.p)];
            if with_se {
                row.push(format!("{:.17e}", o.std_error.unwrap_or(0.0)));
            }
            row
        })
        .collect();
    (header, rows)
}

//! Sign-weighted Monte-Carlo estimation of outcome probabilities.
//!
//! Each draw `η ~ |W_0|/M` contributes `M · sign(W_0(η)) · 1[Sη − t ∈ bin z]`
//! to every bin, so a single stream estimates the whole table. The Hoeffding
//! sample count holds per bin; joint coverage of all bins is not implied.
//!
//! Draws are cut into streams of [`STREAM_DRAWS`]; stream `k` uses ChaCha8
//! stream `k` of the seed, so results do not depend on how streams are
//! scheduled.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::measure::MeasurementSpec;
use crate::wigner::{WignerError, WignerState};

/// Draws per RNG stream.
pub const STREAM_DRAWS: u64 = 4096;
/// Default ceiling on planned samples.
pub const DEFAULT_SAMPLE_CAP: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("epsilon must lie in (0, 1), got {0}")]
    Epsilon(f64),
    #[error("failure probability must lie in (0, 1), got {0}")]
    Delta(f64),
    #[error("negativity must be finite and at least 1, got {0}")]
    Negativity(f64),
    #[error("plan needs {required} samples, above the cap of {cap}; raise the cap by a factor of {factor:.3}")]
    Infeasible { required: f64, cap: u64, factor: f64 },
    #[error(transparent)]
    Wigner(#[from] WignerError),
}

/// Hoeffding plan `N = ⌈(2/ε²) M² ln(2/δ)⌉` for one fixed bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatePlan {
    pub epsilon: f64,
    pub delta_fail: f64,
    pub negativity: f64,
    pub samples: u64,
}

impl EstimatePlan {
    pub fn new(epsilon: f64, delta_fail: f64, negativity: f64) -> Result<Self, EstimatorError> {
        Self::with_cap(epsilon, delta_fail, negativity, DEFAULT_SAMPLE_CAP)
    }

    pub fn with_cap(
        epsilon: f64,
        delta_fail: f64,
        negativity: f64,
        cap: u64,
    ) -> Result<Self, EstimatorError> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(EstimatorError::Epsilon(epsilon));
        }
        if !(delta_fail > 0.0 && delta_fail < 1.0) {
            return Err(EstimatorError::Delta(delta_fail));
        }
        // the state negativity carries quadrature error of order 1e-9
        if !(negativity.is_finite() && negativity >= 1.0 - 1e-6) {
            return Err(EstimatorError::Negativity(negativity));
        }
        let required = libm::ceil(
            2.0 / (epsilon * epsilon) * negativity * negativity * libm::log(2.0 / delta_fail),
        );
        if required > cap as f64 {
            return Err(EstimatorError::Infeasible {
                required,
                cap,
                factor: required / cap as f64,
            });
        }
        Ok(Self {
            epsilon,
            delta_fail,
            negativity,
            samples: required as u64,
        })
    }

    /// `(stream, draws)` pairs covering the plan.
    pub fn streams(&self) -> impl Iterator<Item = (u64, u64)> {
        let n = self.samples;
        (0..n.div_ceil(STREAM_DRAWS)).map(move |k| (k, STREAM_DRAWS.min(n - k * STREAM_DRAWS)))
    }
}

/// Per-bin counts of positive and negative draws from one stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamTally {
    pub stream: u64,
    pub draws: u64,
    pub positive: Vec<u64>,
    pub negative: Vec<u64>,
}

pub fn run_stream(
    state: &WignerState,
    spec: &MeasurementSpec,
    seed: u64,
    stream: u64,
    draws: u64,
) -> Result<StreamTally, EstimatorError> {
    let params = state.params();
    let mut sampler = state.sampler(seed, stream);
    let mut positive = vec![0u64; spec.outcomes()];
    let mut negative = vec![0u64; spec.outcomes()];
    for _ in 0..draws {
        let s = sampler.draw()?;
        let bin = spec.bin_index(params, &s.point);
        if s.sign > 0 {
            positive[bin] += 1;
        } else {
            negative[bin] += 1;
        }
    }
    Ok(StreamTally {
        stream,
        draws,
        positive,
        negative,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    /// Raw `p̂_z`, possibly outside `[0, 1]`.
    pub estimates: Vec<f64>,
    /// Sample standard error of each `p̂_z`.
    pub std_errors: Vec<f64>,
    pub samples: u64,
    pub negativity: f64,
    pub seed: u64,
    pub epsilon: f64,
    pub delta_fail: f64,
    /// Draws with negative sign, over all bins.
    pub negative_draws: u64,
}

impl EstimateReport {
    /// Estimates clipped to `[0, 1]`. Biased; for display only.
    pub fn clamped(&self) -> Vec<f64> {
        self.estimates.iter().map(|p| p.clamp(0.0, 1.0)).collect()
    }
}

/// Reduces stream tallies by exact integer summation.
pub fn combine(plan: &EstimatePlan, seed: u64, tallies: &[StreamTally]) -> EstimateReport {
    let bins = tallies.first().map_or(0, |t| t.positive.len());
    let mut pos = vec![0u64; bins];
    let mut neg = vec![0u64; bins];
    let mut n = 0u64;
    for t in tallies {
        n += t.draws;
        for (a, b) in pos.iter_mut().zip(&t.positive) {
            *a += b;
        }
        for (a, b) in neg.iter_mut().zip(&t.negative) {
            *a += b;
        }
    }
    let m = plan.negativity;
    let nf = n as f64;
    let mut estimates = Vec::with_capacity(bins);
    let mut std_errors = Vec::with_capacity(bins);
    for (&p, &q) in pos.iter().zip(&neg) {
        let mean = m * (p as f64 - q as f64) / nf;
        let second = m * m * (p + q) as f64 / nf;
        let var = if n > 1 {
            ((second - mean * mean) * nf / (nf - 1.0)).max(0.0)
        } else {
            0.0
        };
        estimates.push(mean);
        std_errors.push(libm::sqrt(var / nf));
    }
    EstimateReport {
        estimates,
        std_errors,
        samples: n,
        negativity: m,
        seed,
        epsilon: plan.epsilon,
        delta_fail: plan.delta_fail,
        negative_draws: neg.iter().sum(),
    }
}

/// Runs every stream of the plan in order.
pub fn estimate(
    state: &WignerState,
    spec: &MeasurementSpec,
    plan: &EstimatePlan,
    seed: u64,
) -> Result<EstimateReport, EstimatorError> {
    let tallies = plan
        .streams()
        .map(|(k, draws)| run_stream(state, spec, seed, k, draws))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(combine(plan, seed, &tallies))
}

//! Multimode Zak-Gross Wigner states: per-mode factors, the accumulated
//! affine evolution, pointwise evaluation, negativity and sampling from
//! `|W| / M`.
//!
//! Values are in the normalized view: every factor integrates to one over
//! its torus `[0, dℓ)²`. An ideal factor is a comb of point masses at
//! `ℓ·a`, `a ∈ Z_d²`, with mass `W̄(a) / d`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::params::{wrap, CodeParams, PhasePoint};
use crate::quadrature::{AdaptiveTorus, QuadratureResult};
use crate::qudit::{gross_wigner_table, DenseOperator, Ket, QuditError};
use crate::symplectic::{AffineMap, Operation, SymplecticError};
use crate::theta::{
    comb_fourier_series, default_cutoff, GaussianComb, GkpThetaForm, RealisticGkpSpec, ThetaError,
    TorusSeries,
};

/// Relative snap tolerance (in units of `ℓ`) for ideal pullbacks.
pub const SNAP_TOLERANCE: f64 = 1e-9;
/// Gross table entries below this are treated as exact zeros.
pub const WEIGHT_FLOOR: f64 = 1e-12;
/// Cells per axis of the rejection envelope.
pub const ENVELOPE_CELLS: usize = 256;
pub const ENVELOPE_HEADROOM: f64 = 1.1;
/// Proposals before the acceptance rate is checked.
pub const MIN_PROPOSALS: u64 = 1000;
pub const MIN_EFFICIENCY: f64 = 0.01;
/// Absolute target for `∫|W|`.
pub const NEGATIVITY_TOL: f64 = 1e-7;
/// Below this fraction of the peak the sign comes from the pointwise theta
/// evaluation instead of the Fourier series.
pub const SIGN_AMBIGUITY: f64 = 1e-9;
/// Relative truncation of theta Fourier coefficients.
pub const SERIES_TOL: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WignerError {
    #[error(transparent)]
    Qudit(#[from] QuditError),
    #[error(transparent)]
    Theta(#[from] ThetaError),
    #[error(transparent)]
    Symplectic(#[from] SymplecticError),
    #[error("expected {expected} mode inputs, found {found}")]
    ModeCount { expected: usize, found: usize },
    #[error("input for mode {mode} has d = {found}, circuit has d = {expected}")]
    Dimension { mode: usize, expected: u32, found: u32 },
    #[error(
        "rejection sampler for mode {mode} accepted {accepted} of {proposed} proposals \
         (below 1%); envelope too loose"
    )]
    SamplerEfficiency {
        mode: usize,
        accepted: u64,
        proposed: u64,
    },
    #[error("mode {0} is not ideal")]
    NotIdeal(usize),
}

/// Single-mode input description.
#[derive(Debug, Clone, PartialEq)]
pub enum ModeInput {
    /// `|j_L⟩`.
    Logical(u32),
    /// Encoded qudit density matrix (`d × d`).
    Density(DenseOperator),
    Realistic(RealisticGkpSpec),
}

/// Comb of point masses `W̄(a)/d` on `ℓ·Z_d²`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealFactor {
    d: u32,
    /// Indexed `a_X · d + a_Z`.
    weights: Vec<f64>,
    negativity: f64,
    cdf: Vec<f64>,
}

impl IdealFactor {
    pub fn from_density(rho: &DenseOperator) -> Result<Self, WignerError> {
        let params = *rho.params();
        if params.n() != 1 {
            return Err(WignerError::ModeCount {
                expected: 1,
                found: params.n(),
            });
        }
        let table = gross_wigner_table(&params, rho)?;
        let d = params.d();
        // drop rounding noise from the dense computation
        let weights: Vec<f64> = table
            .values
            .iter()
            .map(|w| if w.abs() < WEIGHT_FLOOR { 0.0 } else { w / d as f64 })
            .collect();
        Ok(Self::from_weights(d, weights))
    }

    pub fn logical(params: &CodeParams, j: u32) -> Result<Self, WignerError> {
        let p1 = params.with_modes(1).map_err(|_| WignerError::ModeCount {
            expected: 1,
            found: params.n(),
        })?;
        let rho = Ket::basis(&p1, &[j])?.to_density()?;
        Self::from_density(&rho)
    }

    fn from_weights(d: u32, weights: Vec<f64>) -> Self {
        let mut cdf = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for w in &weights {
            acc += w.abs();
            cdf.push(acc);
        }
        Self {
            d,
            weights,
            negativity: acc,
            cdf,
        }
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, ax: u32, az: u32) -> f64 {
        self.weights[(ax * self.d + az) as usize]
    }

    /// `Σ |weight|`.
    pub fn negativity(&self) -> f64 {
        self.negativity
    }

    /// Mass at `(x, z)` if it is a lattice point, else zero.
    pub fn value(&self, ell: f64, x: f64, z: f64) -> f64 {
        match (snap(x, ell, self.d), snap(z, ell, self.d)) {
            (Some(ax), Some(az)) => self.weight(ax, az),
            _ => 0.0,
        }
    }

    /// Support points `(a_X, a_Z, weight)` with nonzero weight.
    pub fn support(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        let d = self.d;
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w != 0.0)
            .map(move |(i, &w)| (i as u32 / d, i as u32 % d, w))
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> (u32, u32, f64) {
        let r = rng.random::<f64>() * self.negativity;
        let i = self.cdf.partition_point(|&c| c <= r).min(self.cdf.len() - 1);
        (i as u32 / self.d, i as u32 % self.d, self.weights[i])
    }
}

fn snap(x: f64, ell: f64, d: u32) -> Option<u32> {
    let k = libm::round(x / ell);
    if (x - k * ell).abs() <= SNAP_TOLERANCE * ell {
        Some((k as i64).rem_euclid(d as i64) as u32)
    } else {
        None
    }
}

/// Piecewise-constant upper bound of `|W|` on an `N × N` cell grid.
#[derive(Debug, Clone)]
struct Envelope {
    cell: f64,
    /// Largest `|W|` on the grid.
    peak: f64,
    heights: Vec<f64>,
    cdf: Vec<f64>,
}

impl Envelope {
    fn build(series: &TorusSeries) -> Self {
        const SUB: usize = 2;
        let n = ENVELOPE_CELLS;
        let period = series.period();
        let cell = period / n as f64;
        let m = n * SUB + 1;
        let pts: Vec<f64> = (0..m).map(|i| i as f64 * cell / SUB as f64).collect();
        let mut vals = vec![0.0; m * m];
        series.eval_grid(&pts, &pts, &mut vals);
        let peak = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut heights = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut h = 0.0f64;
                for a in 0..=SUB {
                    for b in 0..=SUB {
                        h = h.max(vals[(i * SUB + a) * m + j * SUB + b].abs());
                    }
                }
                heights.push(ENVELOPE_HEADROOM * h + 1e-9 * peak);
            }
        }
        let mut cdf = Vec::with_capacity(n * n);
        let mut acc = 0.0;
        for h in &heights {
            acc += h;
            cdf.push(acc);
        }
        Self {
            cell,
            peak,
            heights,
            cdf,
        }
    }

    fn total(&self) -> f64 {
        self.cdf.last().copied().unwrap_or(0.0) * self.cell * self.cell
    }

    /// A point drawn from the envelope density and its height there.
    fn propose(&self, rng: &mut ChaCha8Rng) -> (f64, f64, f64) {
        let n = ENVELOPE_CELLS;
        let r = rng.random::<f64>() * self.cdf[self.cdf.len() - 1];
        let k = self.cdf.partition_point(|&c| c <= r).min(n * n - 1);
        let x = ((k / n) as f64 + rng.random::<f64>()) * self.cell;
        let z = ((k % n) as f64 + rng.random::<f64>()) * self.cell;
        (x, z, self.heights[k])
    }
}

/// Finitely squeezed factor with its precomputed negativity and sampler data.
#[derive(Debug, Clone)]
pub struct RealisticFactor {
    form: GkpThetaForm,
    series: TorusSeries,
    negativity: QuadratureResult,
    envelope: Envelope,
    peak: f64,
}

impl RealisticFactor {
    pub fn new(spec: RealisticGkpSpec) -> Result<Self, WignerError> {
        let form = GkpThetaForm::new(spec)?;
        let series = form.fourier_series(SERIES_TOL)?;
        let negativity = abs_integral(&series, &negativity_rule());
        let envelope = Envelope::build(&series);
        let peak = envelope.peak;
        Ok(Self {
            form,
            series,
            negativity,
            envelope,
            peak,
        })
    }

    pub fn spec(&self) -> &RealisticGkpSpec {
        self.form.spec()
    }

    pub fn form(&self) -> &GkpThetaForm {
        &self.form
    }

    pub fn series(&self) -> &TorusSeries {
        &self.series
    }

    pub fn negativity(&self) -> f64 {
        self.negativity.value
    }

    pub fn negativity_quadrature(&self) -> &QuadratureResult {
        &self.negativity
    }

    /// Mass of the rejection envelope; `M / mass` is the acceptance rate.
    pub fn envelope_mass(&self) -> f64 {
        self.envelope.total()
    }

    pub fn value(&self, x: f64, z: f64) -> f64 {
        self.form.evaluate(x, z).value
    }
}

/// Default rule for `∫|W|`.
pub fn negativity_rule() -> AdaptiveTorus {
    AdaptiveTorus {
        abs_tol: NEGATIVITY_TOL,
        base_panels: 32,
        max_depth: 6,
        ..Default::default()
    }
}

/// `∫|W|` over the torus of a Fourier series.
pub fn abs_integral(series: &TorusSeries, q: &AdaptiveTorus) -> QuadratureResult {
    let mut f = |us: &[f64], vs: &[f64], out: &mut [f64]| {
        series.eval_grid(us, vs, out);
        for o in out.iter_mut() {
            *o = o.abs();
        }
    };
    q.integrate(series.period(), &mut f)
}

/// `M = ∫|W|` of a realistic state, without building sampler data.
pub fn realistic_negativity(
    spec: &RealisticGkpSpec,
    rule: &AdaptiveTorus,
) -> Result<QuadratureResult, WignerError> {
    let series = GkpThetaForm::new(spec.clone())?.fourier_series(SERIES_TOL)?;
    Ok(abs_integral(&series, rule))
}

/// `M = ∫|W|` of a Gaussian comb wavefunction, e.g. the vacuum.
pub fn comb_negativity(comb: &GaussianComb, d: u32, rule: &AdaptiveTorus) -> QuadratureResult {
    let cutoff = default_cutoff(d, comb.sigma().max(1.0 / comb.sigma()));
    abs_integral(&comb_fourier_series(comb, d, cutoff), rule)
}

#[derive(Debug, Clone)]
pub enum ModeFactor {
    Ideal(IdealFactor),
    Realistic(Arc<RealisticFactor>),
}

impl ModeFactor {
    pub fn negativity(&self) -> f64 {
        match self {
            ModeFactor::Ideal(f) => f.negativity(),
            ModeFactor::Realistic(f) => f.negativity(),
        }
    }

    pub fn value(&self, ell: f64, x: f64, z: f64) -> f64 {
        match self {
            ModeFactor::Ideal(f) => f.value(ell, x, z),
            ModeFactor::Realistic(f) => f.value(x, z),
        }
    }

    pub fn is_ideal(&self) -> bool {
        matches!(self, ModeFactor::Ideal(_))
    }
}

/// A product of single-mode factors evolved by one affine map.
#[derive(Debug, Clone)]
pub struct WignerState {
    params: CodeParams,
    factors: Vec<ModeFactor>,
    map: AffineMap,
}

impl WignerState {
    pub fn new(params: &CodeParams, inputs: &[ModeInput]) -> Result<Self, WignerError> {
        if inputs.len() != params.n() {
            return Err(WignerError::ModeCount {
                expected: params.n(),
                found: inputs.len(),
            });
        }
        let mut factors = Vec::with_capacity(inputs.len());
        for (mode, input) in inputs.iter().enumerate() {
            let f = match input {
                ModeInput::Logical(j) => ModeFactor::Ideal(IdealFactor::logical(params, *j)?),
                ModeInput::Density(rho) => {
                    check_d(mode, params.d(), rho.params().d())?;
                    ModeFactor::Ideal(IdealFactor::from_density(rho)?)
                }
                ModeInput::Realistic(spec) => {
                    check_d(mode, params.d(), spec.d())?;
                    // identical specs share one factor
                    let prev = inputs[..mode].iter().position(|i| i == input);
                    match prev.map(|p| &factors[p]) {
                        Some(ModeFactor::Realistic(r)) => ModeFactor::Realistic(Arc::clone(r)),
                        _ => ModeFactor::Realistic(Arc::new(RealisticFactor::new(spec.clone())?)),
                    }
                }
            };
            factors.push(f);
        }
        Ok(Self::from_factors(params, factors))
    }

    pub fn from_factors(params: &CodeParams, factors: Vec<ModeFactor>) -> Self {
        assert_eq!(factors.len(), params.n(), "one factor per mode");
        Self {
            params: *params,
            factors,
            map: AffineMap::identity(params),
        }
    }

    /// Ideal logical basis inputs.
    pub fn ideal_input(params: &CodeParams, labels: &[u32]) -> Result<Self, WignerError> {
        let inputs: Vec<ModeInput> = labels.iter().map(|&j| ModeInput::Logical(j)).collect();
        Self::new(params, &inputs)
    }

    pub fn realistic_input(
        params: &CodeParams,
        specs: &[RealisticGkpSpec],
    ) -> Result<Self, WignerError> {
        let inputs: Vec<ModeInput> = specs.iter().cloned().map(ModeInput::Realistic).collect();
        Self::new(params, &inputs)
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn factors(&self) -> &[ModeFactor] {
        &self.factors
    }

    pub fn map(&self) -> &AffineMap {
        &self.map
    }

    pub fn is_ideal(&self) -> bool {
        self.factors.iter().all(ModeFactor::is_ideal)
    }

    pub fn apply(&self, op: &Operation) -> Result<Self, WignerError> {
        Ok(Self {
            params: self.params,
            factors: self.factors.clone(),
            map: self.map.then(op)?,
        })
    }

    pub fn apply_all<'a>(
        &self,
        ops: impl IntoIterator<Item = &'a Operation>,
    ) -> Result<Self, WignerError> {
        let mut map = self.map.clone();
        for op in ops {
            map = map.then(op)?;
        }
        Ok(Self {
            params: self.params,
            factors: self.factors.clone(),
            map,
        })
    }

    /// Product of the factor values at the pulled-back point.
    pub fn evaluate(&self, eta: &PhasePoint) -> f64 {
        self.evaluate_unmapped(&self.map.pullback(eta))
    }

    /// Product of the factor values at `eta`, ignoring the evolution.
    pub fn evaluate_unmapped(&self, eta: &PhasePoint) -> f64 {
        let ell = self.params.ell();
        let mut w = 1.0;
        for (i, f) in self.factors.iter().enumerate() {
            let (x, z) = eta.mode(i);
            w *= f.value(ell, x, z);
            if w == 0.0 {
                break;
            }
        }
        w
    }

    pub fn negativity(&self) -> f64 {
        self.factors.iter().map(ModeFactor::negativity).product()
    }

    pub fn log_negativity(&self) -> f64 {
        self.factors
            .iter()
            .map(|f| libm::log(f.negativity()))
            .sum()
    }

    /// A sampler on stream `stream` of the ChaCha8 generator seeded by `seed`.
    pub fn sampler(&self, seed: u64, stream: u64) -> Sampler<'_> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Sampler {
            state: self,
            rng,
            stats: vec![RejectionStats::default(); self.factors.len()],
        }
    }

    /// `count` draws from stream 0.
    pub fn sample_abs(&self, seed: u64, count: usize) -> Result<Vec<Sample>, WignerError> {
        let mut s = self.sampler(seed, 0);
        (0..count).map(|_| s.draw()).collect()
    }
}

fn check_d(mode: usize, expected: u32, found: u32) -> Result<(), WignerError> {
    if expected != found {
        return Err(WignerError::Dimension {
            mode,
            expected,
            found,
        });
    }
    Ok(())
}

/// A draw from `|W_0| / M` pushed forward through the map.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub point: PhasePoint,
    /// The drawn point before evolution.
    pub origin: PhasePoint,
    /// `sign(W_0(origin))`, `±1`.
    pub sign: i8,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RejectionStats {
    pub proposed: u64,
    pub accepted: u64,
    /// Proposals where `|W|` exceeded the envelope.
    pub violations: u64,
}

pub struct Sampler<'a> {
    state: &'a WignerState,
    rng: ChaCha8Rng,
    stats: Vec<RejectionStats>,
}

impl Sampler<'_> {
    pub fn draw(&mut self) -> Result<Sample, WignerError> {
        let params = &self.state.params;
        let n = params.n();
        let ell = params.ell();
        let mut coords = vec![0.0; 2 * n];
        let mut sign = 1i8;
        for (mode, f) in self.state.factors.iter().enumerate() {
            let (x, z, negative) = match f {
                ModeFactor::Ideal(f) => {
                    let (ax, az, w) = f.draw(&mut self.rng);
                    (ax as f64 * ell, az as f64 * ell, w < 0.0)
                }
                ModeFactor::Realistic(f) => {
                    let (x, z, w) = self.reject(mode, f)?;
                    let w = if w.abs() < SIGN_AMBIGUITY * f.peak { f.value(x, z) } else { w };
                    (x, z, w < 0.0)
                }
            };
            coords[mode] = x;
            coords[n + mode] = z;
            if negative {
                sign = -sign;
            }
        }
        let origin = PhasePoint::new(params, coords);
        Ok(Sample {
            point: self.state.map.apply(&origin),
            origin,
            sign,
        })
    }

    /// An accepted point and the series value there.
    fn reject(&mut self, mode: usize, f: &RealisticFactor) -> Result<(f64, f64, f64), WignerError> {
        let period = f.series.period();
        loop {
            let st = &mut self.stats[mode];
            if st.proposed >= MIN_PROPOSALS
                && (st.accepted as f64) < MIN_EFFICIENCY * st.proposed as f64
            {
                return Err(WignerError::SamplerEfficiency {
                    mode,
                    accepted: st.accepted,
                    proposed: st.proposed,
                });
            }
            let (x, z, h) = f.envelope.propose(&mut self.rng);
            let (x, z) = (wrap(x, period), wrap(z, period));
            let w = f.series.eval(x, z).re;
            st.proposed += 1;
            if w.abs() > h {
                st.violations += 1;
            }
            if self.rng.random::<f64>() * h < w.abs() {
                st.accepted += 1;
                return Ok((x, z, w));
            }
        }
    }

    pub fn stats(&self) -> &[RejectionStats] {
        &self.stats
    }
}

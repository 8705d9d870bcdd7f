//! Modular position measurements `q mod dℓ`, binned into `K` half-open
//! intervals per measured mode.
//!
//! The outcome of mode `j` is read from the `η_X` coordinate of that mode.
//! For `K = d` on ideal states bin `k` is the logical outcome `k`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::params::{wrap, CodeParams, PhasePoint};
use crate::symplectic::SymplecticError;
use crate::theta::TorusSeries;
use crate::wigner::{ModeFactor, WignerState};

/// Points within this fraction of a bin width from a left edge belong to
/// that bin. Lattice points land on edges up to rounding.
pub const EDGE_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("measured mode {mode} out of range for {modes} modes")]
    ModeOutOfRange { mode: usize, modes: usize },
    #[error("mode {0} is measured twice")]
    DuplicateMode(usize),
    #[error("bins per mode must be positive")]
    ZeroBins,
    #[error("{0} outcomes are too many to tabulate")]
    TooManyOutcomes(u128),
    #[error("mode {0} has a realistic input; exact probabilities need ideal inputs")]
    NotIdeal(usize),
    #[error(transparent)]
    Symplectic(#[from] SymplecticError),
}

/// Upper limit on `K^m`.
pub const MAX_OUTCOMES: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementSpec {
    modes: Vec<usize>,
    bins: u32,
}

impl MeasurementSpec {
    pub fn new(params: &CodeParams, modes: Vec<usize>, bins: u32) -> Result<Self, MeasureError> {
        if bins == 0 {
            return Err(MeasureError::ZeroBins);
        }
        for (i, &m) in modes.iter().enumerate() {
            if m >= params.n() {
                return Err(MeasureError::ModeOutOfRange {
                    mode: m,
                    modes: params.n(),
                });
            }
            if modes[..i].contains(&m) {
                return Err(MeasureError::DuplicateMode(m));
            }
        }
        let total = (bins as u128).pow(modes.len() as u32);
        if total > MAX_OUTCOMES as u128 {
            return Err(MeasureError::TooManyOutcomes(total));
        }
        Ok(Self { modes, bins })
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn bins(&self) -> u32 {
        self.bins
    }

    /// `K^m`.
    pub fn outcomes(&self) -> usize {
        (self.bins as usize).pow(self.modes.len() as u32)
    }

    /// Left edge `k·dℓ/K`.
    pub fn edge(&self, params: &CodeParams, k: u32) -> f64 {
        k as f64 * params.period() / self.bins as f64
    }

    /// Bin labels of a flat outcome index, first measured mode most significant.
    pub fn labels(&self, mut index: usize) -> Vec<u32> {
        let k = self.bins as usize;
        let mut out = vec![0; self.modes.len()];
        for o in out.iter_mut().rev() {
            *o = (index % k) as u32;
            index /= k;
        }
        out
    }

    pub fn flat_index(&self, labels: &[u32]) -> usize {
        labels
            .iter()
            .fold(0usize, |acc, &l| acc * self.bins as usize + l as usize)
    }

    /// Flat outcome index of the bin containing `eta`.
    pub fn bin_index(&self, params: &CodeParams, eta: &PhasePoint) -> usize {
        self.modes.iter().fold(0usize, |acc, &m| {
            acc * self.bins as usize + bin_of(params, self.bins, eta.x(m)) as usize
        })
    }

    /// `1` iff every measured `η_X` lies in its bin `z_j`.
    pub fn povm_indicator(&self, params: &CodeParams, z: &[u32], eta: &PhasePoint) -> bool {
        assert_eq!(z.len(), self.modes.len(), "one bin label per measured mode");
        self.modes
            .iter()
            .zip(z)
            .all(|(&m, &k)| bin_of(params, self.bins, eta.x(m)) == k)
    }
}

/// Bin of the coordinate `x` among `bins` half-open bins of `[0, dℓ)`.
pub fn bin_of(params: &CodeParams, bins: u32, x: f64) -> u32 {
    let y = wrap(x, params.period()) * bins as f64 / params.period();
    let r = libm::round(y);
    let k = if (y - r).abs() < EDGE_SNAP { r } else { libm::floor(y) };
    (k as i64).rem_euclid(bins as i64) as u32
}

/// Bin of a coordinate `(h/2 + r)·ℓ` given in half-lattice units.
fn bin_of_half(params: &CodeParams, bins: u32, h: i64, r: f64) -> u32 {
    if r == 0.0 {
        // floor(h K / 2d), exact
        let d2 = 2 * params.d() as i64;
        (h.rem_euclid(d2) * bins as i64).div_euclid(d2) as u32
    } else {
        bin_of(params, bins, (h as f64 / 2.0 + r) * params.ell())
    }
}

/// Outcome table of an all-ideal state: the lattice weights pushed forward
/// through the map, summed per bin.
pub fn exact_probabilities_ideal(
    state: &WignerState,
    spec: &MeasurementSpec,
) -> Result<Vec<f64>, MeasureError> {
    let params = state.params();
    let n = params.n();
    let mut supports: Vec<Vec<(i64, i64, f64)>> = Vec::with_capacity(n);
    for (mode, f) in state.factors().iter().enumerate() {
        match f {
            ModeFactor::Ideal(f) => supports.push(
                f.support()
                    .map(|(ax, az, w)| (2 * ax as i64, 2 * az as i64, w))
                    .collect(),
            ),
            ModeFactor::Realistic(_) => return Err(MeasureError::NotIdeal(mode)),
        }
    }
    let mut table = vec![0.0; spec.outcomes()];
    if supports.iter().any(Vec::is_empty) {
        return Ok(table);
    }
    let mut idx = vec![0usize; n];
    let mut half = vec![0i64; 2 * n];
    loop {
        let mut w = 1.0;
        for (i, &k) in idx.iter().enumerate() {
            let (hx, hz, wi) = supports[i][k];
            half[i] = hx;
            half[n + i] = hz;
            w *= wi;
        }
        let (img, res) = state.map().apply_half_lattice(&half)?;
        let flat = spec.modes().iter().fold(0usize, |acc, &m| {
            acc * spec.bins() as usize + bin_of_half(params, spec.bins(), img[m], res[m]) as usize
        });
        table[flat] += w;
        // odometer over the product support
        let mut i = 0;
        loop {
            if i == n {
                return Ok(table);
            }
            idx[i] += 1;
            if idx[i] < supports[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// `∫_{bin} dη_X ∫ dη_Z W` for each of `bins` bins of a single-mode series.
pub fn series_bin_probabilities(series: &TorusSeries, bins: u32) -> Vec<f64> {
    let p = series.period();
    let width = p / bins as f64;
    let (z0, z1) = series.z_range();
    (0..bins)
        .map(|k| {
            let (a, b) = (k as f64 * width, (k + 1) as f64 * width);
            let mut acc = Complex64::new(0.0, 0.0);
            for az in z0..=z1 {
                let c = series.coefficient(0, az);
                if az == 0 {
                    acc += c * width;
                } else {
                    // ∫_a^b e^{−iκu} du
                    let kap = 2.0 * PI * az as f64 / p;
                    let diff = Complex64::from_polar(1.0, -kap * b) - Complex64::from_polar(1.0, -kap * a);
                    acc += c * diff / Complex64::new(0.0, -kap);
                }
            }
            acc.re * p
        })
        .collect()
}

/// Single-mode outcome table of a state whose only factor is realistic and
/// whose map is the identity.
pub fn realistic_probabilities(
    state: &WignerState,
    spec: &MeasurementSpec,
) -> Option<Vec<f64>> {
    if state.params().n() != 1 || !state.map().is_identity() || spec.modes().len() != 1 {
        return None;
    }
    match &state.factors()[0] {
        ModeFactor::Realistic(f) => Some(series_bin_probabilities(f.series(), spec.bins())),
        ModeFactor::Ideal(_) => None,
    }
}

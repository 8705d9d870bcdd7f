//! Code parameters and torus coordinates shared by every module.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamsError {
    #[error("d must be odd and at least 3, got {0}")]
    InvalidDimension(u32),
    #[error("mode count must be at least 1")]
    NoModes,
}

/// Qudit dimension `d`, mode count `n` and the derived lattice constants.
///
/// The lattice constant is `ell = sqrt(2π/d)`, so a full period of the torus
/// is `d·ell` and `ell · (d·ell) = 2π`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodeParams {
    d: u32,
    n: usize,
    ell: f64,
    omega: Complex64,
    two_inv: u32,
}

impl CodeParams {
    pub fn new(d: u32, n: usize) -> Result<Self, ParamsError> {
        if d < 3 || d % 2 == 0 {
            return Err(ParamsError::InvalidDimension(d));
        }
        if n == 0 {
            return Err(ParamsError::NoModes);
        }
        let ell = libm::sqrt(2.0 * PI / d as f64);
        let omega = Complex64::from_polar(1.0, 2.0 * PI / d as f64);
        Ok(Self {
            d,
            n,
            ell,
            omega,
            two_inv: (d + 1) / 2,
        })
    }

    /// Same code with a different mode count.
    pub fn with_modes(&self, n: usize) -> Result<Self, ParamsError> {
        Self::new(self.d, n)
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn omega(&self) -> Complex64 {
        self.omega
    }

    /// Multiplicative inverse of 2 modulo d.
    pub fn two_inv(&self) -> u32 {
        self.two_inv
    }

    /// Torus period `d·ell`.
    pub fn period(&self) -> f64 {
        self.d as f64 * self.ell
    }

    /// `omega^k` for any integer k, reduced exactly before the trig call.
    pub fn omega_pow(&self, k: i64) -> Complex64 {
        let r = k.rem_euclid(self.d as i64);
        Complex64::from_polar(1.0, 2.0 * PI * r as f64 / self.d as f64)
    }

    pub fn dim(&self) -> Option<usize> {
        (self.d as usize).checked_pow(self.n as u32)
    }
}

/// Reduce `x` into `[0, period)`.
pub fn wrap(x: f64, period: f64) -> f64 {
    let r = x - period * libm::floor(x / period);
    if r >= period || r < 0.0 {
        0.0
    } else {
        r
    }
}

/// A point on the phase-space torus `[0, d·ell)^{2n}` stored in block order
/// `(x_1..x_n, z_1..z_n)`.
#[derive(Clone, PartialEq)]
pub struct PhasePoint {
    coords: Vec<f64>,
}

impl PhasePoint {
    /// Wraps every coordinate onto the torus.
    pub fn new(params: &CodeParams, mut coords: Vec<f64>) -> Self {
        assert_eq!(coords.len(), 2 * params.n(), "phase point length");
        let p = params.period();
        for c in coords.iter_mut() {
            *c = wrap(*c, p);
        }
        Self { coords }
    }

    /// Single-mode point `(x, z)`.
    pub fn single(params: &CodeParams, x: f64, z: f64) -> Self {
        let p = params.period();
        Self {
            coords: alloc::vec![wrap(x, p), wrap(z, p)],
        }
    }

    pub fn modes(&self) -> usize {
        self.coords.len() / 2
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn x(&self, mode: usize) -> f64 {
        self.coords[mode]
    }

    pub fn z(&self, mode: usize) -> f64 {
        self.coords[self.modes() + mode]
    }

    /// The `(x, z)` pair of one mode.
    pub fn mode(&self, mode: usize) -> (f64, f64) {
        (self.x(mode), self.z(mode))
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

impl fmt::Debug for PhasePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coords.iter()).finish()
    }
}

//! Double-double helpers for sums that cancel below f64 resolution.

use core::ops::{Add, AddAssign, Mul};

use num_complex::Complex64;
use twofloat::TwoFloat;

pub(crate) fn zero() -> TwoFloat {
    TwoFloat::from(0.0)
}

/// `a / b` by long division. The `/` of `TwoFloat` forms `1 − b·(1/b)`
/// without a fused multiply-add and is only good to about `1e-17`.
pub(crate) fn div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    TwoFloat::new_add(q1, q2) + q3
}

/// One Newton step from the f64 root.
pub(crate) fn sqrt(a: TwoFloat) -> TwoFloat {
    let s = TwoFloat::from(libm::sqrt(a.hi()));
    s + div(a - s * s, s * 2.0)
}

/// `sqrt(2π / d)`.
pub(crate) fn ell(d: u32) -> TwoFloat {
    sqrt(twofloat::consts::TAU / d as f64)
}

/// `e^x`: `x = k ln 2 + r`, then `expm1(r / 2^10)` by Taylor series and ten
/// squarings.
pub(crate) fn exp(x: TwoFloat) -> TwoFloat {
    if x.hi() < -700.0 {
        return zero();
    }
    let k = libm::round(x.hi() / core::f64::consts::LN_2);
    let r = (x - twofloat::consts::LN_2 * k) * (1.0 / 1024.0);
    let mut term = r;
    let mut m = r;
    for n in 2..=10 {
        term = term * r / n as f64;
        m += term;
    }
    for _ in 0..10 {
        m = m * (m + 2.0);
    }
    (m + 1.0) * libm::exp2(k)
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Cdd {
    pub re: TwoFloat,
    pub im: TwoFloat,
}

impl Cdd {
    pub fn real(re: TwoFloat) -> Self {
        Self { re, im: zero() }
    }

    /// `exp(log_mag + i·phase)`.
    pub fn exp_polar(log_mag: TwoFloat, phase: TwoFloat) -> Self {
        let m = exp(log_mag);
        let (s, c) = phase.sin_cos();
        Self { re: m * c, im: m * s }
    }

    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.hi(), self.im.hi())
    }
}

impl Add for Cdd {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }
}

impl AddAssign for Cdd {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Mul for Cdd {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

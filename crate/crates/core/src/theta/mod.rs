//! Siegel theta functions `ϑ(Γ, z) = Σ_{t ∈ Z^m} exp(iπ tᵀΓt + 2πi tᵀz)` with
//! certified truncation, plus the theta representation of finitely squeezed
//! GKP Wigner functions.
//!
//! Sums run over an ellipsoid centred at the stationary point of `|term|`.
//! The radius comes from the lattice tail bound
//! `Σ_{‖t-c‖ ≥ R} e^{-‖t-c‖²} ≤ (m/2) (2/ρ)^m Γ(m/2, (R - ρ/2)²)`
//! with `‖x‖² = π xᵀ Im(Γ) x` and `ρ = sqrt(π λ_min(Im Γ))`.

mod dd;
mod gkp;
mod lattice;
mod oracle;
mod series;

pub use gkp::{
    gamma_general, gamma_zero_logical, GkpKind, GkpThetaForm, Prefactor, RealisticGkpSpec, ZMap,
};
pub use lattice::Ellipsoid;
pub use oracle::{
    comb_fourier_series, comb_wigner_oracle, default_cutoff, gkp_wigner_oracle, GaussianComb,
};
pub use series::TorusSeries;

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

/// Cap on the per-coordinate half-width of the summation region.
pub const MAX_HALF_WIDTH: f64 = 200.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThetaError {
    #[error("period matrix is not symmetric (deviation {0:e})")]
    NotSymmetric(f64),
    #[error("imaginary part is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("truncation radius {radius:.3} needs half-width {half_width:.1} above the cap")]
    TruncationOverflow { radius: f64, half_width: f64 },
    #[error("argument has length {found}, expected {expected}")]
    Length { expected: usize, found: usize },
    #[error("invalid GKP parameters: {0}")]
    InvalidSpec(&'static str),
    #[error("cutoff {cutoff} too small: boundary terms reach {ratio:e} of the sum")]
    CutoffTooSmall { cutoff: usize, ratio: f64 },
    #[error("imaginary residue {0:e} exceeds tolerance")]
    ImaginaryResidue(f64),
}

/// How the truncation error is measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// Bound on the absolute error of the returned value.
    Absolute(f64),
    /// Bound relative to the largest term in the sum.
    Relative(f64),
}

/// Complex symmetric `m × m` matrix with positive-definite imaginary part.
#[derive(Debug, Clone)]
pub struct SiegelForm {
    m: usize,
    gamma: Vec<Complex64>,
    y: Vec<f64>,
    y_inv: Vec<f64>,
    ellipsoid: Ellipsoid,
    lambda_min: f64,
}

impl SiegelForm {
    /// `gamma` is row-major.
    pub fn new(m: usize, gamma: Vec<Complex64>) -> Result<Self, ThetaError> {
        if gamma.len() != m * m {
            return Err(ThetaError::Length {
                expected: m * m,
                found: gamma.len(),
            });
        }
        let mut asym: f64 = 0.0;
        for i in 0..m {
            for j in 0..i {
                let d = (gamma[i * m + j] - gamma[j * m + i]).norm();
                let scale = gamma[i * m + j].norm().max(1.0);
                asym = asym.max(d / scale);
            }
        }
        if asym > 1e-12 {
            return Err(ThetaError::NotSymmetric(asym));
        }
        let y: Vec<f64> = gamma.iter().map(|g| g.im).collect();
        let lambda_min = DMatrix::from_row_slice(m, m, &y)
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if !(lambda_min > 0.0) {
            return Err(ThetaError::NotPositiveDefinite(lambda_min));
        }
        let a: Vec<f64> = y.iter().map(|v| PI * v).collect();
        let ym = DMatrix::from_row_slice(m, m, &y);
        let ellipsoid = Ellipsoid::new(m, &a).ok_or(ThetaError::NotPositiveDefinite(lambda_min))?;
        let yinv = ym
            .try_inverse()
            .ok_or(ThetaError::NotPositiveDefinite(lambda_min))?;
        Ok(Self {
            m,
            gamma,
            y,
            y_inv: yinv.transpose().as_slice().to_vec(),
            ellipsoid,
            lambda_min,
        })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.gamma[i * self.m + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.gamma
    }

    /// Smallest eigenvalue of `Im Γ`.
    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn ellipsoid(&self) -> &Ellipsoid {
        &self.ellipsoid
    }

    /// Centre `c = -Y⁻¹ Im z` of the summation region and `log` of the
    /// largest possible term magnitude `π yᵀY⁻¹y`.
    pub fn center(&self, z: &[Complex64]) -> (Vec<f64>, f64) {
        let m = self.m;
        let mut c = alloc::vec![0.0; m];
        let mut quad = 0.0;
        for i in 0..m {
            let mut s = 0.0;
            for j in 0..m {
                s += self.y_inv[i * m + j] * z[j].im;
            }
            c[i] = -s;
            quad += z[i].im * s;
        }
        (c, PI * quad)
    }

    /// Reference point `t₀` near `c` with `log |term(t₀)|` and the gradient
    /// `Y t₀ + Im z`. Magnitudes measured from `t₀` avoid the cancellation in
    /// `π yᵀY⁻¹y − ‖t − c‖²` when `Y` is badly conditioned.
    fn anchor(&self, c: &[f64], z: &[Complex64]) -> Anchor {
        let m = self.m;
        let t0 = self.ellipsoid.nearest_plane(c);
        let mut grad = alloc::vec![0.0; m];
        let mut e0 = 0.0;
        for i in 0..m {
            let mut s = 0.0;
            for j in 0..m {
                s += self.y[i * m + j] * t0[j] as f64;
            }
            e0 -= PI * t0[i] as f64 * (s + 2.0 * z[i].im);
            grad[i] = s + z[i].im;
        }
        Anchor { t0, e0, grad }
    }

    /// `log |term(t)| − log |term(t₀)|`.
    fn relative_log_magnitude(&self, a: &Anchor, t: &[i64]) -> f64 {
        let m = self.m;
        let mut quad = 0.0;
        let mut lin = 0.0;
        for i in 0..m {
            let si = (t[i] - a.t0[i]) as f64;
            if si == 0.0 {
                continue;
            }
            lin += si * a.grad[i];
            let mut row = 0.0;
            for j in 0..m {
                row += self.y[i * m + j] * (t[j] - a.t0[j]) as f64;
            }
            quad += si * row;
        }
        -PI * quad - 2.0 * PI * lin
    }

    /// `iπ tᵀ Re(Γ) t + 2πi tᵀ Re z`, the phase of a term.
    fn phase(&self, t: &[i64], z: &[Complex64]) -> f64 {
        let m = self.m;
        let mut q = 0.0;
        for i in 0..m {
            let ti = t[i] as f64;
            if ti == 0.0 {
                continue;
            }
            q += self.gamma[i * m + i].re * ti * ti;
            for j in i + 1..m {
                q += 2.0 * self.gamma[i * m + j].re * ti * t[j] as f64;
            }
        }
        let lin: f64 = t.iter().zip(z).map(|(&ti, zi)| ti as f64 * zi.re).sum();
        PI * q + 2.0 * PI * lin
    }

    /// Radius whose tail bound is at most `target` (relative to the maximal
    /// term scale).
    pub fn radius_for(&self, target: f64) -> f64 {
        let g = self.m;
        let rho = libm::sqrt(PI * self.lambda_min);
        let bound = |r: f64| -> f64 {
            let x = (r - rho / 2.0).max(0.0);
            (g as f64 / 2.0) * libm::pow(2.0 / rho, g as f64) * upper_gamma_half(g, x * x)
        };
        let mut lo = rho / 2.0;
        if bound(lo) <= target {
            return lo;
        }
        let mut hi = lo + 1.0;
        while bound(hi) > target {
            hi = lo + 2.0 * (hi - lo);
            if hi > 1e6 {
                return hi;
            }
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if bound(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    fn check_radius(&self, r: f64) -> Result<(), ThetaError> {
        for i in 0..self.m {
            let hw = self.ellipsoid.half_width(i, r);
            if hw > MAX_HALF_WIDTH {
                return Err(ThetaError::TruncationOverflow {
                    radius: r,
                    half_width: hw,
                });
            }
        }
        Ok(())
    }

    /// Partial Poisson resummation in coordinate `p`.
    pub fn poisson_dual(&self, p: usize) -> Result<PoissonDual, ThetaError> {
        let m = self.m;
        let tau = self.entry(p, p);
        let mut g = alloc::vec![Complex64::new(0.0, 0.0); m * m];
        for i in 0..m {
            for j in 0..m {
                g[i * m + j] = match (i == p, j == p) {
                    (true, true) => -1.0 / tau,
                    (true, false) => self.entry(p, j) / tau,
                    (false, true) => self.entry(i, p) / tau,
                    (false, false) => self.entry(i, j) - self.entry(i, p) * self.entry(p, j) / tau,
                };
            }
        }
        let col = (0..m).map(|i| self.entry(i, p)).collect();
        Ok(PoissonDual {
            form: SiegelForm::new(m, g)?,
            index: p,
            tau,
            col,
        })
    }
}

struct Anchor {
    t0: Vec<i64>,
    e0: f64,
    grad: Vec<f64>,
}

/// `ϑ(Γ, z) = (-iτ)^{-1/2} e^{-iπ z_p²/τ} ϑ(Γ', z')` with `τ = Γ_pp`.
#[derive(Debug, Clone)]
pub struct PoissonDual {
    pub form: SiegelForm,
    index: usize,
    tau: Complex64,
    col: Vec<Complex64>,
}

impl PoissonDual {
    /// Returns `z'` and the logarithm of the scalar prefactor.
    pub fn transform(&self, z: &[Complex64]) -> (Vec<Complex64>, Complex64) {
        let p = self.index;
        let zp = z[p] - libm::round(z[p].re);
        let zt: Vec<Complex64> = z
            .iter()
            .enumerate()
            .map(|(i, &zi)| {
                if i == p {
                    zp / self.tau
                } else {
                    zi - zp * self.col[i] / self.tau
                }
            })
            .collect();
        let log_pref = -0.5 * (Complex64::new(0.0, -1.0) * self.tau).ln()
            - Complex64::new(0.0, PI) * zp * zp / self.tau;
        (zt, log_pref)
    }
}

/// Real Wigner value with the discarded imaginary part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointValue {
    pub value: f64,
    pub imag_residue: f64,
}

/// A theta value stored as `scaled · exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaValue {
    pub scaled: Complex64,
    pub log_scale: f64,
    /// Ellipsoid radius used.
    pub radius: f64,
    pub terms: usize,
}

impl ThetaValue {
    pub fn value(&self) -> Complex64 {
        self.scaled * libm::exp(self.log_scale)
    }
}

/// Theta value with absolute truncation error at most `tol`.
pub fn siegel_theta(form: &SiegelForm, z: &[Complex64], tol: f64) -> Result<ThetaValue, ThetaError> {
    siegel_theta_with(form, z, Tolerance::Absolute(tol))
}

pub fn siegel_theta_with(
    form: &SiegelForm,
    z: &[Complex64],
    tol: Tolerance,
) -> Result<ThetaValue, ThetaError> {
    if z.len() != form.m {
        return Err(ThetaError::Length {
            expected: form.m,
            found: z.len(),
        });
    }
    let (c, peak) = form.center(z);
    let anchor = form.anchor(&c, z);
    let target = match tol {
        Tolerance::Absolute(t) => t * libm::exp(-peak),
        Tolerance::Relative(t) => t * libm::exp(anchor.e0 - peak),
    };
    let r = form.radius_for(target);
    form.check_radius(r)?;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut terms = 0usize;
    form.ellipsoid.for_each(&c, r, |t, _| {
        let mag = libm::exp(form.relative_log_magnitude(&anchor, t));
        acc += Complex64::from_polar(mag, form.phase(t, z));
        terms += 1;
    });
    Ok(ThetaValue {
        scaled: acc,
        log_scale: anchor.e0,
        radius: r,
        terms,
    })
}

/// Sum of `exp(iπ tᵀΓt + 2πi tᵀz + log_weight)` grouped by
/// `(t_0 + x_offset, t_1)`, accumulated into `series` coefficients.
pub(crate) fn accumulate_grouped(
    form: &SiegelForm,
    z: &[Complex64],
    log_weight: Complex64,
    x_offset: i64,
    rel_tol: f64,
    series: &mut TorusSeries,
) -> Result<(), ThetaError> {
    let (c, _) = form.center(z);
    let anchor = form.anchor(&c, z);
    let r = form.radius_for(rel_tol);
    form.check_radius(r)?;
    let base = log_weight + anchor.e0;
    form.ellipsoid.for_each(&c, r, |t, _| {
        let rel = form.relative_log_magnitude(&anchor, t);
        let term = (Complex64::new(rel, form.phase(t, z)) + base).exp();
        series.add(t[0] + x_offset, t[1], term);
    });
    Ok(())
}

/// Bounding box of `(t_0, t_1)` over the region used by [`accumulate_grouped`].
pub(crate) fn grouped_bounds(
    form: &SiegelForm,
    z: &[Complex64],
    rel_tol: f64,
) -> Result<[(i64, i64); 2], ThetaError> {
    let (c, _) = form.center(z);
    let r = form.radius_for(rel_tol);
    form.check_radius(r)?;
    let mut out = [(0, 0); 2];
    for (i, o) in out.iter_mut().enumerate() {
        let hw = form.ellipsoid.half_width(i, r);
        *o = (
            libm::floor(c[i] - hw) as i64 - 1,
            libm::ceil(c[i] + hw) as i64 + 1,
        );
    }
    Ok(out)
}

/// Upper incomplete gamma `Γ(g/2, x)` for a positive integer `g`.
pub fn upper_gamma_half(g: usize, x: f64) -> f64 {
    assert!(g >= 1);
    let ex = libm::exp(-x);
    let (mut s, mut val) = if g % 2 == 0 {
        (1.0, ex)
    } else {
        (0.5, libm::sqrt(PI) * libm::erfc(libm::sqrt(x)))
    };
    while s < g as f64 / 2.0 {
        val = s * val + libm::pow(x, s) * ex;
        s += 1.0;
    }
    val
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn incomplete_gamma_values() {
        // Γ(1/2, 0) = √π, Γ(1, x) = e^{-x}, Γ(2, x) = (1 + x) e^{-x}
        assert!((upper_gamma_half(1, 0.0) - libm::sqrt(PI)).abs() < 1e-14);
        assert!((upper_gamma_half(2, 1.5) - libm::exp(-1.5)).abs() < 1e-15);
        assert!((upper_gamma_half(4, 1.5) - 2.5 * libm::exp(-1.5)).abs() < 1e-14);
        // Γ(3/2, x) = √x e^{-x} + (√π/2) erfc(√x)
        let x = 2.3;
        let want = libm::sqrt(x) * libm::exp(-x) + 0.5 * libm::sqrt(PI) * libm::erfc(libm::sqrt(x));
        assert!((upper_gamma_half(3, x) - want).abs() < 1e-14);
    }

    #[test]
    fn scalar_theta() {
        let form = SiegelForm::new(1, vec![Complex64::new(0.0, 1.0)]).unwrap();
        let v = siegel_theta(&form, &[Complex64::new(0.0, 0.0)], 1e-15).unwrap();
        let direct: f64 = (-40i32..=40).map(|t| libm::exp(-PI * (t * t) as f64)).sum();
        assert!((v.value().re - direct).abs() < 1e-15);
        assert!((v.value().re - 1.086_434_811_213_308).abs() < 1e-14);
        assert!(v.value().im.abs() < 1e-16);
    }

    fn sample_form() -> SiegelForm {
        let g = vec![
            Complex64::new(0.3, 1.2),
            Complex64::new(-0.5, 0.4),
            Complex64::new(0.1, -0.2),
            Complex64::new(-0.5, 0.4),
            Complex64::new(0.7, 0.9),
            Complex64::new(0.25, 0.1),
            Complex64::new(0.1, -0.2),
            Complex64::new(0.25, 0.1),
            Complex64::new(-0.2, 0.8),
        ];
        SiegelForm::new(3, g).unwrap()
    }

    fn brute(form: &SiegelForm, z: &[Complex64], k: i64) -> Complex64 {
        let m = form.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut t = vec![-k; m];
        loop {
            let mut e = Complex64::new(0.0, 0.0);
            for i in 0..m {
                for j in 0..m {
                    e += form.entry(i, j) * (t[i] * t[j]) as f64;
                }
                e += 2.0 * z[i] * t[i] as f64;
            }
            acc += (Complex64::new(0.0, PI) * e).exp();
            let mut i = 0;
            loop {
                if i == m {
                    return acc;
                }
                t[i] += 1;
                if t[i] <= k {
                    break;
                }
                t[i] = -k;
                i += 1;
            }
        }
    }

    #[test]
    fn matches_brute_force_box() {
        let form = sample_form();
        let z = [
            Complex64::new(0.3, 0.2),
            Complex64::new(-0.1, 0.05),
            Complex64::new(0.45, -0.3),
        ];
        let v = siegel_theta(&form, &z, 1e-14).unwrap().value();
        let b = brute(&form, &z, 12);
        assert!((v - b).norm() < 1e-13, "{v} vs {b}");
    }

    #[test]
    fn even_and_periodic() {
        let form = sample_form();
        let zero = [Complex64::new(0.0, 0.0); 3];
        let v0 = siegel_theta(&form, &zero, 1e-14).unwrap().value();
        // t -> -t maps z to -z; at z = 0 this is the identity, so compare z and -z
        let z = [
            Complex64::new(0.21, 0.1),
            Complex64::new(-0.3, 0.0),
            Complex64::new(0.05, -0.2),
        ];
        let neg: Vec<Complex64> = z.iter().map(|c| -c).collect();
        let a = siegel_theta(&form, &z, 1e-14).unwrap().value();
        let b = siegel_theta(&form, &neg, 1e-14).unwrap().value();
        assert!((a - b).norm() < 1e-13);
        assert!(v0.im.abs() < 1e-12 || v0.norm() > 0.0);
        let shifted: Vec<Complex64> = z
            .iter()
            .zip([1.0, -2.0, 3.0])
            .map(|(c, k)| c + k)
            .collect();
        let s = siegel_theta(&form, &shifted, 1e-14).unwrap().value();
        assert!((a - s).norm() < 1e-12);
    }

    #[test]
    fn poisson_dual_agrees() {
        let form = sample_form();
        let z = [
            Complex64::new(0.3, 0.2),
            Complex64::new(-0.1, 0.05),
            Complex64::new(0.45, -0.3),
        ];
        let direct = siegel_theta(&form, &z, 1e-15).unwrap().value();
        for p in 0..3 {
            let dual = form.poisson_dual(p).unwrap();
            let (zt, lp) = dual.transform(&z);
            let v = siegel_theta(&dual.form, &zt, 1e-15).unwrap();
            let val = v.scaled * (lp + v.log_scale).exp();
            assert!((val - direct).norm() < 1e-12, "p={p}: {val} vs {direct}");
        }
    }

    #[test]
    fn rejects_bad_forms() {
        let g = vec![
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 2.0),
            Complex64::new(0.0, 2.0),
            Complex64::new(0.0, 1.0),
        ];
        assert!(matches!(
            SiegelForm::new(2, g),
            Err(ThetaError::NotPositiveDefinite(_))
        ));
        let g = vec![
            Complex64::new(0.0, 1.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(0.4, 0.0),
            Complex64::new(0.0, 1.0),
        ];
        assert!(matches!(SiegelForm::new(2, g), Err(ThetaError::NotSymmetric(_))));
    }

    #[test]
    fn tiny_imaginary_part_overflows() {
        let form = SiegelForm::new(1, vec![Complex64::new(0.0, 1e-7)]).unwrap();
        assert!(matches!(
            siegel_theta(&form, &[Complex64::new(0.0, 0.0)], 1e-12),
            Err(ThetaError::TruncationOverflow { .. })
        ));
    }

    #[test]
    fn relative_tolerance_tracks_small_values() {
        // far from the centre the value is tiny but still resolved relatively
        let form = SiegelForm::new(1, vec![Complex64::new(0.0, 2.0)]).unwrap();
        let z = [Complex64::new(0.5, 0.0)];
        let v = siegel_theta_with(&form, &z, Tolerance::Relative(1e-14)).unwrap().value();
        let direct: f64 = (-30i32..=30)
            .map(|t| libm::exp(-2.0 * PI * (t * t) as f64) * if t % 2 == 0 { 1.0 } else { -1.0 })
            .sum();
        assert!(((v.re - direct) / direct).abs() < 1e-12);
    }
}

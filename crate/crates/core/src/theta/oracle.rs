//! Direct evaluation of the single-mode Zak-Gross Wigner function from a
//! wavefunction that is a finite sum of Gaussians, independent of the theta
//! machinery.
//!
//! The position sum cancels heavily for small `Δ` (terms of order one summing
//! to values near `1e-11`), so it is carried out in double-double arithmetic.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use twofloat::TwoFloat;

use super::{dd, PointValue, RealisticGkpSpec, ThetaError, TorusSeries};
use crate::params::PhasePoint;

/// Peaks lighter than this fraction of the heaviest are dropped.
const PEAK_FLOOR: f64 = 1e-40;
/// Gaussians are evaluated out to this many widths.
const WINDOW: f64 = 12.0;
const BOUNDARY_RATIO: f64 = 1e-12;

/// `ψ(x) = Σ_p w_p exp(−(x − μ_p)² / (2σ²))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianComb {
    sigma: f64,
    /// `(μ, w)` sorted by `μ`.
    peaks: Vec<(f64, f64)>,
    /// The same peaks in double-double precision.
    exact: Vec<(TwoFloat, TwoFloat)>,
    /// Ratio of the weight of the outermost retained peak to the largest weight.
    edge_ratio: f64,
}

impl GaussianComb {
    pub fn new(sigma: f64, peaks: Vec<(f64, f64)>) -> Self {
        Self::from_exact(
            sigma,
            peaks
                .into_iter()
                .map(|(m, w)| (TwoFloat::from(m), TwoFloat::from(w)))
                .collect(),
        )
    }

    fn from_exact(sigma: f64, mut exact: Vec<(TwoFloat, TwoFloat)>) -> Self {
        assert!(sigma > 0.0);
        exact.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let wmax = exact.iter().map(|p| p.1.hi().abs()).fold(0.0, f64::max);
        let edge_ratio = match (exact.first(), exact.last()) {
            (Some(a), Some(b)) if exact.len() > 1 && wmax > 0.0 => {
                a.1.hi().abs().max(b.1.hi().abs()) / wmax
            }
            _ => 0.0,
        };
        exact.retain(|p| p.1.hi().abs() >= PEAK_FLOOR * wmax);
        let peaks = exact.iter().map(|p| (p.0.hi(), p.1.hi())).collect();
        Self {
            sigma,
            peaks,
            exact,
            edge_ratio,
        }
    }

    /// Vacuum `e^{−x²/2}`.
    pub fn vacuum() -> Self {
        Self::new(1.0, alloc::vec![(0.0, 1.0)])
    }

    /// Wavefunction of `spec` with envelope peaks `k ∈ [−cutoff, cutoff]`.
    pub fn gkp(spec: &RealisticGkpSpec, cutoff: usize) -> Self {
        let ell = dd::ell(spec.d());
        let d = spec.d() as f64;
        let delta = spec.delta();
        let c = cutoff as i64;
        let mut peaks = Vec::new();
        for (j, &cj) in spec.coeffs().iter().enumerate() {
            if cj == 0.0 {
                continue;
            }
            for k in -c..=c {
                let mu = ell * (j as f64 + d * k as f64);
                peaks.push((mu, dd::exp(mu * mu * TwoFloat::new_mul(delta, delta) * -0.5) * cj));
            }
        }
        Self::from_exact(delta, peaks)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn peaks(&self) -> &[(f64, f64)] {
        &self.peaks
    }

    pub fn eval(&self, x: f64) -> f64 {
        let reach = WINDOW * self.sigma;
        let lo = self.peaks.partition_point(|p| p.0 < x - reach);
        let s2 = 2.0 * self.sigma * self.sigma;
        self.peaks[lo..]
            .iter()
            .take_while(|p| p.0 <= x + reach)
            .map(|&(mu, w)| w * libm::exp(-(x - mu) * (x - mu) / s2))
            .sum()
    }

    fn eval_exact(&self, x: TwoFloat) -> TwoFloat {
        let reach = WINDOW * self.sigma;
        let xf = x.hi();
        let lo = self.peaks.partition_point(|p| p.0 < xf - reach);
        let s2 = TwoFloat::new_mul(self.sigma, self.sigma) * -2.0;
        let mut acc = dd::zero();
        for &(mu, w) in self.exact[lo..].iter().take_while(|p| p.0.hi() <= xf + reach) {
            let r = x - mu;
            acc += w * dd::exp(dd::div(r * r, s2));
        }
        acc
    }

    /// `∫ ψ(x)² dx`.
    pub fn norm_sqr(&self) -> f64 {
        let s = self.sigma;
        let mut acc = 0.0;
        for &(m1, w1) in &self.peaks {
            for &(m2, w2) in &self.peaks {
                acc += w1 * w2 * libm::exp(-(m1 - m2) * (m1 - m2) / (4.0 * s * s));
            }
        }
        acc * libm::sqrt(PI) * s
    }

    fn support(&self) -> (f64, f64) {
        let reach = WINDOW * self.sigma;
        match (self.peaks.first(), self.peaks.last()) {
            (Some(a), Some(b)) => (a.0 - reach, b.0 + reach),
            _ => (0.0, 0.0),
        }
    }
}

/// Cutoff for a wavefunction whose widest length scale is `scale`.
pub fn default_cutoff(d: u32, scale: f64) -> usize {
    let ell = libm::sqrt(2.0 * PI / d as f64);
    libm::ceil(16.0 * scale / ell) as usize + 2
}

fn check_edges(comb: &GaussianComb, cutoff: usize) -> Result<(), ThetaError> {
    if comb.edge_ratio > BOUNDARY_RATIO {
        return Err(ThetaError::CutoffTooSmall {
            cutoff,
            ratio: comb.edge_ratio,
        });
    }
    Ok(())
}

/// Normalized `W(u, v) = Σ_{a_X} e^{iℓ a_X v} Σ_n ψ(x_n) ψ(x_n + ℓ a_X) / (ℓ d ⟨ψ|ψ⟩)`
/// with `x_n = u − a_X (d+1)ℓ/2 + dℓn` and `|a_X| ≤ cutoff`.
pub fn comb_wigner_oracle(
    comb: &GaussianComb,
    d: u32,
    u: f64,
    v: f64,
    cutoff: usize,
) -> Result<PointValue, ThetaError> {
    let ell = dd::ell(d);
    let ellf = ell.hi();
    let dl = ell * d as f64;
    let half = (d as f64 + 1.0) / 2.0;
    let (lo, hi) = comb.support();
    let c = cutoff as i64;
    let zero = dd::zero();
    let mut inners = Vec::with_capacity(2 * cutoff + 1);
    let mut total_abs = 0.0;
    let mut edge_abs: f64 = 0.0;
    for ax in -c..=c {
        let shift = ell * ax as f64;
        let base = TwoFloat::from(u) - ell * (ax as f64 * half);
        let n0 = libm::floor((lo.max(lo - shift.hi()) - base.hi()) / dl.hi()) as i64 - 1;
        let n1 = libm::ceil((hi.min(hi - shift.hi()) - base.hi()) / dl.hi()) as i64 + 1;
        let mut inner = zero;
        let mut inner_abs = 0.0;
        for n in n0..=n1 {
            let x = base + dl * n as f64;
            let p = comb.eval_exact(x) * comb.eval_exact(x + shift);
            inner += p;
            inner_abs += p.hi().abs();
        }
        inners.push(inner);
        total_abs += inner_abs;
        if ax.abs() == c {
            edge_abs = edge_abs.max(inner_abs);
        }
    }
    if total_abs > 0.0 && edge_abs > BOUNDARY_RATIO * total_abs {
        return Err(ThetaError::CutoffTooSmall {
            cutoff,
            ratio: edge_abs / total_abs,
        });
    }
    // Σ_a inner[a] e^{iℓ a v}, with the phases built as powers of e^{iℓv}
    let (s1, c1) = (ell * v).sin_cos();
    let mid = cutoff;
    let (mut re, mut im) = (inners[mid], zero);
    let (mut pc, mut ps) = (TwoFloat::from(1.0), zero);
    for a in 1..=cutoff {
        let t = pc * c1 - ps * s1;
        ps = pc * s1 + ps * c1;
        pc = t;
        let (fwd, back) = (inners[mid + a], inners[mid - a]);
        re += (fwd + back) * pc;
        im += (fwd - back) * ps;
    }
    let norm = ellf * d as f64 * comb.norm_sqr();
    Ok(PointValue {
        value: re.hi() / norm,
        imag_residue: im.hi() / norm,
    })
}

/// Direct-definition value of a realistic GKP state at a single-mode point.
/// `cutoff = None` picks [`default_cutoff`].
pub fn gkp_wigner_oracle(
    spec: &RealisticGkpSpec,
    eta: &PhasePoint,
    cutoff: Option<usize>,
) -> Result<PointValue, ThetaError> {
    if eta.modes() != 1 {
        return Err(ThetaError::Length {
            expected: 2,
            found: eta.coords().len(),
        });
    }
    let cutoff = cutoff.unwrap_or_else(|| default_cutoff(spec.d(), 1.0 / spec.delta()));
    let comb = GaussianComb::gkp(spec, cutoff);
    check_edges(&comb, cutoff)?;
    comb_wigner_oracle(&comb, spec.d(), eta.x(0), eta.z(0), cutoff)
}

/// Fourier coefficients of the normalized Wigner function of `comb`, from
/// closed-form Gaussian overlaps, for `|a_X|, |a_Z| ≤ cutoff`.
pub fn comb_fourier_series(comb: &GaussianComb, d: u32, cutoff: usize) -> TorusSeries {
    let ell = libm::sqrt(2.0 * PI / d as f64);
    let dl = d as f64 * ell;
    let s = comb.sigma;
    let c = cutoff as i64;
    let mut series = TorusSeries::zeros(dl, (-c, c), (-c, c));
    let norm = d as f64 * comb.norm_sqr() * 2.0 * PI;
    let reach = 2.0 * WINDOW * s;
    let peaks = &comb.peaks;
    for ax in -c..=c {
        let shift = ell * ax as f64;
        // pairs (μ, μ') with ν = μ' − ℓ a_X close to μ
        let mut pairs = Vec::new();
        for &(mu, w) in peaks {
            let lo = peaks.partition_point(|p| p.0 < mu + shift - reach);
            for &(mup, wp) in peaks[lo..].iter().take_while(|p| p.0 <= mu + shift + reach) {
                let nu = mup - shift;
                let g = w * wp * libm::sqrt(PI) * s * libm::exp(-(mu - nu) * (mu - nu) / (4.0 * s * s));
                pairs.push((0.5 * (mu + nu), g));
            }
        }
        for az in -c..=c {
            let kap = ell * az as f64;
            let mut i_sum = Complex64::new(0.0, 0.0);
            for &(m, g) in &pairs {
                i_sum += Complex64::from_polar(g, kap * m);
            }
            let damp = libm::exp(-kap * kap * s * s / 4.0);
            let phase = PI * (ax * az) as f64 * (d as f64 + 1.0) / d as f64;
            series.add(ax, az, i_sum * Complex64::from_polar(damp / norm, phase));
        }
    }
    series
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::CodeParams;

    fn point(u: f64, v: f64) -> PhasePoint {
        PhasePoint::single(&CodeParams::new(3, 1).unwrap(), u, v)
    }

    #[test]
    fn periodic_on_torus() {
        let spec = RealisticGkpSpec::phase_state(3, 0.4).unwrap();
        let dl = spec.period();
        let comb = GaussianComb::gkp(&spec, default_cutoff(3, 2.5));
        for &(u, v) in &[(0.3, 0.9), (2.2, 4.1)] {
            let a = comb_wigner_oracle(&comb, 3, u, v, 40).unwrap();
            let b = comb_wigner_oracle(&comb, 3, u + dl, v, 40).unwrap();
            let c = comb_wigner_oracle(&comb, 3, u, v - dl, 40).unwrap();
            assert!((a.value - b.value).abs() < 1e-13);
            assert!((a.value - c.value).abs() < 1e-13);
            assert!(a.imag_residue.abs() < 1e-12);
        }
    }

    #[test]
    fn fourier_form_matches_position_sum() {
        let spec = RealisticGkpSpec::logical(3, 1, 0.5).unwrap();
        let comb = GaussianComb::gkp(&spec, default_cutoff(3, 2.0));
        let s = comb_fourier_series(&comb, 3, default_cutoff(3, 2.0));
        assert!((s.integral().re - 1.0).abs() < 1e-12);
        for &(u, v) in &[(0.0, 0.0), (1.3, 0.4), (3.0, 2.2)] {
            let a = comb_wigner_oracle(&comb, 3, u, v, default_cutoff(3, 2.0)).unwrap();
            assert!((s.eval(u, v).re - a.value).abs() < 1e-12);
        }
        let vac = GaussianComb::vacuum();
        let cut = default_cutoff(3, 1.0);
        let s = comb_fourier_series(&vac, 3, cut);
        assert!((s.integral().re - 1.0).abs() < 1e-12);
        let a = comb_wigner_oracle(&vac, 3, 0.7, 1.9, cut).unwrap();
        assert!((s.eval(0.7, 1.9).re - a.value).abs() < 1e-12);
    }

    #[test]
    fn small_cutoff_is_detected() {
        let spec = RealisticGkpSpec::logical(3, 0, 0.3).unwrap();
        assert!(matches!(
            gkp_wigner_oracle(&spec, &point(0.1, 0.2), Some(3)),
            Err(ThetaError::CutoffTooSmall { .. })
        ));
    }

    #[test]
    fn concentrates_on_the_ideal_comb() {
        // |0_L⟩ lives on η_X = 0, η_Z ∈ ℓℤ
        let ell = libm::sqrt(2.0 * PI / 3.0);
        let mut on = Vec::new();
        let mut off = Vec::new();
        for &delta in &[0.2, 0.1, 0.05] {
            let spec = RealisticGkpSpec::logical(3, 0, delta).unwrap();
            on.push(gkp_wigner_oracle(&spec, &point(0.0, ell), None).unwrap().value);
            off.push(
                gkp_wigner_oracle(&spec, &point(0.5 * ell, 0.5 * ell), None)
                    .unwrap()
                    .value
                    .abs(),
            );
        }
        assert!(on[0] < on[1] && on[1] < on[2], "{on:?}");
        assert!(off[0] > off[1] && off[1] > off[2], "{off:?}");
        assert!(off[2] < 1e-30);
    }
}

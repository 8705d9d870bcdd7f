use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use twofloat::TwoFloat;

use super::dd::{self, Cdd};
use super::{
    accumulate_grouped, grouped_bounds, siegel_theta, PointValue,
    SiegelForm, ThetaError, TorusSeries,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GkpKind {
    /// `|j_L⟩`.
    Logical(u32),
    /// `(|0_L⟩ + |1_L⟩ − |2_L⟩)/√3`, qutrits only.
    PhaseState,
}

/// Finitely squeezed single-mode GKP state
/// `ψ(x) = Σ_j c_j Σ_k e^{−Δ²μ²/2} e^{−(x−μ)²/(2Δ²)}`, `μ = (j + dk)ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealisticGkpSpec {
    d: u32,
    delta: f64,
    kind: GkpKind,
    coeffs: Vec<f64>,
}

impl RealisticGkpSpec {
    pub fn logical(d: u32, j: u32, delta: f64) -> Result<Self, ThetaError> {
        check_common(d, delta)?;
        if j >= d {
            return Err(ThetaError::InvalidSpec("logical index must be below d"));
        }
        let mut coeffs = vec![0.0; d as usize];
        coeffs[j as usize] = 1.0;
        Ok(Self {
            d,
            delta,
            kind: GkpKind::Logical(j),
            coeffs,
        })
    }

    pub fn phase_state(d: u32, delta: f64) -> Result<Self, ThetaError> {
        check_common(d, delta)?;
        if d != 3 {
            return Err(ThetaError::InvalidSpec("phase state is defined for d = 3"));
        }
        let s = 1.0 / libm::sqrt(3.0);
        Ok(Self {
            d,
            delta,
            kind: GkpKind::PhaseState,
            coeffs: vec![s, s, -s],
        })
    }

    pub fn new(d: u32, delta: f64, kind: GkpKind) -> Result<Self, ThetaError> {
        match kind {
            GkpKind::Logical(j) => Self::logical(d, j, delta),
            GkpKind::PhaseState => Self::phase_state(d, delta),
        }
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn kind(&self) -> GkpKind {
        self.kind
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn ell(&self) -> f64 {
        libm::sqrt(2.0 * PI / self.d as f64)
    }

    /// Torus period `dℓ`.
    pub fn period(&self) -> f64 {
        self.d as f64 * self.ell()
    }

    /// `⟨ψ|ψ⟩` from the Gaussian overlap sum.
    pub fn norm_sqr(&self) -> f64 {
        let ell = self.ell();
        let dl = self.d as f64 * ell;
        let delta = self.delta;
        let kmax = libm::ceil(10.0 / (delta * dl)) as i64 + 1;
        let mut peaks = Vec::new();
        for (j, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for k in -kmax..=kmax {
                let mu = (j as f64 + self.d as f64 * k as f64) * ell;
                peaks.push((mu, c * libm::exp(-0.5 * delta * delta * mu * mu)));
            }
        }
        let mut acc = 0.0;
        for &(m1, w1) in &peaks {
            for &(m2, w2) in &peaks {
                let s = m1 - m2;
                acc += w1 * w2 * libm::exp(-s * s / (4.0 * delta * delta));
            }
        }
        acc * libm::sqrt(PI) * delta
    }
}

fn check_common(d: u32, delta: f64) -> Result<(), ThetaError> {
    if d < 3 || d % 2 == 0 {
        return Err(ThetaError::InvalidSpec("d must be odd and at least 3"));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(ThetaError::InvalidSpec("delta must lie in (0, 1]"));
    }
    Ok(())
}

/// Affine map `(u, v) ↦ z = base + u·per_u + v·per_v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZMap {
    pub base: [Complex64; 4],
    pub per_u: [f64; 4],
    pub per_v: [f64; 4],
}

impl ZMap {
    pub fn at(&self, u: f64, v: f64) -> [Complex64; 4] {
        let mut z = self.base;
        for i in 0..4 {
            z[i] += u * self.per_u[i] + v * self.per_v[i];
        }
        z
    }
}

/// Weight `value · exp(2πi · v_harmonic · v / dℓ)` multiplying one
/// `(j, j')` theta term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prefactor {
    pub value: f64,
    pub v_harmonic: i64,
}

impl Prefactor {
    pub fn at(&self, v: f64, period: f64) -> Complex64 {
        Complex64::from_polar(self.value, 2.0 * PI * self.v_harmonic as f64 * v / period)
    }
}

/// Period matrix for `t = (a_X, a_Z, k, k')`; independent of `(j, j')`.
fn gamma_matrix(d: f64, delta: f64) -> Vec<Complex64> {
    let d2 = delta * delta;
    let i = |x: f64| Complex64::new(0.0, x);
    let h = Complex64::new(0.5, 0.0);
    let diag = i(d / (2.0 * d2) * (1.0 + 2.0 * d2 * d2));
    vec![
        i(1.0 / (2.0 * d * d2)), h, i(1.0 / (2.0 * d2)), i(-1.0 / (2.0 * d2)),
        h, i(d2 / (2.0 * d)), h, h,
        i(1.0 / (2.0 * d2)), h, diag, i(-d / (2.0 * d2)),
        i(-1.0 / (2.0 * d2)), h, i(-d / (2.0 * d2)), diag,
    ]
}

fn z_map(spec: &RealisticGkpSpec, j: u32, jp: u32) -> ZMap {
    let d = spec.d as f64;
    let d2 = spec.delta * spec.delta;
    let dl = spec.period();
    let (j, jp) = (j as f64, jp as f64);
    let diff = j - jp;
    ZMap {
        base: [
            Complex64::new(0.0, diff / (2.0 * d * d2)),
            Complex64::new((j + jp) / (2.0 * d), 0.0),
            Complex64::new(0.0, d2 * j + diff / (2.0 * d2)),
            Complex64::new(0.0, d2 * jp - diff / (2.0 * d2)),
        ],
        per_u: [0.0, -1.0 / dl, 0.0, 0.0],
        per_v: [1.0 / dl, 0.0, 0.0, 0.0],
    }
}

/// `Γ` and `z(u, v)` of the 0-logical state.
pub fn gamma_zero_logical(spec: &RealisticGkpSpec) -> Result<(SiegelForm, ZMap), ThetaError> {
    if spec.kind != GkpKind::Logical(0) {
        return Err(ThetaError::InvalidSpec("expected the 0-logical state"));
    }
    let form = SiegelForm::new(4, gamma_matrix(spec.d as f64, spec.delta))?;
    Ok((form, z_map(spec, 0, 0)))
}

/// Theta data of the `(j, j')` cross term of `ψ_j ψ_{j'}`.
pub fn gamma_general(
    spec: &RealisticGkpSpec,
    j: u32,
    jp: u32,
) -> Result<(SiegelForm, ZMap, Prefactor), ThetaError> {
    if j >= spec.d || jp >= spec.d {
        return Err(ThetaError::InvalidSpec("logical index must be below d"));
    }
    let form = SiegelForm::new(4, gamma_matrix(spec.d as f64, spec.delta))?;
    Ok((form, z_map(spec, j, jp), prefactor(spec, j, jp)))
}

fn prefactor(spec: &RealisticGkpSpec, j: u32, jp: u32) -> Prefactor {
    let ell = spec.ell();
    let delta = spec.delta;
    let d2 = delta * delta;
    let (jf, jpf) = (j as f64, jp as f64);
    let c = spec.coeffs[j as usize] * spec.coeffs[jp as usize];
    let e = -d2 * ell * ell * (jf * jf + jpf * jpf) / 2.0
        - ell * ell * (jf - jpf) * (jf - jpf) / (4.0 * d2);
    Prefactor {
        value: c * libm::exp(e) * libm::sqrt(PI) * delta / (2.0 * PI),
        v_harmonic: 0,
    }
}

/// The `(j, j')` term after the lattice shift `a_X → a_X − (j − j')`.
///
/// The read-off `z` equals `Γ w + ζ` with `w = (j − j') e_X` and small
/// `Im ζ`, so `ϑ(Γ, z) = exp(−iπ wᵀΓw − 2πi wᵀζ) ϑ(Γ, ζ)`. The real factor
/// `exp(π (j − j')² / (2dΔ²))` cancels the Gaussian overlap penalty in the
/// prefactor exactly, and no large exponents remain.
fn centred_term(spec: &RealisticGkpSpec, j: u32, jp: u32) -> (ZMap, Prefactor) {
    let d = spec.d as f64;
    let d2 = spec.delta * spec.delta;
    let dl = spec.period();
    let (jf, jpf) = (j as f64, jp as f64);
    let w = j as i64 - jp as i64;
    let zmap = ZMap {
        base: [
            Complex64::new(0.0, 0.0),
            Complex64::new((jf + jpf) / (2.0 * d) - 0.5 * w as f64, 0.0),
            Complex64::new(0.0, d2 * jf),
            Complex64::new(0.0, d2 * jpf),
        ],
        per_u: [0.0, -1.0 / dl, 0.0, 0.0],
        per_v: [1.0 / dl, 0.0, 0.0, 0.0],
    };
    let ell = spec.ell();
    let c = spec.coeffs[j as usize] * spec.coeffs[jp as usize];
    let e = -d2 * ell * ell * (jf * jf + jpf * jpf) / 2.0;
    let pref = Prefactor {
        value: c * libm::exp(e) * libm::sqrt(PI) * spec.delta / (2.0 * PI),
        v_harmonic: -w,
    };
    (zmap, pref)
}

/// `ϑ(iT, x + iy) = Σ_k exp(−πT k² + 2πik(x + iy))` to double-double
/// accuracy, resummed with `ϑ = T^{−1/2} Σ_m exp(−π(x + iy − m)²/T)` when
/// `T < 1`.
fn envelope(t: TwoFloat, x: TwoFloat, y: TwoFloat) -> Cdd {
    const LOG_CUT: f64 = 82.0;
    let pi = twofloat::consts::PI;
    let mut acc = Cdd::real(dd::zero());
    if t.hi() >= 1.0 {
        let k0 = -y.hi() / t.hi();
        let half = libm::sqrt(LOG_CUT / (PI * t.hi())) + 1.0;
        let (lo, hi) = (libm::floor(k0 - half) as i64, libm::ceil(k0 + half) as i64);
        for k in lo..=hi {
            let kf = k as f64;
            let mag = -(pi * (t * kf + y * 2.0) * kf);
            acc += Cdd::exp_polar(mag, pi * x * (2.0 * kf));
        }
        acc
    } else {
        let half = libm::sqrt(LOG_CUT * t.hi() / PI) + 1.0;
        let m0 = x.hi();
        let (lo, hi) = (libm::floor(m0 - half) as i64, libm::ceil(m0 + half) as i64);
        for m in lo..=hi {
            let r = x - m as f64;
            let mag = -dd::div(pi * (r * r - y * y), t);
            acc += Cdd::exp_polar(mag, -dd::div(pi * r * y * 2.0, t));
        }
        let s = dd::sqrt(t);
        Cdd {
            re: dd::div(acc.re, s),
            im: dd::div(acc.im, s),
        }
    }
}

/// Rank-2 factor `ϑ([[i/(2dΔ²), 1/2], [1/2, iΔ²/(2d)]], (z0, z1))` for real
/// arguments, with the second index resummed:
/// `(√(2d)/Δ) Σ_p exp(−πp²/(2dΔ²) + 2πi p z0) Σ_m exp(−2πd (z1 + p/2 − m)²/Δ²)`.
/// Every inner term is positive, so nothing cancels before the `p` phases.
fn pair(d: u32, dd2: TwoFloat, z0: TwoFloat, z1: TwoFloat) -> Cdd {
    const LOG_CUT: f64 = 82.0;
    let pi = twofloat::consts::PI;
    let df = d as f64;
    let d2 = dd2.hi();
    // the larger of the even-p and odd-p inner sums is at least e^{−πd/(8Δ²)}
    let p_half = libm::sqrt(2.0 * df * d2 * LOG_CUT / PI + df * df / 4.0) + 1.0;
    let m_half = libm::sqrt(LOG_CUT * d2 / (2.0 * PI * df)) + 1.0;
    let mut acc = Cdd::real(dd::zero());
    for p in -(p_half as i64)..=(p_half as i64) {
        let pf = p as f64;
        let c = z1 + pf / 2.0;
        let mut inner = dd::zero();
        let (lo, hi) = (
            libm::floor(c.hi() - m_half) as i64,
            libm::ceil(c.hi() + m_half) as i64,
        );
        for m in lo..=hi {
            let r = c - m as f64;
            inner += dd::exp(-dd::div(pi * r * r * (2.0 * df), dd2));
        }
        let outer = Cdd::exp_polar(-dd::div(pi * pf * pf, dd2 * (2.0 * df)), pi * z0 * (2.0 * pf));
        acc += outer * Cdd::real(inner);
    }
    let s = dd::sqrt(dd::div(TwoFloat::from(2.0 * df), dd2));
    Cdd {
        re: acc.re * s,
        im: acc.im * s,
    }
}

/// `(j, j')` term inside a [`TermGroup`], carrying
/// `c_j c_j' exp(−Δ²ℓ²(j² + j'²)/2)`.
#[derive(Debug, Clone)]
struct CrossTerm {
    j: u32,
    jp: u32,
    w: i64,
    coef: TwoFloat,
}

/// Terms whose rank-2 factors coincide: the second argument is
/// `−u/(dℓ) + key/(2d)` mod 1 for all of them.
#[derive(Debug, Clone)]
struct TermGroup {
    key: i64,
    terms: Vec<CrossTerm>,
}

/// Normalized single-mode Wigner function of a realistic GKP state as a sum
/// of rank-4 theta functions, `∫ W = 1` over `[0, dℓ)²`.
///
/// Pointwise values use the unimodular relabelling
/// `(a_X, a_Z, k, k') → (a_X + d(k − k'), a_Z, k, k')`, under which `Im Γ`
/// becomes diagonal and, for odd `d`, the real part only couples the first
/// two coordinates. Each rank-4 sum then factors into a rank-2 sum over
/// `(p, a_Z)` with `Γ = [[i/(2dΔ²), 1/2], [1/2, iΔ²/(2d)]]` and two rank-1
/// sums with `Γ = i dΔ²`.
#[derive(Debug, Clone)]
pub struct GkpThetaForm {
    spec: RealisticGkpSpec,
    form: SiegelForm,
    terms: Vec<(ZMap, Prefactor)>,
    groups: Vec<TermGroup>,
    normalization: f64,
}

impl GkpThetaForm {
    pub fn new(spec: RealisticGkpSpec) -> Result<Self, ThetaError> {
        let d = spec.d as f64;
        let form = SiegelForm::new(4, gamma_matrix(d, spec.delta))?;
        let ell2 = twofloat::consts::TAU / d;
        let dd2 = TwoFloat::new_mul(spec.delta, spec.delta);
        let mut terms = Vec::new();
        let mut groups: Vec<TermGroup> = Vec::new();
        for j in 0..spec.d {
            for jp in 0..spec.d {
                let (cj, cjp) = (spec.coeffs[j as usize], spec.coeffs[jp as usize]);
                if cj == 0.0 || cjp == 0.0 {
                    continue;
                }
                let (zmap, pref) = centred_term(&spec, j, jp);
                terms.push((zmap, pref));
                let (ji, jpi) = (j as i64, jp as i64);
                let w = ji - jpi;
                let key = (ji + jpi - spec.d as i64 * w).rem_euclid(2 * spec.d as i64);
                let sq = (ji * ji + jpi * jpi) as f64;
                let term = CrossTerm {
                    j,
                    jp,
                    w,
                    coef: TwoFloat::new_mul(cj, cjp) * dd::exp(dd2 * ell2 * (-0.5 * sq)),
                };
                match groups.iter_mut().find(|g| g.key == key) {
                    Some(g) => g.terms.push(term),
                    None => groups.push(TermGroup {
                        key,
                        terms: vec![term],
                    }),
                }
            }
        }
        let normalization = d * spec.norm_sqr();
        Ok(Self {
            spec,
            form,
            terms,
            groups,
            normalization,
        })
    }

    pub fn spec(&self) -> &RealisticGkpSpec {
        &self.spec
    }

    pub fn period(&self) -> f64 {
        self.spec.period()
    }

    pub fn siegel_form(&self) -> &SiegelForm {
        &self.form
    }

    /// The constant `d⟨ψ|ψ⟩` dividing the raw theta sum.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Pointwise value from the factored form, summed in double-double:
    /// for small `Δ` the terms cancel by many orders of magnitude.
    pub fn evaluate(&self, u: f64, v: f64) -> PointValue {
        let d = self.spec.d;
        let delta = self.spec.delta;
        let ell = dd::ell(d);
        let dl = ell * d as f64;
        let dd2 = TwoFloat::new_mul(delta, delta);
        let t = dd2 * d as f64;
        let x = dd::div(TwoFloat::from(v), ell);
        let z0 = dd::div(TwoFloat::from(v), dl);
        let zu = -dd::div(TwoFloat::from(u), dl);
        let env_minus: Vec<Cdd> = (0..d).map(|j| envelope(t, -x, dd2 * j as f64)).collect();
        let env_plus: Vec<Cdd> = (0..d).map(|j| envelope(t, x, dd2 * j as f64)).collect();
        // e^{−i k v ℓ} for k = 0..d
        let step = Cdd::exp_polar(dd::zero(), -(ell * v));
        let mut powers = vec![Cdd::real(TwoFloat::from(1.0))];
        for k in 1..d as usize {
            powers.push(powers[k - 1] * step);
        }
        let mut acc = Cdd::real(dd::zero());
        for group in &self.groups {
            let z1 = zu + TwoFloat::from(group.key as f64) / (2.0 * d as f64);
            let mut sum = Cdd::real(dd::zero());
            for term in &group.terms {
                let mut phase = powers[term.w.unsigned_abs() as usize];
                if term.w < 0 {
                    phase.im = -phase.im;
                }
                let e = env_minus[term.j as usize] * env_plus[term.jp as usize];
                sum += Cdd::real(term.coef) * phase * e;
            }
            acc += pair(d, dd2, z0, z1) * sum;
        }
        let scale = libm::sqrt(PI) * delta / (2.0 * PI * self.normalization);
        let w = acc.to_c64() * scale;
        PointValue {
            value: w.re,
            imag_residue: w.im,
        }
    }

    /// Pointwise value from the original sum with absolute tolerance `tol`
    /// on the normalized value.
    pub fn evaluate_direct(&self, u: f64, v: f64, tol: f64) -> Result<PointValue, ThetaError> {
        let mut acc = Complex64::new(0.0, 0.0);
        let per_term = tol / self.terms.len() as f64;
        for (zmap, pref) in &self.terms {
            let w = pref.at(v, self.period()) / self.normalization;
            let th = siegel_theta(&self.form, &zmap.at(u, v), per_term / w.norm())?;
            acc += th.value() * w;
        }
        Ok(PointValue {
            value: acc.re,
            imag_residue: acc.im,
        })
    }

    /// Fourier coefficients of the normalized `W`, truncated relative to
    /// the largest term of each theta sum.
    pub fn fourier_series(&self, rel_tol: f64) -> Result<TorusSeries, ThetaError> {
        let mut xr = (i64::MAX, i64::MIN);
        let mut zr = (i64::MAX, i64::MIN);
        let mut zs = Vec::with_capacity(self.terms.len());
        for (zmap, pref) in &self.terms {
            let z = zmap.at(0.0, 0.0);
            let b = grouped_bounds(&self.form, &z, rel_tol)?;
            let h = pref.v_harmonic;
            xr = (xr.0.min(b[0].0 + h), xr.1.max(b[0].1 + h));
            zr = (zr.0.min(b[1].0), zr.1.max(b[1].1));
            zs.push(z);
        }
        let mut series = TorusSeries::zeros(self.period(), xr, zr);
        for ((_, pref), z) in self.terms.iter().zip(&zs) {
            let log_w = Complex64::new(pref.value / self.normalization, 0.0).ln();
            accumulate_grouped(&self.form, z, log_w, pref.v_harmonic, rel_tol, &mut series)?;
        }
        Ok(series)
    }
}

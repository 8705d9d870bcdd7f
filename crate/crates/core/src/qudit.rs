//! Finite-dimensional qudit algebra: Weyl displacement operators, Gross phase
//! point operators, the Gross Wigner function and a dense state-vector
//! simulator for Clifford circuits.
//!
//! Basis states `|j_1 … j_n⟩` are indexed mixed-radix with mode 0 most
//! significant. Everything here is brute force and capped in size.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::params::CodeParams;
use crate::symplectic::Generator;

/// Default cap on the Hilbert-space dimension `d^n`.
pub const DENSE_CAP: usize = 3125;

/// Imaginary parts below this are dropped from Wigner values.
pub const IMAG_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuditError {
    #[error("oracle scale exceeded: dimension {dim} above cap {cap}")]
    ScaleExceeded { dim: usize, cap: usize },
    #[error("label component {value} out of range for d = {d}")]
    OutOfRange { value: i64, d: u32 },
    #[error("label has {found} components, expected {expected}")]
    LabelLength { expected: usize, found: usize },
    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    NotUnitTrace(f64),
    #[error("imaginary residue {0:e} exceeds tolerance")]
    ImaginaryResidue(f64),
    #[error("operator dimension {found} does not match d^n = {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("mode index {0} out of range")]
    BadMode(usize),
    #[error("gate {0} is invalid for this register")]
    BadGate(Generator),
}

/// Vector over `Z_d^{2n}` in block order `(a_X, a_Z)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuditVec {
    comps: Vec<u32>,
}

impl QuditVec {
    pub fn new(params: &CodeParams, comps: Vec<u32>) -> Result<Self, QuditError> {
        if comps.len() != 2 * params.n() {
            return Err(QuditError::LabelLength {
                expected: 2 * params.n(),
                found: comps.len(),
            });
        }
        if let Some(&v) = comps.iter().find(|&&v| v >= params.d()) {
            return Err(QuditError::OutOfRange {
                value: v as i64,
                d: params.d(),
            });
        }
        Ok(Self { comps })
    }

    /// Reduces arbitrary integers mod d.
    pub fn from_ints(params: &CodeParams, ints: &[i64]) -> Result<Self, QuditError> {
        let d = params.d() as i64;
        Self::new(
            params,
            ints.iter().map(|&v| v.rem_euclid(d) as u32).collect(),
        )
    }

    pub fn zero(params: &CodeParams) -> Self {
        Self {
            comps: vec![0; 2 * params.n()],
        }
    }

    pub fn comps(&self) -> &[u32] {
        &self.comps
    }

    pub fn x(&self) -> &[u32] {
        &self.comps[..self.comps.len() / 2]
    }

    pub fn z(&self) -> &[u32] {
        &self.comps[self.comps.len() / 2..]
    }

    /// Flat index into a table over `Z_d^{2n}`: `a_X` digits then `a_Z` digits.
    pub fn index(&self, d: u32) -> usize {
        self.comps
            .iter()
            .fold(0usize, |acc, &c| acc * d as usize + c as usize)
    }

    pub fn from_index(params: &CodeParams, mut idx: usize) -> Self {
        let d = params.d() as usize;
        let mut comps = vec![0u32; 2 * params.n()];
        for c in comps.iter_mut().rev() {
            *c = (idx % d) as u32;
            idx /= d;
        }
        Self { comps }
    }
}

/// `[a, b] = a_X·b_Z − a_Z·b_X` on labels.
fn symplectic_label_product(a: &QuditVec, b: &QuditVec) -> i64 {
    a.x()
        .iter()
        .zip(b.z())
        .map(|(&p, &q)| p as i64 * q as i64)
        .sum::<i64>()
        - a.z()
            .iter()
            .zip(b.x())
            .map(|(&p, &q)| p as i64 * q as i64)
            .sum::<i64>()
}

fn check_dim(params: &CodeParams, cap: usize) -> Result<usize, QuditError> {
    match params.dim() {
        Some(dim) if dim <= cap => Ok(dim),
        Some(dim) => Err(QuditError::ScaleExceeded { dim, cap }),
        None => Err(QuditError::ScaleExceeded {
            dim: usize::MAX,
            cap,
        }),
    }
}

fn digits(params: &CodeParams, mut idx: usize) -> Vec<u32> {
    let d = params.d() as usize;
    let mut out = vec![0u32; params.n()];
    for o in out.iter_mut().rev() {
        *o = (idx % d) as u32;
        idx /= d;
    }
    out
}

fn undigits(params: &CodeParams, ds: &[u32]) -> usize {
    ds.iter()
        .fold(0usize, |acc, &c| acc * params.d() as usize + c as usize)
}

/// Dense operator on `(C^d)^{⊗n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    matrix: DMatrix<Complex64>,
    params: CodeParams,
}

impl DenseOperator {
    pub fn new(params: &CodeParams, matrix: DMatrix<Complex64>) -> Result<Self, QuditError> {
        let dim = check_dim(params, DENSE_CAP)?;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(QuditError::Dimension {
                expected: dim,
                found: matrix.nrows(),
            });
        }
        Ok(Self {
            matrix,
            params: *params,
        })
    }

    /// Projector `|ψ⟩⟨ψ|` of a normalized copy of `ket`.
    pub fn from_ket(params: &CodeParams, ket: &[Complex64]) -> Result<Self, QuditError> {
        let norm = libm::sqrt(ket.iter().map(|c| c.norm_sqr()).sum::<f64>());
        let v = nalgebra::DVector::from_iterator(ket.len(), ket.iter().map(|c| c / norm));
        Self::new(params, &v * v.adjoint())
    }

    pub fn maximally_mixed(params: &CodeParams) -> Result<Self, QuditError> {
        let dim = check_dim(params, DENSE_CAP)?;
        Self::new(
            params,
            DMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0),
        )
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint())
            .iter()
            .fold(0.0, |m, c| f64::max(m, c.norm()))
    }
}

/// Applies `T̄_a` to the basis state with flat index `idx`, returning the
/// image index and phase.
fn displace_basis(params: &CodeParams, a: &QuditVec, idx: usize) -> (usize, Complex64) {
    let d = params.d();
    let js = digits(params, idx);
    let mut phase: i64 = params.two_inv() as i64
        * a.x()
            .iter()
            .zip(a.z())
            .map(|(&x, &z)| x as i64 * z as i64)
            .sum::<i64>();
    let mut out = js.clone();
    for (i, &j) in js.iter().enumerate() {
        phase += a.z()[i] as i64 * j as i64;
        out[i] = (j + a.x()[i]) % d;
    }
    (undigits(params, &out), params.omega_pow(phase))
}

/// `T̄_a = ω^{2⁻¹ a_X·a_Z} X^{a_X} Z^{a_Z}`.
pub fn pauli_displacement(params: &CodeParams, a: &QuditVec) -> Result<DenseOperator, QuditError> {
    let dim = check_dim(params, DENSE_CAP)?;
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let (row, ph) = displace_basis(params, a, col);
        m[(row, col)] = ph;
    }
    DenseOperator::new(params, m)
}

/// `Ā_t = d^{-n} Σ_a T̄_a ω^{−[t,a]}`.
pub fn gross_phase_point(params: &CodeParams, t: &QuditVec) -> Result<DenseOperator, QuditError> {
    let dim = check_dim(params, DENSE_CAP)?;
    let labels = (params.d() as usize).pow(2 * params.n() as u32);
    let mut m = DMatrix::zeros(dim, dim);
    for li in 0..labels {
        let a = QuditVec::from_index(params, li);
        let w = params.omega_pow(-symplectic_label_product(t, &a));
        for col in 0..dim {
            let (row, ph) = displace_basis(params, &a, col);
            m[(row, col)] += ph * w;
        }
    }
    DenseOperator::new(params, m / Complex64::new(dim as f64, 0.0))
}

fn validate_state(rho: &DenseOperator) -> Result<(), QuditError> {
    let herm = rho.hermiticity_defect();
    if herm > 1e-10 {
        return Err(QuditError::NotHermitian(herm));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
        return Err(QuditError::NotUnitTrace(tr.re));
    }
    Ok(())
}

/// A real value together with the discarded imaginary part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealValue {
    pub value: f64,
    pub imag_residue: f64,
}

fn to_real(c: Complex64) -> Result<RealValue, QuditError> {
    if c.im.abs() > IMAG_TOLERANCE {
        return Err(QuditError::ImaginaryResidue(c.im.abs()));
    }
    Ok(RealValue {
        value: c.re,
        imag_residue: c.im.abs(),
    })
}

/// `W̄_ρ(t) = Tr(Ā_t ρ)`.
pub fn gross_wigner(
    params: &CodeParams,
    rho: &DenseOperator,
    t: &QuditVec,
) -> Result<RealValue, QuditError> {
    validate_state(rho)?;
    let a = gross_phase_point(params, t)?;
    to_real((a.matrix() * rho.matrix()).trace())
}

/// The full Gross Wigner table, indexed by [`QuditVec::index`]. Sums to `d^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrossTable {
    pub values: Vec<f64>,
    pub max_residue: f64,
}

impl GrossTable {
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Computes the table through the characteristic function `Tr(T̄_a ρ)`.
pub fn gross_wigner_table(
    params: &CodeParams,
    rho: &DenseOperator,
) -> Result<GrossTable, QuditError> {
    validate_state(rho)?;
    let dim = check_dim(params, DENSE_CAP)?;
    let labels = (params.d() as usize).pow(2 * params.n() as u32);
    let chi: Vec<Complex64> = (0..labels)
        .map(|li| {
            let a = QuditVec::from_index(params, li);
            (0..dim)
                .map(|col| {
                    let (row, ph) = displace_basis(params, &a, col);
                    // Tr(T ρ) = Σ_col T[row, col] ρ[col, row]
                    ph * rho.matrix()[(col, row)]
                })
                .sum()
        })
        .collect();
    let mut values = Vec::with_capacity(labels);
    let mut max_residue: f64 = 0.0;
    for ti in 0..labels {
        let t = QuditVec::from_index(params, ti);
        let mut acc = Complex64::new(0.0, 0.0);
        for (li, c) in chi.iter().enumerate() {
            let a = QuditVec::from_index(params, li);
            acc += params.omega_pow(-symplectic_label_product(&t, &a)) * c;
        }
        let v = to_real(acc / dim as f64)?;
        max_residue = max_residue.max(v.imag_residue);
        values.push(v.value);
    }
    Ok(GrossTable {
        values,
        max_residue,
    })
}

/// Gates understood by the dense simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CliffordGate {
    Generator(Generator),
    /// `X|j⟩ = |j+1⟩` on one mode.
    ShiftX(usize),
    /// `Z|j⟩ = ω^j |j⟩` on one mode.
    ShiftZ(usize),
}

/// State vector on `n` qudits.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    params: CodeParams,
    amps: Vec<Complex64>,
}

impl Ket {
    /// `|j_1 … j_n⟩`.
    pub fn basis(params: &CodeParams, labels: &[u32]) -> Result<Self, QuditError> {
        let dim = check_dim(params, DENSE_CAP)?;
        if labels.len() != params.n() {
            return Err(QuditError::LabelLength {
                expected: params.n(),
                found: labels.len(),
            });
        }
        if let Some(&v) = labels.iter().find(|&&v| v >= params.d()) {
            return Err(QuditError::OutOfRange {
                value: v as i64,
                d: params.d(),
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[undigits(params, labels)] = Complex64::new(1.0, 0.0);
        Ok(Self {
            params: *params,
            amps,
        })
    }

    /// Product of single-mode kets given as amplitude lists.
    pub fn product(params: &CodeParams, modes: &[Vec<Complex64>]) -> Result<Self, QuditError> {
        let dim = check_dim(params, DENSE_CAP)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        for (idx, a) in amps.iter_mut().enumerate() {
            *a = digits(params, idx)
                .iter()
                .zip(modes)
                .map(|(&j, m)| m[j as usize])
                .product();
        }
        Ok(Self {
            params: *params,
            amps,
        })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn to_density(&self) -> Result<DenseOperator, QuditError> {
        DenseOperator::from_ket(&self.params, &self.amps)
    }

    fn check_mode(&self, i: usize) -> Result<(), QuditError> {
        if i < self.params.n() {
            Ok(())
        } else {
            Err(QuditError::BadMode(i))
        }
    }

    fn map_basis(&mut self, f: impl Fn(&mut [u32]) -> Complex64) {
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (idx, &a) in self.amps.iter().enumerate() {
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mut js = digits(&self.params, idx);
            let ph = f(&mut js);
            out[undigits(&self.params, &js)] += a * ph;
        }
        self.amps = out;
    }

    fn fourier(&mut self, mode: usize, sign: i64) {
        let d = self.params.d() as usize;
        let stride = d.pow((self.params.n() - 1 - mode) as u32);
        let scale = 1.0 / libm::sqrt(d as f64);
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (idx, &a) in self.amps.iter().enumerate() {
            let j = (idx / stride) % d;
            let base = idx - j * stride;
            for k in 0..d {
                out[base + k * stride] += a * self.params.omega_pow(sign * (j * k) as i64) * scale;
            }
        }
        self.amps = out;
    }

    pub fn apply(&mut self, gate: CliffordGate) -> Result<(), QuditError> {
        let p = self.params;
        let d = p.d();
        let two_inv = p.two_inv() as i64;
        match gate {
            CliffordGate::ShiftX(i) => {
                self.check_mode(i)?;
                self.map_basis(|js| {
                    js[i] = (js[i] + 1) % d;
                    Complex64::new(1.0, 0.0)
                });
            }
            CliffordGate::ShiftZ(i) => {
                self.check_mode(i)?;
                self.map_basis(|js| p.omega_pow(js[i] as i64));
            }
            CliffordGate::Generator(g) => {
                g.validate(p.n()).map_err(|_| QuditError::BadGate(g))?;
                match g {
                    Generator::Fourier(i) => self.fourier(i, 1),
                    Generator::FourierInv(i) => self.fourier(i, -1),
                    Generator::Phase(i) => self.map_basis(|js| {
                        let j = js[i] as i64;
                        p.omega_pow(two_inv * j * j)
                    }),
                    Generator::PhaseInv(i) => self.map_basis(|js| {
                        let j = js[i] as i64;
                        p.omega_pow(-two_inv * j * j)
                    }),
                    Generator::Sum { control, target } => self.map_basis(|js| {
                        js[target] = (js[target] + js[control]) % d;
                        Complex64::new(1.0, 0.0)
                    }),
                    Generator::SumInv { control, target } => self.map_basis(|js| {
                        js[target] = (js[target] + d - js[control]) % d;
                        Complex64::new(1.0, 0.0)
                    }),
                    Generator::Cz(a, b) => {
                        self.map_basis(|js| p.omega_pow(js[a] as i64 * js[b] as i64))
                    }
                    Generator::CzInv(a, b) => {
                        self.map_basis(|js| p.omega_pow(-(js[a] as i64 * js[b] as i64)))
                    }
                }
            }
        }
        Ok(())
    }

    /// Born probabilities of computational-basis outcomes on `measured`,
    /// flattened mixed-radix with the first listed mode most significant.
    pub fn outcome_probabilities(&self, measured: &[usize]) -> Result<Vec<f64>, QuditError> {
        for &m in measured {
            self.check_mode(m)?;
        }
        let d = self.params.d() as usize;
        let mut out = vec![0.0; d.pow(measured.len() as u32)];
        let norm: f64 = self.amps.iter().map(|a| a.norm_sqr()).sum();
        for (idx, a) in self.amps.iter().enumerate() {
            let js = digits(&self.params, idx);
            let key = measured
                .iter()
                .fold(0usize, |acc, &m| acc * d + js[m] as usize);
            out[key] += a.norm_sqr() / norm;
        }
        Ok(out)
    }
}

/// Brute-force Born probabilities for a Clifford circuit on basis inputs.
pub fn clifford_oracle_probabilities(
    params: &CodeParams,
    inputs: &[u32],
    gates: &[CliffordGate],
    measured: &[usize],
) -> Result<Vec<f64>, QuditError> {
    let mut ket = Ket::basis(params, inputs)?;
    for &g in gates {
        ket.apply(g)?;
    }
    ket.outcome_probabilities(measured)
}

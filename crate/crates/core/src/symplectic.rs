//! Exact integer arithmetic on Sp(2n, Z): validation, the Clifford generator
//! set, word decomposition, the parity vector behind the covariance shift, and
//! the affine phase-space maps that record circuit evolution.
//!
//! Matrices act on integer vectors in block order `(x_1..x_n, z_1..z_n)` and
//! the symplectic form is `Ω = [[0, I], [-I, 0]]`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::params::{wrap, CodeParams, PhasePoint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymplecticError {
    #[error("matrix must be square with even dimension, got {rows}x{cols}")]
    Shape { rows: usize, cols: usize },
    #[error("entry ({row}, {col}) is not an integer: {value}")]
    NotInteger { row: usize, col: usize, value: f64 },
    #[error("S^T Ω S differs from Ω at ({row}, {col}): expected {expected}, found {found}")]
    NotSymplectic {
        row: usize,
        col: usize,
        expected: i64,
        found: i64,
    },
    #[error("determinant is {0}, expected 1")]
    Determinant(i64),
    #[error("integer overflow in matrix arithmetic")]
    Overflow,
    #[error("generator {generator} is invalid for {modes} modes")]
    BadGenerator { generator: Generator, modes: usize },
    #[error("matrix acts on {found} modes, expected {expected}")]
    ModeMismatch { expected: usize, found: usize },
    #[error("decomposition failed: {0}")]
    DecompositionFailed(&'static str),
}

/// Dense square integer matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    dim: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1;
        }
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0; dim * dim],
        }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self, SymplecticError> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            if r.len() != dim {
                return Err(SymplecticError::Shape {
                    rows: dim,
                    cols: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.data[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: i64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self, SymplecticError> {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                for c in 0..n {
                    let b = rhs.get(k, c);
                    if b == 0 {
                        continue;
                    }
                    let prod = a.checked_mul(b).ok_or(SymplecticError::Overflow)?;
                    let cur = out.data[r * n + c];
                    out.data[r * n + c] =
                        cur.checked_add(prod).ok_or(SymplecticError::Overflow)?;
                }
            }
        }
        Ok(out)
    }

    pub fn checked_mul_vec(&self, v: &[i64]) -> Result<Vec<i64>, SymplecticError> {
        assert_eq!(v.len(), self.dim);
        let mut out = vec![0i64; self.dim];
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc: i64 = 0;
            for (c, &x) in v.iter().enumerate() {
                let p = self
                    .get(r, c)
                    .checked_mul(x)
                    .ok_or(SymplecticError::Overflow)?;
                acc = acc.checked_add(p).ok_or(SymplecticError::Overflow)?;
            }
            *o = acc;
        }
        Ok(out)
    }

    pub fn mul_vec_f64(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|r| {
                (0..self.dim)
                    .map(|c| self.get(r, c) as f64 * v[c])
                    .sum::<f64>()
            })
            .collect()
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Result<i64, SymplecticError> {
        let n = self.dim;
        if n == 0 {
            return Ok(1);
        }
        let mut m: Vec<i128> = self.data.iter().map(|&x| x as i128).collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n - 1 {
            if m[k * n + k] == 0 {
                let Some(swap) = (k + 1..n).find(|&r| m[r * n + k] != 0) else {
                    return Ok(0);
                };
                for c in 0..n {
                    m.swap(k * n + c, swap * n + c);
                }
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = m[i * n + j] * m[k * n + k] - m[i * n + k] * m[k * n + j];
                    m[i * n + j] = v / prev;
                }
            }
            prev = m[k * n + k];
        }
        i64::try_from(sign * m[n * n - 1]).map_err(|_| SymplecticError::Overflow)
    }

    fn add_row_multiple(&mut self, target: usize, source: usize, factor: i64) {
        for c in 0..self.dim {
            let v = self.get(source, c);
            self.data[target * self.dim + c] += factor * v;
        }
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.chunks(self.dim)).finish()
    }
}

/// The form `Ω = [[0, I], [-I, 0]]` on `2n` coordinates.
pub fn symplectic_form(n: usize) -> IntMatrix {
    let mut o = IntMatrix::zeros(2 * n);
    for i in 0..n {
        o.set(i, n + i, 1);
        o.set(n + i, i, -1);
    }
    o
}

/// `[a, b] = a_X·b_Z − a_Z·b_X`.
pub fn symplectic_product(a: &[i64], b: &[i64]) -> i64 {
    let n = a.len() / 2;
    (0..n).map(|i| a[i] * b[n + i] - a[n + i] * b[i]).sum()
}

/// Validated element of Sp(2n, Z).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntSymplectic {
    n: usize,
    m: IntMatrix,
}

impl IntSymplectic {
    /// Checks `SᵀΩS = Ω` exactly, and `det S = 1` for `n ≤ 4`.
    pub fn new(m: IntMatrix) -> Result<Self, SymplecticError> {
        if m.dim() == 0 || m.dim() % 2 != 0 {
            return Err(SymplecticError::Shape {
                rows: m.dim(),
                cols: m.dim(),
            });
        }
        let n = m.dim() / 2;
        let omega = symplectic_form(n);
        let lhs = m.transpose().checked_mul(&omega)?.checked_mul(&m)?;
        for r in 0..2 * n {
            for c in 0..2 * n {
                if lhs.get(r, c) != omega.get(r, c) {
                    return Err(SymplecticError::NotSymplectic {
                        row: r,
                        col: c,
                        expected: omega.get(r, c),
                        found: lhs.get(r, c),
                    });
                }
            }
        }
        if n <= 4 {
            let det = m.determinant()?;
            if det != 1 {
                return Err(SymplecticError::Determinant(det));
            }
        }
        Ok(Self { n, m })
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self, SymplecticError> {
        Self::new(IntMatrix::from_rows(rows)?)
    }

    /// Accepts a real matrix whose entries are integers (exactly, up to 1e-9).
    pub fn from_f64_rows(rows: &[Vec<f64>]) -> Result<Self, SymplecticError> {
        let dim = rows.len();
        let mut ints = Vec::with_capacity(dim);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(SymplecticError::Shape {
                    rows: dim,
                    cols: row.len(),
                });
            }
            let mut out = Vec::with_capacity(dim);
            for (c, &v) in row.iter().enumerate() {
                let rv = libm::round(v);
                if !v.is_finite() || (v - rv).abs() > 1e-9 || rv.abs() > 9.0e15 {
                    return Err(SymplecticError::NotInteger {
                        row: r,
                        col: c,
                        value: v,
                    });
                }
                out.push(rv as i64);
            }
            ints.push(out);
        }
        Self::from_rows(&ints)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            m: IntMatrix::identity(2 * n),
        }
    }

    pub fn modes(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.m
    }

    pub fn is_identity(&self) -> bool {
        self.m == IntMatrix::identity(2 * self.n)
    }

    fn block(&self, row0: usize, col0: usize) -> IntMatrix {
        let mut b = IntMatrix::zeros(self.n);
        for r in 0..self.n {
            for c in 0..self.n {
                b.set(r, c, self.m.get(row0 + r, col0 + c));
            }
        }
        b
    }

    pub fn a(&self) -> IntMatrix {
        self.block(0, 0)
    }

    pub fn b(&self) -> IntMatrix {
        self.block(0, self.n)
    }

    pub fn c(&self) -> IntMatrix {
        self.block(self.n, 0)
    }

    pub fn d(&self) -> IntMatrix {
        self.block(self.n, self.n)
    }

    /// `S⁻¹ = Ω⁻¹ Sᵀ Ω`, exact.
    pub fn inverse(&self) -> Self {
        let n = self.n;
        let mut inv = IntMatrix::zeros(2 * n);
        // (Ω⁻¹ Sᵀ Ω) = [[D^T, -B^T], [-C^T, A^T]]
        for r in 0..n {
            for c in 0..n {
                inv.set(r, c, self.m.get(n + c, n + r));
                inv.set(r, n + c, -self.m.get(c, n + r));
                inv.set(n + r, c, -self.m.get(n + c, r));
                inv.set(n + r, n + c, self.m.get(c, r));
            }
        }
        Self { n, m: inv }
    }

    pub fn compose(&self, rhs: &Self) -> Result<Self, SymplecticError> {
        if self.n != rhs.n {
            return Err(SymplecticError::ModeMismatch {
                expected: self.n,
                found: rhs.n,
            });
        }
        Ok(Self {
            n: self.n,
            m: self.m.checked_mul(&rhs.m)?,
        })
    }

    pub fn apply(&self, v: &[i64]) -> Result<Vec<i64>, SymplecticError> {
        self.m.checked_mul_vec(v)
    }
}

impl fmt::Debug for IntSymplectic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.m.fmt(f)
    }
}

/// Diagonals of `AᵀC` and `BᵀD`, concatenated.
pub fn t_bar(s: &IntSymplectic) -> Vec<i64> {
    let n = s.modes();
    let m = s.matrix();
    let mut out = vec![0i64; 2 * n];
    for i in 0..n {
        out[i] = (0..n).map(|k| m.get(k, i) * m.get(n + k, i)).sum();
        out[n + i] = (0..n).map(|k| m.get(k, n + i) * m.get(n + k, n + i)).sum();
    }
    out
}

/// `(Sa)_X·(Sa)_Z ≡ a_X·a_Z + t̄·a (mod 2)`.
pub fn parity_identity_check(s: &IntSymplectic, a: &[i64]) -> bool {
    let n = s.modes();
    let Ok(sa) = s.apply(a) else {
        return false;
    };
    let lhs: i64 = (0..n).map(|i| sa[i] * sa[n + i]).sum();
    let rhs: i64 = (0..n).map(|i| a[i] * a[n + i]).sum::<i64>()
        + t_bar(s).iter().zip(a).map(|(t, x)| t * x).sum::<i64>();
    (lhs - rhs).rem_euclid(2) == 0
}

/// `Ω⁻¹ v = (−v_Z, v_X)`.
fn omega_inv_apply(v: &[i64]) -> Vec<i64> {
    let n = v.len() / 2;
    let mut out = vec![0; 2 * n];
    for i in 0..n {
        out[i] = -v[n + i];
        out[n + i] = v[i];
    }
    out
}

/// The covariance shift `t = (π/ℓ) S Ω⁻¹ t̄`, held exactly in units of `ℓ/2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CovarianceShift {
    half_units: Vec<i64>,
}

impl CovarianceShift {
    /// Components in units of `ℓ/2`; each is a multiple of `d`.
    pub fn half_units(&self) -> &[i64] {
        &self.half_units
    }

    pub fn to_f64(&self, params: &CodeParams) -> Vec<f64> {
        self.half_units
            .iter()
            .map(|&h| h as f64 * params.ell() / 2.0)
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.half_units.iter().all(|&h| h == 0)
    }
}

pub fn covariance_shift(
    s: &IntSymplectic,
    params: &CodeParams,
) -> Result<CovarianceShift, SymplecticError> {
    let v = omega_inv_apply(&t_bar(s));
    let sv = s.apply(&v)?;
    let d = params.d() as i64;
    Ok(CovarianceShift {
        half_units: sv.iter().map(|&x| x * d).collect(),
    })
}

/// Clifford generator tags. Mode indices are zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Generator {
    /// `|i, j⟩ ↦ |i, i + j⟩` with `control = i`.
    Sum { control: usize, target: usize },
    SumInv { control: usize, target: usize },
    Fourier(usize),
    FourierInv(usize),
    Phase(usize),
    PhaseInv(usize),
    Cz(usize, usize),
    CzInv(usize, usize),
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Generator::Sum { control, target } => write!(f, "SUM({control},{target})"),
            Generator::SumInv { control, target } => write!(f, "SUM_INV({control},{target})"),
            Generator::Fourier(i) => write!(f, "F({i})"),
            Generator::FourierInv(i) => write!(f, "F_INV({i})"),
            Generator::Phase(i) => write!(f, "P({i})"),
            Generator::PhaseInv(i) => write!(f, "P_INV({i})"),
            Generator::Cz(i, j) => write!(f, "CZ({i},{j})"),
            Generator::CzInv(i, j) => write!(f, "CZ_INV({i},{j})"),
        }
    }
}

impl Generator {
    pub fn inverse(self) -> Self {
        match self {
            Generator::Sum { control, target } => Generator::SumInv { control, target },
            Generator::SumInv { control, target } => Generator::Sum { control, target },
            Generator::Fourier(i) => Generator::FourierInv(i),
            Generator::FourierInv(i) => Generator::Fourier(i),
            Generator::Phase(i) => Generator::PhaseInv(i),
            Generator::PhaseInv(i) => Generator::Phase(i),
            Generator::Cz(i, j) => Generator::CzInv(i, j),
            Generator::CzInv(i, j) => Generator::Cz(i, j),
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), SymplecticError> {
        let ok = match *self {
            Generator::Sum { control, target } | Generator::SumInv { control, target } => {
                control < n && target < n && control != target
            }
            Generator::Cz(i, j) | Generator::CzInv(i, j) => i < n && j < n && i != j,
            Generator::Fourier(i)
            | Generator::FourierInv(i)
            | Generator::Phase(i)
            | Generator::PhaseInv(i) => i < n,
        };
        if ok {
            Ok(())
        } else {
            Err(SymplecticError::BadGenerator {
                generator: *self,
                modes: n,
            })
        }
    }

    /// Every generator acting on `n` modes.
    pub fn all(n: usize) -> Vec<Generator> {
        let mut out = Vec::new();
        for i in 0..n {
            out.extend([
                Generator::Fourier(i),
                Generator::FourierInv(i),
                Generator::Phase(i),
                Generator::PhaseInv(i),
            ]);
            for j in 0..n {
                if i != j {
                    out.push(Generator::Sum {
                        control: i,
                        target: j,
                    });
                    out.push(Generator::SumInv {
                        control: i,
                        target: j,
                    });
                    if i < j {
                        out.push(Generator::Cz(i, j));
                        out.push(Generator::CzInv(i, j));
                    }
                }
            }
        }
        out
    }

    /// Left-multiplies `m` by this generator's matrix, as row operations.
    fn apply_rows(&self, m: &mut IntMatrix, n: usize) {
        let (x, z) = (|i: usize| i, |i: usize| n + i);
        match *self {
            Generator::Fourier(i) => {
                for c in 0..m.dim() {
                    let (a, b) = (m.get(x(i), c), m.get(z(i), c));
                    m.set(x(i), c, b);
                    m.set(z(i), c, -a);
                }
            }
            Generator::FourierInv(i) => {
                for c in 0..m.dim() {
                    let (a, b) = (m.get(x(i), c), m.get(z(i), c));
                    m.set(x(i), c, -b);
                    m.set(z(i), c, a);
                }
            }
            Generator::Phase(i) => m.add_row_multiple(z(i), x(i), -1),
            Generator::PhaseInv(i) => m.add_row_multiple(z(i), x(i), 1),
            Generator::Sum { control, target } => {
                m.add_row_multiple(x(target), x(control), -1);
                m.add_row_multiple(z(control), z(target), 1);
            }
            Generator::SumInv { control, target } => {
                m.add_row_multiple(x(target), x(control), 1);
                m.add_row_multiple(z(control), z(target), -1);
            }
            Generator::Cz(i, j) => {
                m.add_row_multiple(z(i), x(j), -1);
                m.add_row_multiple(z(j), x(i), -1);
            }
            Generator::CzInv(i, j) => {
                m.add_row_multiple(z(i), x(j), 1);
                m.add_row_multiple(z(j), x(i), 1);
            }
        }
    }

    /// The matrix `S` with `U† D(r) U = D(S r)` for the gate's Gaussian unitary.
    ///
    /// Equivalently `S⁻¹` maps discrete Wigner labels of the input to those of
    /// the output.
    pub fn matrix(&self, n: usize) -> Result<IntSymplectic, SymplecticError> {
        self.validate(n)?;
        let mut m = IntMatrix::identity(2 * n);
        self.apply_rows(&mut m, n);
        Ok(IntSymplectic { n, m })
    }
}

/// Product `S_{w1} S_{w2} ⋯ S_{wk}` of a word in circuit order.
pub fn compose_word(word: &[Generator], n: usize) -> Result<IntSymplectic, SymplecticError> {
    let mut acc = IntSymplectic::identity(n);
    for g in word {
        acc = acc.compose(&g.matrix(n)?)?;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy)]
pub struct DecomposeOptions {
    /// Cap on Euclid division steps per reduced entry pair.
    pub step_cap: usize,
    /// Cap on the emitted word length.
    pub max_word_len: usize,
}

impl DecomposeOptions {
    pub fn for_modes(n: usize) -> Self {
        Self {
            step_cap: 10 * (2 * n) * (2 * n),
            max_word_len: 1_000_000,
        }
    }
}

struct Reducer {
    n: usize,
    cur: IntMatrix,
    log: Vec<Generator>,
    opts: DecomposeOptions,
}

impl Reducer {
    fn push(&mut self, g: Generator) -> Result<(), SymplecticError> {
        g.apply_rows(&mut self.cur, self.n);
        self.log.push(g);
        if self.log.len() > self.opts.max_word_len {
            return Err(SymplecticError::DecompositionFailed("word length bound exceeded"));
        }
        if self.cur.data.iter().any(|v| v.unsigned_abs() > (1 << 40)) {
            return Err(SymplecticError::Overflow);
        }
        Ok(())
    }

    fn repeat(&mut self, seq: &[Generator], times: i64) -> Result<(), SymplecticError> {
        for _ in 0..times {
            for &g in seq {
                self.push(g)?;
            }
        }
        Ok(())
    }

    fn entry(&self, row: usize, col: usize) -> i64 {
        self.cur.get(row, col)
    }

    // x_i -= q z_i
    fn x_minus_z(&mut self, i: usize, q: i64) -> Result<(), SymplecticError> {
        let inner = if q > 0 {
            Generator::PhaseInv(i)
        } else {
            Generator::Phase(i)
        };
        self.repeat(
            &[Generator::Fourier(i), inner, Generator::FourierInv(i)],
            q.abs(),
        )
    }

    // z_i -= q x_i
    fn z_minus_x(&mut self, i: usize, q: i64) -> Result<(), SymplecticError> {
        let g = if q > 0 {
            Generator::Phase(i)
        } else {
            Generator::PhaseInv(i)
        };
        self.repeat(&[g], q.abs())
    }

    // x_t -= q x_c
    fn x_minus_x(&mut self, t: usize, c: usize, q: i64) -> Result<(), SymplecticError> {
        let g = if q > 0 {
            Generator::Sum {
                control: c,
                target: t,
            }
        } else {
            Generator::SumInv {
                control: c,
                target: t,
            }
        };
        self.repeat(&[g], q.abs())
    }

    fn check_steps(&self, steps: usize) -> Result<(), SymplecticError> {
        if steps > self.opts.step_cap {
            Err(SymplecticError::DecompositionFailed("iteration cap exceeded"))
        } else {
            Ok(())
        }
    }

    /// Brings column `x_k` to `e_{x_k}` using operations on modes `>= k`.
    fn reduce_x_column(&mut self, k: usize) -> Result<(), SymplecticError> {
        let n = self.n;
        let col = k;
        for i in k..n {
            let mut steps = 0;
            loop {
                let (a, b) = (self.entry(i, col), self.entry(n + i, col));
                if b == 0 {
                    break;
                }
                steps += 1;
                self.check_steps(steps)?;
                if a == 0 {
                    self.push(Generator::Fourier(i))?;
                } else if a.abs() >= b.abs() {
                    self.x_minus_z(i, a / b)?;
                } else {
                    self.z_minus_x(i, b / a)?;
                }
            }
        }
        for i in k + 1..n {
            let mut steps = 0;
            loop {
                let (a, b) = (self.entry(k, col), self.entry(i, col));
                if b == 0 {
                    break;
                }
                steps += 1;
                self.check_steps(steps)?;
                if a == 0 {
                    self.x_minus_x(k, i, -1)?;
                } else if b.abs() >= a.abs() {
                    self.x_minus_x(i, k, b / a)?;
                } else {
                    self.x_minus_x(k, i, a / b)?;
                }
            }
        }
        match self.entry(k, col) {
            1 => Ok(()),
            -1 => {
                self.push(Generator::Fourier(k))?;
                self.push(Generator::Fourier(k))
            }
            _ => Err(SymplecticError::DecompositionFailed("column is not primitive")),
        }
    }

    /// Brings column `z_k` to `e_{z_k}` while fixing `e_{x_k}`.
    fn reduce_z_column(&mut self, k: usize) -> Result<(), SymplecticError> {
        let n = self.n;
        let col = n + k;
        if self.entry(n + k, col) != 1 {
            return Err(SymplecticError::DecompositionFailed("pairing entry is not 1"));
        }
        for i in k + 1..n {
            // z_i -= q z_k via SUM_INV(i, k); the x_k row absorbs the side effect
            let q = self.entry(n + i, col);
            let g = if q > 0 {
                Generator::SumInv {
                    control: i,
                    target: k,
                }
            } else {
                Generator::Sum {
                    control: i,
                    target: k,
                }
            };
            self.repeat(&[g], q.abs())?;
            // x_i -= q z_k
            let q = self.entry(i, col);
            let inner = if q > 0 {
                Generator::Sum {
                    control: i,
                    target: k,
                }
            } else {
                Generator::SumInv {
                    control: i,
                    target: k,
                }
            };
            self.repeat(
                &[Generator::Fourier(i), inner, Generator::FourierInv(i)],
                q.abs(),
            )?;
        }
        let q = self.entry(k, col);
        self.x_minus_z(k, q)?;
        for r in 0..2 * n {
            let want = i64::from(r == n + k);
            if self.entry(r, col) != want || self.entry(r, k) != i64::from(r == k) {
                return Err(SymplecticError::DecompositionFailed("mode reduction incomplete"));
            }
        }
        Ok(())
    }
}

/// Writes `S` as a word over the generator set, in circuit order, such that
/// [`compose_word`] reproduces `S` exactly.
pub fn decompose(s: &IntSymplectic) -> Result<Vec<Generator>, SymplecticError> {
    decompose_with(s, DecomposeOptions::for_modes(s.modes()))
}

pub fn decompose_with(
    s: &IntSymplectic,
    opts: DecomposeOptions,
) -> Result<Vec<Generator>, SymplecticError> {
    let n = s.modes();
    if s.is_identity() {
        return Ok(Vec::new());
    }
    for g in Generator::all(n) {
        if g.matrix(n)? == *s {
            return Ok(vec![g]);
        }
    }
    let mut red = Reducer {
        n,
        cur: s.matrix().clone(),
        log: Vec::new(),
        opts,
    };
    for k in 0..n {
        red.reduce_x_column(k)?;
        red.reduce_z_column(k)?;
    }
    if red.cur != IntMatrix::identity(2 * n) {
        return Err(SymplecticError::DecompositionFailed("residual is not the identity"));
    }
    // G_m ⋯ G_1 S = I, so S = G_1⁻¹ ⋯ G_m⁻¹
    Ok(red.log.into_iter().map(Generator::inverse).collect())
}

/// One step of circuit evolution in phase space.
#[derive(Debug, Clone, PartialEq)]
pub enum Operation {
    /// Encoded logical Clifford gate.
    Gate(Generator),
    /// Bare Gaussian unitary with integer symplectic matrix.
    Symplectic(IntSymplectic),
    /// Displacement `T_c`; moves support by `ℓ·c`.
    Displace(Vec<f64>),
}

/// Affine pushforward `η ↦ L η + s (mod dℓ)` accumulated over a circuit.
///
/// `L` is integer; the shift is split into an exact part in units of `ℓ/2`
/// (reduced mod `2d`) and a real residual in units of `ℓ` (reduced mod `d`)
/// that is only nonzero after non-half-integer displacements.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    params: CodeParams,
    forward: IntSymplectic,
    backward: IntSymplectic,
    half_shift: Vec<i64>,
    residual: Vec<f64>,
}

impl AffineMap {
    pub fn identity(params: &CodeParams) -> Self {
        let n = params.n();
        Self {
            params: *params,
            forward: IntSymplectic::identity(n),
            backward: IntSymplectic::identity(n),
            half_shift: vec![0; 2 * n],
            residual: vec![0.0; 2 * n],
        }
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    /// The linear part of the pushforward.
    pub fn forward(&self) -> &IntSymplectic {
        &self.forward
    }

    /// The accumulated symplectic matrix `S`, i.e. the inverse of the pushforward.
    pub fn symplectic(&self) -> &IntSymplectic {
        &self.backward
    }

    pub fn half_shift(&self) -> &[i64] {
        &self.half_shift
    }

    pub fn residual(&self) -> &[f64] {
        &self.residual
    }

    pub fn is_identity(&self) -> bool {
        self.forward.is_identity()
            && self.half_shift.iter().all(|&h| h == 0)
            && self.residual.iter().all(|&r| r == 0.0)
    }

    /// Returns the map "apply `self`, then `op`".
    pub fn then(&self, op: &Operation) -> Result<Self, SymplecticError> {
        let n = self.params.n();
        let d = self.params.d() as i64;
        let (lin, inv, half, res): (IntSymplectic, IntSymplectic, Vec<i64>, Vec<f64>) = match op
        {
            Operation::Gate(g) => {
                let s = g.matrix(n)?;
                (s.inverse(), s, vec![0; 2 * n], vec![0.0; 2 * n])
            }
            Operation::Symplectic(s) => {
                if s.modes() != n {
                    return Err(SymplecticError::ModeMismatch {
                        expected: n,
                        found: s.modes(),
                    });
                }
                // S⁻¹ t = (dℓ/2) Ω⁻¹ t̄
                let half = omega_inv_apply(&t_bar(s))
                    .into_iter()
                    .map(|v| v * d)
                    .collect();
                (s.inverse(), s.clone(), half, vec![0.0; 2 * n])
            }
            Operation::Displace(c) => {
                if c.len() != 2 * n {
                    return Err(SymplecticError::ModeMismatch {
                        expected: n,
                        found: c.len() / 2,
                    });
                }
                let mut half = vec![0i64; 2 * n];
                let mut res = vec![0.0; 2 * n];
                for (i, &ci) in c.iter().enumerate() {
                    let h = libm::round(2.0 * ci);
                    if (2.0 * ci - h).abs() < 1e-12 && h.abs() < 1e15 {
                        half[i] = h as i64;
                    } else {
                        res[i] = ci;
                    }
                }
                (
                    IntSymplectic::identity(n),
                    IntSymplectic::identity(n),
                    half,
                    res,
                )
            }
        };
        let forward = lin.compose(&self.forward)?;
        let backward = self.backward.compose(&inv)?;
        let mut half_shift = lin.apply(&self.half_shift)?;
        for (h, a) in half_shift.iter_mut().zip(&half) {
            *h = (*h + a).rem_euclid(2 * d);
        }
        let mut residual = lin.matrix().mul_vec_f64(&self.residual);
        for (r, a) in residual.iter_mut().zip(&res) {
            *r = wrap(*r + a, d as f64);
        }
        Ok(Self {
            params: self.params,
            forward,
            backward,
            half_shift,
            residual,
        })
    }

    /// Forward image of a support point.
    pub fn apply(&self, eta: &PhasePoint) -> PhasePoint {
        let ell = self.params.ell();
        let mut out = self.forward.matrix().mul_vec_f64(eta.coords());
        for (i, o) in out.iter_mut().enumerate() {
            *o += (self.half_shift[i] as f64 / 2.0 + self.residual[i]) * ell;
        }
        PhasePoint::new(&self.params, out)
    }

    /// The point whose image under [`Self::apply`] is `eta`.
    pub fn pullback(&self, eta: &PhasePoint) -> PhasePoint {
        let ell = self.params.ell();
        let shifted: Vec<f64> = eta
            .coords()
            .iter()
            .enumerate()
            .map(|(i, &e)| e - (self.half_shift[i] as f64 / 2.0 + self.residual[i]) * ell)
            .collect();
        PhasePoint::new(&self.params, self.backward.matrix().mul_vec_f64(&shifted))
    }

    /// Exact image of a lattice point given in units of `ℓ/2`; returns the
    /// image in the same units (mod `2d`) plus the real residual in units of `ℓ`.
    pub fn apply_half_lattice(&self, half: &[i64]) -> Result<(Vec<i64>, &[f64]), SymplecticError> {
        let d2 = 2 * self.params.d() as i64;
        let mut out = self.forward.apply(half)?;
        for (o, s) in out.iter_mut().zip(&self.half_shift) {
            *o = (*o + s).rem_euclid(d2);
        }
        Ok((out, &self.residual))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sym(rows: &[&[i64]]) -> Result<IntSymplectic, SymplecticError> {
        IntSymplectic::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    #[test]
    fn validation_examples() {
        assert!(IntSymplectic::from_rows(&IntMatrix::identity(4).rows()).is_ok());
        assert!(sym(&[&[0, 1], &[-1, 0]]).is_ok());
        assert!(sym(&[&[1, 1], &[0, 1]]).is_ok());
        assert!(matches!(
            sym(&[&[2, 0], &[0, 1]]),
            Err(SymplecticError::NotSymplectic { .. })
        ));
        assert!(matches!(
            IntSymplectic::from_f64_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]),
            Err(SymplecticError::NotInteger { row: 0, col: 1, .. })
        ));
        assert!(matches!(
            sym(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]),
            Err(SymplecticError::Shape { .. })
        ));
    }

    #[test]
    fn t_bar_examples() {
        assert_eq!(t_bar(&IntSymplectic::identity(2)), vec![0; 4]);
        assert_eq!(t_bar(&sym(&[&[1, 0], &[1, 1]]).unwrap()), vec![1, 0]);
        assert_eq!(t_bar(&sym(&[&[0, 1], &[-1, 0]]).unwrap()), vec![0, 0]);
    }

    #[test]
    fn covariance_shift_examples() {
        let p = CodeParams::new(3, 1).unwrap();
        let s = sym(&[&[1, 0], &[1, 1]]).unwrap();
        let t = covariance_shift(&s, &p).unwrap();
        assert_eq!(t.half_units(), &[0, 3]);
        let tf = t.to_f64(&p);
        assert!((tf[1] - 1.5 * p.ell()).abs() < 1e-12);
        assert!(covariance_shift(&IntSymplectic::identity(1), &p)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn parity_examples() {
        let f = sym(&[&[0, 1], &[-1, 0]]).unwrap();
        assert!(parity_identity_check(&f, &[1, 1]));
        for a in -2..=2 {
            for b in -2..=2 {
                assert!(parity_identity_check(&f, &[a, b]));
            }
        }
    }

    #[test]
    fn inverse_is_exact() {
        let s = compose_word(
            &[
                Generator::Phase(0),
                Generator::Sum {
                    control: 0,
                    target: 1,
                },
                Generator::Fourier(1),
                Generator::Cz(0, 1),
            ],
            2,
        )
        .unwrap();
        assert!(s.compose(&s.inverse()).unwrap().is_identity());
    }

    #[test]
    fn generator_matrices_are_symplectic() {
        for n in 1..=3 {
            for g in Generator::all(n) {
                let s = g.matrix(n).unwrap();
                IntSymplectic::new(s.matrix().clone()).unwrap();
                assert!(s.compose(&g.inverse().matrix(n).unwrap()).unwrap().is_identity());
            }
        }
    }

    #[test]
    fn decompose_trivial_cases() {
        assert!(decompose(&IntSymplectic::identity(2)).unwrap().is_empty());
        let g = Generator::Sum {
            control: 0,
            target: 1,
        };
        assert_eq!(decompose(&g.matrix(2).unwrap()).unwrap(), vec![g]);
    }

    #[test]
    fn determinant_matches_small_cases() {
        let m = IntMatrix::from_rows(&[vec![2, 1], vec![7, 4]]).unwrap();
        assert_eq!(m.determinant().unwrap(), 1);
        let m = IntMatrix::from_rows(&[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 3]]).unwrap();
        assert_eq!(m.determinant().unwrap(), -3);
    }

    #[test]
    fn displacement_round_trip() {
        let p = CodeParams::new(3, 2).unwrap();
        let c = vec![0.5, -1.25, 2.0, 0.3];
        let neg: Vec<f64> = c.iter().map(|x| -x).collect();
        let m = AffineMap::identity(&p)
            .then(&Operation::Displace(c))
            .unwrap()
            .then(&Operation::Displace(neg))
            .unwrap();
        assert_eq!(m.half_shift(), &[0, 0, 0, 0]);
        for r in m.residual() {
            assert!(r.abs() < 1e-12 || (r - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn displacement_moves_lattice_points() {
        let p = CodeParams::new(3, 1).unwrap();
        let m = AffineMap::identity(&p)
            .then(&Operation::Displace(vec![1.0, 2.0]))
            .unwrap();
        let eta = PhasePoint::single(&p, 2.0 * p.ell(), 2.0 * p.ell());
        let out = m.apply(&eta);
        assert!(out.x(0).abs() < 1e-12);
        assert!((out.z(0) - p.ell()).abs() < 1e-12);
    }

    fn word_strategy(n: usize, len: usize) -> impl Strategy<Value = Vec<Generator>> {
        let gens = Generator::all(n);
        prop::collection::vec(prop::sample::select(gens), 0..=len)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn decompose_round_trip(n in 1usize..=3, seed in any::<u64>()) {
            let gens = Generator::all(n);
            let mut x = seed;
            let len = (seed % 16) as usize;
            let word: Vec<Generator> = (0..len).map(|_| {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                gens[(x >> 33) as usize % gens.len()]
            }).collect();
            let s = compose_word(&word, n).unwrap();
            let w = decompose(&s).unwrap();
            prop_assert_eq!(compose_word(&w, n).unwrap(), s);
        }

        #[test]
        fn parity_identity_holds(word in word_strategy(3, 20), a in prop::collection::vec(-10i64..=10, 6)) {
            let s = compose_word(&word, 3).unwrap();
            prop_assert!(parity_identity_check(&s, &a));
        }

        #[test]
        fn pullback_inverts_apply(word in word_strategy(2, 8), c in prop::collection::vec(-3.0f64..3.0, 4),
                                  eta in prop::collection::vec(0.0f64..4.0, 4)) {
            let p = CodeParams::new(3, 2).unwrap();
            let mut m = AffineMap::identity(&p);
            for g in &word {
                m = m.then(&Operation::Gate(*g)).unwrap();
            }
            m = m.then(&Operation::Displace(c)).unwrap();
            m = m.then(&Operation::Symplectic(Generator::Phase(1).matrix(2).unwrap())).unwrap();
            let e = PhasePoint::new(&p, eta);
            let back = m.pullback(&m.apply(&e));
            for (a, b) in back.coords().iter().zip(e.coords()) {
                let diff = (a - b).abs();
                prop_assert!(diff < 1e-9 || (diff - p.period()).abs() < 1e-9);
            }
        }
    }
}

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

/// Integer points inside `{t : (t - c)ᵀ A (t - c) ≤ r²}` for a fixed
/// positive-definite `A`, enumerated Fincke-Pohst style.
#[derive(Debug, Clone)]
pub struct Ellipsoid {
    m: usize,
    /// Upper-triangular `U` with `A = UᵀU`, row-major.
    upper: Vec<f64>,
    /// Diagonal of `A⁻¹`.
    inv_diag: Vec<f64>,
}

impl Ellipsoid {
    /// `a` is row-major `m × m`. Returns `None` unless `a` is positive definite.
    pub fn new(m: usize, a: &[f64]) -> Option<Self> {
        let mat = DMatrix::from_row_slice(m, m, a);
        let chol = mat.clone().cholesky()?;
        let l = chol.l();
        let mut upper = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                upper[i * m + j] = l[(j, i)];
            }
        }
        let inv = chol.inverse();
        Some(Self {
            m,
            upper,
            inv_diag: (0..m).map(|i| inv[(i, i)]).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    /// Largest `|t_i - c_i|` inside the ellipsoid of radius `r`.
    pub fn half_width(&self, i: usize, r: f64) -> f64 {
        r * libm::sqrt(self.inv_diag[i])
    }

    /// `(t - c)ᵀ A (t - c)`.
    pub fn norm2(&self, t: &[i64], c: &[f64]) -> f64 {
        let m = self.m;
        let mut acc = 0.0;
        for i in 0..m {
            let mut s = 0.0;
            for j in i..m {
                s += self.upper[i * m + j] * (t[j] as f64 - c[j]);
            }
            acc += s * s;
        }
        acc
    }

    /// Babai nearest-plane approximation to the lattice point closest to `c`.
    pub fn nearest_plane(&self, c: &[f64]) -> Vec<i64> {
        let m = self.m;
        let mut t = vec![0i64; m];
        for i in (0..m).rev() {
            let mut off = 0.0;
            for j in i + 1..m {
                off += self.upper[i * m + j] * (t[j] as f64 - c[j]);
            }
            t[i] = libm::round(c[i] - off / self.upper[i * m + i]) as i64;
        }
        t
    }

    /// Calls `f(t, (t - c)ᵀA(t - c))` for every lattice point within radius `r`,
    /// in a fixed order (last coordinate outermost, ascending).
    pub fn for_each(&self, c: &[f64], r: f64, mut f: impl FnMut(&[i64], f64)) {
        let m = self.m;
        let r2 = r * r;
        let mut t = vec![0i64; m];
        let mut partial = vec![0.0; m + 1];
        let mut hi = vec![0i64; m];
        // level i iterates t[i]; partial[i+1] is the sum over coordinates > i
        let mut level = m - 1;
        let bounds = |i: usize, t: &[i64], partial: &[f64]| -> (i64, i64) {
            let mut off = 0.0;
            for j in i + 1..m {
                off += self.upper[i * m + j] * (t[j] as f64 - c[j]);
            }
            let budget = r2 - partial[i + 1];
            if budget < 0.0 {
                return (1, 0);
            }
            let rad = libm::sqrt(budget);
            let d = self.upper[i * m + i];
            let lo = libm::ceil(c[i] + (-rad - off) / d) as i64;
            let hi = libm::floor(c[i] + (rad - off) / d) as i64;
            (lo, hi)
        };
        let (lo, h) = bounds(level, &t, &partial);
        if lo > h {
            return;
        }
        t[level] = lo;
        hi[level] = h;
        loop {
            if t[level] > hi[level] {
                if level == m - 1 {
                    return;
                }
                level += 1;
                t[level] += 1;
                continue;
            }
            let mut s = 0.0;
            for j in level..m {
                s += self.upper[level * m + j] * (t[j] as f64 - c[j]);
            }
            partial[level] = partial[level + 1] + s * s;
            if level == 0 {
                if partial[0] <= r2 {
                    f(&t, partial[0]);
                }
                t[0] += 1;
                continue;
            }
            let (lo, h) = bounds(level - 1, &t, &partial);
            if lo > h {
                t[level] += 1;
                continue;
            }
            level -= 1;
            t[level] = lo;
            hi[level] = h;
        }
    }
}

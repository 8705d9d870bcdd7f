use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

/// Trigonometric series on the torus `[0, P)²`:
/// `W(u, v) = Σ C[a_X, a_Z] exp(2πi (a_X v − a_Z u) / P)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusSeries {
    period: f64,
    x_range: (i64, i64),
    z_range: (i64, i64),
    coeffs: Vec<Complex64>,
}

impl TorusSeries {
    /// Zero series with coefficient indices `a_X ∈ x_range`, `a_Z ∈ z_range`
    /// (inclusive).
    pub fn zeros(period: f64, x_range: (i64, i64), z_range: (i64, i64)) -> Self {
        assert!(x_range.0 <= x_range.1 && z_range.0 <= z_range.1);
        let nx = (x_range.1 - x_range.0 + 1) as usize;
        let nz = (z_range.1 - z_range.0 + 1) as usize;
        Self {
            period,
            x_range,
            z_range,
            coeffs: vec![Complex64::new(0.0, 0.0); nx * nz],
        }
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn x_range(&self) -> (i64, i64) {
        self.x_range
    }

    pub fn z_range(&self) -> (i64, i64) {
        self.z_range
    }

    fn nz(&self) -> usize {
        (self.z_range.1 - self.z_range.0 + 1) as usize
    }

    fn slot(&self, ax: i64, az: i64) -> Option<usize> {
        if ax < self.x_range.0 || ax > self.x_range.1 || az < self.z_range.0 || az > self.z_range.1 {
            return None;
        }
        Some((ax - self.x_range.0) as usize * self.nz() + (az - self.z_range.0) as usize)
    }

    pub fn coefficient(&self, ax: i64, az: i64) -> Complex64 {
        self.slot(ax, az)
            .map_or(Complex64::new(0.0, 0.0), |s| self.coeffs[s])
    }

    /// Panics if `(ax, az)` is outside the allocated ranges.
    pub fn add(&mut self, ax: i64, az: i64, value: Complex64) {
        let s = self
            .slot(ax, az)
            .expect("coefficient index outside series bounds");
        self.coeffs[s] += value;
    }

    pub fn scale(&mut self, factor: f64) {
        for c in &mut self.coeffs {
            *c *= factor;
        }
    }

    /// Adds `other` (same period, any ranges contained in ours).
    pub fn accumulate(&mut self, other: &TorusSeries) {
        for ax in other.x_range.0..=other.x_range.1 {
            for az in other.z_range.0..=other.z_range.1 {
                let c = other.coefficient(ax, az);
                if c != Complex64::new(0.0, 0.0) {
                    self.add(ax, az, c);
                }
            }
        }
    }

    /// `∫∫ W du dv` over one period square.
    pub fn integral(&self) -> Complex64 {
        self.coefficient(0, 0) * self.period * self.period
    }

    /// Largest `|C[a] − conj(C[−a])|`; zero for a real-valued function.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for ax in self.x_range.0..=self.x_range.1 {
            for az in self.z_range.0..=self.z_range.1 {
                let d = (self.coefficient(ax, az) - self.coefficient(-ax, -az).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn eval(&self, u: f64, v: f64) -> Complex64 {
        let k = 2.0 * PI / self.period;
        let nz = self.nz();
        let phase_u: Vec<Complex64> = (self.z_range.0..=self.z_range.1)
            .map(|az| Complex64::from_polar(1.0, -k * az as f64 * u))
            .collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for (ix, ax) in (self.x_range.0..=self.x_range.1).enumerate() {
            let row = &self.coeffs[ix * nz..(ix + 1) * nz];
            let inner: Complex64 = row.iter().zip(&phase_u).map(|(c, p)| c * p).sum();
            acc += inner * Complex64::from_polar(1.0, k * ax as f64 * v);
        }
        acc
    }

    /// Real part on the tensor grid: `out[i * vs.len() + j] = Re W(us[i], vs[j])`.
    /// Returns the largest imaginary part seen.
    pub fn eval_grid(&self, us: &[f64], vs: &[f64], out: &mut [f64]) -> f64 {
        assert_eq!(out.len(), us.len() * vs.len());
        let k = 2.0 * PI / self.period;
        let nz = self.nz();
        let nx = self.coeffs.len() / nz;
        // partial[i][ax] = Σ_az C[ax, az] e^{-ik az u_i}
        let mut partial = vec![Complex64::new(0.0, 0.0); us.len() * nx];
        let mut phase_u = vec![Complex64::new(0.0, 0.0); nz];
        for (i, &u) in us.iter().enumerate() {
            for (iz, az) in (self.z_range.0..=self.z_range.1).enumerate() {
                phase_u[iz] = Complex64::from_polar(1.0, -k * az as f64 * u);
            }
            for ix in 0..nx {
                let row = &self.coeffs[ix * nz..(ix + 1) * nz];
                partial[i * nx + ix] = row.iter().zip(&phase_u).map(|(c, p)| c * p).sum();
            }
        }
        let mut phase_v = vec![Complex64::new(0.0, 0.0); nx * vs.len()];
        for (j, &v) in vs.iter().enumerate() {
            for (ix, ax) in (self.x_range.0..=self.x_range.1).enumerate() {
                phase_v[j * nx + ix] = Complex64::from_polar(1.0, k * ax as f64 * v);
            }
        }
        let mut max_imag: f64 = 0.0;
        for i in 0..us.len() {
            let p = &partial[i * nx..(i + 1) * nx];
            for j in 0..vs.len() {
                let w: Complex64 = p
                    .iter()
                    .zip(&phase_v[j * nx..(j + 1) * nx])
                    .map(|(a, b)| a * b)
                    .sum();
                out[i * vs.len() + j] = w.re;
                max_imag = max_imag.max(w.im.abs());
            }
        }
        max_imag
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_matches_pointwise() {
        let mut s = TorusSeries::zeros(3.0, (-2, 2), (-1, 3));
        s.add(0, 0, Complex64::new(0.5, 0.0));
        s.add(1, -1, Complex64::new(0.2, 0.1));
        s.add(-1, 1, Complex64::new(0.2, -0.1));
        s.add(2, 3, Complex64::new(-0.05, 0.0));
        let us = [0.0, 0.7, 2.9];
        let vs = [0.1, 1.3];
        let mut out = [0.0; 6];
        s.eval_grid(&us, &vs, &mut out);
        for (i, &u) in us.iter().enumerate() {
            for (j, &v) in vs.iter().enumerate() {
                assert!((out[i * 2 + j] - s.eval(u, v).re).abs() < 1e-14);
            }
        }
        assert!((s.integral().re - 4.5).abs() < 1e-14);
        assert!((s.hermitian_defect() - 0.05).abs() < 1e-14);
        assert!((s.eval(0.3, 0.3) - s.eval(3.3, -2.7)).norm() < 1e-13);
    }
}

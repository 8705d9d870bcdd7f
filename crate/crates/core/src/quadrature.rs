//! Gauss-Legendre rules and adaptive tensor-product integration over the
//! square torus `[0, P)²`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Nodes and weights of the `order`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = libm::cos(PI * (i as f64 + 0.75) / (n + 0.5));
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(order, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrand evaluated on a tensor grid: `out[i * vs.len() + j] = f(us[i], vs[j])`.
pub trait TensorIntegrand {
    fn eval_grid(&mut self, us: &[f64], vs: &[f64], out: &mut [f64]);
}

impl<F: FnMut(&[f64], &[f64], &mut [f64])> TensorIntegrand for F {
    fn eval_grid(&mut self, us: &[f64], vs: &[f64], out: &mut [f64]) {
        self(us, vs, out)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveTorus {
    pub order: usize,
    /// Initial panels per axis.
    pub base_panels: usize,
    pub max_depth: u32,
    /// Absolute error target for the whole square.
    pub abs_tol: f64,
}

impl Default for AdaptiveTorus {
    fn default() -> Self {
        Self {
            order: 10,
            base_panels: 32,
            max_depth: 8,
            abs_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub panels: usize,
    /// Panels accepted only because the depth limit was reached.
    pub unresolved: usize,
}

struct Panel {
    u0: f64,
    v0: f64,
    h: f64,
    depth: u32,
    value: f64,
}

impl AdaptiveTorus {
    pub fn integrate<I: TensorIntegrand>(&self, period: f64, f: &mut I) -> QuadratureResult {
        let (x, w) = gauss_legendre(self.order);
        let q = self.order;
        let mut us = vec![0.0; q];
        let mut vs = vec![0.0; q];
        let mut buf = vec![0.0; q * q];
        let mut rule = |u0: f64, v0: f64, h: f64, f: &mut I| -> f64 {
            for i in 0..q {
                us[i] = u0 + 0.5 * h * (x[i] + 1.0);
                vs[i] = v0 + 0.5 * h * (x[i] + 1.0);
            }
            f.eval_grid(&us, &vs, &mut buf);
            let mut acc = 0.0;
            for i in 0..q {
                let mut row = 0.0;
                for j in 0..q {
                    row += w[j] * buf[i * q + j];
                }
                acc += w[i] * row;
            }
            acc * 0.25 * h * h
        };

        let area = period * period;
        let h0 = period / self.base_panels as f64;
        let mut stack: Vec<Panel> = Vec::new();
        for a in (0..self.base_panels).rev() {
            for b in (0..self.base_panels).rev() {
                let (u0, v0) = (a as f64 * h0, b as f64 * h0);
                stack.push(Panel {
                    u0,
                    v0,
                    h: h0,
                    depth: 0,
                    value: rule(u0, v0, h0, f),
                });
            }
        }
        let mut res = QuadratureResult {
            value: 0.0,
            error_estimate: 0.0,
            panels: 0,
            unresolved: 0,
        };
        while let Some(p) = stack.pop() {
            let hh = 0.5 * p.h;
            let children = [
                (p.u0, p.v0),
                (p.u0, p.v0 + hh),
                (p.u0 + hh, p.v0),
                (p.u0 + hh, p.v0 + hh),
            ];
            let vals: Vec<f64> = children
                .iter()
                .map(|&(u, v)| rule(u, v, hh, f))
                .collect();
            let fine: f64 = vals.iter().sum();
            let err = (fine - p.value).abs();
            let local_tol = self.abs_tol * (p.h * p.h) / area;
            if err <= local_tol || p.depth >= self.max_depth {
                if err > local_tol {
                    res.unresolved += 1;
                }
                res.value += fine;
                res.error_estimate += err;
                res.panels += 1;
            } else {
                for (k, &(u, v)) in children.iter().enumerate().rev() {
                    stack.push(Panel {
                        u0: u,
                        v0: v,
                        h: hh,
                        depth: p.depth + 1,
                        value: vals[k],
                    });
                }
            }
        }
        res
    }
}

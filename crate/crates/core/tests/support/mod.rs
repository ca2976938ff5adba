//! Quadrature oracles for standard-normal averages, independent of the
//! library's closed forms.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss–Hermite rule for the weight
/// `e^{-x²}`, by Newton iteration on the orthonormal Hermite recurrence.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let pim4 = PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (pim4, 0.0);
            for j in 1..=n {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let step = p1 / pp;
            z -= step;
            if step.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// `E[f(Z)]` for standard normal `Z` with a Gauss–Hermite rule.
pub struct NormalRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl NormalRule {
    pub fn gauss_hermite(n: usize) -> Self {
        let (x, w) = gauss_hermite(n);
        Self {
            nodes: x.iter().map(|x| std::f64::consts::SQRT_2 * x).collect(),
            weights: w.iter().map(|w| w / PI.sqrt()).collect(),
        }
    }

    /// Trapezoid rule with spacing `h` on `[-limit, limit]`. For entire
    /// integrands with frequency `b` the aliasing error is of order
    /// `exp(-(2π/h - b)²/2)`.
    pub fn trapezoid(h: f64, limit: f64) -> Self {
        let k = (limit / h).ceil() as i64;
        let norm = h / (2.0 * PI).sqrt();
        let nodes: Vec<f64> = (-k..=k).map(|i| i as f64 * h).collect();
        let weights = nodes.iter().map(|z| norm * (-0.5 * z * z).exp()).collect();
        Self { nodes, weights }
    }

    pub fn mean(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(z, w)| w * f(*z)).sum()
    }
}

/// The three Gaussian averages of the finite-density equations, integrated
/// directly: `(⟨sin θ⟩, ⟨sin² θ⟩, ⟨cos θ⟩)` with
/// `θ = 2Jt(m + gM + √(αr) z)`.
pub fn averages(rule: &NormalRule, m: f64, r: f64, alpha: f64, jt: f64, gm: f64) -> [f64; 3] {
    let theta = |z: f64| 2.0 * jt * (m + gm + (alpha * r).sqrt() * z);
    [
        rule.mean(|z| theta(z).sin()),
        rule.mean(|z| theta(z).sin().powi(2)),
        rule.mean(|z| theta(z).cos()),
    ]
}

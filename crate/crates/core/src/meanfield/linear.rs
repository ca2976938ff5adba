//! Linearization of two-dimensional fixed-point maps.

/// Row-major 2×2 matrix.
pub type Mat2 = [[f64; 2]; 2];

/// Finite-difference step for Jacobians.
pub const JACOBIAN_STEP: f64 = 1e-6;

/// Margin below 1 required of the leading eigenvalue.
pub const STABILITY_MARGIN: f64 = 1e-9;

/// Central-difference Jacobian of `map` at `x`.
pub fn central_jacobian<E>(
    map: impl Fn([f64; 2]) -> Result<[f64; 2], E>,
    x: [f64; 2],
) -> Result<Mat2, E> {
    let h = JACOBIAN_STEP;
    let mut jac = [[0.0; 2]; 2];
    for col in 0..2 {
        let mut plus = x;
        let mut minus = x;
        plus[col] += h;
        minus[col] -= h;
        let fp = map(plus)?;
        let fm = map(minus)?;
        for row in 0..2 {
            jac[row][col] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Eigenvalues of a real 2×2 matrix as `(re, im)` pairs, larger real part
/// first.
pub fn eigenvalues(m: &Mat2) -> [(f64, f64); 2] {
    let half_tr = 0.5 * (m[0][0] + m[1][1]);
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = half_tr * half_tr - det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        [(half_tr + s, 0.0), (half_tr - s, 0.0)]
    } else {
        let s = (-disc).sqrt();
        [(half_tr, s), (half_tr, -s)]
    }
}

/// Largest real part among the eigenvalues.
pub fn leading_real_part(m: &Mat2) -> f64 {
    eigenvalues(m)[0].0
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(m: &Mat2) -> f64 {
    eigenvalues(m).iter().map(|(re, im)| re.hypot(*im)).fold(0.0, f64::max)
}

/// A fixed point of `T` is stable when every eigenvalue `μ` of the Jacobian
/// of `T` has `Re μ < 1`. Exactly then some damping `λ ∈ (0, 1]` makes
/// `x ← (1-λ)x + λT(x)` locally contractive, so the point attracts the
/// damped iteration; a point with `Re μ > 1` repels it for every `λ`.
pub fn is_stable(jac: &Mat2) -> bool {
    leading_real_part(jac) < 1.0 - STABILITY_MARGIN
}

/// Damped Jacobian `(1-λ)I + λJ`.
pub fn damped(jac: &Mat2, lambda: f64) -> Mat2 {
    [
        [(1.0 - lambda) + lambda * jac[0][0], lambda * jac[0][1]],
        [lambda * jac[1][0], (1.0 - lambda) + lambda * jac[1][1]],
    ]
}

/// A damping factor under which a stable point is locally contractive:
/// half the largest admissible `λ`, capped at 1. The damped eigenvalue
/// `1 - λ(1-μ)` lies inside the unit circle iff `λ < 2 Re(1-μ)/|1-μ|²`.
pub fn contractive_damping(jac: &Mat2) -> Option<f64> {
    let mut bound = f64::INFINITY;
    for (re, im) in eigenvalues(jac) {
        let dr = 1.0 - re;
        if dr <= 0.0 {
            return None;
        }
        bound = bound.min(2.0 * dr / (dr * dr + im * im));
    }
    Some((0.5 * bound).min(1.0))
}

/// Outcome of a damped iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IterationOutcome {
    Converged { x: [f64; 2], iterations: usize },
    /// Iterate left the finite region or exceeded `escape`.
    Escaped,
    /// The map reported an error (for example a singular denominator).
    MapFailed,
    MaxIterations,
}

/// Settings of `x ← (1-λ)x + λT(x)` with a sup-norm stopping rule.
#[derive(Debug, Clone, Copy)]
pub struct DampedIteration {
    pub lambda: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub escape: f64,
}

impl DampedIteration {
    pub fn run<E>(
        &self,
        map: impl Fn([f64; 2]) -> Result<[f64; 2], E>,
        start: [f64; 2],
    ) -> IterationOutcome {
        let mut x = start;
        for it in 1..=self.max_iterations {
            let t = match map(x) {
                Ok(t) => t,
                Err(_) => return IterationOutcome::MapFailed,
            };
            let next = [
                (1.0 - self.lambda) * x[0] + self.lambda * t[0],
                (1.0 - self.lambda) * x[1] + self.lambda * t[1],
            ];
            if !next.iter().all(|v| v.is_finite() && v.abs() <= self.escape) {
                return IterationOutcome::Escaped;
            }
            let step = (next[0] - x[0]).abs().max((next[1] - x[1]).abs());
            x = next;
            if step < self.tolerance {
                return IterationOutcome::Converged { x, iterations: it };
            }
        }
        IterationOutcome::MaxIterations
    }
}

/// Newton's method on a two-dimensional residual with a finite-difference
/// Jacobian. Returns the iterate with the smallest sup-norm residual seen.
pub fn newton_polish<E>(
    residual: impl Fn([f64; 2]) -> Result<[f64; 2], E>,
    start: [f64; 2],
    max_steps: usize,
) -> Result<([f64; 2], [f64; 2]), E> {
    let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());
    let mut best_x = start;
    let mut best_r = residual(start)?;
    let mut x = start;
    let mut r = best_r;
    for _ in 0..max_steps {
        if norm(r) == 0.0 {
            break;
        }
        let Ok(j) = central_jacobian(&residual, x) else { break };
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dx = (j[1][1] * r[0] - j[0][1] * r[1]) / det;
        let dy = (j[0][0] * r[1] - j[1][0] * r[0]) / det;
        x = [x[0] - dx, x[1] - dy];
        r = match residual(x) {
            Ok(r) => r,
            Err(_) => break,
        };
        if norm(r).partial_cmp(&norm(best_r)) != Some(std::cmp::Ordering::Less) {
            break;
        }
        best_x = x;
        best_r = r;
    }
    Ok((best_x, best_r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_real_and_complex() {
        let e = eigenvalues(&[[2.0, 0.0], [0.0, -3.0]]);
        assert_eq!(e, [(2.0, 0.0), (-3.0, 0.0)]);
        let e = eigenvalues(&[[0.0, -1.0], [1.0, 0.0]]);
        assert_eq!(e, [(0.0, 1.0), (0.0, -1.0)]);
        assert_eq!(spectral_radius(&[[0.0, -1.0], [1.0, 0.0]]), 1.0);
    }

    #[test]
    fn stability_uses_real_parts() {
        assert!(is_stable(&[[-5.0, 0.0], [0.0, 0.5]]));
        assert!(!is_stable(&[[1.2, 0.0], [0.0, 0.5]]));
        let lam = contractive_damping(&[[-5.0, 0.0], [0.0, 0.5]]).unwrap();
        assert!(spectral_radius(&damped(&[[-5.0, 0.0], [0.0, 0.5]], lam)) < 1.0);
        assert!(contractive_damping(&[[1.2, 0.0], [0.0, 0.5]]).is_none());
    }

    #[test]
    fn jacobian_of_linear_map() {
        let map = |x: [f64; 2]| Ok::<_, ()>([2.0 * x[0] + x[1], -x[0]]);
        let j = central_jacobian(map, [0.3, 0.4]).unwrap();
        for (a, b) in j.iter().flatten().zip([2.0, 1.0, -1.0, 0.0]) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn damped_iteration_converges_on_contraction() {
        let it = DampedIteration { lambda: 0.5, tolerance: 1e-12, max_iterations: 1000, escape: 1e6 };
        let out = it.run(|x| Ok::<_, ()>([0.5 * x[0] + 1.0, -0.5 * x[1]]), [0.0, 1.0]);
        match out {
            IterationOutcome::Converged { x, .. } => {
                assert!((x[0] - 2.0).abs() < 1e-10 && x[1].abs() < 1e-10)
            }
            other => panic!("{other:?}"),
        }
        let out = it.run(|x| Ok::<_, ()>([3.0 * x[0], x[1]]), [1.0, 0.0]);
        assert_eq!(out, IterationOutcome::Escaped);
    }

    #[test]
    fn newton_polishes_to_machine_precision() {
        let res = |x: [f64; 2]| Ok::<_, ()>([x[0] * x[0] - 2.0, x[1] - x[0]]);
        let (x, r) = newton_polish(res, [1.4, 1.5], 20).unwrap();
        assert!((x[0] - std::f64::consts::SQRT_2).abs() < 1e-14);
        assert!(r[0].abs() < 1e-14 && r[1].abs() < 1e-14);
    }
}

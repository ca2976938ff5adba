//! Bracketing root search on scalar functions sampled at sorted nodes.

/// Bisects `f` on `[a, b]` given `fa = f(a)`, `fb = f(b)` of opposite sign,
/// until the bracket can no longer shrink in floating point.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64, fb: f64) -> f64 {
    debug_assert!(fa * fb <= 0.0);
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a.min(b) || mid >= a.max(b) {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Roots of `f` located from values at sorted `nodes`: nodes where `f`
/// vanishes exactly, plus one bisected root per sign change between
/// adjacent nodes. `NaN` values mark nodes outside the domain; brackets are
/// never formed across them.
pub fn scan_roots(f: impl Fn(f64) -> f64, nodes: &[f64]) -> Vec<f64> {
    let values: Vec<f64> = nodes.iter().map(|&x| f(x)).collect();
    scan_sampled(&f, nodes, &values)
}

pub fn scan_sampled(f: impl Fn(f64) -> f64, nodes: &[f64], values: &[f64]) -> Vec<f64> {
    let mut roots = Vec::new();
    for (k, (&x, &v)) in nodes.iter().zip(values).enumerate() {
        if v == 0.0 {
            roots.push(x);
            continue;
        }
        if let (Some(&x1), Some(&v1)) = (nodes.get(k + 1), values.get(k + 1)) {
            if v.is_finite() && v1.is_finite() && v1 != 0.0 && (v < 0.0) != (v1 < 0.0) {
                roots.push(bisect(&f, x, x1, v, v1));
            }
        }
    }
    roots
}

/// Symmetric grid `(k - half)·step` for `k = 0..=2·half`; contains 0 exactly.
pub fn symmetric_grid(extent: f64, half: usize) -> Vec<f64> {
    let step = extent / half as f64;
    (0..=2 * half).map(|k| (k as f64 - half as f64) * step).collect()
}

/// `sin(x)/x`, continuous at 0.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

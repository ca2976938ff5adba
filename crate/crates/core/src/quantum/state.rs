use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{invalid, Error, Result};
use crate::patterns::Pattern;

/// Tolerance on `Σ |a|² = 1` for externally supplied amplitudes.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Basis-index mask of qubit `i` in an `n`-qubit register. Qubit 0 is the
/// leftmost tensor factor, so it owns the most significant bit.
#[inline]
pub fn qubit_mask(n: usize, i: usize) -> usize {
    1 << (n - 1 - i)
}

/// `σ^z` eigenvalue of qubit `i` in basis state `x`: `|0⟩ → +1`, `|1⟩ → -1`.
#[inline]
pub fn z_sign(n: usize, i: usize, x: usize) -> f64 {
    if x & qubit_mask(n, i) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Spin configuration of basis state `x`.
pub fn basis_spins(n: usize, x: usize) -> Vec<i8> {
    (0..n)
        .map(|i| if x & qubit_mask(n, i) == 0 { 1 } else { -1 })
        .collect()
}

/// Basis index of a spin configuration (`+1 → |0⟩`).
pub fn basis_index(spins: &[i8]) -> usize {
    let n = spins.len();
    spins
        .iter()
        .enumerate()
        .filter(|(_, &s)| s < 0)
        .fold(0, |x, (i, _)| x | qubit_mask(n, i))
}

/// Amplitudes of an `n`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if n == 0 || n >= usize::BITS as usize {
            return Err(invalid(format!("unsupported qubit count {n}")));
        }
        if amps.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, found: amps.len() });
        }
        let s = Self { n, amps };
        let norm = s.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(invalid(format!("state norm {norm} is not 1")));
        }
        Ok(s)
    }

    /// Unchecked constructor for states produced by unitary propagation.
    pub(crate) fn from_raw(n: usize, amps: Vec<Complex64>) -> Self {
        Self { n, amps }
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if n == 0 || index >= 1 << n {
            return Err(invalid(format!("basis index {index} out of range for {n} qubits")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Computational basis state `|ξ⟩` of a pattern.
    pub fn from_pattern(pattern: &Pattern) -> Result<Self> {
        Self::basis(pattern.len(), basis_index(pattern.spins()))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨σ^z_i⟩`.
    pub fn expect_z(&self, i: usize) -> f64 {
        let m = qubit_mask(self.n, i);
        self.amps
            .iter()
            .enumerate()
            .map(|(x, a)| if x & m == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum()
    }

    /// `⟨σ^y_i⟩` by amplitude-pair summation. With `σ^y|0⟩ = i|1⟩` and
    /// `σ^y|1⟩ = -i|0⟩`, each pair `(x, x|m)` with bit clear in `x`
    /// contributes `2 Im(conj(a_x) a_{x|m})`.
    pub fn expect_y(&self, i: usize) -> f64 {
        let m = qubit_mask(self.n, i);
        let mut acc = 0.0;
        for x in 0..self.amps.len() {
            if x & m == 0 {
                acc += 2.0 * (self.amps[x].conj() * self.amps[x | m]).im;
            }
        }
        acc
    }

    /// `⟨σ^x_i⟩`.
    pub fn expect_x(&self, i: usize) -> f64 {
        let m = qubit_mask(self.n, i);
        let mut acc = 0.0;
        for x in 0..self.amps.len() {
            if x & m == 0 {
                acc += 2.0 * (self.amps[x].conj() * self.amps[x | m]).re;
            }
        }
        acc
    }
}

/// `2^{-n/2} Σ_x |x⟩`: every qubit along `+x`.
pub fn uniform_state(n: usize) -> Result<StateVector> {
    if n == 0 || n >= usize::BITS as usize {
        return Err(invalid(format!("unsupported qubit count {n}")));
    }
    let dim = 1usize << n;
    // 0.5^n is exact, so the square root is correctly rounded.
    let a = Complex64::new(0.5f64.powi(n as i32).sqrt(), 0.0);
    Ok(StateVector { n, amps: vec![a; dim] })
}

/// Pattern overlaps `m^k = (1/n) Σ_i ξ_i ⟨σ^k_i⟩` for `k ∈ {y, z}`,
/// returned as `(m_y, m_z)`.
pub fn measure_overlaps(psi: &StateVector, pattern: &Pattern) -> Result<(f64, f64)> {
    if pattern.len() != psi.n {
        return Err(Error::DimensionMismatch { expected: psi.n, found: pattern.len() });
    }
    let n = psi.n as f64;
    let (mut my, mut mz) = (0.0, 0.0);
    for (i, &xi) in pattern.spins().iter().enumerate() {
        my += f64::from(xi) * psi.expect_y(i);
        mz += f64::from(xi) * psi.expect_z(i);
    }
    Ok((my / n, mz / n))
}

/// Draws `shots` computational-basis outcomes with Born probabilities.
/// Returns a histogram keyed by basis index. ChaCha20-seeded, so the
/// histogram is a pure function of `(psi, shots, seed)`.
pub fn sample_measurement(
    psi: &StateVector,
    shots: usize,
    seed: u64,
) -> Result<BTreeMap<usize, usize>> {
    if shots < 1 {
        return Err(invalid("shots must be at least 1"));
    }
    let mut cdf = Vec::with_capacity(psi.dim());
    let mut acc = 0.0;
    for a in &psi.amps {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    let total = acc;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut hist = BTreeMap::new();
    for _ in 0..shots {
        let u: f64 = rng.random::<f64>() * total;
        // First index whose cumulative weight exceeds u; zero-probability
        // states are never selected.
        let mut k = cdf.partition_point(|&c| c <= u);
        if k >= cdf.len() {
            k = cdf.len() - 1;
        }
        *hist.entry(k).or_insert(0) += 1;
    }
    Ok(hist)
}

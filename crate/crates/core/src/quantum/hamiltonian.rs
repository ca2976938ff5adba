use faer::{c64, Mat};
use num_complex::Complex64;

use super::state::{qubit_mask, StateVector};
use crate::error::{Error, Result};
use crate::patterns::{Pattern, WeightMatrix};

/// Default cap on the register size for dense operators.
pub const DEFAULT_MAX_QUBITS: usize = 14;

/// Bytes needed for one dense complex `2^n × 2^n` matrix.
pub fn dense_matrix_bytes(n: usize) -> u128 {
    16u128 << (2 * n)
}

/// Approximate peak memory of a spectral propagation: the operator and
/// its eigenvector matrix.
pub fn propagation_memory_bytes(n: usize) -> u128 {
    2 * dense_matrix_bytes(n)
}

/// Parameters of `H = J Σ_{i≠j} w_ij σ^y_i σ^z_j + g Σ_i h_i^ext σ^y_i`,
/// with `h_i^ext = Σ_j w_ij ξ_j^ext`.
///
/// The double sum runs over ordered pairs. The evolution operator is
/// `exp(+iHt)`; the opposite convention `exp(-iHt)` is recovered by
/// negating both `j` and `g`.
#[derive(Debug, Clone)]
pub struct HamiltonianSpec {
    pub weights: WeightMatrix,
    pub j: f64,
    pub g: f64,
    pub external: Option<Pattern>,
}

/// A dense Hermitian operator on `n` qubits, stored column-major.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    n: usize,
    matrix: Mat<c64>,
}

impl Hamiltonian {
    /// Wraps an arbitrary `2^n × 2^n` matrix. Hermiticity is checked when
    /// it is diagonalized, not here.
    pub fn from_matrix(n: usize, matrix: Mat<c64>) -> Result<Self> {
        let dim = 1usize << n;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: matrix.nrows() });
        }
        Ok(Self { n, matrix })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Mat<c64> {
        &self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    /// `max |H - H†|` over all elements.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for c in 0..d {
            for r in c..d {
                let diff = self.matrix[(r, c)] - self.matrix[(c, r)].conj();
                worst = worst.max(diff.norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        let d = self.dim();
        (0..d)
            .flat_map(|c| self.matrix.col_as_slice(c).iter())
            .fold(0.0f64, |m, z| m.max(z.norm()))
    }

    /// Dense `H ψ`.
    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let d = self.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); d];
        for (c, &v) in psi.iter().enumerate() {
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (o, &h) in out.iter_mut().zip(self.matrix.col_as_slice(c)) {
                *o += h * v;
            }
        }
        out
    }

    /// `⟨ψ|H|ψ⟩` (real part; the imaginary part vanishes for Hermitian H).
    pub fn expectation(&self, psi: &StateVector) -> f64 {
        let hpsi = self.apply(psi.amplitudes());
        psi.amplitudes()
            .iter()
            .zip(&hpsi)
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }
}

/// Assembles the dense operator. Matrix elements follow from
/// `σ^y_i σ^z_j |x⟩ = i z_i(x) z_j(x) |x ⊕ b_i⟩` for `i ≠ j`, so the only
/// nonzero entries are `H[x ⊕ b_i, x] = i z_i(x) F_i(x)` with
/// `F_i(x) = J Σ_{j≠i} w_ij z_j(x) + g h_i^ext`.
pub fn build_hamiltonian(spec: &HamiltonianSpec, max_qubits: usize) -> Result<Hamiltonian> {
    let n = spec.weights.n();
    if n > max_qubits {
        return Err(Error::TooManyQubits { n, max: max_qubits, bytes: propagation_memory_bytes(n) });
    }
    let h_ext = match &spec.external {
        Some(xi) => spec.weights.field(xi.spins())?,
        None => vec![0.0; n],
    };
    let dim = 1usize << n;
    let mut matrix = Mat::<c64>::zeros(dim, dim);
    let mut z = vec![0.0f64; n];
    for x in 0..dim {
        for (i, zi) in z.iter_mut().enumerate() {
            *zi = if x & qubit_mask(n, i) == 0 { 1.0 } else { -1.0 };
        }
        for i in 0..n {
            let row = spec.weights.row(i);
            let coupling: f64 = row
                .iter()
                .zip(&z)
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, (w, zj))| w * zj)
                .sum();
            let f = spec.j * coupling + spec.g * h_ext[i];
            matrix[(x ^ qubit_mask(n, i), x)] += Complex64::new(0.0, z[i] * f);
        }
    }
    Ok(Hamiltonian { n, matrix })
}

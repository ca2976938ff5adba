use faer::{c64, Mat, Side};
use num_complex::Complex64;
use rayon::prelude::*;

use super::hamiltonian::Hamiltonian;
use super::state::StateVector;
use crate::error::{invalid, Error, Result};

/// Largest tolerated `|H - H†|` element before diagonalization.
pub const HERMITICITY_TOLERANCE: f64 = 1e-12;

/// Spectral decomposition `H = U Λ U†`, reusable for any number of
/// propagation times.
#[derive(Debug, Clone)]
pub struct Propagator {
    n: usize,
    eigenvalues: Vec<f64>,
    eigenvectors: Mat<c64>,
}

impl Propagator {
    pub fn new(h: &Hamiltonian) -> Result<Self> {
        let defect = h.hermiticity_defect();
        if defect > HERMITICITY_TOLERANCE * h.max_abs().max(1.0) {
            return Err(Error::NotHermitian(defect));
        }
        let eig = h
            .matrix()
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigen(format!("{e:?}")))?;
        let s = eig.S().column_vector();
        let eigenvalues = (0..s.nrows()).map(|k| s[k].re).collect();
        Ok(Self { n: h.n(), eigenvalues, eigenvectors: eig.U().to_owned() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Eigenvalues in nondecreasing order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `exp(+iHt) ψ0`.
    pub fn evolve(&self, psi0: &StateVector, t: f64) -> Result<StateVector> {
        self.evolver(psi0)?.at(t)
    }

    /// Projects `ψ0` onto the eigenbasis once, so that each later time costs
    /// a single `U · diag(e^{iλt}) c` product.
    pub fn evolver<'a>(&'a self, psi0: &'a StateVector) -> Result<Evolver<'a>> {
        if psi0.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: psi0.n() });
        }
        let coeffs = (0..self.eigenvalues.len())
            .into_par_iter()
            .map(|k| {
                self.eigenvectors
                    .col_as_slice(k)
                    .iter()
                    .zip(psi0.amplitudes())
                    .map(|(u, a)| u.conj() * a)
                    .sum()
            })
            .collect();
        Ok(Evolver { prop: self, psi0, coeffs })
    }
}

pub struct Evolver<'a> {
    prop: &'a Propagator,
    psi0: &'a StateVector,
    coeffs: Vec<Complex64>,
}

impl Evolver<'_> {
    pub fn at(&self, t: f64) -> Result<StateVector> {
        if !t.is_finite() {
            return Err(invalid(format!("time {t} is not finite")));
        }
        if t == 0.0 {
            return Ok(self.psi0.clone());
        }
        let dim = self.coeffs.len();
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for (k, (&lambda, &c)) in self.prop.eigenvalues.iter().zip(&self.coeffs).enumerate() {
            let w = Complex64::from_polar(1.0, lambda * t) * c;
            for (o, u) in out.iter_mut().zip(self.prop.eigenvectors.col_as_slice(k)) {
                *o += u * w;
            }
        }
        Ok(StateVector::from_raw(self.prop.n, out))
    }
}

/// One-shot `exp(+iHt) ψ0`.
pub fn evolve(h: &Hamiltonian, psi0: &StateVector, t: f64) -> Result<StateVector> {
    Propagator::new(h)?.evolve(psi0, t)
}

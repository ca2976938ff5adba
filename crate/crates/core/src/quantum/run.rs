use rayon::prelude::*;

use super::evolve::Propagator;
use super::hamiltonian::{build_hamiltonian, HamiltonianSpec, DEFAULT_MAX_QUBITS};
use super::state::{measure_overlaps, uniform_state, StateVector};
use crate::error::{invalid, Error, Result};
use crate::patterns::{hebb_weights, Normalization, Pattern, PatternSet};

/// Physical and numerical settings of a retrieval run.
#[derive(Debug, Clone, Copy)]
pub struct RunSpec {
    pub j: f64,
    pub g: f64,
    pub normalization: Normalization,
    pub max_qubits: usize,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self { j: 1.0, g: 0.1, normalization: Normalization::OverN, max_qubits: DEFAULT_MAX_QUBITS }
    }
}

/// Observables recorded along a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableTrace {
    pub times: Vec<f64>,
    pub m_y: Vec<f64>,
    pub m_z: Vec<f64>,
    pub norm: Vec<f64>,
    pub energy: Vec<f64>,
}

impl ObservableTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Evolves the uniform superposition under the Hebb Hamiltonian with the
/// external field of `external` and records overlaps with the first stored
/// pattern at each grid time.
pub fn retrieval_run(
    patterns: &PatternSet,
    external: &Pattern,
    spec: &RunSpec,
    times: &[f64],
) -> Result<ObservableTrace> {
    retrieval_run_with_states(patterns, external, spec, times, |_, _| {})
}

/// As [`retrieval_run`], additionally handing each evolved state to
/// `inspect` together with its grid index.
pub fn retrieval_run_with_states(
    patterns: &PatternSet,
    external: &Pattern,
    spec: &RunSpec,
    times: &[f64],
    inspect: impl Fn(usize, &StateVector) + Sync,
) -> Result<ObservableTrace> {
    if times.is_empty() {
        return Err(invalid("time grid is empty"));
    }
    if let Some(t) = times.iter().find(|t| !t.is_finite()) {
        return Err(invalid(format!("time {t} is not finite")));
    }
    let n = patterns.n();
    if external.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: external.len() });
    }
    let weights = hebb_weights(patterns.patterns(), spec.normalization)?;
    let h = build_hamiltonian(
        &HamiltonianSpec { weights, j: spec.j, g: spec.g, external: Some(external.clone()) },
        spec.max_qubits,
    )?;
    let prop = Propagator::new(&h)?;
    let psi0 = uniform_state(n)?;
    let evolver = prop.evolver(&psi0)?;
    let target = &patterns.patterns()[0];
    let rows = times
        .par_iter()
        .enumerate()
        .map(|(k, &t)| {
            let psi = evolver.at(t)?;
            inspect(k, &psi);
            let (my, mz) = measure_overlaps(&psi, target)?;
            Ok((my, mz, psi.norm(), h.expectation(&psi)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut trace = ObservableTrace {
        times: times.to_vec(),
        m_y: Vec::with_capacity(rows.len()),
        m_z: Vec::with_capacity(rows.len()),
        norm: Vec::with_capacity(rows.len()),
        energy: Vec::with_capacity(rows.len()),
    };
    for (my, mz, norm, e) in rows {
        trace.m_y.push(my);
        trace.m_z.push(mz);
        trace.norm.push(norm);
        trace.energy.push(e);
    }
    Ok(trace)
}

/// `count` evenly spaced points from `start` to `stop`, both included.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            (0..count)
                .map(|k| if k == count - 1 { stop } else { start + step * k as f64 })
                .collect()
        }
    }
}

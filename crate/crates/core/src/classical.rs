//! Deterministic McCulloch-Pitts / Hopfield dynamics with `f = sign`.
//!
//! Ties (`h_i = 0`) keep the spin's current value.

use crate::error::{invalid, Error, Result};
use crate::patterns::WeightMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalState {
    pub spins: Vec<i8>,
    pub step: usize,
}

impl ClassicalState {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(invalid(format!("state entry {bad} is not +1 or -1")));
        }
        Ok(Self { spins, step: 0 })
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }
}

/// Update schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateMode {
    /// One spin at a time, each seeing the partially updated state.
    #[default]
    Sequential,
    /// All spins from the same previous state.
    Parallel,
}

impl std::str::FromStr for UpdateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sequential" => Ok(UpdateMode::Sequential),
            "parallel" => Ok(UpdateMode::Parallel),
            other => Err(invalid(format!("unknown update mode {other:?}"))),
        }
    }
}

/// `h_i = Σ_j w_ij s_j`.
pub fn synaptic_potential(weights: &WeightMatrix, state: &ClassicalState, i: usize) -> Result<f64> {
    check_dim(weights, state)?;
    if i >= state.len() {
        return Err(invalid(format!("index {i} out of range for n={}", state.len())));
    }
    Ok(potential(weights, &state.spins, i))
}

fn potential(weights: &WeightMatrix, spins: &[i8], i: usize) -> f64 {
    weights
        .row(i)
        .iter()
        .zip(spins)
        .map(|(w, &s)| w * f64::from(s))
        .sum()
}

#[inline]
fn sign_or_keep(h: f64, current: i8) -> i8 {
    if h > 0.0 {
        1
    } else if h < 0.0 {
        -1
    } else {
        current
    }
}

fn check_dim(weights: &WeightMatrix, state: &ClassicalState) -> Result<()> {
    if weights.n() != state.len() {
        return Err(Error::DimensionMismatch { expected: weights.n(), found: state.len() });
    }
    Ok(())
}

fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(invalid(format!("order has {} entries, expected {n}", order.len())));
    }
    let mut seen = vec![false; n];
    for &i in order {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(invalid(format!("order is not a permutation of 0..{n}")));
        }
    }
    Ok(())
}

/// One sequential sweep over `order`.
pub fn update_sequential(
    weights: &WeightMatrix,
    state: &ClassicalState,
    order: &[usize],
) -> Result<ClassicalState> {
    check_dim(weights, state)?;
    check_permutation(order, state.len())?;
    let mut spins = state.spins.clone();
    for &i in order {
        let h = potential(weights, &spins, i);
        spins[i] = sign_or_keep(h, spins[i]);
    }
    Ok(ClassicalState { spins, step: state.step + 1 })
}

/// One synchronous update of every spin.
pub fn update_parallel(weights: &WeightMatrix, state: &ClassicalState) -> Result<ClassicalState> {
    check_dim(weights, state)?;
    let spins = (0..state.len())
        .map(|i| sign_or_keep(potential(weights, &state.spins, i), state.spins[i]))
        .collect();
    Ok(ClassicalState { spins, step: state.step + 1 })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Retrieval {
    pub state: ClassicalState,
    pub converged: bool,
    pub sweeps_used: usize,
}

/// Sequential retrieval with the identity order `0..n`.
pub fn retrieve(
    weights: &WeightMatrix,
    initial: &ClassicalState,
    max_sweeps: usize,
) -> Result<Retrieval> {
    let order: Vec<usize> = (0..initial.len()).collect();
    retrieve_with(weights, initial, max_sweeps, UpdateMode::Sequential, &order, |_| {})
}

/// Repeats sweeps until a full sweep changes nothing or `max_sweeps` is
/// exhausted. `observe` sees the initial state and the state after every
/// sweep. `order` is ignored in parallel mode.
pub fn retrieve_with(
    weights: &WeightMatrix,
    initial: &ClassicalState,
    max_sweeps: usize,
    mode: UpdateMode,
    order: &[usize],
    mut observe: impl FnMut(&ClassicalState),
) -> Result<Retrieval> {
    if max_sweeps < 1 {
        return Err(invalid("max_sweeps must be at least 1"));
    }
    check_dim(weights, initial)?;
    if mode == UpdateMode::Sequential {
        check_permutation(order, initial.len())?;
    }
    observe(initial);
    let mut state = initial.clone();
    for sweep in 1..=max_sweeps {
        let next = match mode {
            UpdateMode::Sequential => update_sequential(weights, &state, order)?,
            UpdateMode::Parallel => update_parallel(weights, &state)?,
        };
        observe(&next);
        let unchanged = next.spins == state.spins;
        state = next;
        if unchanged {
            return Ok(Retrieval { state, converged: true, sweeps_used: sweep });
        }
    }
    Ok(Retrieval { state, converged: false, sweeps_used: max_sweeps })
}

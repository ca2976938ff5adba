//! Mean-field self-consistency: one condensed pattern, and a finite
//! density of stored patterns with a spin-glass order parameter.
//!
//! Stability of a fixed point `x* = T(x*)` is read from the Jacobian of `T`
//! (see [`linear::is_stable`]).

pub mod finite;
pub mod linear;
pub mod roots;
pub mod single;

pub use finite::{
    capacity_at, classify_phase, classify_solution, gaussian_moments, gaussian_sin_average,
    order_parameter_map, order_parameter_residual, retrieval_exists, solve_order_parameters,
    solve_order_parameters_with, FiniteFixedPoint, FiniteMFParams, FiniteSolution,
    FiniteSolveOptions, OrderParameters, Phase, PhaseLabel,
};
pub use single::{
    activation_probability, bifurcation_scan, mf_rotation, single_pattern_map,
    single_pattern_residual, solve_single_pattern, solve_single_pattern_with, BifurcationPoint,
    BifurcationScan, MFFixedPoint, SingleMFParams, SolveOptions,
};

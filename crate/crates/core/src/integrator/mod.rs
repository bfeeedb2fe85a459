//! One-stage explicit ERKN integrators, their algebraic condition checks and
//! the numerical structure diagnostics built on the step map.

mod conditions;
mod diagnostics;
mod scheme;
mod step;

pub use conditions::{
    check_newcond, check_order2, check_symmetry, check_symplecticity, identity_tolerance, sigma,
    sigma_closed_form_discrepancy, xi_grid, ConditionReport, GRID_END, GRID_POINTS, GRID_START,
    ORDER_SAMPLES, SINGULARITY_THRESHOLD,
};
pub use diagnostics::{
    adjoint_roundtrip, block_sigmas, coefficient_bound_ratios, jacobian_symplecticity,
    modified_energies, step_jacobian, MAX_JACOBIAN_DIM,
};
pub use scheme::{Builtin, CoefficientFn, ErknScheme};
pub use step::{
    integrate, propagate, step, step_into, IntegrationError, Observer, SampledSeries,
    StepWorkspace, DIVERGENCE_BOUND,
};

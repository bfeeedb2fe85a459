//! The three-frequency benchmark: `lambda = (1, sqrt 2, 2)`, a
//! two-dimensional first oscillatory block, and the quartic potential
//!
//! ```text
//! U(q) = (0.001 q0 + q11 + q12 + q2 + q3)^4
//! ```

use std::sync::Arc;

use crate::error::{ErknError, Result};
use crate::system::{FrequencyBlock, OscillatorySystem, State};

pub const BENCH_LAMBDA: [f64; 3] = [1.0, std::f64::consts::SQRT_2, 2.0];
pub const BENCH_DIMS: [usize; 4] = [1, 2, 1, 1];
pub const BENCH_OMEGA: f64 = 70.0;
pub const BENCH_H: f64 = 0.01;
pub const BENCH_T_END: f64 = 10_000.0;
pub const DESK_T_END: f64 = 1_000.0;
pub const DEFAULT_SAMPLE_EVERY: usize = 100;

/// Coefficients of the linear form inside the quartic potential.
pub const BENCH_POTENTIAL_COEFFS: [f64; 5] = [0.001, 1.0, 1.0, 1.0, 1.0];

/// `q(0)` in units where the oscillatory components are multiplied by `eps`.
const Q0_SCALED: [f64; 5] = [1.0, 0.3, 0.8, -1.1, 0.7];
pub const BENCH_P0: [f64; 5] = [-0.75, 0.6, 0.7, -0.9, 0.8];

/// `mu = (1, 0, 2)` gives `I1 + I3`; `mu = (0, sqrt 2, 0)` gives `I2`.
pub fn benchmark_mu_list() -> Vec<(String, Vec<f64>)> {
    vec![
        ("I1+I3".to_string(), vec![1.0, 0.0, 2.0]),
        ("I2".to_string(), vec![0.0, std::f64::consts::SQRT_2, 0.0]),
    ]
}

/// Initial state `q(0) = (1, 0.3 eps, 0.8 eps, -1.1 eps, 0.7 eps)`,
/// `p(0) = (-0.75, 0.6, 0.7, -0.9, 0.8)`.
pub fn benchmark_initial_state(epsilon: f64) -> State<f64> {
    let mut q = Q0_SCALED.to_vec();
    q[1..].iter_mut().for_each(|x| *x *= epsilon);
    State {
        q,
        p: BENCH_P0.to_vec(),
    }
}

/// System with potential `(w . q)^4` for the given frequency blocks.
pub fn quartic_system(
    epsilon: f64,
    blocks: Vec<FrequencyBlock<f64>>,
    coeffs: Vec<f64>,
) -> Result<OscillatorySystem<f64>> {
    let dim: usize = blocks.iter().map(|b| b.dim).sum();
    if coeffs.len() != dim {
        return Err(ErknError::Shape(format!(
            "potential has {} coefficients but the system dimension is {dim}",
            coeffs.len()
        )));
    }
    let w = Arc::new(coeffs);
    let wg = w.clone();
    OscillatorySystem::new(
        epsilon,
        blocks,
        Arc::new(move |q: &[f64]| inner(&w, q).powi(4)),
        Arc::new(move |q: &[f64], out: &mut [f64]| {
            let s3 = 4.0 * inner(&wg, q).powi(3);
            for (o, wi) in out.iter_mut().zip(wg.iter()) {
                *o = s3 * wi;
            }
        }),
    )
}

fn inner(w: &[f64], q: &[f64]) -> f64 {
    w.iter().zip(q).map(|(a, b)| a * b).sum()
}

/// Frequency blocks `[(0, d0), (lambda_1, d1), ...]`.
pub fn blocks_from(lambda: &[f64], dims: &[usize]) -> Result<Vec<FrequencyBlock<f64>>> {
    if dims.len() != lambda.len() + 1 {
        return Err(ErknError::Shape(format!(
            "{} block dimensions given for {} frequencies (expected {})",
            dims.len(),
            lambda.len(),
            lambda.len() + 1
        )));
    }
    Ok(std::iter::once(0.0)
        .chain(lambda.iter().copied())
        .zip(dims)
        .map(|(l, &d)| FrequencyBlock::new(l, d))
        .collect())
}

/// The benchmark system at `omega = 1/eps` with its initial state.
pub fn build_paper_system(omega: f64) -> Result<(OscillatorySystem<f64>, State<f64>)> {
    build_paper_system_with(omega, &BENCH_POTENTIAL_COEFFS)
}

/// As [`build_paper_system`] with a different linear form in the potential.
pub fn build_paper_system_with(
    omega: f64,
    coeffs: &[f64],
) -> Result<(OscillatorySystem<f64>, State<f64>)> {
    if !(omega > 0.0) {
        return Err(ErknError::InvalidArgument(format!(
            "omega must be positive, got {omega}"
        )));
    }
    let epsilon = 1.0 / omega;
    let sys = quartic_system(
        epsilon,
        blocks_from(&BENCH_LAMBDA, &BENCH_DIMS)?,
        coeffs.to_vec(),
    )?;
    Ok((sys, benchmark_initial_state(epsilon)))
}

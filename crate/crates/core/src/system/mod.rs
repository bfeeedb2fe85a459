//! Multi-frequency highly oscillatory Hamiltonian systems
//!
//! ```text
//! H(q, p) = 1/2 sum_j ( |p_j|^2 + (lambda_j / eps)^2 |q_j|^2 ) + U(q)
//! ```
//!
//! with block 0 carrying `lambda_0 = 0` and every other block a distinct
//! `lambda_j >= 1`. Equivalently `q'' = -Omega^2 q + g(q)` with
//! `Omega = diag(omega_j I_{d_j})`, `omega_j = lambda_j / eps` and
//! `g = -grad U`.

mod resonance;

use std::fmt;
use std::ops::Range;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

pub use resonance::{
    default_tolerance, l1_norm, nonresonance_margin, resonance_scan, ResonanceScan, MAX_SCAN_ORDER,
};

use crate::error::{ErknError, Result};
use crate::scalar::Scalar;

/// Potential `q -> U(q)`.
pub type PotentialFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;

/// Gradient `q -> grad U(q)`, written into the output slice.
pub type GradientFn<T> = Arc<dyn Fn(&[T], &mut [T]) + Send + Sync>;

static NEXT_SYSTEM_ID: AtomicU64 = AtomicU64::new(1);

/// One `(lambda_j, d_j)` block of the diagonal frequency matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyBlock<T> {
    pub lambda: T,
    pub dim: usize,
}

impl<T> FrequencyBlock<T> {
    pub fn new(lambda: T, dim: usize) -> Self {
        Self { lambda, dim }
    }
}

/// Phase-space point with the flat block layout of its system.
#[derive(Debug, Clone, PartialEq)]
pub struct State<T> {
    pub q: Vec<T>,
    pub p: Vec<T>,
}

impl<T: Scalar> State<T> {
    pub fn new(q: Vec<T>, p: Vec<T>) -> Result<Self> {
        if q.len() != p.len() {
            return Err(ErknError::Shape(format!(
                "q has length {} but p has length {}",
                q.len(),
                p.len()
            )));
        }
        Ok(Self { q, p })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            q: vec![T::zero(); dim],
            p: vec![T::zero(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(&self.p).all(|x| x.is_finite())
    }

    /// `|q| + |p|` in the Euclidean norm.
    pub fn norm(&self) -> T {
        norm2(&self.q).sqrt() + norm2(&self.p).sqrt()
    }
}

pub(crate) fn norm2<T: Scalar>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum()
}

/// Immutable description of an oscillatory Hamiltonian system.
///
/// The potential and gradient callables must be thread-safe for the system
/// to be shared across threads; the energy functionals are otherwise pure.
#[derive(Clone)]
pub struct OscillatorySystem<T> {
    id: u64,
    epsilon: T,
    blocks: Vec<FrequencyBlock<T>>,
    offsets: Vec<usize>,
    potential: PotentialFn<T>,
    gradient: GradientFn<T>,
}

impl<T: Scalar> fmt::Debug for OscillatorySystem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OscillatorySystem")
            .field("id", &self.id)
            .field("epsilon", &self.epsilon)
            .field("blocks", &self.blocks)
            .finish_non_exhaustive()
    }
}

impl<T: Scalar> OscillatorySystem<T> {
    pub fn new(
        epsilon: T,
        blocks: Vec<FrequencyBlock<T>>,
        potential: PotentialFn<T>,
        gradient: GradientFn<T>,
    ) -> Result<Self> {
        if !(epsilon > T::zero()) || !epsilon.is_finite() {
            return Err(ErknError::InvalidSystem(format!(
                "epsilon must be positive and finite, got {epsilon}"
            )));
        }
        validate_blocks(&blocks)?;
        let mut offsets = Vec::with_capacity(blocks.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for b in &blocks {
            acc += b.dim;
            offsets.push(acc);
        }
        Ok(Self {
            id: NEXT_SYSTEM_ID.fetch_add(1, Ordering::Relaxed),
            epsilon,
            blocks,
            offsets,
            potential,
            gradient,
        })
    }

    /// System with `U = 0`: uncoupled harmonic oscillators.
    pub fn free(epsilon: T, blocks: Vec<FrequencyBlock<T>>) -> Result<Self> {
        Self::new(
            epsilon,
            blocks,
            Arc::new(|_| T::zero()),
            Arc::new(|_, out: &mut [T]| out.iter_mut().for_each(|x| *x = T::zero())),
        )
    }

    /// Process-unique identity, used to key step coefficient caches.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn blocks(&self) -> &[FrequencyBlock<T>] {
        &self.blocks
    }

    /// Total dimension `D = sum d_j`.
    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    /// Number of oscillatory blocks `l` (excludes block 0).
    pub fn num_frequencies(&self) -> usize {
        self.blocks.len() - 1
    }

    /// `(lambda_1, ..., lambda_l)`.
    pub fn lambdas(&self) -> Vec<T> {
        self.blocks[1..].iter().map(|b| b.lambda).collect()
    }

    /// `omega_j = lambda_j / eps`.
    pub fn omega(&self, block: usize) -> T {
        self.blocks[block].lambda / self.epsilon
    }

    pub fn block_range(&self, block: usize) -> Range<usize> {
        self.offsets[block]..self.offsets[block + 1]
    }

    pub fn potential(&self, q: &[T]) -> T {
        (self.potential)(q)
    }

    /// Writes `grad U(q)` into `out`.
    pub fn gradient(&self, q: &[T], out: &mut [T]) {
        (self.gradient)(q, out)
    }

    /// Writes `g(q) = -grad U(q)` into `out`.
    pub fn force(&self, q: &[T], out: &mut [T]) {
        (self.gradient)(q, out);
        out.iter_mut().for_each(|x| *x = -*x);
    }

    pub fn check_state(&self, s: &State<T>) -> Result<()> {
        if s.q.len() != self.dim() || s.p.len() != self.dim() {
            return Err(ErknError::Shape(format!(
                "state has lengths ({}, {}) but system dimension is {}",
                s.q.len(),
                s.p.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    fn block_energy(&self, s: &State<T>, block: usize) -> T {
        let r = self.block_range(block);
        let w = self.omega(block);
        let half = T::lit(0.5);
        half * (norm2(&s.p[r.clone()]) + w * w * norm2(&s.q[r]))
    }

    /// `H(q, p)`.
    pub fn total_energy(&self, s: &State<T>) -> Result<T> {
        self.check_state(s)?;
        let harmonic: T = (0..self.blocks.len())
            .map(|j| self.block_energy(s, j))
            .sum();
        Ok(harmonic + self.potential(&s.q))
    }

    /// `1/2 |p_0|^2`, the kinetic energy of the slow block.
    pub fn slow_kinetic_energy(&self, s: &State<T>) -> Result<T> {
        self.check_state(s)?;
        Ok(self.block_energy(s, 0))
    }

    /// `I_j(q, p)` for `1 <= j <= l`.
    pub fn oscillatory_energy(&self, s: &State<T>, j: usize) -> Result<T> {
        if j == 0 || j > self.num_frequencies() {
            return Err(ErknError::Index(format!(
                "oscillatory block index {j} outside 1..={}",
                self.num_frequencies()
            )));
        }
        self.check_state(s)?;
        Ok(self.block_energy(s, j))
    }

    /// `I = sum_j I_j`.
    pub fn total_oscillatory_energy(&self, s: &State<T>) -> Result<T> {
        self.check_state(s)?;
        Ok((1..self.blocks.len())
            .map(|j| self.block_energy(s, j))
            .sum())
    }

    /// `I_mu = sum_j (mu_j / lambda_j) I_j`.
    pub fn weighted_oscillatory_energy(&self, s: &State<T>, mu: &[T]) -> Result<T> {
        self.weighted_energy_with(s, mu, |_| T::one())
    }

    /// `sum_j w_j (mu_j / lambda_j) I_j` for per-block extra weights `w_j`.
    pub(crate) fn weighted_energy_with(
        &self,
        s: &State<T>,
        mu: &[T],
        weight: impl Fn(usize) -> T,
    ) -> Result<T> {
        if mu.len() != self.num_frequencies() {
            return Err(ErknError::Shape(format!(
                "mu has length {} but the system has {} frequencies",
                mu.len(),
                self.num_frequencies()
            )));
        }
        self.check_state(s)?;
        Ok(mu
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                let j = i + 1;
                weight(j) * m / self.blocks[j].lambda * self.block_energy(s, j)
            })
            .sum())
    }

    /// Largest relative discrepancy between the supplied gradient and
    /// central differences of the potential at `q`.
    pub fn gradient_discrepancy(&self, q: &[T]) -> Result<T> {
        if q.len() != self.dim() {
            return Err(ErknError::Shape(format!(
                "q has length {} but system dimension is {}",
                q.len(),
                self.dim()
            )));
        }
        let mut grad = vec![T::zero(); q.len()];
        self.gradient(q, &mut grad);
        let scale = grad
            .iter()
            .fold(T::zero(), |m, g| m.max(g.abs()))
            .max(T::min_positive_value().sqrt());
        let mut x = q.to_vec();
        let mut worst = T::zero();
        for i in 0..q.len() {
            let step = T::epsilon().cbrt() * T::one().max(q[i].abs());
            x[i] = q[i] + step;
            let up = self.potential(&x);
            x[i] = q[i] - step;
            let down = self.potential(&x);
            x[i] = q[i];
            let fd = (up - down) / (step + step);
            worst = worst.max((fd - grad[i]).abs() / scale);
        }
        Ok(worst)
    }
}

fn validate_blocks<T: Scalar>(blocks: &[FrequencyBlock<T>]) -> Result<()> {
    let first = blocks.first().ok_or_else(|| {
        ErknError::InvalidSystem("at least the lambda_0 = 0 block is required".into())
    })?;
    if first.lambda != T::zero() {
        return Err(ErknError::InvalidSystem(format!(
            "first block must have lambda = 0, got {}",
            first.lambda
        )));
    }
    for (j, b) in blocks.iter().enumerate().skip(1) {
        if !b.lambda.is_finite() || b.lambda < T::one() {
            return Err(ErknError::InvalidSystem(format!(
                "block {j} has lambda = {}, expected lambda >= 1",
                b.lambda
            )));
        }
        if b.dim == 0 {
            return Err(ErknError::InvalidSystem(format!(
                "block {j} has dimension 0"
            )));
        }
        if blocks[1..j].iter().any(|o| o.lambda == b.lambda) {
            return Err(ErknError::InvalidSystem(format!(
                "lambda = {} appears more than once",
                b.lambda
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blocks(spec: &[(f64, usize)]) -> Vec<FrequencyBlock<f64>> {
        spec.iter()
            .map(|&(l, d)| FrequencyBlock::new(l, d))
            .collect()
    }

    fn quartic_system(eps: f64) -> OscillatorySystem<f64> {
        let w = [0.3, 1.0, -0.5, 2.0, 0.7];
        OscillatorySystem::new(
            eps,
            blocks(&[(0.0, 1), (1.0, 2), (2f64.sqrt(), 1), (2.0, 1)]),
            Arc::new(move |q: &[f64]| {
                let s: f64 = q.iter().zip(&w).map(|(a, b)| a * b).sum();
                s.powi(4) + 0.5 * q[0] * q[0]
            }),
            Arc::new(move |q: &[f64], out: &mut [f64]| {
                let s: f64 = q.iter().zip(&w).map(|(a, b)| a * b).sum();
                for (o, wi) in out.iter_mut().zip(&w) {
                    *o = 4.0 * s.powi(3) * wi;
                }
                out[0] += q[0];
            }),
        )
        .unwrap()
    }

    #[test]
    fn zero_state_has_zero_energy() {
        let sys = OscillatorySystem::free(0.1, blocks(&[(0.0, 1), (1.0, 1)])).unwrap();
        assert_eq!(sys.total_energy(&State::zeros(2)).unwrap(), 0.0);
    }

    #[test]
    fn slow_block_is_kinetic_only() {
        let sys = OscillatorySystem::free(0.1, blocks(&[(0.0, 1)])).unwrap();
        let s = State::new(vec![2.0], vec![3.0]).unwrap();
        assert_eq!(sys.total_energy(&s).unwrap(), 4.5);
    }

    #[test]
    fn unit_oscillator_energy() {
        let sys = OscillatorySystem::free(1.0, blocks(&[(0.0, 0), (1.0, 1)])).unwrap();
        let s = State::new(vec![1.0], vec![0.0]).unwrap();
        assert_eq!(sys.oscillatory_energy(&s, 1).unwrap(), 0.5);
        assert_eq!(sys.oscillatory_energy(&State::zeros(1), 1).unwrap(), 0.0);
    }

    #[test]
    fn invalid_blocks_rejected() {
        let bad = [
            vec![],
            blocks(&[(1.0, 1)]),
            blocks(&[(0.0, 1), (0.5, 1)]),
            blocks(&[(0.0, 1), (1.0, 1), (1.0, 2)]),
            blocks(&[(0.0, 1), (1.0, 0)]),
        ];
        for b in bad {
            assert!(matches!(
                OscillatorySystem::free(0.1, b),
                Err(ErknError::InvalidSystem(_))
            ));
        }
        assert!(OscillatorySystem::free(0.0, blocks(&[(0.0, 1)])).is_err());
    }

    #[test]
    fn index_and_shape_errors() {
        let sys = quartic_system(0.1);
        let s = State::zeros(5);
        assert!(matches!(
            sys.oscillatory_energy(&s, 0),
            Err(ErknError::Index(_))
        ));
        assert!(matches!(
            sys.oscillatory_energy(&s, 4),
            Err(ErknError::Index(_))
        ));
        assert!(matches!(
            sys.total_energy(&State::zeros(4)),
            Err(ErknError::Shape(_))
        ));
        assert!(matches!(
            sys.weighted_oscillatory_energy(&s, &[1.0, 2.0]),
            Err(ErknError::Shape(_))
        ));
        assert!(State::new(vec![1.0], vec![]).is_err());
    }

    #[test]
    fn weighted_energy_special_cases() {
        let sys = quartic_system(1.0 / 70.0);
        let s = State::new(
            vec![0.1, 0.2, -0.3, 0.05, 0.01],
            vec![0.5, -0.2, 0.3, 0.9, -0.4],
        )
        .unwrap();
        let i: Vec<f64> = (1..=3)
            .map(|j| sys.oscillatory_energy(&s, j).unwrap())
            .collect();
        let r2 = 2f64.sqrt();
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        let total = sys.weighted_oscillatory_energy(&s, &sys.lambdas()).unwrap();
        assert!(rel(total, sys.total_oscillatory_energy(&s).unwrap()) < 1e-14);
        let i13 = sys
            .weighted_oscillatory_energy(&s, &[1.0, 0.0, 2.0])
            .unwrap();
        assert!(rel(i13, i[0] + i[2]) < 1e-14);
        let i2 = sys
            .weighted_oscillatory_energy(&s, &[0.0, r2, 0.0])
            .unwrap();
        assert!(rel(i2, i[1]) < 1e-14);
    }

    #[test]
    fn supplied_gradient_matches_differences() {
        let sys = quartic_system(0.1);
        let q = [0.3, -0.2, 0.1, 0.4, -0.6];
        assert!(sys.gradient_discrepancy(&q).unwrap() < 1e-5);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn state() -> impl Strategy<Value = State<f64>> {
            (
                proptest::collection::vec(-1.0f64..1.0, 5),
                proptest::collection::vec(-1.0f64..1.0, 5),
            )
                .prop_map(|(q, p)| State::new(q, p).unwrap())
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(100))]

            #[test]
            fn energy_decomposition(s in state()) {
                let sys = quartic_system(1.0 / 70.0);
                let h = sys.total_energy(&s).unwrap();
                let parts = sys.slow_kinetic_energy(&s).unwrap()
                    + (1..=3).map(|j| sys.oscillatory_energy(&s, j).unwrap()).sum::<f64>()
                    + sys.potential(&s.q);
                prop_assert!((h - parts).abs() <= 1e-12 * h.abs().max(1e-300));
            }

            #[test]
            fn weighted_energy_is_linear(
                s in state(),
                mu in proptest::collection::vec(-2.0f64..2.0, 3),
                nu in proptest::collection::vec(-2.0f64..2.0, 3),
                a in -3.0f64..3.0,
                b in -3.0f64..3.0,
            ) {
                let sys = quartic_system(0.05);
                let comb: Vec<f64> = mu.iter().zip(&nu).map(|(m, n)| a * m + b * n).collect();
                let lhs = sys.weighted_oscillatory_energy(&s, &comb).unwrap();
                let rhs = a * sys.weighted_oscillatory_energy(&s, &mu).unwrap()
                    + b * sys.weighted_oscillatory_energy(&s, &nu).unwrap();
                let scale: f64 = (1..=3).map(|j| sys.oscillatory_energy(&s, j).unwrap()).sum::<f64>()
                    * 10.0;
                prop_assert!((lhs - rhs).abs() <= 1e-14 * scale.max(1e-300));
            }
        }
    }
}

//! Numerical structure checks on the step map and the sigma-modified energies.

use crate::error::{ErknError, Result};
use crate::integrator::conditions::sigma;
use crate::integrator::scheme::ErknScheme;
use crate::integrator::step::{step, StepWorkspace};
use crate::scalar::Scalar;
use crate::system::{OscillatorySystem, State};

/// Largest phase-space dimension `2D` accepted by [`jacobian_symplecticity`].
pub const MAX_JACOBIAN_DIM: usize = 20;

/// Modified energies `(H*, I*_mu)` with per-block weights `sigma(h omega_j)`:
///
/// ```text
/// H*    = H + sum_j (sigma_j - 1) I_j
/// I*_mu = sum_j sigma_j (mu_j / lambda_j) I_j
/// ```
pub fn modified_energies<T: Scalar>(
    scheme: &ErknScheme<T>,
    sys: &OscillatorySystem<T>,
    s: &State<T>,
    h: T,
    mu: &[T],
) -> Result<(T, T)> {
    let sigmas = block_sigmas(scheme, sys, h)?;
    let mut h_star = sys.total_energy(s)?;
    for (j, &sg) in sigmas.iter().enumerate().skip(1) {
        h_star = h_star + (sg - T::one()) * sys.oscillatory_energy(s, j)?;
    }
    let i_star = sys.weighted_energy_with(s, mu, |j| sigmas[j])?;
    Ok((h_star, i_star))
}

/// `sigma(h omega_j)` for every block (block 0 included, where it is 1).
pub fn block_sigmas<T: Scalar>(
    scheme: &ErknScheme<T>,
    sys: &OscillatorySystem<T>,
    h: T,
) -> Result<Vec<T>> {
    (0..sys.blocks().len())
        .map(|j| sigma(scheme, h * sys.omega(j)))
        .collect()
}

/// Steps forward with `h` and back with `-h`; returns the larger of the
/// relative deviations `|dq|_inf / |q|_inf` and `|dp|_inf / |p|_inf`.
///
/// Zero for a symmetric method up to rounding.
pub fn adjoint_roundtrip<T: Scalar>(
    scheme: &ErknScheme<T>,
    sys: &OscillatorySystem<T>,
    h: T,
    s: &State<T>,
) -> Result<T> {
    let mut ws = StepWorkspace::new();
    let forward = step(scheme, sys, h, s, &mut ws)?;
    let back = step(scheme, sys, -h, &forward, &mut ws)?;
    Ok(relative_dev(&back.q, &s.q).max(relative_dev(&back.p, &s.p)))
}

fn relative_dev<T: Scalar>(a: &[T], b: &[T]) -> T {
    let scale = b.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let diff = a
        .iter()
        .zip(b)
        .fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()));
    if scale > T::zero() {
        diff / scale
    } else {
        diff
    }
}

/// One-step Jacobian by central differences, as a dense `2D x 2D` matrix in
/// `(q, p)` ordering. Perturbations are `1e-6 * max(1, |x_i|)`.
pub fn step_jacobian<T: Scalar>(
    scheme: &ErknScheme<T>,
    sys: &OscillatorySystem<T>,
    h: T,
    s: &State<T>,
) -> Result<Vec<Vec<T>>> {
    sys.check_state(s)?;
    let d = sys.dim();
    let n = 2 * d;
    if n > MAX_JACOBIAN_DIM {
        return Err(ErknError::Resource(format!(
            "phase-space dimension {n} exceeds {MAX_JACOBIAN_DIM} for the finite-difference Jacobian"
        )));
    }
    let flat = |st: &State<T>| -> Vec<T> { st.q.iter().chain(&st.p).copied().collect() };
    let mut ws = StepWorkspace::new();
    let mut jac = vec![vec![T::zero(); n]; n];
    let mut x = s.clone();
    for col in 0..n {
        let (slot, orig) = if col < d {
            (&mut x.q[col], s.q[col])
        } else {
            (&mut x.p[col - d], s.p[col - d])
        };
        let delta = T::lit(1e-6) * T::one().max(orig.abs());
        *slot = orig + delta;
        let up = flat(&step(scheme, sys, h, &x, &mut ws)?);
        let slot = if col < d {
            &mut x.q[col]
        } else {
            &mut x.p[col - d]
        };
        *slot = orig - delta;
        let down = flat(&step(scheme, sys, h, &x, &mut ws)?);
        let slot = if col < d {
            &mut x.q[col]
        } else {
            &mut x.p[col - d]
        };
        *slot = orig;
        for row in 0..n {
            jac[row][col] = (up[row] - down[row]) / (delta + delta);
        }
    }
    Ok(jac)
}

/// `|J^T S J - S|_max` for the one-step Jacobian `J` and the canonical
/// structure matrix `S = [[0, I], [-I, 0]]`.
pub fn jacobian_symplecticity<T: Scalar>(
    scheme: &ErknScheme<T>,
    sys: &OscillatorySystem<T>,
    h: T,
    s: &State<T>,
) -> Result<T> {
    let jac = step_jacobian(scheme, sys, h, s)?;
    let n = jac.len();
    let d = n / 2;
    // (S J)[r][c] = J[r + d][c] for r < d, -J[r - d][c] otherwise
    let sj = |r: usize, c: usize| if r < d { jac[r + d][c] } else { -jac[r - d][c] };
    let mut worst = T::zero();
    for a in 0..n {
        for b in 0..n {
            let mut acc = T::zero();
            for r in 0..n {
                acc = acc + jac[r][a] * sj(r, b);
            }
            let target = if a < d && b == a + d {
                T::one()
            } else if a >= d && b + d == a {
                -T::one()
            } else {
                T::zero()
            };
            worst = worst.max((acc - target).abs());
        }
    }
    Ok(worst)
}

/// Assumption-style coefficient ratio `|b1(xi_j)| / |sinc(xi_j / 2)|` per
/// oscillatory block.
pub fn coefficient_bound_ratios<T: Scalar>(
    scheme: &ErknScheme<T>,
    sys: &OscillatorySystem<T>,
    h: T,
) -> Vec<T> {
    (1..sys.blocks().len())
        .map(|j| {
            let xi = h * sys.omega(j);
            scheme.b1(xi).abs() / crate::phi::sinc_unchecked(xi * T::lit(0.5)).abs()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::Builtin;
    use crate::system::FrequencyBlock;
    use std::sync::Arc;

    fn system() -> OscillatorySystem<f64> {
        let w = [0.001, 1.0, 1.0, 1.0];
        OscillatorySystem::new(
            0.1,
            vec![
                FrequencyBlock::new(0.0, 1),
                FrequencyBlock::new(1.0, 1),
                FrequencyBlock::new(2f64.sqrt(), 1),
                FrequencyBlock::new(2.0, 1),
            ],
            Arc::new(move |q: &[f64]| q.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>().powi(4)),
            Arc::new(move |q: &[f64], out: &mut [f64]| {
                let s: f64 = q.iter().zip(&w).map(|(a, b)| a * b).sum();
                for (o, wi) in out.iter_mut().zip(&w) {
                    *o = 4.0 * s.powi(3) * wi;
                }
            }),
        )
        .unwrap()
    }

    fn state() -> State<f64> {
        State::new(vec![0.7, 0.05, -0.03, 0.04], vec![-0.5, 0.6, 0.3, -0.8]).unwrap()
    }

    #[test]
    fn erkn3_modified_energies_equal_originals() {
        let sys = system();
        let s = state();
        let scheme = Builtin::Erkn3.scheme();
        let mu = [1.0, 0.0, 2.0];
        let (hs, is) = modified_energies(&scheme, &sys, &s, 0.05, &mu).unwrap();
        let h = sys.total_energy(&s).unwrap();
        let i = sys.weighted_oscillatory_energy(&s, &mu).unwrap();
        assert!((hs - h).abs() <= 1e-14 * h);
        assert!((is - i).abs() <= 1e-14 * i);
    }

    #[test]
    fn modified_energies_tend_to_originals() {
        let sys = system();
        let s = state();
        let h0 = sys.total_energy(&s).unwrap();
        for b in Builtin::ALL {
            let (hs, _) = modified_energies(&b.scheme(), &sys, &s, 1e-7, &[1.0, 0.0, 2.0]).unwrap();
            assert!((hs - h0).abs() < 1e-9 * h0, "{b}");
        }
    }

    #[test]
    fn erkn2_sigma_weights_blockwise() {
        // h = 0.01, omega = 70, lambda = (1, sqrt 2, 2): sigma_j = sec^2(xi_j / 2)
        let sys = OscillatorySystem::free(
            1.0 / 70.0,
            vec![
                FrequencyBlock::new(0.0, 1),
                FrequencyBlock::new(1.0, 2),
                FrequencyBlock::new(2f64.sqrt(), 1),
                FrequencyBlock::new(2.0, 1),
            ],
        )
        .unwrap();
        let sg = block_sigmas(&Builtin::Erkn2.scheme(), &sys, 0.01).unwrap();
        let expected = [0.35, 0.35 * 2f64.sqrt(), 0.7].map(|x: f64| 1.0 / x.cos().powi(2));
        for (a, b) in sg[1..].iter().zip(expected) {
            assert!((a - b).abs() < 1e-13 * b);
        }
        assert_eq!(sg[0], 1.0);

        let s = State::new(
            vec![0.1, 0.02, -0.01, 0.03, 0.01],
            vec![0.2, 0.5, -0.4, 0.3, 0.9],
        )
        .unwrap();
        let mu = [1.0, 0.0, 2.0];
        let (hs, is) = modified_energies(&Builtin::Erkn2.scheme(), &sys, &s, 0.01, &mu).unwrap();
        let ij: Vec<f64> = (1..=3)
            .map(|j| sys.oscillatory_energy(&s, j).unwrap())
            .collect();
        let h = sys.total_energy(&s).unwrap();
        let hs_ref = h + (0..3).map(|j| (expected[j] - 1.0) * ij[j]).sum::<f64>();
        let is_ref = expected[0] * ij[0] + expected[2] * ij[2];
        assert!((hs - hs_ref).abs() < 1e-12 * hs_ref);
        assert!((is - is_ref).abs() < 1e-12 * is_ref);
    }

    #[test]
    fn roundtrip_identifies_symmetry() {
        let sys = system();
        let s = state();
        for b in Builtin::ALL {
            let dev = adjoint_roundtrip(&b.scheme(), &sys, 0.05, &s).unwrap();
            if b.expected_structure().0 {
                assert!(dev <= 1e-10, "{b}: {dev:e}");
            } else {
                assert!(dev > 1e-7, "{b}: {dev:e}");
            }
        }
    }

    #[test]
    fn free_roundtrip_is_identity() {
        let sys = OscillatorySystem::free(
            0.1,
            vec![FrequencyBlock::new(0.0, 1), FrequencyBlock::new(1.0, 2)],
        )
        .unwrap();
        let s = State::new(vec![0.1, 0.2, -0.3], vec![1.0, 0.5, 0.25]).unwrap();
        for b in Builtin::ALL {
            assert!(adjoint_roundtrip(&b.scheme(), &sys, 0.07, &s).unwrap() <= 1e-13);
        }
    }

    #[test]
    fn free_jacobian_is_symplectic() {
        let sys = OscillatorySystem::free(
            0.1,
            vec![
                FrequencyBlock::new(0.0, 1),
                FrequencyBlock::new(1.0, 1),
                FrequencyBlock::new(2.0, 1),
            ],
        )
        .unwrap();
        let s = State::new(vec![0.1, 0.2, -0.3], vec![1.0, 0.5, 0.25]).unwrap();
        for b in Builtin::ALL {
            let r = jacobian_symplecticity(&b.scheme(), &sys, 0.07, &s).unwrap();
            assert!(r <= 1e-9, "{b}: {r:e}");
        }
    }

    #[test]
    fn jacobian_dimension_guard() {
        let sys = OscillatorySystem::free(0.1, vec![FrequencyBlock::new(0.0, 11)]).unwrap();
        let err = jacobian_symplecticity(&Builtin::Erkn3.scheme(), &sys, 0.1, &State::zeros(11));
        assert!(matches!(err, Err(ErknError::Resource(_))));
    }

    #[test]
    fn coefficient_ratio_for_erkn3() {
        // |cos(xi/2)| / |sinc(xi/2)| = (xi/2) / |tan(xi/2)|
        let sys = system();
        let r = coefficient_bound_ratios(&Builtin::Erkn3.scheme(), &sys, 0.05);
        for (j, v) in r.iter().enumerate() {
            let half = 0.05 * sys.omega(j + 1) / 2.0;
            assert!((v - half / half.tan()).abs() < 1e-14);
        }
    }
}

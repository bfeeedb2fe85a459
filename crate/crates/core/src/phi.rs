//! Scalar evaluation of the entire functions
//!
//! ```text
//! phi_j(V) = sum_k (-1)^k V^k / (2k + j)!
//! ```
//!
//! at `V = xi^2`. Because the frequency matrix is diagonal, every matrix
//! function in the integrator reduces to one of these scalars per frequency
//! block, so only scalar arguments are supported.
//!
//! Small arguments use a truncated Taylor series; larger arguments use
//! closed forms that avoid subtractive cancellation:
//!
//! | j | closed form                      |
//! |---|----------------------------------|
//! | 0 | `cos xi`                         |
//! | 1 | `sin xi / xi`                    |
//! | 2 | `(1 - cos xi)/xi^2 = sinc(xi/2)^2 / 2` |
//! | 3 | `(xi - sin xi)/xi^3`             |

use crate::error::{ErknError, Result};
use crate::scalar::Scalar;

/// Highest supported order.
pub const MAX_ORDER: usize = 3;

/// Below this `|xi|`, phi_0..phi_2 and sinc use the 4-term series.
pub const SERIES_SWITCH: f64 = 1e-2;

/// Switch point for phi_3, whose closed form cancels badly up to `|xi| ~ 1`.
pub const SERIES_SWITCH_PHI3: f64 = 2.0;

const SERIES_TERMS: usize = 4;
const SERIES_TERMS_PHI3: usize = 14;

/// Switch threshold used for order `j`.
pub fn switch_threshold(j: usize) -> f64 {
    if j == 3 {
        SERIES_SWITCH_PHI3
    } else {
        SERIES_SWITCH
    }
}

/// `phi_j(xi^2)` for `j` in `0..=3`.
pub fn phi<T: Scalar>(j: usize, xi: T) -> Result<T> {
    if j > MAX_ORDER {
        return Err(ErknError::UnsupportedOrder(j));
    }
    check_finite(xi)?;
    Ok(phi_unchecked(j, xi))
}

/// `sin(x)/x`, with `sinc(0) = 1`.
pub fn sinc<T: Scalar>(x: T) -> Result<T> {
    check_finite(x)?;
    Ok(sinc_unchecked(x))
}

fn check_finite<T: Scalar>(x: T) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(ErknError::Domain(format!("non-finite argument {x}")))
    }
}

/// Unchecked variant for hot paths; `j` must be in `0..=3`.
#[inline]
pub(crate) fn phi_unchecked<T: Scalar>(j: usize, xi: T) -> T {
    let x = xi.abs();
    match j {
        0 => {
            if x < T::lit(SERIES_SWITCH) {
                series(0, x, SERIES_TERMS)
            } else {
                x.cos()
            }
        }
        1 => sinc_unchecked(x),
        2 => {
            if x < T::lit(SERIES_SWITCH) {
                series(2, x, SERIES_TERMS)
            } else {
                let half = x * T::lit(0.5);
                let s = half.sin() / half;
                T::lit(0.5) * s * s
            }
        }
        3 => {
            if x < T::lit(SERIES_SWITCH_PHI3) {
                series(3, x, SERIES_TERMS_PHI3)
            } else {
                (x - x.sin()) / (x * x * x)
            }
        }
        _ => unreachable!("phi order checked by caller"),
    }
}

#[inline]
pub(crate) fn sinc_unchecked<T: Scalar>(x: T) -> T {
    let x = x.abs();
    if x < T::lit(SERIES_SWITCH) {
        series(1, x, SERIES_TERMS)
    } else {
        x.sin() / x
    }
}

/// Horner evaluation of the first `terms` terms of the phi_j series in `V = xi^2`.
fn series<T: Scalar>(j: usize, xi: T, terms: usize) -> T {
    let v = xi * xi;
    // coefficient of V^k is (-1)^k / (2k + j)!, built from the top term down
    let mut coeffs = [0.0f64; SERIES_TERMS_PHI3];
    let mut fact = (1..=j).fold(1.0f64, |acc, i| acc * i as f64);
    for (k, c) in coeffs.iter_mut().take(terms).enumerate() {
        if k > 0 {
            let n = (2 * k + j) as f64;
            fact *= (n - 1.0) * n;
        }
        *c = if k % 2 == 0 { 1.0 / fact } else { -1.0 / fact };
    }
    coeffs[..terms]
        .iter()
        .rev()
        .fold(T::zero(), |acc, &c| acc * v + T::lit(c))
}

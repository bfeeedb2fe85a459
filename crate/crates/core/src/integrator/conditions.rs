//! Algebraic checks of the coefficient functions: second order,
//! symmetry, symplecticity, and the energy condition `sigma == 1`.

use std::fmt;

use crate::error::{ErknError, Result};
use crate::integrator::scheme::ErknScheme;
use crate::phi::{phi_unchecked, sinc_unchecked};
use crate::scalar::Scalar;

/// Sample points for identity checks: uniform on `[GRID_START, GRID_END]`.
pub const GRID_POINTS: usize = 200;
pub const GRID_START: f64 = 1e-3;
pub const GRID_END: f64 = 3.0;

/// Order-2 limits are sampled at `xi = 10^-1 .. 10^-4`.
pub const ORDER_SAMPLES: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

/// `|b1|` or `|bbar1|` below this makes `sigma` singular.
pub const SINGULARITY_THRESHOLD: f64 = 1e-8;

/// Outcome of one condition check.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport<T> {
    pub name: String,
    pub max_residual: T,
    pub tolerance: T,
    pub grid: String,
    pub passed: bool,
}

impl<T: Scalar> fmt::Display for ConditionReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<12} {:<4} max_residual={:e} tol={:e} grid={}",
            self.name,
            if self.passed { "pass" } else { "fail" },
            self.max_residual,
            self.tolerance,
            self.grid
        )
    }
}

/// Tolerance for identity residuals: `1e-12`, widened for low-precision scalars.
pub fn identity_tolerance<T: Scalar>() -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(100.0))
}

pub fn xi_grid<T: Scalar>() -> Vec<T> {
    let (a, b) = (T::lit(GRID_START), T::lit(GRID_END));
    let n = T::from_count(GRID_POINTS - 1);
    (0..GRID_POINTS)
        .map(|i| a + (b - a) * T::from_count(i) / n)
        .collect()
}

fn grid_label() -> String {
    format!("{GRID_POINTS} uniform points in [{GRID_START}, {GRID_END}]")
}

fn max_over<T: Scalar>(grid: &[T], f: impl Fn(T) -> T) -> T {
    grid.iter().fold(T::zero(), |m, &x| {
        let r = f(x);
        if r.is_nan() {
            T::infinity()
        } else {
            m.max(r)
        }
    })
}

/// Second-order conditions as small-`xi` limits:
///
/// ```text
/// (b1 - phi1) / xi^2,  (c1 b1 - phi2) / xi,  (bbar1 - phi2) / xi
/// ```
///
/// must stay bounded. Each ratio is sampled at [`ORDER_SAMPLES`]; a ratio
/// passes when no decade grows it by more than a factor of two (a diverging
/// `1/xi` ratio grows tenfold per decade). The reported residual is the
/// largest ratio at the smallest sample.
pub fn check_order2<T: Scalar>(scheme: &ErknScheme<T>) -> ConditionReport<T> {
    let c1 = scheme.c1();
    let ratios: [Box<dyn Fn(T) -> T + '_>; 3] = [
        Box::new(|x: T| (scheme.b1(x) - sinc_unchecked(x)) / (x * x)),
        Box::new(move |x: T| (c1 * scheme.b1(x) - phi_unchecked(2, x)) / x),
        Box::new(|x: T| (scheme.bbar1(x) - phi_unchecked(2, x)) / x),
    ];
    let floor = T::lit(1e-8);
    let mut passed = true;
    let mut worst = T::zero();
    for ratio in &ratios {
        let seq: Vec<T> = ORDER_SAMPLES
            .iter()
            .map(|&x| ratio(T::lit(x)).abs())
            .collect();
        let stable = seq.iter().all(|r| r.is_finite())
            && seq.windows(2).all(|w| w[1] <= T::lit(2.0) * w[0] + floor);
        passed &= stable;
        worst = worst.max(*seq.last().expect("non-empty samples"));
    }
    ConditionReport {
        name: "order2".into(),
        max_residual: worst,
        tolerance: T::lit(2.0),
        grid: format!("xi in {ORDER_SAMPLES:?}"),
        passed,
    }
}

/// Residual of the symmetry identities
///
/// ```text
/// bbar1 = phi1 b1 - phi0 bbar1
/// phi0(c1^2 V) bbar1 = c1 phi1(c1^2 V) b1
/// ```
///
/// on the grid. Passing also requires `c1 = 1/2`.
pub fn check_symmetry<T: Scalar>(scheme: &ErknScheme<T>) -> ConditionReport<T> {
    let c1 = scheme.c1();
    let residual = max_over(&xi_grid(), |x| {
        let (b, bb) = (scheme.b1(x), scheme.bbar1(x));
        let first = bb - (sinc_unchecked(x) * b - phi_unchecked(0, x) * bb);
        let second = phi_unchecked(0, c1 * x) * bb - c1 * sinc_unchecked(c1 * x) * b;
        first.abs().max(second.abs())
    });
    let tolerance = identity_tolerance();
    let half = c1 == T::lit(0.5);
    ConditionReport {
        name: "symmetric".into(),
        max_residual: residual,
        tolerance,
        grid: format!("{}; c1 = 1/2: {half}", grid_label()),
        passed: half && residual <= tolerance,
    }
}

/// Residual of the symplecticity identities with `d1 = b1(0)`:
///
/// ```text
/// phi0 b1 + V phi1 bbar1 = d1 phi0(c1^2 V)
/// phi1 b1 - phi0 bbar1   = c1 d1 phi1(c1^2 V)
/// ```
pub fn check_symplecticity<T: Scalar>(scheme: &ErknScheme<T>) -> ConditionReport<T> {
    let c1 = scheme.c1();
    let d1 = scheme.b1(T::zero());
    let residual = max_over(&xi_grid(), |x| {
        let (b, bb) = (scheme.b1(x), scheme.bbar1(x));
        let (c, s) = (phi_unchecked(0, x), sinc_unchecked(x));
        let first = c * b + x * x * s * bb - d1 * phi_unchecked(0, c1 * x);
        let second = s * b - c * bb - c1 * d1 * sinc_unchecked(c1 * x);
        first.abs().max(second.abs())
    });
    let tolerance = identity_tolerance();
    ConditionReport {
        name: "symplectic".into(),
        max_residual: residual,
        tolerance,
        grid: format!("{}; d1 = {d1}", grid_label()),
        passed: residual <= tolerance,
    }
}

/// Modified-energy weight
///
/// ```text
/// sigma(xi) = sinc(xi) cos(xi/2) / (2 bbar1(xi))
///           + xi^2 sinc(xi) sinc(xi/2) / (4 b1(xi))
/// ```
///
/// evaluated from the two-term definition. For the symmetric built-in
/// schemes this equals `cos(xi/2) / b1(xi)`.
pub fn sigma<T: Scalar>(scheme: &ErknScheme<T>, xi: T) -> Result<T> {
    let (b, bb) = (scheme.b1(xi), scheme.bbar1(xi));
    let threshold = T::lit(SINGULARITY_THRESHOLD);
    for (value, coefficient) in [(b, "b1"), (bb, "bbar1")] {
        if !(value.abs() >= threshold) {
            return Err(ErknError::Singularity {
                xi: xi.to_f64().unwrap_or(f64::NAN),
                coefficient,
                threshold: SINGULARITY_THRESHOLD,
            });
        }
    }
    let half = T::lit(0.5);
    let s = sinc_unchecked(xi);
    let two = T::lit(2.0);
    Ok(s * phi_unchecked(0, half * xi) / (two * bb)
        + xi * xi * s * (half * sinc_unchecked(half * xi)) / (two * b))
}

/// `max |sigma(xi) - 1|` on the grid; the energy condition holds when
/// `sigma` is identically one.
pub fn check_newcond<T: Scalar>(scheme: &ErknScheme<T>) -> ConditionReport<T> {
    let residual = max_over(&xi_grid(), |x| match sigma(scheme, x) {
        Ok(s) => (s - T::one()).abs(),
        Err(_) => T::infinity(),
    });
    let tolerance = identity_tolerance();
    ConditionReport {
        name: "newcond".into(),
        max_residual: residual,
        tolerance,
        grid: grid_label(),
        passed: residual <= tolerance,
    }
}

/// Largest `|sigma(xi) - cos(xi/2)/b1(xi)|` on the grid.
pub fn sigma_closed_form_discrepancy<T: Scalar>(scheme: &ErknScheme<T>) -> Result<T> {
    let mut worst = T::zero();
    for x in xi_grid::<T>() {
        let closed = phi_unchecked(0, x * T::lit(0.5)) / scheme.b1(x);
        worst = worst.max((sigma(scheme, x)? - closed).abs());
    }
    Ok(worst)
}

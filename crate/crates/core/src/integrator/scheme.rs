use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{ErknError, Result};
use crate::phi::{phi_unchecked, sinc_unchecked};
use crate::scalar::Scalar;

/// Scalar coefficient `xi -> b(xi)`, applied per frequency block.
pub type CoefficientFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

static NEXT_SCHEME_ID: AtomicU64 = AtomicU64::new(1);

/// A one-stage explicit ERKN method `(c1, b1, bbar1)`.
///
/// `b1` and `bbar1` are functions of `xi = h * omega_j`; they are expected to
/// be even and bounded.
#[derive(Clone)]
pub struct ErknScheme<T> {
    id: u64,
    name: String,
    c1: T,
    b1: CoefficientFn<T>,
    bbar1: CoefficientFn<T>,
}

impl<T: Scalar> fmt::Debug for ErknScheme<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ErknScheme")
            .field("name", &self.name)
            .field("c1", &self.c1)
            .finish_non_exhaustive()
    }
}

impl<T: Scalar> ErknScheme<T> {
    pub fn new(
        name: impl Into<String>,
        c1: T,
        b1: impl Fn(T) -> T + Send + Sync + 'static,
        bbar1: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(c1 >= T::zero() && c1 <= T::one()) {
            return Err(ErknError::InvalidArgument(format!(
                "c1 = {c1} outside [0, 1]"
            )));
        }
        Ok(Self {
            id: NEXT_SCHEME_ID.fetch_add(1, Ordering::Relaxed),
            name: name.into(),
            c1,
            b1: Arc::new(b1),
            bbar1: Arc::new(bbar1),
        })
    }

    /// Looks up one of the built-in schemes by name (`ERKN1`..`ERKN4`).
    pub fn builtin(name: &str) -> Result<Self> {
        Ok(name.parse::<Builtin>()?.scheme())
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn c1(&self) -> T {
        self.c1
    }

    #[inline]
    pub fn b1(&self, xi: T) -> T {
        (self.b1)(xi)
    }

    #[inline]
    pub fn bbar1(&self, xi: T) -> T {
        (self.bbar1)(xi)
    }
}

/// The four schemes with `c1 = 1/2`.
///
/// | scheme | bbar1                          | b1                       | symmetric | symplectic |
/// |--------|--------------------------------|--------------------------|-----------|------------|
/// | ERKN1  | phi2(V)                        | phi0(V/4)                | no        | no         |
/// | ERKN2  | phi0(V/4) phi1(V) / 2          | phi0(V/4)^3              | yes       | no         |
/// | ERKN3  | phi1(V/4) / 2                  | phi0(V/4)                | yes       | yes        |
/// | ERKN4  | phi1(V) phi1(V/4) / 2          | phi1(V) phi0(V/4)        | yes       | no         |
///
/// `phi_j(V/4)` is `phi_j` at the half argument `xi/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Erkn1,
    Erkn2,
    Erkn3,
    Erkn4,
}

impl Builtin {
    pub const ALL: [Builtin; 4] = [
        Builtin::Erkn1,
        Builtin::Erkn2,
        Builtin::Erkn3,
        Builtin::Erkn4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Erkn1 => "ERKN1",
            Builtin::Erkn2 => "ERKN2",
            Builtin::Erkn3 => "ERKN3",
            Builtin::Erkn4 => "ERKN4",
        }
    }

    /// Expected `(symmetric, symplectic)` classification.
    pub fn expected_structure(self) -> (bool, bool) {
        match self {
            Builtin::Erkn1 => (false, false),
            Builtin::Erkn2 => (true, false),
            Builtin::Erkn3 => (true, true),
            Builtin::Erkn4 => (true, false),
        }
    }

    /// Whether `sigma == 1` identically.
    pub fn expected_energy_condition(self) -> bool {
        matches!(self, Builtin::Erkn3)
    }

    pub fn scheme<T: Scalar>(self) -> ErknScheme<T> {
        let half = T::lit(0.5);
        let c0 = |x: T| phi_unchecked(0, x * T::lit(0.5));
        let s0 = |x: T| sinc_unchecked(x * T::lit(0.5));
        let built = match self {
            Builtin::Erkn1 => ErknScheme::new(self.name(), half, c0, |x| phi_unchecked(2, x)),
            Builtin::Erkn2 => ErknScheme::new(
                self.name(),
                half,
                move |x| {
                    let c = c0(x);
                    c * c * c
                },
                move |x| T::lit(0.5) * c0(x) * sinc_unchecked(x),
            ),
            Builtin::Erkn3 => ErknScheme::new(self.name(), half, c0, move |x| T::lit(0.5) * s0(x)),
            Builtin::Erkn4 => ErknScheme::new(
                self.name(),
                half,
                move |x| sinc_unchecked(x) * c0(x),
                move |x| T::lit(0.5) * sinc_unchecked(x) * s0(x),
            ),
        };
        built.expect("built-in c1 lies in [0, 1]")
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = ErknError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "ERKN1" => Ok(Builtin::Erkn1),
            "ERKN2" => Ok(Builtin::Erkn2),
            "ERKN3" => Ok(Builtin::Erkn3),
            "ERKN4" => Ok(Builtin::Erkn4),
            _ => Err(ErknError::UnknownScheme(s.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn erkn3_limits() {
        let s = ErknScheme::<f64>::builtin("ERKN3").unwrap();
        assert_eq!(s.bbar1(0.0), 0.5);
        assert_eq!(s.b1(0.0), 1.0);
        assert!(s.b1(PI).abs() < 1e-16);
    }

    #[test]
    fn erkn2_at_one() {
        let s = ErknScheme::<f64>::builtin("erkn2").unwrap();
        // cos(0.5) sin(1) / 2, 40-digit reference
        let expected = 0.369_230_131_302_064_357_803_752_826_589_264_7;
        assert!((s.bbar1(1.0) - expected).abs() < 2e-16);
    }

    #[test]
    fn all_builtins_consistent_at_zero() {
        for b in Builtin::ALL {
            let s: ErknScheme<f64> = b.scheme();
            assert_eq!(s.c1(), 0.5);
            assert_eq!(s.b1(0.0), 1.0, "{b}");
            assert_eq!(s.bbar1(0.0), 0.5, "{b}");
            for &x in &[0.3, 1.1, 2.9, 7.0] {
                assert_eq!(s.b1(x), s.b1(-x));
                assert_eq!(s.bbar1(x), s.bbar1(-x));
                assert!(s.b1(x).abs() <= 1.0 && s.bbar1(x).abs() <= 1.0);
            }
        }
    }

    #[test]
    fn unknown_name() {
        assert_eq!(
            ErknScheme::<f64>::builtin("ERKN5").unwrap_err(),
            ErknError::UnknownScheme("ERKN5".into())
        );
    }

    #[test]
    fn c1_range_enforced() {
        assert!(ErknScheme::new("bad", 1.5f64, |_| 1.0, |_| 0.5).is_err());
        assert!(ErknScheme::new("ok", 0.0f64, |_| 1.0, |_| 0.5).is_ok());
    }
}

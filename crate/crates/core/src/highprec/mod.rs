//! Arbitrary-precision scalars and the special functions the kernels need.
//!
//! Every computation is parameterized by an explicit [`PrecisionContext`];
//! nothing in this module reads global state, so results are reproducible
//! bit for bit and safe to compute from any thread.

mod quadrature;
mod special;

pub use quadrature::{gauss_legendre, GaussRule};
pub use special::{
    arcoth, bessel_half_integer, bessel_i_series, bessel_k_quarter, erf, erfc_continued_fraction,
};

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Assign, Float};
use thiserror::Error;

/// Arbitrary-precision real number. All scalars are MPFR floats rounded to
/// nearest at the precision of the context that produced them.
pub type Scalar = Float;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HighPrecError {
    #[error("precision of {digits} digits is below the minimum of {min}")]
    PrecisionTooLow { digits: u32, min: u32 },
    #[error("{function}: argument {value} lies in the forbidden band |x| <= 1")]
    ForbiddenBand { function: &'static str, value: String },
    #[error("{function}: argument {value} outside the domain ({requirement})")]
    Domain {
        function: &'static str,
        value: String,
        requirement: &'static str,
    },
    #[error("cannot parse {input:?} as a number")]
    Parse { input: String },
}

/// Decimal working precision, plus guard digits carried by every scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrecisionContext {
    digits: u32,
    guard_digits: u32,
}

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Bits needed to carry `digits` decimal digits.
pub fn digits_to_bits(digits: u32) -> u32 {
    (f64::from(digits) * LOG2_10).ceil() as u32 + 2
}

impl PrecisionContext {
    pub const MIN_DIGITS: u32 = 30;
    pub const DEFAULT_GUARD_DIGITS: u32 = 10;

    pub fn new(digits: u32) -> Result<Self, HighPrecError> {
        Self::with_guard_digits(digits, Self::DEFAULT_GUARD_DIGITS)
    }

    pub fn with_guard_digits(digits: u32, guard_digits: u32) -> Result<Self, HighPrecError> {
        if digits < Self::MIN_DIGITS {
            return Err(HighPrecError::PrecisionTooLow {
                digits,
                min: Self::MIN_DIGITS,
            });
        }
        Ok(Self {
            digits,
            guard_digits,
        })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn guard_digits(&self) -> u32 {
        self.guard_digits
    }

    /// Binary precision of scalars produced under this context.
    pub fn bits(&self) -> u32 {
        digits_to_bits(self.digits + self.guard_digits)
    }

    /// Same nominal digits with `extra` additional guard digits. Used by
    /// evaluations whose intermediate terms cancel.
    pub fn with_extra_guard(&self, extra: u32) -> Self {
        Self {
            digits: self.digits,
            guard_digits: self.guard_digits + extra,
        }
    }

    /// A context carrying `factor` times the digits (used for reference
    /// evaluations that must out-resolve the working precision).
    pub fn scaled(&self, factor: u32) -> Self {
        Self {
            digits: self.digits * factor,
            guard_digits: self.guard_digits,
        }
    }

    pub fn scalar<T>(&self, value: T) -> Scalar
    where
        Float: Assign<T>,
    {
        Float::with_val(self.bits(), value)
    }

    /// Re-rounds `x` to this context's precision.
    pub fn round(&self, x: &Scalar) -> Scalar {
        Float::with_val(self.bits(), x)
    }

    /// Parses a decimal literal or an exact ratio `p/q`.
    pub fn parse(&self, input: &str) -> Result<Scalar, HighPrecError> {
        let err = || HighPrecError::Parse {
            input: input.to_string(),
        };
        let text = input.trim();
        if let Some((num, den)) = text.split_once('/') {
            let num = Float::parse(num.trim()).map_err(|_| err())?;
            let den = Float::parse(den.trim()).map_err(|_| err())?;
            let den = Float::with_val(self.bits(), den);
            if den.is_zero() {
                return Err(err());
            }
            Ok(Float::with_val(self.bits(), num) / den)
        } else {
            let value = Float::parse(text).map_err(|_| err())?;
            Ok(Float::with_val(self.bits(), value))
        }
    }

    pub fn zero(&self) -> Scalar {
        Float::new(self.bits())
    }

    pub fn one(&self) -> Scalar {
        self.scalar(1)
    }

    pub fn pi(&self) -> Scalar {
        self.scalar(Constant::Pi)
    }

    /// Γ(1/4), taken from MPFR's gamma.
    pub fn gamma_quarter(&self) -> Scalar {
        self.scalar(0.25).gamma()
    }

    /// `10^exponent` at context precision.
    pub fn pow10(&self, exponent: i32) -> Scalar {
        self.scalar(10).pow(exponent)
    }

    /// `10^(offset - digits)`: the "agrees to within" scale used by
    /// residual bounds throughout the crate.
    pub fn tolerance(&self, offset: i32) -> Scalar {
        self.pow10(offset - self.digits as i32)
    }
}

/// Number of leading decimal digits on which `a` and `b` agree, measured
/// relative to `max(|b|, floor)`. Returns `u32::MAX` for exact agreement.
pub fn agreeing_digits(a: &Scalar, b: &Scalar, floor: f64) -> u32 {
    let prec = a.prec().max(b.prec());
    let diff = Float::with_val(prec, a - b).abs();
    if diff.is_zero() {
        return u32::MAX;
    }
    let scale = Float::with_val(prec, b.abs_ref()).max(&Float::with_val(prec, floor));
    let rel = diff / scale;
    let log = -rel.log10().to_f64();
    if log <= 0.0 {
        0
    } else {
        log.floor() as u32
    }
}

/// Formats `x` with `significant` significant decimal digits in scientific
/// notation; stable across platforms.
pub fn format_sig(x: &Scalar, significant: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let s = x.to_string_radix(10, Some(significant));
    // MPFR renders the exponent as "e-5"; keep it but drop a trailing "e0".
    s.strip_suffix("e0").map(str::to_string).unwrap_or(s)
}

/// Exact decimal rendering that parses back to the same binary value.
pub fn format_exact(x: &Scalar) -> String {
    x.to_string_radix(10, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_low_precision() {
        assert!(matches!(
            PrecisionContext::new(20),
            Err(HighPrecError::PrecisionTooLow { .. })
        ));
        assert!(PrecisionContext::new(30).is_ok());
    }

    #[test]
    fn bits_cover_digits() {
        let ctx = PrecisionContext::new(100).unwrap();
        assert!(ctx.bits() as f64 >= 110.0 * LOG2_10);
    }

    #[test]
    fn parse_ratio_and_decimal() {
        let ctx = PrecisionContext::new(50).unwrap();
        let a = ctx.parse("6/32").unwrap();
        let b = ctx.parse("0.1875").unwrap();
        assert_eq!(a, b);
        assert!(ctx.parse("abc").is_err());
        assert!(ctx.parse("1/0").is_err());
    }

    #[test]
    fn exact_format_round_trips() {
        let ctx = PrecisionContext::new(80).unwrap();
        let x = ctx.pi() / ctx.scalar(7);
        let back = ctx.parse(&format_exact(&x)).unwrap();
        assert_eq!(x, back);
    }

    #[test]
    fn agreeing_digits_counts() {
        let ctx = PrecisionContext::new(50).unwrap();
        let a = ctx.scalar(1);
        let b = ctx.one() + ctx.pow10(-20);
        let d = agreeing_digits(&a, &b, 0.0);
        assert!((19..=20).contains(&d), "{d}");
    }
}

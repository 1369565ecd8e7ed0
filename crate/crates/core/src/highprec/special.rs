use rug::float::Constant;
use rug::ops::Pow;
use rug::{Assign, Float};

use super::{HighPrecError, PrecisionContext, Scalar};

fn domain(function: &'static str, value: &Scalar, requirement: &'static str) -> HighPrecError {
    HighPrecError::Domain {
        function,
        value: value.to_string_radix(10, Some(20)),
        requirement,
    }
}

/// Inverse hyperbolic cotangent, `½·ln((x+1)/(x−1))`.
///
/// Fails for `|x| <= 1`; in the modular pipeline that means an eigenvalue of
/// the operator B fell into the band excluded by theory, which happens when
/// the working precision is too low to resolve its distance from ±1.
pub fn arcoth(ctx: &PrecisionContext, x: &Scalar) -> Result<Scalar, HighPrecError> {
    if x.is_nan() || Float::with_val(x.prec(), x.abs_ref()) <= 1 {
        return Err(HighPrecError::ForbiddenBand {
            function: "arcoth",
            value: x.to_string_radix(10, Some(30)),
        });
    }
    let bits = ctx.bits().max(x.prec());
    let num = Float::with_val(bits, x + 1u32);
    let den = Float::with_val(bits, x - 1u32);
    let ratio = num / den;
    let half_log = ratio.ln() / 2u32;
    Ok(ctx.round(&half_log))
}

/// Ascending series `I_ν(z) = (z/2)^ν Σ_k (z²/4)^k / (k! Γ(k+ν+1))`,
/// evaluated at `bits` of precision. `gamma_nu_plus_one` must hold Γ(ν+1).
///
/// All terms are positive, so the sum itself carries no cancellation; the
/// only cost for large `z` is the number of terms.
pub fn bessel_i_series(bits: u32, nu: &Scalar, gamma_nu_plus_one: &Scalar, z: &Scalar) -> Scalar {
    let half_z = Float::with_val(bits, z / 2u32);
    let q = Float::with_val(bits, half_z.square_ref());
    let peak = q.to_f64().sqrt();
    let mut term = Float::with_val(bits, gamma_nu_plus_one.recip_ref());
    let mut sum = term.clone();
    let mut denom = Float::new(bits);
    let mut k: u32 = 0;
    loop {
        k += 1;
        // term_k = term_{k-1} * q / (k (k + ν))
        denom.assign(nu + k);
        denom *= k;
        term *= &q;
        term /= &denom;
        sum += &term;
        if f64::from(k) > peak {
            let mut ratio = Float::with_val(bits, &term / &sum);
            ratio.abs_mut();
            if ratio.get_exp().map_or(true, |e| e < -(bits as i32)) {
                break;
            }
        }
    }
    let scale = Float::with_val(bits, half_z.pow(nu));
    sum * scale
}

/// Modified Bessel function of the second kind at order 1/4 (equal to the
/// order −1/4 by evenness), via `K_ν = π/(2 sin νπ)·(I_{−ν} − I_ν)`.
///
/// The two series terms are of size `e^{z}` while the result is of size
/// `e^{−z}`, so the evaluation carries `⌈0.87·z⌉ + 10` extra guard digits.
pub fn bessel_k_quarter(ctx: &PrecisionContext, z: &Scalar) -> Result<Scalar, HighPrecError> {
    if !(z.is_finite() && z.is_sign_positive() && !z.is_zero()) {
        return Err(domain("bessel_k_quarter", z, "z > 0"));
    }
    let zf = z.to_f64();
    let guard = (0.87 * zf).ceil() as u32 + 10;
    let work = ctx.with_extra_guard(guard);
    let bits = work.bits();
    let zw = Float::with_val(bits, z);
    let pi = work.pi();
    let gamma_quarter = work.gamma_quarter();
    // Γ(5/4) = Γ(1/4)/4, Γ(3/4) = π√2/Γ(1/4)
    let gamma_five_quarters = Float::with_val(bits, &gamma_quarter / 4u32);
    let sqrt2 = work.scalar(2).sqrt();
    let gamma_three_quarters = Float::with_val(bits, &pi * &sqrt2) / &gamma_quarter;
    let nu_plus = work.scalar(0.25);
    let nu_minus = work.scalar(-0.25);
    let i_minus = bessel_i_series(bits, &nu_minus, &gamma_three_quarters, &zw);
    let i_plus = bessel_i_series(bits, &nu_plus, &gamma_five_quarters, &zw);
    // π / (2 sin(π/4)) = π/√2
    let prefactor = pi / sqrt2;
    let k = prefactor * (i_minus - i_plus);
    Ok(ctx.round(&k))
}

/// `(I_{ℓ+1/2}(z), K_{ℓ+1/2}(z))` for `ℓ ∈ {0, 1}` from their elementary
/// closed forms.
pub fn bessel_half_integer(
    ctx: &PrecisionContext,
    ell: u32,
    z: &Scalar,
) -> Result<(Scalar, Scalar), HighPrecError> {
    if !(z.is_finite() && z.is_sign_positive() && !z.is_zero()) {
        return Err(domain("bessel_half_integer", z, "z > 0"));
    }
    if ell > 1 {
        return Err(HighPrecError::Domain {
            function: "bessel_half_integer",
            value: ell.to_string(),
            requirement: "ell in {0, 1}",
        });
    }
    // cosh z − sinh z / z ≈ z²/3 loses about 2·log10(1/z) digits for small z.
    let zf = z.to_f64();
    let guard = if zf < 1.0 {
        (-2.0 * zf.log10()).ceil() as u32 + 5
    } else {
        5
    };
    let work = ctx.with_extra_guard(guard);
    let bits = work.bits();
    let zw = Float::with_val(bits, z);
    let pi = work.pi();
    let (sinh, cosh) = zw.clone().sinh_cosh(Float::new(bits));
    let exp_neg = Float::with_val(bits, -&zw).exp();
    let i_pref = Float::with_val(bits, 2u32 / Float::with_val(bits, &pi * &zw)).sqrt();
    let k_pref = Float::with_val(bits, &pi / Float::with_val(bits, &zw * 2u32)).sqrt();
    let (i_val, k_val) = match ell {
        0 => (i_pref * sinh, k_pref * exp_neg),
        _ => {
            let i_inner = cosh - Float::with_val(bits, &sinh / &zw);
            let k_inner = Float::with_val(bits, zw.recip_ref()) + 1u32;
            (i_pref * i_inner, k_pref * exp_neg * k_inner)
        }
    };
    Ok((ctx.round(&i_val), ctx.round(&k_val)))
}

/// Error function. Positive-term series `erf x = 2/√π·e^{−x²} Σ 2ⁿx^{2n+1}/(2n+1)!!`
/// while `erfc x` is still visible at working precision, otherwise
/// `1 − erfc x` with erfc from its continued fraction.
pub fn erf(ctx: &PrecisionContext, x: &Scalar) -> Scalar {
    if x.is_zero() {
        return ctx.zero();
    }
    let negative = x.is_sign_negative();
    let work = ctx.with_extra_guard(10);
    let bits = work.bits();
    let ax = Float::with_val(bits, x.abs_ref());
    let x2 = Float::with_val(bits, ax.square_ref());
    let threshold = std::f64::consts::LN_10 * f64::from(work.digits() + work.guard_digits());
    let value = if x2.to_f64() < threshold {
        let mut term = ax.clone();
        let mut sum = term.clone();
        let two_x2 = Float::with_val(bits, &x2 * 2u32);
        let mut n: u32 = 0;
        let peak = x2.to_f64();
        loop {
            n += 1;
            term *= &two_x2;
            term /= 2 * n + 1;
            sum += &term;
            if f64::from(n) > peak {
                let ratio = Float::with_val(bits, &term / &sum);
                if ratio.get_exp().map_or(true, |e| e < -(bits as i32)) {
                    break;
                }
            }
        }
        let pref = Float::with_val(bits, -&x2).exp() * 2u32 / work.pi().sqrt();
        pref * sum
    } else {
        let erfc = erfc_continued_fraction(bits, &ax);
        Float::with_val(bits, 1u32 - erfc)
    };
    let value = ctx.round(&value);
    if negative {
        -value
    } else {
        value
    }
}

/// Complementary error function for `x > 0` from the continued fraction
/// `erfc x = e^{−x²}/√π · 1/(x + ½/(x + 1/(x + 3/2/(x + …))))`,
/// evaluated with the modified Lentz algorithm. Converges quickly once
/// `x` exceeds a few units.
pub fn erfc_continued_fraction(bits: u32, x: &Scalar) -> Scalar {
    let x = Float::with_val(bits, x);
    let tiny = Float::with_val(bits, Float::with_val(bits, 2).pow(-(bits as i32) * 2));
    let mut f = x.clone();
    let mut c = f.clone();
    let mut d = Float::new(bits);
    let mut k: u32 = 0;
    loop {
        k += 1;
        let a = Float::with_val(bits, k) / 2u32;
        // D = 1 / (x + a D)
        d = Float::with_val(bits, &a * &d) + &x;
        if d.is_zero() {
            d = tiny.clone();
        }
        d.recip_mut();
        // C = x + a / C
        c = Float::with_val(bits, &a / &c) + &x;
        if c.is_zero() {
            c = tiny.clone();
        }
        let delta = Float::with_val(bits, &c * &d);
        f *= &delta;
        let dev = Float::with_val(bits, &delta - 1u32).abs();
        if dev.get_exp().map_or(true, |e| e < -(bits as i32)) || k > 100_000 {
            break;
        }
    }
    let pi = Float::with_val(bits, Constant::Pi);
    let x2 = Float::with_val(bits, x.square_ref());
    (-x2).exp() / (pi.sqrt() * f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(d: u32) -> PrecisionContext {
        PrecisionContext::new(d).unwrap()
    }

    fn close(a: &Scalar, b: f64, tol: f64) -> bool {
        (a.to_f64() - b).abs() <= tol
    }

    #[test]
    fn arcoth_closed_forms() {
        let c = ctx(60);
        let v = arcoth(&c, &c.scalar(2)).unwrap();
        let expected = c.scalar(3).ln() / 2u32;
        assert!(crate::highprec::agreeing_digits(&v, &expected, 0.0) >= 60);
        let neg = arcoth(&c, &c.scalar(-2)).unwrap();
        assert_eq!(neg, -v);
        assert!(close(&neg, -0.5493061443, 1e-10));
    }

    #[test]
    fn arcoth_rejects_band() {
        let c = ctx(40);
        for x in [1.0, -1.0, 0.0, 0.5] {
            assert!(matches!(
                arcoth(&c, &c.scalar(x)),
                Err(HighPrecError::ForbiddenBand { .. })
            ));
        }
    }

    #[test]
    fn half_integer_values() {
        let c = ctx(40);
        let (i0, k0) = bessel_half_integer(&c, 0, &c.scalar(1)).unwrap();
        assert!(close(&i0, 0.9376748883, 1e-9));
        assert!(close(&k0, 0.4610685044, 1e-9));
        let (_, k1) = bessel_half_integer(&c, 1, &c.scalar(2)).unwrap();
        assert!(close(&k1, 0.17991, 1e-5));
        assert!(bessel_half_integer(&c, 2, &c.scalar(1)).is_err());
        assert!(bessel_half_integer(&c, 0, &c.scalar(0)).is_err());
    }

    #[test]
    fn k_quarter_domain() {
        let c = ctx(40);
        assert!(bessel_k_quarter(&c, &c.scalar(0)).is_err());
        assert!(bessel_k_quarter(&c, &c.scalar(-1)).is_err());
    }

    #[test]
    fn erf_basic() {
        let c = ctx(50);
        assert!(erf(&c, &c.zero()).is_zero());
        let one = erf(&c, &c.scalar(1));
        assert!(close(&one, 0.8427007929, 1e-10));
        let m = erf(&c, &c.scalar(-1));
        assert_eq!(m, -one);
        // continued-fraction branch
        let big = erf(&c, &c.scalar(20));
        let gap = c.one() - big;
        assert!(gap < c.pow10(-40));
    }

    #[test]
    fn erf_branches_agree_at_switch() {
        // Evaluate the continued fraction where the series is still active.
        let c = ctx(30);
        let x = c.scalar(7);
        let series = erf(&c, &x);
        let cf = c.one() - erfc_continued_fraction(c.bits() + 40, &x);
        let cf = c.round(&cf);
        assert!(crate::highprec::agreeing_digits(&series, &cf, 0.0) >= 38);
    }
}

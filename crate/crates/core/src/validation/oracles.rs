//! Reference evaluations that take a different route from the production
//! code: integral representations, alternative series, direct quadrature
//! and elementary closed forms, normally at a raised precision.

use rug::ops::Pow;
use rug::{Assign, Float};

use crate::discretize::BoxBasis;
use crate::highprec::{gauss_legendre, GaussRule, PrecisionContext, Scalar};
use crate::kernels::{kernel_f_2d, KernelError};
use crate::linalg::SymMatrix;

/// `K_ν(z) = ∫₀^∞ e^{−z cosh t} cosh(νt) dt` by the trapezoid rule, which
/// converges geometrically for this analytic, doubly-exponentially decaying
/// integrand. Step and cutoff are chosen for the context's digits.
pub fn bessel_k_integral(ctx: &PrecisionContext, nu: &Scalar, z: &Scalar) -> Scalar {
    let bits = ctx.bits();
    let budget = f64::from(ctx.digits() + ctx.guard_digits() + 5) * std::f64::consts::LN_10;
    let zf = z.to_f64();
    let cutoff = (budget / zf).max(1.0).acosh() + 2.0;
    // Strip of analyticity |Im t| < π/3 keeps Re cosh ≥ ½ cosh(Re t).
    let step = 2.0 * std::f64::consts::PI.powi(2) / (3.0 * budget);
    let count = (cutoff / step).ceil() as u32;
    let h = Float::with_val(bits, cutoff) / count;
    let integrand = |t: &Scalar| {
        let e = Float::with_val(bits, -(Float::with_val(bits, t.cosh_ref()) * z)).exp();
        e * Float::with_val(bits, nu * t).cosh()
    };
    let mut sum = integrand(&Float::new(bits)) / 2u32;
    let mut t = Float::new(bits);
    for k in 1..=count {
        t.assign(&h * k);
        sum += integrand(&t);
    }
    ctx.round(&(sum * h))
}

/// `arcoth x = ½ ln((x+1)/(x−1))` at three times the context precision.
pub fn arcoth_oracle(ctx: &PrecisionContext, x: &Scalar) -> Scalar {
    let bits = ctx.scaled(3).bits();
    let num = Float::with_val(bits, x + 1u32);
    let den = Float::with_val(bits, x - 1u32);
    ctx.round(&((num / den).ln() / 2u32))
}

/// Alternating ascending series `erf x = 2/√π Σ (−1)ⁿ x^{2n+1}/(n!(2n+1))`
/// at three times the context precision (plus the cancellation loss).
pub fn erf_oracle(ctx: &PrecisionContext, x: &Scalar) -> Scalar {
    let x2f = x.to_f64() * x.to_f64();
    let extra = (x2f / std::f64::consts::LN_10).ceil() as u32;
    let work = ctx.scaled(3).with_extra_guard(extra);
    let bits = work.bits();
    let xw = Float::with_val(bits, x);
    let x2 = Float::with_val(bits, xw.square_ref());
    let mut power = xw.clone();
    let mut sum = xw;
    let limit = -(bits as i32);
    let mut n: u32 = 0;
    loop {
        n += 1;
        power *= &x2;
        power /= n;
        power = -power;
        let term = Float::with_val(bits, &power / (2 * n + 1));
        sum += &term;
        let small = term.is_zero()
            || (term.get_exp().unwrap_or(i32::MIN) - sum.get_exp().unwrap_or(0) < limit);
        if small && f64::from(n) > x2f {
            break;
        }
    }
    let scale = Float::with_val(bits, 2u32) / work.pi().sqrt();
    ctx.round(&(sum * scale))
}

/// `∫_a^b g` by the midpoint rule with Romberg extrapolation; stops when two
/// successive extrapolants agree to the context tolerance.
pub fn romberg_midpoint<F>(ctx: &PrecisionContext, a: &Scalar, b: &Scalar, max_levels: usize, mut g: F) -> Option<Scalar>
where
    F: FnMut(&Scalar) -> Scalar,
{
    let bits = ctx.bits();
    let len = Float::with_val(bits, b - a);
    let tol = ctx.tolerance(-5);
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    for level in 0..max_levels {
        let count = 1u32 << level;
        let h = Float::with_val(bits, &len / count);
        let mut sum = Float::new(bits);
        let mut x = Float::new(bits);
        for k in 0..count {
            x.assign(&h * k);
            x += Float::with_val(bits, &h / 2u32);
            x += a;
            sum += g(&x);
        }
        let mut row = vec![sum * &h];
        for j in 1..=level {
            let factor = Float::with_val(bits, 4u32).pow(j as u32) - 1u32;
            let diff = Float::with_val(bits, &row[j - 1] - &rows[level - 1][j - 1]);
            row.push(Float::with_val(bits, &row[j - 1] + diff / factor));
        }
        if level >= 3 {
            let prev = &rows[level - 1][level - 1];
            let cur = &row[level];
            let change = Float::with_val(bits, cur - prev).abs();
            if change <= Float::with_val(bits, cur.abs_ref()) * &tol {
                return Some(ctx.round(cur));
            }
        }
        rows.push(row);
    }
    None
}

/// `F(x) = ∫₀ˣ (x−y) f(y) dy` by Romberg on `y = u²`, which removes the
/// `y^{-1/2}` endpoint singularity of the kernel.
pub fn antiderivative_f_romberg(ctx: &PrecisionContext, m: &Scalar, x: &Scalar) -> Option<Scalar> {
    let work = ctx.with_extra_guard(10);
    let bits = work.bits();
    let xw = Float::with_val(bits, x);
    let root = Float::with_val(bits, xw.sqrt_ref());
    let value = romberg_midpoint(&work, &Float::new(bits), &root, 22, |u| {
        let y = Float::with_val(bits, u.square_ref());
        let f = kernel_f_2d(&work, m, &y).expect("positive interior point");
        Float::with_val(bits, &xw - &y) * f * u * 2u32
    })?;
    Some(ctx.round(&value))
}

/// Gauss–Legendre with panel doubling; `None` if 2¹² panels do not reach
/// the context tolerance.
fn integrate(rule: &GaussRule, ctx: &PrecisionContext, a: &Scalar, b: &Scalar, mut f: impl FnMut(&Scalar) -> Scalar) -> Option<Scalar> {
    let bits = rule.bits();
    let tol = ctx.tolerance(-5);
    let mut panels = 1;
    let mut prev = rule.integrate_panels(a, b, panels, &mut f);
    while panels < 4096 {
        panels *= 2;
        let cur = rule.integrate_panels(a, b, panels, &mut f);
        let change = Float::with_val(bits, &cur - &prev).abs();
        if change <= Float::with_val(bits, cur.abs_ref()) * &tol || change.is_zero() {
            return Some(cur);
        }
        prev = cur;
    }
    None
}

/// `⟨e_i, A^{-1/4} e_j⟩` by direct quadrature of the kernel.
///
/// The double integral over two cells depends on `x − y` only, so it equals
/// `∫ f(w) L(w) dw` with `L` the (piecewise linear) length of the segment of
/// cell pairs at separation `w`. Pieces touching `w = 0` are integrated in
/// `u = √w`.
pub fn kernel_2d_bruteforce(ctx: &PrecisionContext, basis: &BoxBasis, m: &Scalar) -> Result<SymMatrix, KernelError> {
    let work = ctx.with_extra_guard(10);
    let bits = work.bits();
    let rule = gauss_legendre(&work, 32);
    let grid = &basis.grid;
    let n = basis.dim();
    let f = |w: &Scalar| kernel_f_2d(&work, m, w);
    let failure = |panels| KernelError::QuadratureFailure {
        panels,
        estimate: "oracle".into(),
    };
    let mut entries = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in 0..=i {
            let (ai, bi) = (Float::with_val(bits, grid.left(i)), Float::with_val(bits, grid.right(i)));
            let (aj, bj) = (Float::with_val(bits, grid.left(j)), Float::with_val(bits, grid.right(j)));
            let length = |w: &Scalar| -> Scalar {
                if i == j {
                    let h = Float::with_val(bits, &bi - &ai);
                    return (h - w) * 2u32;
                }
                let hi = Float::with_val(bits, &bj).min(&Float::with_val(bits, &bi - w));
                let lo = Float::with_val(bits, &aj).max(&Float::with_val(bits, &ai - w));
                let l = hi - lo;
                if l.is_sign_negative() {
                    Float::new(bits)
                } else {
                    l
                }
            };
            let mut cuts: Vec<Scalar> = if i == j {
                vec![Float::new(bits), Float::with_val(bits, &bi - &ai)]
            } else {
                let w0 = Float::with_val(bits, &ai - &bj);
                let (hi_w, hj_w) = (Float::with_val(bits, &bi - &ai), Float::with_val(bits, &bj - &aj));
                let (short, long) = if hi_w < hj_w { (hi_w, hj_w) } else { (hj_w, hi_w) };
                vec![
                    w0.clone(),
                    Float::with_val(bits, &w0 + &short),
                    Float::with_val(bits, &w0 + &long),
                    w0 + short + long,
                ]
            };
            cuts.dedup();
            let mut total = Float::new(bits);
            for pair in cuts.windows(2) {
                let (lo, hi) = (&pair[0], &pair[1]);
                let piece = if lo.is_zero() {
                    let top = Float::with_val(bits, hi.sqrt_ref());
                    integrate(&rule, &work, &Float::new(bits), &top, |u| {
                        let w = Float::with_val(bits, u.square_ref());
                        f(&w).expect("interior point") * length(&w) * u * 2u32
                    })
                } else {
                    integrate(&rule, &work, lo, hi, |w| f(w).expect("interior point") * length(w))
                };
                total += piece.ok_or_else(|| failure(4096))?;
            }
            entries.push(total * &basis.norms[i] * &basis.norms[j]);
        }
    }
    Ok(SymMatrix::from_packed(n, ctx.bits(), entries.iter().map(|e| ctx.round(e)).collect())
        .expect("packed length matches"))
}

/// `⟨e_i, A_0^{-1} e_j⟩` for ℓ = 0 in elementary closed form, at three
/// times the context precision.
///
/// With `G = e^{−m r_>} sinh(m r_<)/(m r s)`, off-diagonal entries factor
/// into `(1/m)∫ r e^{−mr} dr · ∫ s sinh(ms) ds`; on a diagonal cell the
/// inner integral is done first and the outer one reduces to integrals of
/// `r^k` and `r^k e^{−2mr}`.
pub fn ainv_4d_ell0_closed_form(ctx: &PrecisionContext, basis: &BoxBasis, m: &Scalar) -> SymMatrix {
    let work = ctx.scaled(3);
    let bits = work.bits();
    let m = Float::with_val(bits, m);
    let inv = Float::with_val(bits, m.recip_ref());
    let inv2 = Float::with_val(bits, inv.square_ref());
    let c = Float::with_val(bits, &m * 2u32);
    let exp = |k: &Scalar, r: &Scalar| Float::with_val(bits, -Float::with_val(bits, k * r)).exp();
    // ∫ r e^{−mr} dr
    let kp = |r: &Scalar| -(exp(&m, r) * (Float::with_val(bits, r * &inv) + &inv2));
    // ∫ s sinh(ms) ds
    let ip = |s: &Scalar| {
        let (sh, ch) = Float::with_val(bits, &m * s).sinh_cosh(Float::new(bits));
        Float::with_val(bits, ch * s) * &inv - sh * &inv2
    };
    // ∫ r e^{−mr}·ip(r) dr = ∫ [r²(1+e^{−2mr})/(2m) − r(1−e^{−2mr})/(2m²)] dr
    let outer = |r: &Scalar| {
        let e = exp(&c, r);
        let r2 = Float::with_val(bits, r.square_ref());
        let r3 = Float::with_val(bits, &r2 * r);
        let int_r2e = -(Float::with_val(bits, &e * (Float::with_val(bits, &r2 / &c)
            + Float::with_val(bits, r * 2u32) / Float::with_val(bits, c.square_ref())
            + Float::with_val(bits, 2u32 / Float::with_val(bits, c.square_ref())) / &c)));
        let int_re = -(Float::with_val(bits, &e * (Float::with_val(bits, r / &c)
            + Float::with_val(bits, c.square_ref()).recip())));
        let first = (r3 / 3u32 + int_r2e) * Float::with_val(bits, &inv / 2u32);
        let second = (r2 / 2u32 - int_re) * Float::with_val(bits, &inv2 / 2u32);
        first - second
    };
    let grid = &basis.grid;
    let n = basis.dim();
    SymMatrix::from_fn(n, ctx.bits(), |i, j| {
        let (a, b) = (Float::with_val(bits, grid.left(i)), Float::with_val(bits, grid.right(i)));
        let ni = Float::with_val(bits, &basis.norms[i]);
        let nj = Float::with_val(bits, &basis.norms[j]);
        let kd = kp(&b) - kp(&a);
        let value = if i == j {
            let inner = outer(&b) - outer(&a) - ip(&a) * &kd;
            inner * &inv * 2u32 * &ni * &ni
        } else {
            let (c0, c1) = (Float::with_val(bits, grid.left(j)), Float::with_val(bits, grid.right(j)));
            (ip(&c1) - ip(&c0)) * kd * &inv * &ni * &nj
        };
        ctx.round(&value)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::highprec::{agreeing_digits, erf};

    #[test]
    fn integral_k_matches_half_integer_closed_form() {
        let ctx = PrecisionContext::new(60).unwrap();
        for z in [0.3, 2.0, 40.0] {
            let z = ctx.scalar(z);
            let k = bessel_k_integral(&ctx, &ctx.scalar(0.5), &z);
            let closed = Float::with_val(ctx.bits(), ctx.pi() / Float::with_val(ctx.bits(), &z * 2u32)).sqrt()
                * Float::with_val(ctx.bits(), -&z).exp();
            assert!(agreeing_digits(&k, &closed, 0.0) >= 60);
        }
    }

    #[test]
    fn erf_oracle_agrees() {
        let ctx = PrecisionContext::new(50).unwrap();
        for x in [0.1, 1.0, 3.0] {
            let x = ctx.scalar(x);
            assert!(agreeing_digits(&erf(&ctx, &x), &erf_oracle(&ctx, &x), 0.0) >= 50);
        }
    }

    #[test]
    fn romberg_polynomial_and_exp() {
        let ctx = PrecisionContext::new(40).unwrap();
        let v = romberg_midpoint(&ctx, &ctx.zero(), &ctx.one(), 20, |x| x.clone().exp()).unwrap();
        let e1 = ctx.one().exp() - 1u32;
        assert!(agreeing_digits(&v, &e1, 0.0) >= 40);
    }
}

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Assign, Float};

use super::{integrate_refined, KernelError};
use crate::discretize::BoxBasis;
use crate::highprec::{bessel_k_quarter, gauss_legendre, HighPrecError, PrecisionContext, Scalar};
use crate::linalg::SymMatrix;

fn positive(function: &'static str, x: &Scalar) -> Result<(), KernelError> {
    if x.is_finite() && x.is_sign_positive() && !x.is_zero() {
        Ok(())
    } else {
        Err(HighPrecError::Domain {
            function,
            value: x.to_string_radix(10, Some(20)),
            requirement: "argument > 0",
        }
        .into())
    }
}

/// Convolution kernel of `A^{-1/4}` with `A = −∂² + m²`:
/// `f(y) = (√π Γ(1/4))⁻¹ (2m/y)^{1/4} K_{1/4}(m y)` for `y > 0`.
pub fn kernel_f_2d(ctx: &PrecisionContext, m: &Scalar, y: &Scalar) -> Result<Scalar, KernelError> {
    positive("kernel_f_2d", y)?;
    positive("kernel_f_2d mass", m)?;
    let bits = ctx.bits();
    let my = Float::with_val(bits, m * y);
    let k = bessel_k_quarter(ctx, &my)?;
    let ratio = Float::with_val(bits, m * 2u32) / y;
    let pref = ratio.pow(0.25f64) / (ctx.pi().sqrt() * ctx.gamma_quarter());
    Ok(pref * k)
}

/// `F(x) = ∫₀ˣ (x − y) f(y) dy` from the termwise-integrated ascending
/// series of the kernel:
///
/// `F(x) = √π/Γ(1/4)·[x^{3/2} S₁(w) − √(m/2)·x² S₂(w)]`, `w = m x/2`, with
/// `S₁ = Σ w^{2k} / (k! Γ(k+3/4) (2k+½)(2k+3/2))` and
/// `S₂ = Σ w^{2k} / (k! Γ(k+5/4) (2k+1)(2k+2))`.
///
/// Both sums grow like `e^{m x}` while `F` stays of order `x`, so evaluation
/// carries `⌈0.44·m·x_max⌉ + 10` extra digits.
#[derive(Debug, Clone)]
pub struct Antiderivative {
    out: PrecisionContext,
    bits: u32,
    mass: Scalar,
    prefactor: Scalar,
    inv_gamma_three_quarters: Scalar,
    inv_gamma_five_quarters: Scalar,
    sqrt_half_mass: Scalar,
}

impl Antiderivative {
    pub fn new(ctx: &PrecisionContext, mass: &Scalar, x_max: &Scalar) -> Result<Self, KernelError> {
        positive("antiderivative mass", mass)?;
        let span = (mass.to_f64() * x_max.to_f64()).max(0.0);
        let work = ctx.with_extra_guard((0.44 * span).ceil() as u32 + 10);
        let bits = work.bits();
        let pi = work.pi();
        let gq = work.gamma_quarter();
        let sqrt2 = work.scalar(2).sqrt();
        // Γ(3/4) = π√2/Γ(1/4), Γ(5/4) = Γ(1/4)/4
        let inv_g34 = Float::with_val(bits, &gq / Float::with_val(bits, &pi * &sqrt2));
        let inv_g54 = Float::with_val(bits, 4u32 / &gq);
        let mass = work.round(mass);
        Ok(Self {
            out: *ctx,
            bits,
            prefactor: pi.sqrt() / &gq,
            inv_gamma_three_quarters: inv_g34,
            inv_gamma_five_quarters: inv_g54,
            sqrt_half_mass: Float::with_val(bits, &mass / 2u32).sqrt(),
            mass,
        })
    }

    /// Working precision in bits; values returned by [`eval_work`](Self::eval_work)
    /// carry this many.
    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn eval(&self, x: &Scalar) -> Result<Scalar, KernelError> {
        Ok(self.out.round(&self.eval_work(x)?))
    }

    /// `F(x)` at the internal working precision.
    pub fn eval_work(&self, x: &Scalar) -> Result<Scalar, KernelError> {
        if x.is_zero() {
            return Ok(Float::new(self.bits));
        }
        positive("antiderivative_f", x)?;
        let bits = self.bits;
        let x = Float::with_val(bits, x);
        let w = Float::with_val(bits, &self.mass * &x) / 2u32;
        let w2 = Float::with_val(bits, w.square_ref());
        let w_f = w.to_f64();
        let mut t1 = self.inv_gamma_three_quarters.clone();
        let mut t2 = self.inv_gamma_five_quarters.clone();
        let mut s1 = Float::with_val(bits, &t1 * 4u32) / 3u32;
        let mut s2 = Float::with_val(bits, &t2 / 2u32);
        let mut add = Float::new(bits);
        let mut k: u32 = 0;
        loop {
            k += 1;
            // t1_k = t1_{k-1}·w²/(k (k − 1/4)),  t2_k = t2_{k-1}·w²/(k (k + 1/4))
            t1 *= &w2;
            t1 *= 4u32;
            t1 /= k * (4 * k - 1);
            t2 *= &w2;
            t2 *= 4u32;
            t2 /= k * (4 * k + 1);
            add.assign(&t1 * 4u32);
            add /= (4 * k + 1) * (4 * k + 3);
            s1 += &add;
            let small1 = negligible(&add, &s1, bits);
            add.assign(&t2 / ((2 * k + 1) * (2 * k + 2)));
            s2 += &add;
            let small2 = negligible(&add, &s2, bits);
            if (k as f64) > w_f && small1 && small2 {
                break;
            }
        }
        let x32 = Float::with_val(bits, x.sqrt_ref()) * &x;
        let x2 = Float::with_val(bits, x.square_ref());
        let first = x32 * s1;
        let second = x2 * s2 * &self.sqrt_half_mass;
        Ok(Float::with_val(bits, &self.prefactor * (first - second)))
    }
}

fn negligible(term: &Float, sum: &Float, bits: u32) -> bool {
    if term.is_zero() {
        return true;
    }
    match (term.get_exp(), sum.get_exp()) {
        (Some(te), Some(se)) => te < se - bits as i32,
        _ => false,
    }
}

/// `F(x)` for a single argument via the series.
pub fn antiderivative_f(ctx: &PrecisionContext, m: &Scalar, x: &Scalar) -> Result<Scalar, KernelError> {
    if x.is_zero() {
        return Ok(ctx.zero());
    }
    Antiderivative::new(ctx, m, x)?.eval(x)
}

/// `F(x)` by Gauss–Legendre quadrature of `∫₀^{√x} (x − u²) f(u²) 2u du`
/// (the substitution `y = u²` makes the integrand entire), with panel
/// doubling until two refinements agree to `10^{10−digits}`.
pub fn antiderivative_f_quadrature(
    ctx: &PrecisionContext,
    m: &Scalar,
    x: &Scalar,
    quad_order: usize,
) -> Result<Scalar, KernelError> {
    if x.is_zero() {
        return Ok(ctx.zero());
    }
    positive("antiderivative_f_quadrature", x)?;
    let work = ctx.with_extra_guard(5);
    let bits = work.bits();
    let rule = gauss_legendre(&work, quad_order);
    let xw = work.round(x);
    let top = Float::with_val(bits, xw.sqrt_ref());
    let tol = ctx.tolerance(10);
    let mut failure = None;
    let value = integrate_refined(&rule, &work.zero(), &top, &tol, 512, |u| {
        let y = Float::with_val(bits, u.square_ref());
        match kernel_f_2d(&work, m, &y) {
            Ok(f) => Float::with_val(bits, &xw - &y) * f * u * 2u32,
            Err(e) => {
                failure.get_or_insert(e);
                Float::new(bits)
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(ctx.round(&value?))
}

/// `⟨e_i, A^{-1/4} e_j⟩` on a Lebesgue box basis:
/// `2 n_i² F(b_i − a_i)` on the diagonal and
/// `n_i n_j (F(b_j−a_i) − F(b_j−b_i) − F(a_j−a_i) + F(a_j−b_i))` for `i < j`.
pub fn assemble_am14_2d(
    ctx: &PrecisionContext,
    basis: &BoxBasis,
    m: &Scalar,
) -> Result<SymMatrix, KernelError> {
    let pts = &basis.grid.breakpoints;
    let n = basis.dim();
    let span = Float::with_val(ctx.bits(), &pts[n] - &pts[0]);
    let anti = Antiderivative::new(ctx, m, &span)?;
    let bits = anti.bits();
    // table[p][q − p − 1] = F(a_q − a_p) for q > p.
    let table: Vec<Vec<Scalar>> = (0..n)
        .into_par_iter()
        .map(|p| {
            ((p + 1)..=n)
                .map(|q| anti.eval_work(&Float::with_val(bits, &pts[q] - &pts[p])))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let f = |p: usize, q: usize| -> Scalar {
        if q == p {
            Float::new(bits)
        } else {
            table[p][q - p - 1].clone()
        }
    };
    let norms: Vec<Scalar> = basis.norms.iter().map(|x| Float::with_val(bits, x)).collect();
    Ok(SymMatrix::par_from_fn(n, ctx.bits(), |i, j| {
        if i == j {
            let v = Float::with_val(bits, norms[i].square_ref()) * f(i, i + 1) * 2u32;
            return v;
        }
        let (lo, hi) = (j, i);
        let second = f(lo, hi + 1) - f(lo + 1, hi + 1) - f(lo, hi) + f(lo + 1, hi);
        second * &norms[lo] * &norms[hi]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{build_grid, normalize, Scenario, TaperMode};
    use crate::highprec::agreeing_digits;

    #[test]
    fn small_argument_limit() {
        let ctx = PrecisionContext::new(50).unwrap();
        let m = ctx.one();
        for e in [-8, -10] {
            let y = ctx.pow10(e);
            let f = kernel_f_2d(&ctx, &m, &y).unwrap();
            let scaled = f * (Float::with_val(ctx.bits(), &y * ctx.pi()) * 2u32).sqrt();
            let dev = (scaled - 1u32).abs().to_f64();
            assert!(dev < 1e-3, "{e}: {dev}");
        }
    }

    #[test]
    fn series_matches_quadrature() {
        let ctx = PrecisionContext::new(60).unwrap();
        for (m, x) in [(1.0, 0.03125), (1.0, 2.0), (5.0, 3.0), (0.2, 8.0)] {
            let m = ctx.scalar(m);
            let x = ctx.scalar(x);
            let s = antiderivative_f(&ctx, &m, &x).unwrap();
            let q = antiderivative_f_quadrature(&ctx, &m, &x, 32).unwrap();
            assert!(agreeing_digits(&s, &q, 0.0) >= 50, "{s} vs {q}");
        }
    }

    #[test]
    fn massless_limit_shape() {
        // As m → 0, F(x) → (2√2/3) x^{3/2}/√π.
        let ctx = PrecisionContext::new(40).unwrap();
        let m = ctx.pow10(-30);
        let x = ctx.scalar(2);
        let f = antiderivative_f(&ctx, &m, &x).unwrap();
        let exact = ctx.scalar(8).sqrt() / 3u32 * Float::with_val(ctx.bits(), x.sqrt_ref()) * &x
            / ctx.pi().sqrt();
        assert!(agreeing_digits(&f, &exact, 0.0) >= 13);
    }

    #[test]
    fn toeplitz_on_uniform_grid() {
        let ctx = PrecisionContext::new(40).unwrap();
        let g = build_grid(&ctx, Scenario::Wedge2d, 8, &ctx.one(), TaperMode::default()).unwrap();
        let basis = normalize(&g);
        let a = assemble_am14_2d(&ctx, &basis, &ctx.one()).unwrap();
        for i in 1..8 {
            for j in 1..=i {
                assert!(agreeing_digits(a.get(i, j), a.get(i - 1, j - 1), 0.0) >= 35);
            }
        }
        // entries decay with band distance
        for k in 1..8 {
            assert!(a.get(k, 0) < a.get(k - 1, 0));
        }
    }
}

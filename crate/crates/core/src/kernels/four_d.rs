use rug::Float;

use super::{integrate_refined, KernelError};
use crate::discretize::BoxBasis;
use crate::highprec::{bessel_half_integer, gauss_legendre, HighPrecError, PrecisionContext, Scalar};
use crate::linalg::SymMatrix;

/// Green's function of the radial operator
/// `A_ℓ = −r⁻²∂_r r²∂_r + ℓ(ℓ+1)/r² + m²` with respect to `r² dr`:
/// `(rs)^{-1/2} K_{ℓ+½}(m r_>) I_{ℓ+½}(m r_<)`.
pub fn greens_kernel_4d(
    ctx: &PrecisionContext,
    ell: u32,
    m: &Scalar,
    r: &Scalar,
    s: &Scalar,
) -> Result<Scalar, KernelError> {
    let bits = ctx.bits();
    let (big, small) = if r >= s { (r, s) } else { (s, r) };
    let (_, k) = bessel_half_integer(ctx, ell, &Float::with_val(bits, m * big))?;
    let (i, _) = bessel_half_integer(ctx, ell, &Float::with_val(bits, m * small))?;
    let rs = Float::with_val(bits, r * s);
    Ok(k * i / rs.sqrt())
}

/// Elementary factorization `r² s² G(r, s) = (1/m)·kpart(r_>)·ipart(r_<)`
/// and the antiderivatives of both factors.
///
/// ℓ = 0: `kpart = r e^{−mr}`, `ipart = s sinh(ms)`.
/// ℓ = 1: `kpart = e^{−mr}(r + 1/m)`, `ipart = s cosh(ms) − sinh(ms)/m`.
#[derive(Debug, Clone)]
pub struct RadialFactors {
    ell: u32,
    mass: Scalar,
    work: PrecisionContext,
    bits: u32,
}

/// Factors at a precision that absorbs the cancellation in antiderivative
/// differences over cells as narrow as `h_min`.
pub fn radial_factors(
    ctx: &PrecisionContext,
    ell: u32,
    m: &Scalar,
    h_min: &Scalar,
) -> Result<RadialFactors, KernelError> {
    if ell > 1 {
        return Err(HighPrecError::Domain {
            function: "radial_factors",
            value: ell.to_string(),
            requirement: "ell in {0, 1}",
        }
        .into());
    }
    let scale = m.to_f64() * h_min.to_f64();
    let extra = if scale > 0.0 && scale < 1.0 {
        (-5.0 * scale.log10()).ceil() as u32
    } else {
        0
    };
    let work = ctx.with_extra_guard(20 + extra);
    Ok(RadialFactors {
        ell,
        mass: work.round(m),
        work,
        bits: work.bits(),
    })
}

impl RadialFactors {
    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Context the factors are evaluated in.
    pub fn context(&self) -> &PrecisionContext {
        &self.work
    }

    pub fn mass(&self) -> &Scalar {
        &self.mass
    }

    fn exp_neg(&self, r: &Scalar) -> Scalar {
        (-Float::with_val(self.bits, &self.mass * r)).exp()
    }

    fn sinh_cosh(&self, s: &Scalar) -> (Scalar, Scalar) {
        Float::with_val(self.bits, &self.mass * s).sinh_cosh(Float::new(self.bits))
    }

    fn inv_m(&self) -> Scalar {
        Float::with_val(self.bits, self.mass.recip_ref())
    }

    pub fn kpart(&self, r: &Scalar) -> Scalar {
        let e = self.exp_neg(r);
        match self.ell {
            0 => e * r,
            _ => e * (self.inv_m() + r),
        }
    }

    pub fn ipart(&self, s: &Scalar) -> Scalar {
        let (sh, ch) = self.sinh_cosh(s);
        match self.ell {
            0 => sh * s,
            _ => ch * s - sh * self.inv_m(),
        }
    }

    /// Antiderivative of `kpart`: `−e^{−mr}(r/m + c/m²)`, `c = 1 + ℓ`.
    pub fn kprim(&self, r: &Scalar) -> Scalar {
        let inv = self.inv_m();
        let inv2 = Float::with_val(self.bits, inv.square_ref()) * (1 + self.ell);
        let inner = Float::with_val(self.bits, r * &inv) + inv2;
        -(self.exp_neg(r) * inner)
    }

    /// Antiderivative of `ipart`.
    /// ℓ = 0: `s cosh(ms)/m − sinh(ms)/m²`; ℓ = 1: `s sinh(ms)/m − 2 cosh(ms)/m²`.
    pub fn iprim(&self, s: &Scalar) -> Scalar {
        let (sh, ch) = self.sinh_cosh(s);
        let inv = self.inv_m();
        let inv2 = Float::with_val(self.bits, inv.square_ref());
        match self.ell {
            0 => Float::with_val(self.bits, &ch * s) * &inv - sh * inv2,
            _ => Float::with_val(self.bits, &sh * s) * &inv - ch * inv2 * 2u32,
        }
    }
}

/// `⟨e_i, A_ℓ⁻¹ e_j⟩ = n_i n_j ∬ r² s² G(r, s) dr ds` on a radial box basis.
///
/// Off-diagonal cells factor into products of antiderivative differences.
/// On a diagonal cell `[a, b]` the kernel has a kink at `r = s`; the inner
/// integral over `s < r` is done in closed form and the remaining smooth
/// integral `2/m ∫_a^b kpart(r)(Iprim(r) − Iprim(a)) dr` by Gauss–Legendre
/// with panel doubling.
pub fn assemble_ainv_4d(
    ctx: &PrecisionContext,
    basis: &BoxBasis,
    ell: u32,
    m: &Scalar,
    quad_order: usize,
) -> Result<SymMatrix, KernelError> {
    let grid = &basis.grid;
    let n = basis.dim();
    let h_min = (0..n)
        .map(|i| grid.width(i))
        .min_by(|a, b| a.partial_cmp(b).expect("finite widths"))
        .expect("nonempty grid");
    let factors = radial_factors(ctx, ell, m, &h_min)?;
    let bits = factors.bits();
    let rule = gauss_legendre(factors.context(), quad_order);
    let pts: Vec<Scalar> = grid.breakpoints.iter().map(|x| Float::with_val(bits, x)).collect();
    let kp: Vec<Scalar> = pts.iter().map(|r| factors.kprim(r)).collect();
    let ip: Vec<Scalar> = pts.iter().map(|s| factors.iprim(s)).collect();
    let kdiff: Vec<Scalar> = (0..n).map(|i| Float::with_val(bits, &kp[i + 1] - &kp[i])).collect();
    let idiff: Vec<Scalar> = (0..n).map(|i| Float::with_val(bits, &ip[i + 1] - &ip[i])).collect();
    let inv_m = Float::with_val(bits, factors.mass().recip_ref());
    let tol = ctx.tolerance(-5);

    let diagonal = (0..n)
        .map(|i| {
            let a = &pts[i];
            let base = &ip[i];
            let integral = integrate_refined(&rule, a, &pts[i + 1], &tol, 64, |r| {
                factors.kpart(r) * (factors.iprim(r) - base)
            })?;
            let norm2 = Float::with_val(bits, basis.norms[i].square_ref());
            Ok(integral * &inv_m * norm2 * 2u32)
        })
        .collect::<Result<Vec<_>, KernelError>>()?;

    Ok(SymMatrix::par_from_fn(n, ctx.bits(), |i, j| {
        if i == j {
            return diagonal[i].clone();
        }
        // j < i: cell j lies below cell i, so s ranges over j and r over i.
        Float::with_val(bits, &idiff[j] * &kdiff[i]) * &inv_m * &basis.norms[i] * &basis.norms[j]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{build_grid, normalize, Scenario, TaperMode};
    use crate::highprec::agreeing_digits;

    #[test]
    fn ell0_closed_form() {
        let ctx = PrecisionContext::new(40).unwrap();
        let m = ctx.scalar(1.5);
        let r = ctx.scalar(0.7);
        let s = ctx.scalar(0.3);
        let g = greens_kernel_4d(&ctx, 0, &m, &r, &s).unwrap();
        let mr = Float::with_val(ctx.bits(), &m * &r);
        let ms = Float::with_val(ctx.bits(), &m * &s);
        let expected = (-mr).exp() * ms.sinh() / (m * r * s);
        assert!(agreeing_digits(&g, &expected, 0.0) >= 38);
    }

    #[test]
    fn symmetric_and_factorized() {
        let ctx = PrecisionContext::new(40).unwrap();
        let m = ctx.scalar(2);
        let (r, s) = (ctx.scalar(0.9), ctx.scalar(0.4));
        for ell in 0..2 {
            let g1 = greens_kernel_4d(&ctx, ell, &m, &r, &s).unwrap();
            let g2 = greens_kernel_4d(&ctx, ell, &m, &s, &r).unwrap();
            assert_eq!(g1, g2);
            let f = radial_factors(&ctx, ell, &m, &ctx.scalar(0.1)).unwrap();
            let fact = f.kpart(&r) * f.ipart(&s) / &m;
            let direct = g1 * Float::with_val(ctx.bits(), &r * &s).square();
            assert!(agreeing_digits(&fact, &direct, 0.0) >= 38, "ell {ell}");
        }
    }

    #[test]
    fn antiderivatives_differentiate_back() {
        let ctx = PrecisionContext::new(40).unwrap();
        let m = ctx.scalar(0.7);
        let x = ctx.scalar(1.3);
        let h = ctx.pow10(-12);
        for ell in 0..2 {
            let f = radial_factors(&ctx, ell, &m, &ctx.scalar(0.1)).unwrap();
            let xp = Float::with_val(f.bits(), &x + &h);
            let xm = Float::with_val(f.bits(), &x - &h);
            let dk = (f.kprim(&xp) - f.kprim(&xm)) / Float::with_val(f.bits(), &h * 2u32);
            let di = (f.iprim(&xp) - f.iprim(&xm)) / Float::with_val(f.bits(), &h * 2u32);
            assert!(agreeing_digits(&dk, &f.kpart(&x), 0.0) >= 20);
            assert!(agreeing_digits(&di, &f.ipart(&x), 0.0) >= 20);
        }
    }

    #[test]
    fn assembled_matrix_is_positive_on_diagonal() {
        let ctx = PrecisionContext::new(40).unwrap();
        let g = build_grid(&ctx, Scenario::Cone4d, 8, &ctx.scalar(4), TaperMode::default()).unwrap();
        let basis = normalize(&g);
        for ell in 0..2 {
            let a = assemble_ainv_4d(&ctx, &basis, ell, &ctx.one(), 16).unwrap();
            for i in 0..8 {
                assert!(a.get(i, i).is_sign_positive());
            }
        }
    }
}

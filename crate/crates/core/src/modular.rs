//! The modular pipeline: quarter powers of the kernel, the operator
//! `B = A^{1/4}χA^{-1/4} + A^{-1/4}χA^{1/4} − 1`, its spectral validation,
//! and `M± = 2 A^{±1/4} arcoth(B) A^{±1/4}`.

use log::warn;
use rug::Float;
use thiserror::Error;

use crate::highprec::{arcoth, format_sig, PrecisionContext, Scalar};
use crate::linalg::{
    inverse_residual, matmul, residual_max_abs, spectral_apply, sym_eigen, EigenDecomp,
    LinalgError, Matrix, SymMatrix,
};

/// Which power of the Helmholtz operator the kernel matrix represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelPower {
    /// Input is `A^{-1/4}` (1+1 dimensions).
    D2,
    /// Input is `A_ℓ^{-1}` (3+1 dimensions).
    D4,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModularError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("kernel matrix is not positive definite (smallest eigenvalue {min_eigenvalue})")]
    NotPositiveDefinite { min_eigenvalue: String },
    #[error(
        "spectrum of B reaches the band [-1, 1]: margin {margin}, {violating} violating eigenvalue(s); increase digits"
    )]
    PrecisionInsufficient { margin: String, violating: usize },
    #[error("A^(1/4) and A^(-1/4) are not mutual inverses: residual {residual} exceeds {bound}")]
    InverseResidual { residual: String, bound: String },
    #[error("projector has {got} entries, matrices have dimension {expected}")]
    ProjectorSize { got: usize, expected: usize },
}

/// Validity diagnostics carried by every [`ModularResult`].
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// `min |λ(B)| − 1`.
    pub spectral_margin: Scalar,
    /// `‖A^{1/4}·A^{-1/4} − I‖_max`.
    pub inverse_residual: Scalar,
    /// Largest skew of the unsymmetrized `B`, `M₋`, `M₊`.
    pub symmetry_residual: Scalar,
    /// `‖M₊ − A^{1/2} M₋ A^{1/2}‖_max`.
    pub identity_residual: Scalar,
    /// `max_i |λ_i + λ_{n−1−i}|` over the ascending spectrum of `B`.
    pub spectral_asymmetry: Scalar,
    /// Smallest eigenvalue of the kernel matrix.
    pub kernel_min_eigenvalue: Scalar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModularResult {
    pub a4: SymMatrix,
    pub a4inv: SymMatrix,
    pub b_eigen: EigenDecomp,
    pub m_minus: SymMatrix,
    pub m_plus: SymMatrix,
    pub diagnostics: Diagnostics,
}

/// `(A^{1/4}, A^{-1/4})` from one eigendecomposition of the kernel matrix,
/// together with that decomposition.
pub fn quarter_powers(
    ctx: &PrecisionContext,
    kernel: &SymMatrix,
    power: KernelPower,
) -> Result<(SymMatrix, SymMatrix, EigenDecomp), ModularError> {
    let eig = sym_eigen(ctx, kernel)?;
    let min = eig.min_eigenvalue();
    if min.is_sign_negative() || min.is_zero() {
        return Err(ModularError::NotPositiveDefinite {
            min_eigenvalue: format_sig(min, 20),
        });
    }
    let bits = kernel.bits();
    let (a4, a4inv) = match power {
        KernelPower::D2 => {
            let inv = spectral_apply(&eig, |_, x| Ok(Float::with_val(bits, x.recip_ref())))?;
            (inv, kernel.clone())
        }
        KernelPower::D4 => {
            let fourth = |x: &Scalar| Float::with_val(bits, x.sqrt_ref()).sqrt();
            let up = spectral_apply(&eig, |_, x| Ok(fourth(x)))?;
            let down = spectral_apply(&eig, |_, x| Ok(fourth(x).recip()))?;
            (down, up)
        }
    };
    Ok((a4, a4inv, eig))
}

fn restrict_cols(m: &SymMatrix, keep: &[usize]) -> Matrix {
    Matrix::from_fn(m.dim(), keep.len(), |i, c| m.get(i, keep[c]).clone())
}

fn restrict_rows(m: &SymMatrix, keep: &[usize]) -> Matrix {
    Matrix::from_fn(keep.len(), m.dim(), |r, j| m.get(keep[r], j).clone())
}

/// `B = a4·χ·a4inv + a4inv·χ·a4 − I`, symmetrized, with the skew of the
/// unsymmetrized sum.
pub fn build_b(
    a4: &SymMatrix,
    a4inv: &SymMatrix,
    chi: &[bool],
) -> Result<(SymMatrix, Scalar), ModularError> {
    let n = a4.dim();
    if chi.len() != n || a4inv.dim() != n {
        return Err(ModularError::ProjectorSize {
            got: chi.len(),
            expected: n,
        });
    }
    let bits = a4.bits();
    let keep: Vec<usize> = (0..n).filter(|&i| chi[i]).collect();
    if keep.is_empty() {
        return Ok((scaled_identity(n, bits, -1), Float::new(bits)));
    }
    let first = matmul(&restrict_cols(a4, &keep), &restrict_rows(a4inv, &keep))?;
    let second = matmul(&restrict_cols(a4inv, &keep), &restrict_rows(a4, &keep))?;
    let raw = Matrix::from_fn(n, n, |i, j| {
        let mut v = Float::with_val(bits, first.get(i, j) + second.get(i, j));
        if i == j {
            v -= 1u32;
        }
        v
    });
    let skew = raw.skew_residual();
    Ok((raw.symmetrize(), skew))
}

fn scaled_identity(n: usize, bits: u32, value: i32) -> SymMatrix {
    SymMatrix::from_fn(n, bits, |i, j| Float::with_val(bits, if i == j { value } else { 0 }))
}

/// `min |λ| − 1` over the spectrum; fails when it is not positive.
pub fn validate_spectrum(e: &EigenDecomp) -> Result<Scalar, ModularError> {
    let bits = e.lambda.first().map_or(64, Float::prec);
    let mut margin: Option<Scalar> = None;
    let mut violating = 0;
    for l in &e.lambda {
        let gap = Float::with_val(bits, l.abs_ref()) - 1u32;
        if gap.is_sign_negative() || gap.is_zero() {
            violating += 1;
        }
        if margin.as_ref().map_or(true, |m| gap < *m) {
            margin = Some(gap);
        }
    }
    let margin = margin.expect("nonempty spectrum");
    if violating > 0 {
        return Err(ModularError::PrecisionInsufficient {
            margin: format_sig(&margin, 12),
            violating,
        });
    }
    Ok(margin)
}

/// `max_i |λ_i + λ_{n−1−i}|` for an ascending spectrum.
pub fn spectral_asymmetry(e: &EigenDecomp) -> Scalar {
    let n = e.dim();
    let bits = e.lambda[0].prec();
    let mut worst = Float::new(bits);
    for i in 0..n / 2 {
        let s = Float::with_val(bits, &e.lambda[i] + &e.lambda[n - 1 - i]).abs();
        if s > worst {
            worst = s;
        }
    }
    worst
}

/// `(M₋, M₊)` from the spectral factorization of `B`, each with the skew
/// of its unsymmetrized product.
pub fn compute_m(
    ctx: &PrecisionContext,
    b_eigen: &EigenDecomp,
    a4: &SymMatrix,
    a4inv: &SymMatrix,
) -> Result<(SymMatrix, SymMatrix, Scalar), ModularError> {
    let c = spectral_apply(b_eigen, |_, x| arcoth(ctx, x))?.to_dense();
    let sandwich = |outer: &SymMatrix| -> Result<(SymMatrix, Scalar), ModularError> {
        let o = outer.to_dense();
        let mut m = matmul(&o, &matmul(&c, &o)?)?;
        m.scale(&ctx.scalar(2));
        let skew = m.skew_residual();
        Ok((m.symmetrize(), skew))
    };
    let (m_minus, skew_minus) = sandwich(a4inv)?;
    let (m_plus, skew_plus) = sandwich(a4)?;
    Ok((m_minus, m_plus, skew_minus.max(&skew_plus)))
}

/// Full pipeline from an assembled kernel matrix and the projector diagonal.
pub fn modular_from_kernel(
    ctx: &PrecisionContext,
    kernel: &SymMatrix,
    chi: &[bool],
    power: KernelPower,
) -> Result<ModularResult, ModularError> {
    let (a4, a4inv, kernel_eigen) = quarter_powers(ctx, kernel, power)?;
    let a4d = a4.to_dense();
    let inv_res = inverse_residual(&a4d, &a4inv.to_dense())?;
    let bound = ctx.pow10(-(ctx.digits() as i32) / 2);
    if inv_res >= bound {
        return Err(ModularError::InverseResidual {
            residual: format_sig(&inv_res, 6),
            bound: format_sig(&bound, 6),
        });
    }
    let (b, b_skew) = build_b(&a4, &a4inv, chi)?;
    let b_eigen = sym_eigen(ctx, &b)?;
    let margin = validate_spectrum(&b_eigen)?;
    let asymmetry = spectral_asymmetry(&b_eigen);
    let asym_tol = ctx.pow10(-(ctx.digits() as i32) / 4) * b.max_abs();
    if asymmetry > asym_tol {
        warn!(
            "spectrum of B is not symmetric under λ -> -λ: deviation {}",
            format_sig(&asymmetry, 6)
        );
    }
    let (m_minus, m_plus, m_skew) = compute_m(ctx, &b_eigen, &a4, &a4inv)?;
    let half = matmul(&a4d, &a4d)?;
    let rebuilt = matmul(&half, &matmul(&m_minus.to_dense(), &half)?)?;
    let identity_residual = residual_max_abs(&m_plus.to_dense(), &rebuilt)?;
    Ok(ModularResult {
        diagnostics: Diagnostics {
            spectral_margin: margin,
            inverse_residual: inv_res,
            symmetry_residual: b_skew.max(&m_skew),
            identity_residual,
            spectral_asymmetry: asymmetry,
            kernel_min_eigenvalue: kernel_eigen.min_eigenvalue().clone(),
        },
        a4,
        a4inv,
        b_eigen,
        m_minus,
        m_plus,
    })
}

/// Discrete relative entropy `f₊ᵀχM₊f₊ + f₋ᵀχM₋f₋` in the box basis.
pub fn relative_entropy(
    result: &ModularResult,
    chi: &[bool],
    f_plus: &[Scalar],
    f_minus: &[Scalar],
) -> Result<Scalar, ModularError> {
    let n = result.m_minus.dim();
    for len in [chi.len(), f_plus.len(), f_minus.len()] {
        if len != n {
            return Err(ModularError::ProjectorSize {
                got: len,
                expected: n,
            });
        }
    }
    let bits = result.m_minus.bits();
    let form = |m: &SymMatrix, f: &[Scalar]| {
        let mut total = Float::new(bits);
        for i in (0..n).filter(|&i| chi[i]) {
            let mut row = Float::new(bits);
            for (j, fj) in f.iter().enumerate() {
                row += m.get(i, j) * fj;
            }
            total += row * &f[i];
        }
        total
    };
    Ok(form(&result.m_plus, f_plus) + form(&result.m_minus, f_minus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::highprec::agreeing_digits;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(40).unwrap()
    }

    #[test]
    fn fourth_roots_of_diagonal() {
        let c = ctx();
        let k = SymMatrix::diagonal(&[c.scalar(16), c.scalar(81)]);
        let (a4, a4inv, _) = quarter_powers(&c, &k, KernelPower::D4).unwrap();
        assert!(agreeing_digits(a4inv.get(0, 0), &c.scalar(2), 0.0) >= 40);
        assert!(agreeing_digits(a4inv.get(1, 1), &c.scalar(3), 0.0) >= 40);
        assert!(agreeing_digits(a4.get(0, 0), &c.scalar(0.5), 0.0) >= 40);
        assert!(agreeing_digits(a4.get(1, 1), &(c.one() / 3u32), 0.0) >= 40);
    }

    #[test]
    fn rejects_indefinite_kernel() {
        let c = ctx();
        let k = SymMatrix::diagonal(&[c.scalar(1), c.scalar(-1)]);
        assert!(matches!(
            quarter_powers(&c, &k, KernelPower::D2),
            Err(ModularError::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn degenerate_projectors() {
        let c = ctx();
        let k = SymMatrix::from_fn(3, c.bits(), |i, j| {
            c.scalar(if i == j { 3 } else { 1 })
        });
        let (a4, a4inv, _) = quarter_powers(&c, &k, KernelPower::D2).unwrap();
        let (b, _) = build_b(&a4, &a4inv, &[true; 3]).unwrap();
        let eig = sym_eigen(&c, &b).unwrap();
        for l in &eig.lambda {
            assert!((l.to_f64() - 1.0).abs() < 1e-30);
        }
        assert!(matches!(
            validate_spectrum(&eig),
            Err(ModularError::PrecisionInsufficient { .. })
        ));
        let (b, _) = build_b(&a4, &a4inv, &[false; 3]).unwrap();
        let eig = sym_eigen(&c, &b).unwrap();
        assert!(validate_spectrum(&eig).is_err());
    }

    #[test]
    fn margin_value() {
        let c = ctx();
        let e = EigenDecomp {
            q: Matrix::identity(2, c.bits()),
            lambda: vec![c.scalar(-1.5), c.scalar(2)],
        };
        assert_eq!(validate_spectrum(&e).unwrap(), 0.5);
        let e = EigenDecomp {
            q: Matrix::identity(2, c.bits()),
            lambda: vec![c.scalar(-1.5), c.scalar(1)],
        };
        match validate_spectrum(&e) {
            Err(ModularError::PrecisionInsufficient { violating, .. }) => assert_eq!(violating, 1),
            other => panic!("{other:?}"),
        }
    }
}

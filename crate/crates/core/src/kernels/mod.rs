//! Discretized kernel matrices: `A^{-1/4}` for the two-dimensional
//! scenarios and `A_ℓ^{-1}` for the radial sectors in four dimensions.

mod four_d;
mod two_d;

pub use four_d::{assemble_ainv_4d, greens_kernel_4d, radial_factors, RadialFactors};
pub use two_d::{
    antiderivative_f, antiderivative_f_quadrature, assemble_am14_2d, kernel_f_2d, Antiderivative,
};

use rug::Float;
use thiserror::Error;

use crate::discretize::{BoxBasis, Scenario};
use crate::highprec::{GaussRule, HighPrecError, PrecisionContext, Scalar};
use crate::linalg::SymMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error(transparent)]
    Domain(#[from] HighPrecError),
    #[error("quadrature did not converge after {panels} panels (last change {estimate})")]
    QuadratureFailure { panels: usize, estimate: String },
    #[error("kernel spec: {0}")]
    BadSpec(&'static str),
}

/// Physical parameters of a kernel assembly.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub scenario: Scenario,
    pub mass: Scalar,
    /// Angular momentum; only read for `cone4d`.
    pub ell: u32,
    pub quad_order: usize,
}

impl KernelSpec {
    pub const DEFAULT_QUAD_ORDER: usize = 64;
    pub const MIN_QUAD_ORDER: usize = 16;

    pub fn validate(&self) -> Result<(), KernelError> {
        if !(self.mass.is_finite() && self.mass.is_sign_positive() && !self.mass.is_zero()) {
            return Err(KernelError::BadSpec("mass must be positive"));
        }
        if self.quad_order < Self::MIN_QUAD_ORDER {
            return Err(KernelError::BadSpec("quad_order must be at least 16"));
        }
        if self.scenario.is_four_dimensional() && self.ell > 1 {
            return Err(KernelError::BadSpec("ell must be 0 or 1"));
        }
        Ok(())
    }
}

/// The kernel matrix of a scenario: `A^{-1/4}` in 1+1 dimensions,
/// `A_ℓ^{-1}` in 3+1.
pub fn assemble(
    ctx: &PrecisionContext,
    basis: &BoxBasis,
    spec: &KernelSpec,
) -> Result<SymMatrix, KernelError> {
    spec.validate()?;
    if spec.scenario.measure() != basis.grid.measure {
        return Err(KernelError::BadSpec("basis measure does not match the scenario"));
    }
    if spec.scenario.is_four_dimensional() {
        assemble_ainv_4d(ctx, basis, spec.ell, &spec.mass, spec.quad_order)
    } else {
        assemble_am14_2d(ctx, basis, &spec.mass)
    }
}

/// Composite Gauss–Legendre on `[a, b]` with panel doubling until two
/// successive values agree to `tol` relative to the newer one.
pub(crate) fn integrate_refined<F>(
    rule: &GaussRule,
    a: &Scalar,
    b: &Scalar,
    tol: &Scalar,
    max_panels: usize,
    mut f: F,
) -> Result<Scalar, KernelError>
where
    F: FnMut(&Scalar) -> Scalar,
{
    let bits = rule.bits();
    let mut panels = 1;
    let mut previous = rule.integrate_panels(a, b, panels, &mut f);
    loop {
        panels *= 2;
        let current = rule.integrate_panels(a, b, panels, &mut f);
        let change = Float::with_val(bits, &current - &previous).abs();
        let scale = Float::with_val(bits, current.abs_ref()) * tol;
        if change <= scale || change.is_zero() {
            return Ok(current);
        }
        if panels >= max_panels {
            return Err(KernelError::QuadratureFailure {
                panels,
                estimate: change.to_string_radix(10, Some(6)),
            });
        }
        previous = current;
    }
}

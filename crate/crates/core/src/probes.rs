//! Test functions, their overlaps with the box basis, smeared matrix
//! elements and the analytic references they are compared against.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use rug::{Assign, Float};
use thiserror::Error;

use crate::discretize::{BoxBasis, Measure, Scenario};
use crate::highprec::{erf, PrecisionContext, Scalar};
use crate::linalg::SymMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProbeError {
    #[error("relative error undefined: reference value is zero")]
    ZeroReference,
    #[error("{kind} probes need a {measure} basis")]
    MeasureMismatch {
        kind: &'static str,
        measure: &'static str,
    },
    #[error("probe parameter: {0}")]
    BadParameter(String),
    #[error("vector of length {got} does not match matrix dimension {expected}")]
    DimensionMismatch { got: usize, expected: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProbeKind {
    /// `(πσ²)^{-1/4} exp(−(x−μ)²/(2σ²))`, unit norm in `dx`.
    Gaussian,
    /// `(2π log α)^{-1/4} r^{-3/2} exp(−log²(α r/μ)/(4 log α))` with
    /// `α = √(1 + σ²/μ²)`, unit norm in `r² dr`.
    LogGaussian,
}

impl ProbeKind {
    pub fn for_scenario(scenario: Scenario) -> Self {
        match scenario.measure() {
            Measure::Lebesgue => ProbeKind::Gaussian,
            Measure::RadialR2 => ProbeKind::LogGaussian,
        }
    }
}

/// A family of probes of common width at the given positions.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSet {
    pub kind: ProbeKind,
    pub sigma: Scalar,
    pub positions: Vec<Scalar>,
}

impl ProbeSet {
    pub fn validate(&self) -> Result<(), ProbeError> {
        if !(self.sigma.is_finite() && self.sigma.is_sign_positive() && !self.sigma.is_zero()) {
            return Err(ProbeError::BadParameter("sigma must be positive".into()));
        }
        if self.kind == ProbeKind::LogGaussian {
            if let Some(bad) = self.positions.iter().find(|m| !m.is_sign_positive() || m.is_zero()) {
                return Err(ProbeError::BadParameter(format!(
                    "log-Gaussian positions must be positive, got {}",
                    bad.to_f64()
                )));
            }
        }
        Ok(())
    }
}

/// Overlaps `h_k = ⟨h, e_k⟩` of one probe centred at `mu` with every box.
pub fn overlaps(
    ctx: &PrecisionContext,
    basis: &BoxBasis,
    kind: ProbeKind,
    sigma: &Scalar,
    mu: &Scalar,
) -> Result<Vec<Scalar>, ProbeError> {
    let bits = ctx.bits();
    let pi = ctx.pi();
    let grid = &basis.grid;
    match (kind, grid.measure) {
        (ProbeKind::Gaussian, Measure::Lebesgue) => {
            // n_k (πσ²)^{-1/4} σ √(π/2) [erf((b−μ)/(σ√2)) − erf((a−μ)/(σ√2))]
            let sigma2 = Float::with_val(bits, sigma.square_ref());
            let norm = Float::with_val(bits, &pi * &sigma2).sqrt().sqrt().recip();
            let scale = Float::with_val(bits, sigma * ctx.scalar(2).sqrt());
            let pref = norm * sigma * Float::with_val(bits, &pi / 2u32).sqrt();
            let e: Vec<Scalar> = grid
                .breakpoints
                .iter()
                .map(|x| erf(ctx, &(Float::with_val(bits, x - mu) / &scale)))
                .collect();
            Ok((0..basis.dim())
                .map(|k| Float::with_val(bits, &e[k + 1] - &e[k]) * &pref * &basis.norms[k])
                .collect())
        }
        (ProbeKind::LogGaussian, Measure::RadialR2) => {
            let (s, nu, norm) = log_gaussian_params(ctx, sigma, mu);
            // n_k N e^{3ν/2 + 9s²/4} s√π [erf((ln b − c)/(2s)) − erf((ln a − c)/(2s))], c = ν + 3s²
            let s2 = Float::with_val(bits, s.square_ref());
            let c = Float::with_val(bits, &nu + Float::with_val(bits, &s2 * 3u32));
            let expo = Float::with_val(bits, &nu * 3u32) / 2u32 + Float::with_val(bits, &s2 * 9u32) / 4u32;
            let pref = norm * expo.exp() * &s * pi.sqrt();
            let two_s = Float::with_val(bits, &s * 2u32);
            let e: Vec<Scalar> = grid
                .breakpoints
                .iter()
                .map(|r| {
                    if r.is_zero() {
                        ctx.scalar(-1)
                    } else {
                        let t = Float::with_val(bits, r.ln_ref()) - &c;
                        erf(ctx, &(t / &two_s))
                    }
                })
                .collect();
            Ok((0..basis.dim())
                .map(|k| Float::with_val(bits, &e[k + 1] - &e[k]) * &pref * &basis.norms[k])
                .collect())
        }
        (ProbeKind::Gaussian, _) => Err(ProbeError::MeasureMismatch {
            kind: "gaussian",
            measure: "lebesgue",
        }),
        (ProbeKind::LogGaussian, _) => Err(ProbeError::MeasureMismatch {
            kind: "log-gaussian",
            measure: "radial",
        }),
    }
}

/// `(s, ν, N)` with `s² = log α`, `ν = log(μ/α)`, `N = (2π s²)^{-1/4}`.
fn log_gaussian_params(ctx: &PrecisionContext, sigma: &Scalar, mu: &Scalar) -> (Scalar, Scalar, Scalar) {
    let bits = ctx.bits();
    let ratio = Float::with_val(bits, sigma / mu);
    let alpha = (Float::with_val(bits, ratio.square_ref()) + 1u32).sqrt();
    let s2 = Float::with_val(bits, alpha.ln_ref());
    let nu = Float::with_val(bits, mu / &alpha).ln();
    let norm = (Float::with_val(bits, &s2 * ctx.pi()) * 2u32).sqrt().sqrt().recip();
    (s2.sqrt(), nu, norm)
}

/// Pointwise value of a probe, for quadrature cross-checks.
pub fn probe_value(ctx: &PrecisionContext, kind: ProbeKind, sigma: &Scalar, mu: &Scalar, x: &Scalar) -> Scalar {
    let bits = ctx.bits();
    match kind {
        ProbeKind::Gaussian => {
            let sigma2 = Float::with_val(bits, sigma.square_ref());
            let norm = Float::with_val(bits, &sigma2 * ctx.pi()).sqrt().sqrt().recip();
            let d = Float::with_val(bits, x - mu);
            let arg = Float::with_val(bits, d.square_ref()) / (sigma2 * 2u32);
            norm * (-arg).exp()
        }
        ProbeKind::LogGaussian => {
            let (s, nu, norm) = log_gaussian_params(ctx, sigma, mu);
            let t = Float::with_val(bits, x.ln_ref()) - nu;
            let s2 = Float::with_val(bits, s.square_ref());
            let arg = Float::with_val(bits, t.square_ref()) / (s2 * 4u32);
            let r32 = Float::with_val(bits, x.sqrt_ref()) * x;
            norm * (-arg).exp() / r32
        }
    }
}

/// Bilinear form `h₁ᵀ M h₂`.
pub fn smear(m: &SymMatrix, h1: &[Scalar], h2: &[Scalar]) -> Result<Scalar, ProbeError> {
    let n = m.dim();
    for len in [h1.len(), h2.len()] {
        if len != n {
            return Err(ProbeError::DimensionMismatch { got: len, expected: n });
        }
    }
    let bits = m.bits();
    let mut total = Float::new(bits);
    let mut row = Float::new(bits);
    for i in 0..n {
        row.assign(0u32);
        for (j, y) in h2.iter().enumerate() {
            row += m.get(i, j) * y;
        }
        total += &row * &h1[i];
    }
    Ok(total)
}

/// Quadratic form `hᵀ M h`.
pub fn smear_diagonal(m: &SymMatrix, h: &[Scalar]) -> Result<Scalar, ProbeError> {
    smear(m, h, h)
}

/// Analytic comparison values for smeared diagonals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReferenceKind {
    /// Exact wedge multiplier `2πx`: `2πμ`.
    Wedge,
    /// Massless quadratic multiplier on the interval: `π(1 − σ²/2 − μ²)`.
    Qd2,
    /// Piecewise-linear double-wedge bound `2π(1 − |x|)`:
    /// `2π(1 − μ erf(μ/σ)) − 2σ√π e^{−μ²/σ²}`.
    Pl2,
    /// Massless quadratic multiplier on the ball, `π(1 − r²)`, smeared
    /// against the normalized log-Gaussian: `π(1 − μ²)`.
    Qd4,
}

impl ReferenceKind {
    pub fn name(self) -> &'static str {
        match self {
            ReferenceKind::Wedge => "wedge",
            ReferenceKind::Qd2 => "qd2",
            ReferenceKind::Pl2 => "pl2",
            ReferenceKind::Qd4 => "qd4",
        }
    }

    /// Column suffix in report files (`ref_<col>`, `err_<col>`).
    pub fn column(self) -> &'static str {
        match self {
            ReferenceKind::Wedge => "wedge",
            ReferenceKind::Qd2 | ReferenceKind::Qd4 => "qd",
            ReferenceKind::Pl2 => "pl",
        }
    }

    pub fn for_scenario(scenario: Scenario) -> &'static [ReferenceKind] {
        match scenario {
            Scenario::Wedge2d => &[ReferenceKind::Wedge],
            Scenario::Cone2d => &[ReferenceKind::Qd2, ReferenceKind::Pl2],
            Scenario::Cone4d => &[ReferenceKind::Qd4],
        }
    }
}

impl fmt::Display for ReferenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReferenceKind {
    type Err = ProbeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [ReferenceKind::Wedge, ReferenceKind::Qd2, ReferenceKind::Pl2, ReferenceKind::Qd4]
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| ProbeError::BadParameter(format!("unknown reference {s:?}")))
    }
}

pub fn reference(ctx: &PrecisionContext, kind: ReferenceKind, mu: &Scalar, sigma: &Scalar) -> Scalar {
    let bits = ctx.bits();
    let pi = ctx.pi();
    let mu2 = Float::with_val(bits, mu.square_ref());
    match kind {
        ReferenceKind::Wedge => pi * mu * 2u32,
        ReferenceKind::Qd2 => {
            let s2 = Float::with_val(bits, sigma.square_ref()) / 2u32;
            pi * (ctx.one() - s2 - mu2)
        }
        ReferenceKind::Pl2 => {
            let e = erf(ctx, &Float::with_val(bits, mu / sigma));
            let linear = Float::with_val(bits, &pi * 2u32) * (ctx.one() - e * mu);
            let s2 = Float::with_val(bits, sigma.square_ref());
            let gauss = (-(mu2 / s2)).exp() * sigma * Float::with_val(bits, pi.sqrt_ref()) * 2u32;
            linear - gauss
        }
        ReferenceKind::Qd4 => pi * (ctx.one() - mu2),
    }
}

/// `|1 − value/reference|`.
pub fn relative_error(value: &Scalar, reference: &Scalar) -> Result<Scalar, ProbeError> {
    if reference.is_zero() {
        return Err(ProbeError::ZeroReference);
    }
    let bits = value.prec().max(reference.prec());
    Ok((Float::with_val(bits, 1u32) - Float::with_val(bits, value / reference)).abs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmearRow {
    pub mu: Scalar,
    pub value: Scalar,
    pub references: Vec<(ReferenceKind, Scalar)>,
    /// `None` where the reference vanishes.
    pub rel_errors: Vec<(ReferenceKind, Option<Scalar>)>,
}

impl SmearRow {
    pub fn reference(&self, kind: ReferenceKind) -> Option<&Scalar> {
        self.references.iter().find(|(k, _)| *k == kind).map(|(_, v)| v)
    }

    pub fn rel_error(&self, kind: ReferenceKind) -> Option<&Scalar> {
        self.rel_errors
            .iter()
            .find(|(k, _)| *k == kind)
            .and_then(|(_, v)| v.as_ref())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmearReport {
    pub kinds: Vec<ReferenceKind>,
    pub rows: Vec<SmearRow>,
}

impl SmearReport {
    pub fn row_at(&self, mu: f64) -> Option<&SmearRow> {
        self.rows.iter().find(|r| (r.mu.to_f64() - mu).abs() < 1e-12)
    }
}

/// Smears `m` against every probe and compares with `kinds`.
pub fn smear_report(
    ctx: &PrecisionContext,
    basis: &BoxBasis,
    m: &SymMatrix,
    probes: &ProbeSet,
    kinds: &[ReferenceKind],
) -> Result<SmearReport, ProbeError> {
    probes.validate()?;
    let rows = probes
        .positions
        .par_iter()
        .map(|mu| {
            let h = overlaps(ctx, basis, probes.kind, &probes.sigma, mu)?;
            let value = smear_diagonal(m, &h)?;
            let references: Vec<(ReferenceKind, Scalar)> = kinds
                .iter()
                .map(|&k| (k, reference(ctx, k, mu, &probes.sigma)))
                .collect();
            let rel_errors = references
                .iter()
                .map(|(k, r)| (*k, relative_error(&value, r).ok()))
                .collect();
            Ok(SmearRow {
                mu: mu.clone(),
                value,
                references,
                rel_errors,
            })
        })
        .collect::<Result<Vec<_>, ProbeError>>()?;
    Ok(SmearReport {
        kinds: kinds.to_vec(),
        rows,
    })
}

/// Largest `|h_iᵀ M h_j|` over probe pairs with `|μ_i − μ_j| > gap`,
/// relative to the diagonal value at `μ_i`.
pub fn off_diagonal_ratio(
    ctx: &PrecisionContext,
    basis: &BoxBasis,
    m: &SymMatrix,
    probes: &ProbeSet,
    gap: f64,
) -> Result<f64, ProbeError> {
    let hs = probes
        .positions
        .iter()
        .map(|mu| overlaps(ctx, basis, probes.kind, &probes.sigma, mu))
        .collect::<Result<Vec<_>, _>>()?;
    let mut worst = 0.0f64;
    for (i, hi) in hs.iter().enumerate() {
        let diag = smear(m, hi, hi)?.to_f64().abs();
        for (j, hj) in hs.iter().enumerate() {
            let dist = (probes.positions[i].to_f64() - probes.positions[j].to_f64()).abs();
            if dist > gap {
                let off = smear(m, hi, hj)?.to_f64().abs();
                worst = worst.max(off / diag);
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{build_grid, normalize, TaperMode};
    use crate::highprec::agreeing_digits;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(40).unwrap()
    }

    #[test]
    fn reference_values() {
        let c = ctx();
        let sigma = c.scalar(6) / 64u32;
        let half = c.scalar(0.5);
        assert!(agreeing_digits(&reference(&c, ReferenceKind::Wedge, &half, &sigma), &c.pi(), 0.0) >= 40);
        let qd = reference(&c, ReferenceKind::Qd2, &c.zero(), &sigma).to_f64();
        assert!((qd - 3.1277868265).abs() < 1e-9, "{qd}");
        let pl = reference(&c, ReferenceKind::Pl2, &c.zero(), &sigma).to_f64();
        assert!((pl - 5.9508502101).abs() < 1e-9, "{pl}");
    }

    #[test]
    fn relative_error_basics() {
        let c = ctx();
        assert!(relative_error(&c.pi(), &c.pi()).unwrap().is_zero());
        let r = c.scalar(3);
        let v = Float::with_val(c.bits(), &r * c.scalar(9)) / 10u32;
        assert!((relative_error(&v, &r).unwrap().to_f64() - 0.1).abs() < 1e-30);
        assert_eq!(relative_error(&v, &c.zero()), Err(ProbeError::ZeroReference));
    }

    #[test]
    fn gaussian_overlaps_are_normalized_and_even() {
        let c = ctx();
        // Box projection loses a fraction ~h²/(24σ²) of the norm.
        let g = build_grid(&c, Scenario::Wedge2d, 256, &c.scalar(4), TaperMode::default()).unwrap();
        let basis = normalize(&g);
        let sigma = c.scalar(6) / 32u32;
        let h = overlaps(&c, &basis, ProbeKind::Gaussian, &sigma, &c.zero()).unwrap();
        let total: f64 = h.iter().map(|x| x.to_f64().powi(2)).sum();
        assert!(total <= 1.0 && total > 0.997, "{total}");
        for k in 0..256 {
            assert!(agreeing_digits(&h[k], &h[255 - k], 1e-30) >= 30);
        }
    }

    #[test]
    fn log_gaussian_overlaps_are_normalized() {
        let c = ctx();
        let g = build_grid(&c, Scenario::Cone4d, 256, &c.scalar(4), TaperMode::default()).unwrap();
        let basis = normalize(&g);
        let sigma = c.scalar(6) / 128u32;
        let h = overlaps(&c, &basis, ProbeKind::LogGaussian, &sigma, &c.scalar(0.5)).unwrap();
        let total: f64 = h.iter().map(|x| x.to_f64().powi(2)).sum();
        assert!(total <= 1.0 && total > 0.995, "{total}");
    }

    #[test]
    fn identity_smears_to_norm() {
        let c = ctx();
        let g = build_grid(&c, Scenario::Wedge2d, 64, &c.scalar(4), TaperMode::default()).unwrap();
        let basis = normalize(&g);
        let sigma = c.scalar(6) / 32u32;
        let h = overlaps(&c, &basis, ProbeKind::Gaussian, &sigma, &c.scalar(0.3)).unwrap();
        let id = SymMatrix::identity(64, c.bits());
        let v = smear_diagonal(&id, &h).unwrap().to_f64();
        let norm2: f64 = h.iter().map(|x| x.to_f64().powi(2)).sum();
        assert!((v - norm2).abs() < 1e-14 && v > 0.97 && v < 1.0, "{v}");
        let h2: Vec<Scalar> = h.iter().map(|x| Float::with_val(c.bits(), x * 2u32)).collect();
        let v2 = smear_diagonal(&id, &h2).unwrap().to_f64();
        assert!((v2 - 4.0 * v).abs() < 1e-25);
    }

    #[test]
    fn wrong_measure_rejected() {
        let c = ctx();
        let g = build_grid(&c, Scenario::Cone4d, 8, &c.scalar(4), TaperMode::default()).unwrap();
        let basis = normalize(&g);
        assert!(overlaps(&c, &basis, ProbeKind::Gaussian, &c.one(), &c.one()).is_err());
    }
}

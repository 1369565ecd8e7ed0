//! The desk-scale acceptance suite. Each criterion is a function of a
//! [`Validator`], which memoizes scenario runs so that criteria sharing a
//! configuration do the work once.

pub mod oracles;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;

use rug::ops::Pow;
use rug::Float;

use crate::discretize::{build_grid, normalize, Grid, Measure, Scenario, TaperMode};
use crate::highprec::{
    agreeing_digits, arcoth, bessel_half_integer, bessel_i_series, bessel_k_quarter, erf,
    format_sig, gauss_legendre, PrecisionContext, Scalar,
};
use crate::kernels::{antiderivative_f, assemble_am14_2d, assemble_ainv_4d, KernelSpec};
use crate::modular::Diagnostics;
use crate::probes::{ReferenceKind, SmearReport};
use crate::scenario::{evaluate_config, run_scenario, Emit, ScenarioConfig};

/// Relative-error gates of the wedge exactness criterion.
pub const WEDGE_MAX_ERROR: f64 = 5e-2;
pub const WEDGE_MEDIAN_ERROR: f64 = 2e-2;

/// Probe positions used by the 1+1 dimensional criteria.
pub const WEDGE_PROBES: &str = "-1,-0.75,-0.5,-0.25,0.25,0.5,0.75,1";
pub const CONE_PROBES: &str = "-0.8,-0.6,-0.4,-0.2,0,0.2,0.4,0.6,0.8";
pub const CONE4D_PROBES: &str = "0.3,0.8";

pub const WEDGE_DIGITS: u32 = 250;
pub const CONE4D_DIGITS: u32 = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {:>3} {:<31} {}", self.id, self.name, self.detail)
    }
}

fn result(id: &'static str, name: &'static str, passed: bool, detail: String) -> CriterionResult {
    CriterionResult {
        id,
        name,
        passed,
        detail,
    }
}

/// Outcome of one memoized run.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub digits: u32,
    pub report: SmearReport,
    pub diagnostics: Diagnostics,
    pub m_plus_max: Scalar,
}

impl RunRecord {
    pub fn value_at(&self, mu: f64) -> Option<f64> {
        self.report.row_at(mu).map(|r| r.value.to_f64())
    }
}

pub fn wedge_config(n: usize, mass: &str) -> ScenarioConfig {
    ScenarioConfig {
        n,
        mass: mass.into(),
        digits: Some(WEDGE_DIGITS),
        probes: Some(WEDGE_PROBES.into()),
        ..ScenarioConfig::new(Scenario::Wedge2d)
    }
}

pub fn cone2d_config(mass: &str) -> ScenarioConfig {
    ScenarioConfig {
        n: 128,
        mass: mass.into(),
        digits: Some(WEDGE_DIGITS),
        probes: Some(CONE_PROBES.into()),
        ..ScenarioConfig::new(Scenario::Cone2d)
    }
}

pub fn cone4d_config(mass: &str, ell: u32) -> ScenarioConfig {
    ScenarioConfig {
        n: 64,
        mass: mass.into(),
        ell,
        digits: Some(CONE4D_DIGITS),
        probes: Some(CONE4D_PROBES.into()),
        ..ScenarioConfig::new(Scenario::Cone4d)
    }
}

/// Every scenario configuration the criteria touch.
pub fn desk_runs() -> Vec<ScenarioConfig> {
    let mut v = vec![wedge_config(32, "1"), wedge_config(64, "1")];
    v.extend(["0.2", "1", "5"].map(|m| wedge_config(128, m)));
    v.extend(["0.1", "1", "10"].map(cone2d_config));
    for ell in 0..2 {
        v.extend(["0.1", "1", "5"].map(|m| cone4d_config(m, ell)));
    }
    v
}

/// Wedge exactness check on a report: maximum and median relative error
/// against `2πμ` below the gates.
pub fn check_wedge_exactness(report: &SmearReport) -> (bool, String) {
    let mut errors: Vec<f64> = report
        .rows
        .iter()
        .filter_map(|r| r.rel_error(ReferenceKind::Wedge).map(Scalar::to_f64))
        .collect();
    if errors.is_empty() {
        return (false, "no probes with a nonzero reference".into());
    }
    errors.sort_by(f64::total_cmp);
    let max = *errors.last().expect("nonempty");
    let mid = errors.len() / 2;
    let median = if errors.len() % 2 == 0 {
        0.5 * (errors[mid - 1] + errors[mid])
    } else {
        errors[mid]
    };
    let ok = max < WEDGE_MAX_ERROR && median < WEDGE_MEDIAN_ERROR;
    (ok, format!("max err {max:.3e}, median {median:.3e}"))
}

/// Gates every run must satisfy; `Err` lists the violations.
pub fn check_gates(record: &RunRecord) -> Result<(), String> {
    let d = &record.diagnostics;
    let ctx = PrecisionContext::new(record.digits).map_err(|e| e.to_string())?;
    let mut bad = Vec::new();
    if !(d.spectral_margin.is_sign_positive() && !d.spectral_margin.is_zero()) {
        bad.push(format!("margin {}", format_sig(&d.spectral_margin, 3)));
    }
    if d.inverse_residual >= ctx.pow10(-(record.digits as i32) / 2) {
        bad.push(format!("inverse residual {}", format_sig(&d.inverse_residual, 3)));
    }
    let bound = ctx.pow10(-(record.digits as i32) / 4) * &record.m_plus_max;
    if d.identity_residual >= bound {
        bad.push(format!("identity residual {}", format_sig(&d.identity_residual, 3)));
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(bad.join(", "))
    }
}

/// Memoizing driver for the criteria.
#[derive(Debug, Default)]
pub struct Validator {
    runs: BTreeMap<String, Result<RunRecord, String>>,
}

impl Validator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Runs (or recalls) a configuration.
    pub fn run(&mut self, config: &ScenarioConfig) -> Result<RunRecord, String> {
        let key = config.serialize();
        self.runs
            .entry(key)
            .or_insert_with(|| {
                evaluate_config(config)
                    .map(|(_, e, _)| RunRecord {
                        digits: config.digits(),
                        m_plus_max: e.m_plus.max_abs(),
                        report: e.report,
                        diagnostics: e.diagnostics,
                    })
                    .map_err(|e| format!("{} n={} m={}: {e}", config.scenario, config.n, config.mass))
            })
            .clone()
    }

    pub fn criterion(&mut self, id: &str) -> Option<CriterionResult> {
        Some(match id {
            "1" => self.wedge_exactness(),
            "2" => self.resolution_convergence(),
            "3" => self.wedge_mass_independence(),
            "4" => self.cone2d_sandwich(),
            "5" => self.small_mass_limit(),
            "6a" => self.cone4d_boundary_mass_independence(),
            "6b" => self.cone4d_ell_dependence(),
            "7" => self.validity_gates(),
            "8" => oracle_equivalence(),
            "9" => special_function_suite(),
            "10" => determinism(),
            _ => return None,
        })
    }

    pub fn all(&mut self) -> Vec<CriterionResult> {
        CRITERIA.iter().filter_map(|id| self.criterion(id)).collect()
    }

    pub fn wedge_exactness(&mut self) -> CriterionResult {
        let name = "wedge exactness";
        match self.run(&wedge_config(128, "1")) {
            Ok(r) => {
                let (ok, detail) = check_wedge_exactness(&r.report);
                result("1", name, ok, detail)
            }
            Err(e) => result("1", name, false, e),
        }
    }

    pub fn resolution_convergence(&mut self) -> CriterionResult {
        let name = "resolution convergence";
        let mut errs = Vec::new();
        for n in [32, 64, 128] {
            match self.run(&wedge_config(n, "1")) {
                Ok(r) => errs.push(
                    r.report
                        .row_at(0.5)
                        .and_then(|row| row.rel_error(ReferenceKind::Wedge))
                        .map_or(f64::NAN, Scalar::to_f64),
                ),
                Err(e) => return result("2", name, false, e),
            }
        }
        let ok = errs.windows(2).all(|w| w[1] < w[0]);
        let detail = format!("err(0.5) at n=32/64/128: {:.3e} / {:.3e} / {:.3e}", errs[0], errs[1], errs[2]);
        result("2", name, ok, detail)
    }

    pub fn wedge_mass_independence(&mut self) -> CriterionResult {
        let name = "wedge mass independence";
        let mut runs = Vec::new();
        for m in ["0.2", "1", "5"] {
            match self.run(&wedge_config(128, m)) {
                Ok(r) => runs.push(r),
                Err(e) => return result("3", name, false, e),
            }
        }
        let mut worst = 0.0f64;
        for mu in [-0.75, -0.5, -0.25, 0.25, 0.5, 0.75] {
            let vals: Vec<f64> = runs.iter().filter_map(|r| r.value_at(mu)).collect();
            let spread = vals.iter().cloned().fold(f64::MIN, f64::max) - vals.iter().cloned().fold(f64::MAX, f64::min);
            worst = worst.max(spread / (2.0 * std::f64::consts::PI * mu.abs()));
        }
        result("3", name, worst < 0.03, format!("largest pairwise difference {:.2}% of 2π|μ| (gate 3%)", 100.0 * worst))
    }

    pub fn cone2d_sandwich(&mut self) -> CriterionResult {
        let name = "double-cone sandwich";
        let mut at_zero = Vec::new();
        let mut violations = Vec::new();
        for m in ["0.1", "1", "10"] {
            let r = match self.run(&cone2d_config(m)) {
                Ok(r) => r,
                Err(e) => return result("4", name, false, e),
            };
            for row in &r.report.rows {
                let v = row.value.to_f64();
                let qd = row.reference(ReferenceKind::Qd2).map_or(f64::NAN, Scalar::to_f64);
                let pl = row.reference(ReferenceKind::Pl2).map_or(f64::NAN, Scalar::to_f64);
                if !(qd * 0.95 <= v && v <= pl * 1.05) {
                    violations.push(format!("m={m} μ={:.1}", row.mu.to_f64()));
                }
            }
            at_zero.push(r.value_at(0.0).unwrap_or(f64::NAN));
        }
        let increasing = at_zero.windows(2).all(|w| w[1] > w[0]);
        let ok = violations.is_empty() && increasing;
        let mut detail = format!(
            "μ=0 values {:.4} / {:.4} / {:.4} for m=0.1/1/10",
            at_zero[0], at_zero[1], at_zero[2]
        );
        if !violations.is_empty() {
            detail.push_str(&format!("; outside band: {}", violations.join(", ")));
        }
        result("4", name, ok, detail)
    }

    pub fn small_mass_limit(&mut self) -> CriterionResult {
        let name = "small-mass limit";
        match self.run(&cone2d_config("0.1")) {
            Ok(r) => {
                let row = r.report.row_at(0.0).expect("μ = 0 probe");
                let qd = row.reference(ReferenceKind::Qd2).expect("qd column").to_f64();
                let v = row.value.to_f64();
                let err = (1.0 - v / qd).abs();
                result("5", name, err < 0.05, format!("m=0.1 μ=0: {v:.4} vs qd {qd:.4}, deviation {:.2}% (gate 5%)", 100.0 * err))
            }
            Err(e) => result("5", name, false, e),
        }
    }

    pub fn cone4d_boundary_mass_independence(&mut self) -> CriterionResult {
        let name = "4D boundary mass independence";
        let mut parts = Vec::new();
        let mut ok = true;
        for ell in 0..2 {
            let mut vals = Vec::new();
            for m in ["0.1", "1", "5"] {
                match self.run(&cone4d_config(m, ell)) {
                    Ok(r) => vals.push(r.value_at(0.8).unwrap_or(f64::NAN)),
                    Err(e) => return result("6a", name, false, e),
                }
            }
            let lo = vals.iter().cloned().fold(f64::MAX, f64::min);
            let hi = vals.iter().cloned().fold(f64::MIN, f64::max);
            let spread = hi / lo - 1.0;
            ok &= spread < 0.03;
            parts.push(format!("ℓ={ell}: r=0.8 spread {:.2}%", 100.0 * spread));
        }
        result("6a", name, ok, format!("{} (gate 3%)", parts.join(", ")))
    }

    pub fn cone4d_ell_dependence(&mut self) -> CriterionResult {
        let name = "4D angular dependence";
        let (r0, r1) = match (self.run(&cone4d_config("1", 0)), self.run(&cone4d_config("1", 1))) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return result("6b", name, false, e),
        };
        let v0 = &r0.report.row_at(0.3).expect("r = 0.3 probe").value;
        let v1 = &r1.report.row_at(0.3).expect("r = 0.3 probe").value;
        let diff = Float::with_val(v0.prec(), v0 - v1).abs();
        let res = r0.diagnostics.inverse_residual.clone().max(&r1.diagnostics.inverse_residual);
        let ok = diff > Float::with_val(res.prec(), &res * 10u32);
        result(
            "6b",
            name,
            ok,
            format!("|Δ| = {} vs inverse residual {}", format_sig(&diff, 4), format_sig(&res, 3)),
        )
    }

    pub fn validity_gates(&mut self) -> CriterionResult {
        let name = "validity gates";
        let configs = desk_runs();
        let mut failures = Vec::new();
        let mut worst_margin: Option<Scalar> = None;
        for c in &configs {
            match self.run(c) {
                Ok(r) => {
                    if let Err(e) = check_gates(&r) {
                        failures.push(format!("{} n={} m={} ℓ={}: {e}", c.scenario, c.n, c.mass, c.ell));
                    }
                    let m = r.diagnostics.spectral_margin.clone();
                    worst_margin = Some(match worst_margin {
                        Some(w) if w < m => w,
                        _ => m,
                    });
                }
                Err(e) => failures.push(e),
            }
        }
        let detail = if failures.is_empty() {
            format!(
                "{} runs, smallest margin {}",
                configs.len(),
                worst_margin.map_or("-".into(), |m| format_sig(&m, 3))
            )
        } else {
            failures.join("; ")
        };
        result("7", name, failures.is_empty(), detail)
    }
}

pub const CRITERIA: [&str; 11] = ["1", "2", "3", "4", "5", "6a", "6b", "7", "8", "9", "10"];

/// Production kernels against independent oracles.
pub fn oracle_equivalence() -> CriterionResult {
    let name = "oracle equivalence";
    let ctx = PrecisionContext::new(50).expect("valid digits");
    let four = ctx.scalar(4);
    let run = || -> Result<(u32, u32), String> {
        let grid = build_grid(&ctx, Scenario::Wedge2d, 8, &four, TaperMode::default()).map_err(|e| e.to_string())?;
        let basis = normalize(&grid);
        let m = ctx.one();
        let prod = assemble_am14_2d(&ctx, &basis, &m).map_err(|e| e.to_string())?;
        let oracle = oracles::kernel_2d_bruteforce(&ctx, &basis, &m).map_err(|e| e.to_string())?;
        let d2 = min_agreement(&prod, &oracle).min(ctx.digits());

        // Four radial cells of unequal width, two inside the unit ball.
        let grid4 = Grid {
            breakpoints: ["0", "0.5", "1", "2", "4"].iter().map(|s| ctx.parse(s).expect("literal")).collect(),
            measure: Measure::RadialR2,
            inside: vec![true, true, false, false],
        };
        let basis4 = normalize(&grid4);
        let prod4 = assemble_ainv_4d(&ctx, &basis4, 0, &m, KernelSpec::DEFAULT_QUAD_ORDER).map_err(|e| e.to_string())?;
        let oracle4 = oracles::ainv_4d_ell0_closed_form(&ctx, &basis4, &m);
        Ok((d2, min_agreement(&prod4, &oracle4).min(ctx.digits())))
    };
    match run() {
        Ok((d2, d4)) => result(
            "8",
            name,
            d2 >= 25 && d4 >= 25,
            format!("2D 8-cell: {d2} digits, 4D 4-cell: {d4} digits (gate 25)"),
        ),
        Err(e) => result("8", name, false, e),
    }
}

fn min_agreement(a: &crate::linalg::SymMatrix, b: &crate::linalg::SymMatrix) -> u32 {
    let n = a.dim();
    let mut worst = u32::MAX;
    for i in 0..n {
        for j in 0..=i {
            worst = worst.min(agreeing_digits(a.get(i, j), b.get(i, j), 0.0));
        }
    }
    worst
}

/// One special-function check: name, digits achieved, digits required.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecialCheck {
    pub name: &'static str,
    pub digits: u32,
    pub required: u32,
}

impl SpecialCheck {
    pub fn passed(&self) -> bool {
        self.digits >= self.required
    }
}

/// The special-function examples at `digits` of precision. Value checks
/// need `digits − 10` agreeing places; the fixed 20-point rule on `e^x`
/// is held to its own 30-digit bound.
pub fn special_function_checks(digits: u32) -> Vec<SpecialCheck> {
    let ctx = PrecisionContext::new(digits).expect("valid digits");
    let hi = ctx.scaled(3);
    let bits = ctx.bits();
    let need = digits - 10;
    let mut out = Vec::new();
    let mut push = |name, got: u32, required| out.push(SpecialCheck { name, digits: got.min(digits), required });
    let agree = |a: &Scalar, b: &Scalar| agreeing_digits(a, b, 0.0);

    let two = ctx.scalar(2);
    let half_ln3 = ctx.round(&(hi.scalar(3).ln() / 2u32));
    let a2 = arcoth(&ctx, &two).expect("outside band");
    push("arcoth(2) = ln(3)/2", agree(&a2, &half_ln3), need);
    let am2 = arcoth(&ctx, &(-two.clone())).expect("outside band");
    push("arcoth(-2) = -arcoth(2)", agree(&am2, &(-a2.clone())), need);
    let near = ctx.one() + ctx.pow10(-50);
    let an = arcoth(&ctx, &near).expect("outside band");
    push("arcoth(1 + 1e-50)", agree(&an, &oracles::arcoth_oracle(&ctx, &near)), need);

    let tiny = ctx.pow10(-(2 * digits as i32));
    let k_tiny = bessel_k_quarter(&ctx, &tiny).expect("positive");
    let lhs = k_tiny * Float::with_val(bits, tiny.pow(0.25f64));
    let rhs = ctx.gamma_quarter() * ctx.scalar(2).pow(0.25f64) / 2u32;
    push("K_1/4(z) z^1/4 as z -> 0", agree(&lhs, &rhs), need);
    let quarter = hi.scalar(0.25);
    for (name, z, required) in [("K_1/4(1)", 1u32, digits - 5), ("K_1/4(50)", 50, need)] {
        let z = ctx.scalar(z);
        let k = bessel_k_quarter(&ctx, &z).expect("positive");
        let oracle = oracles::bessel_k_integral(&hi, &quarter, &hi.round(&z));
        push(name, agree(&k, &oracle), required);
    }

    // Half-integer orders against the general ascending series,
    // K_{1/2} = (π/2)(I_{−1/2} − I_{1/2}).
    let hb = hi.bits();
    let series = |nu: f64, z: u32| {
        let nu = hi.scalar(nu);
        let g = Float::with_val(hb, &nu + 1u32).gamma();
        bessel_i_series(hb, &nu, &g, &hi.scalar(z))
    };
    let (i0, k0) = bessel_half_integer(&ctx, 0, &ctx.one()).expect("positive");
    push("I_1/2(1)", agree(&i0, &series(0.5, 1)), need);
    let k_half_1 = (series(-0.5, 1) - series(0.5, 1)) * hi.pi() / 2u32;
    push("K_1/2(1)", agree(&k0, &k_half_1), need);
    let (_, k1) = bessel_half_integer(&ctx, 1, &two).expect("positive");
    let closed = (hi.pi() / 4u32).sqrt() * Float::with_val(hb, -hi.scalar(2)).exp() * 1.5f64;
    push("K_3/2(2)", agree(&k1, &closed), need);
    let three = ctx.scalar(3);
    let (ia, ka) = bessel_half_integer(&ctx, 0, &three).expect("positive");
    let (ib, kb) = bessel_half_integer(&ctx, 1, &three).expect("positive");
    // I K' − I' K = −(I_{1/2} K_{3/2} + I_{3/2} K_{1/2}) = −1/z
    let wronskian = ia * kb + ib * ka;
    push("Wronskian at z = 3", agree(&wronskian, &(ctx.one() / 3u32)), need);

    let e0 = erf(&ctx, &ctx.zero());
    push("erf(0) = 0", if e0.is_zero() { u32::MAX } else { 0 }, need);
    let e10 = erf(&ctx, &ctx.scalar(10));
    let eps = ctx.one() - &e10;
    let saturated = !eps.is_sign_negative() && eps < ctx.pow10(-40);
    push("erf(10) = 1 - eps, eps < 1e-40", if saturated { u32::MAX } else { 0 }, need);
    let e1 = erf(&ctx, &ctx.one());
    push("erf(1)", agree(&e1, &oracles::erf_oracle(&ctx, &ctx.one())), need);

    let g2 = gauss_legendre(&ctx, 2);
    let inv_sqrt3 = ctx.round(&hi.scalar(3).sqrt().recip());
    let node = g2.nodes.iter().map(|x| agree(&Float::with_val(bits, x.abs_ref()), &inv_sqrt3)).min().unwrap_or(0);
    push("GL k=2 nodes", node, need);
    let weight = g2.weights.iter().map(|w| agree(w, &ctx.one())).min().unwrap_or(0);
    push("GL k=2 weights", weight, need);
    let (lo, up) = (-ctx.one(), ctx.one());
    let x2 = g2.integrate(&lo, &up, |x| Float::with_val(bits, x.square_ref()));
    push("GL k=2 on x^2", agree(&x2, &(ctx.scalar(2) / 3u32)), need);
    let g20 = gauss_legendre(&ctx, 20);
    let ex = g20.integrate(&lo, &up, |x| x.clone().exp());
    let exact = ctx.one().exp() - (-ctx.one()).exp();
    push("GL k=20 on e^x", agree(&ex, &exact), 30);

    // Kernel antiderivative against Romberg on the kernel itself.
    let c80 = PrecisionContext::new(80).expect("valid digits");
    let x = c80.one() / 32u32;
    let series_f = antiderivative_f(&c80, &c80.one(), &x).expect("valid argument");
    let romberg = oracles::antiderivative_f_romberg(&c80, &c80.one(), &x);
    push("F(1/32), m = 1, at 80 digits", romberg.map_or(0, |r| agree(&series_f, &r)), 60);
    out
}

pub fn special_function_suite() -> CriterionResult {
    let checks = special_function_checks(120);
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed())
        .map(|c| format!("{} ({} < {})", c.name, c.digits, c.required))
        .collect();
    let weakest = checks
        .iter()
        .filter(|c| c.required > 30)
        .map(|c| c.digits)
        .min()
        .unwrap_or(0);
    let detail = if failed.is_empty() {
        format!("{} checks at 120 digits, weakest value check {weakest} places", checks.len())
    } else {
        failed.join("; ")
    };
    result("9", "special-function suite", failed.is_empty(), detail)
}

/// Runs a small wedge configuration four times (twice fresh, then to fill
/// and to hit a cache) and compares every written file bytewise.
pub fn determinism() -> CriterionResult {
    let name = "determinism";
    let run = || -> Result<(bool, String), String> {
        let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
        let cache = tmp.path().join("cache");
        let base = ScenarioConfig {
            n: 32,
            digits: Some(120),
            emit: Emit {
                report_csv: true,
                kernel_csv: true,
                matrices: true,
            },
            ..ScenarioConfig::new(Scenario::Wedge2d)
        };
        let mut outputs = Vec::new();
        for (k, cached) in [(0, false), (1, false), (2, true), (3, true)] {
            let config = ScenarioConfig {
                out: Some(tmp.path().join(format!("run{k}"))),
                cache_dir: cached.then(|| cache.clone()),
                ..base.clone()
            };
            let out = run_scenario(&config).map_err(|e| e.to_string())?;
            if k == 3 && !out.cache_hit {
                return Ok((false, "second cached run missed the cache".into()));
            }
            let mut files = Vec::new();
            for path in &out.written {
                let bytes = fs::read(path).map_err(|e| e.to_string())?;
                files.push((path.file_name().map(|f| f.to_os_string()), bytes));
            }
            outputs.push(files);
        }
        let same = outputs.windows(2).all(|w| w[0] == w[1]);
        Ok((same, format!("{} files per run, 2 fresh + 2 cached runs byte-identical", outputs[0].len())))
    };
    match run() {
        Ok((ok, detail)) => result("10", name, ok, detail),
        Err(e) => result("10", name, false, e),
    }
}

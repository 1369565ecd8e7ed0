use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::config::{ConfigError, ScenarioConfig};
use super::io::{self, IoError};
use crate::discretize::{build_grid, chi_diagonal, normalize, BoxBasis, DiscretizeError};
use crate::highprec::{format_exact, PrecisionContext, Scalar};
use crate::kernels::{assemble, KernelError, KernelSpec};
use crate::linalg::SymMatrix;
use crate::modular::{modular_from_kernel, Diagnostics, KernelPower, ModularError};
use crate::probes::{smear_report, ProbeError, ProbeKind, ProbeSet, ReferenceKind, SmearReport};

/// Environment variable naming the default cache directory.
pub const CACHE_ENV: &str = "MODGEN_CACHE_DIR";

/// A failure, tagged with the pipeline stage that produced it.
#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("discretization: {0}")]
    Discretize(#[from] DiscretizeError),
    #[error("kernel assembly: {0}")]
    Kernel(#[from] KernelError),
    #[error("modular operator: {0}")]
    Modular(#[from] ModularError),
    #[error("probe smearing: {0}")]
    Probes(#[from] ProbeError),
    #[error("output: {0}")]
    Io(#[from] IoError),
}

impl RunError {
    /// True for failures that more digits can cure.
    pub fn is_precision_failure(&self) -> bool {
        matches!(
            self,
            RunError::Modular(ModularError::PrecisionInsufficient { .. })
                | RunError::Modular(ModularError::InverseResidual { .. })
        )
    }
}

/// Grid, basis, projector and probes of a configuration at its precision.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: ScenarioConfig,
    pub ctx: PrecisionContext,
    pub basis: BoxBasis,
    pub chi: Vec<bool>,
    pub kernel_spec: KernelSpec,
    pub probes: ProbeSet,
}

/// Matrices, diagnostics and smeared report of one run.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub kernel: SymMatrix,
    pub m_minus: SymMatrix,
    pub m_plus: SymMatrix,
    pub diagnostics: Diagnostics,
    pub report: SmearReport,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Configuration actually run (digits raised if a retry happened).
    pub config: ScenarioConfig,
    pub evaluation: Evaluation,
    pub cache_hit: bool,
    pub written: Vec<PathBuf>,
}

pub fn prepare(config: &ScenarioConfig) -> Result<Prepared, RunError> {
    let ctx = config.context()?;
    let b = config.b_value(&ctx)?;
    let grid = build_grid(&ctx, config.scenario, config.n, &b, config.taper)?;
    let chi = chi_diagonal(&grid);
    let basis = normalize(&grid);
    let kernel_spec = KernelSpec {
        scenario: config.scenario,
        mass: config.mass_value(&ctx)?,
        ell: config.ell,
        quad_order: config.quad_order,
    };
    kernel_spec.validate()?;
    let probes = ProbeSet {
        kind: ProbeKind::for_scenario(config.scenario),
        sigma: config.sigma_value(&ctx)?,
        positions: config.probe_positions(&ctx)?,
    };
    probes.validate()?;
    Ok(Prepared {
        config: config.clone(),
        ctx,
        basis,
        chi,
        kernel_spec,
        probes,
    })
}

impl Prepared {
    pub fn power(&self) -> KernelPower {
        if self.config.scenario.is_four_dimensional() {
            KernelPower::D4
        } else {
            KernelPower::D2
        }
    }

    pub fn reference_kinds(&self) -> &'static [ReferenceKind] {
        ReferenceKind::for_scenario(self.config.scenario)
    }

    pub fn assemble_kernel(&self) -> Result<SymMatrix, RunError> {
        Ok(assemble(&self.ctx, &self.basis, &self.kernel_spec)?)
    }

    pub fn report(&self, m_minus: &SymMatrix) -> Result<SmearReport, RunError> {
        Ok(smear_report(&self.ctx, &self.basis, m_minus, &self.probes, self.reference_kinds())?)
    }

    /// Runs the modular pipeline on a given kernel matrix.
    pub fn evaluate(&self, kernel: SymMatrix) -> Result<Evaluation, RunError> {
        let result = modular_from_kernel(&self.ctx, &kernel, &self.chi, self.power())?;
        let report = self.report(&result.m_minus)?;
        Ok(Evaluation {
            kernel,
            m_minus: result.m_minus,
            m_plus: result.m_plus,
            diagnostics: result.diagnostics,
            report,
        })
    }

    /// Hash of everything the matrices depend on.
    pub fn cache_key(&self) -> String {
        let c = &self.config;
        let canonical = format!(
            "scenario={};n={};b={};mass={};ell={};digits={};quad_order={};taper={}",
            c.scenario,
            c.n,
            format_exact(self.basis.grid.breakpoints.last().expect("nonempty grid")),
            format_exact(&self.kernel_spec.mass),
            if c.scenario.is_four_dimensional() { c.ell } else { 0 },
            c.digits(),
            if c.scenario.is_four_dimensional() { c.quad_order } else { 0 },
            c.taper.name(),
        );
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

const DIAGNOSTIC_KEYS: [&str; 6] = [
    "spectral_margin",
    "inverse_residual",
    "symmetry_residual",
    "identity_residual",
    "spectral_asymmetry",
    "kernel_min_eigenvalue",
];

fn diagnostic_values(d: &Diagnostics) -> [&Scalar; 6] {
    [
        &d.spectral_margin,
        &d.inverse_residual,
        &d.symmetry_residual,
        &d.identity_residual,
        &d.spectral_asymmetry,
        &d.kernel_min_eigenvalue,
    ]
}

pub fn encode_diagnostics(d: &Diagnostics) -> String {
    let mut s = String::new();
    for (k, v) in DIAGNOSTIC_KEYS.iter().zip(diagnostic_values(d)) {
        let _ = writeln!(s, "{k} = {}", format_exact(v));
    }
    s
}

pub fn decode_diagnostics(ctx: &PrecisionContext, text: &str) -> Option<Diagnostics> {
    let mut values: Vec<Option<Scalar>> = vec![None; DIAGNOSTIC_KEYS.len()];
    for line in text.lines() {
        let (k, v) = line.split_once('=')?;
        let idx = DIAGNOSTIC_KEYS.iter().position(|key| *key == k.trim())?;
        values[idx] = Some(ctx.parse(v).ok()?);
    }
    let mut it = values.into_iter();
    let mut next = || it.next().flatten();
    Some(Diagnostics {
        spectral_margin: next()?,
        inverse_residual: next()?,
        symmetry_residual: next()?,
        identity_residual: next()?,
        spectral_asymmetry: next()?,
        kernel_min_eigenvalue: next()?,
    })
}

/// Cache directory from the configuration or the environment.
pub fn cache_dir(config: &ScenarioConfig) -> Option<PathBuf> {
    config
        .cache_dir
        .clone()
        .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
}

const KERNEL_FILE: &str = "kernel.mat";
const M_MINUS_FILE: &str = "m_minus.mat";
const M_PLUS_FILE: &str = "m_plus.mat";
const DIAGNOSTICS_FILE: &str = "diagnostics.txt";

fn load_cached(prepared: &Prepared, dir: &Path) -> Option<(SymMatrix, SymMatrix, SymMatrix, Diagnostics)> {
    // The diagnostics file is written last and marks a complete entry.
    let diag_text = fs::read_to_string(dir.join(DIAGNOSTICS_FILE)).ok()?;
    let load = |name: &str| match io::read_matrix(&dir.join(name)) {
        Ok((m, digits)) if digits == prepared.ctx.digits() && m.dim() == prepared.basis.dim() => Some(m),
        Ok(_) => {
            warn!("cache entry {} has the wrong shape; recomputing", dir.display());
            None
        }
        Err(e) => {
            warn!("cache entry {} unreadable ({e}); recomputing", dir.display());
            None
        }
    };
    let diagnostics = decode_diagnostics(&prepared.ctx, &diag_text)?;
    Some((load(KERNEL_FILE)?, load(M_MINUS_FILE)?, load(M_PLUS_FILE)?, diagnostics))
}

fn store_cached(prepared: &Prepared, dir: &Path, e: &Evaluation) -> Result<(), IoError> {
    let digits = prepared.ctx.digits();
    io::write_matrix(&dir.join(KERNEL_FILE), &e.kernel, digits)?;
    io::write_matrix(&dir.join(M_MINUS_FILE), &e.m_minus, digits)?;
    io::write_matrix(&dir.join(M_PLUS_FILE), &e.m_plus, digits)?;
    io::write_atomic(&dir.join(DIAGNOSTICS_FILE), encode_diagnostics(&e.diagnostics).as_bytes())
}

/// Computes (or loads from cache) one configuration without writing outputs.
pub fn evaluate_config(config: &ScenarioConfig) -> Result<(Prepared, Evaluation, bool), RunError> {
    let prepared = prepare(config)?;
    let entry = cache_dir(config).map(|d| d.join(prepared.cache_key()));
    if let Some(dir) = &entry {
        if let Some((kernel, m_minus, m_plus, diagnostics)) = load_cached(&prepared, dir) {
            info!("{}: cache hit {}", config.scenario, dir.display());
            let report = prepared.report(&m_minus)?;
            let evaluation = Evaluation {
                kernel,
                m_minus,
                m_plus,
                diagnostics,
                report,
            };
            return Ok((prepared, evaluation, true));
        }
    }
    info!(
        "{}: n = {}, mass = {}, ell = {}, digits = {}",
        config.scenario,
        config.n,
        config.mass,
        config.ell,
        config.digits()
    );
    let kernel = prepared.assemble_kernel()?;
    let evaluation = prepared.evaluate(kernel)?;
    if let Some(dir) = &entry {
        store_cached(&prepared, dir, &evaluation)?;
    }
    Ok((prepared, evaluation, false))
}

/// Runs a configuration end to end and writes the requested artifacts to
/// `config.out`. With `retry_precision`, a precision failure is retried
/// once at twice the digits.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunOutput, RunError> {
    let (prepared, evaluation, cache_hit) = match evaluate_config(config) {
        Err(e) if config.retry_precision && e.is_precision_failure() => {
            let digits = 2 * config.digits();
            warn!("{e}; retrying at {digits} digits");
            evaluate_config(&config.with_digits(digits))?
        }
        other => other?,
    };
    let written = match &config.out {
        Some(out) => write_outputs(out, &prepared, &evaluation)?,
        None => Vec::new(),
    };
    Ok(RunOutput {
        config: prepared.config,
        evaluation,
        cache_hit,
        written,
    })
}

fn write_outputs(out: &Path, prepared: &Prepared, e: &Evaluation) -> Result<Vec<PathBuf>, IoError> {
    let emit = prepared.config.emit;
    let mut written = Vec::new();
    let mut put = |name: &str, bytes: &[u8]| -> Result<(), IoError> {
        let path = out.join(name);
        io::write_atomic(&path, bytes)?;
        written.push(path);
        Ok(())
    };
    let mut effective = prepared.config.clone();
    effective.digits = Some(prepared.ctx.digits());
    effective.out = None;
    effective.cache_dir = None;
    put("config.txt", effective.serialize().as_bytes())?;
    if emit.report_csv {
        put("report.csv", io::report_csv(&e.report).as_bytes())?;
    }
    if emit.kernel_csv {
        put("kernel.csv", io::kernel_csv(&prepared.basis, &e.kernel).as_bytes())?;
    }
    if emit.matrices {
        let digits = prepared.ctx.digits();
        put(M_MINUS_FILE, io::encode_matrix(&e.m_minus, digits).as_bytes())?;
        put(M_PLUS_FILE, io::encode_matrix(&e.m_plus, digits).as_bytes())?;
        put(DIAGNOSTICS_FILE, encode_diagnostics(&e.diagnostics).as_bytes())?;
    }
    Ok(written)
}

/// Output subdirectory name of one sweep point.
pub fn sweep_label(mass: &str, ell: u32) -> String {
    format!("mass_{}_ell_{ell}", mass.replace('/', "over"))
}

/// Runs every `mass × ell` combination of `base` as an independent job.
/// Results come back in input order; each job writes under its own
/// subdirectory of `base.out`. In 1+1 dimensions `ells` is ignored.
pub fn sweep(
    base: &ScenarioConfig,
    masses: &[String],
    ells: &[u32],
) -> Vec<(ScenarioConfig, Result<RunOutput, RunError>)> {
    let ells: Vec<u32> = if base.scenario.is_four_dimensional() {
        ells.to_vec()
    } else {
        vec![0]
    };
    let jobs: Vec<ScenarioConfig> = masses
        .iter()
        .flat_map(|m| ells.iter().map(move |&l| (m.clone(), l)))
        .map(|(mass, ell)| {
            let out = base.out.as_ref().map(|o| o.join(sweep_label(&mass, ell)));
            ScenarioConfig {
                mass,
                ell,
                out,
                ..base.clone()
            }
        })
        .collect();
    jobs.into_par_iter()
        .map(|c| {
            let r = run_scenario(&c);
            (c, r)
        })
        .collect()
}

use std::fmt::Write as _;
use std::path::PathBuf;

use thiserror::Error;

use crate::discretize::{Scenario, TaperMode};
use crate::highprec::{PrecisionContext, Scalar};
use crate::kernels::KernelSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("invalid value {value:?} for {key}: {reason}")]
    Value {
        key: &'static str,
        value: String,
        reason: String,
    },
}

fn bad(key: &'static str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        key,
        value: value.to_string(),
        reason: reason.into(),
    }
}

/// Which artifacts a run writes to its output directory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Emit {
    pub report_csv: bool,
    pub kernel_csv: bool,
    pub matrices: bool,
}

impl Default for Emit {
    fn default() -> Self {
        Self {
            report_csv: true,
            kernel_csv: false,
            matrices: false,
        }
    }
}

impl Emit {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut emit = Emit {
            report_csv: false,
            kernel_csv: false,
            matrices: false,
        };
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item {
                "report_csv" => emit.report_csv = true,
                "kernel_csv" => emit.kernel_csv = true,
                "matrices" => emit.matrices = true,
                "none" => {}
                other => return Err(bad("emit", other, "expected report_csv, kernel_csv, matrices or none")),
            }
        }
        Ok(emit)
    }

    pub fn render(&self) -> String {
        let mut items = Vec::new();
        if self.report_csv {
            items.push("report_csv");
        }
        if self.kernel_csv {
            items.push("kernel_csv");
        }
        if self.matrices {
            items.push("matrices");
        }
        if items.is_empty() {
            "none".into()
        } else {
            items.join(",")
        }
    }
}

/// Full description of one scenario run. Numeric physical parameters are
/// kept as their source text (decimal or `p/q`) so they round-trip exactly
/// and are parsed at the run's precision.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub n: usize,
    pub b: String,
    pub mass: String,
    pub ell: u32,
    /// `None` selects the scenario default (450 in 1+1, 640 in 3+1).
    pub digits: Option<u32>,
    /// `None` selects the scenario default (6/32, 6/64, 6/128).
    pub sigma: Option<String>,
    /// Comma list or inclusive range `lo:step:hi`; `None` selects the
    /// scenario default.
    pub probes: Option<String>,
    pub quad_order: usize,
    pub taper: TaperMode,
    pub cache_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub emit: Emit,
    pub retry_precision: bool,
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            n: 256,
            b: "4".into(),
            mass: "1".into(),
            ell: 0,
            digits: None,
            sigma: None,
            probes: None,
            quad_order: KernelSpec::DEFAULT_QUAD_ORDER,
            taper: TaperMode::default(),
            cache_dir: None,
            out: None,
            emit: Emit::default(),
            retry_precision: false,
        }
    }

    pub fn digits(&self) -> u32 {
        self.digits.unwrap_or(match self.scenario {
            Scenario::Cone4d => 640,
            _ => 450,
        })
    }

    pub fn sigma_text(&self) -> &str {
        self.sigma.as_deref().unwrap_or(match self.scenario {
            Scenario::Wedge2d => "6/32",
            Scenario::Cone2d => "6/64",
            Scenario::Cone4d => "6/128",
        })
    }

    pub fn probes_text(&self) -> &str {
        self.probes.as_deref().unwrap_or(match self.scenario {
            Scenario::Cone4d => "0.05:0.05:1.2",
            _ => "-2:0.1:2",
        })
    }

    pub fn context(&self) -> Result<PrecisionContext, ConfigError> {
        PrecisionContext::new(self.digits())
            .map_err(|e| bad("digits", &self.digits().to_string(), e.to_string()))
    }

    pub fn b_value(&self, ctx: &PrecisionContext) -> Result<Scalar, ConfigError> {
        ctx.parse(&self.b).map_err(|e| bad("b", &self.b, e.to_string()))
    }

    pub fn mass_value(&self, ctx: &PrecisionContext) -> Result<Scalar, ConfigError> {
        ctx.parse(&self.mass).map_err(|e| bad("mass", &self.mass, e.to_string()))
    }

    pub fn sigma_value(&self, ctx: &PrecisionContext) -> Result<Scalar, ConfigError> {
        let text = self.sigma_text();
        ctx.parse(text).map_err(|e| bad("sigma", text, e.to_string()))
    }

    /// Probe positions at context precision.
    pub fn probe_positions(&self, ctx: &PrecisionContext) -> Result<Vec<Scalar>, ConfigError> {
        parse_positions(ctx, self.probes_text())
    }

    /// Same configuration at a different precision.
    pub fn with_digits(&self, digits: u32) -> Self {
        Self {
            digits: Some(digits),
            ..self.clone()
        }
    }

    /// Sets one key from its textual value (shared by the file parser and
    /// command-line overrides).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        let int = |key: &'static str| -> Result<usize, ConfigError> {
            v.parse::<usize>().map_err(|e| bad(key, v, e.to_string()))
        };
        match key.trim().replace('-', "_").as_str() {
            "scenario" => self.scenario = v.parse().map_err(|e: crate::discretize::DiscretizeError| bad("scenario", v, e.to_string()))?,
            "n" => self.n = int("n")?,
            "b" => self.b = v.to_string(),
            "mass" => self.mass = v.to_string(),
            "ell" => self.ell = int("ell")? as u32,
            "digits" => self.digits = Some(int("digits")? as u32),
            "sigma" => self.sigma = Some(v.to_string()),
            "probes" => self.probes = Some(v.to_string()),
            "quad_order" => self.quad_order = int("quad_order")?,
            "taper" => self.taper = v.parse().map_err(|e: crate::discretize::DiscretizeError| bad("taper", v, e.to_string()))?,
            "cache_dir" => self.cache_dir = Some(PathBuf::from(v)),
            "out" => self.out = Some(PathBuf::from(v)),
            "emit" => self.emit = Emit::parse(v)?,
            "retry_precision" => {
                self.retry_precision = match v {
                    "true" | "yes" | "1" => true,
                    "false" | "no" | "0" => false,
                    _ => return Err(bad("retry_precision", v, "expected true or false")),
                }
            }
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Parses a flat `key = value` file; `#` starts a comment. Keys not
    /// given keep their defaults; `scenario` may appear anywhere.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut pairs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: idx + 1,
                text: raw.to_string(),
            })?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let scenario = pairs
            .iter()
            .find(|(k, _)| k == "scenario")
            .map(|(_, v)| v.parse().map_err(|e: crate::discretize::DiscretizeError| bad("scenario", v, e.to_string())))
            .transpose()?
            .unwrap_or(Scenario::Wedge2d);
        let mut config = Self::new(scenario);
        for (k, v) in &pairs {
            config.set(k, v)?;
        }
        Ok(config)
    }

    /// Renders every key, so that `parse(serialize(c)) == c`.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario = {}", self.scenario);
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "b = {}", self.b);
        let _ = writeln!(s, "mass = {}", self.mass);
        let _ = writeln!(s, "ell = {}", self.ell);
        if let Some(d) = self.digits {
            let _ = writeln!(s, "digits = {d}");
        }
        if let Some(sigma) = &self.sigma {
            let _ = writeln!(s, "sigma = {sigma}");
        }
        if let Some(p) = &self.probes {
            let _ = writeln!(s, "probes = {p}");
        }
        let _ = writeln!(s, "quad_order = {}", self.quad_order);
        let _ = writeln!(s, "taper = {}", self.taper.name());
        if let Some(c) = &self.cache_dir {
            let _ = writeln!(s, "cache_dir = {}", c.display());
        }
        if let Some(o) = &self.out {
            let _ = writeln!(s, "out = {}", o.display());
        }
        let _ = writeln!(s, "emit = {}", self.emit.render());
        let _ = writeln!(s, "retry_precision = {}", self.retry_precision);
        s
    }
}

/// Comma-separated list, or inclusive range `lo:step:hi`.
pub fn parse_positions(ctx: &PrecisionContext, text: &str) -> Result<Vec<Scalar>, ConfigError> {
    let parse = |t: &str| ctx.parse(t).map_err(|e| bad("probes", text, e.to_string()));
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [lo, step, hi] => {
            let lo = parse(lo)?;
            let step = parse(step)?;
            let hi = parse(hi)?;
            if step.is_zero() || step.is_sign_negative() {
                return Err(bad("probes", text, "range step must be positive"));
            }
            let count = ((hi.to_f64() - lo.to_f64()) / step.to_f64() + 1e-9).floor();
            if count < 0.0 || count > 1e6 {
                return Err(bad("probes", text, "empty or oversized range"));
            }
            Ok((0..=count as u32)
                .map(|i| ctx.round(&(step.clone() * i + &lo)))
                .collect())
        }
        [_] => {
            let v = text
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(parse)
                .collect::<Result<Vec<_>, _>>()?;
            if v.is_empty() {
                return Err(bad("probes", text, "no positions given"));
            }
            Ok(v)
        }
        _ => Err(bad("probes", text, "expected a list or lo:step:hi")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_scenario() {
        let c = ScenarioConfig::new(Scenario::Cone4d);
        assert_eq!(c.digits(), 640);
        assert_eq!(c.sigma_text(), "6/128");
        let ctx = PrecisionContext::new(30).unwrap();
        assert_eq!(c.probe_positions(&ctx).unwrap().len(), 24);
        let w = ScenarioConfig::new(Scenario::Wedge2d);
        assert_eq!(w.digits(), 450);
        let p = w.probe_positions(&ctx).unwrap();
        assert_eq!(p.len(), 41);
        assert!(p[20].to_f64().abs() < 1e-25);
        assert_eq!(p[40].to_f64(), 2.0);
    }

    #[test]
    fn parse_and_round_trip() {
        let text = "scenario = cone2d\nn = 64 # comment\nmass = 1/10\nsigma = 6/64\nprobes = 0,0.5,-0.5\nemit = report_csv,kernel_csv\nretry-precision = true\n";
        let c = ScenarioConfig::parse(text).unwrap();
        assert_eq!(c.scenario, Scenario::Cone2d);
        assert_eq!(c.n, 64);
        assert!(c.emit.kernel_csv && c.emit.report_csv && !c.emit.matrices);
        assert!(c.retry_precision);
        assert_eq!(ScenarioConfig::parse(&c.serialize()).unwrap(), c);
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(ScenarioConfig::parse("n 12"), Err(ConfigError::Syntax { .. })));
        assert!(matches!(ScenarioConfig::parse("colour = red"), Err(ConfigError::UnknownKey(_))));
        assert!(ScenarioConfig::parse("n = -3").is_err());
        assert!(ScenarioConfig::parse("emit = pictures").is_err());
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use modgen::highprec::format_sig;
use modgen::scenario::{run_scenario, sweep, RunOutput, ScenarioConfig};
use modgen::validation::{Validator, CRITERIA};

#[derive(Parser)]
#[command(name = "modgen", version, about = "Discretized modular generators of the free scalar field")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its report.
    Run(ScenarioArgs),
    /// Run the acceptance suite and print a pass/fail table.
    Validate {
        /// Only these criteria (e.g. `--only 1,6b,9`).
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Run the cartesian product of masses and angular momenta.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        masses: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        ells: Vec<u32>,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// `key = value` configuration file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    mass: Option<String>,
    #[arg(long)]
    ell: Option<String>,
    #[arg(long)]
    digits: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    /// Comma list or inclusive range `lo:step:hi`.
    #[arg(long, allow_hyphen_values = true)]
    probes: Option<String>,
    #[arg(long)]
    quad_order: Option<String>,
    /// `first-wider` or `first-equal`.
    #[arg(long)]
    taper: Option<String>,
    #[arg(long)]
    cache_dir: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// Comma list of report_csv, kernel_csv, matrices.
    #[arg(long)]
    emit: Option<String>,
    #[arg(long)]
    retry_precision: bool,
}

impl ScenarioArgs {
    fn config(&self) -> Result<ScenarioConfig, String> {
        let mut config = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
                ScenarioConfig::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?
            }
            None => ScenarioConfig::new(modgen::discretize::Scenario::Wedge2d),
        };
        let overrides = [
            ("scenario", &self.scenario),
            ("n", &self.n),
            ("b", &self.b),
            ("mass", &self.mass),
            ("ell", &self.ell),
            ("digits", &self.digits),
            ("sigma", &self.sigma),
            ("probes", &self.probes),
            ("quad_order", &self.quad_order),
            ("taper", &self.taper),
            ("cache_dir", &self.cache_dir),
            ("out", &self.out),
            ("emit", &self.emit),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                config.set(key, v).map_err(|e| e.to_string())?;
            }
        }
        if self.retry_precision {
            config.retry_precision = true;
        }
        Ok(config)
    }
}

fn summarize(out: &RunOutput) {
    let c = &out.config;
    let d = &out.evaluation.diagnostics;
    println!(
        "{} n={} m={} ell={} digits={}{}",
        c.scenario,
        c.n,
        c.mass,
        c.ell,
        c.digits(),
        if out.cache_hit { " (cached)" } else { "" }
    );
    println!(
        "  margin {}  inverse residual {}  identity residual {}",
        format_sig(&d.spectral_margin, 3),
        format_sig(&d.inverse_residual, 3),
        format_sig(&d.identity_residual, 3)
    );
    for path in &out.written {
        println!("  wrote {}", path.display());
    }
    if out.written.is_empty() {
        print!("{}", modgen::scenario::io::report_csv(&out.evaluation.report));
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => {
            let config = match args.config() {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            match run_scenario(&config) {
                Ok(out) => {
                    summarize(&out);
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Validate { only, cache_dir } => {
            if let Some(dir) = cache_dir {
                std::env::set_var(modgen::scenario::CACHE_ENV, dir);
            }
            let ids: Vec<String> = if only.is_empty() {
                CRITERIA.iter().map(|s| s.to_string()).collect()
            } else {
                only
            };
            let mut validator = Validator::new();
            let mut all_passed = true;
            for id in &ids {
                match validator.criterion(id) {
                    Some(r) => {
                        all_passed &= r.passed;
                        println!("{r}");
                    }
                    None => {
                        eprintln!("error: unknown criterion {id:?} (known: {})", CRITERIA.join(", "));
                        return ExitCode::from(2);
                    }
                }
            }
            if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Command::Sweep {
            scenario,
            masses,
            ells,
        } => {
            let base = match scenario.config() {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let mut failed = false;
            for (config, outcome) in sweep(&base, &masses, &ells) {
                match outcome {
                    Ok(out) => summarize(&out),
                    Err(e) => {
                        failed = true;
                        eprintln!("error: m={} ell={}: {e}", config.mass, config.ell);
                    }
                }
            }
            if failed {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            }
        }
    }
}

//! Too few digits: the spectrum of B cannot be resolved away from ±1 and
//! the run stops with a spectral-margin error. With `retry_precision` the
//! run is repeated once at twice the digits.

use modgen::discretize::Scenario;
use modgen::scenario::{run_scenario, ScenarioConfig};

fn main() {
    let config = ScenarioConfig {
        n: 64,
        digits: Some(40),
        probes: Some("0.5".into()),
        ..ScenarioConfig::new(Scenario::Wedge2d)
    };
    match run_scenario(&config) {
        Ok(_) => println!("40 digits: unexpectedly succeeded"),
        Err(e) => println!("40 digits: {e}"),
    }

    // 60 digits also fail; the retry at 120 resolves the margin (about 1e-85 here).
    let retry = ScenarioConfig {
        digits: Some(60),
        retry_precision: true,
        ..config
    };
    match run_scenario(&retry) {
        Ok(out) => println!(
            "with retry: succeeded at {} digits, margin {}",
            out.config.digits(),
            out.evaluation.diagnostics.spectral_margin.to_string_radix(10, Some(3))
        ),
        Err(e) => println!("with retry: {e}"),
    }
}

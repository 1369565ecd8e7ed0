//! Radial sectors ℓ = 0, 1 of the double cone in 3+1 dimensions, swept over
//! masses and smeared with log-Gaussian probes. Sweep points run as
//! parallel jobs.
//!
//! cargo run --release --example cone4d -- [n] [digits]

use modgen::discretize::Scenario;
use modgen::probes::ReferenceKind;
use modgen::scenario::{sweep, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(32), |s| s.parse())?;
    let digits: u32 = args.get(1).map_or(Ok(160), |s| s.parse())?;

    let base = ScenarioConfig {
        n,
        digits: Some(digits),
        probes: Some("0.1:0.1:0.9".into()),
        ..ScenarioConfig::new(Scenario::Cone4d)
    };
    let masses: Vec<String> = ["0.1", "1", "5"].map(String::from).to_vec();
    let results = sweep(&base, &masses, &[0, 1]);

    for (config, outcome) in &results {
        let out = outcome.as_ref().map_err(|e| e.to_string())?;
        println!(
            "ell={} m={}  (margin {})",
            config.ell,
            config.mass,
            out.evaluation.diagnostics.spectral_margin.to_string_radix(10, Some(3))
        );
        for row in &out.evaluation.report.rows {
            let qd = row.reference(ReferenceKind::Qd4).expect("qd").to_f64();
            println!("  r={:.1}  {:>8.4}   massless {:>8.4}", row.mu.to_f64(), row.value.to_f64(), qd);
        }
    }
    Ok(())
}

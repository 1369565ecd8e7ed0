//! Smeared diagonal of M₋ for the right wedge, compared with the boost
//! generator 2πx.
//!
//! cargo run --release --example wedge -- [n] [digits]

use modgen::discretize::Scenario;
use modgen::scenario::{run_scenario, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(64), |s| s.parse())?;
    let digits: u32 = args.get(1).map_or(Ok(120), |s| s.parse())?;

    let config = ScenarioConfig {
        n,
        digits: Some(digits),
        probes: Some("-1:0.25:1".into()),
        ..ScenarioConfig::new(Scenario::Wedge2d)
    };
    let out = run_scenario(&config)?;
    println!(
        "wedge2d n={n} digits={digits}: spectral margin {}",
        out.evaluation.diagnostics.spectral_margin.to_string_radix(10, Some(3))
    );
    println!("{:>6} {:>12} {:>12} {:>10}", "mu", "<h,M-h>", "2*pi*mu", "rel.err");
    for row in &out.evaluation.report.rows {
        let reference = row.references[0].1.to_f64();
        let err = row.rel_errors[0].1.as_ref().map_or("-".into(), |e| format!("{:.2e}", e.to_f64()));
        println!("{:>6.2} {:>12.6} {:>12.6} {:>10}", row.mu.to_f64(), row.value.to_f64(), reference, err);
    }
    Ok(())
}

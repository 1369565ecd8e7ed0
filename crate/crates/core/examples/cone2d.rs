//! Double cone in 1+1 dimensions: the smeared diagonal of M₋ for several
//! masses lies between the massless parabola and the double-wedge bound.
//!
//! cargo run --release --example cone2d -- [n] [digits]

use modgen::discretize::Scenario;
use modgen::probes::ReferenceKind;
use modgen::scenario::{run_scenario, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(64), |s| s.parse())?;
    let digits: u32 = args.get(1).map_or(Ok(150), |s| s.parse())?;
    let masses = ["0.1", "1", "10"];

    let mut columns = Vec::new();
    for mass in masses {
        let config = ScenarioConfig {
            n,
            mass: mass.into(),
            digits: Some(digits),
            probes: Some("-0.8:0.2:0.8".into()),
            ..ScenarioConfig::new(Scenario::Cone2d)
        };
        columns.push(run_scenario(&config)?.evaluation.report);
    }

    print!("{:>6} {:>9} {:>9}", "mu", "qd", "pl");
    for m in masses {
        print!(" {:>9}", format!("m={m}"));
    }
    println!();
    for (k, row) in columns[0].rows.iter().enumerate() {
        let qd = row.reference(ReferenceKind::Qd2).expect("qd").to_f64();
        let pl = row.reference(ReferenceKind::Pl2).expect("pl").to_f64();
        print!("{:>6.2} {qd:>9.4} {pl:>9.4}", row.mu.to_f64());
        for report in &columns {
            print!(" {:>9.4}", report.rows[k].value.to_f64());
        }
        println!();
    }
    Ok(())
}

//! Configuration files, the matrix cache and the written artifacts.
//! A second run of the same configuration is served from the cache and
//! produces byte-identical files.

use modgen::scenario::{io, run_scenario, ScenarioConfig};

const CONFIG: &str = "
# wedge at desk scale
scenario = wedge2d
n = 32
digits = 100
probes = -1:0.5:1
emit = report_csv,kernel_csv,matrices
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let mut config = ScenarioConfig::parse(CONFIG)?;
    config.cache_dir = Some(dir.path().join("cache"));
    config.out = Some(dir.path().join("first"));
    assert_eq!(ScenarioConfig::parse(&config.serialize())?, config);

    let first = run_scenario(&config)?;
    config.out = Some(dir.path().join("second"));
    let second = run_scenario(&config)?;
    println!("cache hit on second run: {}", second.cache_hit);

    for (a, b) in first.written.iter().zip(&second.written) {
        let same = std::fs::read(a)? == std::fs::read(b)?;
        println!("{:<16} {:>9} bytes  identical: {same}", a.file_name().unwrap().to_string_lossy(), std::fs::metadata(a)?.len());
    }

    let (m_minus, digits) = io::read_matrix(&dir.path().join("first").join("m_minus.mat"))?;
    println!("m_minus.mat: {}x{} at {digits} digits", m_minus.dim(), m_minus.dim());
    print!("{}", io::report_csv(&first.evaluation.report));
    Ok(())
}

//! Desk-scale acceptance suite: one line per criterion, nonzero exit status
//! if any criterion fails. `MODGEN_CACHE_DIR` makes reruns cheap.

use std::process::ExitCode;
use std::time::Instant;

use modgen::validation::{Validator, CRITERIA};

fn main() -> ExitCode {
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut validator = Validator::new();
    let mut failed = 0;
    println!("\nrunning {} acceptance criteria", CRITERIA.len());
    for id in CRITERIA {
        if !only.is_empty() && !only.iter().any(|o| o == id) {
            continue;
        }
        let start = Instant::now();
        let result = validator.criterion(id).expect("known criterion");
        println!("{result}  ({:.1}s)", start.elapsed().as_secs_f64());
        if !result.passed {
            failed += 1;
        }
    }
    if failed == 0 {
        println!("acceptance: all criteria passed\n");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criterion/criteria failed\n");
        ExitCode::FAILURE
    }
}

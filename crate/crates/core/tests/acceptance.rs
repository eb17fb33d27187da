//! The eleven acceptance criteria, one pass/fail line each.

use hermite_pm::experiments::{run_criterion, CRITERIA, DEFAULT_SEED};

fn main() {
    let mut failed = Vec::new();
    for (id, _) in CRITERIA {
        let outcome = match run_criterion(id, DEFAULT_SEED) {
            Ok(o) => o,
            Err(e) => {
                println!("[FAIL] criterion {id:>2}: {e}");
                failed.push(id);
                continue;
            }
        };
        println!("{}", outcome.summary());
        if !outcome.passed {
            for c in outcome.checks.iter().filter(|c| !c.passed) {
                println!("    failed: {} = {:e} (expected {})", c.name, c.value, c.target);
            }
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", CRITERIA.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}

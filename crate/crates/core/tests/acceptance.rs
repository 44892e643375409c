//! Runs every acceptance criterion and prints one PASS/FAIL line each.
//! Positional arguments select criteria by id; flags from the test runner are
//! ignored.

use std::process::ExitCode;

use fractal_d2d::experiment::acceptance::{AcceptanceSuite, CRITERIA};

fn squared_hops(h: f64, n: usize) -> f64 {
    1.0 / ((n as f64).ln() * h * h)
}

fn main() -> ExitCode {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let selected = |id: &str| filters.is_empty() || filters.iter().any(|f| f.eq_ignore_ascii_case(id));

    let suite = AcceptanceSuite::default();
    let mut failed = Vec::new();
    let mut ran = 0;
    for id in CRITERIA.iter().filter(|id| selected(id)) {
        ran += 1;
        match suite.run_one(id) {
            Ok(o) => {
                println!("{o}");
                if !o.passed {
                    failed.push(id.to_string());
                }
            }
            Err(e) => {
                println!("{id:<4} FAIL  error: {e}");
                failed.push(id.to_string());
            }
        }
    }
    if selected("mutation") {
        ran += 1;
        let mutant = AcceptanceSuite::with_capacity(squared_hops).run_one("A3");
        let caught = matches!(&mutant, Ok(o) if !o.passed);
        println!(
            "mutation check {}  tampered capacity map rejected by A3: {caught}",
            if caught { "PASS" } else { "FAIL" }
        );
        if !caught {
            failed.push("mutation".into());
        }
    }
    println!("{ran} checks, {} passed, {} failed", ran - failed.len(), failed.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}

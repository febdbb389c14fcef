//! One line per acceptance criterion; exits non-zero if any fails.

use std::process::ExitCode;

use hqe_selftest::{run_suite, DEFAULT_SEED, SUITES};

fn main() -> ExitCode {
    let seed = std::env::var("HQE_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_SEED);
    println!("acceptance suite, seed {seed}");
    let mut passed = 0;
    for (id, _, _) in SUITES {
        let report = run_suite(&id.to_string(), seed).expect("registered suite");
        println!("{report}");
        passed += usize::from(report.passed());
    }
    println!("{passed}/{} criteria passed", SUITES.len());
    if passed == SUITES.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! Seeded property suites for the `hqe` toolkit, each checked against an
//! oracle written independently of the code under test.
//!
//! Suites are addressed by number (`1`..`8`) or by name; every run with the
//! same seed performs the same cases in the same order.

use std::fmt;
use std::time::{Duration, Instant};

pub mod gen;
pub mod oracle;
mod suites;

pub const DEFAULT_SEED: u64 = 20_240_901;

/// Number, name and time budget of each suite.
pub const SUITES: [(u8, &str, u64); 8] = [
    (1, "rv-equivalence", 5),
    (2, "partial-addition", 10),
    (3, "hensel", 10),
    (4, "collision", 10),
    (5, "decomposition", 30),
    (6, "linear-elimination", 10),
    (7, "qe", 30),
    (8, "normal-form", 15),
];

/// Outcome of one suite.
#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub id: u8,
    pub name: &'static str,
    pub budget: Duration,
    pub cases: usize,
    pub failures: usize,
    /// The first few failure messages.
    pub samples: Vec<String>,
    /// Extra facts worth printing, such as case coverage.
    pub notes: Vec<String>,
    pub elapsed: Duration,
}

const MAX_SAMPLES: usize = 8;

impl SuiteReport {
    fn new(id: u8, name: &'static str, budget: u64) -> Self {
        SuiteReport {
            id,
            name,
            budget: Duration::from_secs(budget),
            cases: 0,
            failures: 0,
            samples: Vec::new(),
            notes: Vec::new(),
            elapsed: Duration::ZERO,
        }
    }

    /// Records one case.
    pub fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.fail(what());
        }
    }

    /// Records one case whose computation may error; an error is a failure.
    pub fn check_result(&mut self, r: hqe::Result<bool>, what: impl FnOnce() -> String) {
        match r {
            Ok(ok) => self.check(ok, what),
            Err(e) => {
                self.cases += 1;
                self.fail(format!("{}: {e}", what()));
            }
        }
    }

    pub fn fail(&mut self, msg: String) {
        self.failures += 1;
        if self.samples.len() < MAX_SAMPLES {
            self.samples.push(msg);
        }
    }

    pub fn note(&mut self, msg: String) {
        self.notes.push(msg);
    }

    pub fn within_budget(&self) -> bool {
        self.elapsed <= self.budget
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0 && self.within_budget()
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} criterion {} ({}): {} cases, {} failures, {:.2}s of {}s",
            if self.passed() { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.cases,
            self.failures,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )?;
        for n in &self.notes {
            write!(f, "\n    {n}")?;
        }
        for s in &self.samples {
            write!(f, "\n    failure: {s}")?;
        }
        Ok(())
    }
}

/// Resolves a suite given by number or name.
pub fn lookup(key: &str) -> Option<(u8, &'static str, u64)> {
    SUITES.iter().copied().find(|(id, name, _)| key == *name || key.parse::<u8>().ok() == Some(*id))
}

/// Runs one suite; `None` if `key` names no suite.
pub fn run_suite(key: &str, seed: u64) -> Option<SuiteReport> {
    let (id, name, budget) = lookup(key)?;
    let mut report = SuiteReport::new(id, name, budget);
    let start = Instant::now();
    suites::run(id, seed, &mut report);
    report.elapsed = start.elapsed();
    Some(report)
}

/// Runs every suite in order. Suites run one at a time so that each
/// elapsed time is measured without contention.
pub fn run_all(seed: u64) -> Vec<SuiteReport> {
    SUITES.iter().map(|(id, _, _)| run_suite(&id.to_string(), seed).expect("registered suite")).collect()
}

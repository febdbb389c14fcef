//! Existence of `x` with `rv_{δ_i}(a_i x − b_i) = rv_{δ_i}(z_i)` for all `i`,
//! against direct ball containment, with case coverage.

use std::collections::BTreeMap;

use hqe::logic::{eliminate_linear_exists_traced, LinearCase, LinearConstraint};
use hqe::ValuedField;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::gen::{self, elem, elem_of_value, elem_or_zero};
use crate::oracle::linear_system_solvable;
use crate::SuiteReport;

const SYSTEMS: usize = 500;

pub(super) fn run(seed: u64, report: &mut SuiteReport) {
    let mut coverage: BTreeMap<LinearCase, usize> = BTreeMap::new();
    backend::<hqe::LaurentQ>(&gen::laurent(), &mut gen::rng(seed, 60), report, &mut coverage);
    backend::<hqe::PAdic>(&gen::padic(), &mut gen::rng(seed, 61), report, &mut coverage);
    let counts: Vec<String> = coverage.iter().map(|(c, n)| format!("{c:?}: {n}")).collect();
    report.note(format!("cases reached: {}", counts.join(", ")));
    for case in [LinearCase::Case1, LinearCase::Case2, LinearCase::Case3, LinearCase::Case4] {
        report.check(coverage.contains_key(&case), || format!("{case:?} never reached"));
    }
}

/// Constraints around a common point `x0`, each then kept, nudged at a
/// random depth, or replaced; some pin `x` with `z = 0`.
fn system<F: ValuedField>(ctx: &F::Ctx, rng: &mut ChaCha8Rng) -> Vec<LinearConstraint<F>> {
    let x0 = elem_or_zero::<F>(ctx, rng, -2, 3, 0.1);
    let n = rng.gen_range(1..=4);
    (0..n)
        .map(|_| {
            let a = elem::<F>(ctx, rng, -1, 2);
            let b = elem_or_zero::<F>(ctx, rng, -2, 3, 0.3);
            let delta = rng.gen_range(0..=3);
            let exact = a.mul(&x0).sub(&b);
            let z = match rng.gen_range(0..10) {
                0 => F::zero(ctx),
                1..=3 if !exact.is_exact_zero() => exact,
                4..=7 if !exact.is_exact_zero() => {
                    let v = exact.val_or_inf().as_int().unwrap();
                    let w = v + rng.gen_range(0..=5);
                    exact.add(&elem_of_value(ctx, rng, w, 2))
                }
                _ => elem(ctx, rng, -2, 4),
            };
            LinearConstraint { z, a, b, delta }
        })
        .collect()
}

fn backend<F: ValuedField>(
    ctx: &F::Ctx,
    rng: &mut ChaCha8Rng,
    report: &mut SuiteReport,
    coverage: &mut BTreeMap<LinearCase, usize>,
) {
    let name = F::backend_name(ctx);
    for _ in 0..SYSTEMS {
        let cs = system::<F>(ctx, rng);
        let want = linear_system_solvable(&cs);
        let show = || {
            cs.iter()
                .map(|c| format!("rv_{}({}·x − ({})) = rv({})", c.delta, c.a, c.b, c.z))
                .collect::<Vec<_>>()
                .join(" ∧ ")
        };
        match eliminate_linear_exists_traced(&cs) {
            Ok((got, cases)) => {
                for c in cases {
                    *coverage.entry(c).or_default() += 1;
                }
                report.check(got == want, || format!("{name}: {}: got {got}, containment says {want}", show()));
            }
            Err(e) => report.check(false, || format!("{name}: {}: {e}", show())),
        }
    }
}

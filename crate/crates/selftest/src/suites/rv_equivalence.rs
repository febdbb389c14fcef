//! Leading-term equality three ways, plus a digit comparison.

use hqe::rv::rv;
use hqe::{ValQ, ValuedField};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::gen::{self, elem, elem_of_value, mono, unit_coeff};
use crate::oracle::{same_leading_digits, Digits};
use crate::SuiteReport;

const PAIRS: usize = 500;

pub(super) fn run(seed: u64, report: &mut SuiteReport) {
    backend::<hqe::LaurentQ>(&gen::laurent(), &mut gen::rng(seed, 10), report);
    backend::<hqe::PAdic>(&gen::padic(), &mut gen::rng(seed, 11), report);
}

/// `y` equal to `x` up to a relative perturbation near the order, or
/// unrelated to it.
fn pair<F: ValuedField>(ctx: &F::Ctx, rng: &mut ChaCha8Rng) -> (F, F) {
    let x = elem::<F>(ctx, rng, -3, 3);
    let y = match rng.gen_range(0..4) {
        0 => elem(ctx, rng, -3, 3),
        1 => {
            let v = x.val_or_inf().as_int().unwrap();
            let w = v + rng.gen_range(0..7);
            x.add(&elem_of_value(ctx, rng, w, 2))
        }
        _ => {
            let k = rng.gen_range(0..7);
            let c = unit_coeff::<F>(ctx, rng);
            x.mul(&F::one(ctx).add(&mono(ctx, c, k)))
        }
    };
    (x, y)
}

fn backend<F: Digits>(ctx: &F::Ctx, rng: &mut ChaCha8Rng, report: &mut SuiteReport) {
    let name = F::backend_name(ctx);
    for _ in 0..PAIRS {
        let (x, y) = pair::<F>(ctx, rng);
        if y.is_exact_zero() {
            continue;
        }
        let delta: u32 = rng.gen_range(0..=4);
        let outcome = (|| -> hqe::Result<(bool, bool, bool, bool)> {
            let by_class = rv(&x, delta)? == rv(&y, delta)?;
            let by_value = x.sub(&y).val_or_inf() > y.val()? + ValQ::int(delta as i64);
            let q = x.div(&y)?;
            let by_residue = q.val()? == ValQ::zero() && q.res_delta(delta)?.is_one();
            Ok((by_class, by_value, by_residue, same_leading_digits(&x, &y, delta)))
        })();
        match outcome {
            Ok((a, b, c, d)) => {
                report.check(a == b && b == c && c == d, || {
                    format!("{name}: x = {x}, y = {y}, δ = {delta}: class {a}, value {b}, residue {c}, digits {d}")
                });
                if a {
                    report.check(x.val_or_inf() == y.val_or_inf(), || format!("{name}: equal classes, unequal values: {x}, {y}"));
                }
            }
            Err(e) => {
                report.check(false, || format!("{name}: x = {x}, y = {y}, δ = {delta}: {e}"));
            }
        }
    }
}

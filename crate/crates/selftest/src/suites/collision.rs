//! Collisions built from a root placed close to the evaluation point, and
//! collision-free inputs that must be rejected.

use hqe::hensel::collision_root;
use hqe::rv::rv;
use hqe::{Error, Poly, ValQ, ValuedField};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::gen::{self, elem, elem_or_zero, mono, random_poly, unit_coeff};
use crate::oracle::{derivative, horner, severity};
use crate::SuiteReport;

const CASES: usize = 100;

pub(super) fn run(seed: u64, report: &mut SuiteReport) {
    backend::<hqe::LaurentQ>(&gen::laurent(), &mut gen::rng(seed, 40), report);
    backend::<hqe::PAdic>(&gen::padic(), &mut gen::rng(seed, 41), report);
}

/// `2^m (v(m!) + δ)` with `v(m!)` from Legendre's formula.
fn threshold<F: ValuedField>(ctx: &F::Ctx, m: usize, delta: u32) -> ValQ {
    let p = F::residue_char(ctx);
    let mut vfact = 0i64;
    if p > 0 {
        let mut q = p as usize;
        while q <= m {
            vfact += (m / q) as i64;
            q *= p as usize;
        }
    }
    ValQ::int((1i64 << m) * (vfact + delta as i64))
}

fn backend<F: ValuedField>(ctx: &F::Ctx, rng: &mut ChaCha8Rng, report: &mut SuiteReport) {
    let name = F::backend_name(ctx);
    let mut built = 0;
    while built < CASES {
        // f = (x − λ)·h with β = λ + u·π^s approaching λ.
        let lambda = elem_or_zero::<F>(ctx, rng, 0, 2, 0.1);
        let deg = rng.gen_range(0..=4);
        let h = random_poly::<F>(ctx, rng, deg);
        if horner(&h, &lambda).is_zero_to_precision() {
            continue;
        }
        let f = Poly::new(ctx, vec![lambda.neg(), F::one(ctx)]).mul(&h);
        let alpha = lambda.add(&elem::<F>(ctx, rng, -1, 1));
        let delta: u32 = rng.gen_range(0..=1);
        let c = unit_coeff::<F>(ctx, rng);
        let found = (2..48).find_map(|s| {
            let beta = lambda.add(&mono(ctx, c, s));
            let (m, sev) = severity(&f, &alpha, &beta);
            (sev > threshold::<F>(ctx, m, delta)).then_some((beta, m))
        });
        let Some((beta, m)) = found else { continue };
        built += 1;
        match collision_root(&f, &alpha, &beta, delta) {
            Err(e) => report.check(false, || format!("{name}: f = {f}, α = {alpha}, β = {beta}, δ = {delta}: {e}")),
            Ok((n, root)) => {
                let mut fn_ = f.clone();
                for _ in 0..n {
                    fn_ = derivative(&fn_);
                }
                let ok = (|| -> hqe::Result<bool> {
                    Ok(n < m
                        && horner(&fn_, &root).is_zero_to_precision()
                        && rv(&root.sub(&alpha), delta)? == rv(&beta.sub(&alpha), delta)?)
                })();
                report.check_result(ok, || {
                    format!("{name}: f = {f}, α = {alpha}, β = {beta}, δ = {delta}: n = {n}, λ = {root}")
                });
            }
        }
    }

    let mut rejected = 0;
    while rejected < CASES {
        let deg = rng.gen_range(1..=5);
        let f = random_poly::<F>(ctx, rng, deg);
        let alpha = elem_or_zero::<F>(ctx, rng, -1, 2, 0.2);
        let beta = alpha.add(&elem::<F>(ctx, rng, -2, 3));
        let delta: u32 = rng.gen_range(0..=1);
        let (m, sev) = severity(&f, &alpha, &beta);
        if sev > threshold::<F>(ctx, m, delta) {
            continue;
        }
        rejected += 1;
        let r = collision_root(&f, &alpha, &beta, delta);
        report.check(matches!(r, Err(Error::PreconditionViolated(_))), || {
            format!("{name}: collision-free f = {f}, α = {alpha}, β = {beta} (severity {sev}): got {r:?}")
        });
    }
}

//! Newton lifting on engineered approximate roots, and three square roots
//! compared digit by digit with series and digit-search oracles.

use hqe::hensel::newton_lift;
use hqe::{LaurentQ, PAdic, PAdicCtx, Poly, ValQ, ValuedField};
use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::gen::{self, elem, elem_of_value, mono, unit_coeff};
use crate::oracle::{derivative, horner, padic_sqrt_digits, same_point, sqrt_one_plus_t, Digits};
use crate::SuiteReport;

const CASES: usize = 200;
const DIGITS: usize = 40;

pub(super) fn run(seed: u64, report: &mut SuiteReport) {
    random_lifts::<hqe::LaurentQ>(&gen::laurent(), &mut gen::rng(seed, 30), report);
    random_lifts::<hqe::PAdic>(&gen::padic(), &mut gen::rng(seed, 31), report);
    fixed_examples(report);
}

/// `P = (x − b)·Q` with `Q(b)` a unit and `a = b + u·π^k`, `k > δ`: the
/// lifting hypothesis holds and `b` is the root to be found.
fn random_lifts<F: ValuedField>(ctx: &F::Ctx, rng: &mut ChaCha8Rng, report: &mut SuiteReport) {
    let name = F::backend_name(ctx);
    for _ in 0..CASES {
        let b = elem::<F>(ctx, rng, 0, 2);
        let deg_q = rng.gen_range(0..=3);
        let mut qc = vec![F::from_i64(ctx, unit_coeff::<F>(ctx, rng))];
        for _ in 0..deg_q {
            let v = rng.gen_range(1..=2);
            qc.push(elem_of_value(ctx, rng, v, 2));
        }
        let q = Poly::new(ctx, qc);
        let p = Poly::new(ctx, vec![b.neg(), F::one(ctx)]).mul(&q);
        let delta: u32 = rng.gen_range(0..=3);
        let k = delta as i64 + rng.gen_range(1..=4);
        let c = unit_coeff::<F>(ctx, rng);
        let a = b.add(&mono(ctx, c, k));

        let vpa = horner(&p, &a).val_or_inf();
        let vdpa = horner(&derivative(&p), &a).val_or_inf();
        let hypothesis = vpa > vdpa.scale(2) + ValQ::int(delta as i64);
        report.check(hypothesis, || format!("{name}: generated input misses the hypothesis: P = {p}, a = {a}"));
        if !hypothesis {
            continue;
        }
        match newton_lift(&p, &a, delta) {
            Err(e) => report.check(false, || format!("{name}: lift of P = {p} from {a}, δ = {delta}: {e}")),
            Ok(cert) => {
                let root = cert.root;
                let vanishes = horner(&p, &root).is_zero_to_precision();
                let dist = a.sub(&root).val_or_inf();
                let ok = vanishes
                    && dist > ValQ::int(delta as i64)
                    && dist == vpa - vdpa
                    && same_point(&root, &b);
                report.check(ok, || {
                    format!("{name}: P = {p}, a = {a}, δ = {delta}: root {root}, v(a−b) = {dist}, vanishes {vanishes}")
                });
            }
        }
    }
}

fn fixed_examples(report: &mut SuiteReport) {
    // √(1+t) from 1 against the binomial series.
    let lc = gen::laurent();
    let one = LaurentQ::one(&lc);
    let p = Poly::new(&lc, vec![one.add(&mono(&lc, 1, 1)).neg(), LaurentQ::zero(&lc), one.clone()]);
    match newton_lift(&p, &one, 0) {
        Ok(cert) => {
            let got = cert.root.digits(0, DIGITS);
            let want = sqrt_one_plus_t(DIGITS);
            report.check(got == want, || format!("√(1+t): {} disagrees with the binomial series", cert.root));
        }
        Err(e) => report.check(false, || format!("√(1+t): {e}")),
    }
    padic_sqrt(report, 7, 2, 3, 0);
    padic_sqrt(report, 2, 17, 1, 1);
}

/// `√n` in `ℤ_p` lifted from `start` compared with the digit search.
fn padic_sqrt(report: &mut SuiteReport, p: u64, n: i64, start: u64, delta: u32) {
    let ctx = PAdicCtx::new(p);
    let poly = Poly::new(&ctx, vec![PAdic::from_i64(&ctx, -n), PAdic::zero(&ctx), PAdic::one(&ctx)]);
    match newton_lift(&poly, &PAdic::from_i64(&ctx, start as i64), delta) {
        Ok(cert) => {
            let digits = cert.root.digits(0, DIGITS);
            let got = digits
                .iter()
                .rev()
                .fold(BigInt::zero(), |acc, d| acc * BigInt::from(p) + d.to_integer());
            let want = padic_sqrt_digits(p, n, start, DIGITS as u32);
            report.check(got == want, || {
                format!("√{n} in ℤ_{p}: {} mod {p}^{DIGITS} = {got}, digit search {want}", cert.root)
            });
        }
        Err(e) => report.check(false, || format!("√{n} in ℤ_{p}: {e}")),
    }
}

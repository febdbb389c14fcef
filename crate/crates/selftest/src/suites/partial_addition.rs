//! Stability of leading terms under perturbation, well-defined and
//! cancelling sums, and the partial addition against explicit witnesses.

use hqe::rv::{oplus_holds, oplus_holds_n, rv, rv_project, rv_sum_analyze};
use hqe::{RVElem, SumAnalysis, ValQ, ValuedField};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::gen::{self, elem, elem_of_value, mono, unit_coeff};
use crate::oracle::oplus_by_witness;
use crate::SuiteReport;

const CASES: usize = 500;

pub(super) fn run(seed: u64, report: &mut SuiteReport) {
    backend::<hqe::LaurentQ>(&gen::laurent(), &mut gen::rng(seed, 20), report);
    backend::<hqe::PAdic>(&gen::padic(), &mut gen::rng(seed, 21), report);
}

fn backend<F: ValuedField>(ctx: &F::Ctx, rng: &mut ChaCha8Rng, report: &mut SuiteReport) {
    let name = F::backend_name(ctx);
    let guard = |report: &mut SuiteReport, what: &str, r: hqe::Result<()>| {
        if let Err(e) = r {
            report.check(false, || format!("{name} {what}: {e}"));
        }
    };
    for _ in 0..CASES {
        let r = stability::<F>(ctx, rng, report);
        guard(report, "stability", r);
        let r = instability::<F>(ctx, rng, report);
        guard(report, "instability", r);
        let r = sums::<F>(ctx, rng, report);
        guard(report, "sums", r);
        let r = projection_of_witnesses::<F>(ctx, rng, report);
        guard(report, "projection", r);
        let r = witness_values::<F>(ctx, rng, report);
        guard(report, "witness values", r);
        let r = oplus_grid::<F>(ctx, rng, report);
        guard(report, "oplus grid", r);
    }
}

/// Relative perturbations `m` with `v(m) > order`.
fn perturbations<F: ValuedField>(ctx: &F::Ctx, order: u32) -> Vec<F> {
    let k = order as i64 + 1;
    vec![mono(ctx, 1, k), mono(ctx, -1, k), mono(ctx, 2, k), mono(ctx, 1, k + 1), mono(ctx, -2, k + 2)]
}

fn value<F: ValuedField>(x: &F) -> ValQ {
    x.val_or_inf()
}

/// `x` and `y` with `v(x + y) = min(v x, v y)`; replacing `x` by `x(1+m)`,
/// `v(m) > δ`, keeps `rv_δ(x + y)`.
fn stability<F: ValuedField>(ctx: &F::Ctx, rng: &mut ChaCha8Rng, report: &mut SuiteReport) -> hqe::Result<()> {
    let delta = rng.gen_range(0..=4);
    let (x, y) = loop {
        let (x, y) = (elem::<F>(ctx, rng, -2, 3), elem::<F>(ctx, rng, -2, 3));
        if value(&x.add(&y)) == value(&x).min(value(&y)) {
            break (x, y);
        }
    };
    let w = delta as i64 + rng.gen_range(1..4);
    let m = elem_of_value::<F>(ctx, rng, w, 2);
    let z = x.add(&x.mul(&m));
    let ok = rv(&z.add(&y), delta)? == rv(&x.add(&y), delta)?;
    report.check(ok, || format!("stability: x = {x}, y = {y}, m = {m}, δ = {delta}"));
    Ok(())
}

/// When `x + y` cancels by `ε`, the perturbation `x(1+m)` with
/// `v(m) = δ + ε` changes `rv_δ(x + y)`.
fn instability<F: ValuedField>(ctx: &F::Ctx, rng: &mut ChaCha8Rng, report: &mut SuiteReport) -> hqe::Result<()> {
    let delta = rng.gen_range(0..=4) as i64;
    let x = elem::<F>(ctx, rng, -2, 3);
    let eps = rng.gen_range(1..=4);
    let c = unit_coeff::<F>(ctx, rng);
    let y = x.mul(&F::one(ctx).add(&mono(ctx, c, eps))).neg();
    let eps_real = (value(&x.add(&y)) - value(&x)).as_int().expect("finite");
    let c = unit_coeff::<F>(ctx, rng);
    let m = mono::<F>(ctx, c, delta + eps_real);
    let z = x.add(&x.mul(&m));
    let ok = rv(&z.add(&y), delta as u32)? != rv(&x.add(&y), delta as u32)?;
    report.check(ok, || format!("instability: x = {x}, y = {y}, m = {m}, δ = {delta}"));
    Ok(())
}

/// Two to four summands, cancelling about half the time.
fn summands<F: ValuedField>(ctx: &F::Ctx, rng: &mut ChaCha8Rng, max_eps: i64) -> Vec<F> {
    loop {
        let n = rng.gen_range(2..=4);
        let mut xs: Vec<F> = (0..n - 1).map(|_| elem(ctx, rng, -2, 3)).collect();
        let partial = xs.iter().fold(F::zero(ctx), |a, b| a.add(b));
        if partial.is_exact_zero() {
            continue;
        }
        let last = if rng.gen_bool(0.5) {
            let v = value(&partial).as_int().unwrap() + rng.gen_range(1..=max_eps);
            partial.neg().add(&elem_of_value(ctx, rng, v, 2))
        } else {
            elem(ctx, rng, -2, 3)
        };
        xs.push(last);
        if !sum(ctx, &xs).is_exact_zero() {
            return xs;
        }
    }
}

fn classes<F: ValuedField>(xs: &[F], order: u32) -> hqe::Result<Vec<RVElem<F>>> {
    xs.iter().map(|x| rv(x, order)).collect()
}

fn sum<F: ValuedField>(ctx: &F::Ctx, xs: &[F]) -> F {
    xs.iter().fold(F::zero(ctx), |a, b| a.add(b))
}

fn min_value<F: ValuedField>(xs: &[F]) -> ValQ {
    xs.iter().map(value).min().unwrap()
}

/// Severity zero gives the class of the sum as the unique witness; otherwise
/// the reported severity is the measured one.
fn sums<F: ValuedField>(ctx: &F::Ctx, rng: &mut ChaCha8Rng, report: &mut SuiteReport) -> hqe::Result<()> {
    let delta = rng.gen_range(0..=4u32);
    let xs = summands::<F>(ctx, rng, 5);
    let s = sum(ctx, &xs);
    let mu = min_value(&xs);
    let sev = value(&s) - mu;
    let cls = classes(&xs, delta)?;
    match rv_sum_analyze(&cls)? {
        SumAnalysis::WellDefined(w) => {
            report.check(sev == ValQ::zero() && w == rv(&s, delta)?, || {
                format!("well-defined sum of {xs:?} at δ = {delta}: got {w}, severity {sev}")
            });
            // No other class of the same value is a witness.
            let v = value(&s).as_int().unwrap();
            for k in 0..=delta as i64 {
                let other = rv(&s.add(&mono(ctx, 1, v + k)), delta)?;
                if other != w {
                    let holds = oplus_holds_n(&cls, &other)?;
                    report.check(!holds, || format!("second witness {other} for {xs:?} at δ = {delta}"));
                }
            }
        }
        SumAnalysis::Ambiguous { severity, .. } => {
            report.check(sev > ValQ::zero() && severity == sev, || {
                format!("ambiguous sum of {xs:?} at δ = {delta}: reported {severity}, measured {sev}")
            });
        }
    }
    Ok(())
}

/// Sums `Σ x_i (1 + m_i)` over the perturbation grid.
fn perturbed_sums<F: ValuedField>(ctx: &F::Ctx, xs: &[F], order: u32) -> Vec<F> {
    let ms: Vec<F> = std::iter::once(F::zero(ctx)).chain(perturbations(ctx, order)).collect();
    let mut out = vec![F::zero(ctx)];
    for x in xs {
        out = out.iter().flat_map(|acc| ms.iter().map(move |m| acc.add(&x.add(&x.mul(m))))).collect();
        out.truncate(64);
    }
    out
}

/// With severity `ε > 0` and `γ ≥ δ + ε`, every `⊕_γ` witness projects to
/// `rv_δ(Σ x_i)`.
fn projection_of_witnesses<F: ValuedField>(ctx: &F::Ctx, rng: &mut ChaCha8Rng, report: &mut SuiteReport) -> hqe::Result<()> {
    let xs = loop {
        let xs = summands::<F>(ctx, rng, 3);
        if value(&sum(ctx, &xs)) > min_value(&xs) {
            break xs;
        }
    };
    let s = sum(ctx, &xs);
    let eps = (value(&s) - min_value(&xs)).as_int().unwrap() as u32;
    let delta = rng.gen_range(0..=2u32);
    let gamma = delta + eps + rng.gen_range(0..=1u32);
    let target = rv(&s, delta)?;
    let cls = classes(&xs, gamma)?;
    for w in perturbed_sums(ctx, &xs, gamma) {
        let wc = rv(&w, gamma)?;
        let is_witness = oplus_holds_n(&cls, &wc)?;
        let projected = rv_project(&wc, delta)?;
        report.check(is_witness && projected == target, || {
            format!("witness {wc} of {xs:?} at γ = {gamma}: witness {is_witness}, projects to {projected}, want {target}")
        });
    }
    Ok(())
}

/// At order `γ ≥ ε` all witnesses share the value of the sum; above it two
/// witnesses of different values exist.
fn witness_values<F: ValuedField>(ctx: &F::Ctx, rng: &mut ChaCha8Rng, report: &mut SuiteReport) -> hqe::Result<()> {
    let xs = loop {
        let xs = summands::<F>(ctx, rng, 4);
        if value(&sum(ctx, &xs)) > min_value(&xs) {
            break xs;
        }
    };
    let s = sum(ctx, &xs);
    let mu = min_value(&xs);
    let eps = (value(&s) - mu).as_int().unwrap() as u32;
    let gamma = rng.gen_range(0..=4u32);
    let cls = classes(&xs, gamma)?;
    let SumAnalysis::Ambiguous { witness_value, .. } = rv_sum_analyze(&cls)? else {
        report.check(false, || format!("cancelling sum {xs:?} reported well-defined"));
        return Ok(());
    };
    if gamma >= eps {
        report.check(witness_value == Some(value(&s)), || {
            format!("witness value of {xs:?} at γ = {gamma}: {witness_value:?}, want {}", value(&s))
        });
        for w in perturbed_sums(ctx, &xs, gamma) {
            report.check(value(&w) == value(&s), || format!("witness {w} of {xs:?} has another value"));
        }
    } else {
        let a = rv(&s, gamma)?;
        let b = RVElem::infinity(gamma);
        let c = rv(&s.add(&mono(ctx, 1, (mu.as_int().unwrap()) + gamma as i64 + 1)), gamma)?;
        let ok = witness_value.is_none()
            && oplus_holds_n(&cls, &a)?
            && oplus_holds_n(&cls, &b)?
            && oplus_holds_n(&cls, &c)?;
        report.check(ok, || format!("undetermined witness value for {xs:?} at γ = {gamma}"));
    }
    Ok(())
}

/// `oplus_holds` against explicit witnesses on a 20-point grid of
/// candidate third arguments around `x + y`.
fn oplus_grid<F: ValuedField>(ctx: &F::Ctx, rng: &mut ChaCha8Rng, report: &mut SuiteReport) -> hqe::Result<()> {
    let delta = rng.gen_range(0..=3u32);
    let x = elem::<F>(ctx, rng, -2, 3);
    let y = match rng.gen_range(0..5) {
        0 => F::zero(ctx),
        1 | 2 => {
            let v = value(&x).as_int().unwrap() + rng.gen_range(1..=4);
            x.neg().add(&elem_of_value(ctx, rng, v, 2))
        }
        _ => elem(ctx, rng, -2, 3),
    };
    let s = x.add(&y);
    let base = x.val_or_inf().min(y.val_or_inf()).as_int().unwrap_or(0);
    let mut zs = vec![F::zero(ctx), s.clone(), x.clone(), y.clone()];
    for k in base - 1..base + delta as i64 + 3 {
        zs.push(s.add(&mono(ctx, 1, k)));
        zs.push(s.add(&mono(ctx, -2, k)));
    }
    zs.truncate(20);
    let (rx, ry) = (rv(&x, delta)?, rv(&y, delta)?);
    let perturb = perturbations(ctx, delta);
    for z in &zs {
        let got = oplus_holds(&rx, &ry, &rv(z, delta)?)?;
        let want = oplus_by_witness(&x, &y, z, delta, &perturb)?;
        report.check(got == want, || format!("⊕_{delta}({x}, {y}, {z}): got {got}, witness search {want}"));
    }
    Ok(())
}

//! One-variable formulas: membership read off the pullback presentation
//! against direct evaluation.

use hqe::logic::{evaluate, normal_form, Atom, CmpOp, Env, Expr, Formula, RvTerm, VTerm};
use hqe::{Error, Poly, ValQ, ValuedField};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::gen::{self, clustered_poly, elem, grid, mono, poly_expr, random_poly};
use crate::oracle::same_point;
use crate::SuiteReport;

const LAURENT_FORMULAS: usize = 20;
const PADIC_FORMULAS: usize = 10;
const BASES: usize = 10;

pub(super) fn run(seed: u64, report: &mut SuiteReport) {
    backend::<hqe::LaurentQ>(&gen::laurent(), &mut gen::rng(seed, 80), LAURENT_FORMULAS, report);
    backend::<hqe::PAdic>(&gen::padic(), &mut gen::rng(seed, 81), PADIC_FORMULAS, report);
}

fn poly<F: ValuedField>(ctx: &F::Ctx, rng: &mut ChaCha8Rng) -> Poly<F> {
    if rng.gen_bool(0.6) {
        clustered_poly(ctx, rng, 3)
    } else {
        let deg = rng.gen_range(1..=3);
        random_poly(ctx, rng, deg)
    }
}

fn rv_of(d: u32, e: Expr) -> RvTerm {
    RvTerm::Rv(d, e)
}

fn atom<F: ValuedField>(ctx: &F::Ctx, rng: &mut ChaCha8Rng) -> Formula {
    let g = poly_expr(&poly::<F>(ctx, rng), "x");
    let k = VTerm::Const(ValQ::int(rng.gen_range(-1..=3)));
    match rng.gen_range(0..6) {
        0 => Formula::atom(Atom::FieldEq(g, Expr::int(0))),
        1 => {
            let d = rng.gen_range(0..=1);
            let w = Expr::literal(&elem::<F>(ctx, rng, -1, 3));
            Formula::atom(Atom::RvEq(rv_of(d, g), rv_of(d, w)))
        }
        2 => {
            let op = *[CmpOp::Gt, CmpOp::Eq, CmpOp::Le].choose(rng).unwrap();
            Formula::atom(Atom::VCmp(VTerm::Val(rv_of(0, g)), op, k))
        }
        3 => {
            let h = poly_expr(&poly::<F>(ctx, rng), "x");
            Formula::atom(Atom::VCmp(VTerm::Val(rv_of(0, g)), CmpOp::Lt, VTerm::Val(rv_of(0, h))))
        }
        4 => {
            let c = Expr::literal(&elem::<F>(ctx, rng, -1, 2));
            let w = Expr::literal(&elem::<F>(ctx, rng, -1, 2));
            Formula::atom(Atom::Oplus(0, vec![rv_of(0, g), rv_of(0, c), rv_of(0, w)]))
        }
        _ => Formula::not(Formula::atom(Atom::FieldEq(g, Expr::int(0)))),
    }
}

fn formula<F: ValuedField>(ctx: &F::Ctx, rng: &mut ChaCha8Rng) -> Formula {
    let mut f = atom::<F>(ctx, rng);
    for _ in 0..rng.gen_range(0..=2) {
        let b = atom::<F>(ctx, rng);
        f = match rng.gen_range(0..4) {
            0 => Formula::And(Box::new(f), Box::new(b)),
            1 => Formula::Or(Box::new(f), Box::new(b)),
            2 => Formula::Implies(Box::new(f), Box::new(b)),
            _ => Formula::And(Box::new(f), Box::new(Formula::Not(Box::new(b)))),
        };
    }
    f
}

/// Ten offsets `0, ±π^k` for `k ∈ {−1, 0, 1, 3}` and `π^6`.
fn offsets<F: ValuedField>(ctx: &F::Ctx) -> Vec<F> {
    let mut out = vec![F::zero(ctx)];
    for k in [-1, 0, 1, 3] {
        out.push(mono(ctx, 1, k));
        out.push(mono(ctx, -1, k));
    }
    out.push(mono(ctx, 1, 6));
    out
}

fn backend<F: ValuedField>(ctx: &F::Ctx, rng: &mut ChaCha8Rng, n: usize, report: &mut SuiteReport) {
    let name = F::backend_name(ctx);
    let char_zero = F::residue_char(ctx) == 0;
    let offs = offsets::<F>(ctx);
    let mut undecided = 0;
    for _ in 0..n {
        let phi = formula::<F>(ctx, rng);
        let nf = match normal_form::<F>(ctx, &phi, "x") {
            Ok(nf) => nf,
            Err(e) => {
                report.check(false, || format!("{name}: normal form of {phi}: {e}"));
                continue;
            }
        };
        if char_zero {
            report.check(nf.orders.iter().all(|&g| g == 0), || format!("{name}: {phi}: orders {:?}", nf.orders));
        }
        let mut bases = vec![F::zero(ctx)];
        for c in &nf.centers {
            if bases.len() < BASES && !bases.iter().any(|b| same_point(b, c)) {
                bases.push(c.clone());
            }
        }
        while bases.len() < BASES {
            bases.push(elem(ctx, rng, -2, 3));
        }
        for x0 in grid(&bases, &offs) {
            let direct = evaluate(ctx, &phi, &Env::new().with_field("x", x0.clone()));
            let via = nf.member(ctx, &x0);
            match (direct, via) {
                // The point sits on an approximate root; direct evaluation
                // cannot judge it at this precision.
                (Err(Error::PrecisionExhausted(_)), _) => undecided += 1,
                (Ok(a), Ok(b)) => report.check(a == b, || format!("{name}: {phi} at x = {x0}: direct {a}, pullback {b}\n{nf}")),
                (a, b) => report.check(false, || format!("{name}: {phi} at x = {x0}: direct {a:?}, pullback {b:?}")),
            }
        }
    }
    report.note(format!("{name}: {undecided} points undecidable by direct evaluation at working precision"));
}

//! Sentences `∃y. g(y) = 0 ∧ side conditions` decided by elimination and by
//! searching for the roots of `g` directly.

use hqe::logic::{decide, parse_formula, qe, Atom, CmpOp, Expr, Formula, RvTerm, VTerm};
use hqe::rv::rv;
use hqe::{LaurentCtx, LaurentQ, PAdic, PAdicCtx, Poly, ValQ, ValuedField};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::gen::{self, mono, poly_expr};
use crate::oracle::{horner, newton_roots, same_point};
use crate::SuiteReport;

const LAURENT_SENTENCES: usize = 30;
const PADIC_SENTENCES: usize = 16;

pub(super) fn run(seed: u64, report: &mut SuiteReport) {
    fixed(report);
    backend::<hqe::LaurentQ>(&gen::laurent(), &mut gen::rng(seed, 70), LAURENT_SENTENCES, report);
    backend::<hqe::PAdic>(&gen::padic(), &mut gen::rng(seed, 71), PADIC_SENTENCES, report);
}

enum Side<F> {
    /// `v(y − c) > k`
    ValGt(F, i64),
    /// `v(y − c) = k`
    ValEq(F, i64),
    /// `rv[d](y − c) = rv[d](w)`
    RvEq(u32, F, F),
    /// `y ≠ c`
    Ne(F),
}

fn y_minus<F: ValuedField>(c: &F) -> Expr {
    Expr::Sub(Box::new(Expr::var("y")), Box::new(Expr::literal(c)))
}

impl<F: ValuedField> Side<F> {
    fn formula(&self) -> Formula {
        let val = |c: &F, op, k: i64| {
            Formula::atom(Atom::VCmp(VTerm::Val(RvTerm::Rv(0, y_minus(c))), op, VTerm::Const(ValQ::int(k))))
        };
        match self {
            Side::ValGt(c, k) => val(c, CmpOp::Gt, *k),
            Side::ValEq(c, k) => val(c, CmpOp::Eq, *k),
            Side::RvEq(d, c, w) => Formula::atom(Atom::RvEq(RvTerm::Rv(*d, y_minus(c)), RvTerm::Rv(*d, Expr::literal(w)))),
            Side::Ne(c) => Formula::not(Formula::atom(Atom::FieldEq(Expr::var("y"), Expr::literal(c)))),
        }
    }

    /// Direct evaluation at a root.
    fn holds(&self, y: &F) -> hqe::Result<bool> {
        let diff = |c: &F| {
            let d = y.sub(c);
            if d.is_zero_to_precision() {
                ValQ::PosInf
            } else {
                d.val_or_inf()
            }
        };
        Ok(match self {
            Side::ValGt(c, k) => diff(c) > ValQ::int(*k),
            Side::ValEq(c, k) => diff(c) == ValQ::int(*k),
            Side::RvEq(d, c, w) => {
                let l = y.sub(c);
                let l = if l.is_zero_to_precision() { hqe::RVElem::infinity(*d) } else { rv(&l, *d)? };
                l == rv(w, *d)?
            }
            Side::Ne(c) => !y.sub(c).is_zero_to_precision(),
        })
    }
}

/// Start points `c·π^k + c'·π^{k+1}` and `0`.
fn starts<F: ValuedField>(ctx: &F::Ctx) -> Vec<F> {
    let mut out = vec![F::zero(ctx)];
    for c in unit_pool::<F>(ctx) {
        for c2 in [-1, 0, 1, 2] {
            for k in -2..=3 {
                out.push(mono::<F>(ctx, c, k).add(&mono(ctx, c2, k + 1)));
            }
        }
    }
    out
}

fn unit_pool<F: ValuedField>(ctx: &F::Ctx) -> Vec<i64> {
    [1, -1, 2, -2, 3].into_iter().filter(|&c| F::from_i64(ctx, c).known_val() == Some(0)).collect()
}

fn linear<F: ValuedField>(ctx: &F::Ctx, r: &F) -> Poly<F> {
    Poly::new(ctx, vec![r.neg(), F::one(ctx)])
}

fn quadratic<F: ValuedField>(ctx: &F::Ctx, c: &F) -> Poly<F> {
    Poly::new(ctx, vec![c.neg(), F::zero(ctx), F::one(ctx)])
}

/// Factors of degree at most 4 in total, some with roots in `K` and some
/// without.
fn factors<F: ValuedField>(ctx: &F::Ctx, rng: &mut ChaCha8Rng) -> Vec<Poly<F>> {
    let pool = unit_pool::<F>(ctx);
    let grid_point = |rng: &mut ChaCha8Rng| {
        if rng.gen_bool(0.1) {
            return F::zero(ctx);
        }
        let k = rng.gen_range(-2..=3);
        mono::<F>(ctx, *pool.choose(rng).unwrap(), k).add(&mono(ctx, rng.gen_range(-1..=2), k + 1))
    };
    let mut out = Vec::new();
    let mut deg = 0;
    let target = rng.gen_range(1..=4);
    while deg < target {
        let room = target - deg;
        let kind = if room >= 2 { rng.gen_range(0..4) } else { 0 };
        let s = mono::<F>(ctx, *pool.choose(rng).unwrap(), rng.gen_range(-1..=2));
        let f = match kind {
            0 | 1 => linear(ctx, &grid_point(rng)),
            // Square of a unit times s²: two roots in K.
            2 => {
                let u = mono::<F>(ctx, *pool.choose(rng).unwrap(), rng.gen_range(1..=3));
                quadratic(ctx, &s.mul(&s).mul(&F::one(ctx).add(&u)))
            }
            // 2·s² or π·s²: no roots.
            _ => {
                let n = if rng.gen_bool(0.5) { F::from_i64(ctx, 2) } else { F::uniformizer_pow(ctx, 1) };
                quadratic(ctx, &s.mul(&s).mul(&n))
            }
        };
        deg += f.degree().unwrap();
        out.push(f);
    }
    out
}

fn side<F: ValuedField>(ctx: &F::Ctx, rng: &mut ChaCha8Rng, roots: &[F], st: &[F]) -> Side<F> {
    let c = if rng.gen_bool(0.7) { st.choose(rng).unwrap().clone() } else { F::zero(ctx) };
    match rng.gen_range(0..4) {
        0 => Side::ValGt(c, rng.gen_range(-1..=3)),
        1 => Side::ValEq(c, rng.gen_range(-1..=3)),
        2 => {
            let d = rng.gen_range(0..=1);
            let w = match roots.choose(rng) {
                Some(r) if rng.gen_bool(0.6) && !r.sub(&c).is_zero_to_precision() => r.sub(&c),
                _ => st.choose(rng).unwrap().add(&mono(ctx, 1, 4)),
            };
            Side::RvEq(d, c, w)
        }
        _ => Side::Ne(match roots.choose(rng) {
            Some(r) if rng.gen_bool(0.5) && r.is_exact() => r.clone(),
            _ => c,
        }),
    }
}

fn backend<F: ValuedField>(ctx: &F::Ctx, rng: &mut ChaCha8Rng, n: usize, report: &mut SuiteReport) {
    let name = F::backend_name(ctx);
    let st = starts::<F>(ctx);
    for _ in 0..n {
        let fs = factors::<F>(ctx, rng);
        let g = fs.iter().skip(1).fold(fs[0].clone(), |a, b| a.mul(b));
        // Root search factor by factor, kept only where g itself vanishes.
        let mut roots: Vec<F> = Vec::new();
        for f in &fs {
            for r in newton_roots(f, &st) {
                if horner(&g, &r).is_zero_to_precision() && !roots.iter().any(|q| same_point(q, &r)) {
                    roots.push(r);
                }
            }
        }
        let sides: Vec<Side<F>> = (0..rng.gen_range(0..=2)).map(|_| side(ctx, rng, &roots, &st)).collect();
        let body = Formula::and_all(
            std::iter::once(Formula::atom(Atom::FieldEq(poly_expr(&g, "y"), Expr::int(0))))
                .chain(sides.iter().map(Side::formula)),
        );
        let sentence = Formula::ExistsField("y".into(), Box::new(body));
        let oracle = roots.iter().map(|r| sides.iter().map(|s| s.holds(r)).collect::<hqe::Result<Vec<bool>>>());
        let mut want = false;
        for r in oracle {
            match r {
                Ok(bs) => want |= bs.into_iter().all(|b| b),
                Err(e) => {
                    report.check(false, || format!("{name}: oracle on {sentence}: {e}"));
                }
            }
        }
        check_sentence::<F>(ctx, &name, &sentence, want, report);
    }
}

fn check_sentence<F: ValuedField>(ctx: &F::Ctx, name: &str, sentence: &Formula, want: bool, report: &mut SuiteReport) {
    match qe::<F>(ctx, sentence) {
        Ok(out) => report.check(!out.has_field_quantifier(), || format!("{name}: field quantifier left in {out}")),
        Err(e) => report.check(false, || format!("{name}: qe {sentence}: {e}")),
    }
    match decide::<F>(ctx, sentence) {
        Ok(got) => report.check(got == want, || format!("{name}: {sentence}: decided {got}, roots say {want}")),
        Err(e) => report.check(false, || format!("{name}: decide {sentence}: {e}")),
    }
}

/// The square-class pair over `ℚ((t))` and two 2-adic squares.
fn fixed(report: &mut SuiteReport) {
    let lc = LaurentCtx::default();
    let pc = PAdicCtx::new(2);
    let laurent = [("EX y:K. y^2 = t^2", true), ("EX y:K. y^2 = 2*t^2", false)];
    for (s, expected) in laurent {
        fixed_one::<LaurentQ>(&lc, s, expected, report);
    }
    for (s, expected) in [("EX y:K. y^2 = 17", true), ("EX y:K. y^2 = 3", false)] {
        fixed_one::<PAdic>(&pc, s, expected, report);
    }
}

fn fixed_one<F: ValuedField>(ctx: &F::Ctx, s: &str, expected: bool, report: &mut SuiteReport) {
    let name = F::backend_name(ctx);
    let phi = match parse_formula(s) {
        Ok(f) => f,
        Err(e) => return report.check(false, || format!("{s}: {e}")),
    };
    // The root search must agree with the known answer before it is used.
    let Formula::ExistsField(_, body) = &phi else { unreachable!() };
    let Formula::Atom(Atom::FieldEq(l, r)) = body.as_ref() else { unreachable!() };
    let g = hqe::logic::expr_poly::<F>(ctx, &Expr::Sub(Box::new(l.clone()), Box::new(r.clone())), "y").expect("polynomial");
    let found = !newton_roots(&g, &starts::<F>(ctx)).is_empty();
    report.check(found == expected, || format!("{name}: root search on {s} gives {found}"));
    check_sentence::<F>(ctx, &name, &phi, expected, report);
}

//! Truth of formulas under a concrete assignment.
//!
//! RV quantifiers range over infinite sets, so only these shapes are
//! decided:
//! * every disjunct of the body pins the variable by an equation `w = τ`;
//! * the two-witness pattern `∃w₁ ∃w₂ (⊕(x̄, w₁) ∧ ⊕(x̄, w₂) ∧ v(w₁) ≠ v(w₂))`,
//!   which holds iff the sum of `x̄` cancels by more than the order;
//! * anything else is tried on a finite candidate list; a hit proves the
//!   existential, a miss is reported as non-effective.
//!
//! Universal RV quantifiers are evaluated as `¬∃¬`.

use std::collections::BTreeMap;

use super::ast::{Atom, CmpOp, Expr, Formula, Rat, RvTerm, VTerm};
use crate::error::{Error, Result};
use crate::field::ValuedField;
use crate::rv::{canonical_severity, oplus_holds_n, rv, rv_mul, rv_pow, rv_project, rv_sum_witness, sum_value_ambiguous, RVElem};
use crate::valq::ValQ;

/// Values for free variables of both sorts.
#[derive(Clone, Debug)]
pub struct Env<F: ValuedField> {
    pub field: BTreeMap<String, F>,
    pub rv: BTreeMap<String, RVElem<F>>,
}

impl<F: ValuedField> Default for Env<F> {
    fn default() -> Self {
        Env { field: BTreeMap::new(), rv: BTreeMap::new() }
    }
}

impl<F: ValuedField> Env<F> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_field(mut self, name: &str, x: F) -> Self {
        self.field.insert(name.to_string(), x);
        self
    }

    pub fn with_rv(mut self, name: &str, w: RVElem<F>) -> Self {
        self.rv.insert(name.to_string(), w);
        self
    }
}

pub fn eval_expr<F: ValuedField>(ctx: &F::Ctx, e: &Expr, env: &Env<F>) -> Result<F> {
    Ok(match e {
        Expr::Var(n) => env
            .field
            .get(n)
            .cloned()
            .ok_or_else(|| Error::Invalid(format!("unassigned field variable {n}")))?,
        Expr::Unif => F::uniformizer_pow(ctx, 1),
        Expr::Const(Rat(r)) => F::from_rational(ctx, r),
        Expr::BigO(k) => F::approx_zero(ctx, *k),
        Expr::Add(a, b) => eval_expr(ctx, a, env)?.add(&eval_expr(ctx, b, env)?),
        Expr::Sub(a, b) => eval_expr(ctx, a, env)?.sub(&eval_expr(ctx, b, env)?),
        Expr::Mul(a, b) => eval_expr(ctx, a, env)?.mul(&eval_expr(ctx, b, env)?),
        Expr::Div(a, b) => eval_expr(ctx, a, env)?.div(&eval_expr(ctx, b, env)?)?,
        Expr::Neg(a) => eval_expr(ctx, a, env)?.neg(),
        Expr::Pow(a, k) => eval_expr(ctx, a, env)?.pow(*k)?,
    })
}

fn sum_args<F: ValuedField>(ctx: &F::Ctx, d: u32, ts: &[RvTerm], env: &Env<F>) -> Result<Vec<RVElem<F>>> {
    let xs = ts.iter().map(|t| eval_rv_term(ctx, t, env, Some(d))).collect::<Result<Vec<_>>>()?;
    for x in &xs {
        if x.order() != d {
            return Err(Error::OrderMismatch(x.order(), d));
        }
    }
    Ok(xs)
}

/// Value of an RV term. `hint` gives the order of a bare `inf`.
pub fn eval_rv_term<F: ValuedField>(ctx: &F::Ctx, t: &RvTerm, env: &Env<F>, hint: Option<u32>) -> Result<RVElem<F>> {
    match t {
        RvTerm::Rv(d, e) => rv(&eval_expr(ctx, e, env)?, *d),
        RvTerm::Inf => Ok(RVElem::infinity(hint.unwrap_or(0))),
        RvTerm::Var(n) => env
            .rv
            .get(n)
            .cloned()
            .ok_or_else(|| Error::Invalid(format!("unassigned RV variable {n}"))),
        RvTerm::Proj(d, inner) => match inner.as_ref() {
            RvTerm::Inf => Ok(RVElem::infinity(*d)),
            RvTerm::Sum(g, ts) => {
                if d > g {
                    return Err(Error::OrderViolation { from: *g, to: *d });
                }
                let xs = sum_args(ctx, *g, ts, env)?;
                let slack = ValQ::int(*g as i64 - *d as i64);
                if canonical_severity(&xs)? > slack {
                    return Err(Error::Invalid(format!("sum[{g}] is not determined at order {d}")));
                }
                rv_project(&rv_sum_witness(&xs)?, *d)
            }
            other => rv_project(&eval_rv_term(ctx, other, env, None)?, *d),
        },
        RvTerm::Sum(d, ts) => {
            let xs = sum_args(ctx, *d, ts, env)?;
            if canonical_severity(&xs)? > ValQ::zero() {
                return Err(Error::Invalid(format!("sum[{d}] is not well defined here")));
            }
            rv_sum_witness(&xs)
        }
        RvTerm::Mul(a, b) => {
            let x = eval_rv_term(ctx, a, env, hint)?;
            let y = eval_rv_term(ctx, b, env, Some(x.order()))?;
            let x = if matches!(a.as_ref(), RvTerm::Inf) { RVElem::infinity(y.order()) } else { x };
            rv_mul(&x, &y)
        }
        RvTerm::Pow(a, k) => rv_pow(&eval_rv_term(ctx, a, env, hint)?, *k),
    }
}

fn eval_pair<F: ValuedField>(
    ctx: &F::Ctx,
    a: &RvTerm,
    b: &RvTerm,
    env: &Env<F>,
) -> Result<(RVElem<F>, RVElem<F>)> {
    if matches!(a, RvTerm::Inf) {
        let y = eval_rv_term(ctx, b, env, None)?;
        return Ok((RVElem::infinity(y.order()), y));
    }
    let x = eval_rv_term(ctx, a, env, None)?;
    let y = eval_rv_term(ctx, b, env, Some(x.order()))?;
    if x.order() != y.order() {
        return Err(Error::OrderMismatch(x.order(), y.order()));
    }
    Ok((x, y))
}

fn eval_vterm<F: ValuedField>(ctx: &F::Ctx, v: &VTerm, env: &Env<F>) -> Result<ValQ> {
    match v {
        VTerm::Const(q) => Ok(*q),
        VTerm::Val(t) => Ok(eval_rv_term(ctx, t, env, None)?.value()),
    }
}

pub fn eval_atom<F: ValuedField>(ctx: &F::Ctx, a: &Atom, env: &Env<F>) -> Result<bool> {
    match a {
        Atom::FieldEq(l, r) => {
            let d = eval_expr(ctx, l, env)?.sub(&eval_expr(ctx, r, env)?);
            Ok(d.is_exact_zero() || d.val()? == ValQ::PosInf)
        }
        Atom::RvEq(l, r) => {
            let (x, y) = eval_pair(ctx, l, r, env)?;
            Ok(x == y)
        }
        Atom::Oplus(d, ts) => {
            let xs = sum_args(ctx, *d, ts, env)?;
            let (z, xs) = xs.split_last().ok_or_else(|| Error::Invalid("empty oplus".into()))?;
            oplus_holds_n(xs, z)
        }
        Atom::VCmp(l, op, r) => Ok(op.holds(&eval_vterm(ctx, l, env)?, &eval_vterm(ctx, r, env)?)),
    }
}

/// Truth value of `phi` under `env`.
pub fn evaluate<F: ValuedField>(ctx: &F::Ctx, phi: &Formula, env: &Env<F>) -> Result<bool> {
    match phi {
        Formula::True => Ok(true),
        Formula::False => Ok(false),
        Formula::Atom(a) => eval_atom(ctx, a, env),
        Formula::Not(a) => Ok(!evaluate(ctx, a, env)?),
        Formula::And(a, b) => Ok(evaluate(ctx, a, env)? && evaluate(ctx, b, env)?),
        Formula::Or(a, b) => Ok(evaluate(ctx, a, env)? || evaluate(ctx, b, env)?),
        Formula::Implies(a, b) => Ok(!evaluate(ctx, a, env)? || evaluate(ctx, b, env)?),
        Formula::ExistsField(..) | Formula::ForallField(..) => {
            let reduced = super::qe::qe_with_env(ctx, phi, env)?;
            evaluate(ctx, &reduced, env)
        }
        Formula::ExistsRv(w, d, body) => exists_rv(ctx, w, *d, body, env),
        Formula::ForallRv(w, d, body) => Ok(!exists_rv(ctx, w, *d, &Formula::not((**body).clone()), env)?),
    }
}

fn conjuncts(f: &Formula, out: &mut Vec<Formula>) {
    match f {
        Formula::And(a, b) => {
            conjuncts(a, out);
            conjuncts(b, out);
        }
        other => out.push(other.clone()),
    }
}

/// Recognises `∃w₂. ⊕(x̄, w₁) ∧ ⊕(x̄, w₂) ∧ v(w₁) ≠ v(w₂)` and returns `x̄`.
fn two_witness_pattern(w1: &str, d: u32, body: &Formula) -> Option<Vec<RvTerm>> {
    let Formula::ExistsRv(w2, d2, inner) = body else { return None };
    if *d2 != d || w1 == w2 {
        return None;
    }
    let mut cs = Vec::new();
    conjuncts(inner, &mut cs);
    if cs.len() != 3 {
        return None;
    }
    let mut sums: Vec<(String, Vec<RvTerm>)> = Vec::new();
    let mut separated = false;
    for c in &cs {
        match c {
            Formula::Atom(Atom::Oplus(e, ts)) if *e == d => {
                let (last, xs) = ts.split_last()?;
                let RvTerm::Var(n) = last else { return None };
                sums.push((n.clone(), xs.to_vec()));
            }
            Formula::Atom(Atom::VCmp(VTerm::Val(RvTerm::Var(a)), CmpOp::Ne, VTerm::Val(RvTerm::Var(b))))
                if (a == w1 && b == w2) || (a == w2 && b == w1) =>
            {
                separated = true
            }
            Formula::Not(g) => match g.as_ref() {
                Formula::Atom(Atom::VCmp(VTerm::Val(RvTerm::Var(a)), CmpOp::Eq, VTerm::Val(RvTerm::Var(b))))
                    if (a == w1 && b == w2) || (a == w2 && b == w1) =>
                {
                    separated = true
                }
                _ => return None,
            },
            _ => return None,
        }
    }
    if !separated || sums.len() != 2 || sums[0].1 != sums[1].1 {
        return None;
    }
    let names: Vec<&str> = sums.iter().map(|s| s.0.as_str()).collect();
    if !(names.contains(&w1) && names.contains(&w2.as_str())) {
        return None;
    }
    let xs = sums.swap_remove(0).1;
    if xs.iter().any(|t| t.mentions_rv(w1) || t.mentions_rv(w2)) {
        return None;
    }
    Some(xs)
}

fn literal_mentions_rv(f: &Formula, w: &str) -> bool {
    f.free_rv_vars().contains(w)
}

fn pin_of(lit: &Formula, w: &str) -> Option<RvTerm> {
    match lit {
        Formula::Atom(Atom::RvEq(RvTerm::Var(n), t)) | Formula::Atom(Atom::RvEq(t, RvTerm::Var(n)))
            if n == w && !t.mentions_rv(w) =>
        {
            Some(t.clone())
        }
        _ => None,
    }
}

fn exists_rv<F: ValuedField>(ctx: &F::Ctx, w: &str, d: u32, body: &Formula, env: &Env<F>) -> Result<bool> {
    if let Some(xs) = two_witness_pattern(w, d, body) {
        let vals = sum_args(ctx, d, &xs, env)?;
        return sum_value_ambiguous(&vals);
    }
    let disjuncts = body.dnf();
    let pins: Option<Vec<RvTerm>> = disjuncts.iter().map(|c| c.iter().find_map(|l| pin_of(l, w))).collect();
    if let Some(pins) = pins {
        'disjunct: for (lits, pin) in disjuncts.iter().zip(pins) {
            for l in lits.iter().filter(|l| !literal_mentions_rv(l, w)) {
                if !evaluate(ctx, l, env)? {
                    continue 'disjunct;
                }
            }
            let value = eval_rv_term(ctx, &pin, env, Some(d))?;
            if value.order() != d {
                return Err(Error::OrderMismatch(value.order(), d));
            }
            let inner = env.clone().with_rv(w, value);
            let mut ok = true;
            for l in lits.iter().filter(|l| literal_mentions_rv(l, w)) {
                if !evaluate(ctx, l, &inner)? {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(true);
            }
        }
        return Ok(false);
    }
    for cand in candidates(ctx, d, body, env) {
        let inner = env.clone().with_rv(w, cand);
        if evaluate(ctx, body, &inner)? {
            return Ok(true);
        }
    }
    Err(Error::NonEffectiveQuantifier(format!("EX {w}:RV[{d}]. {body}")))
}

/// Classes tried for an unpinned RV quantifier: `∞`, `±c·t^k` for small
/// `k`, and the classes of the closed constants in the body.
fn candidates<F: ValuedField>(ctx: &F::Ctx, d: u32, body: &Formula, env: &Env<F>) -> Vec<RVElem<F>> {
    let mut out = vec![RVElem::infinity(d)];
    let mut push = |x: F| {
        if let Ok(c) = rv(&x, d) {
            if !out.contains(&c) {
                out.push(c);
            }
        }
    };
    let mut consts: Vec<F> = Vec::new();
    body.map_atoms(&mut |a| {
        for t in a.terms() {
            t.map_exprs(&mut |_, e| {
                if let Ok(x) = eval_expr(ctx, e, env) {
                    consts.push(x);
                }
                RvTerm::Inf
            });
        }
        Formula::True
    });
    for x in consts {
        if !x.is_zero_to_precision() {
            push(x.neg());
            push(x);
        }
    }
    for k in -4..=4 {
        for c in [1, -1, 2] {
            push(F::uniformizer_pow(ctx, k).scale_int(c));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{LaurentCtx, LaurentQ};
    use crate::logic::parser::{parse_formula, parse_formula_with_rv};

    fn ctx() -> LaurentCtx {
        LaurentCtx { cap: 32 }
    }

    fn truth(s: &str) -> bool {
        evaluate::<LaurentQ>(&ctx(), &parse_formula(s).unwrap(), &Env::new()).unwrap()
    }

    #[test]
    fn closed_atoms() {
        assert!(!truth("rv[0](t^2) = rv[0](2*t^2)"));
        assert!(truth("rv[0](t^2) = rv[0](t^2 + t^3)"));
        assert!(truth("true & !false"));
        assert!(truth("v(t^3 - t^2) = 2"));
        assert!(truth("v(rv[1](t)) < v(rv[1](1/t^-2))"));
        assert!(truth("t*t^-1 = 1"));
        assert!(truth("oplus[0](rv[0](1), rv[0](t), rv[0](1))"));
    }

    #[test]
    fn two_witness_pattern_detects_cancellation() {
        // f = x^2 - t^2 around 0 at x = t + t^3: the terms x^2 and -t^2
        // cancel by 2 > 0.
        let s = "EX a:RV[0]. EX b:RV[0]. oplus[0](rv[0]((t + t^3)^2), rv[0](-t^2), a) \
                 & oplus[0](rv[0]((t + t^3)^2), rv[0](-t^2), b) & v(a) != v(b)";
        assert!(truth(s));
        let s = s.replace("t^3", "t");
        assert!(!truth(&s));
    }

    #[test]
    fn pinned_quantifiers() {
        assert!(truth("EX w:RV[0]. w = rv[0](t) & v(w) = 1"));
        assert!(!truth("EX w:RV[0]. (w = rv[0](t) | w = rv[0](2)) & v(w) = 3"));
        assert!(truth("ALL w:RV[0]. w != rv[0](t) | v(w) = 1"));
        assert!(truth("EX w:RV[0]. w = proj[0](sum[2](rv[2](1), rv[2](t^2))) & w = rv[0](1)"));
    }

    #[test]
    fn ambiguous_sum_is_rejected() {
        let f = parse_formula("rv[0](1) = sum[0](rv[0](1), rv[0](-1))").unwrap();
        assert!(evaluate::<LaurentQ>(&ctx(), &f, &Env::new()).is_err());
    }

    #[test]
    fn candidate_search_and_non_effective() {
        assert!(truth("EX w:RV[0]. v(w) = -3"));
        let f = parse_formula("EX w:RV[0]. v(w) = 40").unwrap();
        assert!(matches!(
            evaluate::<LaurentQ>(&ctx(), &f, &Env::new()),
            Err(Error::NonEffectiveQuantifier(_))
        ));
    }

    #[test]
    fn free_rv_variables() {
        let f = parse_formula_with_rv("v(w) > 0", &["w"]).unwrap();
        let c = ctx();
        let env = Env::new().with_rv("w", rv(&LaurentQ::uniformizer_pow(&c, 2), 0).unwrap());
        assert!(evaluate(&c, &f, &env).unwrap());
    }
}

//! Elimination of field quantifiers, innermost first, with every parameter
//! instantiated.
//!
//! For `∃x` the body is put in disjunctive normal form and each disjunct is
//! handled by one of three routes:
//! * **equations present**: `x` ranges over the roots of the gcd `f` of the
//!   equations. `f` is split by gcds against every other polynomial in `x`
//!   until each factor `h` either divides or is coprime to each of them, so
//!   at a root `λ` of `h`, `g(λ) = 0` iff `h | g`. The disjunct becomes the
//!   disjunction over the roots of its literals evaluated at `λ`;
//! * **only linear leading-term equations**: decided by ball geometry;
//! * **otherwise**: rewritten over the leading terms of `x − αᵢ` at finitely
//!   many centers (see [`super::normal_form`]) and, splitting on the
//!   center closest to `x`, over the leading term of a single difference.

use std::cell::RefCell;
use std::collections::BTreeSet;

use super::ast::{fresh_name, Atom, Expr, Formula, Rat, RvTerm};
use super::eval::{eval_rv_term, Env};
use super::linear::{eliminate_linear_exists, LinearConstraint};
use super::normal_form::pullback;
use crate::decomp::roots;
use crate::error::{Error, Result};
use crate::field::ValuedField;
use crate::poly::Poly;

/// `φ` with all field quantifiers removed.
pub fn qe<F: ValuedField>(ctx: &F::Ctx, phi: &Formula) -> Result<Formula> {
    qe_with_env::<F>(ctx, phi, &Env::new())
}

/// As [`qe`], after replacing the field variables bound in `env` by
/// literals.
pub fn qe_with_env<F: ValuedField>(ctx: &F::Ctx, phi: &Formula, env: &Env<F>) -> Result<Formula> {
    let mut phi = phi.clone();
    let free = phi.free_field_vars();
    for (name, x) in &env.field {
        if free.contains(name) {
            phi = phi.subst_field(name, &Expr::literal(x));
        }
    }
    let out = rec::<F>(ctx, &phi)?;
    assert!(!out.has_field_quantifier(), "field quantifier left after elimination");
    Ok(out)
}

/// `qe` followed by evaluation.
pub fn decide<F: ValuedField>(ctx: &F::Ctx, sentence: &Formula) -> Result<bool> {
    let free = sentence.free_field_vars();
    if !free.is_empty() {
        return Err(Error::Invalid(format!("not a sentence: free field variables {free:?}")));
    }
    let reduced = qe::<F>(ctx, sentence)?;
    super::eval::evaluate(ctx, &reduced, &Env::<F>::new())
}

/// Eliminates the quantifiers inside `body` first when they do not depend
/// on `x`; otherwise `x` goes first, which needs an equation in `x`.
fn inner_first<F: ValuedField>(ctx: &F::Ctx, x: &str, body: &Formula) -> Result<Formula> {
    match rec::<F>(ctx, body) {
        Ok(b) => eliminate_exists::<F>(ctx, x, &b),
        Err(Error::Unsupported(_)) if body.has_field_quantifier() => eliminate_exists::<F>(ctx, x, body),
        Err(e) => Err(e),
    }
}

fn rec<F: ValuedField>(ctx: &F::Ctx, phi: &Formula) -> Result<Formula> {
    if !phi.has_field_quantifier() {
        return Ok(phi.clone());
    }
    Ok(match phi {
        Formula::ExistsField(x, body) => inner_first::<F>(ctx, x, body)?,
        Formula::ForallField(x, body) => Formula::not(inner_first::<F>(ctx, x, &Formula::not((**body).clone()))?),
        Formula::Not(a) => Formula::not(rec::<F>(ctx, a)?),
        Formula::And(a, b) => Formula::and(rec::<F>(ctx, a)?, rec::<F>(ctx, b)?),
        Formula::Or(a, b) => Formula::or(rec::<F>(ctx, a)?, rec::<F>(ctx, b)?),
        Formula::Implies(a, b) => Formula::or(Formula::not(rec::<F>(ctx, a)?), rec::<F>(ctx, b)?),
        Formula::ExistsRv(w, d, a) => Formula::ExistsRv(w.clone(), *d, Box::new(rec::<F>(ctx, a)?)),
        Formula::ForallRv(w, d, a) => Formula::ForallRv(w.clone(), *d, Box::new(rec::<F>(ctx, a)?)),
        Formula::True | Formula::False | Formula::Atom(_) => phi.clone(),
    })
}

/// The polynomial in `x` denoted by `e`; every other name must be gone.
pub fn expr_poly<F: ValuedField>(ctx: &F::Ctx, e: &Expr, x: &str) -> Result<Poly<F>> {
    Ok(match e {
        Expr::Var(n) if n == x => Poly::x(ctx),
        Expr::Var(n) => return Err(Error::Unsupported(format!("parameter {n} is not instantiated"))),
        Expr::Unif => Poly::constant(F::uniformizer_pow(ctx, 1)),
        Expr::Const(Rat(r)) => Poly::constant(F::from_rational(ctx, r)),
        Expr::BigO(k) => Poly::new(ctx, vec![F::approx_zero(ctx, *k)]),
        Expr::Add(a, b) => expr_poly(ctx, a, x)?.add(&expr_poly(ctx, b, x)?),
        Expr::Sub(a, b) => expr_poly(ctx, a, x)?.sub(&expr_poly(ctx, b, x)?),
        Expr::Mul(a, b) => expr_poly(ctx, a, x)?.mul(&expr_poly(ctx, b, x)?),
        Expr::Neg(a) => expr_poly(ctx, a, x)?.neg(),
        Expr::Div(a, b) => {
            let d = expr_poly::<F>(ctx, b, x)?;
            match d.degree() {
                Some(0) => expr_poly(ctx, a, x)?.scale(&d.coeff(0).inv()?),
                None => return Err(Error::DivisionByZero),
                _ => return Err(Error::Unsupported(format!("division by a polynomial in {x}"))),
            }
        }
        Expr::Pow(a, k) => {
            let base = expr_poly(ctx, a, x)?;
            if *k >= 0 {
                base.pow(*k as u32)
            } else if base.degree() == Some(0) {
                Poly::constant(base.coeff(0).pow(*k)?)
            } else {
                return Err(Error::Unsupported(format!("negative power of a polynomial in {x}")));
            }
        }
    })
}

/// Every polynomial in `x` occurring in `f`: equation sides and arguments
/// of `rv`.
pub(crate) fn polys_in<F: ValuedField>(ctx: &F::Ctx, f: &Formula, x: &str) -> Result<Vec<Poly<F>>> {
    let found = RefCell::new(Vec::new());
    let err = RefCell::new(None);
    let push = |e: &Expr| match expr_poly::<F>(ctx, e, x) {
        Ok(p) => found.borrow_mut().push(p),
        Err(e) => *err.borrow_mut() = Some(e),
    };
    f.map_atoms(&mut |a| {
        match a {
            Atom::FieldEq(l, r) if l.mentions(x) || r.mentions(x) => {
                push(&Expr::Sub(Box::new(l.clone()), Box::new(r.clone())))
            }
            _ => {
                for t in a.terms() {
                    t.map_exprs(&mut |_, e| {
                        if e.mentions(x) {
                            push(e);
                        }
                        RvTerm::Inf
                    });
                }
            }
        }
        Formula::True
    });
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(found.into_inner()),
    }
}

fn degree(p: &Poly<impl ValuedField>) -> usize {
    p.degree().unwrap_or(0)
}

/// Splits `f` into factors each of which divides or is coprime to every
/// polynomial in `others` and is squarefree.
fn split<F: ValuedField>(f: &Poly<F>, others: &[Poly<F>]) -> Result<Vec<Poly<F>>> {
    let mut todo = vec![f.monic()?];
    let mut done = Vec::new();
    while let Some(h) = todo.pop() {
        let dh = degree(&h);
        if dh == 0 {
            continue;
        }
        let dh_prime = h.derivative(1);
        let mut cut = None;
        for g in others.iter().chain(std::iter::once(&dh_prime)) {
            if g.clone().trim_approx().is_zero() {
                continue;
            }
            let c = h.gcd(g)?;
            let dc = degree(&c);
            if dc >= 1 && dc < dh {
                cut = Some(c);
                break;
            }
        }
        match cut {
            Some(c) => {
                let q = h.div_exact(&c)?;
                // Degree measure of the recursion.
                assert!(degree(&c) < dh && degree(&q) < dh, "factor degrees must drop");
                todo.push(c);
                todo.push(q);
            }
            None => done.push(h),
        }
    }
    Ok(done)
}

fn divides<F: ValuedField>(h: &Poly<F>, g: &Poly<F>) -> Result<bool> {
    Ok(g.rem(h)?.trim_approx().is_zero())
}

/// The literal with `x` set to a root `λ` of `h`.
fn at_root<F: ValuedField>(ctx: &F::Ctx, lit: &Formula, x: &str, h: &Poly<F>, lambda: &F) -> Result<Formula> {
    let err = RefCell::new(None);
    let fail = |e: Error| {
        err.borrow_mut().get_or_insert(e);
    };
    let out = lit.map_atoms(&mut |a| match a {
        Atom::FieldEq(l, r) if l.mentions(x) || r.mentions(x) => {
            let g = expr_poly::<F>(ctx, &Expr::Sub(Box::new(l.clone()), Box::new(r.clone())), x);
            match g.and_then(|g| divides(h, &g)) {
                Ok(true) => Formula::True,
                Ok(false) => Formula::False,
                Err(e) => {
                    fail(e);
                    Formula::False
                }
            }
        }
        _ => Formula::Atom(a.map_terms(&mut |t| {
            t.map_exprs(&mut |d, e| {
                if !e.mentions(x) {
                    return RvTerm::Rv(d, e.clone());
                }
                let value = expr_poly::<F>(ctx, e, x).and_then(|g| {
                    if divides(h, &g)? {
                        Ok(F::zero(ctx))
                    } else {
                        let y = g.eval(lambda);
                        y.val()?;
                        Ok(y)
                    }
                });
                match value {
                    Ok(y) => RvTerm::Rv(d, Expr::literal(&y)),
                    Err(e) => {
                        fail(e);
                        RvTerm::Inf
                    }
                }
            })
        })),
    });
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

fn eliminate_exists<F: ValuedField>(ctx: &F::Ctx, x: &str, body: &Formula) -> Result<Formula> {
    if !body.free_field_vars().contains(x) {
        return rec::<F>(ctx, body);
    }
    let mut out = Formula::False;
    for lits in body.dnf() {
        out = Formula::or(out, eliminate_conjunction::<F>(ctx, x, &lits)?);
        if out == Formula::True {
            break;
        }
    }
    Ok(out)
}

fn eliminate_conjunction<F: ValuedField>(ctx: &F::Ctx, x: &str, lits: &[Formula]) -> Result<Formula> {
    let (with_x, rest): (Vec<&Formula>, Vec<&Formula>) = lits.iter().partition(|l| l.mentions_field(x));
    for l in &with_x {
        if let Some(other) = l.free_field_vars().into_iter().find(|v| v != x) {
            return Err(Error::Unsupported(format!(
                "field variable {other} is free under the quantifier on {x}; instantiate it first"
            )));
        }
    }
    let rest = rec::<F>(ctx, &Formula::and_all(rest.into_iter().cloned()))?;
    if rest == Formula::False {
        return Ok(Formula::False);
    }
    let mut eqs = Vec::new();
    let mut others = Vec::new();
    for l in with_x {
        match l {
            Formula::Atom(Atom::FieldEq(a, b)) => {
                let g = expr_poly::<F>(ctx, &Expr::Sub(Box::new(a.clone()), Box::new(b.clone())), x)?;
                if !g.clone().trim_approx().is_zero() {
                    eqs.push(g);
                }
            }
            other => others.push(other.clone()),
        }
    }
    if eqs.is_empty() && others.iter().any(|l| l.has_field_quantifier()) {
        return Err(Error::Unsupported(format!(
            "a nested field quantifier depends on {x} and no equation in {x} bounds it"
        )));
    }
    let core = if !eqs.is_empty() {
        on_roots::<F>(ctx, x, &eqs, &others)?
    } else if others.is_empty() {
        Formula::True
    } else if let Some(cs) = linear_constraints::<F>(ctx, x, &others)? {
        if eliminate_linear_exists(&cs)? {
            Formula::True
        } else {
            Formula::False
        }
    } else if let Some(f) = only_disequations::<F>(ctx, x, &others)? {
        f
    } else {
        closest_center::<F>(ctx, x, &Formula::and_all(others))?
    };
    Ok(Formula::and(rest, core))
}

fn on_roots<F: ValuedField>(ctx: &F::Ctx, x: &str, eqs: &[Poly<F>], others: &[Formula]) -> Result<Formula> {
    let mut f = eqs[0].clone();
    for g in &eqs[1..] {
        f = f.gcd(g)?;
    }
    if degree(&f) == 0 {
        return Ok(Formula::False);
    }
    let mut polys = Vec::new();
    for l in others.iter().filter(|l| !l.has_field_quantifier()) {
        polys.extend(polys_in::<F>(ctx, l, x)?);
    }
    let mut seen: Vec<F> = Vec::new();
    let mut out = Formula::False;
    for h in split(&f, &polys)? {
        for lambda in roots(&h)? {
            if seen.iter().any(|r| r.sub(&lambda).is_zero_to_precision()) {
                continue;
            }
            let mut branch = Formula::True;
            for l in others {
                let here = if l.has_field_quantifier() {
                    rec::<F>(ctx, &l.subst_field(x, &Expr::literal(&lambda)))?
                } else {
                    at_root(ctx, l, x, &h, &lambda)?
                };
                branch = Formula::and(branch, here);
            }
            seen.push(lambda);
            out = Formula::or(out, branch);
        }
    }
    Ok(out)
}

/// Recognises `rv[d](a·x − b) = ρ` literals with `ρ` closed.
fn linear_constraints<F: ValuedField>(
    ctx: &F::Ctx,
    x: &str,
    lits: &[Formula],
) -> Result<Option<Vec<LinearConstraint<F>>>> {
    let mut out = Vec::new();
    for l in lits {
        let Formula::Atom(Atom::RvEq(l, r)) = l else { return Ok(None) };
        let (lin, other) = match (l, r) {
            (RvTerm::Rv(_, e), o) if e.mentions(x) && !o.mentions_field(x) => (l, o),
            (o, RvTerm::Rv(_, e)) if e.mentions(x) && !o.mentions_field(x) => (r, o),
            _ => return Ok(None),
        };
        let RvTerm::Rv(d, e) = lin else { unreachable!() };
        let p = expr_poly::<F>(ctx, e, x)?;
        if p.degree() != Some(1) || !other.free_rv_vars_empty() {
            return Ok(None);
        }
        let z = eval_rv_term(ctx, other, &Env::new(), Some(*d))?;
        if z.order() != *d {
            return Err(Error::OrderMismatch(z.order(), *d));
        }
        out.push(LinearConstraint { z: z.lift(ctx), a: p.coeff(1), b: p.coeff(0).neg(), delta: *d });
    }
    Ok(Some(out))
}

/// Conjunctions of `g(x) ≠ 0` hold for all but finitely many `x`.
fn only_disequations<F: ValuedField>(ctx: &F::Ctx, x: &str, lits: &[Formula]) -> Result<Option<Formula>> {
    for l in lits {
        let Formula::Not(inner) = l else { return Ok(None) };
        let Formula::Atom(Atom::FieldEq(a, b)) = inner.as_ref() else { return Ok(None) };
        let g = expr_poly::<F>(ctx, &Expr::Sub(Box::new(a.clone()), Box::new(b.clone())), x)?;
        if g.trim_approx().is_zero() {
            return Ok(Some(Formula::False));
        }
    }
    Ok(Some(Formula::True))
}

/// `∃x ψ` for `ψ` without equations in `x`, as an RV formula.
///
/// With centers `α₁..α_k` and `ψ(x) ⟺ D(rv(x−α₁), …)`, split on the center
/// `α_i` closest to `x`. Then `rv(x−α_j) = rv(u + (α_i−α_j))` with
/// `u = x − α_i` is a well-defined sum, and the closeness condition is
/// `rv₀(u) ≠ rv₀(α_j − α_i)` for `j ≠ i`.
fn closest_center<F: ValuedField>(ctx: &F::Ctx, x: &str, psi: &Formula) -> Result<Formula> {
    let nf = pullback::<F>(ctx, psi, x, &psi.all_names())?;
    let gamma = nf.orders.iter().copied().max().unwrap_or(0);
    let mut taken: BTreeSet<String> = nf.formula.all_names();
    taken.extend(nf.rv_vars.iter().cloned());
    let u = fresh_name("u", &taken);
    let uvar = RvTerm::var(&u);
    let mut out = Formula::False;
    for (i, ai) in nf.centers.iter().enumerate() {
        let mut body = nf.formula.clone();
        let mut closest = Formula::True;
        for (j, aj) in nf.centers.iter().enumerate() {
            let by = if i == j {
                project(uvar.clone(), gamma, nf.orders[j])
            } else {
                let diff = RvTerm::Rv(gamma, Expr::literal(&ai.sub(aj)));
                closest = Formula::and(
                    closest,
                    Formula::not(Formula::Atom(Atom::RvEq(
                        project(uvar.clone(), gamma, 0),
                        RvTerm::Rv(0, Expr::literal(&aj.sub(ai))),
                    ))),
                );
                project(RvTerm::Sum(gamma, vec![uvar.clone(), diff]), gamma, nf.orders[j])
            };
            body = body.subst_rv(&nf.rv_vars[j], &by);
        }
        out = Formula::or(out, Formula::ExistsRv(u.clone(), gamma, Box::new(Formula::and(closest, body))));
    }
    Ok(out)
}

pub(crate) fn project(t: RvTerm, from: u32, to: u32) -> RvTerm {
    if from == to {
        t
    } else {
        RvTerm::Proj(to, Box::new(t))
    }
}

trait ClosedRv {
    fn free_rv_vars_empty(&self) -> bool;
}

impl ClosedRv for RvTerm {
    fn free_rv_vars_empty(&self) -> bool {
        let f = Formula::Atom(Atom::RvEq(self.clone(), RvTerm::Inf));
        f.free_rv_vars().is_empty() && f.free_field_vars().is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{LaurentCtx, LaurentQ, PAdic, PAdicCtx};
    use crate::logic::parser::parse_formula;

    fn lc() -> LaurentCtx {
        LaurentCtx { cap: 32 }
    }

    fn decide_l(s: &str) -> bool {
        decide::<LaurentQ>(&lc(), &parse_formula(s).unwrap()).unwrap()
    }

    fn decide_p(p: u64, s: &str) -> bool {
        decide::<PAdic>(&PAdicCtx::new(p), &parse_formula(s).unwrap()).unwrap()
    }

    #[test]
    fn squares_distinguished_by_residue() {
        assert!(decide_l("EX y:K. y^2 = t^2"));
        assert!(!decide_l("EX y:K. y^2 = 2*t^2"));
        assert!(decide_l("EX y:K. y^2 - t^2 = 0"));
        assert!(decide_l("EX y:K. y^2 = 1 + t"));
        assert!(decide_l("EX y:K. y = 0"));
    }

    #[test]
    fn two_adic_squares() {
        assert!(decide_p(2, "EX y:K. y^2 = 17"));
        assert!(!decide_p(2, "EX y:K. y^2 = 3"));
        assert!(decide_p(7, "EX y:K. y^2 = 2"));
        assert!(!decide_p(7, "EX y:K. y^2 = 3"));
    }

    #[test]
    fn output_has_no_field_quantifier() {
        let f = parse_formula("EX y:K. y^2 = t^2 & rv[0](y - t) = rv[0](-2*t)").unwrap();
        let g = qe::<LaurentQ>(&lc(), &f).unwrap();
        assert!(!g.has_field_quantifier());
        assert!(crate::logic::evaluate(&lc(), &g, &Env::<LaurentQ>::new()).unwrap());
        let f = parse_formula("EX y:K. y^2 = t^2 & v(y) > 1").unwrap();
        assert!(!crate::logic::evaluate(&lc(), &qe::<LaurentQ>(&lc(), &f).unwrap(), &Env::<LaurentQ>::new()).unwrap());
    }

    #[test]
    fn identity_without_field_quantifiers() {
        let f = parse_formula("rv[0](t^2) = rv[0](2*t^2) | v(t) > 0").unwrap();
        assert_eq!(qe::<LaurentQ>(&lc(), &f).unwrap(), f);
        let f = parse_formula("v(t) > 0 -> rv[0](1) = rv[0](1 + t)").unwrap();
        assert_eq!(qe::<LaurentQ>(&lc(), &f).unwrap(), f);
    }

    #[test]
    fn side_conditions_and_universals() {
        assert!(decide_l("EX y:K. y^3 - y = 0 & y != 0 & v(y + 1) > 0"));
        assert!(!decide_l("EX y:K. y^3 - y = 0 & y != 0 & v(y + 1) > 0 & v(y - 1) > 0"));
        assert!(decide_l("ALL y:K. y^2 = t^2 -> v(y) = 1"));
        assert!(!decide_l("ALL y:K. y^2 = t^2 -> rv[0](y) = rv[0](t)"));
        // (y - t)^2 (y + 1) = 0 with a repeated root.
        assert!(decide_l("EX y:K. (y - t)^2*(y + 1) = 0 & v(y) = 1"));
    }

    #[test]
    fn linear_route() {
        assert!(decide_l("EX x:K. rv[0](x) = rv[0](t) & rv[0](x + t^3) = rv[0](t)"));
        assert!(!decide_l("EX x:K. rv[0](x) = rv[0](t) & rv[0](x) = rv[0](2*t)"));
        assert!(decide_l("EX x:K. rv[1](3*x - 1) = rv[1](t)"));
    }

    #[test]
    fn nested_quantifiers() {
        // y^2 = x t^2 + x^2 = t^3 + t^2 at x = t is a square; at x = -t it
        // is t^2 - t^3, also a square.
        assert!(decide_l("EX x:K. x^2 = t^2 & (EX y:K. y^2 = x*t^2 + x^2)"));
        assert!(!decide_l("EX x:K. x^2 = t^2 & (EX y:K. y^2 = 2*x^2)"));
        assert!(matches!(
            qe::<LaurentQ>(&lc(), &parse_formula("EX x:K. EX y:K. y^2 = x").unwrap()),
            Err(Error::Unsupported(_))
        ));
        assert!(decide_l("ALL x:K. x^2 = 1 -> (EX y:K. y^2 = 2) | v(x) = 0"));
    }
}

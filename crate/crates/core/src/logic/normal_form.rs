//! One-variable definable sets as pullbacks
//! `{x : (rv_γ₁(x−α₁), …, rv_γ_k(x−α_k)) ∈ D}`.
//!
//! Every polynomial `g` in `x` under an `rv[d]` is decomposed into pieces;
//! on a piece with center `α`, `rv_d(g(x))` is read off `rv_γ(x−α)` with
//! `γ = d + v(q)` as a sum of monomial classes. Piece membership is a
//! condition on the values `v(x−c)` for the ball centers `c`. Equations
//! `g(x) = 0` become `x = λ` for the roots `λ`, that is `w_λ = ∞`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::{fresh_name, Atom, CmpOp, Expr, Formula, RvTerm, VTerm};
use super::eval::{evaluate, Env};
use super::qe::{expr_poly, project, qe};
use crate::ball::{Ball, SwissCheese};
use crate::decomp::{decompose_whole, roots, Piece};
use crate::error::{Error, Result};
use crate::field::{parse_literal, ValuedField};
use crate::rv::{rv, RVElem};
use crate::valq::ValQ;

#[derive(Clone, Debug, PartialEq)]
pub struct NormalForm<F: ValuedField> {
    pub var: String,
    pub centers: Vec<F>,
    pub orders: Vec<u32>,
    /// `rv_vars[i]` stands for `rv_{orders[i]}(var − centers[i])` in
    /// `formula`.
    pub rv_vars: Vec<String>,
    pub formula: Formula,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalFormJson {
    pub var: String,
    pub centers: Vec<String>,
    pub orders: Vec<u32>,
    pub rv_vars: Vec<String>,
    pub formula: Formula,
    pub formula_text: String,
}

impl<F: ValuedField> NormalForm<F> {
    /// Whether `x0` lies in the set, computed from the pullback data only.
    pub fn member(&self, ctx: &F::Ctx, x0: &F) -> Result<bool> {
        let mut env = Env::new();
        for ((w, a), g) in self.rv_vars.iter().zip(&self.centers).zip(&self.orders) {
            let d = x0.sub(a);
            let class = if d.is_zero_to_precision() { RVElem::infinity(*g) } else { rv(&d, *g)? };
            env = env.with_rv(w, class);
        }
        evaluate(ctx, &self.formula, &env)
    }

    pub fn to_json(&self) -> NormalFormJson {
        NormalFormJson {
            var: self.var.clone(),
            centers: self.centers.iter().map(|c| c.to_string()).collect(),
            orders: self.orders.clone(),
            rv_vars: self.rv_vars.clone(),
            formula: self.formula.clone(),
            formula_text: self.formula.to_string(),
        }
    }

    pub fn from_json(ctx: &F::Ctx, j: &NormalFormJson) -> Result<Self> {
        Ok(NormalForm {
            var: j.var.clone(),
            centers: j.centers.iter().map(|c| parse_literal(ctx, c)).collect::<Result<_>>()?,
            orders: j.orders.clone(),
            rv_vars: j.rv_vars.clone(),
            formula: j.formula.clone(),
        })
    }
}

impl<F: ValuedField> fmt::Display for NormalForm<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ((w, a), g) in self.rv_vars.iter().zip(&self.centers).zip(&self.orders) {
            writeln!(f, "{w} = rv[{g}]({} - ({a}))", self.var)?;
        }
        write!(f, "D: {}", self.formula)
    }
}

/// Normal form of `phi`, whose only free field variable is `var`.
pub fn normal_form<F: ValuedField>(ctx: &F::Ctx, phi: &Formula, var: &str) -> Result<NormalForm<F>> {
    if let Some(other) = phi.free_field_vars().iter().find(|v| *v != var) {
        return Err(Error::Unsupported(format!("free field variable {other} besides {var}")));
    }
    let mut reduced = qe::<F>(ctx, phi)?;
    if F::residue_char(ctx) == 0 {
        reduced = lower_orders(&reduced, var);
    }
    pullback(ctx, &reduced, var, &reduced.all_names())
}

/// Rewrites order-`d` leading terms of polynomials in `x` into order 0,
/// valid when the residue field has characteristic 0. Equalities
/// `rv_d(g) = rv_d(h)` become `v(g − h) > v(t^d h)` (or both zero);
/// valuations ignore the order.
fn lower_orders(phi: &Formula, x: &str) -> Formula {
    phi.map_atoms(&mut |a| match a {
        Atom::RvEq(RvTerm::Rv(d, g), RvTerm::Rv(d2, h)) if d == d2 && *d > 0 && (g.mentions(x) || h.mentions(x)) => {
            let zero = |e: &Expr| Formula::atom(Atom::FieldEq(e.clone(), Expr::int(0)));
            let diff = Expr::Sub(Box::new(g.clone()), Box::new(h.clone()));
            let scaled = Expr::Mul(Box::new(Expr::Pow(Box::new(Expr::Unif), *d as i64)), Box::new(h.clone()));
            let close = Formula::atom(Atom::VCmp(
                VTerm::Val(RvTerm::Rv(0, diff)),
                CmpOp::Gt,
                VTerm::Val(RvTerm::Rv(0, scaled)),
            ));
            Formula::or(Formula::and(zero(g), zero(h)), Formula::and(Formula::not(zero(h)), close))
        }
        Atom::VCmp(l, op, r) => {
            let lower = |t: &VTerm| match t {
                VTerm::Val(RvTerm::Rv(_, e)) if e.mentions(x) => VTerm::Val(RvTerm::Rv(0, e.clone())),
                other => other.clone(),
            };
            Formula::atom(Atom::VCmp(lower(l), *op, lower(r)))
        }
        other => Formula::Atom(other.clone()),
    })
}

struct Builder<'a, F: ValuedField> {
    ctx: &'a F::Ctx,
    x: &'a str,
    centers: Vec<F>,
    orders: Vec<u32>,
    root_cache: HashMap<String, Vec<F>>,
    piece_cache: HashMap<String, Vec<Piece<F>>>,
}

impl<'a, F: ValuedField> Builder<'a, F> {
    fn center(&mut self, c: &F) -> usize {
        if let Some(i) = self.centers.iter().position(|a| a.sub(c).is_zero_to_precision()) {
            return i;
        }
        self.centers.push(c.clone());
        self.orders.push(0);
        self.centers.len() - 1
    }

    fn idx(&self, c: &F) -> usize {
        self.centers.iter().position(|a| a.sub(c).is_zero_to_precision()).expect("registered center")
    }

    fn eq_roots(&mut self, e: &Expr) -> Result<Option<Vec<F>>> {
        let key = e.to_string();
        if let Some(r) = self.root_cache.get(&key) {
            return Ok(Some(r.clone()));
        }
        let g = expr_poly::<F>(self.ctx, e, self.x)?.trim_approx();
        match g.degree() {
            None | Some(0) => Ok(None),
            Some(_) => {
                let r = roots(&g)?;
                for a in &r {
                    self.center(a);
                }
                self.root_cache.insert(key, r.clone());
                Ok(Some(r))
            }
        }
    }

    fn pieces(&mut self, d: u32, e: &Expr) -> Result<Vec<Piece<F>>> {
        let key = format!("{d}|{e}");
        if let Some(p) = self.piece_cache.get(&key) {
            return Ok(p.clone());
        }
        let g = expr_poly::<F>(self.ctx, e, self.x)?;
        let pieces = if g.clone().trim_approx().is_zero() { Vec::new() } else { decompose_whole(&g)? };
        for p in &pieces {
            let i = self.center(&p.center);
            self.orders[i] = self.orders[i].max(d + p.q_val() as u32);
            for b in std::iter::once(p.cheese.outer()).chain(p.cheese.holes()) {
                if let Some(c) = b.center() {
                    self.center(c);
                }
            }
        }
        self.piece_cache.insert(key, pieces.clone());
        Ok(pieces)
    }
}

fn field_eq_expr(l: &Expr, r: &Expr) -> Expr {
    Expr::Sub(Box::new(l.clone()), Box::new(r.clone()))
}

/// The `rv[d](e)` subterms of an atom whose argument mentions `x`.
fn x_terms(a: &Atom, x: &str) -> Vec<(u32, Expr)> {
    let mut out: Vec<(u32, Expr)> = Vec::new();
    for t in a.terms() {
        t.map_exprs(&mut |d, e| {
            if e.mentions(x) && !out.iter().any(|(d2, e2)| *d2 == d && e2 == e) {
                out.push((d, e.clone()));
            }
            RvTerm::Inf
        });
    }
    out
}

/// Builds the pullback presentation of a formula without field
/// quantifiers. `taken` lists names the new RV variables must avoid.
pub(crate) fn pullback<F: ValuedField>(
    ctx: &F::Ctx,
    phi: &Formula,
    x: &str,
    taken: &BTreeSet<String>,
) -> Result<NormalForm<F>> {
    let mut b = Builder {
        ctx,
        x,
        centers: Vec::new(),
        orders: Vec::new(),
        root_cache: HashMap::new(),
        piece_cache: HashMap::new(),
    };

    // First pass: centers and orders.
    let mut atoms: Vec<Atom> = Vec::new();
    phi.map_atoms(&mut |a| {
        atoms.push(a.clone());
        Formula::True
    });
    for a in &atoms {
        match a {
            Atom::FieldEq(l, r) if l.mentions(x) || r.mentions(x) => {
                b.eq_roots(&field_eq_expr(l, r))?;
            }
            _ => {
                for (d, e) in x_terms(a, x) {
                    b.pieces(d, &e)?;
                }
            }
        }
    }
    if b.centers.is_empty() {
        b.center(&F::zero(ctx));
    }

    let mut names = taken.clone();
    let mut rv_vars = Vec::new();
    for _ in &b.centers {
        let w = fresh_name("w", &names);
        names.insert(w.clone());
        rv_vars.push(w);
    }

    // Second pass: rewrite atoms.
    let mut failure = None;
    let formula = phi.map_atoms(&mut |a| match rewrite_atom(&mut b, a, &rv_vars, &mut names) {
        Ok(f) => f,
        Err(e) => {
            failure.get_or_insert(e);
            Formula::False
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(NormalForm { var: x.to_string(), centers: b.centers, orders: b.orders, rv_vars, formula })
}

fn rewrite_atom<F: ValuedField>(
    b: &mut Builder<'_, F>,
    a: &Atom,
    rv_vars: &[String],
    names: &mut BTreeSet<String>,
) -> Result<Formula> {
    let x = b.x;
    if let Atom::FieldEq(l, r) = a {
        if !(l.mentions(x) || r.mentions(x)) {
            return Ok(Formula::Atom(a.clone()));
        }
        let e = field_eq_expr(l, r);
        return Ok(match b.eq_roots(&e)? {
            Some(rs) => Formula::or_all(
                rs.iter().map(|c| Formula::Atom(Atom::RvEq(RvTerm::var(&rv_vars[b.idx(c)]), RvTerm::Inf))),
            ),
            None => {
                let g = expr_poly::<F>(b.ctx, &e, x)?.trim_approx();
                if g.is_zero() {
                    Formula::True
                } else {
                    Formula::False
                }
            }
        });
    }
    let terms = x_terms(a, x);
    if terms.is_empty() {
        return Ok(Formula::Atom(a.clone()));
    }
    let mut replacement: Vec<RvTerm> = Vec::new();
    let mut bound: Vec<(String, u32, Formula)> = Vec::new();
    for (d, e) in &terms {
        let pieces = b.pieces(*d, e)?;
        if pieces.is_empty() {
            replacement.push(RvTerm::Rv(*d, Expr::int(0)));
            continue;
        }
        if pieces.len() == 1 && *pieces[0].cheese.outer() == Ball::Whole && pieces[0].cheese.holes().is_empty() {
            replacement.push(leading_term(b, &pieces[0], *d, rv_vars));
            continue;
        }
        let r = fresh_name("r", names);
        names.insert(r.clone());
        let cases = Formula::or_all(pieces.iter().map(|p| {
            Formula::and(
                cheese_member(b, &p.cheese, rv_vars),
                Formula::Atom(Atom::RvEq(RvTerm::var(&r), leading_term(b, p, *d, rv_vars))),
            )
        }));
        replacement.push(RvTerm::var(&r));
        bound.push((r, *d, cases));
    }
    let atom = a.map_terms(&mut |t| {
        t.map_exprs(&mut |d, e| match terms.iter().position(|(d2, e2)| *d2 == d && e2 == e) {
            Some(k) => replacement[k].clone(),
            None => RvTerm::Rv(d, e.clone()),
        })
    });
    let mut out = Formula::Atom(atom);
    for (r, d, cases) in bound.into_iter().rev() {
        out = Formula::ExistsRv(r, d, Box::new(Formula::and(cases, out)));
    }
    Ok(out)
}

fn ball_member<F: ValuedField>(b: &Builder<'_, F>, ball: &Ball<F>, rv_vars: &[String]) -> Formula {
    match ball {
        Ball::Empty => Formula::False,
        Ball::Whole => Formula::True,
        Ball::Disc { center, min_val } => Formula::Atom(Atom::VCmp(
            VTerm::Val(RvTerm::var(&rv_vars[b.idx(center)])),
            CmpOp::Ge,
            VTerm::Const(ValQ::int(*min_val)),
        )),
        Ball::Point(c) => Formula::Atom(Atom::RvEq(RvTerm::var(&rv_vars[b.idx(c)]), RvTerm::Inf)),
    }
}

fn cheese_member<F: ValuedField>(b: &Builder<'_, F>, s: &SwissCheese<F>, rv_vars: &[String]) -> Formula {
    let mut f = ball_member(b, s.outer(), rv_vars);
    for h in s.holes() {
        f = Formula::and(f, Formula::not(ball_member(b, h, rv_vars)));
    }
    f
}

/// `rv_d(g(x))` on the piece, as a term in the leading term of `x − α`.
fn leading_term<F: ValuedField>(b: &Builder<'_, F>, p: &Piece<F>, d: u32, rv_vars: &[String]) -> RvTerm {
    if let Ball::Point(_) = p.cheese.outer() {
        return RvTerm::Rv(d, Expr::literal(&p.coeffs[0]));
    }
    let i = b.idx(&p.center);
    let gamma = d + p.q_val() as u32;
    let w = RvTerm::var(&rv_vars[i]);
    let monomial = |j: usize, a: &F, order: u32| -> RvTerm {
        if j == 0 {
            return RvTerm::Rv(order, Expr::literal(a));
        }
        let base = project(w.clone(), b.orders[i], order);
        let pw = if j == 1 { base } else { RvTerm::Pow(Box::new(base), j as i64) };
        if a.sub(&F::one(b.ctx)).is_exact_zero() {
            pw
        } else {
            RvTerm::Mul(Box::new(RvTerm::Rv(order, Expr::literal(a))), Box::new(pw))
        }
    };
    let monos: Vec<(usize, &F)> = p.coeffs.iter().enumerate().filter(|(_, a)| a.val_or_inf().is_finite()).collect();
    match monos.as_slice() {
        [] => RvTerm::Rv(d, Expr::int(0)),
        [(j, a)] => monomial(*j, a, d),
        _ => project(RvTerm::Sum(gamma, monos.iter().map(|(j, a)| monomial(*j, a, gamma)).collect()), gamma, d),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{LaurentCtx, LaurentQ};
    use crate::logic::parser::parse_formula;

    fn lc() -> LaurentCtx {
        LaurentCtx { cap: 32 }
    }

    fn t(k: i64) -> LaurentQ {
        LaurentQ::uniformizer_pow(&lc(), k)
    }

    fn nf(s: &str) -> NormalForm<LaurentQ> {
        normal_form(&lc(), &parse_formula(s).unwrap(), "x").unwrap()
    }

    fn grid() -> Vec<LaurentQ> {
        let mut out = Vec::new();
        for k in -3..4 {
            for c in [1, -1, 2, 3] {
                out.push(t(k).scale_int(c));
                out.push(t(k).scale_int(c).add(&t(k + 1)));
                out.push(LaurentQ::one(&lc()).add(&t(k.abs() + 1).scale_int(c)));
            }
        }
        out.push(LaurentQ::zero(&lc()));
        out
    }

    fn check(s: &str) {
        let phi = parse_formula(s).unwrap();
        let n = nf(s);
        assert!(n.orders.iter().all(|&g| g == 0), "{s}: {:?}", n.orders);
        for x0 in grid() {
            let direct = evaluate(&lc(), &phi, &Env::new().with_field("x", x0.clone())).unwrap();
            assert_eq!(n.member(&lc(), &x0).unwrap(), direct, "{s} at {x0}\n{n}");
        }
    }

    #[test]
    fn worked_examples() {
        let n = nf("x^2 = t^2");
        assert_eq!(n.centers.len(), 2);
        assert!(n.centers.contains(&t(1)) && n.centers.contains(&t(1).neg()));
        assert_eq!(n.orders, vec![0, 0]);
        assert_eq!(n.formula.to_string(), "w1 = inf | w2 = inf");

        let n = nf("v(x - 1) > 0");
        assert_eq!(n.centers, vec![LaurentQ::one(&lc())]);
        assert_eq!(n.formula.to_string(), "v(w1) > 0");

        let n = nf("true");
        assert_eq!(n.centers, vec![LaurentQ::zero(&lc())]);
        assert_eq!(n.formula, Formula::True);
    }

    #[test]
    fn membership_matches_direct_evaluation() {
        for s in [
            "x^2 = t^2",
            "v(x - 1) > 0",
            "rv[0](x^2 - t^2) = rv[0](t^2)",
            "v(x^2 - t^2) >= 3",
            "rv[1](x^2 - x) = rv[1](t^2 + t^3)",
            "rv[2](x - 1) = rv[2](x^3 - t)",
            "rv[0](x^3 - x) = rv[0](-1) | x = 0",
            "rv[0](x^2 - 1 - t) != rv[0](t) & v(x) = 0",
            "EX y:K. y^2 = 2 | v(x^2 + t*x) < 1",
        ] {
            check(s);
        }
    }

    #[test]
    fn json_round_trip() {
        let n = nf("rv[0](x^2 - t^2) = rv[0](t^2)");
        let s = serde_json::to_string(&n.to_json()).unwrap();
        let j: NormalFormJson = serde_json::from_str(&s).unwrap();
        assert_eq!(NormalForm::<LaurentQ>::from_json(&lc(), &j).unwrap(), n);
    }
}

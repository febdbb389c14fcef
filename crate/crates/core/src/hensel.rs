//! Newton lifting and the passage from collisions to roots of derivatives.

use crate::error::{exhausted, Error, Result};
use crate::field::{ResidueElem, ValuedField};
use crate::poly::Poly;
use crate::rv::{rv, RVElem};
use crate::valq::ValQ;

/// Upper bound on Newton steps; convergence is quadratic, so a handful
/// suffices at any sane precision.
const MAX_NEWTON_STEPS: usize = 64;
/// Upper bound on nodes visited when searching a residue class digit by digit.
const MAX_CLASS_SEARCH_NODES: usize = 200_000;

#[derive(Clone, Debug, PartialEq)]
pub struct LiftCertificate<F: ValuedField> {
    /// A root of `P`, exact when one could be recognised and otherwise
    /// known to the working precision.
    pub root: F,
    pub iterations: usize,
    /// Lower bound on `v(a − root)`.
    pub separation: ValQ,
}

fn precondition(msg: impl Into<String>) -> Error {
    Error::PreconditionViolated(msg.into())
}

/// Lifts an approximate root `a` of `P` to a root `b` with `v(a−b) > δ`,
/// provided `v(P(a)) > 2v(P'(a)) + δ` and `P`, `a` are integral.
pub fn newton_lift<F: ValuedField>(p: &Poly<F>, a: &F, delta: u32) -> Result<LiftCertificate<F>> {
    let ctx = p.ctx();
    if p.coeffs().iter().any(|c| c.known_val().is_some_and(|v| v < 0)) {
        return Err(precondition("polynomial coefficients must be integral"));
    }
    if a.known_val().is_some_and(|v| v < 0) {
        return Err(precondition("starting point must be integral"));
    }
    let dp = p.derivative(1);
    let pa = p.eval(a);
    if pa.is_exact_zero() {
        return Ok(LiftCertificate { root: a.clone(), iterations: 0, separation: ValQ::PosInf });
    }
    let e = dp
        .eval(a)
        .known_val()
        .ok_or_else(|| precondition("derivative vanishes at the starting point"))?;
    if !pa.val_greater(&ValQ::int(2 * e + delta as i64))? {
        return Err(precondition(format!("v(P(a)) ≤ 2v(P'(a)) + {delta}")));
    }

    let coeff_prec = p.coeffs().iter().filter_map(|c| c.abs_prec()).min();
    let mut target = F::cap(ctx) as i64 + e;
    if let Some(q) = coeff_prec {
        target = target.min(q);
    }
    let root_prec = target - e;

    let mut x = a.exact_candidates().swap_remove(0);
    let mut last: Option<i64> = None;
    let mut iterations = 0;
    loop {
        let px = p.eval(&x);
        if px.is_exact_zero() || px.val_at_least(&ValQ::int(target)).unwrap_or(false) {
            break;
        }
        let vpx = px.known_val().ok_or_else(|| exhausted("Newton step lost all digits"))?;
        if last.is_some_and(|l| vpx <= l) {
            return Err(exhausted("Newton iteration stopped converging"));
        }
        last = Some(vpx);
        if iterations == MAX_NEWTON_STEPS {
            return Err(exhausted("Newton iteration budget reached"));
        }
        // v(x' − r) ≥ 2v(x − r) − e, so digits beyond that are noise.
        let keep = (2 * (vpx - e) - e).min(target);
        // Only the digits of the step below π^keep matter.
        let dpx = dp.eval(&x);
        let ed = dpx.known_val().ok_or_else(|| exhausted("derivative lost all digits"))?;
        let rel = (keep - vpx + ed).max(1);
        let step = px.truncate(vpx + rel).div(&dpx.truncate(ed + rel))?;
        x = x.sub(&step).truncate(keep).exact_candidates().swap_remove(0);
        iterations += 1;
    }

    let root = snap_root(p, &x).unwrap_or_else(|| x.truncate(root_prec));
    let diff = a.sub(&root);
    let separation = if diff.is_exact_zero() {
        ValQ::PosInf
    } else {
        match diff.known_val() {
            Some(v) => ValQ::int(v),
            None => ValQ::int(diff.abs_prec().unwrap_or(root_prec)),
        }
    };
    Ok(LiftCertificate { root, iterations, separation })
}

/// An exact root of `p` agreeing with the approximation `x`, if one is
/// recognisable.
fn snap_root<F: ValuedField>(p: &Poly<F>, x: &F) -> Option<F> {
    x.exact_candidates().into_iter().find(|c| p.eval(c).is_exact_zero())
}

/// Data describing `f` around `α` at the point `β`.
#[derive(Clone, Debug, PartialEq)]
pub struct Collision {
    /// Largest index of a minimal monomial `a_i (β−α)^i`.
    pub m: usize,
    /// Minimal monomial value.
    pub mu: ValQ,
    /// `v(f(β)) − μ`; a lower bound when `f(β)` vanishes to precision.
    pub severity: ValQ,
}

/// Coefficients that vanish to working precision count as zero here.
fn monomial_values<F: ValuedField>(a: &[F], s_val: i64) -> Vec<ValQ> {
    a.iter()
        .enumerate()
        .map(|(i, c)| match c.known_val() {
            Some(v) => ValQ::int(v + i as i64 * s_val),
            None => ValQ::PosInf,
        })
        .collect()
}

fn max_minimal_index(vals: &[ValQ]) -> (usize, ValQ) {
    let mu = vals.iter().min().cloned().unwrap_or(ValQ::PosInf);
    let m = vals.iter().rposition(|v| *v == mu).unwrap_or(0);
    (m, mu)
}

/// Measures the collision of `f` at `β` around `α`.
pub fn collision_at<F: ValuedField>(f: &Poly<F>, alpha: &F, beta: &F) -> Result<Collision> {
    let s = beta.sub(alpha);
    let sv = s.known_val().ok_or_else(|| precondition("β must differ from α"))?;
    let a = f.taylor_shift(alpha);
    let (m, mu) = max_minimal_index(&monomial_values(&a, sv));
    let fb = f.eval(beta);
    let severity = match fb.known_val() {
        Some(v) => ValQ::int(v) - mu,
        None if fb.is_exact_zero() => ValQ::PosInf,
        None => ValQ::int(fb.abs_prec().unwrap()) - mu,
    };
    Ok(Collision { m, mu, severity })
}

/// `2^m (v(m!) + δ)`.
pub fn severity_threshold<F: ValuedField>(ctx: &F::Ctx, m: usize, delta: u32) -> ValQ {
    ValQ::int((1i64 << m) * (F::factorial_val(ctx, m as u64) + delta as i64))
}

/// From a collision of severity above `2^m(v(m!)+δ)` at `β` around `α`,
/// produces `n < m` and a root `λ` of `f^{(n)}` with
/// `rv_δ(λ−α) = rv_δ(β−α)`.
pub fn collision_root<F: ValuedField>(f: &Poly<F>, alpha: &F, beta: &F, delta: u32) -> Result<(usize, F)> {
    let ctx = f.ctx();
    let col = collision_at(f, alpha, beta)?;
    let thr = severity_threshold::<F>(ctx, col.m, delta);
    if col.severity <= thr {
        return Err(precondition(format!(
            "collision severity {} does not exceed {}",
            col.severity, thr
        )));
    }
    let s = beta.sub(alpha);
    let p = f.compose_linear(&s, alpha);
    let tm_inv = p.coeff(col.m).inv()?;
    let p = p.scale(&tm_inv);
    let one = F::one(ctx);
    for n in (0..col.m).rev() {
        let pn = p.derivative(n);
        let lower = pn.derivative(1).eval(&one);
        let Some(e) = lower.known_val() else { continue };
        // A plain lift from 1 moves by v(P⁽ⁿ⁾(1)) − e, which must exceed δ.
        // Demanding 2(e+δ) instead can fail for every n when m ≥ 2.
        let bound = ValQ::int((2 * e).max(e + delta as i64));
        if pn.eval(&one).val_greater(&bound)? {
            let lift = newton_lift(&pn, &one, 0)?;
            let lambda = s.mul(&lift.root).add(alpha);
            let fnp = f.derivative(n);
            let lambda = snap_root(&fnp, &lambda).unwrap_or(lambda);
            return Ok((n, lambda));
        }
    }
    Err(exhausted("no derivative satisfies the lifting inequality at working precision"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollisionClass<F: ValuedField> {
    /// `rv_0(x − α)` for the points `x` of the class.
    pub class: RVElem<F>,
    /// A root of `f^{(n)}` inside the class.
    pub lambda: F,
    pub n: usize,
}

/// The classes `B_{>ρ}(λ)` of the annulus `v(x−α) = ρ` on which a collision
/// of `f` around `α` can exceed `threshold`, each with a derivative root.
///
/// In residue characteristic 0 every class where the minimal monomials can
/// cancel is returned. In residue characteristic `p` the class is searched
/// digit by digit for a point of sufficient severity; `threshold` is raised
/// to `2^m v(m!)` if it is lower.
pub fn collision_classes<F: ValuedField>(
    f: &Poly<F>,
    alpha: &F,
    rho: i64,
    threshold: &ValQ,
) -> Result<Vec<CollisionClass<F>>> {
    let ctx = f.ctx();
    let a = f.taylor_shift(alpha);
    let vals = monomial_values(&a, rho);
    let (m, mu) = max_minimal_index(&vals);
    let minimal: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] == mu).collect();
    if minimal.len() < 2 {
        return Ok(Vec::new());
    }
    let mu_i = mu.as_int().expect("finite minimum");
    // P(y) = f(α + π^ρ y) / π^μ has integral coefficients, minimal ones units.
    let scaled: Vec<F> = a
        .iter()
        .enumerate()
        .map(|(i, c)| c.mul(&F::uniformizer_pow(ctx, i as i64 * rho - mu_i)))
        .collect();
    let mut residue_poly = vec![F::zero(ctx).residue()?; m + 1];
    for &i in &minimal {
        residue_poly[i] = scaled[i].residue()?;
    }
    let roots: Vec<ResidueElem> = F::residue_roots(ctx, &residue_poly)
        .into_iter()
        .filter(|r| !residue_is_zero(r))
        .collect();

    let p_char = F::residue_char(ctx);
    let thr = (*threshold).max(severity_threshold::<F>(ctx, m, 0));
    let pi_rho = F::uniformizer_pow(ctx, rho);
    let scaled_poly = Poly::new(ctx, scaled);
    let mut out = Vec::new();
    for r in roots {
        let u0 = F::from_residue(ctx, &r);
        let y = if p_char == 0 {
            Some(u0.clone())
        } else {
            search_class(&scaled_poly, &u0, p_char, &thr)?
        };
        let Some(y) = y else { continue };
        let beta = alpha.add(&pi_rho.mul(&y));
        let (n, lambda) = collision_root(f, alpha, &beta, 0)?;
        out.push(CollisionClass { class: rv(&pi_rho.mul(&u0), 0)?.forget_source(), lambda, n });
    }
    Ok(out)
}

fn residue_is_zero(r: &ResidueElem) -> bool {
    match r {
        ResidueElem::Q(q) => num_traits::Zero::is_zero(q),
        ResidueElem::Fp { value, .. } => *value == 0,
    }
}

/// Depth-first search for `y ≡ u0 (mod p)` with `v(P(y)) > thr`.
///
/// A node `y` fixed modulo `π^k` is expanded as
/// `P(y + π^k z) = Σ b_i π^{ik} z^i`; when `v(b_0)` lies below every
/// `v(b_i) + ik` with `i ≥ 1`, the value is `v(b_0)` on the whole subtree.
fn search_class<F: ValuedField>(p: &Poly<F>, u0: &F, prime: u64, thr: &ValQ) -> Result<Option<F>> {
    let ctx = p.ctx();
    let mut stack = vec![(u0.clone(), 1i64)];
    let mut visited = 0usize;
    while let Some((y, k)) = stack.pop() {
        visited += 1;
        if visited > MAX_CLASS_SEARCH_NODES {
            return Err(exhausted("residue class search budget reached"));
        }
        let b = p.taylor_shift(&y);
        let s = match b[0].known_val() {
            Some(v) => ValQ::int(v),
            None if b[0].is_exact_zero() => ValQ::PosInf,
            None => {
                let prec = ValQ::int(b[0].abs_prec().unwrap());
                if prec > *thr {
                    return Ok(Some(y));
                }
                return Err(exhausted("class search ran out of coefficient precision"));
            }
        };
        if s > *thr {
            return Ok(Some(y));
        }
        let spread = b
            .iter()
            .enumerate()
            .skip(1)
            .filter_map(|(i, c)| c.known_val().or(c.abs_prec()).map(|v| v + i as i64 * k))
            .min();
        if spread.is_none_or(|m| s < ValQ::int(m)) {
            continue;
        }
        let step = F::uniformizer_pow(ctx, k);
        for j in (0..prime as i64).rev() {
            stack.push((y.add(&step.scale_int(j)), k + 1));
        }
    }
    Ok(None)
}

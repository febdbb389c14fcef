//! `∃x ⋀ rv_δᵢ(zᵢ) = rv_δᵢ(aᵢx − bᵢ)` by ball geometry.
//!
//! Dividing by `aᵢ` turns each conjunct into `x ∈ B_{>v(zᵢ')+δᵢ}(zᵢ' + cᵢ)`
//! with `zᵢ' = zᵢ/aᵢ` and `cᵢ = bᵢ/aᵢ`. Open balls with a common point
//! pairwise have a common point overall, so it suffices to decide each
//! pair. A pair is decided from leading-term data only; which case applies
//! depends on how `v(c₁ − c₂)`, `v(z₁)`, `v(z₂)` and the orders compare.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::ValuedField;
use crate::rv::{rv, sum_value_ambiguous, RVElem};
use crate::valq::ValQ;

#[derive(Clone, Debug)]
pub struct LinearConstraint<F: ValuedField> {
    pub z: F,
    pub a: F,
    pub b: F,
    pub delta: u32,
}

/// How a pair of constraints was decided. For a pair ordered so that
/// `v(z₁)+δ₁ ≤ v(z₂)+δ₂` and `A = c₁ − c₂`:
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum LinearCase {
    /// Some `zᵢ = 0` fixes `x`; all constraints are checked at that point.
    Point,
    /// `v(z₁) ≤ v(A)`, `v(z₁) ≤ v(z₂)`, `δ₁ ≤ δ₂`: nonempty iff the sum
    /// `z₁ + A − z₂` cancels by more than `δ₁`.
    Case1,
    /// As `Case1` with `δ₁ > δ₂`; `z₂` is replaced by its canonical
    /// representative, which is harmless because `v(z₂) > v(z₁)` here.
    Case2,
    /// `v(z₁) ≤ v(A)` and `v(z₂) < v(z₁)`: always empty.
    Case3,
    /// `v(A) < v(z₁)`: `z₁ + A` has a well-defined class, compared with
    /// `z₂` at the order fixed by the smaller ball.
    Case4,
}

struct Scaled<F: ValuedField> {
    z: F,
    c: F,
    delta: u32,
}

fn scale<F: ValuedField>(k: &LinearConstraint<F>) -> Result<Scaled<F>> {
    if k.a.is_exact_zero() {
        return Err(Error::PreconditionViolated("linear coefficient is zero".into()));
    }
    Ok(Scaled { z: k.z.div(&k.a)?, c: k.b.div(&k.a)?, delta: k.delta })
}

fn repr<F: ValuedField>(x: &F, d: u32) -> Result<F> {
    let r = rv(x, d)?;
    Ok(r.repr().cloned().unwrap_or_else(|| x.clone()))
}

fn vint(x: &ValQ) -> i64 {
    x.as_int().expect("field values are integers")
}

fn pair<F: ValuedField>(p: &Scaled<F>, q: &Scaled<F>) -> Result<(bool, LinearCase)> {
    let (vp, vq) = (p.z.val()?, q.z.val()?);
    let (s, l) = if vint(&vp) + p.delta as i64 <= vint(&vq) + q.delta as i64 { (p, q) } else { (q, p) };
    let (v1, v2) = (s.z.val()?, l.z.val()?);
    let (d1, d2) = (s.delta, l.delta);
    let mut a = s.c.sub(&l.c);
    if a.is_zero_to_precision() {
        a = F::zero(a.ctx());
    }
    let va = a.val_or_inf();
    let z1 = repr(&s.z, d1)?;

    if va < v1 {
        // The smaller ball sits at value v(A) < v(z₁); compare at the order
        // where its radius v(z₁)+δ₁ is reached relative to v(A).
        if v2 != va {
            return Ok((false, LinearCase::Case4));
        }
        let e = u32::try_from(vint(&v1) - vint(&va) + d1 as i64).expect("positive order");
        debug_assert!(e <= d2);
        let lhs = rv(&z1.add(&a), e)?;
        let rhs = rv(&repr(&l.z, d2)?, e)?;
        return Ok((lhs == rhs, LinearCase::Case4));
    }
    if v2 < v1 {
        return Ok((false, LinearCase::Case3));
    }
    let (z2, case) = if d1 <= d2 { (l.z.clone(), LinearCase::Case1) } else { (repr(&l.z, d2)?, LinearCase::Case2) };
    let terms: Vec<RVElem<F>> = vec![rv(&z1, d1)?, rv(&a, d1)?, rv(&z2.neg(), d1)?];
    Ok((sum_value_ambiguous(&terms)?, case))
}

/// Decides the existential and reports which cases were used.
pub fn eliminate_linear_exists_traced<F: ValuedField>(
    constraints: &[LinearConstraint<F>],
) -> Result<(bool, Vec<LinearCase>)> {
    let scaled = constraints.iter().map(scale).collect::<Result<Vec<_>>>()?;
    if let Some(pt) = scaled.iter().find(|s| s.z.is_exact_zero()) {
        let x = pt.c.clone();
        for s in &scaled {
            let d = x.sub(&s.c);
            let holds = if d.is_zero_to_precision() {
                s.z.is_exact_zero()
            } else {
                !s.z.is_exact_zero() && rv(&s.z, s.delta)? == rv(&d, s.delta)?
            };
            if !holds {
                return Ok((false, vec![LinearCase::Point]));
            }
        }
        return Ok((true, vec![LinearCase::Point]));
    }
    let mut cases = Vec::new();
    for i in 0..scaled.len() {
        for j in i + 1..scaled.len() {
            let (ok, case) = pair(&scaled[i], &scaled[j])?;
            cases.push(case);
            if !ok {
                return Ok((false, cases));
            }
        }
    }
    Ok((true, cases))
}

pub fn eliminate_linear_exists<F: ValuedField>(constraints: &[LinearConstraint<F>]) -> Result<bool> {
    Ok(eliminate_linear_exists_traced(constraints)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{LaurentCtx, LaurentQ, PAdic, PAdicCtx};
    use proptest::prelude::*;

    fn lc() -> LaurentCtx {
        LaurentCtx { cap: 32 }
    }

    fn tp(c: i64, k: i64) -> LaurentQ {
        LaurentQ::uniformizer_pow(&lc(), k).scale_int(c)
    }

    fn con(z: LaurentQ, a: LaurentQ, b: LaurentQ, delta: u32) -> LinearConstraint<LaurentQ> {
        LinearConstraint { z, a, b, delta }
    }

    /// Direct geometry: the open balls pairwise meet, or the forced point
    /// lies in every ball.
    fn oracle<F: ValuedField>(cs: &[LinearConstraint<F>]) -> bool {
        let balls: Vec<(F, ValQ)> = cs
            .iter()
            .map(|k| {
                let z = k.z.div(&k.a).unwrap();
                let c = k.b.div(&k.a).unwrap();
                let r = z.val().unwrap() + ValQ::int(k.delta as i64);
                (z.add(&c), r)
            })
            .collect();
        let dist = |x: &F, y: &F| {
            let d = x.sub(y);
            if d.is_exact_zero() {
                ValQ::PosInf
            } else {
                d.val().unwrap()
            }
        };
        if let Some(p) = balls.iter().find(|b| b.1 == ValQ::PosInf) {
            return balls.iter().all(|b| b.1 == ValQ::PosInf && dist(&p.0, &b.0) == ValQ::PosInf || dist(&p.0, &b.0) > b.1);
        }
        balls.iter().enumerate().all(|(i, b)| balls[i + 1..].iter().all(|c| dist(&b.0, &c.0) > b.1.min(c.1)))
    }

    #[test]
    fn worked_examples() {
        let zero = LaurentQ::zero(&lc());
        let one = LaurentQ::one(&lc());
        let cs = [con(tp(1, 1), one.clone(), zero.clone(), 0), con(tp(1, 1), one.clone(), tp(-1, 3), 0)];
        assert!(eliminate_linear_exists(&cs).unwrap());
        let cs = [con(tp(1, 1), one.clone(), zero.clone(), 0), con(tp(2, 1), one.clone(), zero.clone(), 0)];
        assert!(!eliminate_linear_exists(&cs).unwrap());
        assert!(eliminate_linear_exists(&[con(tp(5, -2), tp(3, 1), tp(1, 4), 3)]).unwrap());
    }

    #[test]
    fn each_case_is_reachable() {
        let zero = LaurentQ::zero(&lc());
        let one = LaurentQ::one(&lc());
        let run = |cs: &[LinearConstraint<LaurentQ>]| eliminate_linear_exists_traced(cs).unwrap();
        // z₁ = t, z₂ = t + t², same center, δ₁ = 0 < δ₂ = 1: cancels by 1 > 0.
        let (ok, c) = run(&[con(tp(1, 1), one.clone(), zero.clone(), 0), con(tp(1, 1).add(&tp(1, 2)), one.clone(), zero.clone(), 1)]);
        assert_eq!((ok, c), (true, vec![LinearCase::Case1]));
        // δ₁ = 2 > δ₂ = 0 with v(z₂) = 3: Case 2.
        let (ok, c) = run(&[con(tp(1, 1), one.clone(), zero.clone(), 2), con(tp(1, 3), one.clone(), tp(-1, 1), 0)]);
        assert_eq!(c, vec![LinearCase::Case2]);
        assert_eq!(ok, oracle(&[con(tp(1, 1), one.clone(), zero.clone(), 2), con(tp(1, 3), one.clone(), tp(-1, 1), 0)]));
        // v(z₂) < v(z₁) with v(A) large: Case 3.
        let (ok, c) = run(&[con(tp(1, 3), one.clone(), zero.clone(), 0), con(tp(1, 1), one.clone(), zero.clone(), 5)]);
        assert_eq!((ok, c), (false, vec![LinearCase::Case3]));
        // v(A) = 0 < v(z₁) = 2: Case 4; z₂ must sit at value 0.
        let (ok, c) = run(&[con(tp(1, 2), one.clone(), one.clone(), 0), con(tp(1, 0), one.clone(), zero.clone(), 3)]);
        assert_eq!(c, vec![LinearCase::Case4]);
        assert_eq!(ok, oracle(&[con(tp(1, 2), one.clone(), one.clone(), 0), con(tp(1, 0), one.clone(), zero.clone(), 3)]));
        // A zero z pins x.
        let (ok, c) = run(&[con(zero.clone(), one.clone(), tp(1, 0), 0), con(tp(1, 0), one.clone(), zero.clone(), 0)]);
        assert_eq!((ok, c), (true, vec![LinearCase::Point]));
    }

    #[test]
    fn zero_coefficient_is_rejected() {
        let zero = LaurentQ::zero(&lc());
        assert!(matches!(
            eliminate_linear_exists(&[con(tp(1, 1), zero.clone(), zero, 0)]),
            Err(Error::PreconditionViolated(_))
        ));
    }

    fn laurent_elem() -> impl Strategy<Value = LaurentQ> {
        (prop::sample::select(vec![1i64, -1, 2, 3]), -2i64..4, prop::option::of((1i64..4, prop::sample::select(vec![1i64, -1, 2]))))
            .prop_map(|(c, k, pert)| {
                let x = tp(c, k);
                match pert {
                    Some((j, c2)) => x.add(&tp(c2, k + j)),
                    None => x,
                }
            })
    }

    fn laurent_constraint() -> impl Strategy<Value = LinearConstraint<LaurentQ>> {
        (laurent_elem(), laurent_elem(), prop::option::of(laurent_elem()), 0u32..4).prop_map(|(z, a, b, d)| {
            con(z, a, b.unwrap_or_else(|| LaurentQ::zero(&lc())), d)
        })
    }

    proptest! {
        #[test]
        fn agrees_with_ball_geometry(cs in prop::collection::vec(laurent_constraint(), 1..5)) {
            prop_assert_eq!(eliminate_linear_exists(&cs).unwrap(), oracle(&cs));
        }

        #[test]
        fn agrees_with_ball_geometry_3adic(
            raw in prop::collection::vec((1i64..30, 1i64..10, 0i64..30, 0u32..3), 1..5)
        ) {
            let ctx = PAdicCtx::new(3);
            let cs: Vec<LinearConstraint<PAdic>> = raw.iter().map(|&(z, a, b, d)| LinearConstraint {
                z: PAdic::from_i64(&ctx, z),
                a: PAdic::from_i64(&ctx, a),
                b: PAdic::from_i64(&ctx, b),
                delta: d,
            }).collect();
            prop_assert_eq!(eliminate_linear_exists(&cs).unwrap(), oracle(&cs));
        }
    }
}

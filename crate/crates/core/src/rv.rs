//! Leading-term classes `RV_δ = K^×/(1+𝔪_δ) ∪ {∞}`.
//!
//! A finite class is stored as its canonical representative: the digits of
//! `x` from `π^v` through `π^{v+δ}`. Two elements have the same class iff
//! their canonical representatives coincide.
//!
//! The partial addition is decided on representatives: `⊕_δ(x₁,…,xₙ; z)`
//! holds iff `v(z̃ − Σx̃ᵢ) > min v(x̃ᵢ) + δ`. The set of sums of perturbed
//! representatives is exactly `Σx̃ᵢ + {w : v(w) > min + δ}`, and changing a
//! representative within its class moves it by an element of that set, so
//! the rule does not depend on the choice.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{ResidueClass, ResidueElem, ValuedField};
use crate::valq::ValQ;

#[derive(Clone, Debug)]
enum Kind<F> {
    Inf,
    Fin {
        repr: F,
        /// The field element the class was taken of, when known. Only used
        /// to report how much a sum cancels.
        source: Option<F>,
    },
}

#[derive(Clone, Debug)]
pub struct RVElem<F: ValuedField> {
    order: u32,
    kind: Kind<F>,
}

impl<F: ValuedField> PartialEq for RVElem<F> {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order
            && match (&self.kind, &other.kind) {
                (Kind::Inf, Kind::Inf) => true,
                (Kind::Fin { repr: a, .. }, Kind::Fin { repr: b, .. }) => a == b,
                _ => false,
            }
    }
}

/// Outcome of adding leading-term classes.
#[derive(Clone, Debug, PartialEq)]
pub enum SumAnalysis<F: ValuedField> {
    WellDefined(RVElem<F>),
    /// The sum cancels by `severity`; `witness_value` is the common value of
    /// all witnesses when it is determined (severity at most the order).
    Ambiguous { severity: ValQ, witness_value: Option<ValQ> },
}

/// `rv_δ(x)`.
pub fn rv<F: ValuedField>(x: &F, delta: u32) -> Result<RVElem<F>> {
    if x.is_exact_zero() {
        return Ok(RVElem::infinity(delta));
    }
    Ok(RVElem { order: delta, kind: Kind::Fin { repr: x.rv_repr(delta)?, source: Some(x.clone()) } })
}

impl<F: ValuedField> RVElem<F> {
    pub fn infinity(order: u32) -> Self {
        RVElem { order, kind: Kind::Inf }
    }

    /// The class of `1`.
    pub fn one(ctx: &F::Ctx, order: u32) -> Self {
        RVElem { order, kind: Kind::Fin { repr: F::one(ctx), source: None } }
    }

    /// Class with the given representative, forgetting where it came from.
    pub fn from_repr(x: &F, order: u32) -> Result<Self> {
        Ok(rv(x, order)?.forget_source())
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self.kind, Kind::Inf)
    }

    /// Canonical representative; `None` for `∞`.
    pub fn repr(&self) -> Option<&F> {
        match &self.kind {
            Kind::Inf => None,
            Kind::Fin { repr, .. } => Some(repr),
        }
    }

    /// Canonical representative, with `0` for `∞`.
    pub fn lift(&self, ctx: &F::Ctx) -> F {
        self.repr().cloned().unwrap_or_else(|| F::zero(ctx))
    }

    pub fn source(&self) -> Option<&F> {
        match &self.kind {
            Kind::Fin { source, .. } => source.as_ref(),
            Kind::Inf => None,
        }
    }

    pub fn forget_source(mut self) -> Self {
        if let Kind::Fin { source, .. } = &mut self.kind {
            *source = None;
        }
        self
    }

    /// `v(a)`.
    pub fn value(&self) -> ValQ {
        match &self.kind {
            Kind::Inf => ValQ::PosInf,
            Kind::Fin { repr, .. } => ValQ::int(repr.known_val().expect("canonical repr is nonzero")),
        }
    }

    /// The order-`δ` digits of the unit part.
    pub fn unit(&self) -> Option<ResidueClass> {
        let repr = self.repr()?;
        let v = repr.known_val().expect("canonical repr is nonzero");
        let u = repr.mul(&F::uniformizer_pow(repr.ctx(), -v));
        Some(u.res_delta(self.order).expect("unit of a canonical repr"))
    }
}

/// `rv_{γ→δ}`.
pub fn rv_project<F: ValuedField>(a: &RVElem<F>, delta: u32) -> Result<RVElem<F>> {
    if delta > a.order {
        return Err(Error::OrderViolation { from: a.order, to: delta });
    }
    match &a.kind {
        Kind::Inf => Ok(RVElem::infinity(delta)),
        Kind::Fin { repr, source } => Ok(RVElem {
            order: delta,
            kind: Kind::Fin { repr: repr.rv_repr(delta)?, source: source.clone() },
        }),
    }
}

fn same_order<F: ValuedField>(a: &RVElem<F>, b: &RVElem<F>) -> Result<u32> {
    if a.order != b.order {
        return Err(Error::OrderMismatch(a.order, b.order));
    }
    Ok(a.order)
}

pub fn rv_mul<F: ValuedField>(a: &RVElem<F>, b: &RVElem<F>) -> Result<RVElem<F>> {
    let d = same_order(a, b)?;
    match (&a.kind, &b.kind) {
        (Kind::Fin { repr: x, source: sx }, Kind::Fin { repr: y, source: sy }) => {
            let source = match (sx, sy) {
                (Some(p), Some(q)) => Some(p.mul(q)),
                _ => None,
            };
            Ok(RVElem { order: d, kind: Kind::Fin { repr: x.mul(y).rv_repr(d)?, source } })
        }
        _ => Ok(RVElem::infinity(d)),
    }
}

pub fn rv_inv<F: ValuedField>(a: &RVElem<F>) -> Result<RVElem<F>> {
    match &a.kind {
        Kind::Inf => Err(Error::DivisionByZero),
        Kind::Fin { repr, source } => {
            let source = match source {
                Some(s) => Some(s.inv()?),
                None => None,
            };
            Ok(RVElem { order: a.order, kind: Kind::Fin { repr: repr.inv()?.rv_repr(a.order)?, source } })
        }
    }
}

pub fn rv_pow<F: ValuedField>(a: &RVElem<F>, k: i64) -> Result<RVElem<F>> {
    match &a.kind {
        Kind::Inf if k > 0 => Ok(a.clone()),
        Kind::Inf => Err(Error::DivisionByZero),
        Kind::Fin { repr, source } => {
            let source = match source {
                Some(s) => Some(s.pow(k)?),
                None => None,
            };
            Ok(RVElem { order: a.order, kind: Kind::Fin { repr: repr.pow(k)?.rv_repr(a.order)?, source } })
        }
    }
}

fn common_order<F: ValuedField>(xs: &[RVElem<F>]) -> Result<u32> {
    let first = xs.first().ok_or_else(|| Error::Invalid("empty RV sum".into()))?;
    for x in xs {
        same_order(first, x)?;
    }
    Ok(first.order)
}

fn min_value<F: ValuedField>(xs: &[RVElem<F>]) -> ValQ {
    xs.iter().map(|x| x.value()).min().unwrap_or(ValQ::PosInf)
}

fn repr_sum<F: ValuedField>(xs: &[RVElem<F>], use_source: bool) -> Option<F> {
    let mut acc: Option<F> = None;
    for x in xs {
        if let Kind::Fin { repr, source } = &x.kind {
            let term = if use_source { source.as_ref().unwrap_or(repr) } else { repr };
            acc = Some(match acc {
                None => term.clone(),
                Some(a) => a.add(term),
            });
        }
    }
    acc
}

/// Adds leading-term classes and reports how much the sum cancels.
///
/// Cancellation is measured on the original field elements when the classes
/// remember them and on canonical representatives otherwise.
pub fn rv_sum_analyze<F: ValuedField>(xs: &[RVElem<F>]) -> Result<SumAnalysis<F>> {
    let delta = common_order(xs)?;
    let mu = min_value(xs);
    let Some(s) = repr_sum(xs, true) else {
        return Ok(SumAnalysis::WellDefined(RVElem::infinity(delta)));
    };
    let vs = s.val()?;
    if vs == mu {
        return Ok(SumAnalysis::WellDefined(rv(&s, delta)?));
    }
    let severity = vs - mu;
    let witness_value = if vs.is_finite() && severity <= ValQ::int(delta as i64) {
        Some(vs)
    } else {
        None
    };
    Ok(SumAnalysis::Ambiguous { severity, witness_value })
}

/// Cancellation of the sum of canonical representatives: `v(Σx̃) − min v(x̃)`.
pub fn canonical_severity<F: ValuedField>(xs: &[RVElem<F>]) -> Result<ValQ> {
    common_order(xs)?;
    let mu = min_value(xs);
    match repr_sum(xs, false) {
        None => Ok(ValQ::zero()),
        Some(s) => Ok(s.val()? - mu),
    }
}

/// True iff the sum has ⊕-witnesses of two different values.
pub fn sum_value_ambiguous<F: ValuedField>(xs: &[RVElem<F>]) -> Result<bool> {
    let delta = common_order(xs)?;
    Ok(canonical_severity(xs)? > ValQ::int(delta as i64))
}

/// The class of the sum of canonical representatives; always a ⊕-witness.
pub fn rv_sum_witness<F: ValuedField>(xs: &[RVElem<F>]) -> Result<RVElem<F>> {
    let delta = common_order(xs)?;
    match repr_sum(xs, false) {
        None => Ok(RVElem::infinity(delta)),
        Some(s) => Ok(rv(&s, delta)?.forget_source()),
    }
}

/// `⊕_δ(x₁, …, xₙ, z)`: `z` is a possible class of `x₁ + … + xₙ`.
pub fn oplus_holds_n<F: ValuedField>(xs: &[RVElem<F>], z: &RVElem<F>) -> Result<bool> {
    let delta = common_order(xs)?;
    same_order(&xs[0], z)?;
    let mu = min_value(xs);
    let Some(s) = repr_sum(xs, false) else {
        return Ok(z.is_infinity());
    };
    let diff = match z.repr() {
        Some(zr) => zr.sub(&s),
        None => s.neg(),
    };
    diff.val_greater(&(mu + ValQ::int(delta as i64)))
}

/// `⊕_δ(a, b, c)`.
pub fn oplus_holds<F: ValuedField>(a: &RVElem<F>, b: &RVElem<F>, c: &RVElem<F>) -> Result<bool> {
    oplus_holds_n(&[a.clone(), b.clone()], c)
}

pub fn value_of<F: ValuedField>(a: &RVElem<F>) -> ValQ {
    a.value()
}

/// The class of `a` in `𝒪/𝔪_δ` for `v(a) ≥ 0`.
pub fn residue_of<F: ValuedField>(a: &RVElem<F>) -> Result<ResidueClass> {
    match a.repr() {
        None => Err(Error::Invalid("residue of ∞".into())),
        Some(r) => r.res_delta(a.order),
    }
}

/// Image of `a` in the residue field (zero when `v(a) > 0`).
pub fn residue_field_of<F: ValuedField>(a: &RVElem<F>) -> Result<ResidueElem> {
    match a.repr() {
        None => Err(Error::Invalid("residue of ∞".into())),
        Some(r) => r.residue(),
    }
}

/// `v(x) > 0` through the partial addition alone: `⊕(d·x, 1, 1)` with
/// `d = rv(π)`.
pub fn positive_via_oplus<F: ValuedField>(ctx: &F::Ctx, x: &RVElem<F>) -> Result<bool> {
    let d = RVElem::from_repr(&F::uniformizer_pow(ctx, 1), x.order)?;
    let one = RVElem::one(ctx, x.order);
    oplus_holds(&rv_mul(&d, x)?, &one, &one)
}

impl<F: ValuedField> fmt::Display for RVElem<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.unit() {
            None => write!(f, "rv[{}]{{inf}}", self.order),
            Some(unit) => {
                let digits: Vec<String> = match unit {
                    ResidueClass::Coeffs(cs) => {
                        let mut cs: Vec<String> = cs.iter().map(crate::field::rat_to_string).collect();
                        cs.resize(self.order as usize + 1, "0".into());
                        cs
                    }
                    ResidueClass::ModPk { value, p, k } => {
                        let mut v = value;
                        (0..k)
                            .map(|_| {
                                let d = &v % p;
                                v /= p;
                                d.to_string()
                            })
                            .collect()
                    }
                };
                write!(f, "rv[{}]{{v={}; unit={}}}", self.order, self.value(), digits.join(","))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{LaurentCtx, LaurentQ, PAdic, PAdicCtx};
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn ctx() -> LaurentCtx {
        LaurentCtx::default()
    }
    fn t(k: i64) -> LaurentQ {
        LaurentQ::uniformizer_pow(&ctx(), k)
    }
    fn c(n: i64) -> LaurentQ {
        LaurentQ::from_i64(&ctx(), n)
    }
    fn series(cs: &[(i64, i64)]) -> LaurentQ {
        cs.iter().fold(c(0), |acc, &(a, k)| acc.add(&t(k).scale_int(a)))
    }

    #[test]
    fn classes_of_close_series() {
        let x = series(&[(1, -2), (1, -1), (1, 0), (1, 1), (2, 2), (1, 3)]);
        let y = series(&[(1, -2), (1, -1), (1, 0), (1, 1), (1, 2), (1, 3)]);
        assert_eq!(rv(&x, 3).unwrap(), rv(&y, 3).unwrap());
        assert_ne!(rv(&x, 4).unwrap(), rv(&y, 4).unwrap());
        assert_eq!(rv_project(&rv(&x, 4).unwrap(), 3).unwrap(), rv(&y, 3).unwrap());
        assert_ne!(rv(&t(2), 0).unwrap(), rv(&t(2).scale_int(2), 0).unwrap());
    }

    #[test]
    fn projection_edge_cases() {
        let a = rv(&c(3), 2).unwrap();
        assert_eq!(rv_project(&a, 2).unwrap(), a);
        assert!(matches!(rv_project(&a, 3), Err(Error::OrderViolation { .. })));
        assert!(rv_project(&RVElem::<LaurentQ>::infinity(3), 1).unwrap().is_infinity());
    }

    #[test]
    fn group_operations() {
        let r = |x: &LaurentQ| rv(x, 0).unwrap();
        assert_eq!(rv_mul(&r(&t(1)), &r(&t(1))).unwrap(), r(&t(2)));
        let half = LaurentQ::from_rational(&ctx(), &BigRational::new(1.into(), 2.into()));
        assert_eq!(rv_inv(&r(&t(1).scale_int(2))).unwrap(), r(&t(-1).mul(&half)));
        assert!(rv_mul(&r(&c(1)), &RVElem::infinity(0)).unwrap().is_infinity());
        assert!(matches!(rv_mul(&r(&c(1)), &rv(&c(1), 1).unwrap()), Err(Error::OrderMismatch(0, 1))));
    }

    #[test]
    fn sums() {
        let a = rv(&c(1), 3).unwrap();
        let b = rv(&c(-1).add(&t(5)), 3).unwrap();
        assert_eq!(
            rv_sum_analyze(&[a, b]).unwrap(),
            SumAnalysis::Ambiguous { severity: ValQ::int(5), witness_value: None }
        );
        let a = rv(&c(1), 0).unwrap();
        let b = rv(&t(1), 0).unwrap();
        assert_eq!(
            rv_sum_analyze(&[a, b]).unwrap(),
            SumAnalysis::WellDefined(rv(&c(1).add(&t(1)), 0).unwrap())
        );
        let a = rv(&c(1), 5).unwrap();
        let b = rv(&c(-1).add(&t(3)), 5).unwrap();
        assert_eq!(
            rv_sum_analyze(&[a.clone(), b.clone()]).unwrap(),
            SumAnalysis::Ambiguous { severity: ValQ::int(3), witness_value: Some(ValQ::int(3)) }
        );
        let w = rv_sum_witness(&[a, b]).unwrap();
        assert_eq!(rv_project(&w, 2).unwrap(), rv(&t(3), 2).unwrap());
    }

    #[test]
    fn partial_addition() {
        let r = |x: &LaurentQ| rv(x, 0).unwrap();
        let y = c(-1).add(&t(3));
        assert!(oplus_holds(&r(&c(1)), &r(&y), &r(&t(3))).unwrap());
        assert!(oplus_holds(&r(&c(1)), &r(&y), &r(&t(5))).unwrap());
        assert!(!oplus_holds(&r(&c(1)), &r(&t(1)), &r(&t(1))).unwrap());
        assert!(oplus_holds(&r(&c(1)), &r(&t(1)), &r(&c(1))).unwrap());
        assert!(oplus_holds(&r(&c(1)), &r(&c(-1)), &RVElem::infinity(0)).unwrap());
        let inf = RVElem::<LaurentQ>::infinity(0);
        assert!(oplus_holds(&inf, &inf, &inf).unwrap());
        assert!(!oplus_holds(&inf, &inf, &r(&c(1))).unwrap());
    }

    #[test]
    fn interpreted_value_and_residue() {
        let a = rv(&t(2).scale_int(3), 0).unwrap();
        assert_eq!(value_of(&a), ValQ::int(2));
        let b = rv(&c(3).add(&t(1)), 0).unwrap();
        assert_eq!(residue_field_of(&b).unwrap(), ResidueElem::Q(BigRational::from_integer(3.into())));
        assert!(positive_via_oplus(&ctx(), &rv(&t(1), 0).unwrap()).unwrap());
        assert!(!positive_via_oplus(&ctx(), &rv(&t(-1), 0).unwrap()).unwrap());
        assert!(matches!(residue_of(&rv(&t(-1), 0).unwrap()), Err(Error::NegativeValue(_))));
    }

    #[test]
    fn text_form() {
        let a = rv(&t(2).scale_int(3).add(&t(4)), 2).unwrap();
        assert_eq!(a.to_string(), "rv[2]{v=2; unit=3,0,1}");
        assert_eq!(RVElem::<LaurentQ>::infinity(1).to_string(), "rv[1]{inf}");
        let pc = PAdicCtx::new(7);
        let x = PAdic::from_i64(&pc, 3 + 49 * 5 + 7 * 7 * 7 * 2);
        assert_eq!(rv(&x, 2).unwrap().to_string(), "rv[2]{v=0; unit=3,0,5}");
    }

    fn nonzero() -> impl Strategy<Value = LaurentQ> {
        (prop::collection::vec(-3i64..=3, 0..6), 1i64..=3, -3i64..=3).prop_map(|(cs, lead, v)| {
            cs.iter()
                .enumerate()
                .fold(t(v).scale_int(lead), |acc, (i, &a)| acc.add(&t(v + 1 + i as i64).scale_int(a)))
        })
    }

    proptest! {
        #[test]
        fn equality_matches_difference_value(x in nonzero(), y in nonzero(), d in 0u32..5) {
            let same = rv(&x, d).unwrap() == rv(&y, d).unwrap();
            let close = x.sub(&y).val_greater(&(y.val().unwrap() + ValQ::int(d as i64))).unwrap();
            prop_assert_eq!(same, close);
            if same {
                prop_assert_eq!(x.val().unwrap(), y.val().unwrap());
            }
        }

        #[test]
        fn projection_commutes(x in nonzero(), g in 0u32..6, d in 0u32..6) {
            prop_assume!(d <= g);
            prop_assert_eq!(rv_project(&rv(&x, g).unwrap(), d).unwrap(), rv(&x, d).unwrap());
        }
    }
}

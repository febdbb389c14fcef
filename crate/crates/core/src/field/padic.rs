use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};

use super::residue::{big_to_u64_mod, fp_roots};
use super::{fmt_series, int_pval, ResidueClass, ResidueElem, ValuedField, DEFAULT_PRECISION};
use crate::error::{exhausted, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PAdicCtx {
    pub p: u64,
    pub cap: u32,
}

impl PAdicCtx {
    pub fn new(p: u64) -> Self {
        PAdicCtx { p, cap: DEFAULT_PRECISION }
    }
}

/// A `p`-adic number: an exact rational, or a rational representative known
/// modulo `p^prec`.
///
/// Inexact elements are kept in the canonical form `p^v·u` with
/// `0 < u < p^{prec-v}`, so that equal classes compare equal.
#[derive(Clone, Debug)]
pub struct PAdic {
    ctx: PAdicCtx,
    r: BigRational,
    prec: Option<i64>,
}

impl PartialEq for PAdic {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.p == other.ctx.p && self.r == other.r && self.prec == other.prec
    }
}

fn rat_pval(r: &BigRational, p: u64) -> i64 {
    int_pval(r.numer(), p) - int_pval(r.denom(), p)
}

fn p_pow(p: u64, k: i64) -> BigRational {
    let base = BigRational::from_integer(BigInt::from(p));
    if k >= 0 {
        Pow::pow(&base, k as u64)
    } else {
        Pow::pow(&base, (-k) as u64).recip()
    }
}

/// `n/d mod m` for `d` coprime to `m`, in `[0, m)`.
fn mod_div(n: &BigInt, d: &BigInt, m: &BigInt) -> BigInt {
    let g = d.mod_floor(m).extended_gcd(m);
    debug_assert!(g.gcd.is_one());
    (n * g.x).mod_floor(m)
}

impl PAdic {
    fn build(ctx: PAdicCtx, r: BigRational, prec: Option<i64>) -> Self {
        let Some(a) = prec else {
            return PAdic { ctx, r, prec };
        };
        if r.is_zero() {
            return PAdic { ctx, r, prec };
        }
        let p = ctx.p;
        let v = rat_pval(&r, p);
        if v >= a {
            return PAdic { ctx, r: BigRational::zero(), prec };
        }
        let unit = &r / p_pow(p, v);
        let m = BigInt::from(p).pow((a - v) as u32);
        let u = mod_div(unit.numer(), unit.denom(), &m);
        let r = BigRational::from_integer(u) * p_pow(p, v);
        PAdic { ctx, r, prec }
    }

    pub fn p(&self) -> u64 {
        self.ctx.p
    }

    /// The rational representative.
    pub fn rational(&self) -> &BigRational {
        &self.r
    }

    pub fn from_rational_with_prec(ctx: &PAdicCtx, r: BigRational, prec: Option<i64>) -> Self {
        PAdic::build(ctx.clone(), r, prec)
    }

    /// The representative of `x` modulo `p^k` as an integer in `[0, p^k)`,
    /// for `x` of nonnegative value known to precision at least `k`.
    pub fn mod_pk(&self, k: u32) -> Result<BigInt> {
        match self.res_delta(k.saturating_sub(1))? {
            ResidueClass::ModPk { value, .. } if k > 0 => Ok(value),
            _ => Ok(BigInt::zero()),
        }
    }

    fn merged_ctx(&self, other: &Self) -> PAdicCtx {
        assert_eq!(self.ctx.p, other.ctx.p, "mixing p-adic fields with different primes");
        PAdicCtx { p: self.ctx.p, cap: self.ctx.cap.max(other.ctx.cap) }
    }

    fn lower_bound(&self) -> Option<i64> {
        self.known_val().or(self.prec)
    }
}

fn min_prec(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl ValuedField for PAdic {
    type Ctx = PAdicCtx;

    fn ctx(&self) -> &PAdicCtx {
        &self.ctx
    }

    fn cap(ctx: &PAdicCtx) -> u32 {
        ctx.cap
    }

    fn residue_char(ctx: &PAdicCtx) -> u64 {
        ctx.p
    }

    fn backend_name(ctx: &PAdicCtx) -> String {
        format!("padic-{}", ctx.p)
    }

    fn from_rational(ctx: &PAdicCtx, r: &BigRational) -> Self {
        PAdic::build(ctx.clone(), r.clone(), None)
    }

    fn uniformizer_pow(ctx: &PAdicCtx, k: i64) -> Self {
        PAdic::build(ctx.clone(), p_pow(ctx.p, k), None)
    }

    fn approx_zero(ctx: &PAdicCtx, prec: i64) -> Self {
        PAdic::build(ctx.clone(), BigRational::zero(), Some(prec))
    }

    fn add(&self, other: &Self) -> Self {
        PAdic::build(self.merged_ctx(other), &self.r + &other.r, min_prec(self.prec, other.prec))
    }

    fn mul(&self, other: &Self) -> Self {
        let ctx = self.merged_ctx(other);
        if self.is_exact_zero() || other.is_exact_zero() {
            return PAdic::build(ctx, BigRational::zero(), None);
        }
        let prec = min_prec(
            self.prec.map(|p| p + other.lower_bound().unwrap()),
            other.prec.map(|p| p + self.lower_bound().unwrap()),
        );
        PAdic::build(ctx, &self.r * &other.r, prec)
    }

    fn neg(&self) -> Self {
        PAdic::build(self.ctx.clone(), -&self.r, self.prec)
    }

    fn inv(&self) -> Result<Self> {
        if self.is_exact_zero() {
            return Err(Error::DivisionByZero);
        }
        let v = self.known_val().ok_or_else(|| exhausted(format!("inverse of {self}")))?;
        let prec = self.prec.map(|a| a - 2 * v);
        Ok(PAdic::build(self.ctx.clone(), self.r.recip(), prec))
    }

    fn abs_prec(&self) -> Option<i64> {
        self.prec
    }

    fn known_val(&self) -> Option<i64> {
        if self.r.is_zero() {
            None
        } else {
            Some(rat_pval(&self.r, self.ctx.p))
        }
    }

    fn is_exact_zero(&self) -> bool {
        self.r.is_zero() && self.prec.is_none()
    }

    fn truncate(&self, prec: i64) -> Self {
        PAdic::build(self.ctx.clone(), self.r.clone(), min_prec(self.prec, Some(prec)))
    }

    fn rv_repr(&self, delta: u32) -> Result<Self> {
        let v = self
            .known_val()
            .ok_or_else(|| exhausted(format!("leading term of {self}")))?;
        let need = v + delta as i64 + 1;
        if self.prec.is_some_and(|a| a < need) {
            return Err(exhausted(format!("rv_{delta} of {self}")));
        }
        let t = PAdic::build(self.ctx.clone(), self.r.clone(), Some(need));
        Ok(PAdic { ctx: self.ctx.clone(), r: t.r, prec: None })
    }

    fn res_delta(&self, delta: u32) -> Result<ResidueClass> {
        let k = delta + 1;
        if let Some(v) = self.known_val() {
            if v < 0 {
                return Err(Error::NegativeValue(format!("res of {self}")));
            }
        }
        if self.prec.is_some_and(|a| a < k as i64) {
            return Err(exhausted(format!("res_{delta} of {self}")));
        }
        let m = BigInt::from(self.ctx.p).pow(k);
        let value = if self.r.is_zero() {
            BigInt::zero()
        } else {
            mod_div(self.r.numer(), self.r.denom(), &m)
        };
        Ok(ResidueClass::ModPk { value, p: self.ctx.p, k })
    }

    fn residue(&self) -> Result<ResidueElem> {
        match self.res_delta(0)? {
            ResidueClass::ModPk { value, p, .. } => {
                Ok(ResidueElem::Fp { value: big_to_u64_mod(&value, p), p })
            }
            _ => unreachable!(),
        }
    }

    fn from_residue(ctx: &PAdicCtx, r: &ResidueElem) -> Self {
        match r {
            ResidueElem::Fp { value, .. } => PAdic::from_i64(ctx, *value as i64),
            ResidueElem::Q(q) => PAdic::from_rational(ctx, q),
        }
    }

    fn residue_roots(ctx: &PAdicCtx, coeffs: &[ResidueElem]) -> Vec<ResidueElem> {
        let p = ctx.p;
        let cs: Vec<u64> = coeffs
            .iter()
            .map(|c| match c {
                ResidueElem::Fp { value, .. } => *value,
                ResidueElem::Q(q) => {
                    let n = big_to_u64_mod(q.numer(), p);
                    let d = big_to_u64_mod(q.denom(), p);
                    let inv = mod_div(&BigInt::one(), &BigInt::from(d), &BigInt::from(p));
                    big_to_u64_mod(&(BigInt::from(n) * inv), p)
                }
            })
            .collect();
        fp_roots(&cs, p).into_iter().map(|value| ResidueElem::Fp { value, p }).collect()
    }

    fn int_val(ctx: &PAdicCtx, n: &BigInt) -> i64 {
        int_pval(n, ctx.p)
    }

    fn literal_terms(&self) -> (Vec<(BigRational, i64)>, Option<i64>) {
        let terms = if self.r.is_zero() { Vec::new() } else { vec![(self.r.clone(), 0)] };
        (terms, self.prec)
    }

    fn exact_candidates(&self) -> Vec<Self> {
        let exact = PAdic { ctx: self.ctx.clone(), r: self.r.clone(), prec: None };
        let (Some(a), Some(v)) = (self.prec, self.known_val()) else {
            return vec![exact];
        };
        let unit = &self.r / p_pow(self.ctx.p, v);
        let m = BigInt::from(self.ctx.p).pow((a - v) as u32);
        let mut out = vec![exact];
        if let Some(q) = rational_reconstruction(unit.numer(), &m) {
            out.push(PAdic { ctx: self.ctx.clone(), r: q * p_pow(self.ctx.p, v), prec: None });
        }
        out
    }
}

/// The fraction `n/d` with `|n|, |d| ≤ √(m/2)` congruent to `u` modulo `m`,
/// if there is one.
fn rational_reconstruction(u: &BigInt, m: &BigInt) -> Option<BigRational> {
    let bound = (m / 2u32).sqrt();
    let (mut r0, mut r1) = (m.clone(), u.mod_floor(m));
    let (mut s0, mut s1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let s2 = &s0 - &q * &s1;
        r0 = std::mem::replace(&mut r1, r2);
        s0 = std::mem::replace(&mut s1, s2);
    }
    if s1.is_zero() || s1.abs() > bound || !s1.gcd(m).is_one() {
        return None;
    }
    Some(BigRational::new(r1, s1))
}

impl fmt::Display for PAdic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (terms, prec) = self.literal_terms();
        fmt_series(f, &terms, prec, &self.ctx.p.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valq::ValQ;

    fn ctx7() -> PAdicCtx {
        PAdicCtx::new(7)
    }
    fn n(ctx: &PAdicCtx, k: i64) -> PAdic {
        PAdic::from_i64(ctx, k)
    }

    #[test]
    fn valuations_of_rationals() {
        let c = ctx7();
        assert_eq!(n(&c, 98).val().unwrap(), ValQ::int(2));
        let x = PAdic::from_rational(&c, &BigRational::new(3.into(), 49.into()));
        assert_eq!(x.val().unwrap(), ValQ::int(-2));
    }

    #[test]
    fn residue_classes() {
        let c = ctx7();
        // res_2 lives modulo 7^3
        let x = n(&c, 3 + 49 * 7);
        assert_eq!(
            x.res_delta(2).unwrap(),
            ResidueClass::ModPk { value: 3.into(), p: 7, k: 3 }
        );
        let y = n(&c, 3 + 49);
        assert_eq!(y.res_delta(1).unwrap(), ResidueClass::ModPk { value: 3.into(), p: 7, k: 2 });
        assert_eq!(y.residue().unwrap(), ResidueElem::Fp { value: 3, p: 7 });
    }

    #[test]
    fn inexact_normal_form() {
        let c = ctx7();
        let x = PAdic::from_rational_with_prec(&c, BigRational::new(1.into(), 2.into()), Some(2));
        // 1/2 = 25 mod 49
        assert_eq!(x.to_string(), "25 + O(7^2)");
        let z = x.sub(&x);
        assert!(z.val().is_err());
        assert!(n(&c, 0).inv().is_err());
    }

    #[test]
    fn recognises_small_fractions() {
        let c = ctx7();
        let half = BigRational::new(1.into(), 2.into());
        let x = PAdic::from_rational_with_prec(&c, half.clone(), Some(20));
        assert!(x.exact_candidates().iter().any(|y| y.rational() == &half));
        let m = PAdic::from_rational_with_prec(&c, BigRational::from_integer((-3).into()), Some(20));
        assert!(m.exact_candidates().iter().any(|y| y.rational() == &BigRational::from_integer((-3).into())));
    }

    #[test]
    fn inverse_tracks_precision() {
        let c = ctx7();
        let x = PAdic::from_rational_with_prec(&c, BigRational::from_integer(14.into()), Some(5));
        let y = x.inv().unwrap();
        assert_eq!(y.val().unwrap(), ValQ::int(-1));
        assert_eq!(y.abs_prec(), Some(3));
        let one = x.mul(&y);
        assert_eq!(one.abs_prec(), Some(4));
        assert!(one.sub(&n(&c, 1)).val_at_least(&ValQ::int(4)).unwrap());
        assert!(one.eq_value(&n(&c, 1)).is_err());
    }
}

use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::residue::rational_roots;
use super::{fmt_series, ResidueClass, ResidueElem, ValuedField, DEFAULT_PRECISION};
use crate::error::{exhausted, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LaurentCtx {
    pub cap: u32,
}

impl Default for LaurentCtx {
    fn default() -> Self {
        LaurentCtx { cap: DEFAULT_PRECISION }
    }
}

/// A Laurent series `Σ (n_k/d) t^k` over ℚ, exact or known modulo `t^prec`.
///
/// Coefficients share the denominator `d > 0`. Products of two proper
/// fractions are reduced so that `d` is coprime to the numerators; other
/// results are not, since they cannot grow `d` past the lcm of the inputs. `num[0]` is nonzero unless `num` is empty, no
/// trailing zeros are stored, and for inexact elements
/// `val + num.len() ≤ prec`.
#[derive(Clone, Debug)]
pub struct LaurentQ {
    ctx: LaurentCtx,
    val: i64,
    num: Vec<BigInt>,
    den: BigInt,
    prec: Option<i64>,
}

impl PartialEq for LaurentQ {
    fn eq(&self, other: &Self) -> bool {
        self.prec == other.prec
            && self.num.len() == other.num.len()
            && (self.num.is_empty() || self.val == other.val)
            && if self.den == other.den {
                self.num == other.num
            } else {
                self.num.iter().zip(&other.num).all(|(a, b)| a * &other.den == b * &self.den)
            }
    }
}

fn min_prec(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Integer numerators over the least common denominator.
fn over_common_denominator(cs: &[BigRational]) -> (Vec<BigInt>, BigInt) {
    let d = cs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let nums = cs.iter().map(|c| c.numer() * (&d / c.denom())).collect();
    (nums, d)
}

impl LaurentQ {
    fn build(ctx: LaurentCtx, val: i64, num: Vec<BigInt>, den: BigInt, prec: Option<i64>) -> Self {
        LaurentQ::assemble(ctx, val, num, den, prec, false)
    }

    fn build_reduced(ctx: LaurentCtx, val: i64, num: Vec<BigInt>, den: BigInt, prec: Option<i64>) -> Self {
        LaurentQ::assemble(ctx, val, num, den, prec, true)
    }

    fn assemble(
        ctx: LaurentCtx,
        mut val: i64,
        mut num: Vec<BigInt>,
        mut den: BigInt,
        prec: Option<i64>,
        reduce: bool,
    ) -> Self {
        let lead = num.iter().take_while(|c| c.is_zero()).count();
        if lead > 0 {
            num.drain(..lead);
            val += lead as i64;
        }
        if let Some(p) = prec {
            let keep = (p - val).max(0) as usize;
            if num.len() > keep {
                num.truncate(keep);
            }
        }
        while num.last().is_some_and(Zero::is_zero) {
            num.pop();
        }
        if num.is_empty() {
            return LaurentQ { ctx, val: prec.unwrap_or(0), num, den: BigInt::one(), prec };
        }
        if den.sign() == Sign::Minus {
            den = -den;
            num.iter_mut().for_each(|c| *c = -&*c);
        }
        if reduce && !den.is_one() {
            let mut g = den.clone();
            for c in &num {
                if g.is_one() {
                    break;
                }
                if !c.is_zero() {
                    g = g.gcd(c);
                }
            }
            if !g.is_one() {
                den /= &g;
                num.iter_mut().for_each(|c| *c /= &g);
            }
        }
        LaurentQ { ctx, val, num, den, prec }
    }

    fn from_rationals(ctx: LaurentCtx, val: i64, cs: &[BigRational], prec: Option<i64>) -> Self {
        let (num, den) = over_common_denominator(cs);
        LaurentQ::build_reduced(ctx, val, num, den, prec)
    }

    /// Builds `Σ c·t^k + O(t^prec)` from (coefficient, exponent) pairs.
    pub fn from_terms(ctx: &LaurentCtx, terms: &[(BigRational, i64)], prec: Option<i64>) -> Self {
        let mut acc = LaurentQ::build(ctx.clone(), 0, Vec::new(), BigInt::one(), prec);
        for (c, k) in terms {
            acc = acc.add(&LaurentQ::from_rationals(ctx.clone(), *k, std::slice::from_ref(c), None));
        }
        acc
    }

    /// Coefficient of `t^k` if it is known.
    pub fn coeff(&self, k: i64) -> Option<BigRational> {
        if let Some(p) = self.prec {
            if k >= p {
                return None;
            }
        }
        if self.num.is_empty() || k < self.val {
            return Some(BigRational::zero());
        }
        Some(match self.num.get((k - self.val) as usize) {
            Some(n) => BigRational::new(n.clone(), self.den.clone()),
            None => BigRational::zero(),
        })
    }

    fn merged_ctx(&self, other: &Self) -> LaurentCtx {
        LaurentCtx { cap: self.ctx.cap.max(other.ctx.cap) }
    }
}

impl ValuedField for LaurentQ {
    type Ctx = LaurentCtx;

    fn ctx(&self) -> &LaurentCtx {
        &self.ctx
    }

    fn cap(ctx: &LaurentCtx) -> u32 {
        ctx.cap
    }

    fn residue_char(_: &LaurentCtx) -> u64 {
        0
    }

    fn backend_name(_: &LaurentCtx) -> String {
        "laurent-q".into()
    }

    fn from_rational(ctx: &LaurentCtx, r: &BigRational) -> Self {
        LaurentQ::build_reduced(ctx.clone(), 0, vec![r.numer().clone()], r.denom().clone(), None)
    }

    fn uniformizer_pow(ctx: &LaurentCtx, k: i64) -> Self {
        LaurentQ::build(ctx.clone(), k, vec![BigInt::one()], BigInt::one(), None)
    }

    fn approx_zero(ctx: &LaurentCtx, prec: i64) -> Self {
        LaurentQ::build(ctx.clone(), prec, Vec::new(), BigInt::one(), Some(prec))
    }

    fn add(&self, other: &Self) -> Self {
        let ctx = self.merged_ctx(other);
        let prec = min_prec(self.prec, other.prec);
        if self.num.is_empty() {
            return LaurentQ::build(ctx, other.val, other.num.clone(), other.den.clone(), prec);
        }
        if other.num.is_empty() {
            return LaurentQ::build(ctx, self.val, self.num.clone(), self.den.clone(), prec);
        }
        let lo = self.val.min(other.val);
        let mut hi = (self.val + self.num.len() as i64).max(other.val + other.num.len() as i64);
        if let Some(p) = prec {
            hi = hi.min(p);
        }
        let len = (hi - lo).max(0) as usize;
        let g = self.den.gcd(&other.den);
        let (sa, sb) = (&other.den / &g, &self.den / &g);
        let den = &self.den * &sa;
        let mut out = vec![BigInt::zero(); len];
        for (src, scale) in [(self, &sa), (other, &sb)] {
            for (i, c) in src.num.iter().enumerate() {
                let idx = (src.val + i as i64 - lo) as usize;
                if idx < len && !c.is_zero() {
                    if scale.is_one() {
                        out[idx] += c;
                    } else {
                        out[idx] += c * scale;
                    }
                }
            }
        }
        LaurentQ::build(ctx, lo, out, den, prec)
    }

    fn mul(&self, other: &Self) -> Self {
        let ctx = self.merged_ctx(other);
        if self.is_exact_zero() || other.is_exact_zero() {
            return LaurentQ::build(ctx, 0, Vec::new(), BigInt::one(), None);
        }
        // lower bounds on the true values
        let lb_a = if self.num.is_empty() { self.prec.unwrap() } else { self.val };
        let lb_b = if other.num.is_empty() { other.prec.unwrap() } else { other.val };
        let prec = min_prec(self.prec.map(|p| p + lb_b), other.prec.map(|p| p + lb_a));
        if self.num.is_empty() || other.num.is_empty() {
            return LaurentQ::build(ctx, 0, Vec::new(), BigInt::one(), prec);
        }
        let val = self.val + other.val;
        let full = self.num.len() + other.num.len() - 1;
        let len = match prec {
            Some(p) => ((p - val).max(0) as usize).min(full),
            None => full,
        };
        let mut out = vec![BigInt::zero(); len];
        for (i, a) in self.num.iter().enumerate().take(len) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.num.iter().enumerate().take(len - i) {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        if self.den.is_one() || other.den.is_one() {
            return LaurentQ::build(ctx, val, out, &self.den * &other.den, prec);
        }
        LaurentQ::build_reduced(ctx, val, out, &self.den * &other.den, prec)
    }

    fn neg(&self) -> Self {
        LaurentQ {
            ctx: self.ctx.clone(),
            val: self.val,
            num: self.num.iter().map(|c| -c).collect(),
            den: self.den.clone(),
            prec: self.prec,
        }
    }

    fn inv(&self) -> Result<Self> {
        if self.is_exact_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.num.is_empty() {
            return Err(exhausted(format!("inverse of {self}")));
        }
        let c = &self.num;
        if self.prec.is_none() && c.len() == 1 {
            return Ok(LaurentQ::build_reduced(self.ctx.clone(), -self.val, vec![self.den.clone()], c[0].clone(), None));
        }
        let rel = match self.prec {
            Some(p) => ((p - self.val) as u64).min(self.ctx.cap as u64),
            None => self.ctx.cap as u64,
        } as usize;
        // With the series equal to C/d, its inverse is d·Σ w_k t^k / C₀^{k+1}
        // where w₀ = 1 and w_k = −Σ_j C_j C₀^{j−1} w_{k−j}.
        let terms = c.len().min(rel);
        let mut e = Vec::with_capacity(terms);
        let mut pw = BigInt::one();
        for cj in c.iter().take(terms).skip(1) {
            e.push(cj * &pw);
            pw *= &c[0];
        }
        let mut w: Vec<BigInt> = Vec::with_capacity(rel);
        w.push(BigInt::one());
        for k in 1..rel {
            let mut s = BigInt::zero();
            for j in 1..=k.min(terms - 1) {
                if !e[j - 1].is_zero() && !w[k - j].is_zero() {
                    s += &e[j - 1] * &w[k - j];
                }
            }
            w.push(-s);
        }
        // Over the common denominator C₀^rel the k-th numerator is
        // d·w_k·C₀^{rel−1−k}.
        let mut out = vec![BigInt::zero(); rel];
        let mut c0k = self.den.clone();
        for k in (0..rel).rev() {
            out[k] = &w[k] * &c0k;
            c0k *= &c[0];
        }
        let den = c0k / &self.den;
        Ok(LaurentQ::build_reduced(self.ctx.clone(), -self.val, out, den, Some(-self.val + rel as i64)))
    }

    fn abs_prec(&self) -> Option<i64> {
        self.prec
    }

    fn known_val(&self) -> Option<i64> {
        if self.num.is_empty() {
            None
        } else {
            Some(self.val)
        }
    }

    fn is_exact_zero(&self) -> bool {
        self.num.is_empty() && self.prec.is_none()
    }

    fn truncate(&self, prec: i64) -> Self {
        LaurentQ::build(self.ctx.clone(), self.val, self.num.clone(), self.den.clone(), min_prec(self.prec, Some(prec)))
    }

    fn rv_repr(&self, delta: u32) -> Result<Self> {
        let v = self
            .known_val()
            .ok_or_else(|| exhausted(format!("leading term of {self}")))?;
        if let Some(p) = self.prec {
            if p < v + delta as i64 + 1 {
                return Err(exhausted(format!("rv_{delta} of {self}")));
            }
        }
        let keep = (delta as usize + 1).min(self.num.len());
        Ok(LaurentQ::build(self.ctx.clone(), v, self.num[..keep].to_vec(), self.den.clone(), None))
    }

    fn res_delta(&self, delta: u32) -> Result<ResidueClass> {
        if let Some(v) = self.known_val() {
            if v < 0 {
                return Err(Error::NegativeValue(format!("res of {self}")));
            }
        }
        let mut out = Vec::with_capacity(delta as usize + 1);
        for k in 0..=delta as i64 {
            out.push(self.coeff(k).ok_or_else(|| exhausted(format!("res_{delta} of {self}")))?);
        }
        Ok(ResidueClass::Coeffs(out))
    }

    fn residue(&self) -> Result<ResidueElem> {
        match self.res_delta(0)? {
            ResidueClass::Coeffs(mut c) => Ok(ResidueElem::Q(c.remove(0))),
            _ => unreachable!(),
        }
    }

    fn from_residue(ctx: &LaurentCtx, r: &ResidueElem) -> Self {
        match r {
            ResidueElem::Q(q) => LaurentQ::from_rational(ctx, q),
            ResidueElem::Fp { value, .. } => LaurentQ::from_i64(ctx, *value as i64),
        }
    }

    fn residue_roots(_: &LaurentCtx, coeffs: &[ResidueElem]) -> Vec<ResidueElem> {
        let qs: Vec<BigRational> = coeffs
            .iter()
            .map(|c| match c {
                ResidueElem::Q(q) => q.clone(),
                ResidueElem::Fp { value, .. } => BigRational::from_integer(BigInt::from(*value)),
            })
            .collect();
        rational_roots(&qs).into_iter().map(ResidueElem::Q).collect()
    }

    fn int_val(_: &LaurentCtx, _: &BigInt) -> i64 {
        0
    }

    fn literal_terms(&self) -> (Vec<(BigRational, i64)>, Option<i64>) {
        let terms = self
            .num
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (BigRational::new(c.clone(), self.den.clone()), self.val + i as i64))
            .collect();
        (terms, self.prec)
    }

    fn exact_candidates(&self) -> Vec<Self> {
        vec![LaurentQ::build(self.ctx.clone(), self.val, self.num.clone(), self.den.clone(), None)]
    }
}

impl fmt::Display for LaurentQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (terms, prec) = self.literal_terms();
        fmt_series(f, &terms, prec, "t")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valq::ValQ;

    fn ctx() -> LaurentCtx {
        LaurentCtx::default()
    }
    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }
    fn t(k: i64) -> LaurentQ {
        LaurentQ::uniformizer_pow(&ctx(), k)
    }
    fn c(n: i64) -> LaurentQ {
        LaurentQ::from_i64(&ctx(), n)
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(t(2).add(&t(3)).val().unwrap(), ValQ::int(2));
        assert_eq!(c(0).val().unwrap(), ValQ::PosInf);
        let prod = c(1).add(&t(1)).mul(&c(1).sub(&t(1)));
        assert_eq!(prod.sub(&c(1)).val().unwrap(), ValQ::int(2));
    }

    #[test]
    fn cancellation_consumes_precision() {
        let x = c(1).add(&t(1)).truncate(10);
        let y = x.add(&c(-1));
        assert_eq!(y.to_string(), "1*t^1 + O(t^10)");
        let z = x.sub(&x);
        assert!(z.val().is_err());
        assert_eq!(z.abs_prec(), Some(10));
    }

    #[test]
    fn inverse_is_geometric_series() {
        let inv = c(1).add(&t(1)).inv().unwrap();
        assert_eq!(inv.abs_prec(), Some(64));
        for k in 0..64 {
            assert_eq!(inv.coeff(k).unwrap(), q(if k % 2 == 0 { 1 } else { -1 }));
        }
        assert_eq!(t(1).mul(&t(-1).inv().unwrap().inv().unwrap()), c(1));
    }

    #[test]
    fn residues() {
        let x = c(2).add(&t(1));
        assert_eq!(x.residue().unwrap(), ResidueElem::Q(q(2)));
        assert_eq!(x.res_delta(1).unwrap(), ResidueClass::Coeffs(vec![q(2), q(1)]));
        assert!(t(-1).res_delta(0).is_err());
    }

    #[test]
    fn printing() {
        let x = LaurentQ::from_terms(&ctx(), &[(q(1), -2), (BigRational::new((-3).into(), 2.into()), 0)], Some(5));
        assert_eq!(x.to_string(), "1*t^-2 + -3/2 + O(t^5)");
        assert_eq!(c(0).to_string(), "0");
        assert_eq!(LaurentQ::approx_zero(&ctx(), 3).to_string(), "O(t^3)");
    }
}

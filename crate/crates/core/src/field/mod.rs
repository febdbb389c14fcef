//! Finite-precision arithmetic in a henselian valued field with value group ℤ.
//!
//! Two backends implement [`ValuedField`]: truncated Laurent series over ℚ
//! ([`LaurentQ`]) and the `p`-adic numbers ([`PAdic`]). Every element is
//! either exact or known modulo `𝔪` to some absolute precision `N`, written
//! `x + O(π^N)`. Predicates whose answer is not determined by the known
//! digits return [`Error::PrecisionExhausted`].

mod laurent;
mod padic;
mod residue;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use laurent::{LaurentCtx, LaurentQ};
pub use padic::{PAdic, PAdicCtx};
pub use residue::{rational_roots, ResidueClass, ResidueElem};

use crate::error::{exhausted, Error, Result};
use crate::valq::ValQ;

/// Default relative precision of elements produced by inexact operations.
pub const DEFAULT_PRECISION: u32 = 64;

/// An element of a valued field of characteristic 0 with value group ℤ,
/// carrying its own precision bookkeeping.
pub trait ValuedField:
    Clone + fmt::Debug + fmt::Display + PartialEq + Send + Sync + Sized + 'static
{
    /// Field parameters shared by all elements (working precision, prime).
    type Ctx: Clone + fmt::Debug + PartialEq + Send + Sync;

    fn ctx(&self) -> &Self::Ctx;
    /// Working precision: the relative precision given to results of
    /// operations that produce infinite expansions.
    fn cap(ctx: &Self::Ctx) -> u32;
    /// Residue characteristic (0 for Laurent series over ℚ).
    fn residue_char(ctx: &Self::Ctx) -> u64;
    fn backend_name(ctx: &Self::Ctx) -> String;

    fn from_rational(ctx: &Self::Ctx, r: &BigRational) -> Self;
    /// Exact power `π^k` of the uniformizer (`t` or `p`).
    fn uniformizer_pow(ctx: &Self::Ctx, k: i64) -> Self;
    /// `O(π^prec)`: zero known to absolute precision `prec`.
    fn approx_zero(ctx: &Self::Ctx, prec: i64) -> Self;

    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Result<Self>;

    /// Absolute precision; `None` for exact elements.
    fn abs_prec(&self) -> Option<i64>;
    /// Valuation, when the element is known to be nonzero.
    fn known_val(&self) -> Option<i64>;
    fn is_exact_zero(&self) -> bool;
    /// Forgets all digits at and beyond `π^prec`.
    fn truncate(&self, prec: i64) -> Self;

    /// Canonical exact representative of the class of `self` in
    /// `K^×/(1+𝔪_δ)`: the digits `π^v, …, π^{v+δ}` of `self`.
    fn rv_repr(&self, delta: u32) -> Result<Self>;
    /// Image in `𝒪/𝔪_δ`.
    fn res_delta(&self, delta: u32) -> Result<ResidueClass>;
    /// Image in the residue field `𝒪/𝔪`.
    fn residue(&self) -> Result<ResidueElem>;
    /// Teichmüller-free lift of a residue: the rational or integer
    /// representative viewed as a field element.
    fn from_residue(ctx: &Self::Ctx, r: &ResidueElem) -> Self;
    /// All roots of a residue-field polynomial (coefficients low to high).
    fn residue_roots(ctx: &Self::Ctx, coeffs: &[ResidueElem]) -> Vec<ResidueElem>;
    /// Valuation of a nonzero integer.
    fn int_val(ctx: &Self::Ctx, n: &BigInt) -> i64;

    /// The element as `Σ c_k π^k` plus its absolute precision, for printing.
    fn literal_terms(&self) -> (Vec<(BigRational, i64)>, Option<i64>);

    /// Exact elements consistent with the known digits of `self` that are
    /// plausible exact values: the truncation itself, plus whatever simple
    /// closed forms the backend can recognise.
    fn exact_candidates(&self) -> Vec<Self>;

    // ---- provided ----

    fn from_i64(ctx: &Self::Ctx, n: i64) -> Self {
        Self::from_rational(ctx, &BigRational::from_integer(BigInt::from(n)))
    }

    fn zero(ctx: &Self::Ctx) -> Self {
        Self::from_i64(ctx, 0)
    }

    fn one(ctx: &Self::Ctx) -> Self {
        Self::from_i64(ctx, 1)
    }

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    fn pow(&self, k: i64) -> Result<Self> {
        if k < 0 {
            return self.inv()?.pow(-k);
        }
        let mut acc = Self::one(self.ctx());
        let mut base = self.clone();
        let mut e = k as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc)
    }

    fn scale_int(&self, n: i64) -> Self {
        self.mul(&Self::from_i64(self.ctx(), n))
    }

    fn is_exact(&self) -> bool {
        self.abs_prec().is_none()
    }

    /// True for exact zeros and for elements all of whose known digits vanish.
    fn is_zero_to_precision(&self) -> bool {
        self.known_val().is_none()
    }

    /// `v(x)`; `+∞` for an exact zero.
    fn val(&self) -> Result<ValQ> {
        if let Some(v) = self.known_val() {
            Ok(ValQ::int(v))
        } else if self.is_exact_zero() {
            Ok(ValQ::PosInf)
        } else {
            Err(exhausted(format!("value of {self} is not determined")))
        }
    }

    /// Valuation where elements vanishing to working precision count as
    /// zero. Only used where the element is known to be a genuine zero
    /// (for instance the recentred constant term at a certified root).
    fn val_or_inf(&self) -> ValQ {
        self.known_val().map(ValQ::int).unwrap_or(ValQ::PosInf)
    }

    /// Decides `v(x) ≥ k`.
    fn val_at_least(&self, k: &ValQ) -> Result<bool> {
        if let Some(v) = self.known_val() {
            return Ok(ValQ::int(v) >= *k);
        }
        match self.abs_prec() {
            None => Ok(true),
            Some(p) if ValQ::int(p) >= *k => Ok(true),
            Some(_) => Err(exhausted(format!("cannot compare v({self}) with {k}"))),
        }
    }

    /// Decides `v(x) > k`.
    fn val_greater(&self, k: &ValQ) -> Result<bool> {
        if let Some(v) = self.known_val() {
            return Ok(ValQ::int(v) > *k);
        }
        match self.abs_prec() {
            None => Ok(true),
            Some(p) if ValQ::int(p) > *k => Ok(true),
            Some(_) => Err(exhausted(format!("cannot compare v({self}) with {k}"))),
        }
    }

    /// Equality of field elements as far as both are known; errors when
    /// the difference vanishes only to the available precision.
    fn eq_value(&self, other: &Self) -> Result<bool> {
        let d = self.sub(other);
        if d.is_exact_zero() {
            Ok(true)
        } else if d.known_val().is_some() {
            Ok(false)
        } else {
            Err(exhausted(format!("cannot decide {self} = {other}")))
        }
    }

    /// Promotes an exact element to `x + O(π^prec)`, leaving less precise
    /// elements alone.
    fn with_precision(&self, prec: i64) -> Self {
        match self.abs_prec() {
            Some(p) if p <= prec => self.clone(),
            _ => self.truncate(prec),
        }
    }

    /// Value of `n!`.
    fn factorial_val(ctx: &Self::Ctx, n: u64) -> i64 {
        let p = Self::residue_char(ctx);
        if p == 0 {
            return 0;
        }
        // Legendre
        let mut total = 0i64;
        let mut q = p;
        while q <= n {
            total += (n / q) as i64;
            match q.checked_mul(p) {
                Some(nq) => q = nq,
                None => break,
            }
        }
        total
    }
}

pub(crate) fn rat_to_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub(crate) fn parse_rat(s: &str) -> Result<BigRational> {
    let bad = || Error::Invalid(format!("bad rational '{s}'"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if !d.is_positive() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

/// `p`-adic valuation of a nonzero integer.
pub(crate) fn int_pval(n: &BigInt, p: u64) -> i64 {
    debug_assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = num_integer::Integer::div_rem(&n, &pb);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// Shared formatting of `Σ c_k π^k + O(π^N)`.
pub(crate) fn fmt_series(
    f: &mut fmt::Formatter<'_>,
    terms: &[(BigRational, i64)],
    prec: Option<i64>,
    unif: &str,
) -> fmt::Result {
    let mut first = true;
    for (c, k) in terms {
        if !first {
            write!(f, " + ")?;
        }
        first = false;
        if *k == 0 {
            write!(f, "{}", rat_to_string(c))?;
        } else {
            write!(f, "{}*{}^{}", rat_to_string(c), unif, k)?;
        }
    }
    match prec {
        Some(n) => {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "O({unif}^{n})")
        }
        None if first => write!(f, "0"),
        None => Ok(()),
    }
}

/// Parses the printed form of an element: `c*u^k + … + O(u^N)`, where `u`
/// is `t` for Laurent series and the prime for `p`-adics. A bare rational is
/// the term with `k = 0`.
pub fn parse_literal<F: ValuedField>(ctx: &F::Ctx, s: &str) -> Result<F> {
    let bad = || Error::Invalid(format!("bad field literal '{s}'"));
    let unif = match F::residue_char(ctx) {
        0 => "t".to_string(),
        p => p.to_string(),
    };
    let parse_pow = |body: &str| -> Result<i64> {
        let (base, exp) = body.split_once('^').ok_or_else(bad)?;
        if base.trim() != unif {
            return Err(bad());
        }
        exp.trim().parse().map_err(|_| bad())
    };
    let mut acc = F::zero(ctx);
    for part in s.split('+') {
        let part = part.trim();
        if part.is_empty() {
            return Err(bad());
        }
        if let Some(inner) = part.strip_prefix("O(").and_then(|r| r.strip_suffix(')')) {
            acc = acc.add(&F::approx_zero(ctx, parse_pow(inner)?));
            continue;
        }
        let (c, k) = match part.split_once('*') {
            Some((c, pw)) => (parse_rat(c)?, parse_pow(pw)?),
            None => (parse_rat(part)?, 0),
        };
        acc = acc.add(&F::from_rational(ctx, &c).mul(&F::uniformizer_pow(ctx, k)));
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_round_trip() {
        let lc = LaurentCtx::default();
        for s in ["1*t^-2 + -3/2 + O(t^5)", "O(t^3)", "0", "2*t^1 + 1*t^4"] {
            let x: LaurentQ = parse_literal(&lc, s).unwrap();
            assert_eq!(x.to_string(), s);
        }
        let pc = PAdicCtx::new(7);
        for s in ["25 + O(7^2)", "1/3", "O(7^4)", "-5"] {
            let x: PAdic = parse_literal(&pc, s).unwrap();
            assert_eq!(x.to_string(), s);
        }
        assert!(parse_literal::<LaurentQ>(&lc, "3*u^2").is_err());
    }
}

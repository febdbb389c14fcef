//! Univariate polynomials over a [`ValuedField`].

use std::fmt;

use crate::error::{Error, Result};
use crate::field::ValuedField;

/// A polynomial `Σ c_i x^i`, coefficients stored from degree 0 upwards.
///
/// Exact-zero top coefficients are stripped; the zero polynomial has no
/// coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<F: ValuedField> {
    ctx: F::Ctx,
    coeffs: Vec<F>,
}

impl<F: ValuedField> Poly<F> {
    pub fn new(ctx: &F::Ctx, mut coeffs: Vec<F>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_exact_zero()) {
            coeffs.pop();
        }
        Poly { ctx: ctx.clone(), coeffs }
    }

    pub fn from_i64s(ctx: &F::Ctx, cs: &[i64]) -> Self {
        Poly::new(ctx, cs.iter().map(|&c| F::from_i64(ctx, c)).collect())
    }

    pub fn zero(ctx: &F::Ctx) -> Self {
        Poly::new(ctx, Vec::new())
    }

    pub fn constant(c: F) -> Self {
        let ctx = c.ctx().clone();
        Poly::new(&ctx, vec![c])
    }

    /// The polynomial `x`.
    pub fn x(ctx: &F::Ctx) -> Self {
        Poly::new(ctx, vec![F::zero(ctx), F::one(ctx)])
    }

    pub fn ctx(&self) -> &F::Ctx {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    /// Coefficient of `x^i`, zero beyond the degree.
    pub fn coeff(&self, i: usize) -> F {
        self.coeffs.get(i).cloned().unwrap_or_else(|| F::zero(&self.ctx))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&F> {
        self.coeffs.last()
    }

    /// Drops top coefficients that vanish to their known precision.
    pub fn trim_approx(mut self) -> Self {
        while self.coeffs.last().is_some_and(|c| c.is_zero_to_precision()) {
            self.coeffs.pop();
        }
        self
    }

    pub fn eval(&self, x: &F) -> F {
        let mut acc = F::zero(&self.ctx);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new(&self.ctx, (0..n).map(|i| self.coeff(i).add(&other.coeff(i))).collect())
    }

    pub fn neg(&self) -> Self {
        Poly::new(&self.ctx, self.coeffs.iter().map(|c| c.neg()).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Poly::zero(&self.ctx);
        }
        let mut out = vec![F::zero(&self.ctx); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_exact_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Poly::new(&self.ctx, out)
    }

    pub fn scale(&self, c: &F) -> Self {
        Poly::new(&self.ctx, self.coeffs.iter().map(|a| a.mul(c)).collect())
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Poly::constant(F::one(&self.ctx));
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// `f^{(n)}`.
    pub fn derivative(&self, n: usize) -> Self {
        if n == 0 {
            return self.clone();
        }
        let out = self
            .coeffs
            .iter()
            .enumerate()
            .skip(n)
            .map(|(i, c)| {
                let falling: i64 = ((i - n + 1)..=i).map(|k| k as i64).product();
                c.scale_int(falling)
            })
            .collect();
        Poly::new(&self.ctx, out)
    }

    /// Coefficients `a_i` with `f(x) = Σ a_i (x-α)^i`, of length `deg+1`.
    pub fn taylor_shift(&self, alpha: &F) -> Vec<F> {
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                let t = c[j + 1].mul(alpha);
                c[j] = c[j].add(&t);
            }
        }
        c
    }

    /// `f(s·y + α)` as a polynomial in `y`.
    pub fn compose_linear(&self, s: &F, alpha: &F) -> Self {
        let shifted = self.taylor_shift(alpha);
        let mut sp = F::one(&self.ctx);
        let mut out = Vec::with_capacity(shifted.len());
        for a in shifted {
            out.push(a.mul(&sp));
            sp = sp.mul(s);
        }
        Poly::new(&self.ctx, out)
    }

    /// Rebuilds `Σ a_i (x-α)^i` as a polynomial in `x`.
    pub fn from_taylor(ctx: &F::Ctx, a: &[F], alpha: &F) -> Self {
        let lin = Poly::new(ctx, vec![alpha.neg(), F::one(ctx)]);
        let mut acc = Poly::zero(ctx);
        for c in a.iter().rev() {
            acc = acc.mul(&lin).add(&Poly::constant(c.clone()));
        }
        acc
    }

    /// Division with remainder, `self = q·f + r` with `deg r < deg f`.
    ///
    /// The top coefficient of each partial remainder is cancelled by
    /// construction; a divisor whose leading coefficient has no known value
    /// is rejected.
    pub fn divmod(&self, f: &Self) -> Result<(Self, Self)> {
        let df = f.degree().ok_or(Error::DivisionByZero)?;
        let lead_inv = f.coeffs[df].inv()?;
        let mut r = self.coeffs.clone();
        if r.len() <= df {
            return Ok((Poly::zero(&self.ctx), self.clone()));
        }
        let mut q = vec![F::zero(&self.ctx); r.len() - df];
        for k in (0..q.len()).rev() {
            let c = r[k + df].mul(&lead_inv);
            for (j, fj) in f.coeffs.iter().enumerate().take(df) {
                r[k + j] = r[k + j].sub(&c.mul(fj));
            }
            r[k + df] = F::zero(&self.ctx);
            q[k] = c;
        }
        r.truncate(df);
        Ok((Poly::new(&self.ctx, q), Poly::new(&self.ctx, r)))
    }

    pub fn rem(&self, f: &Self) -> Result<Self> {
        Ok(self.divmod(f)?.1)
    }

    pub fn monic(&self) -> Result<Self> {
        match self.leading() {
            None => Ok(self.clone()),
            Some(l) => {
                let inv = l.inv()?;
                let mut p = self.scale(&inv);
                if let Some(top) = p.coeffs.last_mut() {
                    *top = F::one(&self.ctx);
                }
                Ok(p)
            }
        }
    }

    /// Monic gcd. Remainders whose top coefficients vanish to precision
    /// are truncated, so for inexact inputs this is a gcd to precision.
    pub fn gcd(&self, other: &Self) -> Result<Self> {
        let mut a = self.clone().trim_approx();
        let mut b = other.clone().trim_approx();
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.rem(&b)?.trim_approx();
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `self / f`, which must divide exactly (to precision).
    pub fn div_exact(&self, f: &Self) -> Result<Self> {
        let (q, r) = self.divmod(f)?;
        if !r.trim_approx().is_zero() {
            return Err(Error::Invalid("polynomial division is not exact".into()));
        }
        Ok(q)
    }

    /// Formats with the given variable name.
    pub fn display_in(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_exact_zero() {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            if mono.is_empty() {
                parts.push(format!("({c})"));
            } else {
                parts.push(format!("({c})*{mono}"));
            }
        }
        parts.join(" + ")
    }
}

impl<F: ValuedField> fmt::Display for Poly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_in("x"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{LaurentCtx, LaurentQ, PAdic, PAdicCtx};
    use proptest::prelude::*;

    type P = Poly<LaurentQ>;

    fn ctx() -> LaurentCtx {
        LaurentCtx::default()
    }
    fn t(k: i64) -> LaurentQ {
        LaurentQ::uniformizer_pow(&ctx(), k)
    }
    fn c(n: i64) -> LaurentQ {
        LaurentQ::from_i64(&ctx(), n)
    }
    fn poly(cs: Vec<LaurentQ>) -> P {
        Poly::new(&ctx(), cs)
    }

    #[test]
    fn taylor_shift_recentres() {
        // x^2 - t at t: (t^2 - t) + 2t (x - t) + (x - t)^2
        let f = poly(vec![t(1).neg(), c(0), c(1)]);
        let a = f.taylor_shift(&t(1));
        assert_eq!(a, vec![t(2).sub(&t(1)), t(1).scale_int(2), c(1)]);
        assert_eq!(Poly::from_taylor(&ctx(), &a, &t(1)), f);
        let x = poly(vec![c(0), c(1)]);
        assert_eq!(x.taylor_shift(&c(1)), vec![c(1), c(1)]);
        assert_eq!(f.taylor_shift(&c(0)), f.coeffs().to_vec());
    }

    #[test]
    fn derivatives() {
        let f = poly(vec![t(1).neg(), c(0), c(1)]);
        assert_eq!(f.derivative(1), poly(vec![c(0), c(2)]));
        assert_eq!(f.derivative(0), f);
        assert!(f.derivative(3).is_zero());
        let x3 = poly(vec![c(0), c(0), c(0), c(1)]);
        assert_eq!(x3.derivative(2), poly(vec![c(0), c(6)]));
    }

    #[test]
    fn division_and_gcd() {
        let x3 = poly(vec![c(0), c(0), c(0), c(1)]);
        let f = poly(vec![t(1).neg(), c(0), c(1)]);
        let (q, r) = x3.divmod(&f).unwrap();
        assert_eq!(q, poly(vec![c(0), c(1)]));
        assert_eq!(r, poly(vec![c(0), t(1)]));
        let x2 = poly(vec![c(0), c(0), c(1)]);
        let x = poly(vec![c(0), c(1)]);
        assert_eq!(x2.gcd(&x).unwrap(), x);
        let g = poly(vec![c(-1), c(0), c(1)]);
        assert_eq!(g.gcd(&poly(vec![c(0), c(2)])).unwrap(), poly(vec![c(1)]));
    }

    #[test]
    fn gcd_of_products() {
        // (x - t)(x + 1) and (x - t)(x - 2)
        let a = poly(vec![t(1).neg(), c(1)]);
        let f = a.mul(&poly(vec![c(1), c(1)]));
        let g = a.mul(&poly(vec![c(-2), c(1)]));
        let h = f.gcd(&g).unwrap();
        assert_eq!(h.degree(), Some(1));
        assert!(h.eval(&t(1)).is_zero_to_precision());
    }

    #[test]
    fn padic_gcd() {
        let ctx = PAdicCtx::new(7);
        let f = Poly::<PAdic>::from_i64s(&ctx, &[-2, 0, 1]);
        let g = Poly::<PAdic>::from_i64s(&ctx, &[0, 2]);
        assert_eq!(f.gcd(&g).unwrap(), Poly::from_i64s(&ctx, &[1]));
    }

    fn small_poly() -> impl Strategy<Value = P> {
        prop::collection::vec((-5i64..=5, -3i64..=3), 1..5).prop_map(|cs| {
            poly(cs.into_iter().map(|(a, k)| t(k).scale_int(a)).collect())
        })
    }

    proptest! {
        #[test]
        fn shift_round_trip(f in small_poly(), a in -4i64..=4, k in -2i64..=3) {
            let alpha = t(k).scale_int(a).add(&c(1));
            let sh = f.taylor_shift(&alpha);
            prop_assert_eq!(Poly::from_taylor(&ctx(), &sh, &alpha), f);
        }

        #[test]
        fn divmod_identity(g in small_poly(), f in small_poly()) {
            prop_assume!(!f.is_zero());
            let (q, r) = g.divmod(&f).unwrap();
            prop_assert!(r.degree() < f.degree() || r.is_zero());
            let back = q.mul(&f).add(&r).sub(&g).trim_approx();
            prop_assert!(back.is_zero());
        }
    }
}

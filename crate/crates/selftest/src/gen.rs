//! Random field elements and polynomials from a seeded generator.

use hqe::logic::Expr;
use hqe::{LaurentCtx, PAdicCtx, Poly, ValuedField};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Prime used by the random `p`-adic suites.
pub const SUITE_PRIME: u64 = 3;

/// Generator for one suite and backend; `stream` separates them so that
/// suites do not share random draws.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn laurent() -> LaurentCtx {
    LaurentCtx::default()
}

pub fn padic() -> PAdicCtx {
    PAdicCtx::new(SUITE_PRIME)
}

pub fn int<F: ValuedField>(ctx: &F::Ctx, n: i64) -> F {
    F::from_i64(ctx, n)
}

/// `c·π^k`.
pub fn mono<F: ValuedField>(ctx: &F::Ctx, c: i64, k: i64) -> F {
    F::from_i64(ctx, c).mul(&F::uniformizer_pow(ctx, k))
}

/// A small integer that is a unit in the valuation ring.
pub fn unit_coeff<F: ValuedField>(ctx: &F::Ctx, rng: &mut ChaCha8Rng) -> i64 {
    const POOL: [i64; 10] = [1, -1, 2, -2, 3, -3, 4, 5, -5, 7];
    loop {
        let c = *POOL.choose(rng).unwrap();
        if F::from_i64(ctx, c).known_val() == Some(0) {
            return c;
        }
    }
}

/// A nonzero exact element of value exactly `v` with up to `extra`
/// further digits.
pub fn elem_of_value<F: ValuedField>(ctx: &F::Ctx, rng: &mut ChaCha8Rng, v: i64, extra: usize) -> F {
    let mut x = mono::<F>(ctx, unit_coeff::<F>(ctx, rng), v);
    for j in 1..=extra as i64 {
        if rng.gen_bool(0.6) {
            let c = rng.gen_range(-3..=3);
            x = x.add(&mono::<F>(ctx, c, v + j));
        }
    }
    x
}

/// A nonzero exact element with value in `lo..=hi`.
pub fn elem<F: ValuedField>(ctx: &F::Ctx, rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> F {
    let v = rng.gen_range(lo..=hi);
    elem_of_value(ctx, rng, v, 3)
}

/// An element that is zero with probability `p_zero`.
pub fn elem_or_zero<F: ValuedField>(ctx: &F::Ctx, rng: &mut ChaCha8Rng, lo: i64, hi: i64, p_zero: f64) -> F {
    if rng.gen_bool(p_zero) {
        F::zero(ctx)
    } else {
        elem(ctx, rng, lo, hi)
    }
}

/// `Π (x − r)` over `roots`, times `lead`.
pub fn from_roots<F: ValuedField>(ctx: &F::Ctx, lead: &F, roots: &[F]) -> Poly<F> {
    let mut p = Poly::constant(lead.clone());
    for r in roots {
        p = p.mul(&Poly::new(ctx, vec![r.neg(), F::one(ctx)]));
    }
    p
}

/// A polynomial of degree exactly `deg` with random integral-ish
/// coefficients; some coefficients vanish.
pub fn random_poly<F: ValuedField>(ctx: &F::Ctx, rng: &mut ChaCha8Rng, deg: usize) -> Poly<F> {
    let mut cs: Vec<F> = (0..deg).map(|_| elem_or_zero(ctx, rng, -1, 3, 0.25)).collect();
    cs.push(elem(ctx, rng, 0, 1));
    Poly::new(ctx, cs)
}

/// A polynomial of degree `1..=max_deg` whose roots cluster, so that
/// collisions and nested pieces occur.
pub fn clustered_poly<F: ValuedField>(ctx: &F::Ctx, rng: &mut ChaCha8Rng, max_deg: usize) -> Poly<F> {
    let deg = rng.gen_range(1..=max_deg);
    let mut roots: Vec<F> = Vec::new();
    while roots.len() < deg {
        let r = match (roots.choose(rng), rng.gen_range(0..3)) {
            (Some(base), 0) => base.add(&elem(ctx, rng, 1, 4)),
            _ => elem_or_zero(ctx, rng, -1, 2, 0.1),
        };
        roots.push(r);
    }
    let mut p = from_roots(ctx, &F::from_i64(ctx, unit_coeff::<F>(ctx, rng)), &roots);
    if rng.gen_bool(0.4) {
        // Move the constant term so that some roots leave K.
        let c = p.coeff(0).add(&elem(ctx, rng, 0, 4));
        let mut cs = p.coeffs().to_vec();
        cs[0] = c;
        p = Poly::new(ctx, cs);
    }
    p
}

/// Sample points: each base plus each offset.
pub fn grid<F: ValuedField>(bases: &[F], offsets: &[F]) -> Vec<F> {
    let mut out = Vec::with_capacity(bases.len() * offsets.len());
    for b in bases {
        for o in offsets {
            out.push(b.add(o));
        }
    }
    out
}

/// The 13 offsets `0, ±π^k` for `k ∈ {−2, 0, 1, 2, 4, 7}`.
pub fn standard_offsets<F: ValuedField>(ctx: &F::Ctx) -> Vec<F> {
    let mut out = vec![F::zero(ctx)];
    for k in [-2, 0, 1, 2, 4, 7] {
        out.push(mono(ctx, 1, k));
        out.push(mono(ctx, -1, k));
    }
    out
}

/// `p` as a formula term in `var`.
pub fn poly_expr<F: ValuedField>(p: &Poly<F>, var: &str) -> Expr {
    let mut terms = Vec::new();
    for (i, c) in p.coeffs().iter().enumerate() {
        if c.is_exact_zero() {
            continue;
        }
        let mono = match i {
            0 => Expr::literal(c),
            _ => {
                let x = if i == 1 { Expr::var(var) } else { Expr::Pow(Box::new(Expr::var(var)), i as i64) };
                if c.sub(&F::one(c.ctx())).is_exact_zero() {
                    x
                } else {
                    Expr::Mul(Box::new(Expr::literal(c)), Box::new(x))
                }
            }
        };
        terms.push(mono);
    }
    terms.into_iter().reduce(|a, b| Expr::Add(Box::new(a), Box::new(b))).unwrap_or(Expr::int(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use hqe::{LaurentQ, ValQ};

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = |stream| {
            let mut r = rng(7, stream);
            (0..4).map(|_| r.gen::<u64>()).collect::<Vec<_>>()
        };
        assert_eq!(draw(1), draw(1));
        assert_ne!(draw(1), draw(2));
    }

    #[test]
    fn elements_have_the_requested_value() {
        let ctx = laurent();
        let mut r = rng(1, 0);
        for v in -3..4 {
            let x = elem_of_value::<LaurentQ>(&ctx, &mut r, v, 2);
            assert_eq!(x.val().unwrap(), ValQ::int(v));
        }
    }
}

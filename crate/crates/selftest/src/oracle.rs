//! Oracles that recompute answers by direct means: digit expansions,
//! brute-force searches and plain ball geometry. None of them calls the
//! routine it checks.

use hqe::logic::LinearConstraint;
use hqe::{LaurentQ, PAdic, Poly, ValQ, ValuedField};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};

/// Digit expansions used to compare leading terms directly.
pub trait Digits: ValuedField {
    /// The `n` digits of `self` starting at `π^from`, as exact rationals
    /// (Laurent coefficients, or base-`p` digits).
    fn digits(&self, from: i64, n: usize) -> Vec<BigRational>;
}

impl Digits for LaurentQ {
    fn digits(&self, from: i64, n: usize) -> Vec<BigRational> {
        (0..n as i64).map(|j| self.coeff(from + j).unwrap_or_else(BigRational::zero)).collect()
    }
}

impl Digits for PAdic {
    fn digits(&self, from: i64, n: usize) -> Vec<BigRational> {
        let p = BigInt::from(self.p());
        let r = self.rational().clone();
        // r = p^from · u with u a p-adic integer; digits of u mod p^n.
        let shift = if from >= 0 {
            BigRational::from_integer(Pow::pow(&p, from as u64))
        } else {
            BigRational::new(BigInt::one(), Pow::pow(&p, (-from) as u64))
        };
        let u = r / shift;
        let modulus = Pow::pow(&p, n as u64);
        let den_inv = mod_inverse(u.denom(), &modulus).expect("p-integral element");
        let mut x = (u.numer() * den_inv).mod_floor(&modulus);
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let (q, d) = x.div_rem(&p);
            out.push(BigRational::from_integer(d));
            x = q;
        }
        out
    }
}


fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    e.gcd.is_one().then(|| e.x.mod_floor(m))
}

/// `rv_δ(x) = rv_δ(y)` by comparing the digits `π^v, …, π^{v+δ}` after
/// dividing out the same leading unit: for `x = y(1+m)` with `v(m) > δ`
/// these digits of `x/y` read `1, 0, …, 0`.
pub fn same_leading_digits<F: Digits>(x: &F, y: &F, delta: u32) -> bool {
    match (x.is_exact_zero(), y.is_exact_zero()) {
        (true, true) => return true,
        (true, false) | (false, true) => return false,
        _ => {}
    }
    let q = x.div(y).expect("nonzero");
    let mut expect = vec![BigRational::zero(); delta as usize + 1];
    expect[0] = BigRational::one();
    q.known_val() == Some(0) && q.digits(0, delta as usize + 1) == expect
}

/// Whether `⊕_δ(rv x, rv y, rv z)` holds, found by exhibiting a witness.
///
/// If `v(x) ≤ v(y)`, any witness triple can be moved to one with `y` itself
/// as second summand without leaving the classes; so it suffices to test
/// whether `z' − y` lies in the class of `x` for `z'` in the class of `z`,
/// and symmetrically. The perturbations `z(1+m)` are tried as well.
pub fn oplus_by_witness<F: ValuedField>(x: &F, y: &F, z: &F, delta: u32, perturb: &[F]) -> hqe::Result<bool> {
    let cls = |a: &F| hqe::rv::rv(a, delta);
    let (rx, ry) = (cls(x)?, cls(y)?);
    for m in std::iter::once(None).chain(perturb.iter().map(Some)) {
        let zp = match m {
            None => z.clone(),
            Some(m) => z.add(&z.mul(m)),
        };
        if cls(&zp.sub(y))? == rx || cls(&zp.sub(x))? == ry {
            return Ok(true);
        }
    }
    Ok(false)
}

/// `v(f(β))` minus the least value of a monomial of `f` recentred at `α`,
/// with the recentred coefficients computed by binomial expansion.
pub fn severity<F: ValuedField>(f: &Poly<F>, alpha: &F, beta: &F) -> (usize, ValQ) {
    let ctx = f.ctx();
    let d = f.coeffs().len();
    let mut a = vec![F::zero(ctx); d];
    // f(x) = Σ c_j ((x−α) + α)^j = Σ_i (Σ_j C(j,i) c_j α^{j−i}) (x−α)^i.
    for (j, c) in f.coeffs().iter().enumerate() {
        let mut binom = BigInt::one();
        for i in 0..=j {
            if i > 0 {
                binom = binom * BigInt::from(j - i + 1) / BigInt::from(i);
            }
            let term = c
                .mul(&F::from_rational(ctx, &BigRational::from_integer(binom.clone())))
                .mul(&alpha.pow((j - i) as i64).expect("nonnegative power"));
            a[i] = a[i].add(&term);
        }
    }
    let s = beta.sub(alpha).val_or_inf();
    let vals: Vec<ValQ> = a
        .iter()
        .enumerate()
        .map(|(i, c)| if c.is_zero_to_precision() { ValQ::PosInf } else { c.val_or_inf() + s.scale(i as i64) })
        .collect();
    let mu = vals.iter().min().cloned().unwrap_or(ValQ::PosInf);
    let m = vals.iter().rposition(|v| *v == mu).unwrap_or(0);
    let fb = horner(f, beta);
    let vf = if fb.is_zero_to_precision() { ValQ::PosInf } else { fb.val_or_inf() };
    let sev = if vf == ValQ::PosInf { ValQ::PosInf } else { vf - mu };
    (m, sev)
}

/// `f(x)` by Horner's rule.
pub fn horner<F: ValuedField>(f: &Poly<F>, x: &F) -> F {
    let ctx = f.ctx();
    f.coeffs().iter().rev().fold(F::zero(ctx), |acc, c| acc.mul(x).add(c))
}

/// `f'` by the power rule.
pub fn derivative<F: ValuedField>(f: &Poly<F>) -> Poly<F> {
    let ctx = f.ctx();
    let cs: Vec<F> = f.coeffs().iter().enumerate().skip(1).map(|(i, c)| c.scale_int(i as i64)).collect();
    Poly::new(ctx, cs)
}

/// Roots of `f` found by Newton iteration from every start point, kept when
/// `f` vanishes to working precision there. Exact roots are recognised
/// through the backend's closed forms.
pub fn newton_roots<F: ValuedField>(f: &Poly<F>, starts: &[F]) -> Vec<F> {
    let df = derivative(f);
    let mut found: Vec<F> = Vec::new();
    for s in starts {
        let mut x = s.clone();
        let mut ok = false;
        let (mut best, mut stalled) = (ValQ::NegInf, 0);
        for _ in 0..80 {
            let fx = horner(f, &x);
            if fx.is_zero_to_precision() {
                ok = true;
                break;
            }
            let dfx = horner(&df, &x);
            let Ok(step) = fx.div(&dfx) else { break };
            let sv = step.val_or_inf();
            if sv < ValQ::int(-12) {
                break;
            }
            // Without growth in the step's value the iteration only
            // converges archimedeanly in the leading coefficient.
            if sv > best {
                (best, stalled) = (sv, 0);
            } else {
                stalled += 1;
                if stalled >= 4 {
                    break;
                }
            }
            x = x.sub(&step);
            // Digits past twice the step size are not yet right; dropping
            // them keeps exact coefficients from growing.
            if let (Some(s), Some(e)) = (step.known_val(), dfx.known_val()) {
                x = x.truncate((2 * s - e).max(s + 1) + 2);
            }
        }
        if let Some(c) = x.exact_candidates().into_iter().find(|c| horner(f, c).is_exact_zero()) {
            x = c;
        }
        if ok && !found.iter().any(|r| same_point(r, &x)) {
            found.push(x);
        }
    }
    found
}

/// Equal to well beyond the digits any suite inspects.
pub fn same_point<F: ValuedField>(a: &F, b: &F) -> bool {
    let d = a.sub(b);
    d.is_zero_to_precision() || d.val_or_inf() >= ValQ::int(30)
}

/// `√n` in `ℤ_p` congruent to `start` mod `p` (mod 4 for `p = 2`), found
/// digit by digit: at each step exactly one choice of the next digit keeps
/// `x² ≡ n` modulo a high enough power. Returns `x mod p^digits`.
pub fn padic_sqrt_digits(p: u64, n: i64, start: u64, digits: u32) -> BigInt {
    let pb = BigInt::from(p);
    let extra = if p == 2 { 1 } else { 0 };
    let (mut x, mut k) = (BigInt::from(start), if p == 2 { 2 } else { 1 });
    let target = BigInt::from(n);
    while k < digits {
        let step = Pow::pow(&pb, k);
        let modulus = Pow::pow(&pb, k + 1 + extra);
        let next = (0..p)
            .map(|d| &x + &step * BigInt::from(d))
            .find(|c| (c * c - &target).mod_floor(&modulus).is_zero())
            .expect("a lift exists");
        x = next;
        k += 1;
    }
    x.mod_floor(&Pow::pow(&pb, digits))
}

/// Coefficients `C(1/2, k)` of `√(1+t)`.
pub fn sqrt_one_plus_t(n: usize) -> Vec<BigRational> {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut c = BigRational::one();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        out.push(c.clone());
        c = c * (&half - BigRational::from_integer(BigInt::from(k))) / BigRational::from_integer(BigInt::from(k + 1));
    }
    out
}

/// The constraint `rv_δ(a x − b) = rv_δ(z)` as a set of `x`: the open ball
/// of radius `v(z/a) + δ` around `(z + b)/a`, or the point `b/a` when
/// `z = 0`. Radius `+∞` marks a point.
pub fn constraint_ball<F: ValuedField>(c: &LinearConstraint<F>) -> (F, ValQ) {
    let center = c.z.add(&c.b).div(&c.a).expect("nonzero a");
    if c.z.is_exact_zero() {
        return (center, ValQ::PosInf);
    }
    let r = c.z.div(&c.a).expect("nonzero a").val_or_inf() + ValQ::int(c.delta as i64);
    (center, r)
}

fn in_ball<F: ValuedField>(x: &F, ball: &(F, ValQ)) -> bool {
    let d = x.sub(&ball.0);
    if d.is_zero_to_precision() {
        return true;
    }
    ball.1 != ValQ::PosInf && d.val_or_inf() > ball.1
}

/// Solvability of a linear system by containment: the balls have a common
/// point iff the smallest one has a point in all the others, and in an
/// ultrametric space the center of the smallest ball is such a point if
/// any is.
pub fn linear_system_solvable<F: ValuedField>(cs: &[LinearConstraint<F>]) -> bool {
    let balls: Vec<(F, ValQ)> = cs.iter().map(constraint_ball).collect();
    let Some(smallest) = balls.iter().max_by(|a, b| a.1.cmp(&b.1)) else { return true };
    balls.iter().all(|b| in_ball(&smallest.0, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use hqe::LaurentCtx;

    #[test]
    fn seven_adic_root_of_two() {
        let x = padic_sqrt_digits(7, 2, 3, 2);
        assert_eq!(x, BigInt::from(10));
        let r = padic_sqrt_digits(7, 2, 3, 8);
        let m = Pow::pow(&BigInt::from(7), 8u32);
        assert!((&r * &r - BigInt::from(2)).mod_floor(&m).is_zero());
    }

    #[test]
    fn binomial_series_squares_to_one_plus_t() {
        let c = sqrt_one_plus_t(12);
        for k in 0..12 {
            let sq: BigRational = (0..=k).map(|i| &c[i] * &c[k - i]).sum();
            let want = if k <= 1 { BigRational::one() } else { BigRational::zero() };
            assert_eq!(sq, want, "t^{k}");
        }
    }

    #[test]
    fn newton_finds_both_square_roots() {
        let ctx = LaurentCtx::default();
        let t = LaurentQ::uniformizer_pow(&ctx, 1);
        let f = Poly::new(&ctx, vec![t.mul(&t).neg(), LaurentQ::zero(&ctx), LaurentQ::one(&ctx)]);
        let starts: Vec<LaurentQ> = [1, -1, 3].iter().map(|&c| t.scale_int(c)).collect();
        let roots = newton_roots(&f, &starts);
        assert_eq!(roots.len(), 2);
        assert!(roots.iter().any(|r| same_point(r, &t)) && roots.iter().any(|r| same_point(r, &t.neg())));
    }

    #[test]
    fn newton_gives_up_without_a_root() {
        let ctx = LaurentCtx::default();
        let t2 = LaurentQ::uniformizer_pow(&ctx, 2);
        let f = Poly::new(&ctx, vec![t2.scale_int(-2), LaurentQ::zero(&ctx), LaurentQ::one(&ctx)]);
        let starts = [LaurentQ::uniformizer_pow(&ctx, 1), LaurentQ::one(&ctx)];
        assert!(newton_roots(&f, &starts).is_empty());
    }
}

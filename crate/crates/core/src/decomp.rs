//! Partitions of `K` on which `v(f(x))` and `rv_δ(f(x))` are governed by a
//! single monomial of `f` expanded around a root of a derivative.
//!
//! Around a center `α` with `f = Σ a_i (x−α)^i`, the monomial values are the
//! lines `L_i(r) = v(a_i) + i·r` in `r = v(x−α)`. Scanning radii upwards from
//! the bottom of a ball, the dominant index only changes where two lines
//! cross. Open radii between crossings give pieces with a single dominant
//! monomial; an integer crossing radius gives an annulus on which minimal
//! monomials may cancel, and the cancelling residue classes are split off
//! and re-centered at derivative roots found inside them.

use num_bigint::BigInt;
use num_traits::{One, Pow};
use serde::{Deserialize, Serialize};

use crate::ball::{cheese_intersect, Ball, CheeseJson, SwissCheese};
use crate::error::{Error, Result};
use crate::field::{parse_literal, ValuedField};
use crate::hensel::{collision_classes, severity_threshold};
use crate::poly::Poly;
use crate::rv::{rv, RVElem};
use crate::valq::ValQ;

const MAX_DEPTH: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct Piece<F: ValuedField> {
    pub cheese: SwissCheese<F>,
    pub center: F,
    /// `f` recentred at `center`.
    pub coeffs: Vec<F>,
    pub m: usize,
    /// `2^m v(m!)`: how far `v(f)` may exceed `v(a_m (x−α)^m)` on the piece.
    pub severity_bound: ValQ,
    /// The leading-term offset `q = (m!)^{2^m}`, or `1` in residue
    /// characteristic 0.
    pub q: BigInt,
    /// `center` is a root of `f^{(n)}`.
    pub root_of_derivative: Option<usize>,
}

impl<F: ValuedField> Piece<F> {
    pub fn q_val(&self) -> i64 {
        F::int_val(self.center.ctx(), &self.q)
    }

    pub fn to_json(&self) -> PieceJson {
        PieceJson {
            cheese: self.cheese.to_json(),
            center: self.center.to_string(),
            m: self.m,
            q: self.q.to_string(),
            severity_bound: self.severity_bound,
            coeffs: self.coeffs.iter().map(|c| c.to_string()).collect(),
            coeff_values: self.coeffs.iter().map(|c| c.val_or_inf()).collect(),
            root_of_derivative: self.root_of_derivative,
        }
    }

    pub fn from_json(ctx: &F::Ctx, j: &PieceJson) -> Result<Self> {
        let coeffs = j.coeffs.iter().map(|c| parse_literal(ctx, c)).collect::<Result<Vec<F>>>()?;
        Ok(Piece {
            cheese: SwissCheese::from_json(ctx, &j.cheese)?,
            center: parse_literal(ctx, &j.center)?,
            coeffs,
            m: j.m,
            severity_bound: j.severity_bound,
            q: j.q.parse().map_err(|_| Error::Invalid(format!("bad q '{}'", j.q)))?,
            root_of_derivative: j.root_of_derivative,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceJson {
    pub cheese: CheeseJson,
    pub center: String,
    pub m: usize,
    pub q: String,
    pub severity_bound: ValQ,
    pub coeffs: Vec<String>,
    pub coeff_values: Vec<ValQ>,
    pub root_of_derivative: Option<usize>,
}

/// `(m!)^{2^m}` in residue characteristic `p > 0`, else `1`.
fn offset_q<F: ValuedField>(ctx: &F::Ctx, m: usize) -> BigInt {
    if F::residue_char(ctx) == 0 {
        return BigInt::one();
    }
    let fact: BigInt = (1..=m as u64).map(BigInt::from).product();
    Pow::pow(&fact, 1u64 << m)
}

fn line_values<F: ValuedField>(a: &[F]) -> Vec<ValQ> {
    a.iter().map(|c| c.val_or_inf()).collect()
}

/// Largest index minimising `w_i + i·r`; for `r = −∞` the top finite index.
fn dominant_index(w: &[ValQ], r: &ValQ) -> usize {
    if *r == ValQ::NegInf {
        return w.iter().rposition(|x| x.is_finite()).unwrap_or(0);
    }
    if *r == ValQ::PosInf {
        return w.iter().position(|x| x.is_finite()).unwrap_or(0);
    }
    let vals: Vec<ValQ> = w.iter().enumerate().map(|(i, x)| *x + (*r).scale(i as i64)).collect();
    let mu = vals.iter().min().cloned().unwrap_or(ValQ::PosInf);
    vals.iter().rposition(|v| *v == mu).unwrap_or(0)
}

/// First radius above which a lower monomial overtakes index `m`.
fn crossing_radius(w: &[ValQ], m: usize) -> Option<ValQ> {
    (0..m)
        .filter(|&i| w[i].is_finite())
        .map(|i| (w[i] - w[m]).div_int((m - i) as i64))
        .min()
}

/// `m(f, α, S)`: the largest index whose monomial is minimal somewhere on
/// `S`. The dominant index only decreases as `v(x−α)` grows, so it is read
/// off at the least radius `S` attains.
pub fn m_bound<F: ValuedField>(f: &Poly<F>, alpha: &F, s: &SwissCheese<F>) -> Result<usize> {
    if s.is_empty() {
        return Err(Error::Invalid("m_bound of an empty set".into()));
    }
    let w = line_values(&f.taylor_shift(alpha));
    if w.is_empty() {
        return Ok(0);
    }
    let outer = s.outer();
    let lo = if outer.contains(alpha)? {
        outer.min_val()
    } else {
        let c = outer.center().expect("a ball missing α has a center");
        c.sub(alpha).val()?
    };
    Ok(dominant_index(&w, &lo))
}

struct Decomposer<'a, F: ValuedField> {
    f: &'a Poly<F>,
    pieces: Vec<Piece<F>>,
}

impl<'a, F: ValuedField> Decomposer<'a, F> {
    fn piece(&mut self, cheese: SwissCheese<F>, center: &F, a: &[F], m: usize, prov: Option<usize>) {
        if cheese.is_empty() {
            return;
        }
        let ctx = self.f.ctx();
        self.pieces.push(Piece {
            cheese,
            center: center.clone(),
            coeffs: a.to_vec(),
            m,
            severity_bound: severity_threshold::<F>(ctx, m, 0),
            q: offset_q::<F>(ctx, m),
            root_of_derivative: prov,
        });
    }

    /// Partitions `ball`, a ball containing `alpha`.
    fn run(&mut self, ball: Ball<F>, alpha: &F, prov: Option<usize>, depth: usize) -> Result<()> {
        if depth > MAX_DEPTH {
            return Err(Error::RecursionBound);
        }
        let mut a = self.f.taylor_shift(alpha);
        if let Some(n) = prov {
            if n < a.len() {
                a[n] = F::zero(self.f.ctx());
            }
        }
        let w = line_values(&a);
        let r0 = ball.min_val();
        let m = dominant_index(&w, &r0);
        let Some(rho) = crossing_radius(&w, m) else {
            self.piece(SwissCheese::ball(ball), alpha, &a, m, prov);
            return Ok(());
        };

        let inner_closed = Ball::closed(alpha.clone(), &rho);
        self.piece(SwissCheese::new(ball.clone(), vec![inner_closed.clone()])?, alpha, &a, m, prov);

        let inner_open = Ball::open(alpha.clone(), &rho);
        if let Some(r) = rho.as_int() {
            let thr = severity_threshold::<F>(self.f.ctx(), m, 0);
            let classes = collision_classes(self.f, alpha, r, &thr)?;
            let class_balls: Vec<Ball<F>> = classes
                .iter()
                .map(|c| Ball::open(c.lambda.clone(), &rho))
                .collect();
            let mut holes = vec![inner_open.clone()];
            holes.extend(class_balls.iter().cloned());
            self.piece(SwissCheese::new(inner_closed, holes)?, alpha, &a, m, prov);
            for (c, b) in classes.iter().zip(class_balls) {
                self.run(b, &c.lambda, Some(c.n), depth + 1)?;
            }
        }
        self.run(inner_open, alpha, prov, depth + 1)
    }
}

/// Root of the linear polynomial `f^{(d−1)}`.
fn initial_center<F: ValuedField>(f: &Poly<F>) -> Result<F> {
    let d = f.degree().ok_or_else(|| Error::Invalid("decompose of the zero polynomial".into()))?;
    if d == 0 {
        return Ok(F::zero(f.ctx()));
    }
    let lin = f.derivative(d - 1);
    lin.coeff(0).neg().div(&lin.coeff(1))
}

/// Pieces of `K` for `f`.
pub fn decompose_whole<F: ValuedField>(f: &Poly<F>) -> Result<Vec<Piece<F>>> {
    let d = f.degree().ok_or_else(|| Error::Invalid("decompose of the zero polynomial".into()))?;
    let alpha = initial_center(f)?;
    let prov = if d == 0 { None } else { Some(d - 1) };
    let mut dec = Decomposer { f, pieces: Vec::new() };
    dec.run(Ball::Whole, &alpha, prov, 0)?;
    Ok(dec.pieces)
}

/// Pieces of `S` for `f`.
pub fn decompose<F: ValuedField>(f: &Poly<F>, s: &SwissCheese<F>) -> Result<Vec<Piece<F>>> {
    let mut out = Vec::new();
    for mut p in decompose_whole(f)? {
        p.cheese = cheese_intersect(&p.cheese, s)?;
        if !p.cheese.is_empty() {
            out.push(p);
        }
    }
    Ok(out)
}

/// The roots of `f` in `K`.
///
/// A root `λ` lies in some piece; there `v(f(λ)) = ∞` forces `λ` to be the
/// piece's center with `m ≥ 1`. So the roots are the centers of such pieces
/// at which the squarefree part of `f` vanishes.
pub fn roots<F: ValuedField>(f: &Poly<F>) -> Result<Vec<F>> {
    let d = f.degree().ok_or_else(|| Error::Invalid("every element is a root of 0".into()))?;
    if d == 0 {
        return Ok(Vec::new());
    }
    let g = if d > 1 {
        let c = f.gcd(&f.derivative(1))?;
        if c.degree().unwrap_or(0) > 0 {
            f.div_exact(&c)?
        } else {
            f.clone()
        }
    } else {
        f.clone()
    };
    let mut out: Vec<F> = Vec::new();
    for p in decompose_whole(&g)? {
        if p.m == 0 || !p.cheese.contains(&p.center)? {
            continue;
        }
        let root = p.root_of_derivative == Some(0) || g.eval(&p.center).is_zero_to_precision();
        if root && !out.iter().any(|r| r.sub(&p.center).is_zero_to_precision()) {
            let exact = p.center.exact_candidates().into_iter().find(|c| f.eval(c).is_exact_zero());
            out.push(exact.unwrap_or(p.center));
        }
    }
    Ok(out)
}

/// One cell of a common refinement for several polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct RvCell<F: ValuedField> {
    pub cheese: SwissCheese<F>,
    /// The piece of each polynomial containing the cell, in input order.
    pub pieces: Vec<Piece<F>>,
    /// Order at which each polynomial's leading term is read on this cell.
    pub orders: Vec<u32>,
}

impl<F: ValuedField> RvCell<F> {
    /// `δ + v(q)` for polynomial `j`.
    pub fn working_order(&self, j: usize) -> u32 {
        self.orders[j] + self.pieces[j].q_val() as u32
    }
}

/// Common partition of `K` on which every `rv_{δ_j}(f_j(x))` is a sum of
/// monomial leading terms.
pub fn rv_decompose<F: ValuedField>(fs: &[Poly<F>], deltas: &[u32]) -> Result<Vec<RvCell<F>>> {
    if fs.len() != deltas.len() {
        return Err(Error::Invalid("one order per polynomial is required".into()));
    }
    let mut cells: Vec<(SwissCheese<F>, Vec<Piece<F>>)> = vec![(SwissCheese::whole(), Vec::new())];
    for f in fs {
        let pieces = decompose_whole(f)?;
        let mut next = Vec::new();
        for (cheese, chosen) in &cells {
            for p in &pieces {
                let c = cheese_intersect(cheese, &p.cheese)?;
                if c.is_empty() {
                    continue;
                }
                let mut ch = chosen.clone();
                ch.push(p.clone());
                next.push((c, ch));
            }
        }
        cells = next;
    }
    Ok(cells
        .into_iter()
        .map(|(cheese, pieces)| RvCell { cheese, pieces, orders: deltas.to_vec() })
        .collect())
}

/// `v(a_m (x−α)^m)`.
pub fn piece_eval_v<F: ValuedField>(p: &Piece<F>, x: &F) -> Result<ValQ> {
    if !p.cheese.contains(x)? {
        return Err(Error::NotInPiece);
    }
    let am = p.coeffs.get(p.m).map(|c| c.val_or_inf()).unwrap_or(ValQ::PosInf);
    if p.m == 0 {
        return Ok(am);
    }
    let d = x.sub(&p.center);
    if d.is_zero_to_precision() {
        return Ok(ValQ::PosInf);
    }
    Ok(am + d.val()?.scale(p.m as i64))
}

/// `rv_δ` of `Σ_j rv_γ(a_j)·rv_γ(x−α)^j` with `γ = δ + v(q)`, computed on
/// canonical representatives.
pub fn piece_eval_rv<F: ValuedField>(p: &Piece<F>, x: &F, delta: u32) -> Result<RVElem<F>> {
    if !p.cheese.contains(x)? {
        return Err(Error::NotInPiece);
    }
    let ctx = p.center.ctx();
    let gamma = delta + p.q_val() as u32;
    let mut d = x.sub(&p.center);
    if d.is_zero_to_precision() {
        d = F::zero(ctx);
    }
    let dr = rv(&d, gamma)?.lift(ctx);
    let mut sum = F::zero(ctx);
    let mut pw = F::one(ctx);
    for a in &p.coeffs {
        if !a.is_zero_to_precision() {
            sum = sum.add(&rv(a, gamma)?.lift(ctx).mul(&pw));
        }
        pw = pw.mul(&dr);
    }
    Ok(rv(&sum, delta)?.forget_source())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{LaurentCtx, LaurentQ, PAdic, PAdicCtx};
    use num_rational::BigRational;

    fn ctx() -> LaurentCtx {
        LaurentCtx::default()
    }
    fn t(k: i64) -> LaurentQ {
        LaurentQ::uniformizer_pow(&ctx(), k)
    }
    fn c(n: i64) -> LaurentQ {
        LaurentQ::from_i64(&ctx(), n)
    }
    fn poly(cs: Vec<LaurentQ>) -> Poly<LaurentQ> {
        Poly::new(&ctx(), cs)
    }

    fn samples() -> Vec<LaurentQ> {
        let mut out = Vec::new();
        for k in -4..5 {
            for u in [1, -1, 2, 3] {
                out.push(t(k).scale_int(u));
                out.push(t(k).scale_int(u).add(&t(k + 2)));
            }
        }
        out.push(t(1).add(&t(3)));
        out.push(t(1).neg().add(&t(4).scale_int(5)));
        out
    }

    fn check_partition(f: &Poly<LaurentQ>, pieces: &[Piece<LaurentQ>]) {
        for x in samples() {
            let owners: Vec<&Piece<LaurentQ>> =
                pieces.iter().filter(|p| p.cheese.contains(&x).unwrap()).collect();
            assert_eq!(owners.len(), 1, "x = {x}");
            let p = owners[0];
            let fx = f.eval(&x);
            assert_eq!(piece_eval_v(p, &x).unwrap(), fx.val().unwrap(), "x = {x}");
            for d in 0..3 {
                assert_eq!(piece_eval_rv(p, &x, d).unwrap(), rv(&fx, d).unwrap(), "x = {x}");
            }
        }
    }

    #[test]
    fn x_squared_minus_t() {
        let f = poly(vec![t(1).neg(), c(0), c(1)]);
        let pieces = decompose_whole(&f).unwrap();
        assert_eq!(pieces.len(), 2);
        assert_eq!(pieces[0].m, 2);
        assert_eq!(pieces[1].m, 0);
        assert_eq!(pieces[1].cheese.outer(), &Ball::Disc { center: c(0), min_val: 1 });
        check_partition(&f, &pieces);
        let x = t(-1).scale_int(2);
        assert_eq!(piece_eval_v(&pieces[0], &x).unwrap(), ValQ::int(-2));
    }

    #[test]
    fn x_squared_minus_t_squared() {
        let f = poly(vec![t(2).neg(), c(0), c(1)]);
        let pieces = decompose_whole(&f).unwrap();
        let ms: Vec<usize> = pieces.iter().map(|p| p.m).collect();
        assert_eq!(ms, vec![2, 2, 1, 1, 0]);
        for p in &pieces[2..4] {
            assert_eq!(p.root_of_derivative, Some(0));
            assert!(f.eval(&p.center).is_exact_zero());
        }
        check_partition(&f, &pieces);
        let x = t(1).add(&t(3));
        let owner = pieces.iter().find(|p| p.cheese.contains(&x).unwrap()).unwrap();
        assert_eq!(owner.center, t(1));
        assert_eq!(piece_eval_rv(owner, &x, 0).unwrap(), rv(&t(4).scale_int(2), 0).unwrap());
    }

    #[test]
    fn constants_and_centers() {
        let f = poly(vec![t(3)]);
        let pieces = decompose_whole(&f).unwrap();
        assert_eq!(pieces.len(), 1);
        assert_eq!(pieces[0].m, 0);
        assert_eq!(piece_eval_v(&pieces[0], &c(7)).unwrap(), ValQ::int(3));
        let g = poly(vec![c(1), c(-2), c(1)]);
        let pieces = decompose_whole(&g).unwrap();
        let at = pieces.iter().find(|p| p.cheese.contains(&c(1)).unwrap()).unwrap();
        assert_eq!(piece_eval_v(at, &c(1)).unwrap(), ValQ::PosInf);
    }

    #[test]
    fn m_bound_examples() {
        let f = poly(vec![t(1).neg(), c(0), c(1)]);
        assert_eq!(m_bound(&f, &c(0), &SwissCheese::whole()).unwrap(), 2);
        let b = SwissCheese::ball(Ball::closed(c(0), &ValQ::int(1)));
        assert_eq!(m_bound(&f, &c(0), &b).unwrap(), 0);
        assert_eq!(m_bound(&poly(vec![c(5)]), &c(0), &SwissCheese::whole()).unwrap(), 0);
    }

    #[test]
    fn restriction_to_a_cheese() {
        let f = poly(vec![t(2).neg(), c(0), c(1)]);
        let s = SwissCheese::ball(Ball::closed(c(0), &ValQ::int(1)));
        let pieces = decompose(&f, &s).unwrap();
        assert_eq!(pieces.len(), 4);
    }

    #[test]
    fn rational_centers() {
        let half = LaurentQ::from_rational(&ctx(), &BigRational::new(1.into(), 2.into()));
        // (x - 1/2)^2 (x - t)
        let f = poly(vec![half.neg(), c(1)]).pow(2).mul(&poly(vec![t(1).neg(), c(1)]));
        check_partition(&f, &decompose_whole(&f).unwrap());
    }

    #[test]
    fn padic_pieces_bound_values() {
        let pc = PAdicCtx::new(2);
        let f = Poly::<PAdic>::from_i64s(&pc, &[-17, 0, 1]);
        let pieces = decompose_whole(&f).unwrap();
        for k in -3..6i64 {
            for u in [1i64, 3, 5, 7, 9, 11] {
                let x = PAdic::from_i64(&pc, u).mul(&PAdic::uniformizer_pow(&pc, k));
                let owners: Vec<_> = pieces.iter().filter(|p| p.cheese.contains(&x).unwrap()).collect();
                assert_eq!(owners.len(), 1);
                let p = owners[0];
                let lo = piece_eval_v(p, &x).unwrap();
                let v = f.eval(&x).val().unwrap();
                assert!(lo <= v && v <= lo + p.severity_bound);
                assert_eq!(piece_eval_rv(p, &x, 0).unwrap(), rv(&f.eval(&x), 0).unwrap());
            }
        }
        assert!(pieces.iter().any(|p| p.q_val() > 0));
    }

    #[test]
    fn pieces_round_trip_through_json() {
        let f = poly(vec![t(2).neg(), c(0), c(1)]);
        for p in decompose_whole(&f).unwrap() {
            let s = serde_json::to_string(&p.to_json()).unwrap();
            let back: PieceJson = serde_json::from_str(&s).unwrap();
            assert_eq!(Piece::from_json(&ctx(), &back).unwrap(), p);
        }
    }

    #[test]
    fn roots_of_small_polynomials() {
        let r = roots(&poly(vec![t(2).neg(), c(0), c(1)])).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.contains(&t(1)) && r.contains(&t(1).neg()));
        assert!(roots(&poly(vec![t(2).scale_int(-2), c(0), c(1)])).unwrap().is_empty());
        // (x - t)^2 (x + 1): repeated roots are reported once.
        let f = poly(vec![t(1).neg(), c(1)]).pow(2).mul(&poly(vec![c(1), c(1)]));
        let r = roots(&f).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.contains(&t(1)) && r.contains(&c(-1)), "{:?}", r.iter().map(|x| x.to_string()).collect::<Vec<_>>());
        // x^3 - x has the root 0 at the center of the symmetric expansion.
        assert_eq!(roots(&poly(vec![c(0), c(-1), c(0), c(1)])).unwrap().len(), 3);
        let r = roots(&poly(vec![c(1).add(&t(1)).neg(), c(0), c(1)])).unwrap();
        assert_eq!(r.len(), 2);
        for x in r {
            assert!(x.mul(&x).sub(&c(1).add(&t(1))).is_zero_to_precision());
        }
    }

    #[test]
    fn two_adic_square_roots() {
        let pc = PAdicCtx::new(2);
        assert_eq!(roots(&Poly::<PAdic>::from_i64s(&pc, &[-17, 0, 1])).unwrap().len(), 2);
        assert!(roots(&Poly::<PAdic>::from_i64s(&pc, &[-3, 0, 1])).unwrap().is_empty());
        assert!(roots(&Poly::<PAdic>::from_i64s(&pc, &[-2, 0, 1])).unwrap().is_empty());
        assert_eq!(roots(&Poly::<PAdic>::from_i64s(&pc, &[-4, 0, 1])).unwrap().len(), 2);
    }
}

//! Pieces of random polynomials checked pointwise on a 13 × 13 grid.

use hqe::ball::{cheese_intersect, Ball, SwissCheese};
use hqe::decomp::{decompose_whole, m_bound, piece_eval_rv, piece_eval_v, Piece};
use hqe::rv::rv;
use hqe::{Poly, ValQ, ValuedField};
use rand_chacha::ChaCha8Rng;

use crate::gen::{self, clustered_poly, elem, grid, standard_offsets};
use crate::oracle::{horner, same_point};
use crate::SuiteReport;

const POLYS: usize = 100;
const BASES: usize = 13;

pub(super) fn run(seed: u64, report: &mut SuiteReport) {
    backend::<hqe::LaurentQ>(&gen::laurent(), &mut gen::rng(seed, 50), report);
    backend::<hqe::PAdic>(&gen::padic(), &mut gen::rng(seed, 51), report);
}

fn backend<F: ValuedField>(ctx: &F::Ctx, rng: &mut ChaCha8Rng, report: &mut SuiteReport) {
    let name = F::backend_name(ctx);
    let exact_bounds = F::residue_char(ctx) == 0;
    let offsets = standard_offsets::<F>(ctx);
    for _ in 0..POLYS {
        let f = clustered_poly::<F>(ctx, rng, 5);
        let pieces = match decompose_whole(&f) {
            Ok(p) => p,
            Err(e) => {
                report.check(false, || format!("{name}: decompose {f}: {e}"));
                continue;
            }
        };
        let mut bases: Vec<F> = vec![F::zero(ctx)];
        for p in &pieces {
            if bases.len() < BASES && !bases.iter().any(|b| same_point(b, &p.center)) {
                bases.push(p.center.clone());
            }
        }
        while bases.len() < BASES {
            bases.push(elem(ctx, rng, -2, 3));
        }
        let outer = match pieces.iter().map(|p| m_bound(&f, &p.center, &p.cheese)).collect::<hqe::Result<Vec<_>>>() {
            Ok(o) => o,
            Err(e) => {
                report.check(false, || format!("{name}: m_bound on the pieces of {f}: {e}"));
                continue;
            }
        };
        for x in grid(&bases, &offsets) {
            let r = check_point(&f, &pieces, &outer, &x, exact_bounds);
            report.check_result(r.clone().map(|m| m.is_none()), || match r {
                Ok(Some(msg)) => format!("{name}: f = {f}, x = {x}: {msg}"),
                _ => format!("{name}: f = {f}, x = {x}"),
            });
        }
    }
}

/// `None` when every property holds at `x`, else what failed.
fn check_point<F: ValuedField>(
    f: &Poly<F>,
    pieces: &[Piece<F>],
    outer: &[usize],
    x: &F,
    exact_bounds: bool,
) -> hqe::Result<Option<String>> {
    let mut owners = Vec::new();
    for (i, p) in pieces.iter().enumerate() {
        if p.cheese.contains(x)? {
            owners.push(i);
        }
    }
    if owners.len() != 1 {
        return Ok(Some(format!("lies in {} pieces", owners.len())));
    }
    let (p, outer) = (&pieces[owners[0]], outer[owners[0]]);
    let fx = horner(f, x);
    let vf = if fx.is_zero_to_precision() { ValQ::PosInf } else { fx.val()? };

    let lo = piece_eval_v(p, x)?;
    let hi = lo + p.severity_bound;
    let bounds_ok = if exact_bounds { vf == lo } else { lo <= vf && vf <= hi };
    if !bounds_ok {
        return Ok(Some(format!("v(f(x)) = {vf} outside [{lo}, {hi}] on the piece centered at {}", p.center)));
    }

    // Monotonicity: re-centering at x inside the closed ball through x.
    let d = x.sub(&p.center);
    if !d.is_zero_to_precision() {
        let t = cheese_intersect(&p.cheese, &SwissCheese::ball(Ball::closed(x.clone(), &d.val()?)))?;
        if !t.is_empty() {
            let inner = m_bound(f, x, &t)?;
            if inner > outer {
                return Ok(Some(format!("m_bound grows from {outer} to {inner} when re-centered at x")));
            }
        }
    }

    for delta in 0..=1 {
        let lin = piece_eval_rv(p, x, delta)?;
        let direct = if vf == ValQ::PosInf { hqe::RVElem::infinity(delta) } else { rv(&fx, delta)?.forget_source() };
        if lin != direct {
            return Ok(Some(format!("rv_{delta}: piece gives {lin}, direct {direct}")));
        }
    }
    Ok(None)
}

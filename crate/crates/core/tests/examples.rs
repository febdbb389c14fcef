//! Worked examples across the public API, each checked against a value
//! computed by hand.

use hqe::ball::{Ball, SwissCheese};
use hqe::decomp::{decompose_whole, m_bound, piece_eval_rv, piece_eval_v, rv_decompose};
use hqe::field::{rational_roots, ResidueClass};
use hqe::hensel::{collision_classes, collision_root, newton_lift};
use hqe::logic::{
    decide, eliminate_linear_exists, evaluate, normal_form, parse_formula, qe, Env, LinearConstraint,
};
use hqe::rv::{oplus_holds, rv, rv_project, rv_sum_analyze, value_of};
use hqe::{Error, LaurentCtx, LaurentQ, PAdic, PAdicCtx, Poly, SumAnalysis, ValQ, ValuedField};
use num_bigint::BigInt;
use num_rational::BigRational;

fn lc() -> LaurentCtx {
    LaurentCtx::default()
}

fn t(k: i64) -> LaurentQ {
    LaurentQ::uniformizer_pow(&lc(), k)
}

fn n(k: i64) -> LaurentQ {
    LaurentQ::from_i64(&lc(), k)
}

fn poly(cs: Vec<LaurentQ>) -> Poly<LaurentQ> {
    Poly::new(&lc(), cs)
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[test]
fn arithmetic_and_values() {
    assert_eq!(t(2).add(&t(3)).val_or_inf(), ValQ::int(2));
    assert_eq!(LaurentQ::zero(&lc()).val_or_inf(), ValQ::PosInf);
    let one_plus = n(1).add(&t(1));
    let one_minus = n(1).sub(&t(1));
    assert_eq!(one_plus.mul(&one_minus).sub(&n(1)).val_or_inf(), ValQ::int(2));
    assert_eq!(t(1).mul(&t(-1).clone()), n(1));
    // 1/(1+t) against the geometric series
    let inv = one_plus.inv().unwrap();
    let series = (0..64).fold(LaurentQ::zero(&lc()), |acc, k| acc.add(&t(k).scale_int(if k % 2 == 0 { 1 } else { -1 })));
    assert!(inv.sub(&series).is_zero_to_precision());
}

#[test]
fn residues() {
    let r = n(2).add(&t(1)).res_delta(0).unwrap();
    assert_eq!(r, ResidueClass::Coeffs(vec![rat(2, 1)]));
    let pc = PAdicCtx::new(7);
    let x = PAdic::from_i64(&pc, 3 + 49 * 5);
    assert_eq!(x.res_delta(1).unwrap(), ResidueClass::ModPk { value: BigInt::from(3), p: 7, k: 2 });
    assert_eq!(rational_roots(&[rat(-1, 1), rat(0, 1), rat(1, 1)]), vec![rat(-1, 1), rat(1, 1)]);
    assert!(rational_roots(&[rat(-2, 1), rat(0, 1), rat(1, 1)]).is_empty());
}

#[test]
fn polynomial_algebra() {
    let f = poly(vec![t(1).neg(), n(0), n(1)]);
    assert_eq!(f.taylor_shift(&t(1)), vec![t(2).sub(&t(1)), t(1).scale_int(2), n(1)]);
    assert_eq!(f.derivative(1), poly(vec![n(0), n(2)]));
    let x3 = poly(vec![n(0), n(0), n(0), n(1)]);
    let (q, r) = x3.divmod(&f).unwrap();
    assert_eq!(q, poly(vec![n(0), n(1)]));
    assert_eq!(r, poly(vec![n(0), t(1)]));
    let g = poly(vec![n(-1), n(0), n(1)]).gcd(&poly(vec![n(0), n(2)])).unwrap();
    assert_eq!(g.degree(), Some(0));
}

#[test]
fn leading_terms() {
    // two series agreeing through t^3 but not t^4, relative to value 0
    let x = n(1).add(&t(4));
    let y = n(1).add(&t(4).scale_int(2));
    assert_ne!(rv(&x, 4).unwrap(), rv(&y, 4).unwrap());
    assert_eq!(rv_project(&rv(&x, 4).unwrap(), 3).unwrap(), rv(&y, 3).unwrap());
    assert_eq!(value_of(&rv(&t(2).scale_int(3), 0).unwrap()), ValQ::int(2));

    let one = rv(&n(1), 3).unwrap();
    let other = rv(&n(-1).add(&t(5)), 3).unwrap();
    match rv_sum_analyze(&[one, other]).unwrap() {
        SumAnalysis::Ambiguous { severity, .. } => assert_eq!(severity, ValQ::int(5)),
        s => panic!("expected a cancelling sum, got {s:?}"),
    }
    let r = |x: &LaurentQ| rv(x, 0).unwrap();
    let m1t3 = n(-1).add(&t(3));
    assert!(oplus_holds(&r(&n(1)), &r(&m1t3), &r(&t(3))).unwrap());
    assert!(oplus_holds(&r(&n(1)), &r(&m1t3), &r(&t(5))).unwrap());
    assert!(!oplus_holds(&r(&n(1)), &r(&t(1)), &r(&t(1))).unwrap());
}

#[test]
fn hensel_lifting() {
    let p = poly(vec![n(-1).sub(&t(1)), n(0), n(1)]);
    let c = newton_lift(&p, &n(1), 0).unwrap();
    assert!(p.eval(&c.root).is_zero_to_precision());
    assert_eq!(c.root.sub(&n(1)).val_or_inf(), ValQ::int(1));
    assert_eq!(newton_lift(&poly(vec![n(-1), n(0), n(1)]), &n(1), 0).unwrap().iterations, 0);

    let pc = PAdicCtx::new(7);
    let q = Poly::new(&pc, vec![PAdic::from_i64(&pc, -2), PAdic::zero(&pc), PAdic::one(&pc)]);
    let b = newton_lift(&q, &PAdic::from_i64(&pc, 3), 0).unwrap().root;
    assert_eq!(b.res_delta(1).unwrap(), ResidueClass::ModPk { value: BigInt::from(10), p: 7, k: 2 });
}

#[test]
fn collisions() {
    let f = poly(vec![t(2).scale_int(-2), n(0), n(1)]);
    assert!(matches!(collision_root(&f, &n(0), &t(1), 0), Err(Error::PreconditionViolated(_))));

    let g = poly(vec![t(2).neg(), n(0), n(1)]);
    let mut lambdas: Vec<LaurentQ> = collision_classes(&g, &n(0), 1, &ValQ::int(0)).unwrap().into_iter().map(|c| c.lambda).collect();
    lambdas.sort_by_key(|l| l.to_string());
    assert_eq!(lambdas, vec![t(1).neg(), t(1)]);
    assert!(collision_classes(&f, &n(0), 1, &ValQ::int(0)).unwrap().is_empty());
}

#[test]
fn decomposition() {
    let f = poly(vec![t(1).neg(), n(0), n(1)]);
    assert_eq!(m_bound(&f, &n(0), &SwissCheese::whole()).unwrap(), 2);
    assert_eq!(m_bound(&f, &n(0), &SwissCheese::ball(Ball::closed(n(0), &ValQ::int(1)))).unwrap(), 0);
    let pieces = decompose_whole(&f).unwrap();
    assert_eq!(pieces.len(), 2);
    let x = t(-1).scale_int(2);
    let owner = pieces.iter().find(|p| p.cheese.contains(&x).unwrap()).unwrap();
    assert_eq!(piece_eval_v(owner, &x).unwrap(), ValQ::int(-2));
    assert_eq!(rv_decompose(&[f], &[0]).unwrap().len(), 2);

    // (t + t³)² − t² = 2t⁴ + t⁶, read off the piece around t
    let g = poly(vec![t(2).neg(), n(0), n(1)]);
    let x = t(1).add(&t(3));
    for p in decompose_whole(&g).unwrap() {
        if p.cheese.contains(&x).unwrap() {
            assert_eq!(piece_eval_rv(&p, &x, 0).unwrap(), rv(&t(4).scale_int(2), 0).unwrap());
        }
    }
}

#[test]
fn linear_elimination() {
    let c = |z: LaurentQ, b: LaurentQ| LinearConstraint { z, a: n(1), b, delta: 0 };
    assert!(eliminate_linear_exists(&[c(t(1), n(0)), c(t(1), t(3).neg())]).unwrap());
    assert!(!eliminate_linear_exists(&[c(t(1), n(0)), c(t(1).scale_int(2), n(0))]).unwrap());
    assert!(eliminate_linear_exists(&[c(t(2), n(5))]).unwrap());
}

#[test]
fn elimination_and_decisions() {
    let yes = parse_formula("EX y:K. y^2 = t^2").unwrap();
    let out = qe::<LaurentQ>(&lc(), &yes).unwrap();
    assert!(!out.has_field_quantifier());
    assert!(evaluate::<LaurentQ>(&lc(), &out, &Env::new()).unwrap());
    let no = parse_formula("EX y:K. y^2 = 2*t^2").unwrap();
    assert!(!decide::<LaurentQ>(&lc(), &no).unwrap());
    assert!(decide::<LaurentQ>(&lc(), &parse_formula("EX y:K. y^2 = 1 + t").unwrap()).unwrap());
    assert!(decide::<LaurentQ>(&lc(), &parse_formula("EX y:K. y = 0").unwrap()).unwrap());
    assert!(!evaluate::<LaurentQ>(&lc(), &parse_formula("rv[0](t^2) = rv[0](2*t^2)").unwrap(), &Env::new()).unwrap());

    let pc = PAdicCtx::new(2);
    assert!(decide::<PAdic>(&pc, &parse_formula("EX y:K. y^2 = 17").unwrap()).unwrap());
    assert!(!decide::<PAdic>(&pc, &parse_formula("EX y:K. y^2 = 3").unwrap()).unwrap());
}

#[test]
fn normal_forms() {
    let nf = normal_form::<LaurentQ>(&lc(), &parse_formula("x^2 = t^2").unwrap(), "x").unwrap();
    assert_eq!(nf.orders, vec![0, 0]);
    assert_eq!(nf.formula.to_string(), "w1 = inf | w2 = inf");
    let nf = normal_form::<LaurentQ>(&lc(), &parse_formula("rv[2](x - 1) = rv[2](t^3 + t^4)").unwrap(), "x").unwrap();
    assert!(nf.orders.iter().all(|&g| g == 0));
    let base = n(1).add(&t(3)).add(&t(4));
    for (x, inside) in [(base.clone(), true), (base.add(&t(6)), true), (base.add(&t(5)), false), (n(1).add(&t(3)), false)] {
        assert_eq!(nf.member(&lc(), &x).unwrap(), inside, "{x}");
    }
}

use hqe::decomp::{decompose_whole, piece_eval_v};
use hqe::hensel::newton_lift;
use hqe::logic::{evaluate, normal_form, parse_formula, Env};
use hqe::rv::{rv, rv_mul};
use hqe::{LaurentCtx, LaurentQ, PAdic, PAdicCtx, Poly, ValQ, ValuedField};
use proptest::prelude::*;

fn lc() -> LaurentCtx {
    LaurentCtx::default()
}

fn build(val: i64, cs: &[i64]) -> LaurentQ {
    let ctx = lc();
    cs.iter().enumerate().fold(LaurentQ::zero(&ctx), |acc, (i, &c)| {
        acc.add(&LaurentQ::uniformizer_pow(&ctx, val + i as i64).scale_int(c))
    })
}

/// Nonzero exact Laurent polynomials with small coefficients.
fn elem() -> impl Strategy<Value = LaurentQ> {
    (-3i64..4, prop::collection::vec(-5i64..6, 0..4), prop::sample::select(vec![-3i64, -2, -1, 1, 2, 3]))
        .prop_map(|(v, tail, lead)| {
            let mut cs = vec![lead];
            cs.extend(tail);
            build(v, &cs)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn values_add_under_multiplication(a in elem(), b in elem()) {
        let va = a.val().unwrap().as_int().unwrap();
        let vb = b.val().unwrap().as_int().unwrap();
        prop_assert_eq!(a.mul(&b).val().unwrap(), ValQ::int(va + vb));
    }

    #[test]
    fn distributive(a in elem(), b in elem(), c in elem()) {
        prop_assert_eq!(a.add(&b).mul(&c), a.mul(&c).add(&b.mul(&c)));
    }

    #[test]
    fn inverse_to_working_precision(a in elem()) {
        let one = a.mul(&a.inv().unwrap());
        prop_assert!(one.sub(&LaurentQ::one(&lc())).is_zero_to_precision());
    }

    #[test]
    fn ultrametric(a in elem(), b in elem()) {
        let s = a.add(&b);
        prop_assert!(s.val_or_inf() >= a.val_or_inf().min(b.val_or_inf()));
    }

    #[test]
    fn leading_terms_multiply(a in elem(), b in elem(), d in 0u32..4) {
        let lhs = rv(&a.mul(&b), d).unwrap();
        let rhs = rv_mul(&rv(&a, d).unwrap(), &rv(&b, d).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn equal_classes_mean_close_values(a in elem(), b in elem(), d in 0u32..4) {
        let same = rv(&a, d).unwrap() == rv(&b, d).unwrap();
        let close = a.sub(&b).val_or_inf() > b.val().unwrap().checked_add(ValQ::int(d as i64)).unwrap();
        prop_assert_eq!(same, close);
    }

    /// A simple root `r` of `(x − r)(x − s)` is recovered from any start
    /// closer to `r` than twice the separation.
    #[test]
    fn lift_recovers_planted_root(r in elem(), s in elem(), k in 1i64..6) {
        let ctx = lc();
        let sep = r.sub(&s).val_or_inf();
        prop_assume!(sep.is_finite());
        let sep = sep.as_int().unwrap();
        let f = Poly::new(&ctx, vec![r.neg(), LaurentQ::one(&ctx)]).mul(&Poly::new(&ctx, vec![s.neg(), LaurentQ::one(&ctx)]));
        let start = r.add(&LaurentQ::uniformizer_pow(&ctx, 2 * sep - r.val().unwrap().as_int().unwrap().min(sep) + k));
        match newton_lift(&f, &start, 0) {
            Ok(c) => prop_assert!(c.root.sub(&r).is_zero_to_precision(), "{} vs {}", c.root, r),
            Err(hqe::Error::PreconditionViolated(_)) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn pieces_predict_values(cs in prop::collection::vec(elem(), 1..4), x in elem()) {
        let f = Poly::new(&lc(), cs);
        let direct = f.eval(&x);
        prop_assume!(!direct.is_zero_to_precision());
        let pieces = decompose_whole(&f).unwrap();
        let owners: Vec<_> = pieces.iter().filter(|p| p.cheese.contains(&x).unwrap()).collect();
        prop_assert_eq!(owners.len(), 1);
        prop_assert_eq!(piece_eval_v(owners[0], &x).unwrap(), direct.val_or_inf());
    }

    #[test]
    fn pullback_matches_evaluation(c in elem(), k in -2i64..4, x in elem()) {
        let src = format!("v(x^2 - ({c})) > {k}");
        let phi = parse_formula(&src).unwrap();
        let nf = normal_form::<LaurentQ>(&lc(), &phi, "x").unwrap();
        prop_assert!(nf.orders.iter().all(|&g| g == 0));
        let direct = evaluate(&lc(), &phi, &Env::new().with_field("x", x.clone())).unwrap();
        prop_assert_eq!(nf.member(&lc(), &x).unwrap(), direct);
    }

    #[test]
    fn padic_value_counts_prime_factors(m in 1i64..10_000, e in 0u32..5) {
        let ctx = PAdicCtx::new(3);
        let x = PAdic::from_i64(&ctx, m * 3i64.pow(e));
        let mut w = m;
        let mut v = e as i64;
        while w % 3 == 0 {
            w /= 3;
            v += 1;
        }
        prop_assert_eq!(x.val().unwrap(), ValQ::int(v));
    }
}

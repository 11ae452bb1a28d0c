mod common;

use common::*;
use jetsigma::equivalence::transform_fields;
use jetsigma::expr::Tree;
use jetsigma::linalg::rank;
use jetsigma::prolong::sigma_prolong;
use jetsigma::reduction::{verify_sigma_symmetry, OdeSystem};
use jetsigma::{lie_bracket, Expr, JetContext, Matrix, VectorField, ZeroTest};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn check<T>(r: Result<T, String>) -> Result<(), TestCaseError> {
    r.map(drop).map_err(TestCaseError::fail)
}

fn fields(c: &JetContext, rng: &mut ChaCha8Rng, n: usize) -> Vec<VectorField> {
    let base: Vec<Expr> = ["x", "u", "v"].iter().map(|s| c.parse(s).unwrap()).collect();
    (0..n).map(|_| VectorField::vertical(c, vec![poly(rng, &base, 2), poly(rng, &base, 2)]).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn normal_form_is_fixed((t, e) in expr(), seed in any::<u64>()) {
        check(normal_form_case(&t, &e, seed))?;
    }

    #[test]
    fn derivation_laws((_, a) in expr(), (_, b) in expr()) {
        check(derivation_case(&a, &b))?;
    }

    #[test]
    fn diff_matches_finite_differences((t, e) in expr(), seed in any::<u64>()) {
        check(finite_difference_case(&t, &e, seed))?;
    }

    #[test]
    fn zero_test_is_sound((t, e) in expr(), seed in any::<u64>()) {
        check(zero_test_case(&t, &e, seed))?;
    }

    #[test]
    fn recognized_identities_vanish(a in tree(), b in tree(), c in tree()) {
        if let Some(e) = vanishing(&a, &b, &c).normalize() {
            prop_assert!(e.is_zero(), "{}", e);
        }
    }

    #[test]
    fn substitution_is_simultaneous((t, e) in expr()) {
        let c = ctx();
        let (u, v) = (c.coord(0, 0), c.coord(1, 0));
        let swap = [(u.clone(), Expr::sym(&v)), (v.clone(), Expr::sym(&u))].into_iter().collect();
        let twice = e.subs(&swap).subs(&swap);
        prop_assert_eq!(&twice, &e, "{:?}", t);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lemma1_on_fuzzed_sets(seed in any::<u64>()) {
        check(lemma1_case(seed))?;
    }

    #[test]
    fn ibdp_on_fuzzed_sets(seed in any::<u64>()) {
        check(ibdp_case(seed))?;
    }

    #[test]
    fn jacobi_identity(seed in any::<u64>()) {
        let c = JetContext::new("x", &["u", "v"], 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = fields(&c, &mut rng, 3);
        let br = |a: &VectorField, b: &VectorField| lie_bracket(a, b).unwrap();
        let total = br(&f[0], &br(&f[1], &f[2])).add(&br(&f[1], &br(&f[2], &f[0]))).add(&br(&f[2], &br(&f[0], &f[1])));
        prop_assert!(total.is_zero());
        prop_assert_eq!(br(&f[0], &f[1]), br(&f[1], &f[0]).scale(&Expr::int(-1)));
    }

    #[test]
    fn prolongation_is_linear_in_phi(seed in any::<u64>()) {
        let s = generic_sample(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(3));
        let other = fields(&s.ctx, &mut rng, 2);
        let sum: Vec<VectorField> = s.xs.iter().zip(&other).map(|(a, b)| a.add(b)).collect();
        let lhs = sigma_prolong(&sum, &s.sigma, ORDER).unwrap();
        let rhs = sigma_prolong(&other, &s.sigma, ORDER).unwrap();
        for i in 0..2 {
            prop_assert_eq!(&lhs[i], &s.ys[i].add(&rhs[i]));
        }
    }

    #[test]
    fn determining_residuals_are_linear_in_phi(seed in any::<u64>()) {
        let c = JetContext::new("x", &["u", "v"], 2);
        let zt = ZeroTest::default();
        let sys = OdeSystem::solved(&c, vec![
            (c.coord(0, 2), c.parse("u_x*v_x*(1 + exp(-u))").unwrap()),
            (c.coord(1, 2), c.parse("u_x*v_x*(1 + exp(-v))").unwrap()),
        ], &zt).unwrap();
        let sigma = Matrix::parse(&c, &[&["0", "v_x"], &["u_x", "0"]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (fields(&c, &mut rng, 2), fields(&c, &mut rng, 2));
        let sum: Vec<VectorField> = a.iter().zip(&b).map(|(p, q)| p.add(q)).collect();
        let res = |xs: &[VectorField]| verify_sigma_symmetry(xs, &sigma, &sys, &zt).unwrap().residuals;
        let (ra, rb, rs) = (res(&a), res(&b), res(&sum));
        for k in 0..rs.len() {
            prop_assert_eq!(&rs[k].residual, &ra[k].residual.add(&rb[k].residual));
        }
    }

    #[test]
    fn invertible_transform_keeps_span_rank(seed in any::<u64>()) {
        let s = generic_sample(seed);
        let zt = ZeroTest::new(20, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(11));
        let base: Vec<Expr> = ["x", "u", "v"].iter().map(|n| s.ctx.parse(n).unwrap()).collect();
        // Unipotent, so invertible for every entry choice.
        let a = Matrix::from_rows(vec![vec![Expr::one(), poly(&mut rng, &base, 1)], vec![Expr::zero(), Expr::one()]]).unwrap();
        let rows = |vs: &[VectorField]| -> Vec<Vec<Expr>> {
            vs.iter().map(|v| v.coefficients().into_iter().map(|(_, e)| e).collect()).collect()
        };
        let moved = transform_fields(&a, &s.ys).unwrap();
        prop_assert_eq!(rank(&rows(&moved), &zt).unwrap(), rank(&rows(&s.ys), &zt).unwrap());
    }
}

#[test]
fn tree_oracle_self_check() {
    let t = Tree::Add(vec![Tree::Sym("u".into()), Tree::Call("exp".into(), vec![Tree::Sym("v".into())])]);
    let p = [("u".to_string(), 2.0), ("v".to_string(), 0.0)].into_iter().collect();
    assert_eq!(eval_tree(&t, &p), Some(3.0));
}

use jetsigma::involution::{
    check_theorem2, close_under_bracket, structure_functions, Involution, SpanMode, DEFAULT_MAX_NEW,
};
use jetsigma::prolong::sigma_prolong;
use jetsigma::{Expr, JetContext, Matrix, Verdict, VectorField, ZeroTest};

fn ctx() -> JetContext {
    JetContext::new("x", &["u", "v"], 1)
}

fn field(c: &JetContext, coeffs: &[&str]) -> VectorField {
    // x, u, v, u_x, v_x
    let e: Vec<Expr> = coeffs.iter().map(|s| c.parse(s).unwrap()).collect();
    VectorField::from_coefficients(c, 1, &e)
}

fn setup(phi: [[&str; 2]; 2], sigma: [[&str; 2]; 2]) -> (Vec<VectorField>, Matrix) {
    let c = ctx();
    let xs = phi.iter().map(|p| VectorField::parse(&c, "0", p).unwrap()).collect();
    let s = Matrix::parse(&c, &[&sigma[0], &sigma[1]]).unwrap();
    (xs, s)
}

fn assert_row(closure: &jetsigma::involution::Closure, i: usize, j: usize, expect: &[i64]) {
    let row = closure.structure.row(i - 1, j - 1);
    let want: Vec<Expr> = expect.iter().map(|&k| Expr::int(k)).collect();
    assert_eq!(row, want, "[Y{},Y{}]", i, j);
}

#[test]
fn case1_algebraic_closure() {
    let c = ctx();
    let zt = ZeroTest::default();
    let (xs, s) = setup([["1", "0"], ["0", "1"]], [["0", "u_x"], ["v_x", "0"]]);
    let ys = sigma_prolong(&xs, &s, 1).unwrap();
    assert_eq!(ys[0], field(&c, &["0", "1", "0", "0", "u_x"]));
    assert_eq!(ys[1], field(&c, &["0", "0", "1", "v_x", "0"]));
    match structure_functions(&ys, &zt).unwrap() {
        Involution::NotInvolutive(w) => assert_eq!(w.bracket, field(&c, &["0", "0", "0", "u_x", "-v_x"])),
        other => panic!("{:?}", other),
    }
    let cl = close_under_bracket(&ys, DEFAULT_MAX_NEW, SpanMode::Constants, &zt).unwrap();
    assert_eq!(cl.fields.len(), 5);
    assert_eq!(cl.fields[2], field(&c, &["0", "0", "0", "u_x", "-v_x"]));
    assert_eq!(cl.fields[3], field(&c, &["0", "0", "0", "0", "u_x"]));
    assert_eq!(cl.fields[4], field(&c, &["0", "0", "0", "v_x", "0"]));
    assert_row(&cl, 1, 2, &[0, 0, 1, 0, 0]);
    assert_row(&cl, 1, 3, &[0, 0, 0, -2, 0]);
    assert_row(&cl, 1, 4, &[0, 0, 0, 0, 0]);
    assert_row(&cl, 1, 5, &[0, 0, 1, 0, 0]);
    assert_row(&cl, 2, 3, &[0, 0, 0, 0, 2]);
    assert_row(&cl, 2, 4, &[0, 0, -1, 0, 0]);
    assert_row(&cl, 2, 5, &[0, 0, 0, 0, 0]);
    assert_row(&cl, 3, 4, &[0, 0, 0, 2, 0]);
    assert_row(&cl, 3, 5, &[0, 0, 0, 0, -2]);
    assert_row(&cl, 4, 5, &[0, 0, 1, 0, 0]);
    let t2 = check_theorem2(&xs, &s, &zt).unwrap();
    assert_eq!(t2.q.row(0, 1), vec![c.parse("u_x").unwrap(), c.parse("-v_x").unwrap()]);
    assert_eq!(t2.q_phi[0].1, vec![c.parse("u_x").unwrap(), c.parse("-v_x").unwrap()]);
    assert_eq!(t2.holds_la(), Verdict::Fail);
    assert_eq!(t2.holds_lagen(), Verdict::Fail);
}

#[test]
fn case2_closure() {
    let c = ctx();
    let zt = ZeroTest::default();
    let (xs, s) = setup([["u", "0"], ["0", "-u"]], [["0", "u_x"], ["u", "0"]]);
    let ys = sigma_prolong(&xs, &s, 1).unwrap();
    assert_eq!(ys[0], field(&c, &["0", "u", "0", "u_x", "-u*u_x"]));
    assert_eq!(ys[1], field(&c, &["0", "0", "-u", "u^2", "-u_x"]));
    let cl = close_under_bracket(&ys, DEFAULT_MAX_NEW, SpanMode::Functions, &zt).unwrap();
    assert_eq!(cl.fields.len(), 3);
    assert_eq!(cl.fields[2], field(&c, &["0", "0", "0", "0", "u^3"]));
    assert_row(&cl, 1, 2, &[0, 1, 1]);
    assert_row(&cl, 1, 3, &[0, 0, 3]);
    assert_row(&cl, 2, 3, &[0, 0, 0]);
    let t2 = check_theorem2(&xs, &s, &zt).unwrap();
    assert_eq!(t2.q.row(0, 1), vec![c.parse("u").unwrap(), c.parse("-u^2").unwrap()]);
    assert_eq!(t2.q_phi[0].1, vec![c.parse("u^2").unwrap(), c.parse("u^3").unwrap()]);
    assert_eq!(t2.holds_la(), Verdict::Fail);
    assert_eq!(t2.holds_lagen(), Verdict::Fail);
}

#[test]
fn case3_closure() {
    let c = ctx();
    let zt = ZeroTest::default();
    let (xs, s) = setup([["1", "0"], ["0", "1"]], [["0", "u_x"], ["u", "0"]]);
    let ys = sigma_prolong(&xs, &s, 1).unwrap();
    assert_eq!(ys[0], field(&c, &["0", "1", "0", "0", "u_x"]));
    assert_eq!(ys[1], field(&c, &["0", "0", "1", "u", "0"]));
    for mode in [SpanMode::Functions, SpanMode::Constants] {
        let cl = close_under_bracket(&ys, DEFAULT_MAX_NEW, mode, &zt).unwrap();
        assert_eq!(cl.fields.len(), 4);
        assert_eq!(cl.fields[2], field(&c, &["0", "0", "0", "1", "-u"]));
        assert_eq!(cl.fields[3], field(&c, &["0", "0", "0", "0", "1"]));
        assert_row(&cl, 1, 2, &[0, 0, 1, 0]);
        assert_row(&cl, 1, 3, &[0, 0, 0, -2]);
        assert_row(&cl, 1, 4, &[0, 0, 0, 0]);
        assert_row(&cl, 2, 3, &[0, 0, 0, 0]);
        assert_row(&cl, 2, 4, &[0, 0, 0, 0]);
        assert_row(&cl, 3, 4, &[0, 0, 0, 0]);
    }
    let t2 = check_theorem2(&xs, &s, &zt).unwrap();
    assert_eq!(t2.q.row(0, 1), vec![Expr::one(), c.parse("-u").unwrap()]);
    assert_eq!(t2.q_phi[0].1, vec![Expr::one(), c.parse("-u").unwrap()]);
    assert_eq!(t2.holds_la(), Verdict::Fail);
}

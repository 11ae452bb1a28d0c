mod common;

use std::fmt::Display;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;

use jetsigma::check::overall;
use jetsigma::determining::{generate_determining, unit_factor, verify_candidate, Ansatz};
use jetsigma::equivalence::{sigma_from_a, theorem5_roundtrip, transform_fields, verify_a_sigma, Convention};
use jetsigma::expr::OpaqueDefs;
use jetsigma::invariants::{generate_invariants, independence_check, verify_invariant};
use jetsigma::involution::{check_theorem2, close_under_bracket, structure_functions, Involution, SpanMode};
use jetsigma::numeric::{convergence_ratio, reconstruction_check};
use jetsigma::prolong::{sigma_prolong, standard_prolong_all};
use jetsigma::reduction::{reduce, verify_sigma_symmetry, OdeSystem};
use jetsigma::session::{load_session, Session};
use jetsigma::{lie_bracket, Expr, JetContext, Matrix, Verdict, VectorField, ZeroTest, ZeroVerdict};
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config, TestRng, TestRunner};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn t<T, E: Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn session(name: &str) -> Result<Session, String> {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../examples").join(format!("{}.session", name));
    t(load_session(&p))
}

fn parser(c: &JetContext) -> impl Fn(&str) -> Expr + '_ {
    move |s| c.parse(s).unwrap_or_else(|e| panic!("{}: {}", s, e))
}

fn passes(rs: &[jetsigma::Residual]) -> bool {
    overall(rs) == Verdict::Pass
}

fn field(c: &JetContext, order: usize, coeffs: &[&str]) -> VectorField {
    let p = parser(c);
    VectorField::from_coefficients(c, order, &coeffs.iter().map(|s| p(s)).collect::<Vec<_>>())
}

fn solved_rhs(sys: &OdeSystem) -> Vec<Expr> {
    sys.solved.as_ref().map(|rows| rows.iter().map(|r| r.2.clone()).collect()).unwrap_or_default()
}

fn example1() -> Outcome {
    let s = session("example1")?;
    let zt = s.zero_test(20, 0);
    let (c, xs, sigma) = (&s.ctx, s.xs(), s.sigma.clone().unwrap());
    let p = parser(c);
    let ys = t(sigma_prolong(&xs, &sigma, 2))?;
    ensure!(ys[0].psi == vec![vec![p("1"), p("0"), p("u_x*v_x")], vec![p("0"), p("v_x"), p("v_xx")]], "Y1 = {:?}", ys[0]);
    ensure!(ys[1].psi == vec![vec![p("0"), p("u_x"), p("u_xx")], vec![p("1"), p("0"), p("u_x*v_x")]], "Y2 = {:?}", ys[1]);
    ensure!(t(lie_bracket(&ys[0], &ys[1]))?.is_zero(), "[Y1,Y2] != 0");
    ensure!(t(check_theorem2(&xs, &sigma, &zt))?.holds_la() == Verdict::Pass, "(la) fails");
    let seeds: Vec<Expr> = s.invariants.iter().map(|i| i.expr.clone()).collect();
    let table = t(generate_invariants(&ys, &c.x_expr(), &seeds, 2, &zt))?;
    let found: Vec<Expr> = table.entries().map(|e| e.expr.clone()).collect();
    for printed in ["exp(-u)*v_x", "exp(-v)*u_x", "exp(-u)*(v_xx - u_x*v_x)", "exp(-v)*(u_xx - u_x*v_x)"] {
        ensure!(found.contains(&p(printed)), "{} not generated", printed);
        ensure!(passes(&t(verify_invariant(&ys, &p(printed), &zt))?), "{} not invariant", printed);
    }
    let sys = s.system.clone().unwrap();
    ensure!(t(verify_sigma_symmetry(&xs, &sigma, &sys, &zt))?.verdict() == Verdict::Pass, "not a sigma-symmetry");
    let ch = s.change.clone().unwrap();
    let red = t(reduce(&sys, &ch, &zt))?;
    let q = parser(&ch.target);
    ensure!(solved_rhs(&red.system) == vec![q("-z1*z2"), q("z1*z2")], "reduced {:?}", solved_rhs(&red.system));
    Ok(String::new())
}

fn example2() -> Outcome {
    let s = session("example2")?;
    let zt = s.zero_test(20, 0);
    let (c, xs, sigma) = (&s.ctx, s.xs(), s.sigma.clone().unwrap());
    let p = parser(c);
    let ys = t(sigma_prolong(&xs, &sigma, 2))?;
    ensure!(ys[0].psi == vec![vec![p("u"), p("u_x"), p("u^2*u_x + u_xx")], vec![p("0"), p("u^2"), p("3*u*u_x")]], "Y1 = {:?}", ys[0]);
    let printed_y2 = field(c, 2, &["0", "0", "-u", "-u*u_x", "u_x", "-(u*u_xx + 2*u_x^2)", "-(u_xx + u^2*u_x)"]);
    let off: Vec<String> = printed_y2.add(&ys[1]).coefficients().into_iter().filter(|(_, e)| !e.is_zero()).map(|(s, _)| s.to_string()).collect();
    ensure!(off == vec!["v_1"], "printed Y2 differs from -Y2 on {:?}", off);
    let mu = match t(structure_functions(&ys, &zt))? {
        Involution::Involutive(mu) => mu,
        Involution::NotInvolutive(w) => return Err(format!("not involutive at {:?}", w.pair)),
    };
    ensure!(mu.row(0, 1) == vec![Expr::zero(), Expr::one()], "mu(1,2) = {:?}", mu.row(0, 1));
    ensure!(t(lie_bracket(&ys[0], &ys[1]))? == ys[1], "[Y1,Y2] != Y2");
    let seeds: Vec<Expr> = s.invariants.iter().map(|i| i.expr.clone()).collect();
    let table = t(generate_invariants(&ys, &c.x_expr(), &seeds, 2, &zt))?;
    let z1 = p("(exp(-v)/u^2)*(u*u_xx - u_x^2 - u*u_x*v_x)");
    let z2 = p("(2/u^2)*((u_x^2 - u^3*u_x - u*u_xx + u^2*v_xx) + exp(-v)*(u*u_xx - u_x^2 - u*u_x*v_x))");
    ensure!(table.chains[0][1].expr == z1 && table.chains[1][1].expr == z2, "second-order invariants differ");
    for e in [&z1, &z2] {
        ensure!(passes(&t(verify_invariant(&ys, e, &zt))?), "{} not invariant", e);
    }
    let printed_z2 = p("(2/x^2)*((u_x^2 - u^3*u_x - u*u_xx + u^2*v_xx) + (u*u_xx - u_x^2 - u*u_x*v_x))");
    ensure!(overall(&t(verify_invariant(&ys, &printed_z2, &zt))?) == Verdict::Fail, "printed zeta2' unexpectedly invariant");
    let sys = s.system.clone().unwrap();
    ensure!(t(verify_sigma_symmetry(&xs, &sigma, &sys, &zt))?.verdict() == Verdict::Pass, "not a sigma-symmetry");
    let ch = s.change.clone().unwrap();
    let red = t(reduce(&sys, &ch, &zt))?;
    let q = parser(&ch.target);
    ensure!(solved_rhs(&red.system) == vec![q("z2^2"), q("z1*z2")], "reduced {:?}", solved_rhs(&red.system));
    Ok(" (errata: X2 = +u d/dv; printed Y2 is -Y2 off d/dv_x; printed zeta2' corrected)".into())
}

fn example3_case(phi: [[&str; 2]; 2], sigma: [[&str; 2]; 2], mode: SpanMode) -> Result<(JetContext, Vec<VectorField>, jetsigma::involution::Closure, jetsigma::involution::Theorem2Report), String> {
    let c = JetContext::new("x", &["u", "v"], 1);
    let zt = ZeroTest::default();
    let xs: Vec<VectorField> = phi.iter().map(|f| VectorField::parse(&c, "0", f).unwrap()).collect();
    let s = t(Matrix::parse(&c, &[&sigma[0], &sigma[1]]))?;
    let ys = t(sigma_prolong(&xs, &s, 1))?;
    ensure!(matches!(t(structure_functions_in_mode(&ys, mode, &zt))?, Involution::NotInvolutive(_)), "reported involutive");
    let cl = t(close_under_bracket(&ys, 8, mode, &zt))?;
    let t2 = t(check_theorem2(&xs, &s, &zt))?;
    Ok((c, ys, cl, t2))
}

fn structure_functions_in_mode(ys: &[VectorField], mode: SpanMode, zt: &ZeroTest) -> jetsigma::Result<Involution> {
    jetsigma::involution::structure_functions_in(ys, mode, zt)
}

fn table_is(cl: &jetsigma::involution::Closure, rows: &[((usize, usize), &[i64])]) -> Result<(), String> {
    for ((i, j), want) in rows {
        let want: Vec<Expr> = want.iter().map(|&k| Expr::int(k)).collect();
        ensure!(cl.structure.row(i - 1, j - 1) == want, "[Y{},Y{}] = {:?}", i, j, cl.structure.row(i - 1, j - 1));
    }
    Ok(())
}

fn example3() -> Outcome {
    let (c, _, cl, t2) = example3_case([["1", "0"], ["0", "1"]], [["0", "u_x"], ["v_x", "0"]], SpanMode::Constants)?;
    let p = parser(&c);
    ensure!(cl.fields.len() == 5, "case 1: {} generators", cl.fields.len());
    let added = [["0", "0", "0", "u_x", "-v_x"], ["0", "0", "0", "0", "u_x"], ["0", "0", "0", "v_x", "0"]];
    for (k, f) in added.iter().enumerate() {
        ensure!(cl.fields[2 + k] == field(&c, 1, f), "case 1: Y{} = {:?}", 3 + k, cl.fields[2 + k]);
    }
    table_is(&cl, &[
        ((1, 2), &[0, 0, 1, 0, 0]), ((1, 3), &[0, 0, 0, -2, 0]), ((1, 4), &[0, 0, 0, 0, 0]), ((1, 5), &[0, 0, 1, 0, 0]),
        ((2, 3), &[0, 0, 0, 0, 2]), ((2, 4), &[0, 0, -1, 0, 0]), ((2, 5), &[0, 0, 0, 0, 0]), ((3, 4), &[0, 0, 0, 2, 0]),
        ((3, 5), &[0, 0, 0, 0, -2]), ((4, 5), &[0, 0, 1, 0, 0]),
    ]).map_err(|e| format!("case 1: {}", e))?;
    ensure!(t2.q.row(0, 1) == vec![p("u_x"), p("-v_x")], "case 1: Q12 = {:?}", t2.q.row(0, 1));
    ensure!(t2.holds_la() == Verdict::Fail && t2.holds_lagen() == Verdict::Fail, "case 1: (la)/(lagen) hold");

    let (c, _, cl, t2) = example3_case([["u", "0"], ["0", "-u"]], [["0", "u_x"], ["u", "0"]], SpanMode::Functions)?;
    let p = parser(&c);
    ensure!(cl.fields.len() == 3 && cl.fields[2] == field(&c, 1, &["0", "0", "0", "0", "u^3"]), "case 2 generators");
    table_is(&cl, &[((1, 2), &[0, 1, 1]), ((1, 3), &[0, 0, 3]), ((2, 3), &[0, 0, 0])]).map_err(|e| format!("case 2: {}", e))?;
    ensure!(t2.q.row(0, 1) == vec![p("u"), p("-u^2")], "case 2: Q12 = {:?}", t2.q.row(0, 1));
    ensure!(t2.q_phi[0].1 == vec![p("u^2"), p("u^3")], "case 2: Q12 phi");
    ensure!(t2.holds_la() == Verdict::Fail && t2.holds_lagen() == Verdict::Fail, "case 2: (la)/(lagen) hold");

    let (c, _, cl, t2) = example3_case([["1", "0"], ["0", "1"]], [["0", "u_x"], ["u", "0"]], SpanMode::Functions)?;
    let p = parser(&c);
    ensure!(cl.fields.len() == 4, "case 3: {} generators", cl.fields.len());
    ensure!(cl.fields[2] == field(&c, 1, &["0", "0", "0", "1", "-u"]) && cl.fields[3] == field(&c, 1, &["0", "0", "0", "0", "1"]), "case 3 generators");
    table_is(&cl, &[((1, 2), &[0, 0, 1, 0]), ((1, 3), &[0, 0, 0, -2]), ((1, 4), &[0, 0, 0, 0]), ((2, 3), &[0, 0, 0, 0]), ((2, 4), &[0, 0, 0, 0]), ((3, 4), &[0, 0, 0, 0])])
        .map_err(|e| format!("case 3: {}", e))?;
    ensure!(t2.q.row(0, 1) == vec![Expr::one(), p("-u")], "case 3: Q12 = {:?}", t2.q.row(0, 1));
    ensure!(t2.holds_la() == Verdict::Fail, "case 3: (la) holds");
    Ok(" (case 1 in constant-coefficient span; case 2 printed Y2 sign on d/dv corrected)".into())
}

fn examples4to7() -> Outcome {
    let s = session("example4")?;
    let zt = s.zero_test(20, 0);
    let c = &s.ctx;
    let p = parser(c);
    let sigma = s.sigma.clone().unwrap();
    for name in ["A", "B"] {
        let m = s.matrix(name).unwrap();
        ensure!(passes(&t(verify_a_sigma(c, m, &sigma, Convention::InverseOfA, &zt))?), "Example 4: {} fails", name);
    }
    let za = vec![field(c, 1, &["0", "u", "0", "u_x", "0"]), field(c, 1, &["0", "0", "1", "0", "0"])];
    for e in ["v_x", "u_x/u"] {
        ensure!(passes(&t(verify_invariant(&za, &p(e), &zt))?), "Example 4: {} under Z(A)", e);
    }
    let b = s.matrix("B").unwrap();
    let zb = t(standard_prolong_all(&t(transform_fields(b, &s.xs()))?, 1))?;
    ensure!(passes(&t(verify_invariant(&zb, &p("u_x"), &zt))?), "Example 4: u_x under Z(B)");

    let mut notes = Vec::new();
    for name in ["example5", "example6", "example7"] {
        let s = session(name)?;
        let zt = s.zero_test(20, 0);
        let a = s.matrix("A").unwrap();
        let conv = s.options.convention;
        let rt = t(theorem5_roundtrip(&s.xs(), a, 1, conv, &zt))?;
        ensure!(rt.verdict() == Verdict::Pass, "{}: round trip fails", name);
        ensure!(t(sigma_from_a(&s.ctx, a, conv, &zt))? == s.sigma.clone().unwrap(), "{}: sigma differs", name);
        notes.push(format!("{} {}", name, conv.name()));
    }

    let s = session("example5")?;
    let zt = s.zero_test(20, 0);
    let c = &s.ctx;
    let p = parser(c);
    let a = s.matrix("A").unwrap();
    let phi = "1/(1 - u*v)";
    let printed = t(Matrix::parse(c, &[&[&format!("-v*u_x*{}", phi), &format!("v_x*{}", phi)], &[&format!("u_x*{}", phi), &format!("-u*v_x*{}", phi)]]))?;
    ensure!(t(sigma_from_a(c, a, Convention::InverseOfA, &zt))? == printed, "Example 5: printed sigma not reproduced");
    let zs = t(standard_prolong_all(&s.xs(), 1))?;
    let literal = t(sigma_prolong(&t(transform_fields(a, &s.xs()))?, &printed, 1))?;
    let mut flagged = false;
    for e in ["(u_x^2 + v_x^2)/(u^2 + v^2)", "arctan(u_x/v_x) - arctan(u/v)"] {
        let rs = t(verify_invariant(&zs, &p(e), &zt))?;
        ensure!(passes(&rs), "Example 5: {} not invariant under Z", e);
        flagged |= rs.iter().any(|r| r.verdict == ZeroVerdict::Unknown);
        for r in t(verify_invariant(&literal, &p(e), &zt))? {
            ensure!(matches!(r.verdict, ZeroVerdict::NonZero(_)), "Example 5: {} under {} is {:?}", e, r.label, r.verdict);
        }
    }
    let flag = if flagged { ", Q numeric" } else { "" };
    Ok(format!(" ({}{})", notes.join(", "), flag))
}

fn example8() -> Outcome {
    let s = session("example8")?;
    let zt = s.zero_test(20, 0);
    let (c, xs, sigma) = (&s.ctx, s.xs(), s.sigma.clone().unwrap());
    let p = parser(c);
    let sys = t(s.system.clone().unwrap().solve_for_highest(&zt))?;
    ensure!(t(verify_sigma_symmetry(&xs, &sigma, &sys, &zt))?.verdict() == Verdict::Pass, "not a sigma-symmetry");
    let ys = t(sigma_prolong(&xs, &sigma, 2))?;
    let seeds: Vec<Expr> = s.invariants.iter().map(|i| i.expr.clone()).collect();
    let table = t(generate_invariants(&ys, &c.x_expr(), &seeds, 2, &zt))?;
    let b = "(-u_x^2 + u_x*v_x + v_x*w_x + w_x^2)";
    let printed = [
        p("u_xx - v_xx"),
        p(&format!("exp(-(u - v - w))*(u_xx + w_xx + {b})")),
        p(&format!("exp(-(u + w))*(u_xx - v_xx - w_xx + {b})")),
    ];
    let second: Vec<Expr> = table.of_order(2).into_iter().cloned().collect();
    ensure!(second.len() == 3, "{} second-order invariants", second.len());
    for e in &printed {
        ensure!(second.contains(e), "{} not generated", e);
        ensure!(passes(&t(verify_invariant(&ys, e, &zt))?), "{} not invariant", e);
    }
    let ch = s.change.clone().unwrap();
    let red = t(reduce(&sys, &ch, &zt))?;
    let q = parser(&ch.target);
    let want = vec![q("xi^3/(xi_x^2*z1*z2^2)"), q("xi^2/(xi_x^2*z2)"), q("xi/xi_x")];
    ensure!(solved_rhs(&red.system) == want, "reduced {:?}", solved_rhs(&red.system));
    Ok(" (erratum: first seed uses u_x + w_x)".into())
}

fn example9() -> Outcome {
    let s = session("example9")?;
    let zt = s.zero_test(20, 0);
    let (c, xs, sigma) = (&s.ctx, s.xs(), s.sigma.clone().unwrap());
    let p = parser(c);
    let ys = t(sigma_prolong(&xs, &sigma, 2))?;
    ensure!(t(lie_bracket(&ys[0], &ys[1]))? == ys[1], "[Y1,Y2] != Y2");
    let basis: Vec<Expr> = ["w/u", "w_x/u", "w_xx/u", "u_x/u", "u_xx/u", "v_x + u*u_x/2 - u_x*v/u", "v_xx + u_x^2 + u*u_xx/2 - u_xx*v/u"]
        .iter()
        .map(|e| p(e))
        .collect();
    for e in &basis {
        ensure!(passes(&t(verify_invariant(&ys, e, &zt))?), "{} not invariant", e);
    }
    let rank = t(independence_check(&basis, c, &zt))?.rank;
    ensure!(rank == 7, "basis rank {}", rank);
    for seed in ["w/u", "u_x/u", "v_x + u*u_x/2 - u_x*v/u"] {
        let base = p(seed);
        for k in 0..=2 - c.jet_order(&base) {
            let z = c.total_derivative_n(&base, k);
            ensure!(passes(&t(verify_invariant(&ys, &z, &zt))?), "D_x^{} {} not invariant", k, seed);
        }
    }
    let sys = s.system.clone().unwrap();
    ensure!(t(verify_sigma_symmetry(&xs, &sigma, &sys, &zt))?.verdict() == Verdict::Pass, "not a sigma-symmetry");
    let ch = s.change.clone().unwrap();
    let red = t(reduce(&sys, &ch, &zt))?;
    let q = parser(&ch.target);
    ensure!(solved_rhs(&red.system) == vec![q("2*rho"), q("xi_x - xi"), q("eta")], "reduced {:?}", solved_rhs(&red.system));
    Ok(" (invariant form of the system; printed zeta3'' corrected)".into())
}

fn lemma1_suite() -> Outcome {
    let failures: Vec<String> = (0..50).filter_map(|seed| common::lemma1_case(seed).err()).collect();
    ensure!(failures.is_empty(), "{} of 50: {}", failures.len(), failures[0]);
    Ok(" (50 structured + 50 generic sets, 100 perturbations)".into())
}

fn ibdp_suite() -> Outcome {
    let mut steps = 0;
    for seed in 0..50 {
        steps += common::ibdp_case(seed)?;
    }
    Ok(format!(" ({} ibdp outputs re-verified)", steps))
}

fn appendix_b() -> Outcome {
    let c = JetContext::new("x", &["u", "v"], 2).with_params(&["c1", "c2", "k1", "k2"]).with_functions(&[("A", 2), ("B", 2)]);
    let zt = ZeroTest::default();
    let p = parser(&c);
    let system = |c: &JetContext, sign: &str| {
        let rows = vec![
            (c.coord(0, 2), c.parse("u_x*v_x*(1 + exp(-u))").unwrap()),
            (c.coord(1, 2), c.parse(&format!("u_x*v_x*(1 {} exp(-v))", sign)).unwrap()),
        ];
        OdeSystem::solved(c, rows, &ZeroTest::default()).unwrap()
    };
    let phi = vec![vec![p("c1"), p("c2")], vec![p("k1"), p("k2")]];
    let sigma = t(Matrix::parse(&c, &[&["0", "A(u_x,v_x)"], &["B(u_x,v_x)", "0"]]))?;
    let d = t(generate_determining(&system(&c, "+"), &t(Ansatz::new(&c, phi, sigma, None))?, &zt))?;
    let printed = [
        "A(u_x,v_x)*exp(v)*(-B(u_x,v_x)*c1*exp(u) + (1 + exp(u))*(k2*u_x + k1*v_x)) \
         - (A[0,1](u_x,v_x)*exp(u)*(1 + exp(v))*k1 + exp(v)*(c1 + A[1,0](u_x,v_x)*(1 + exp(u))*k1))*u_x*v_x",
        "A(u_x,v_x)*exp(u)*(-B(u_x,v_x)*c2*exp(v) + (1 + exp(v))*(k2*u_x + k1*v_x)) \
         - (c2*exp(u) + A[1,0](u_x,v_x)*(1 + exp(u))*exp(v)*k2 + A[0,1](u_x,v_x)*exp(u)*(1 + exp(v))*k2)*u_x*v_x",
        "B(u_x,v_x)*exp(v)*(-A(u_x,v_x)*exp(u)*k1 + (1 + exp(u))*(c2*u_x + c1*v_x)) \
         - (B[0,1](u_x,v_x)*c1*exp(u)*(1 + exp(v)) + exp(v)*(B[1,0](u_x,v_x)*c1*(1 + exp(u)) + k1))*u_x*v_x",
        "B(u_x,v_x)*exp(u)*(-A(u_x,v_x)*exp(v)*k2 + (1 + exp(v))*(c2*u_x + c1*v_x)) \
         - (B[1,0](u_x,v_x)*c2*(1 + exp(u))*exp(v) + B[0,1](u_x,v_x)*c2*exp(u)*(1 + exp(v)) + exp(u)*k2)*u_x*v_x",
    ];
    ensure!(d.residuals.len() == 4, "{} equations", d.residuals.len());
    let mut unit = None;
    for (r, text) in d.residuals.iter().zip(printed) {
        let f = unit_factor(&p(text), &r.residual).ok_or_else(|| format!("{}: no unit factor", r.label))?;
        ensure!(unit.as_ref().map_or(true, |u| *u == f), "{}: unit factor {} differs", r.label, f);
        unit = Some(f);
    }
    let unit = unit.unwrap();

    let c1 = JetContext::new("x", &["u", "v"], 2);
    let xs = vec![VectorField::parse(&c1, "0", &["1", "0"]).unwrap(), VectorField::parse(&c1, "0", &["0", "1"]).unwrap()];
    let s = t(Matrix::parse(&c1, &[&["0", "v_x"], &["u_x", "0"]]))?;
    let zt1 = ZeroTest::default();
    let mut satisfied = Vec::new();
    for sign in ["-", "+"] {
        let r = t(verify_candidate(&system(&c1, sign), &xs, &s, &zt1))?;
        if r.residuals.iter().all(|r| r.verdict.is_zero()) {
            satisfied.push(sign);
        }
    }
    ensure!(satisfied.contains(&"-"), "Example 1 data fails its own system");
    // Both variants are symmetric; the reduced flow pins the sign.
    let ch = session("example1")?.change.unwrap();
    let q = parser(&ch.target);
    let first = |sign: &str| -> Result<Expr, String> { Ok(solved_rhs(&t(reduce(&system(&c1, sign), &ch, &zt1))?.system)[0].clone()) };
    ensure!(first("-")? == q("-z1*z2") && first("+")? == q("z1*z2"), "reduced signs do not separate the variants");
    Ok(format!(" (unit factor {}; 1 - e^-v pinned, 1 + e^-v erratum for Example 1)", unit))
}

fn numeric() -> Outcome {
    let mut notes = Vec::new();
    for name in ["example1", "example2", "example9"] {
        let s = session(name)?;
        let o = s.oracle.clone().unwrap();
        ensure!(o.t_end == 0.5 && o.step == 1e-3, "{}: horizon {} step {}", name, o.t_end, o.step);
        let (sys, ch) = (s.system.clone().unwrap(), s.change.clone().unwrap());
        let zt = s.zero_test(20, 0);
        let sys = t(sys.solve_for_highest(&zt))?;
        let red = t(reduce(&sys, &ch, &zt))?;
        let defs = OpaqueDefs::new();
        let rc = t(reconstruction_check(&sys, &red.system, &ch, &o.initial, (0.0, o.t_end), o.step, &defs))?;
        ensure!(rc.within(1e-5), "{}: flow {:e} defect {:e}", name, rc.flow_error, rc.defect);
        let ratio = t(convergence_ratio(&sys, &o.initial, (0.0, o.t_end), o.ratio_step, &defs))?;
        ensure!((12.0..=20.0).contains(&ratio), "{}: ratio {}", name, ratio);
        notes.push(format!("{} {:.1e}/{:.1}", name, rc.flow_error.max(rc.defect), ratio));
    }
    Ok(format!(" ({})", notes.join(", ")))
}

fn kernel() -> Outcome {
    let mut runner = TestRunner::new_with_rng(Config::default(), TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha));
    let strategy = (common::expr(), common::expr(), common::tree(), common::tree());
    let (mut compared, mut identities) = (0, 0);
    for k in 0..1000u64 {
        let ((ta, a), (_, b), tb, tc) = t(strategy.new_tree(&mut runner))?.current();
        compared += common::kernel_case(&ta, &a, &b, k)?;
        if let Some(z) = common::vanishing(&ta, &tb, &tc).normalize() {
            ensure!(z.is_zero(), "identity left {}", z);
            identities += 1;
        }
    }
    ensure!(compared >= 1000, "only {} finite-difference comparisons", compared);
    Ok(format!(" (1000 expressions, {} finite-difference points, {} identities)", compared, identities))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("Example 1 end-to-end", example1),
        ("Example 2 end-to-end", example2),
        ("Example 3, three cases", example3),
        ("Examples 4-7 equivalence", examples4to7),
        ("Example 8", example8),
        ("Example 9", example9),
        ("Invariant-preservation suite", lemma1_suite),
        ("IBDP suite", ibdp_suite),
        ("Determining equations", appendix_b),
        ("Numeric cross-validation", numeric),
        ("Kernel suite", kernel),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panic: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(note) => println!("criterion {:>2} PASS {}{} [{:.1}s]", i + 1, name, note, secs),
            Err(e) => {
                failed += 1;
                println!("criterion {:>2} FAIL {}: {} [{:.1}s]", i + 1, name, e, secs);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

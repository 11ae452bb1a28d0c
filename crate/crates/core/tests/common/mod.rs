#![allow(dead_code)]

use std::collections::BTreeMap;

use jetsigma::expr::Tree;
use jetsigma::prolong::sigma_prolong;
use jetsigma::{Expr, JetContext, Matrix, Symbol, VectorField};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SYMS: [&str; 5] = ["x", "u", "v", "u_1", "v_1"];

pub fn ctx() -> JetContext {
    JetContext::new("x", &["u", "v"], 1)
}

fn leaf() -> impl Strategy<Value = Tree> {
    prop_oneof![
        (-5i64..=5, 1i64..=4).prop_map(|(p, q)| Tree::Num(BigRational::new(BigInt::from(p), BigInt::from(q)))),
        prop::sample::select(SYMS.to_vec()).prop_map(|s| Tree::Sym(s.to_string())),
    ]
}

/// Random expression trees over `SYMS` with the five kernels and integer powers.
pub fn tree() -> impl Strategy<Value = Tree> {
    leaf().prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            3 => prop::collection::vec(inner.clone(), 2..=3).prop_map(Tree::Add),
            3 => prop::collection::vec(inner.clone(), 2..=3).prop_map(Tree::Mul),
            2 => (inner.clone(), -2i64..=3).prop_map(|(b, n)| Tree::Pow(Box::new(b), n)),
            2 => (prop::sample::select(vec!["exp", "sin", "cos", "arctan"]), inner.clone())
                .prop_map(|(k, a)| Tree::Call(k.to_string(), vec![a])),
            1 => inner.prop_map(|a| Tree::Call(
                "log".into(),
                vec![Tree::Add(vec![Tree::Pow(Box::new(a), 2), Tree::Num(BigRational::from_integer(1.into()))])],
            )),
        ]
    })
}

/// Trees whose normal form exists.
pub fn expr() -> impl Strategy<Value = (Tree, Expr)> {
    tree().prop_filter_map("singular", |t| t.normalize().map(|e| (t, e)))
}

/// Direct floating-point evaluation of a tree, independent of normalization.
pub fn eval_tree(t: &Tree, point: &BTreeMap<String, f64>) -> Option<f64> {
    let v = match t {
        Tree::Num(c) => c.to_f64()?,
        Tree::Sym(s) => *point.get(s)?,
        Tree::Add(items) => items.iter().map(|i| eval_tree(i, point)).sum::<Option<f64>>()?,
        Tree::Mul(items) => items.iter().map(|i| eval_tree(i, point)).product::<Option<f64>>()?,
        Tree::Pow(b, n) => {
            let b = eval_tree(b, point)?;
            if *n < 0 && b == 0.0 {
                return None;
            }
            b.powi(*n as i32)
        }
        Tree::Call(name, args) => {
            let a = eval_tree(&args[0], point)?;
            match name.as_str() {
                "exp" => a.exp(),
                "sin" => a.sin(),
                "cos" => a.cos(),
                "arctan" => a.atan(),
                "log" if a > 0.0 => a.ln(),
                _ => return None,
            }
        }
        Tree::Deriv(..) => return None,
    };
    v.is_finite().then_some(v)
}

/// Point with components `±p/q`, `1 <= p, q <= 64`.
pub fn point(rng: &mut ChaCha8Rng) -> BTreeMap<String, f64> {
    SYMS.iter()
        .map(|s| {
            let v = rng.gen_range(1..=64) as f64 / rng.gen_range(1..=64) as f64;
            (s.to_string(), if rng.gen_bool(0.5) { v } else { -v })
        })
        .collect()
}

pub fn symbol_point(p: &BTreeMap<String, f64>) -> BTreeMap<Symbol, f64> {
    p.iter().map(|(k, v)| (Symbol::new(k), *v)).collect()
}

/// Sparse polynomial with 1 to 3 terms of total degree `<= deg` and small
/// nonzero integer coefficients.
pub fn poly(rng: &mut ChaCha8Rng, vars: &[Expr], deg: u32) -> Expr {
    let mut monos: Vec<Vec<usize>> = vec![Vec::new()];
    let mut frontier = monos.clone();
    for _ in 0..deg {
        frontier = frontier
            .iter()
            .flat_map(|m| (m.last().copied().unwrap_or(0)..vars.len()).map(move |i| [m.as_slice(), &[i]].concat()))
            .collect();
        monos.extend(frontier.iter().cloned());
    }
    let n = rng.gen_range(1..=3);
    let mut out = Expr::zero();
    for m in monos.choose_multiple(rng, n) {
        let c = *[-3, -2, -1, 1, 2, 3].choose(rng).unwrap();
        let term = m.iter().fold(Expr::int(c), |acc, &i| acc.mul(&vars[i]));
        out = out.add(&term);
    }
    out
}

/// A fuzzed vertical set with two dependent variables and two fields:
/// `X1 = (eta_v, -eta_u)`, `X2 = g X1` with `eta` quadratic and `g` affine in
/// `(x, u, v)`, so `x` and `eta` are common invariants. `sigma` is a
/// polynomial on `J^1`.
pub struct Sample {
    pub ctx: JetContext,
    pub eta: Expr,
    pub xs: Vec<VectorField>,
    pub sigma: Matrix,
    pub ys: Vec<VectorField>,
}

pub const ORDER: usize = 2;

pub fn sample(seed: u64) -> Sample {
    let ctx = JetContext::new("x", &["u", "v"], ORDER);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base: Vec<Expr> = ["x", "u", "v"].iter().map(|s| ctx.parse(s).unwrap()).collect();
    let j1: Vec<Expr> = ["x", "u", "v", "u_1", "v_1"].iter().map(|s| ctx.parse(s).unwrap()).collect();
    let (u, v) = (ctx.coord(0, 0), ctx.coord(1, 0));
    let eta = loop {
        let e = poly(&mut rng, &base, 2);
        if !e.diff(&u).is_zero() || !e.diff(&v).is_zero() {
            break e;
        }
    };
    let x1 = VectorField::vertical(&ctx, vec![eta.diff(&v), eta.diff(&u).neg()]).unwrap();
    let g = poly(&mut rng, &base, 1);
    let x2 = x1.scale(&g);
    let rows = (0..2).map(|_| (0..2).map(|_| poly(&mut rng, &j1, 2)).collect()).collect();
    let sigma = Matrix::from_rows(rows).unwrap();
    let xs = vec![x1, x2];
    let ys = sigma_prolong(&xs, &sigma, ORDER).unwrap();
    Sample { ctx, eta, xs, sigma, ys }
}

/// Generic vertical set: both fields independent quadratics on `(x, u, v)`.
pub fn generic_sample(seed: u64) -> Sample {
    let ctx = JetContext::new("x", &["u", "v"], ORDER);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let base: Vec<Expr> = ["x", "u", "v"].iter().map(|s| ctx.parse(s).unwrap()).collect();
    let j1: Vec<Expr> = ["x", "u", "v", "u_1", "v_1"].iter().map(|s| ctx.parse(s).unwrap()).collect();
    let xs: Vec<VectorField> = (0..2)
        .map(|_| VectorField::vertical(&ctx, vec![poly(&mut rng, &base, 2), poly(&mut rng, &base, 2)]).unwrap())
        .collect();
    let rows = (0..2).map(|_| (0..2).map(|_| poly(&mut rng, &j1, 2)).collect()).collect();
    let sigma = Matrix::from_rows(rows).unwrap();
    let ys = sigma_prolong(&xs, &sigma, ORDER).unwrap();
    Sample { ctx, eta: Expr::zero(), xs, sigma, ys }
}

/// Adds a nonzero polynomial to one prolonged coefficient of order >= 1.
pub fn perturb(s: &Sample, seed: u64) -> Vec<VectorField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(7919).wrapping_add(1));
    let j: Vec<Expr> = s.ctx.coordinates(ORDER).iter().map(Expr::sym).collect();
    let mut ys = s.ys.clone();
    let (i, a, k) = (rng.gen_range(0..2), rng.gen_range(0..2), rng.gen_range(1..=ORDER));
    let delta = poly(&mut rng, &j, 2);
    ys[i].psi[a][k] = ys[i].psi[a][k].add(&delta);
    ys
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

/// Normal form is a fixed point of `to_tree -> normalize` and of print/parse,
/// and agrees numerically with the source tree.
pub fn normal_form_case(t: &Tree, e: &Expr, seed: u64) -> Result<(), String> {
    if e.to_tree().normalize().as_ref() != Some(e) {
        return Err(format!("renormalizing {} changes it", e));
    }
    let again = ctx().parse(&e.to_string()).map_err(|err| format!("{}: {}", e, err))?;
    if &again != e {
        return Err(format!("print/parse of {} gives {}", e, again));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..5 {
        let p = point(&mut rng);
        let (Some(a), Ok(b)) = (eval_tree(t, &p), e.eval_f64(&symbol_point(&p), &Default::default())) else {
            continue;
        };
        if a.abs() < 1e8 && !close(a, b, 1e-8) {
            return Err(format!("{} = {} but tree gives {} at {:?}", e, b, a, p));
        }
    }
    Ok(())
}

pub fn derivation_case(a: &Expr, b: &Expr) -> Result<(), String> {
    for s in SYMS {
        let s = Symbol::new(s);
        let sum = a.add(b).diff(&s);
        if sum != a.diff(&s).add(&b.diff(&s)) {
            return Err(format!("linearity fails for d/d{} of {} and {}", s.name(), a, b));
        }
        let prod = a.mul(b).diff(&s);
        if prod != a.diff(&s).mul(b).add(&a.mul(&b.diff(&s))) {
            return Err(format!("Leibniz fails for d/d{} of {} and {}", s.name(), a, b));
        }
    }
    Ok(())
}

/// `diff` against a central difference of the source tree, step `1e-6`,
/// relative tolerance `1e-4`. Returns the number of points compared.
pub fn finite_difference_case(t: &Tree, e: &Expr, seed: u64) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-6;
    let mut compared = 0;
    for _ in 0..5 {
        let p = point(&mut rng);
        let s = *SYMS.choose(&mut rng).unwrap();
        let shifted = |d: f64| {
            let mut q = p.clone();
            *q.get_mut(s).unwrap() += d;
            eval_tree(t, &q)
        };
        let (Some(f), Some(fp), Some(fm)) = (eval_tree(t, &p), shifted(h), shifted(-h)) else {
            continue;
        };
        let Ok(d) = e.diff(&Symbol::new(s)).eval_f64(&symbol_point(&p), &Default::default()) else {
            continue;
        };
        // Rounding in the difference quotient grows like |f| / h.
        if f.abs() > 1e3 || d.abs() > 1e6 {
            continue;
        }
        let fd = (fp - fm) / (2.0 * h);
        if !close(d, fd, 1e-4) {
            return Err(format!("d/d{} {} = {} but central difference gives {} at {:?}", s, e, d, fd, p));
        }
        compared += 1;
    }
    Ok(compared)
}

/// `Zero` verdicts must vanish numerically at fresh points and `NonZero`
/// witnesses must not.
pub fn zero_test_case(t: &Tree, e: &Expr, seed: u64) -> Result<(), String> {
    use jetsigma::{ZeroTest, ZeroVerdict};
    match ZeroTest::new(20, seed).check(e) {
        Ok(ZeroVerdict::Zero) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..20 {
                let p = point(&mut rng);
                if let Some(v) = eval_tree(t, &p) {
                    if v.abs() > 1e-6 {
                        return Err(format!("Zero verdict for a tree worth {} at {:?}", v, p));
                    }
                }
            }
            Ok(())
        }
        Ok(ZeroVerdict::NonZero(w)) => match e.eval_numeric(&w, &Default::default()) {
            Ok(v) if v.abs() > 1e-9 => Ok(()),
            other => Err(format!("witness for {} evaluates to {:?}", e, other)),
        },
        Ok(ZeroVerdict::Unknown) | Err(_) => Ok(()),
    }
}

fn num(n: i64) -> Tree {
    Tree::Num(BigRational::from_integer(n.into()))
}

/// Trees that vanish identically by distributivity and the exponential rule.
pub fn vanishing(a: &Tree, b: &Tree, c: &Tree) -> Tree {
    let exp = |t: Tree| Tree::Call("exp".into(), vec![t]);
    Tree::Add(vec![
        Tree::Mul(vec![a.clone(), Tree::Add(vec![b.clone(), c.clone()])]),
        Tree::Mul(vec![num(-1), a.clone(), b.clone()]),
        Tree::Mul(vec![num(-1), a.clone(), c.clone()]),
        Tree::Mul(vec![exp(a.clone()), exp(b.clone())]),
        Tree::Mul(vec![num(-1), exp(Tree::Add(vec![a.clone(), b.clone()]))]),
    ])
}

pub fn kernel_case(t: &Tree, e: &Expr, other: &Expr, seed: u64) -> Result<usize, String> {
    normal_form_case(t, e, seed)?;
    derivation_case(e, other)?;
    zero_test_case(t, e, seed)?;
    finite_difference_case(t, e, seed)
}

pub fn lemma1_case(seed: u64) -> Result<(), String> {
    use jetsigma::prolong::check_lemma1;
    use jetsigma::ZeroVerdict;
    let zt = jetsigma::ZeroTest::new(20, seed);
    for s in [sample(seed), generic_sample(seed)] {
        let good = check_lemma1(&s.ys, &s.sigma, &zt).map_err(|e| e.to_string())?;
        if let Some(r) = good.residuals.iter().find(|r| !r.verdict.is_zero()) {
            return Err(format!("seed {}: {} = {} on a sigma-prolonged set", seed, r.label, r.residual));
        }
        let bad = check_lemma1(&perturb(&s, seed), &s.sigma, &zt).map_err(|e| e.to_string())?;
        if !bad.residuals.iter().any(|r| matches!(r.verdict, ZeroVerdict::NonZero(_))) {
            return Err(format!("seed {}: perturbed set has no witness", seed));
        }
        if bad.residuals.iter().any(|r| r.verdict == ZeroVerdict::Unknown) {
            return Err(format!("seed {}: undecided residual", seed));
        }
    }
    Ok(())
}

/// Starting from the invariants `x` and `eta`, each `ibdp_step` output is
/// itself invariant. Returns the number of steps checked.
pub fn ibdp_case(seed: u64) -> Result<usize, String> {
    use jetsigma::invariants::{ibdp_step, verify_invariant};
    let zt = jetsigma::ZeroTest::new(20, seed);
    let s = sample(seed);
    let ok = |e: &Expr| -> Result<(), String> {
        let rs = verify_invariant(&s.ys, e, &zt).map_err(|e| e.to_string())?;
        match rs.iter().find(|r| !r.verdict.is_zero()) {
            Some(r) => Err(format!("seed {}: {} of {} = {}", seed, r.label, e, r.residual)),
            None => Ok(()),
        }
    };
    let x = s.ctx.x_expr();
    ok(&x)?;
    ok(&s.eta)?;
    let step = |a: &Expr, b: &Expr| ibdp_step(a, b, &s.ctx, &zt).map_err(|e| format!("seed {}: {}", seed, e));
    let d_eta = step(&x, &s.eta)?;
    let first = step(&s.eta, &x)?;
    let second = step(&s.eta, &first)?;
    let mixed = step(&x, &d_eta)?;
    for e in [&d_eta, &first, &second, &mixed] {
        ok(e)?;
    }
    Ok(4)
}

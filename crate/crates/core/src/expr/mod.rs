//! Symbolic expressions in rational normal form.
//!
//! An [`Expr`] is a quotient of Laurent polynomials whose indeterminates are
//! atoms: symbols, kernel applications (`exp`, `log`, `sin`, `cos`,
//! `arctan`) and opaque function applications with an optional formal
//! derivative multi-index. Numerator and denominator are coprime, the
//! denominator carries no monomial content and has leading coefficient one,
//! so every value built through the public API is already normalized and
//! structural equality is semantic equality within the rewrite rules.
//!
//! Exponentials are split multiplicatively: `exp(a*m1 + b*m2)` becomes the
//! monomial `exp(m1)^a * exp(m2)^b`, which implements
//! `exp(a)*exp(b) = exp(a+b)` and `exp(0) = 1` by construction.

mod calculus;
mod collect;
mod eval;
mod gcd;
mod parse;
pub(crate) mod poly;
mod print;
mod symbols;
mod tree;

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub use collect::{common_denominator, rational_gcd};
pub use eval::{sample_point, EvalError, OpaqueDefs, OpaqueFn, ZeroTest, ZeroVerdict};
pub use parse::{parse, parse_tree, ParseError, ParseErrorKind};
pub use symbols::{SymbolKind, SymbolTable};
pub use tree::Tree;

use gcd::{poly_div_exact, poly_gcd};
use poly::{Exp, Mono, Poly};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Symbol {
        Symbol(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Symbol {
        Symbol::new(s)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Kernel {
    Exp,
    Log,
    Sin,
    Cos,
    Arctan,
}

impl Kernel {
    pub fn name(self) -> &'static str {
        match self {
            Kernel::Exp => "exp",
            Kernel::Log => "log",
            Kernel::Sin => "sin",
            Kernel::Cos => "cos",
            Kernel::Arctan => "arctan",
        }
    }

    pub fn from_name(name: &str) -> Option<Kernel> {
        Some(match name {
            "exp" => Kernel::Exp,
            "log" => Kernel::Log,
            "sin" => Kernel::Sin,
            "cos" => Kernel::Cos,
            "arctan" => Kernel::Arctan,
            _ => return None,
        })
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub(crate) struct Opaque {
    pub name: Symbol,
    pub deriv: Vec<u32>,
    pub args: Vec<Expr>,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub(crate) enum Atom {
    Sym(Symbol),
    /// For `Exp` the argument is a monomial or has leading coefficient one.
    Kernel(Kernel, Expr),
    Opaque(Opaque),
}

#[derive(PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
struct Inner {
    num: Poly,
    den: Poly,
}

#[derive(Clone)]
pub struct Expr(Arc<Inner>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for Expr {}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            Ordering::Equal
        } else {
            self.0.cmp(&other.0)
        }
    }
}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash(state)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", self)
    }
}

impl Default for Expr {
    fn default() -> Self {
        Expr::zero()
    }
}

fn is_rational_exp(a: &Atom) -> bool {
    matches!(a, Atom::Kernel(Kernel::Exp, base) if !base.0.den.is_one())
}

/// A monomial whose exponential factors include one with a rational argument
/// and at least one other; `exp(a) exp(b) = exp(a + b)` then needs the sum.
fn needs_exp_merge(p: &Poly) -> bool {
    p.terms.keys().any(|m| {
        let exps = m.0.iter().filter(|(a, _)| matches!(a, Atom::Kernel(Kernel::Exp, _)));
        let (count, rational) = exps.fold((0, false), |(n, r), (a, _)| (n + 1, r || is_rational_exp(a)));
        rational && count > 1
    })
}

fn merge_exps(p: &Poly) -> Poly {
    let mut out = Poly::zero();
    for (m, c) in &p.terms {
        let mut rest = Vec::new();
        let mut arg = Expr::zero();
        for (a, e) in &m.0 {
            match a {
                Atom::Kernel(Kernel::Exp, base) => {
                    arg = arg.add(&base.scale(&BigRational::new((*e.numer()).into(), (*e.denom()).into())))
                }
                _ => rest.push((a.clone(), *e)),
            }
        }
        let exp = Expr::exp(&arg);
        let merged = exp.0.num.lead().map(|(em, _)| em.clone()).unwrap_or_else(Mono::one);
        out.add_term(Mono(rest).mul(&merged), c.clone());
    }
    out
}

fn to_exp(c: &BigRational) -> Option<Exp> {
    Some(Exp::new(c.numer().to_i64()?, c.denom().to_i64()?))
}

impl Expr {
    fn raw(num: Poly, den: Poly) -> Expr {
        if needs_exp_merge(&num) || needs_exp_merge(&den) {
            return Expr::from_ratio(merge_exps(&num), merge_exps(&den));
        }
        Expr(Arc::new(Inner { num, den }))
    }

    pub(crate) fn from_poly(p: Poly) -> Expr {
        Expr::raw(p, Poly::one())
    }

    pub(crate) fn from_mono(m: Mono) -> Expr {
        Expr::from_poly(Poly::term(m, BigRational::one()))
    }

    pub(crate) fn from_atom(a: Atom) -> Expr {
        Expr::from_mono(Mono::atom(a, Exp::one()))
    }

    /// Normalizes an arbitrary quotient.
    pub(crate) fn from_ratio(num: Poly, den: Poly) -> Expr {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return Expr::zero();
        }
        let (c, m, f) = den.split_unit();
        let mut num = num.mul_mono(&m.inv(), &c.recip());
        if f.is_one() {
            return Expr::from_poly(num);
        }
        let g = poly_gcd(&num, &f);
        let mut f = f;
        if !g.is_one() {
            num = poly_div_exact(&num, &g).expect("gcd divides numerator");
            f = poly_div_exact(&f, &g).expect("gcd divides denominator");
        }
        Expr::finish(num, f)
    }

    /// Renormalizes units of a denominator already coprime to the numerator.
    fn finish(num: Poly, den: Poly) -> Expr {
        let (c, m, f) = den.split_unit();
        let num = if m.is_one() && c.is_one() { num } else { num.mul_mono(&m.inv(), &c.recip()) };
        Expr::raw(num, f)
    }

    pub(crate) fn num(&self) -> &Poly {
        &self.0.num
    }

    pub(crate) fn den(&self) -> &Poly {
        &self.0.den
    }

    pub fn numerator(&self) -> Expr {
        Expr::from_poly(self.0.num.clone())
    }

    pub fn denominator(&self) -> Expr {
        Expr::from_poly(self.0.den.clone())
    }

    pub fn zero() -> Expr {
        Expr::from_poly(Poly::zero())
    }

    pub fn one() -> Expr {
        Expr::from_poly(Poly::one())
    }

    pub fn int(n: i64) -> Expr {
        Expr::rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn frac(p: i64, q: i64) -> Expr {
        Expr::rational(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn rational(c: BigRational) -> Expr {
        Expr::from_poly(Poly::constant(c))
    }

    pub fn sym(s: &Symbol) -> Expr {
        Expr::from_atom(Atom::Sym(s.clone()))
    }

    pub fn symbol(name: &str) -> Expr {
        Expr::sym(&Symbol::new(name))
    }

    /// Exactly zero in normal form.
    pub fn is_zero(&self) -> bool {
        self.0.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.num.is_one() && self.0.den.is_one()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        if self.0.den.is_one() {
            self.0.num.as_constant()
        } else {
            None
        }
    }

    pub fn is_rational(&self) -> bool {
        self.as_rational().is_some()
    }

    pub fn as_symbol(&self) -> Option<Symbol> {
        if !self.0.den.is_one() {
            return None;
        }
        match self.0.num.as_monomial() {
            Some((m, c)) if c.is_one() && m.0.len() == 1 && m.0[0].1.is_one() => match &m.0[0].0 {
                Atom::Sym(s) => Some(s.clone()),
                _ => None,
            },
            _ => None,
        }
    }

    /// Number of numerator plus denominator terms.
    pub fn size(&self) -> usize {
        self.0.num.terms.len() + if self.0.den.is_one() { 0 } else { self.0.den.terms.len() }
    }

    pub fn exp(arg: &Expr) -> Expr {
        if arg.is_zero() {
            return Expr::one();
        }
        let exp_atom = |base: Expr| Atom::Kernel(Kernel::Exp, base);
        if arg.0.den.is_one() {
            let mut mono = Mono::one();
            for (m, c) in &arg.0.num.terms {
                let base = if m.is_one() { Expr::one() } else { Expr::from_mono(m.clone()) };
                let factor = match to_exp(c) {
                    Some(e) => Mono::atom(exp_atom(base), e),
                    None => Mono::atom(exp_atom(base.scale(c)), Exp::one()),
                };
                mono = mono.mul(&factor);
            }
            return Expr::from_mono(mono);
        }
        let c = arg.0.num.lead().map(|(_, c)| c.clone()).unwrap();
        let base = arg.scale(&c.recip());
        match to_exp(&c) {
            Some(e) => Expr::from_mono(Mono::atom(exp_atom(base), e)),
            None => Expr::from_atom(exp_atom(arg.clone())),
        }
    }

    pub fn kernel(k: Kernel, arg: &Expr) -> Expr {
        match k {
            Kernel::Exp => Expr::exp(arg),
            Kernel::Log if arg.is_one() => Expr::zero(),
            Kernel::Sin | Kernel::Arctan if arg.is_zero() => Expr::zero(),
            Kernel::Cos if arg.is_zero() => Expr::one(),
            _ => Expr::from_atom(Atom::Kernel(k, arg.clone())),
        }
    }

    pub fn log(arg: &Expr) -> Expr {
        Expr::kernel(Kernel::Log, arg)
    }

    pub fn sin(arg: &Expr) -> Expr {
        Expr::kernel(Kernel::Sin, arg)
    }

    pub fn cos(arg: &Expr) -> Expr {
        Expr::kernel(Kernel::Cos, arg)
    }

    pub fn arctan(arg: &Expr) -> Expr {
        Expr::kernel(Kernel::Arctan, arg)
    }

    /// Opaque function application; `deriv` is the formal derivative
    /// multi-index (empty or all zero for the function itself).
    pub fn opaque(name: &str, args: &[Expr], deriv: &[u32]) -> Expr {
        let deriv = if deriv.iter().all(|&d| d == 0) { Vec::new() } else { deriv.to_vec() };
        Expr::from_atom(Atom::Opaque(Opaque { name: Symbol::new(name), deriv, args: args.to_vec() }))
    }

    pub fn scale(&self, k: &BigRational) -> Expr {
        if k.is_zero() {
            return Expr::zero();
        }
        Expr::raw(self.0.num.scale(k), self.0.den.clone())
    }

    pub fn neg(&self) -> Expr {
        Expr::raw(self.0.num.neg(), self.0.den.clone())
    }

    pub fn add(&self, other: &Expr) -> Expr {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (n1, d1, n2, d2) = (&self.0.num, &self.0.den, &other.0.num, &other.0.den);
        if d1.is_one() && d2.is_one() {
            return Expr::from_poly(n1.add(n2));
        }
        if d1 == d2 {
            return Expr::from_ratio(n1.add(n2), d1.clone());
        }
        let g = poly_gcd(d1, d2);
        if g.is_one() {
            let num = n1.mul(d2).add(&n2.mul(d1));
            if num.is_zero() {
                return Expr::zero();
            }
            return Expr::finish(num, d1.mul(d2));
        }
        let d1g = poly_div_exact(d1, &g).expect("gcd divides");
        let d2g = poly_div_exact(d2, &g).expect("gcd divides");
        let num = n1.mul(&d2g).add(&n2.mul(&d1g));
        if num.is_zero() {
            return Expr::zero();
        }
        let den = d1.mul(&d2g);
        let h = poly_gcd(&num, &g);
        if h.is_one() {
            Expr::finish(num, den)
        } else {
            Expr::finish(
                poly_div_exact(&num, &h).expect("gcd divides"),
                poly_div_exact(&den, &h).expect("gcd divides"),
            )
        }
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        let (n1, d1, n2, d2) = (&self.0.num, &self.0.den, &other.0.num, &other.0.den);
        if d1.is_one() && d2.is_one() {
            return Expr::from_poly(n1.mul(n2));
        }
        let cancel = |n: &Poly, d: &Poly| -> (Poly, Poly) {
            if d.is_one() {
                return (n.clone(), d.clone());
            }
            let g = poly_gcd(n, d);
            if g.is_one() {
                (n.clone(), d.clone())
            } else {
                (poly_div_exact(n, &g).expect("gcd divides"), poly_div_exact(d, &g).expect("gcd divides"))
            }
        };
        let (n1, d2) = cancel(n1, d2);
        let (n2, d1) = cancel(n2, d1);
        Expr::finish(n1.mul(&n2), d1.mul(&d2))
    }

    pub fn try_inv(&self) -> Option<Expr> {
        if self.is_zero() {
            return None;
        }
        let (c, m, f) = self.0.num.split_unit();
        let num = self.0.den.mul_mono(&m.inv(), &c.recip());
        Some(Expr::raw(num, f))
    }

    /// Panics on a zero divisor.
    pub fn inv(&self) -> Expr {
        self.try_inv().expect("division by zero")
    }

    pub fn div(&self, other: &Expr) -> Expr {
        self.mul(&other.inv())
    }

    pub fn try_div(&self, other: &Expr) -> Option<Expr> {
        Some(self.mul(&other.try_inv()?))
    }

    /// Integer power; `None` for a negative power of zero.
    pub fn try_pow(&self, n: i64) -> Option<Expr> {
        if n < 0 {
            return self.try_inv()?.try_pow(-n);
        }
        if n == 0 {
            return Some(Expr::one());
        }
        if let Some((m, c)) = self.0.num.as_monomial() {
            if self.0.den.is_one() {
                let c = num_traits::pow::Pow::pow(c, n as u32);
                return Some(Expr::from_poly(Poly::term(m.pow(n), c)));
            }
        }
        let n = n as u32;
        Some(Expr::raw(self.0.num.pow(n), self.0.den.pow(n)))
    }

    pub fn pow(&self, n: i64) -> Expr {
        self.try_pow(n).expect("negative power of zero")
    }

    /// Sum of a sequence.
    pub fn sum<'a>(items: impl IntoIterator<Item = &'a Expr>) -> Expr {
        items.into_iter().fold(Expr::zero(), |acc, e| acc.add(e))
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl From<&Symbol> for Expr {
    fn from(s: &Symbol) -> Expr {
        Expr::sym(s)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                Expr::$f(self, rhs)
            }
        }
        impl ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$f(&self, &rhs)
            }
        }
        impl ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                Expr::$f(&self, rhs)
            }
        }
        impl ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$f(self, &rhs)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_tree())
    }
}

//! Common denominators, term decomposition and coefficient collection.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::gcd::{poly_div_exact, poly_gcd};
use super::poly::{Exp, Mono, Poly};
use super::{Atom, Expr, Symbol};

fn poly_lcm(a: &Poly, b: &Poly) -> Poly {
    let g = poly_gcd(a, b);
    let q = poly_div_exact(b, &g).expect("gcd divides");
    a.mul(&q)
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(exprs: impl IntoIterator<Item = &'a Expr>) -> Expr {
    let mut acc = Poly::one();
    for e in exprs {
        if !e.den().is_one() {
            acc = poly_lcm(&acc, e.den());
        }
    }
    Expr::from_poly(acc)
}

/// Positive rational gcd of the given rationals; one if all vanish.
pub fn rational_gcd<'a>(items: impl IntoIterator<Item = &'a BigRational>) -> BigRational {
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    for c in items {
        if c.is_zero() {
            continue;
        }
        num = num.gcd(c.numer());
        den = den.lcm(c.denom());
    }
    if num.is_zero() {
        BigRational::one()
    } else {
        BigRational::new(num, den)
    }
}

impl Expr {
    /// Monomials and coefficients of a (Laurent) polynomial; `None` for a
    /// proper fraction.
    pub fn terms(&self) -> Option<Vec<(Expr, BigRational)>> {
        if !self.den().is_one() {
            return None;
        }
        Some(self.num().terms.iter().map(|(m, c)| (Expr::from_mono(m.clone()), c.clone())).collect())
    }

    /// Positive rational content of the numerator.
    pub fn numeric_content(&self) -> BigRational {
        self.num().coeff_content()
    }

    /// Sign of the leading numerator coefficient.
    pub fn leading_sign(&self) -> i32 {
        match self.num().lead() {
            Some((_, c)) if c.is_negative() => -1,
            Some(_) => 1,
            None => 0,
        }
    }

    /// Coefficients of `self` as a polynomial in `vars`, keyed by exponent
    /// vectors. `None` if some variable occurs with a negative or fractional
    /// power, inside a kernel or function argument, or in the denominator.
    pub fn coefficients_in(&self, vars: &[Symbol]) -> Option<BTreeMap<Vec<u32>, Expr>> {
        if vars.iter().any(|v| self.den().terms.keys().any(|m| m.0.iter().any(|(a, _)| mentions(a, v)))) {
            return None;
        }
        let den = Expr::from_poly(self.den().clone());
        let mut out: BTreeMap<Vec<u32>, Poly> = BTreeMap::new();
        for (m, c) in &self.num().terms {
            let mut key = vec![0u32; vars.len()];
            let mut rest = Vec::new();
            for (a, e) in &m.0 {
                match vars.iter().position(|v| matches!(a, Atom::Sym(s) if s == v)) {
                    Some(i) => {
                        if !e.is_integer() || e.is_negative() {
                            return None;
                        }
                        key[i] = e.to_integer() as u32;
                    }
                    None => {
                        if vars.iter().any(|v| mentions(a, v)) {
                            return None;
                        }
                        rest.push((a.clone(), *e));
                    }
                }
            }
            out.entry(key).or_insert_with(Poly::zero).add_term(Mono(rest), c.clone());
        }
        Some(out.into_iter().map(|(k, p)| (k, Expr::from_poly(p).div(&den))).filter(|(_, e)| !e.is_zero()).collect())
    }

    /// Groups numerator terms by their monomial in atoms other than `params`
    /// and returns the parameter polynomials. `None` if a parameter occurs
    /// inside another atom or in the denominator.
    pub fn coefficients_over(&self, params: &[Symbol]) -> Option<Vec<Expr>> {
        if params.iter().any(|v| self.den().terms.keys().any(|m| m.0.iter().any(|(a, _)| mentions(a, v)))) {
            return None;
        }
        let mut groups: BTreeMap<Mono, Poly> = BTreeMap::new();
        for (m, c) in &self.num().terms {
            let (mut kept, mut rest) = (Vec::new(), Vec::new());
            for (a, e) in &m.0 {
                match a {
                    Atom::Sym(s) if params.contains(s) => kept.push((a.clone(), *e)),
                    _ if params.iter().any(|v| mentions(a, v)) => return None,
                    _ => rest.push((a.clone(), *e)),
                }
            }
            groups.entry(Mono(rest)).or_insert_with(Poly::zero).add_term(Mono(kept), c.clone());
        }
        Some(groups.into_values().map(Expr::from_poly).filter(|e| !e.is_zero()).collect())
    }

    /// A nonzero rational constant times a product of exponentials.
    pub fn is_unit(&self) -> bool {
        self.den().is_one()
            && self
                .num()
                .as_monomial()
                .is_some_and(|(m, _)| m.0.iter().all(|(a, _)| matches!(a, Atom::Kernel(super::Kernel::Exp, _))))
    }
}

fn mentions(a: &Atom, v: &Symbol) -> bool {
    match a {
        Atom::Sym(s) => s == v,
        _ => Expr::from_mono(Mono::atom(a.clone(), Exp::one())).depends_on(v),
    }
}

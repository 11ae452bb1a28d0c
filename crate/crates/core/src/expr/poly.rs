//! Sparse Laurent polynomials over atoms with rational coefficients.
//!
//! Exponents are small rationals: ordinary atoms only ever carry integer
//! exponents, exponential atoms may carry fractional ones (`exp(u)^(1/2)`).

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, Zero};

use super::Atom;

pub(crate) type Exp = Ratio<i64>;

/// Product of atom powers, sorted by atom, no zero exponents.
#[derive(Clone, PartialEq, Eq, Debug, Default, Hash)]
pub(crate) struct Mono(pub(crate) Vec<(Atom, Exp)>);

impl Mono {
    pub fn one() -> Mono {
        Mono(Vec::new())
    }

    pub fn atom(a: Atom, e: Exp) -> Mono {
        if e.is_zero() {
            Mono::one()
        } else {
            Mono(vec![(a, e)])
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    fn merge(&self, other: &Mono, sign: i64) -> Mono {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < other.0.len() {
            let pick = match (self.0.get(i), other.0.get(j)) {
                (Some((a, _)), Some((b, _))) => a.cmp(b),
                (Some(_), None) => Ordering::Less,
                (None, _) => Ordering::Greater,
            };
            match pick {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    let (b, e) = &other.0[j];
                    out.push((b.clone(), *e * sign));
                    j += 1;
                }
                Ordering::Equal => {
                    let e = self.0[i].1 + other.0[j].1 * sign;
                    if !e.is_zero() {
                        out.push((self.0[i].0.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Mono(out)
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        if self.is_one() {
            return other.clone();
        }
        if other.is_one() {
            return self.clone();
        }
        self.merge(other, 1)
    }

    pub fn div(&self, other: &Mono) -> Mono {
        self.merge(other, -1)
    }

    pub fn inv(&self) -> Mono {
        Mono(self.0.iter().map(|(a, e)| (a.clone(), -*e)).collect())
    }

    pub fn pow(&self, n: i64) -> Mono {
        if n == 0 {
            return Mono::one();
        }
        Mono(self.0.iter().map(|(a, e)| (a.clone(), *e * n)).collect())
    }

    /// Componentwise minimum, absent atoms counting as exponent zero.
    pub fn gcd_low(&self, other: &Mono) -> Mono {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < other.0.len() {
            let pick = match (self.0.get(i), other.0.get(j)) {
                (Some((a, _)), Some((b, _))) => a.cmp(b),
                (Some(_), None) => Ordering::Less,
                (None, _) => Ordering::Greater,
            };
            match pick {
                Ordering::Less => {
                    let (a, e) = &self.0[i];
                    if *e < Exp::zero() {
                        out.push((a.clone(), *e));
                    }
                    i += 1;
                }
                Ordering::Greater => {
                    let (b, e) = &other.0[j];
                    if *e < Exp::zero() {
                        out.push((b.clone(), *e));
                    }
                    j += 1;
                }
                Ordering::Equal => {
                    let e = self.0[i].1.min(other.0[j].1);
                    if !e.is_zero() {
                        out.push((self.0[i].0.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Mono(out)
    }

}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic order on dense exponent vectors; translation invariant.
impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        let (mut i, mut j) = (0, 0);
        let zero = Exp::zero();
        loop {
            match (self.0.get(i), other.0.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some((_, e)), None) => return if *e > zero { Ordering::Greater } else { Ordering::Less },
                (None, Some((_, e))) => return if *e > zero { Ordering::Less } else { Ordering::Greater },
                (Some((a, ea)), Some((b, eb))) => match a.cmp(b) {
                    Ordering::Equal => match ea.cmp(eb) {
                        Ordering::Equal => {
                            i += 1;
                            j += 1;
                        }
                        o => return o,
                    },
                    Ordering::Less => {
                        return if *ea > zero { Ordering::Greater } else { Ordering::Less }
                    }
                    Ordering::Greater => {
                        return if *eb > zero { Ordering::Less } else { Ordering::Greater }
                    }
                },
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default, Hash)]
pub(crate) struct Poly {
    pub(crate) terms: BTreeMap<Mono, BigRational>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn one() -> Poly {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Poly {
        Poly::term(Mono::one(), c)
    }

    pub fn term(m: Mono, c: BigRational) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self.terms.iter().next().map(|(m, c)| m.is_one() && c.is_one()).unwrap_or(false)
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                if m.is_one() {
                    Some(c.clone())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn as_monomial(&self) -> Option<(&Mono, &BigRational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn lead(&self) -> Option<(&Mono, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn add_term(&mut self, m: Mono, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let (mut big, small) = if self.terms.len() >= other.terms.len() {
            (self.clone(), other)
        } else {
            (other.clone(), self)
        };
        for (m, c) in &small.terms {
            big.add_term(m.clone(), c.clone());
        }
        big
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn scale(&self, k: &BigRational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect() }
    }

    pub fn mul_mono(&self, mono: &Mono, k: &BigRational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.mul(mono), c * k)).collect() }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if let Some((m, c)) = other.as_monomial() {
            return self.mul_mono(m, c);
        }
        if let Some((m, c)) = self.as_monomial() {
            return other.mul_mono(m, c);
        }
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Monomial content: the componentwise minimum over all terms.
    pub fn content_mono(&self) -> Mono {
        let mut it = self.terms.keys();
        let first = match it.next() {
            Some(m) => m.clone(),
            None => return Mono::one(),
        };
        let mut acc = first;
        for m in it {
            acc = acc.gcd_low(m);
        }
        acc
    }

    /// Writes `self = c * m * f` with `f` free of monomial content and with
    /// leading coefficient one.
    pub fn split_unit(&self) -> (BigRational, Mono, Poly) {
        let m = self.content_mono();
        let inv = m.inv();
        let shifted = if m.is_one() { self.clone() } else { self.mul_mono(&inv, &BigRational::one()) };
        let c = shifted.lead().map(|(_, c)| c.clone()).unwrap_or_else(BigRational::one);
        let f = if c.is_one() { shifted } else { shifted.scale(&c.recip()) };
        (c, m, f)
    }

    /// Least common denominator and gcd of numerators of the coefficients.
    pub fn coeff_content(&self) -> BigRational {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for c in self.terms.values() {
            num = num_integer::Integer::gcd(&num, c.numer());
            den = num_integer::Integer::lcm(&den, c.denom());
        }
        if num.is_zero() {
            return BigRational::one();
        }
        BigRational::new(num.abs(), den)
    }
}

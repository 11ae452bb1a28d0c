//! Multivariate polynomial gcd and exact division.
//!
//! Laurent polynomials are mapped onto ordinary polynomials with dense
//! nonnegative integer exponents (monomial content stripped, fractional
//! exponential powers rescaled per atom), where the recursive primitive
//! remainder sequence applies.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::poly::{Exp, Mono, Poly};
use super::Atom;

#[derive(Clone, PartialEq, Eq, Debug)]
struct IPoly {
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl IPoly {
    fn zero() -> IPoly {
        IPoly { terms: BTreeMap::new() }
    }

    fn constant(n: usize, c: BigRational) -> IPoly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0; n], c);
        }
        IPoly { terms }
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.keys().all(|k| k.iter().all(|&e| e == 0))
    }

    fn add_term(&mut self, m: Vec<u32>, c: BigRational) {
        use std::collections::btree_map::Entry;
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn sub(&self, other: &IPoly) -> IPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }

    fn mul(&self, other: &IPoly) -> IPoly {
        let mut out = IPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m: Vec<u32> = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    fn scale(&self, k: &BigRational) -> IPoly {
        IPoly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect() }
    }

    fn lead(&self) -> Option<(&Vec<u32>, &BigRational)> {
        self.terms.iter().next_back()
    }

    fn monic(&self) -> IPoly {
        match self.lead() {
            Some((_, c)) if !c.is_one() => self.scale(&c.recip()),
            _ => self.clone(),
        }
    }

    fn degree(&self, v: usize) -> u32 {
        self.terms.keys().map(|m| m[v]).max().unwrap_or(0)
    }

    /// Coefficients in the variable `v`, indexed by degree.
    fn coeffs(&self, v: usize) -> Vec<IPoly> {
        let d = self.degree(v) as usize;
        let mut out = vec![IPoly::zero(); d + 1];
        for (m, c) in &self.terms {
            let mut k = m.clone();
            let e = k[v] as usize;
            k[v] = 0;
            out[e].terms.insert(k, c.clone());
        }
        out
    }

    fn shift(&self, v: usize, e: u32) -> IPoly {
        IPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut k = m.clone();
                    k[v] += e;
                    (k, c.clone())
                })
                .collect(),
        }
    }

    fn min_exps(&self) -> Vec<u32> {
        let mut it = self.terms.keys();
        let mut acc = match it.next() {
            Some(m) => m.clone(),
            None => return Vec::new(),
        };
        for m in it {
            for (a, b) in acc.iter_mut().zip(m) {
                *a = (*a).min(*b);
            }
        }
        acc
    }

    fn div_mono(&self, d: &[u32]) -> IPoly {
        IPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.iter().zip(d).map(|(a, b)| a - b).collect(), c.clone()))
                .collect(),
        }
    }

    fn mul_mono(&self, d: &[u32]) -> IPoly {
        IPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.iter().zip(d).map(|(a, b)| a + b).collect(), c.clone()))
                .collect(),
        }
    }

    /// Exact division by lexicographic reduction; `None` when a remainder is left.
    fn div_exact(&self, d: &IPoly) -> Option<IPoly> {
        let (dl, dc) = d.lead()?;
        let dl = dl.clone();
        let dc_inv = dc.recip();
        let mut r = self.clone();
        let mut q = IPoly::zero();
        while let Some((rl, rc)) = r.lead() {
            if rl.iter().zip(&dl).any(|(a, b)| a < b) {
                return None;
            }
            let t: Vec<u32> = rl.iter().zip(&dl).map(|(a, b)| a - b).collect();
            let tc = rc * &dc_inv;
            let mut sub = IPoly::zero();
            for (m, c) in &d.terms {
                sub.terms.insert(m.iter().zip(&t).map(|(a, b)| a + b).collect(), c * &tc);
            }
            r = r.sub(&sub);
            q.add_term(t, tc);
        }
        Some(q)
    }

    fn content_in(&self, v: usize) -> IPoly {
        let cs = self.coeffs(v);
        let mut g = IPoly::zero();
        for c in cs.into_iter().filter(|c| !c.is_zero()) {
            g = gcd(&g, &c);
            if g.is_constant() {
                break;
            }
        }
        g
    }

    /// Pseudo-remainder of `self` by `b` in variable `v`.
    fn prem(&self, b: &IPoly, v: usize) -> IPoly {
        let db = b.degree(v);
        let lcb = b.coeffs(v).pop().unwrap();
        let mut r = self.clone();
        loop {
            if r.is_zero() {
                return r;
            }
            let dr = r.degree(v);
            if dr < db {
                return r;
            }
            let lcr = r.coeffs(v).pop().unwrap();
            r = r.mul(&lcb).sub(&b.mul(&lcr).shift(v, dr - db));
        }
    }
}

/// Monic gcd of two ordinary polynomials.
fn gcd(a: &IPoly, b: &IPoly) -> IPoly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    let n = a.terms.keys().next().unwrap().len();
    if a.is_constant() || b.is_constant() {
        return IPoly::constant(n, BigRational::one());
    }
    let ma = a.min_exps();
    let mb = b.min_exps();
    let mono: Vec<u32> = ma.iter().zip(&mb).map(|(x, y)| *x.min(y)).collect();
    let a = a.div_mono(&ma);
    let b = b.div_mono(&mb);
    let g = gcd_content_free(&a, &b, n);
    g.mul_mono(&mono)
}

fn gcd_content_free(a: &IPoly, b: &IPoly, n: usize) -> IPoly {
    if a.is_constant() || b.is_constant() {
        return IPoly::constant(n, BigRational::one());
    }
    if a == b {
        return a.monic();
    }
    // A variable present in only one argument cannot occur in the gcd.
    for v in 0..n {
        match (a.degree(v) > 0, b.degree(v) > 0) {
            (true, false) => return gcd(&a.content_in(v), b),
            (false, true) => return gcd(a, &b.content_in(v)),
            _ => {}
        }
    }
    let v = match (0..n).filter(|&v| a.degree(v) > 0).min_by_key(|&v| a.degree(v).max(b.degree(v))) {
        Some(v) => v,
        None => return IPoly::constant(n, BigRational::one()),
    };
    let ca = a.content_in(v);
    let cb = b.content_in(v);
    let c = gcd(&ca, &cb);
    let mut p = a.div_exact(&ca).expect("content divides");
    let mut q = b.div_exact(&cb).expect("content divides");
    if coprime_image(&p, &q, v) {
        return c.monic();
    }
    if p.degree(v) < q.degree(v) {
        std::mem::swap(&mut p, &mut q);
    }
    let g = loop {
        let r = p.prem(&q, v);
        if r.is_zero() {
            break q;
        }
        if r.degree(v) == 0 {
            break IPoly::constant(n, BigRational::one());
        }
        p = q;
        let cr = r.content_in(v);
        q = r.div_exact(&cr).expect("content divides").monic();
    };
    let g = g.div_exact(&g.content_in(v)).expect("content divides");
    c.mul(&g).monic()
}

/// Dense coefficients in `v` after substituting `point` for the other
/// variables.
fn image(p: &IPoly, v: usize, point: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); p.degree(v) as usize + 1];
    for (m, c) in &p.terms {
        let mut t = c.clone();
        for (i, &e) in m.iter().enumerate() {
            if i != v && e > 0 {
                t *= num_traits::pow(point[i].clone(), e as usize);
            }
        }
        out[m[v] as usize] += t;
    }
    out
}

fn uni_gcd_degree(mut a: Vec<BigRational>, mut b: Vec<BigRational>) -> usize {
    let trim = |p: &mut Vec<BigRational>| {
        while p.last().is_some_and(|c| c.is_zero()) {
            p.pop();
        }
    };
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        while a.len() >= b.len() {
            let k = a.last().unwrap() / b.last().unwrap();
            let shift = a.len() - b.len();
            for (i, c) in b.iter().enumerate() {
                a[i + shift] -= &k * c;
            }
            a.pop();
            trim(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

/// True when an image of primitive `p`, `q` at a point keeping both leading
/// coefficients nonzero has a constant gcd in `v`; then so do `p` and `q`.
fn coprime_image(p: &IPoly, q: &IPoly, v: usize) -> bool {
    let n = p.terms.keys().next().map_or(0, Vec::len);
    let (dp, dq) = (p.degree(v) as usize, q.degree(v) as usize);
    for seed in 0..3i64 {
        let point: Vec<BigRational> =
            (0..n).map(|i| BigRational::from_integer((2 + 7 * seed + 3 * i as i64 + (i as i64 * seed) % 5).into())).collect();
        let ip = image(p, v, &point);
        let iq = image(q, v, &point);
        if ip[dp].is_zero() || iq[dq].is_zero() {
            continue;
        }
        return uni_gcd_degree(ip, iq) == 0;
    }
    false
}

/// Shared dense coordinates for a family of Laurent polynomials.
struct Frame {
    atoms: Vec<Atom>,
    scale: Vec<i64>,
}

impl Frame {
    fn new(polys: &[&Poly]) -> Frame {
        let mut map: BTreeMap<Atom, i64> = BTreeMap::new();
        for p in polys {
            for m in p.terms.keys() {
                for (a, e) in &m.0 {
                    let s = map.entry(a.clone()).or_insert(1);
                    *s = s.lcm(e.denom());
                }
            }
        }
        let (atoms, scale) = map.into_iter().unzip();
        Frame { atoms, scale }
    }

    /// `p` must have no monomial content.
    fn to_dense(&self, p: &Poly) -> IPoly {
        let n = self.atoms.len();
        let mut out = IPoly::zero();
        for (m, c) in &p.terms {
            let mut k = vec![0u32; n];
            for (a, e) in &m.0 {
                let i = self.atoms.binary_search(a).expect("atom in frame");
                let scaled = *e * self.scale[i];
                debug_assert!(scaled.is_integer() && *scaled.numer() >= 0);
                k[i] = *scaled.numer() as u32;
            }
            out.terms.insert(k, c.clone());
        }
        out
    }

    fn to_sparse(&self, p: &IPoly) -> Poly {
        let mut out = Poly::zero();
        for (k, c) in &p.terms {
            let mono = Mono(
                k.iter()
                    .enumerate()
                    .filter(|(_, &e)| e != 0)
                    .map(|(i, &e)| (self.atoms[i].clone(), Exp::new(e as i64, self.scale[i])))
                    .collect(),
            );
            out.add_term(mono, c.clone());
        }
        out
    }
}

fn strip(p: &Poly) -> Poly {
    let m = p.content_mono();
    if m.is_one() {
        p.clone()
    } else {
        p.mul_mono(&m.inv(), &BigRational::one())
    }
}

/// Gcd of Laurent polynomials up to units, normalized to have no monomial
/// content and leading coefficient one.
pub(crate) fn poly_gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.split_unit().2;
    }
    if b.is_zero() {
        return a.split_unit().2;
    }
    if a.terms.len() == 1 || b.terms.len() == 1 {
        return Poly::one();
    }
    let a = strip(a);
    let b = strip(b);
    if a.split_unit().2 == b.split_unit().2 {
        return a.split_unit().2;
    }
    let frame = Frame::new(&[&a, &b]);
    let g = gcd(&frame.to_dense(&a), &frame.to_dense(&b));
    frame.to_sparse(&g).split_unit().2
}

/// Exact quotient `a / b` of Laurent polynomials, if it exists.
pub(crate) fn poly_div_exact(a: &Poly, b: &Poly) -> Option<Poly> {
    if b.is_zero() {
        return None;
    }
    if let Some((m, c)) = b.as_monomial() {
        return Some(a.mul_mono(&m.inv(), &c.recip()));
    }
    let ma = a.content_mono();
    let mb = b.content_mono();
    let sa = strip(a);
    let sb = strip(b);
    let frame = Frame::new(&[&sa, &sb]);
    let q = frame.to_dense(&sa).div_exact(&frame.to_dense(&sb))?;
    let shift = ma.div(&mb);
    Some(frame.to_sparse(&q).mul_mono(&shift, &BigRational::one()))
}

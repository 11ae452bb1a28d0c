//! Differentiation, substitution and symbol queries.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::poly::{Exp, Mono, Poly};
use super::{Atom, Expr, Kernel, Opaque, Symbol};

fn exp_to_rational(e: &Exp) -> BigRational {
    BigRational::new(BigInt::from(*e.numer()), BigInt::from(*e.denom()))
}

impl Atom {
    fn depends_on(&self, s: &Symbol) -> bool {
        match self {
            Atom::Sym(t) => t == s,
            Atom::Kernel(_, arg) => arg.depends_on(s),
            Atom::Opaque(o) => o.args.iter().any(|a| a.depends_on(s)),
        }
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Atom::Sym(t) => {
                out.insert(t.clone());
            }
            Atom::Kernel(_, arg) => arg.collect_symbols(out),
            Atom::Opaque(o) => o.args.iter().for_each(|a| a.collect_symbols(out)),
        }
    }

    /// Atoms for which a nonzero polynomial normal form cannot vanish identically.
    fn is_independent(&self) -> bool {
        match self {
            Atom::Sym(_) => true,
            Atom::Kernel(Kernel::Exp, base) => base.den().is_one() && base.only_independent_atoms(),
            Atom::Kernel(..) => false,
            Atom::Opaque(o) => o.args.iter().all(Expr::only_independent_atoms),
        }
    }

    /// `d(atom)/ds / atom`, for atoms other than plain symbols.
    fn log_derivative(&self, s: &Symbol) -> Expr {
        let me = || Expr::from_atom(self.clone());
        match self {
            Atom::Sym(_) => unreachable!("symbols handled by the caller"),
            Atom::Kernel(Kernel::Exp, base) => base.diff(s),
            Atom::Kernel(k, arg) => {
                let da = arg.diff(s);
                let d = match k {
                    Kernel::Log => da.div(arg),
                    Kernel::Sin => Expr::cos(arg).mul(&da),
                    Kernel::Cos => Expr::sin(arg).mul(&da).neg(),
                    Kernel::Arctan => da.div(&Expr::one().add(&arg.mul(arg))),
                    Kernel::Exp => unreachable!(),
                };
                d.div(&me())
            }
            Atom::Opaque(o) => {
                let mut acc = Expr::zero();
                for (j, a) in o.args.iter().enumerate() {
                    let da = a.diff(s);
                    if da.is_zero() {
                        continue;
                    }
                    let mut idx = if o.deriv.is_empty() { vec![0; o.args.len()] } else { o.deriv.clone() };
                    idx[j] += 1;
                    let f = Expr::opaque(o.name.name(), &o.args, &idx);
                    acc = acc.add(&f.mul(&da));
                }
                acc.div(&me())
            }
        }
    }
}

fn diff_poly(p: &Poly, s: &Symbol, cache: &mut BTreeMap<Atom, Expr>) -> Expr {
    let mut plain = Poly::zero();
    let mut other = Expr::zero();
    for (m, c) in &p.terms {
        for (a, e) in &m.0 {
            match a {
                Atom::Sym(t) => {
                    if t == s {
                        let dm = m.div(&Mono::atom(a.clone(), Exp::one()));
                        plain.add_term(dm, c * exp_to_rational(e));
                    }
                }
                _ => {
                    if !a.depends_on(s) {
                        continue;
                    }
                    let ld = cache.entry(a.clone()).or_insert_with(|| a.log_derivative(s)).clone();
                    if ld.is_zero() {
                        continue;
                    }
                    let term = Expr::from_poly(Poly::term(m.clone(), c * exp_to_rational(e)));
                    other = other.add(&term.mul(&ld));
                }
            }
        }
    }
    Expr::from_poly(plain).add(&other)
}

impl Expr {
    pub fn depends_on(&self, s: &Symbol) -> bool {
        let hit = |p: &Poly| p.terms.keys().any(|m| m.0.iter().any(|(a, _)| a.depends_on(s)));
        hit(self.num()) || hit(self.den())
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        for p in [self.num(), self.den()] {
            for m in p.terms.keys() {
                for (a, _) in &m.0 {
                    a.collect_symbols(out);
                }
            }
        }
    }

    /// Every symbol occurring anywhere, including inside kernel and function arguments.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    /// Opaque function applications occurring anywhere, as `(name, args)`.
    pub fn function_calls(&self) -> BTreeSet<(String, Vec<Expr>)> {
        fn walk(e: &Expr, out: &mut BTreeSet<(String, Vec<Expr>)>) {
            for p in [e.num(), e.den()] {
                for m in p.terms.keys() {
                    for (a, _) in &m.0 {
                        match a {
                            Atom::Sym(_) => {}
                            Atom::Kernel(_, arg) => walk(arg, out),
                            Atom::Opaque(o) => {
                                out.insert((o.name.name().to_string(), o.args.clone()));
                                o.args.iter().for_each(|x| walk(x, out));
                            }
                        }
                    }
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut out);
        out
    }

    /// Names of opaque functions occurring anywhere.
    pub fn function_names(&self) -> BTreeSet<String> {
        self.function_calls().into_iter().map(|(n, _)| n).collect()
    }

    /// True when the expression contains no kernels or opaque functions.
    pub fn is_rational_function(&self) -> bool {
        [self.num(), self.den()]
            .iter()
            .all(|p| p.terms.keys().all(|m| m.0.iter().all(|(a, _)| matches!(a, Atom::Sym(_)))))
    }

    fn only_independent_atoms(&self) -> bool {
        [self.num(), self.den()].iter().all(|p| p.terms.keys().all(|m| m.0.iter().all(|(a, _)| a.is_independent())))
    }

    /// True when the normal form alone certifies a nonzero function: the
    /// numerator is nonzero and built only from symbols, exponentials of
    /// polynomials and opaque functions of such.
    pub fn provably_nonzero(&self) -> bool {
        !self.is_zero() && self.only_independent_atoms()
    }

    /// Partial derivative with respect to a symbol.
    pub fn diff(&self, s: &Symbol) -> Expr {
        if !self.depends_on(s) {
            return Expr::zero();
        }
        let mut cache = BTreeMap::new();
        let dn = diff_poly(self.num(), s, &mut cache);
        if self.den().is_one() {
            return dn;
        }
        let dd = diff_poly(self.den(), s, &mut cache);
        let den = Expr::from_poly(self.den().clone());
        let num = Expr::from_poly(self.num().clone());
        dn.div(&den).sub(&num.mul(&dd).div(&den.mul(&den)))
    }

    /// Simultaneous substitution of symbols.
    pub fn subs(&self, map: &BTreeMap<Symbol, Expr>) -> Expr {
        if map.is_empty() {
            return self.clone();
        }
        let touched = self.symbols().iter().any(|s| map.contains_key(s));
        if !touched {
            return self.clone();
        }
        let mut cache: BTreeMap<Atom, Expr> = BTreeMap::new();
        let n = subs_poly(self.num(), map, &mut cache);
        if self.den().is_one() {
            return n;
        }
        let d = subs_poly(self.den(), map, &mut cache);
        n.div(&d)
    }

    /// Substitution that reports a zero denominator instead of panicking.
    pub fn try_subs(&self, map: &BTreeMap<Symbol, Expr>) -> Option<Expr> {
        if map.is_empty() {
            return Some(self.clone());
        }
        let mut cache: BTreeMap<Atom, Expr> = BTreeMap::new();
        let n = subs_poly(self.num(), map, &mut cache);
        if self.den().is_one() {
            return Some(n);
        }
        let d = subs_poly(self.den(), map, &mut cache);
        n.try_div(&d)
    }

    /// Substitutes a single symbol.
    pub fn subs1(&self, s: &Symbol, value: &Expr) -> Expr {
        let mut m = BTreeMap::new();
        m.insert(s.clone(), value.clone());
        self.subs(&m)
    }
}

fn subs_atom(a: &Atom, map: &BTreeMap<Symbol, Expr>) -> Expr {
    match a {
        Atom::Sym(s) => map.get(s).cloned().unwrap_or_else(|| Expr::sym(s)),
        Atom::Kernel(k, arg) => Expr::kernel(*k, &arg.subs(map)),
        Atom::Opaque(o) => {
            let args: Vec<Expr> = o.args.iter().map(|x| x.subs(map)).collect();
            Expr::from_atom(Atom::Opaque(Opaque { name: o.name.clone(), deriv: o.deriv.clone(), args }))
        }
    }
}

fn subs_poly(p: &Poly, map: &BTreeMap<Symbol, Expr>, cache: &mut BTreeMap<Atom, Expr>) -> Expr {
    let mut acc = Expr::zero();
    for (m, c) in &p.terms {
        let mut term = Expr::rational(c.clone());
        let mut exp_arg = Expr::zero();
        let mut kept = Mono::one();
        for (a, e) in &m.0 {
            if !a_touched(a, map) {
                kept = kept.mul(&Mono::atom(a.clone(), *e));
                continue;
            }
            if let Atom::Kernel(Kernel::Exp, base) = a {
                exp_arg = exp_arg.add(&base.subs(map).scale(&exp_to_rational(e)));
                continue;
            }
            let r = cache.entry(a.clone()).or_insert_with(|| subs_atom(a, map)).clone();
            term = term.mul(&r.pow(e.to_integer()));
        }
        if !kept.is_one() {
            term = term.mul(&Expr::from_mono(kept));
        }
        if !exp_arg.is_zero() {
            term = term.mul(&Expr::exp(&exp_arg));
        }
        acc = acc.add(&term);
    }
    acc
}

fn a_touched(a: &Atom, map: &BTreeMap<Symbol, Expr>) -> bool {
    match a {
        Atom::Sym(s) => map.contains_key(s),
        Atom::Kernel(_, arg) => arg.symbols().iter().any(|s| map.contains_key(s)),
        Atom::Opaque(o) => o.args.iter().any(|x| x.symbols().iter().any(|s| map.contains_key(s))),
    }
}

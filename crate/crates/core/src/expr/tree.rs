//! Plain expression trees: the parser's output and the printable view of a
//! normal form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::{Mono, Poly};
use super::{Atom, Expr, Kernel};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tree {
    Num(BigRational),
    Sym(String),
    Add(Vec<Tree>),
    Mul(Vec<Tree>),
    Pow(Box<Tree>, i64),
    /// Kernel or opaque function application.
    Call(String, Vec<Tree>),
    /// Formal derivative of an opaque function.
    Deriv(String, Vec<u32>, Vec<Tree>),
}

impl Tree {
    /// Builds the normal form; `None` on division by zero.
    pub fn normalize(&self) -> Option<Expr> {
        Some(match self {
            Tree::Num(c) => Expr::rational(c.clone()),
            Tree::Sym(s) => Expr::symbol(s),
            Tree::Add(items) => {
                let mut acc = Expr::zero();
                for t in items {
                    acc = acc.add(&t.normalize()?);
                }
                acc
            }
            Tree::Mul(items) => {
                let mut acc = Expr::one();
                for t in items {
                    acc = acc.mul(&t.normalize()?);
                }
                acc
            }
            Tree::Pow(b, n) => b.normalize()?.try_pow(*n)?,
            Tree::Call(name, args) => {
                let args: Option<Vec<Expr>> = args.iter().map(Tree::normalize).collect();
                let args = args?;
                match Kernel::from_name(name) {
                    Some(k) if args.len() == 1 => Expr::kernel(k, &args[0]),
                    _ => Expr::opaque(name, &args, &[]),
                }
            }
            Tree::Deriv(name, idx, args) => {
                let args: Option<Vec<Expr>> = args.iter().map(Tree::normalize).collect();
                Expr::opaque(name, &args?, idx)
            }
        })
    }

    fn is_num(&self, c: i64) -> bool {
        matches!(self, Tree::Num(n) if *n == BigRational::from_integer(BigInt::from(c)))
    }
}

fn mono_is_exp(a: &Atom) -> bool {
    matches!(a, Atom::Kernel(Kernel::Exp, _))
}

fn atom_tree(a: &Atom) -> Tree {
    match a {
        Atom::Sym(s) => Tree::Sym(s.name().to_string()),
        Atom::Kernel(k, arg) => Tree::Call(k.name().to_string(), vec![arg.to_tree()]),
        Atom::Opaque(o) => {
            let args = o.args.iter().map(Expr::to_tree).collect();
            if o.deriv.is_empty() {
                Tree::Call(o.name.name().to_string(), args)
            } else {
                Tree::Deriv(o.name.name().to_string(), o.deriv.clone(), args)
            }
        }
    }
}

/// Factors of a monomial with nonnegative ordinary exponents; all
/// exponential atoms are merged into one `exp(...)` call.
fn mono_factors(m: &Mono) -> Vec<Tree> {
    let mut out = Vec::new();
    let mut exp_arg = Expr::zero();
    let mut has_exp = false;
    for (a, e) in &m.0 {
        if let Atom::Kernel(Kernel::Exp, base) = a {
            has_exp = true;
            let c = BigRational::new(BigInt::from(*e.numer()), BigInt::from(*e.denom()));
            exp_arg = exp_arg.add(&base.scale(&c));
            continue;
        }
        let n = e.to_integer();
        let t = atom_tree(a);
        out.push(if n == 1 { t } else { Tree::Pow(Box::new(t), n) });
    }
    if has_exp {
        out.push(Tree::Call("exp".into(), vec![exp_arg.to_tree()]));
    }
    out
}

fn term_tree(m: &Mono, c: &BigRational) -> Tree {
    let mut factors = mono_factors(m);
    if factors.is_empty() {
        return Tree::Num(c.clone());
    }
    if !c.is_one() {
        factors.insert(0, Tree::Num(c.clone()));
    }
    if factors.len() == 1 {
        factors.pop().unwrap()
    } else {
        Tree::Mul(factors)
    }
}

fn poly_tree(p: &Poly) -> Tree {
    let mut terms: Vec<Tree> = p.terms.iter().rev().map(|(m, c)| term_tree(m, c)).collect();
    match terms.len() {
        0 => Tree::Num(BigRational::zero()),
        1 => terms.pop().unwrap(),
        _ => Tree::Add(terms),
    }
}

impl Expr {
    /// Tree view of the normal form. Negative ordinary powers are moved
    /// below the fraction bar.
    pub fn to_tree(&self) -> Tree {
        if self.is_zero() {
            return Tree::Num(BigRational::zero());
        }
        let content = self.num().content_mono();
        let neg = Mono(
            content.0.iter().filter(|(a, e)| !mono_is_exp(a) && e.is_negative()).cloned().collect(),
        );
        let (num, den) = if neg.is_one() {
            (self.num().clone(), self.den().clone())
        } else {
            let pos = neg.inv();
            let one = BigRational::one();
            (self.num().mul_mono(&pos, &one), self.den().mul_mono(&pos, &one))
        };
        let top = poly_tree(&num);
        if den.is_one() {
            return top;
        }
        let bottom = Tree::Pow(Box::new(poly_tree(&den)), -1);
        let mut factors = match top {
            Tree::Mul(fs) => fs,
            t if t.is_num(1) => Vec::new(),
            t => vec![t],
        };
        factors.push(bottom);
        Tree::Mul(factors)
    }
}

//! Text rendering in the same grammar the parser accepts.

use std::fmt::{self, Write};

use num_traits::{One, Signed};

use super::Tree;

const ADD: u8 = 1;
const MUL: u8 = 2;
const POW: u8 = 3;
const ATOM: u8 = 4;

fn prec(t: &Tree) -> u8 {
    match t {
        Tree::Add(_) => ADD,
        Tree::Mul(_) => MUL,
        Tree::Pow(_, n) if *n < 0 => MUL,
        Tree::Pow(..) => POW,
        Tree::Num(c) if c.is_negative() || !c.is_integer() => MUL,
        _ => ATOM,
    }
}

fn write_wrapped(out: &mut String, t: &Tree, min: u8) {
    if prec(t) < min {
        out.push('(');
        write_tree(out, t);
        out.push(')');
    } else {
        write_tree(out, t);
    }
}

fn write_args(out: &mut String, args: &[Tree]) {
    out.push('(');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_tree(out, a);
    }
    out.push(')');
}

fn write_mul(out: &mut String, factors: &[Tree]) {
    let mut top: Vec<&Tree> = Vec::new();
    let mut bottom: Vec<Tree> = Vec::new();
    for f in factors {
        match f {
            Tree::Pow(b, n) if *n < 0 => {
                bottom.push(if *n == -1 { (**b).clone() } else { Tree::Pow(b.clone(), -n) })
            }
            _ => top.push(f),
        }
    }
    let mut rest = &top[..];
    if let Some(Tree::Num(c)) = top.first() {
        if top.len() > 1 && (*c == -num_rational::BigRational::one()) {
            out.push('-');
            rest = &top[1..];
        }
    }
    if rest.is_empty() {
        out.push('1');
    }
    for (i, f) in rest.iter().enumerate() {
        if i > 0 {
            out.push('*');
        }
        // A leading coefficient may be negative or fractional without parens.
        if i == 0 {
            if let Tree::Num(_) = f {
                write_tree(out, f);
                continue;
            }
        }
        write_wrapped(out, f, POW);
    }
    match bottom.len() {
        0 => {}
        1 => {
            out.push('/');
            write_wrapped(out, &bottom[0], POW);
        }
        _ => {
            out.push_str("/(");
            for (i, f) in bottom.iter().enumerate() {
                if i > 0 {
                    out.push('*');
                }
                write_wrapped(out, f, POW);
            }
            out.push(')');
        }
    }
}

pub(crate) fn write_tree(out: &mut String, t: &Tree) {
    match t {
        Tree::Num(c) => {
            let _ = write!(out, "{}", c);
        }
        Tree::Sym(s) => out.push_str(s),
        Tree::Add(items) => {
            for (i, item) in items.iter().enumerate() {
                let mut s = String::new();
                write_wrapped(&mut s, item, MUL);
                if i == 0 {
                    out.push_str(&s);
                } else if let Some(rest) = s.strip_prefix('-') {
                    out.push_str(" - ");
                    out.push_str(rest);
                } else {
                    out.push_str(" + ");
                    out.push_str(&s);
                }
            }
        }
        Tree::Mul(factors) => write_mul(out, factors),
        Tree::Pow(b, n) => {
            if *n < 0 {
                write_mul(out, std::slice::from_ref(t));
                return;
            }
            write_wrapped(out, b, ATOM);
            let _ = write!(out, "^{}", n);
        }
        Tree::Call(name, args) => {
            out.push_str(name);
            write_args(out, args);
        }
        Tree::Deriv(name, idx, args) => {
            out.push_str(name);
            out.push('[');
            for (i, d) in idx.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}", d);
            }
            out.push(']');
            write_args(out, args);
        }
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_tree(&mut s, self);
        f.write_str(&s)
    }
}

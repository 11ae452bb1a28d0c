//! Recursive-descent parser.
//!
//! ```text
//! expr  := term (('+'|'-') term)*
//! term  := unary (('*'|'/') unary)*
//! unary := ('-'|'+') unary | power
//! power := primary ('^' int)?        int may be signed, optionally in parens
//! primary := number | name | name '(' args ')' | name '[' ints ']' '(' args ')' | '(' expr ')'
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use super::{Expr, Kernel, SymbolKind, SymbolTable, Tree};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UndeclaredSymbol(String),
    ArityMismatch { name: String, expected: usize, found: usize },
    DivisionByZero,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{kind:?} at offset {offset}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    table: &'a SymbolTable,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn err<T>(&self, kind: ParseErrorKind) -> PResult<T> {
        Err(ParseError { kind, offset: self.pos })
    }

    fn syntax<T>(&self, msg: &str) -> PResult<T> {
        self.err(ParseErrorKind::Syntax(msg.to_string()))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> PResult<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.syntax(&format!("expected '{}'", c as char))
        }
    }

    fn expr(&mut self) -> PResult<Tree> {
        let mut items = vec![self.term()?];
        loop {
            if self.eat(b'+') {
                items.push(self.term()?);
            } else if self.eat(b'-') {
                let t = self.term()?;
                items.push(Tree::Mul(vec![Tree::Num(BigRational::from_integer((-1).into())), t]));
            } else {
                break;
            }
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Tree::Add(items) })
    }

    fn term(&mut self) -> PResult<Tree> {
        let mut items = vec![self.unary()?];
        loop {
            if self.eat(b'*') {
                items.push(self.unary()?);
            } else if self.peek() == Some(b'/') {
                self.pos += 1;
                let at = self.pos;
                let d = self.unary()?;
                if let Tree::Num(c) = &d {
                    if num_traits::Zero::is_zero(c) {
                        return Err(ParseError { kind: ParseErrorKind::DivisionByZero, offset: at });
                    }
                }
                items.push(Tree::Pow(Box::new(d), -1));
            } else {
                break;
            }
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Tree::Mul(items) })
    }

    fn unary(&mut self) -> PResult<Tree> {
        if self.eat(b'-') {
            let t = self.unary()?;
            return Ok(match t {
                Tree::Num(c) => Tree::Num(-c),
                t => Tree::Mul(vec![Tree::Num(BigRational::from_integer((-1).into())), t]),
            });
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn integer(&mut self) -> PResult<i64> {
        self.skip_ws();
        let neg = self.eat(b'-');
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.syntax("expected integer");
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let n: i64 = match s.parse() {
            Ok(n) => n,
            Err(_) => return self.syntax("integer out of range"),
        };
        Ok(if neg { -n } else { n })
    }

    fn power(&mut self) -> PResult<Tree> {
        let base = self.primary()?;
        if self.eat(b'^') {
            let n = if self.eat(b'(') {
                let n = self.integer()?;
                self.expect(b')')?;
                n
            } else {
                self.integer()?
            };
            return Ok(Tree::Pow(Box::new(base), n));
        }
        Ok(base)
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string()
    }

    fn args(&mut self) -> PResult<Vec<Tree>> {
        self.expect(b'(')?;
        let mut out = vec![self.expr()?];
        while self.eat(b',') {
            out.push(self.expr()?);
        }
        self.expect(b')')?;
        Ok(out)
    }

    fn check_arity(&self, name: &str, found: usize, at: usize) -> PResult<()> {
        let expected = match Kernel::from_name(name) {
            Some(_) => 1,
            None => match self.table.kind(name) {
                Some(SymbolKind::Function(n)) => n,
                _ => {
                    return Err(ParseError { kind: ParseErrorKind::UndeclaredSymbol(name.into()), offset: at });
                }
            },
        };
        if expected != found {
            return Err(ParseError {
                kind: ParseErrorKind::ArityMismatch { name: name.into(), expected, found },
                offset: at,
            });
        }
        Ok(())
    }

    fn primary(&mut self) -> PResult<Tree> {
        let c = match self.peek() {
            Some(c) => c,
            None => return self.syntax("unexpected end of input"),
        };
        if c == b'(' {
            self.pos += 1;
            let t = self.expr()?;
            self.expect(b')')?;
            return Ok(t);
        }
        if c.is_ascii_digit() {
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            let n: BigInt = s.parse().unwrap();
            return Ok(Tree::Num(BigRational::from_integer(n)));
        }
        if c.is_ascii_alphabetic() {
            let at = self.pos;
            let name = self.ident();
            if self.peek() == Some(b'[') {
                self.pos += 1;
                let mut idx = Vec::new();
                loop {
                    let n = self.integer()?;
                    if n < 0 {
                        return self.syntax("negative derivative order");
                    }
                    idx.push(n as u32);
                    if !self.eat(b',') {
                        break;
                    }
                }
                self.expect(b']')?;
                let args = self.args()?;
                self.check_arity(&name, args.len(), at)?;
                if Kernel::from_name(&name).is_some() {
                    return Err(ParseError { kind: ParseErrorKind::Syntax("derivative of a kernel".into()), offset: at });
                }
                if idx.len() != args.len() {
                    return Err(ParseError {
                        kind: ParseErrorKind::ArityMismatch { name, expected: args.len(), found: idx.len() },
                        offset: at,
                    });
                }
                return Ok(Tree::Deriv(name, idx, args));
            }
            if self.peek() == Some(b'(') {
                let args = self.args()?;
                self.check_arity(&name, args.len(), at)?;
                return Ok(Tree::Call(name, args));
            }
            return match self.table.resolve(&name) {
                Some(canon) => Ok(Tree::Sym(canon)),
                None => Err(ParseError { kind: ParseErrorKind::UndeclaredSymbol(name), offset: at }),
            };
        }
        self.syntax(&format!("unexpected character '{}'", c as char))
    }
}

/// Parses text into a tree, resolving names against `table`.
pub fn parse_tree(text: &str, table: &SymbolTable) -> Result<Tree, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, table };
    let t = p.expr()?;
    if p.peek().is_some() {
        return p.syntax("trailing input");
    }
    Ok(t)
}

/// Parses and normalizes.
pub fn parse(text: &str, table: &SymbolTable) -> Result<Expr, ParseError> {
    let t = parse_tree(text, table)?;
    t.normalize().ok_or(ParseError { kind: ParseErrorKind::DivisionByZero, offset: 0 })
}

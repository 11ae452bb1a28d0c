//! Numeric evaluation and the randomized zero test.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::poly::Poly;
use super::{Atom, Expr, Kernel, Symbol};

/// Numeric definition of an opaque function: `(args, derivative multi-index)`.
pub type OpaqueFn = Arc<dyn Fn(&[f64], &[u32]) -> Option<f64> + Send + Sync>;

#[derive(Clone, Default)]
pub struct OpaqueDefs {
    fns: BTreeMap<String, OpaqueFn>,
}

impl OpaqueDefs {
    pub fn new() -> OpaqueDefs {
        OpaqueDefs::default()
    }

    pub fn insert(&mut self, name: &str, f: OpaqueFn) -> &mut Self {
        self.fns.insert(name.to_string(), f);
        self
    }

    pub fn get(&self, name: &str) -> Option<&OpaqueFn> {
        self.fns.get(name)
    }
}

impl fmt::Debug for OpaqueDefs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.fns.keys()).finish()
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("no value bound for symbol {0}")]
    Unbound(String),
    #[error("singular point")]
    SingularPoint,
    #[error("no numeric definition for function {0}")]
    UndefinedFunction(String),
    #[error("non-finite value")]
    NonFinite,
    #[error("no nonsingular sample point found")]
    SingularDomain,
}

#[derive(Clone, Debug)]
enum Value {
    Exact(BigRational),
    Float(f64),
}

impl Value {
    fn f(&self) -> f64 {
        match self {
            Value::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Value::Float(x) => *x,
        }
    }

    fn add(self, o: Value) -> Value {
        match (self, o) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a + b),
            (a, b) => Value::Float(a.f() + b.f()),
        }
    }

    fn mul(self, o: &Value) -> Value {
        match (self, o) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a * b),
            (a, b) => Value::Float(a.f() * b.f()),
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Value::Exact(r) => r.is_zero(),
            Value::Float(x) => *x == 0.0,
        }
    }

    fn powi(&self, n: i64) -> Result<Value, EvalError> {
        if n < 0 && self.is_zero() {
            return Err(EvalError::SingularPoint);
        }
        Ok(match self {
            Value::Exact(r) => {
                let p = num_traits::pow::Pow::pow(r, n.unsigned_abs() as u32);
                Value::Exact(if n < 0 { p.recip() } else { p })
            }
            Value::Float(x) => Value::Float(x.powi(n as i32)),
        })
    }
}

enum Lookup<'a> {
    Exact(&'a BTreeMap<Symbol, BigRational>),
    Float(&'a dyn Fn(&Symbol) -> Option<f64>),
}

struct Evaluator<'a> {
    lookup: Lookup<'a>,
    defs: &'a OpaqueDefs,
    /// Random stand-ins for undefined opaque functions, used by the zero test.
    generic: Option<(&'a mut ChaCha8Rng, BTreeMap<Atom, f64>)>,
}

fn exp_value(e: &num_rational::Ratio<i64>) -> f64 {
    *e.numer() as f64 / *e.denom() as f64
}

impl<'a> Evaluator<'a> {
    fn expr(&mut self, e: &Expr) -> Result<Value, EvalError> {
        let n = self.poly(e.num())?;
        if e.den().is_one() {
            return Ok(n);
        }
        let d = self.poly(e.den())?;
        if d.is_zero() || d.f().abs() < 1e-300 {
            return Err(EvalError::SingularPoint);
        }
        Ok(match (n, d) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a / b),
            (a, b) => Value::Float(a.f() / b.f()),
        })
    }

    fn poly(&mut self, p: &Poly) -> Result<Value, EvalError> {
        let mut acc = Value::Exact(BigRational::zero());
        let mut atoms: BTreeMap<&Atom, Value> = BTreeMap::new();
        for (m, c) in &p.terms {
            let mut t = Value::Exact(c.clone());
            for (a, e) in &m.0 {
                if let Atom::Kernel(Kernel::Exp, base) = a {
                    let b = self.expr(base)?.f();
                    t = t.mul(&Value::Float((exp_value(e) * b).exp()));
                    continue;
                }
                let v = match atoms.get(a) {
                    Some(v) => v.clone(),
                    None => {
                        let v = self.atom(a)?;
                        atoms.insert(a, v.clone());
                        v
                    }
                };
                t = t.mul(&v.powi(e.to_integer())?);
            }
            acc = acc.add(t);
        }
        Ok(acc)
    }

    fn atom(&mut self, a: &Atom) -> Result<Value, EvalError> {
        match a {
            Atom::Sym(s) => match &self.lookup {
                Lookup::Exact(m) => m.get(s).cloned().map(Value::Exact).ok_or_else(|| EvalError::Unbound(s.to_string())),
                Lookup::Float(f) => f(s).map(Value::Float).ok_or_else(|| EvalError::Unbound(s.to_string())),
            },
            Atom::Kernel(k, arg) => {
                let x = self.expr(arg)?.f();
                let y = match k {
                    Kernel::Exp => x.exp(),
                    Kernel::Log => {
                        if x <= 0.0 {
                            return Err(EvalError::SingularPoint);
                        }
                        x.ln()
                    }
                    Kernel::Sin => x.sin(),
                    Kernel::Cos => x.cos(),
                    Kernel::Arctan => x.atan(),
                };
                Ok(Value::Float(y))
            }
            Atom::Opaque(o) => {
                let mut args = Vec::with_capacity(o.args.len());
                for x in &o.args {
                    args.push(self.expr(x)?.f());
                }
                if let Some(f) = self.defs.get(o.name.name()) {
                    let idx = if o.deriv.is_empty() { vec![0; args.len()] } else { o.deriv.clone() };
                    return f(&args, &idx).map(Value::Float).ok_or(EvalError::SingularPoint);
                }
                match &mut self.generic {
                    Some((rng, cache)) => {
                        if let Some(v) = cache.get(a) {
                            return Ok(Value::Float(*v));
                        }
                        let v = sample_rational(rng).to_f64().unwrap();
                        cache.insert(a.clone(), v);
                        Ok(Value::Float(v))
                    }
                    None => Err(EvalError::UndefinedFunction(o.name.to_string())),
                }
            }
        }
    }
}

fn finite(v: Value) -> Result<f64, EvalError> {
    let x = v.f();
    if x.is_finite() {
        Ok(x)
    } else {
        Err(EvalError::NonFinite)
    }
}

/// A rational `±p/q` with `1 <= p, q <= 64`.
pub(crate) fn sample_rational(rng: &mut ChaCha8Rng) -> BigRational {
    let p: i64 = rng.gen_range(1..=64);
    let q: i64 = rng.gen_range(1..=64);
    let s: i64 = if rng.gen_bool(0.5) { 1 } else { -1 };
    BigRational::new(BigInt::from(s * p), BigInt::from(q))
}

/// Random rational values for `syms` at which every `deny` expression has
/// magnitude above `1e-3`. `None` after `attempts` rejected draws.
pub fn sample_point(
    syms: &BTreeSet<Symbol>,
    seed: u64,
    deny: &[Expr],
    defs: &OpaqueDefs,
    attempts: usize,
) -> Option<BTreeMap<Symbol, BigRational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..attempts).find_map(|_| {
        let point: BTreeMap<Symbol, BigRational> = syms.iter().map(|s| (s.clone(), sample_rational(&mut rng))).collect();
        deny.iter()
            .all(|d| d.eval_numeric(&point, defs).is_ok_and(|v| v.abs() > DENY_THRESHOLD))
            .then_some(point)
    })
}

impl Expr {
    /// Evaluates at a rational point; arithmetic stays exact until a kernel
    /// or opaque function forces floating point.
    pub fn eval_numeric(&self, point: &BTreeMap<Symbol, BigRational>, defs: &OpaqueDefs) -> Result<f64, EvalError> {
        let mut ev = Evaluator { lookup: Lookup::Exact(point), defs, generic: None };
        finite(ev.expr(self)?)
    }

    /// Floating-point evaluation with symbol values supplied by `lookup`.
    pub fn eval_with(&self, lookup: &dyn Fn(&Symbol) -> Option<f64>, defs: &OpaqueDefs) -> Result<f64, EvalError> {
        let mut ev = Evaluator { lookup: Lookup::Float(lookup), defs, generic: None };
        finite(ev.expr(self)?)
    }

    pub fn eval_f64(&self, point: &BTreeMap<Symbol, f64>, defs: &OpaqueDefs) -> Result<f64, EvalError> {
        self.eval_with(&|s| point.get(s).copied(), defs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ZeroVerdict {
    Zero,
    NonZero(BTreeMap<Symbol, BigRational>),
    Unknown,
}

impl ZeroVerdict {
    pub fn is_zero(&self) -> bool {
        matches!(self, ZeroVerdict::Zero)
    }
}

/// Configuration of the zero test.
///
/// The verdict is `Zero` exactly when the normal form vanishes. Otherwise
/// the expression is sampled at random rational points and the first sample
/// with magnitude above `1e-9` is returned as a witness; if every sample
/// vanishes the verdict is `Unknown`.
#[derive(Clone, Debug)]
pub struct ZeroTest {
    pub trials: usize,
    pub seed: u64,
    /// Sample points where any of these has magnitude `<= 1e-3` are rejected.
    pub deny: Vec<Expr>,
    pub defs: OpaqueDefs,
}

impl Default for ZeroTest {
    fn default() -> Self {
        ZeroTest { trials: 20, seed: 0, deny: Vec::new(), defs: OpaqueDefs::new() }
    }
}

pub(crate) const WITNESS_THRESHOLD: f64 = 1e-9;
const DENY_THRESHOLD: f64 = 1e-3;

impl ZeroTest {
    pub fn new(trials: usize, seed: u64) -> ZeroTest {
        ZeroTest { trials, seed, ..ZeroTest::default() }
    }

    pub fn with_deny(mut self, deny: Vec<Expr>) -> ZeroTest {
        self.deny = deny;
        self
    }

    pub fn check(&self, e: &Expr) -> Result<ZeroVerdict, EvalError> {
        if e.is_zero() {
            return Ok(ZeroVerdict::Zero);
        }
        let mut syms: BTreeSet<Symbol> = e.symbols();
        for d in &self.deny {
            syms.extend(d.symbols());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let max_attempts = 10 * self.trials.max(1);
        let (mut ok, mut attempts) = (0usize, 0usize);
        while ok < self.trials && attempts < max_attempts {
            attempts += 1;
            let point: BTreeMap<Symbol, BigRational> = syms.iter().map(|s| (s.clone(), sample_rational(&mut rng))).collect();
            let mut gen_rng = ChaCha8Rng::seed_from_u64(rng.gen());
            let value_at = |x: &Expr, rng: &mut ChaCha8Rng| -> Result<f64, EvalError> {
                let mut ev = Evaluator {
                    lookup: Lookup::Exact(&point),
                    defs: &self.defs,
                    generic: Some((rng, BTreeMap::new())),
                };
                finite(ev.expr(x)?)
            };
            let mut denied = false;
            for d in &self.deny {
                match value_at(d, &mut gen_rng.clone()) {
                    Ok(v) if v.abs() > DENY_THRESHOLD => {}
                    _ => {
                        denied = true;
                        break;
                    }
                }
            }
            if denied {
                continue;
            }
            match value_at(e, &mut gen_rng) {
                Ok(v) => {
                    ok += 1;
                    if v.abs() > WITNESS_THRESHOLD {
                        return Ok(ZeroVerdict::NonZero(point));
                    }
                }
                Err(EvalError::SingularPoint | EvalError::NonFinite) => continue,
                Err(err) => return Err(err),
            }
        }
        if ok == 0 {
            return Err(EvalError::SingularDomain);
        }
        Ok(ZeroVerdict::Unknown)
    }
}

//! Jet coordinates, the total derivative and vector fields on `J^n`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{parse, Expr, ParseError, Symbol, SymbolKind, SymbolTable, ZeroTest, ZeroVerdict};

#[derive(Debug, PartialEq, Eq)]
struct JetInner {
    independent: String,
    dependents: Vec<String>,
    order: usize,
    params: Vec<String>,
    functions: Vec<(String, usize)>,
}

/// Independent variable, dependent variables and a working order.
///
/// Jet coordinates are the symbols `u` (order zero) and `u_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetContext(Arc<JetInner>);

impl JetContext {
    pub fn new(independent: &str, dependents: &[&str], order: usize) -> JetContext {
        JetContext(Arc::new(JetInner {
            independent: independent.to_string(),
            dependents: dependents.iter().map(|s| s.to_string()).collect(),
            order,
            params: Vec::new(),
            functions: Vec::new(),
        }))
    }

    pub fn with_params(&self, params: &[&str]) -> JetContext {
        let mut inner = self.inner_clone();
        inner.params = params.iter().map(|s| s.to_string()).collect();
        JetContext(Arc::new(inner))
    }

    pub fn with_functions(&self, functions: &[(&str, usize)]) -> JetContext {
        let mut inner = self.inner_clone();
        inner.functions = functions.iter().map(|(s, n)| (s.to_string(), *n)).collect();
        JetContext(Arc::new(inner))
    }

    pub fn with_order(&self, order: usize) -> JetContext {
        let mut inner = self.inner_clone();
        inner.order = order;
        JetContext(Arc::new(inner))
    }

    fn inner_clone(&self) -> JetInner {
        JetInner {
            independent: self.0.independent.clone(),
            dependents: self.0.dependents.clone(),
            order: self.0.order,
            params: self.0.params.clone(),
            functions: self.0.functions.clone(),
        }
    }

    pub fn independent(&self) -> &str {
        &self.0.independent
    }

    pub fn dependents(&self) -> &[String] {
        &self.0.dependents
    }

    pub fn params(&self) -> &[String] {
        &self.0.params
    }

    pub fn functions(&self) -> &[(String, usize)] {
        &self.0.functions
    }

    /// Number of dependent variables.
    pub fn p(&self) -> usize {
        self.0.dependents.len()
    }

    pub fn order(&self) -> usize {
        self.0.order
    }

    pub fn x(&self) -> Symbol {
        Symbol::new(&self.0.independent)
    }

    pub fn x_expr(&self) -> Expr {
        Expr::sym(&self.x())
    }

    pub fn coord(&self, a: usize, k: usize) -> Symbol {
        let base = &self.0.dependents[a];
        if k == 0 {
            Symbol::new(base)
        } else {
            Symbol::new(&format!("{}_{}", base, k))
        }
    }

    pub fn coord_expr(&self, a: usize, k: usize) -> Expr {
        Expr::sym(&self.coord(a, k))
    }

    /// `(variable index, order)` of a jet coordinate symbol.
    pub fn decode(&self, s: &Symbol) -> Option<(usize, usize)> {
        let name = s.name();
        let (base, k) = match name.split_once('_') {
            Some((b, k)) => (b, k.parse::<usize>().ok()?),
            None => (name, 0),
        };
        let a = self.0.dependents.iter().position(|d| d == base)?;
        Some((a, k))
    }

    /// Highest jet order among the symbols of `e`.
    pub fn jet_order(&self, e: &Expr) -> usize {
        e.symbols().iter().filter_map(|s| self.decode(s)).map(|(_, k)| k).max().unwrap_or(0)
    }

    /// `x` followed by all `u^a_k` with `k <= n`, ordered by `k` then `a`.
    pub fn coordinates(&self, n: usize) -> Vec<Symbol> {
        let mut out = vec![self.x()];
        for k in 0..=n {
            for a in 0..self.p() {
                out.push(self.coord(a, k));
            }
        }
        out
    }

    pub fn symbol_table(&self) -> SymbolTable {
        let mut t = SymbolTable::new();
        t.declare(&self.0.independent, SymbolKind::Independent);
        for d in &self.0.dependents {
            t.declare(d, SymbolKind::Dependent);
        }
        for p in &self.0.params {
            t.declare(p, SymbolKind::Param);
        }
        for (f, n) in &self.0.functions {
            t.declare(f, SymbolKind::Function(*n));
        }
        t
    }

    pub fn parse(&self, text: &str) -> std::result::Result<Expr, ParseError> {
        parse(text, &self.symbol_table())
    }

    /// `D_x = d/dx + sum u^a_{k+1} d/du^a_k`, over the coordinates present in `e`.
    pub fn total_derivative(&self, e: &Expr) -> Expr {
        let x = self.x();
        let mut acc = e.diff(&x);
        for s in e.symbols() {
            if let Some((a, k)) = self.decode(&s) {
                let d = e.diff(&s);
                if !d.is_zero() {
                    acc = acc.add(&d.mul(&self.coord_expr(a, k + 1)));
                }
            }
        }
        acc
    }

    /// `D_x^n e`.
    pub fn total_derivative_n(&self, e: &Expr, n: usize) -> Expr {
        (0..n).fold(e.clone(), |acc, _| self.total_derivative(&acc))
    }
}

/// `xi d/dx + sum psi[a][k] d/du^a_k` on `J^order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    pub ctx: JetContext,
    pub xi: Expr,
    /// `psi[a][k]`, `k = 0..=order`.
    pub psi: Vec<Vec<Expr>>,
}

impl VectorField {
    /// Field on the base space `J^0`.
    pub fn new(ctx: &JetContext, xi: Expr, phi: Vec<Expr>) -> Result<VectorField> {
        if phi.len() != ctx.p() {
            return Err(Error::DimensionMismatch(format!("{} components for {} dependent variables", phi.len(), ctx.p())));
        }
        Ok(VectorField { ctx: ctx.clone(), xi, psi: phi.into_iter().map(|c| vec![c]).collect() })
    }

    pub fn vertical(ctx: &JetContext, phi: Vec<Expr>) -> Result<VectorField> {
        VectorField::new(ctx, Expr::zero(), phi)
    }

    /// Parses `xi` and the components of `phi`.
    pub fn parse(ctx: &JetContext, xi: &str, phi: &[&str]) -> Result<VectorField> {
        let xi = ctx.parse(xi)?;
        let phi = phi.iter().map(|s| ctx.parse(s)).collect::<std::result::Result<Vec<_>, _>>()?;
        VectorField::new(ctx, xi, phi)
    }

    pub fn zero(ctx: &JetContext, order: usize) -> VectorField {
        VectorField { ctx: ctx.clone(), xi: Expr::zero(), psi: vec![vec![Expr::zero(); order + 1]; ctx.p()] }
    }

    pub fn order(&self) -> usize {
        self.psi.first().map(|c| c.len() - 1).unwrap_or(0)
    }

    pub fn phi(&self) -> Vec<Expr> {
        self.psi.iter().map(|c| c[0].clone()).collect()
    }

    pub fn is_vertical(&self) -> bool {
        self.xi.is_zero()
    }

    /// Coefficients paired with their coordinates, `x` first.
    pub fn coefficients(&self) -> Vec<(Symbol, Expr)> {
        let mut out = vec![(self.ctx.x(), self.xi.clone())];
        for k in 0..=self.order() {
            for a in 0..self.ctx.p() {
                out.push((self.ctx.coord(a, k), self.psi[a][k].clone()));
            }
        }
        out
    }

    /// Coefficient of `d/ds`; zero for coordinates beyond the field's order.
    pub fn coefficient(&self, s: &Symbol) -> Expr {
        if *s == self.ctx.x() {
            return self.xi.clone();
        }
        match self.ctx.decode(s) {
            Some((a, k)) if k <= self.order() => self.psi[a][k].clone(),
            _ => Expr::zero(),
        }
    }

    /// Builds a field from per-coordinate coefficients in the order of `coefficients`.
    pub fn from_coefficients(ctx: &JetContext, order: usize, coeffs: &[Expr]) -> VectorField {
        let p = ctx.p();
        let mut psi = vec![vec![Expr::zero(); order + 1]; p];
        for k in 0..=order {
            for a in 0..p {
                psi[a][k] = coeffs[1 + k * p + a].clone();
            }
        }
        VectorField { ctx: ctx.clone(), xi: coeffs[0].clone(), psi }
    }

    /// `V(e)`.
    pub fn apply(&self, e: &Expr) -> Expr {
        let den = e.denominator();
        if !den.is_one() {
            let num = e.numerator();
            let top = self.apply(&num).mul(&den).sub(&num.mul(&self.apply(&den)));
            return top.div(&den.mul(&den));
        }
        let mut acc = Expr::zero();
        for s in e.symbols() {
            let c = self.coefficient(&s);
            if c.is_zero() {
                continue;
            }
            let d = e.diff(&s);
            if !d.is_zero() {
                acc = acc.add(&c.mul(&d));
            }
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.xi.is_zero() && self.psi.iter().all(|c| c.iter().all(Expr::is_zero))
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> VectorField {
        VectorField {
            ctx: self.ctx.clone(),
            xi: f(&self.xi),
            psi: self.psi.iter().map(|c| c.iter().map(&f).collect()).collect(),
        }
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        let mut out = self.clone();
        out.xi = out.xi.add(&other.xi);
        for (a, col) in out.psi.iter_mut().enumerate() {
            for (k, c) in col.iter_mut().enumerate() {
                *c = c.add(&other.psi[a][k]);
            }
        }
        out
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        self.add(&other.scale(&Expr::int(-1)))
    }

    pub fn scale(&self, f: &Expr) -> VectorField {
        self.map(|c| c.mul(f))
    }

    /// Truncation to a lower order.
    pub fn truncate(&self, order: usize) -> VectorField {
        VectorField {
            ctx: self.ctx.clone(),
            xi: self.xi.clone(),
            psi: self.psi.iter().map(|c| c[..=order.min(c.len() - 1)].to_vec()).collect(),
        }
    }

    /// Coefficient-wise comparison through the zero test.
    pub fn compare(&self, other: &VectorField, zt: &ZeroTest) -> Result<FieldComparison> {
        if self.order() != other.order() {
            return Err(Error::OrderMismatch(self.order(), other.order()));
        }
        let mut unknown = None;
        for ((s, a), (_, b)) in self.coefficients().iter().zip(other.coefficients().iter()) {
            match zt.check(&a.sub(b))? {
                ZeroVerdict::Zero => {}
                ZeroVerdict::NonZero(_) => return Ok(FieldComparison::Differ(s.clone())),
                ZeroVerdict::Unknown => unknown = Some(s.clone()),
            }
        }
        Ok(match unknown {
            Some(s) => FieldComparison::Unknown(s),
            None => FieldComparison::Equal,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldComparison {
    Equal,
    Differ(Symbol),
    Unknown(Symbol),
}

impl FieldComparison {
    pub fn is_equal(&self) -> bool {
        matches!(self, FieldComparison::Equal)
    }
}

/// `[V, W]` with coefficients `V(W_c) - W(V_c)`.
pub fn lie_bracket(v: &VectorField, w: &VectorField) -> Result<VectorField> {
    if v.order() != w.order() {
        return Err(Error::OrderMismatch(v.order(), w.order()));
    }
    let coeffs: Vec<Expr> = v
        .coefficients()
        .iter()
        .zip(w.coefficients().iter())
        .map(|((_, vc), (_, wc))| v.apply(wc).sub(&w.apply(vc)))
        .collect();
    Ok(VectorField::from_coefficients(&v.ctx, v.order(), &coeffs))
}

/// All fields must share a context and an order.
pub fn common_order(fields: &[VectorField]) -> Result<usize> {
    let n = fields.first().map(VectorField::order).unwrap_or(0);
    for f in fields {
        if f.order() != n {
            return Err(Error::OrderMismatch(n, f.order()));
        }
    }
    Ok(n)
}

/// Symbol-to-value map for substitution.
pub fn bindings<I: IntoIterator<Item = (Symbol, Expr)>>(items: I) -> BTreeMap<Symbol, Expr> {
    items.into_iter().collect()
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (s, c) in self.coefficients() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c.is_one() {
                write!(f, "d/d{}", s)?;
            } else {
                write!(f, "({})*d/d{}", c, s)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

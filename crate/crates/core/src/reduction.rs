//! ODE systems, restriction to the solution manifold, σ-symmetry checks and
//! reduction through invariant coordinates.

use std::collections::{BTreeMap, BTreeSet};

use crate::check::{overall, Residual, Verdict};
use crate::error::{Error, Result};
use crate::expr::{Expr, Symbol, ZeroTest};
use crate::jet::{JetContext, VectorField};
use crate::linalg::{linear_solve, zero_status, Matrix, Solution};
use crate::prolong::sigma_prolong;

/// Equations `F^h = 0`, optionally with a solved form for designated
/// highest derivatives (one per dependent variable, orders may differ).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OdeSystem {
    pub ctx: JetContext,
    pub equations: Vec<Expr>,
    /// `(a, q_a, rhs)`: `u^a_{q_a} = rhs`.
    pub solved: Option<Vec<(usize, usize, Expr)>>,
}

impl OdeSystem {
    pub fn implicit(ctx: &JetContext, equations: Vec<Expr>) -> OdeSystem {
        OdeSystem { ctx: ctx.clone(), equations, solved: None }
    }

    /// Builds from `coordinate = rhs` rows. Right-hand sides may mention other
    /// designated coordinates, in which case the rows are solved jointly.
    pub fn solved(ctx: &JetContext, rows: Vec<(Symbol, Expr)>, zt: &ZeroTest) -> Result<OdeSystem> {
        let mut designated = Vec::new();
        for (s, _) in &rows {
            let (a, k) = ctx.decode(s).ok_or_else(|| Error::InverseMismatch(format!("{} is not a jet coordinate", s)))?;
            designated.push((a, k));
        }
        let equations: Vec<Expr> = rows.iter().map(|(s, r)| Expr::sym(s).sub(r)).collect();
        let clean = rows.iter().all(|(_, r)| !mentions_designated(ctx, r, &designated));
        let sys = OdeSystem::implicit(ctx, equations);
        if clean {
            let solved = designated.iter().zip(rows).map(|(&(a, k), (_, r))| (a, k, r)).collect();
            return Ok(OdeSystem { solved: Some(solved), ..sys });
        }
        sys.solve_for(&designated, zt)
    }

    /// Highest order overall.
    pub fn order(&self) -> usize {
        match &self.solved {
            Some(s) => s.iter().map(|(_, k, _)| *k).max().unwrap_or(0),
            None => self.equations.iter().map(|e| self.ctx.jet_order(e)).max().unwrap_or(0),
        }
    }

    /// `(a, q_a)` from the solved form, or the highest order of each
    /// variable present in the equations.
    pub fn designated(&self) -> Vec<(usize, usize)> {
        if let Some(s) = &self.solved {
            return s.iter().map(|(a, k, _)| (*a, *k)).collect();
        }
        let mut top: BTreeMap<usize, usize> = BTreeMap::new();
        for e in &self.equations {
            for s in e.symbols() {
                if let Some((a, k)) = self.ctx.decode(&s) {
                    let t = top.entry(a).or_insert(0);
                    *t = (*t).max(k);
                }
            }
        }
        top.into_iter().collect()
    }

    pub fn solve_for_highest(&self, zt: &ZeroTest) -> Result<OdeSystem> {
        if self.solved.is_some() {
            return Ok(self.clone());
        }
        self.solve_for(&self.designated(), zt)
    }

    fn solve_for(&self, designated: &[(usize, usize)], zt: &ZeroTest) -> Result<OdeSystem> {
        let m = self.equations.len();
        if designated.len() != m {
            return Err(Error::DimensionMismatch(format!("{} equations for {} highest derivatives", m, designated.len())));
        }
        let coords: Vec<Symbol> = designated.iter().map(|&(a, k)| self.ctx.coord(a, k)).collect();
        let zeros: BTreeMap<Symbol, Expr> = coords.iter().map(|c| (c.clone(), Expr::zero())).collect();
        let mut jac = Matrix::zeros(m, m);
        let mut rhs = Vec::with_capacity(m);
        for (h, f) in self.equations.iter().enumerate() {
            for (i, c) in coords.iter().enumerate() {
                let d = f.diff(c);
                if coords.iter().any(|c2| d.depends_on(c2)) {
                    return Err(Error::NonAffineInHighest(h));
                }
                jac.set(h, i, d);
            }
            let base = f.try_subs(&zeros).ok_or(Error::NonAffineInHighest(h))?;
            rhs.push(base.neg());
        }
        let det = jac.det(zt)?;
        if zero_status(&det, zt)? != Some(false) {
            return Err(Error::SingularJacobian);
        }
        let Solution::Unique(x) = linear_solve(&jac, &rhs, zt)? else {
            return Err(Error::SingularJacobian);
        };
        let solved = designated.iter().zip(x).map(|(&(a, k), r)| (a, k, r)).collect();
        Ok(OdeSystem { solved: Some(solved), ..self.clone() })
    }

    fn solved_or_err(&self) -> Result<&[(usize, usize, Expr)]> {
        self.solved.as_deref().ok_or(Error::NoSolvedForm)
    }

    /// Right-hand side for `u^a_k`, `k >= q_a`, by differentiating the solved
    /// form and restricting.
    fn rhs_chain(&self, needed: &BTreeMap<usize, usize>) -> Result<BTreeMap<Symbol, Expr>> {
        let solved = self.solved_or_err()?;
        let mut map = BTreeMap::new();
        let base: BTreeMap<Symbol, Expr> =
            solved.iter().map(|(a, k, r)| (self.ctx.coord(*a, *k), r.clone())).collect();
        for (a, q, r) in solved {
            let top = needed.get(a).copied().unwrap_or(0);
            let mut cur = r.clone();
            map.insert(self.ctx.coord(*a, *q), cur.clone());
            for k in q + 1..=top {
                cur = self.ctx.total_derivative(&cur);
                cur = self.restrict_with(&cur, &map, &base)?;
                map.insert(self.ctx.coord(*a, k), cur.clone());
            }
        }
        Ok(map)
    }

    fn restrict_with(&self, e: &Expr, map: &BTreeMap<Symbol, Expr>, base: &BTreeMap<Symbol, Expr>) -> Result<Expr> {
        let cap = self.order() + 3;
        let mut cur = e.clone();
        for _ in 0..cap {
            let hit = cur.symbols().into_iter().any(|s| map.contains_key(&s) || base.contains_key(&s));
            if !hit {
                return Ok(cur);
            }
            let mut m = base.clone();
            m.extend(map.iter().map(|(k, v)| (k.clone(), v.clone())));
            cur = cur.subs(&m);
        }
        Err(Error::RestrictionDiverged(cap))
    }

    /// Highest order needed per variable, beyond the solved orders.
    fn needed_orders(&self, e: &Expr) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for s in e.symbols() {
            if let Some((a, k)) = self.ctx.decode(&s) {
                let t = out.entry(a).or_insert(0);
                *t = (*t).max(k);
            }
        }
        out
    }

    /// Substitutes the solved form and its total derivatives.
    pub fn restrict(&self, e: &Expr) -> Result<Expr> {
        let solved = self.solved_or_err()?;
        let needed = self.needed_orders(e);
        let map = self.rhs_chain(&needed)?;
        let mut targets = BTreeMap::new();
        for (a, q, _) in solved {
            for k in *q..=needed.get(a).copied().unwrap_or(0).max(*q) {
                let s = self.ctx.coord(*a, k);
                if let Some(v) = map.get(&s) {
                    targets.insert(s, v.clone());
                }
            }
        }
        self.restrict_with(e, &targets, &BTreeMap::new())
    }

    /// Implicit equations, synthesized from the solved form if necessary.
    pub fn implicit_equations(&self) -> Vec<Expr> {
        if !self.equations.is_empty() {
            return self.equations.clone();
        }
        self.solved
            .iter()
            .flatten()
            .map(|(a, k, r)| self.ctx.coord_expr(*a, *k).sub(r))
            .collect()
    }

    /// Checks that the solved form annihilates every equation.
    pub fn check_solved(&self, zt: &ZeroTest) -> Result<Vec<Residual>> {
        self.implicit_equations()
            .iter()
            .enumerate()
            .map(|(h, f)| Residual::new(format!("F{}", h + 1), self.restrict(f)?, zt))
            .collect()
    }
}

fn mentions_designated(ctx: &JetContext, e: &Expr, designated: &[(usize, usize)]) -> bool {
    e.symbols().iter().any(|s| match ctx.decode(s) {
        Some((a, k)) => designated.iter().any(|&(b, q)| a == b && k >= q),
        None => false,
    })
}

#[derive(Clone, Debug)]
pub struct SymmetryReport {
    pub prolonged: Vec<VectorField>,
    /// `restrict(Y_i(F^h))`, row-major in `(i, h)`.
    pub residuals: Vec<Residual>,
}

impl SymmetryReport {
    pub fn verdict(&self) -> Verdict {
        overall(&self.residuals)
    }
}

pub fn verify_sigma_symmetry(xs: &[VectorField], sigma: &Matrix, sys: &OdeSystem, zt: &ZeroTest) -> Result<SymmetryReport> {
    let q = sys.order();
    if q == 0 {
        return Err(Error::DimensionMismatch("system of order zero".into()));
    }
    let solved = sys.solve_for_highest(zt)?;
    let prolonged = sigma_prolong(xs, sigma, q)?;
    let equations = solved.implicit_equations();
    let mut residuals = Vec::new();
    for (i, y) in prolonged.iter().enumerate() {
        for (h, f) in equations.iter().enumerate() {
            let r = solved.restrict(&y.apply(f))?;
            residuals.push(Residual::new(format!("Y{}(F{})", i + 1, h + 1), r, zt)?);
        }
    }
    Ok(SymmetryReport { prolonged, residuals })
}

/// Context over the old dependents followed by `names`, in which inverse
/// bindings are written.
pub fn mixed_context(source: &JetContext, names: &[&str]) -> JetContext {
    let mut all: Vec<&str> = source.dependents().iter().map(String::as_str).collect();
    all.extend(names.iter());
    JetContext::new(source.independent(), &all, source.order())
        .with_params(&source.params().iter().map(String::as_str).collect::<Vec<_>>())
        .with_functions(&source.functions().iter().map(|(f, n)| (f.as_str(), *n)).collect::<Vec<_>>())
}

/// New invariant coordinates with user-supplied inverse bindings.
#[derive(Clone, Debug)]
pub struct CoordinateChange {
    /// Old context.
    pub source: JetContext,
    /// Context over `x` and the new variables.
    pub target: JetContext,
    /// `z_j = forward[j]` in old coordinates.
    pub forward: Vec<Expr>,
    /// New variables allowed to keep the full order.
    pub retained: BTreeSet<String>,
    /// Old jet coordinate to an expression in new (and leftover old) coordinates.
    pub inverse: BTreeMap<Symbol, Expr>,
    mixed: JetContext,
}

impl CoordinateChange {
    pub fn new(
        source: &JetContext,
        new_vars: Vec<(String, Expr)>,
        retained: &[&str],
        inverse: Vec<(Symbol, Expr)>,
        zt: &ZeroTest,
    ) -> Result<CoordinateChange> {
        let names: Vec<&str> = new_vars.iter().map(|(n, _)| n.as_str()).collect();
        for n in &names {
            if source.dependents().iter().any(|d| d == n) || *n == source.independent() {
                return Err(Error::InverseMismatch(format!("new variable {} collides with an old coordinate", n)));
            }
        }
        let target = JetContext::new(source.independent(), &names, source.order())
            .with_params(&source.params().iter().map(String::as_str).collect::<Vec<_>>());
        let mixed = mixed_context(source, &names);
        let change = CoordinateChange {
            source: source.clone(),
            target,
            forward: new_vars.into_iter().map(|(_, e)| e).collect(),
            retained: retained.iter().map(|s| s.to_string()).collect(),
            inverse: inverse.into_iter().collect(),
            mixed,
        };
        for r in change.check_roundtrip(zt)? {
            if !r.verdict.is_zero() {
                return Err(Error::InverseMismatch(format!("{} does not return the coordinate: {}", r.label, r.residual)));
            }
        }
        Ok(change)
    }

    /// Forward expressions parse in `source`, inverse right-hand sides in the
    /// mixed context.
    pub fn parse(
        source: &JetContext,
        new_vars: &[(&str, &str)],
        retained: &[&str],
        inverse: &[(&str, &str)],
        zt: &ZeroTest,
    ) -> Result<CoordinateChange> {
        let names: Vec<&str> = new_vars.iter().map(|(n, _)| *n).collect();
        let mixed = mixed_context(source, &names);
        let forward = new_vars.iter().map(|(n, e)| Ok((n.to_string(), source.parse(e)?))).collect::<Result<_>>()?;
        let mut inv = Vec::new();
        for (lhs, rhs) in inverse {
            let s = source.parse(lhs)?.as_symbol().ok_or_else(|| Error::InverseMismatch(format!("{} is not a coordinate", lhs)))?;
            inv.push((s, mixed.parse(rhs)?));
        }
        CoordinateChange::new(source, forward, retained, inv, zt)
    }

    pub fn new_names(&self) -> Vec<String> {
        self.target.dependents().to_vec()
    }

    /// Context over old and new variables together, used for expressions
    /// produced by the inverse bindings.
    pub fn mixed_context(&self) -> &JetContext {
        &self.mixed
    }

    /// Total derivative in mixed coordinates: old jets are advanced through
    /// their inverse bindings where available.
    fn mixed_total_derivative(&self, e: &Expr, bindings: &BTreeMap<Symbol, Expr>) -> Expr {
        let d = self.mixed.total_derivative(e);
        d.subs(bindings)
    }

    /// Inverse bindings completed up to `order` by mixed differentiation.
    pub fn bindings(&self, order: usize) -> Result<BTreeMap<Symbol, Expr>> {
        let mut map = self.inverse.clone();
        for a in 0..self.source.p() {
            for k in 1..=order {
                let s = self.source.coord(a, k);
                if map.contains_key(&s) {
                    continue;
                }
                let prev = self.source.coord(a, k - 1);
                let Some(p) = map.get(&prev).cloned() else {
                    if k == 1 {
                        return Err(Error::InverseMismatch(format!("no binding for {}", s)));
                    }
                    continue;
                };
                let v = self.mixed_total_derivative(&p, &map);
                map.insert(s, v);
            }
        }
        Ok(map)
    }

    /// `forward[j]` and its first total derivative, pulled back through the
    /// bindings, must return `z_j` and `z_j_1`.
    pub fn check_roundtrip(&self, zt: &ZeroTest) -> Result<Vec<Residual>> {
        let order = self.forward.iter().map(|f| self.source.jet_order(f)).max().unwrap_or(0) + 1;
        let b = self.bindings(order)?;
        let mut out = Vec::new();
        for (j, f) in self.forward.iter().enumerate() {
            let name = &self.target.dependents()[j];
            for k in 0..2 {
                let g = self.source.total_derivative_n(f, k);
                let back = g.subs(&b);
                let z = self.target.coord_expr(j, k);
                out.push(Residual::new(format!("{}^({})", name, k), back.sub(&z), zt)?);
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct Reduction {
    pub system: OdeSystem,
    /// Equations in mixed coordinates before solving.
    pub transformed: Vec<Expr>,
    /// `(name, order)` of each new variable in the reduced system.
    pub orders: Vec<(String, usize)>,
    /// Old order of the system.
    pub old_order: usize,
}

/// Rewrites `sys` in the coordinates of `change` and solves for the highest
/// derivatives of the new variables.
pub fn reduce(sys: &OdeSystem, change: &CoordinateChange, zt: &ZeroTest) -> Result<Reduction> {
    let q = sys.order();
    let b = change.bindings(q)?;
    let transformed: Vec<Expr> = sys.implicit_equations().iter().map(|f| f.subs(&b)).collect();
    let target = &change.target;
    let imp = OdeSystem::implicit(target, transformed.clone());
    let solved = imp.solve_for_highest(zt)?;
    let old: BTreeSet<Symbol> = (0..sys.ctx.p()).flat_map(|a| (0..=q + 1).map(move |k| (a, k))).map(|(a, k)| sys.ctx.coord(a, k)).collect();
    for (h, (_, _, r)) in solved.solved.iter().flatten().enumerate() {
        if let Some(s) = r.symbols().into_iter().find(|s| old.contains(s)) {
            return Err(Error::ResidualOldCoordinate { equation: h, symbol: s.to_string() });
        }
    }
    let orders: Vec<(String, usize)> =
        solved.solved.iter().flatten().map(|(a, k, _)| (target.dependents()[*a].clone(), *k)).collect();
    for (name, k) in &orders {
        if *k >= q && !change.retained.contains(name) {
            return Err(Error::OrderNotReduced(name.clone()));
        }
    }
    Ok(Reduction { system: solved, transformed, orders, old_order: q })
}

//! Common differential invariants and the invariants-by-differentiation step.

use crate::check::{overall, Residual, Verdict};
use crate::error::{Error, Result};
use crate::expr::{Expr, Symbol, ZeroTest, ZeroVerdict};
use crate::jet::{JetContext, VectorField};
use crate::linalg::{rank, zero_status};

/// `Y_i(e)` for each field, with verdicts.
pub fn verify_invariant(ys: &[VectorField], e: &Expr, zt: &ZeroTest) -> Result<Vec<Residual>> {
    ys.iter().enumerate().map(|(i, y)| Residual::new(format!("Y{}", i + 1), y.apply(e), zt)).collect()
}

pub fn is_invariant(ys: &[VectorField], e: &Expr, zt: &ZeroTest) -> Result<Verdict> {
    Ok(overall(&verify_invariant(ys, e, zt)?))
}

/// `D_x zeta / D_x eta`.
pub fn ibdp_step(eta: &Expr, zeta: &Expr, ctx: &JetContext, zt: &ZeroTest) -> Result<Expr> {
    let d_eta = ctx.total_derivative(eta);
    match zero_status(&d_eta, zt)? {
        Some(false) => Ok(ctx.total_derivative(zeta).div(&d_eta)),
        Some(true) => Err(Error::DegenerateBase),
        None => Err(Error::Undecided(d_eta.to_string())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Seed,
    /// Obtained by one IBDP step from the previous entry of the chain.
    Derived,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub expr: Expr,
    pub order: usize,
    pub origin: Origin,
}

/// One chain `seed, D seed / D eta, ...` per seed, up to a target order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantTable {
    pub eta: Expr,
    pub chains: Vec<Vec<Entry>>,
}

impl InvariantTable {
    pub fn entries(&self) -> impl Iterator<Item = &Entry> {
        self.chains.iter().flatten()
    }

    /// Entries of a given jet order.
    pub fn of_order(&self, k: usize) -> Vec<&Expr> {
        self.entries().filter(|e| e.order == k).map(|e| &e.expr).collect()
    }

    pub fn len(&self) -> usize {
        self.chains.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn require_invariant(ys: &[VectorField], e: &Expr, seed: usize, zt: &ZeroTest) -> Result<()> {
    for (field, r) in verify_invariant(ys, e, zt)?.into_iter().enumerate() {
        match r.verdict {
            ZeroVerdict::Zero => {}
            ZeroVerdict::NonZero(_) => return Err(Error::SeedNotInvariant { seed, field }),
            ZeroVerdict::Unknown => return Err(Error::Undecided(r.residual.to_string())),
        }
    }
    Ok(())
}

/// Extends every seed by IBDP steps until its order reaches `target_order`.
/// Seed index `0` refers to `eta`; seeds are numbered from one.
pub fn generate_invariants(
    ys: &[VectorField],
    eta: &Expr,
    seeds: &[Expr],
    target_order: usize,
    zt: &ZeroTest,
) -> Result<InvariantTable> {
    let Some(first) = ys.first() else {
        return Err(Error::DimensionMismatch("empty field set".into()));
    };
    let ctx = first.ctx.clone();
    require_invariant(ys, eta, 0, zt)?;
    for (i, s) in seeds.iter().enumerate() {
        require_invariant(ys, s, i + 1, zt)?;
    }
    let mut chains = Vec::new();
    for (i, s) in seeds.iter().enumerate() {
        let mut chain = vec![Entry { expr: s.clone(), order: ctx.jet_order(s), origin: Origin::Seed }];
        while chain.last().expect("nonempty").order < target_order {
            let prev = &chain.last().expect("nonempty").expr;
            let next = ibdp_step(eta, prev, &ctx, zt)?;
            require_invariant(ys, &next, i + 1, zt)?;
            let order = ctx.jet_order(&next);
            chain.push(Entry { expr: next, order, origin: Origin::Derived });
        }
        chains.push(chain);
    }
    let table = InvariantTable { eta: eta.clone(), chains };
    let mut all = vec![eta.clone()];
    all.extend(table.entries().map(|e| e.expr.clone()));
    let ind = independence_check(&all, &ctx, zt)?;
    if !ind.dependent.is_empty() {
        return Err(Error::DependentSeeds(ind.dependent));
    }
    Ok(table)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Independence {
    pub rank: usize,
    /// Indices of expressions whose differential lies in the span of the
    /// preceding ones.
    pub dependent: Vec<usize>,
}

/// Rank of the Jacobian with respect to `x` and every jet coordinate.
pub fn independence_check(exprs: &[Expr], ctx: &JetContext, zt: &ZeroTest) -> Result<Independence> {
    let n = exprs.iter().map(|e| ctx.jet_order(e)).max().unwrap_or(0);
    let coords: Vec<Symbol> = ctx.coordinates(n);
    let rows: Vec<Vec<Expr>> = exprs.iter().map(|e| coords.iter().map(|c| e.diff(c)).collect()).collect();
    let mut dependent = Vec::new();
    let mut current = 0;
    for i in 0..rows.len() {
        let r = rank(&rows[..=i], zt)?;
        if r == current {
            dependent.push(i);
        }
        current = r;
    }
    Ok(Independence { rank: current, dependent })
}

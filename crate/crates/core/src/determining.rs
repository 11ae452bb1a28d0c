//! σ-symmetry determining equations under a user ansatz, and candidate
//! verification.

use crate::check::{overall, Residual, Verdict};
use crate::error::{Error, Result};
use crate::expr::{Expr, Symbol, ZeroTest};
use crate::jet::{JetContext, VectorField};
use crate::linalg::Matrix;
use crate::reduction::{verify_sigma_symmetry, OdeSystem, SymmetryReport};

/// Templates for `(xi_i, phi_i)` and `sigma`, over declared parameters and
/// opaque functions of jet coordinates of order at most one.
#[derive(Clone, Debug)]
pub struct Ansatz {
    pub xi: Vec<Expr>,
    pub phi: Vec<Vec<Expr>>,
    pub sigma: Matrix,
    pub xi_zero: bool,
}

impl Ansatz {
    /// `xi = None` restricts to vertical fields.
    pub fn new(ctx: &JetContext, phi: Vec<Vec<Expr>>, sigma: Matrix, xi: Option<Vec<Expr>>) -> Result<Ansatz> {
        let r = phi.len();
        if sigma.rows() != r || sigma.cols() != r {
            return Err(Error::DimensionMismatch(format!("{} templates for a {}x{} σ", r, sigma.rows(), sigma.cols())));
        }
        if let Some(row) = phi.iter().find(|row| row.len() != ctx.p()) {
            return Err(Error::DimensionMismatch(format!("{} components for {} dependents", row.len(), ctx.p())));
        }
        let xi_zero = xi.is_none();
        let xi = xi.unwrap_or_else(|| vec![Expr::zero(); r]);
        if xi.len() != r {
            return Err(Error::DimensionMismatch(format!("{} ξ templates for {} fields", xi.len(), r)));
        }
        let ansatz = Ansatz { xi, phi, sigma, xi_zero };
        for e in ansatz.templates() {
            for (name, args) in e.function_calls() {
                if let Some(a) = args.iter().find(|a| a.as_symbol().is_none() || ctx.jet_order(a) > 1) {
                    return Err(Error::InvalidSigma(format!("argument {} of {} is not a jet coordinate of order <= 1", a, name)));
                }
            }
        }
        Ok(ansatz)
    }

    fn templates(&self) -> impl Iterator<Item = &Expr> {
        self.xi.iter().chain(self.phi.iter().flatten()).chain(self.sigma.entries())
    }

    /// No opaque functions in any template.
    pub fn is_parametric(&self) -> bool {
        self.templates().all(|e| e.function_names().is_empty())
    }

    pub fn fields(&self, ctx: &JetContext) -> Result<Vec<VectorField>> {
        self.xi.iter().zip(&self.phi).map(|(x, p)| VectorField::new(ctx, x.clone(), p.clone())).collect()
    }
}

/// Residuals collected as polynomials in `vars`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Collected {
    pub vars: Vec<Symbol>,
    pub equations: Vec<Expr>,
}

#[derive(Clone, Debug)]
pub struct Determining {
    pub fields: Vec<VectorField>,
    /// `restrict(Y_i(F^h))`, row-major in `(i, h)`.
    pub residuals: Vec<Residual>,
    pub collected: Option<Collected>,
}

impl Determining {
    pub fn verdict(&self) -> Verdict {
        overall(&self.residuals)
    }
}

pub fn generate_determining(sys: &OdeSystem, ansatz: &Ansatz, zt: &ZeroTest) -> Result<Determining> {
    let sys = sys.solve_for_highest(zt)?;
    let fields = ansatz.fields(&sys.ctx)?;
    let report = verify_sigma_symmetry(&fields, &ansatz.sigma, &sys, zt)?;
    let collected = if ansatz.is_parametric() {
        Some(collect_residuals(&sys.ctx, &report.residuals)?)
    } else {
        None
    };
    Ok(Determining { fields, residuals: report.residuals, collected })
}

/// Collects over every jet coordinate in which all residuals are polynomial.
fn collect_residuals(ctx: &JetContext, residuals: &[Residual]) -> Result<Collected> {
    let mut candidates = std::collections::BTreeSet::new();
    for r in residuals {
        candidates.extend(r.residual.symbols().into_iter().filter(|s| ctx.decode(s).is_some()));
    }
    let vars: Vec<Symbol> = ctx
        .coordinates(ctx.order())
        .into_iter()
        .filter(|c| candidates.contains(c))
        .filter(|c| residuals.iter().all(|r| r.residual.coefficients_in(std::slice::from_ref(c)).is_some()))
        .collect();
    let mut equations = Vec::new();
    for r in residuals {
        equations.extend(collect_coefficients(&r.residual, &vars)?);
    }
    Ok(Collected { vars, equations })
}

/// Coefficients of each monomial in `vars`.
pub fn collect_coefficients(residual: &Expr, vars: &[Symbol]) -> Result<Vec<Expr>> {
    residual
        .coefficients_in(vars)
        .map(|m| m.into_values().collect())
        .ok_or_else(|| Error::NotPolynomialInVars(residual.to_string()))
}

/// Splits each equation further by the monomials in everything except the
/// declared parameters.
pub fn parameter_equations(ctx: &JetContext, equations: &[Expr]) -> Result<Vec<Expr>> {
    let params: Vec<Symbol> = ctx.params().iter().map(|p| Symbol::new(p)).collect();
    let mut out = Vec::new();
    for e in equations {
        out.extend(e.coefficients_over(&params).ok_or_else(|| Error::NotPolynomialInVars(e.to_string()))?);
    }
    Ok(out)
}

/// One equation per line.
pub fn polynomial_system_text(equations: &[Expr]) -> String {
    equations.iter().map(|e| format!("{}\n", e)).collect()
}

pub fn verify_candidate(sys: &OdeSystem, xs: &[VectorField], sigma: &Matrix, zt: &ZeroTest) -> Result<SymmetryReport> {
    verify_sigma_symmetry(xs, sigma, sys, zt)
}

/// `printed / residual` when it is a unit (a constant times exponentials).
pub fn unit_factor(printed: &Expr, residual: &Expr) -> Option<Expr> {
    let q = printed.try_div(residual)?;
    q.is_unit().then_some(q)
}

//! Standard, λ-, σ-, μ- and χ-prolongations.

use crate::check::{overall, Residual, Verdict};
use crate::error::{Error, Result};
use crate::expr::{Expr, ZeroTest};
use crate::jet::{common_order, JetContext, VectorField};
use crate::linalg::Matrix;

/// Checks that `sigma` is `r x r` with entries on `J^1`.
pub fn validate_sigma(ctx: &JetContext, sigma: &Matrix, r: usize) -> Result<()> {
    if !sigma.is_square() {
        return Err(Error::InvalidSigma(format!("{}x{} is not square", sigma.rows(), sigma.cols())));
    }
    if sigma.rows() != r {
        return Err(Error::DimensionMismatch(format!("sigma is {0}x{0} for {1} fields", sigma.rows(), r)));
    }
    for e in sigma.entries() {
        if ctx.jet_order(e) > 1 {
            return Err(Error::InvalidSigma(format!("entry {} depends on jets of order above one", e)));
        }
    }
    Ok(())
}

fn require_base(fields: &[VectorField]) -> Result<()> {
    match common_order(fields)? {
        0 => Ok(()),
        n => Err(Error::OrderMismatch(0, n)),
    }
}

/// One σ-prolongation step: order `k` fields to order `k + 1`.
pub fn sigma_prolong_step(ys: &[VectorField], sigma: &Matrix) -> Result<Vec<VectorField>> {
    let Some(first) = ys.first() else {
        return Ok(Vec::new());
    };
    let ctx = first.ctx.clone();
    validate_sigma(&ctx, sigma, ys.len())?;
    let k = common_order(ys)?;
    let p = ctx.p();
    let dxi: Vec<Expr> = ys.iter().map(|y| ctx.total_derivative(&y.xi)).collect();
    let mut out = ys.to_vec();
    for (i, y) in ys.iter().enumerate() {
        for a in 0..p {
            let next = ctx.coord_expr(a, k + 1);
            let mut c = ctx.total_derivative(&y.psi[a][k]).sub(&next.mul(&dxi[i]));
            for (j, yj) in ys.iter().enumerate() {
                let s = sigma.get(i, j);
                if s.is_zero() {
                    continue;
                }
                c = c.add(&s.mul(&yj.psi[a][k].sub(&next.mul(&yj.xi))));
            }
            out[i].psi[a].push(c);
        }
    }
    Ok(out)
}

/// Joint σ-prolongation of fields on `M` to order `n`.
pub fn sigma_prolong(xs: &[VectorField], sigma: &Matrix, n: usize) -> Result<Vec<VectorField>> {
    require_base(xs)?;
    let mut ys = xs.to_vec();
    for _ in 0..n {
        ys = sigma_prolong_step(&ys, sigma)?;
    }
    Ok(ys)
}

pub fn standard_prolong(x: &VectorField, n: usize) -> Result<VectorField> {
    let zero = Matrix::zeros(1, 1);
    Ok(sigma_prolong(std::slice::from_ref(x), &zero, n)?.remove(0))
}

pub fn standard_prolong_all(xs: &[VectorField], n: usize) -> Result<Vec<VectorField>> {
    xs.iter().map(|x| standard_prolong(x, n)).collect()
}

pub fn lambda_prolong(x: &VectorField, lambda: &Expr, n: usize) -> Result<VectorField> {
    let sigma = Matrix::from_rows(vec![vec![lambda.clone()]])?;
    Ok(sigma_prolong(std::slice::from_ref(x), &sigma, n)?.remove(0))
}

fn require_vertical(xs: &[VectorField]) -> Result<()> {
    require_base(xs)?;
    match xs.iter().position(|x| !x.is_vertical()) {
        Some(i) => Err(Error::NonVerticalField(i)),
        None => Ok(()),
    }
}

/// `psi^a_{i,k+1} = D_x psi^a_{i,k} + Lambda^a_b psi^b_{i,k} - (Theta^T)_i^j psi^a_{j,k}`.
pub fn chi_prolong(xs: &[VectorField], lambda: &Matrix, theta: &Matrix, n: usize) -> Result<Vec<VectorField>> {
    require_vertical(xs)?;
    let Some(first) = xs.first() else {
        return Ok(Vec::new());
    };
    let ctx = first.ctx.clone();
    let (p, r) = (ctx.p(), xs.len());
    if lambda.rows() != p || lambda.cols() != p {
        return Err(Error::DimensionMismatch(format!("Lambda must be {0}x{0}", p)));
    }
    if theta.rows() != r || theta.cols() != r {
        return Err(Error::DimensionMismatch(format!("Theta must be {0}x{0}", r)));
    }
    let mut ys = xs.to_vec();
    for k in 0..n {
        let prev = ys.clone();
        for (i, y) in ys.iter_mut().enumerate() {
            for a in 0..p {
                let mut c = ctx.total_derivative(&prev[i].psi[a][k]);
                for b in 0..p {
                    c = c.add(&lambda.get(a, b).mul(&prev[i].psi[b][k]));
                }
                for (j, yj) in prev.iter().enumerate() {
                    c = c.sub(&theta.get(j, i).mul(&yj.psi[a][k]));
                }
                y.psi[a].push(c);
            }
        }
    }
    Ok(ys)
}

/// Vertical μ-prolongation with `mu = Lambda dx`, each field separately.
pub fn mu_prolong_vertical(xs: &[VectorField], lambda: &Matrix, n: usize) -> Result<Vec<VectorField>> {
    chi_prolong(xs, lambda, &Matrix::zeros(xs.len(), xs.len()), n)
}

#[derive(Clone, Debug)]
pub struct Lemma1Report {
    pub residuals: Vec<Residual>,
}

impl Lemma1Report {
    pub fn verdict(&self) -> Verdict {
        overall(&self.residuals)
    }

    pub fn holds(&self) -> bool {
        self.verdict().is_pass()
    }

    pub fn failures(&self) -> impl Iterator<Item = &Residual> {
        self.residuals.iter().filter(|r| !r.verdict.is_zero())
    }
}

/// Checks `[Y_i, D_x] = sigma_ij Y_j - (D_x xi_i + sigma_ij xi_j) D_x` on `x` and
/// every jet coordinate below the fields' order.
pub fn check_lemma1(ys: &[VectorField], sigma: &Matrix, zt: &ZeroTest) -> Result<Lemma1Report> {
    let Some(first) = ys.first() else {
        return Ok(Lemma1Report { residuals: Vec::new() });
    };
    let ctx = first.ctx.clone();
    validate_sigma(&ctx, sigma, ys.len())?;
    let n = common_order(ys)?;
    let mut residuals = Vec::new();
    for (i, y) in ys.iter().enumerate() {
        let mut twist = ctx.total_derivative(&y.xi);
        for (j, yj) in ys.iter().enumerate() {
            twist = twist.add(&sigma.get(i, j).mul(&yj.xi));
        }
        let mut coords = vec![(ctx.x(), None)];
        for k in 0..n {
            for a in 0..ctx.p() {
                coords.push((ctx.coord(a, k), Some((a, k))));
            }
        }
        for (c, jet) in coords {
            let (dc, y_dc) = match jet {
                None => (Expr::one(), Expr::zero()),
                Some((a, k)) => (ctx.coord_expr(a, k + 1), y.psi[a][k + 1].clone()),
            };
            let lhs = y_dc.sub(&ctx.total_derivative(&y.coefficient(&c)));
            let mut rhs = twist.mul(&dc).neg();
            for (j, yj) in ys.iter().enumerate() {
                rhs = rhs.add(&sigma.get(i, j).mul(&yj.coefficient(&c)));
            }
            residuals.push(Residual::new(format!("Y{}({})", i + 1, c), lhs.sub(&rhs), zt)?);
        }
    }
    Ok(Lemma1Report { residuals })
}

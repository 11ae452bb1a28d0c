//! σ from a change of generators, gauge transformations, transport of
//! structure functions, and the μ/σ correspondence.

use crate::check::{overall, Residual, Verdict};
use crate::error::{Error, Result};
use crate::expr::{Expr, ZeroTest, ZeroVerdict};
use crate::involution::StructureFunctions;
use crate::jet::{common_order, JetContext, VectorField};
use crate::linalg::{zero_status, Matrix};
use crate::prolong::{sigma_prolong, standard_prolong_all, validate_sigma};

/// Which way a matrix `A` on `M` relates standard and σ-prolonged fields.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Convention {
    /// `sigma = A^{-1} D_x A`, `D_x A = A sigma`; the σ-prolonged fields
    /// are `A^{-1}` times the standard ones.
    #[default]
    InverseOfA,
    /// `sigma = A D_x(A^{-1}) = -(D_x A) A^{-1}`; the σ-prolonged fields
    /// are `A` times the standard ones.
    DirectA,
}

impl Convention {
    pub fn name(self) -> &'static str {
        match self {
            Convention::InverseOfA => "inverse",
            Convention::DirectA => "direct",
        }
    }

    pub fn from_name(s: &str) -> Option<Convention> {
        match s {
            "inverse" => Some(Convention::InverseOfA),
            "direct" => Some(Convention::DirectA),
            _ => None,
        }
    }
}

fn require_on_base(ctx: &JetContext, a: &Matrix) -> Result<()> {
    match a.entries().iter().find(|e| ctx.jet_order(e) > 0) {
        Some(e) => Err(Error::NotOnBase(e.to_string())),
        None => Ok(()),
    }
}

pub fn invert(a: &Matrix, zt: &ZeroTest) -> Result<Matrix> {
    let det = a.det(zt)?;
    match zero_status(&det, zt)? {
        Some(false) => a.inverse(zt),
        Some(true) => Err(Error::SingularMatrix),
        None => Err(Error::Undecided(det.to_string())),
    }
}

pub fn sigma_from_a(ctx: &JetContext, a: &Matrix, convention: Convention, zt: &ZeroTest) -> Result<Matrix> {
    require_on_base(ctx, a)?;
    let inv = invert(a, zt)?;
    let da = a.total_derivative(ctx);
    let sigma = match convention {
        Convention::InverseOfA => inv.mul(&da)?,
        Convention::DirectA => da.mul(&inv)?.neg(),
    };
    validate_sigma(ctx, &sigma, a.rows())?;
    Ok(sigma)
}

/// Residual matrix of `D_x A = A sigma` (or `D_x A = -sigma A`).
pub fn verify_a_sigma(
    ctx: &JetContext,
    a: &Matrix,
    sigma: &Matrix,
    convention: Convention,
    zt: &ZeroTest,
) -> Result<Vec<Residual>> {
    let da = a.total_derivative(ctx);
    let rhs = match convention {
        Convention::InverseOfA => a.mul(sigma)?,
        Convention::DirectA => sigma.mul(a)?.neg(),
    };
    let res = da.sub(&rhs)?;
    let mut out = Vec::new();
    for i in 0..res.rows() {
        for j in 0..res.cols() {
            out.push(Residual::new(format!("[{},{}]", i + 1, j + 1), res.get(i, j).clone(), zt)?);
        }
    }
    Ok(out)
}

/// `(A V)_i = sum_j A_ij V_j`.
pub fn transform_fields(a: &Matrix, vs: &[VectorField]) -> Result<Vec<VectorField>> {
    if a.cols() != vs.len() {
        return Err(Error::DimensionMismatch(format!("{}x{} matrix on {} fields", a.rows(), a.cols(), vs.len())));
    }
    let n = common_order(vs)?;
    let ctx = &vs.first().ok_or_else(|| Error::DimensionMismatch("empty field set".into()))?.ctx;
    Ok((0..a.rows())
        .map(|i| {
            vs.iter().enumerate().fold(VectorField::zero(ctx, n), |acc, (j, v)| {
                let c = a.get(i, j);
                if c.is_zero() {
                    acc
                } else {
                    acc.add(&v.scale(c))
                }
            })
        })
        .collect())
}

#[derive(Clone, Debug)]
pub struct RoundTrip {
    pub sigma: Matrix,
    /// Transformed standard prolongations.
    pub transformed: Vec<VectorField>,
    /// σ-prolongations of the transformed base fields.
    pub prolonged: Vec<VectorField>,
    pub residuals: Vec<Residual>,
}

impl RoundTrip {
    pub fn verdict(&self) -> Verdict {
        overall(&self.residuals)
    }
}

/// Compares `T pr(W)` with the σ-prolongation of `T W`, where `T` is `A` or
/// `A^{-1}` according to the convention and `sigma` is derived from `A`.
pub fn theorem5_roundtrip(
    ws: &[VectorField],
    a: &Matrix,
    n: usize,
    convention: Convention,
    zt: &ZeroTest,
) -> Result<RoundTrip> {
    let ctx = ws.first().ok_or_else(|| Error::DimensionMismatch("empty field set".into()))?.ctx.clone();
    let sigma = sigma_from_a(&ctx, a, convention, zt)?;
    let t = match convention {
        Convention::InverseOfA => invert(a, zt)?,
        Convention::DirectA => a.clone(),
    };
    let transformed = transform_fields(&t, &standard_prolong_all(ws, n)?)?;
    let prolonged = sigma_prolong(&transform_fields(&t, ws)?, &sigma, n)?;
    let mut residuals = Vec::new();
    for (i, (l, r)) in transformed.iter().zip(&prolonged).enumerate() {
        for ((s, a), (_, b)) in l.coefficients().iter().zip(r.coefficients()) {
            residuals.push(Residual::new(format!("Y{}[{}]", i + 1, s), a.sub(&b), zt)?);
        }
    }
    Ok(RoundTrip { sigma, transformed, prolonged, residuals })
}

/// `B sigma B^{-1} + B D_x(B^{-1})`.
pub fn gauge_transform_sigma(ctx: &JetContext, b: &Matrix, sigma: &Matrix, zt: &ZeroTest) -> Result<Matrix> {
    let inv = invert(b, zt)?;
    b.mul(sigma)?.mul(&inv)?.add(&b.mul(&inv.total_derivative(ctx))?)
}

/// Structure functions of `Z_i = A_im Y_m` from those of the `Y`.
pub fn theta_from_mu(a: &Matrix, ys: &[VectorField], mu: &StructureFunctions, zt: &ZeroTest) -> Result<StructureFunctions> {
    let r = ys.len();
    if a.rows() != r || a.cols() != r || mu.r() != r {
        return Err(Error::DimensionMismatch("A, fields and structure functions disagree".into()));
    }
    let inv = invert(a, zt)?;
    let mut theta = StructureFunctions::zeros(r);
    for j in 0..r {
        for i in 0..j {
            let bracket: Vec<Expr> = (0..r)
                .map(|h| {
                    let mut acc = Expr::zero();
                    for m in 0..r {
                        for l in 0..r {
                            acc = acc.add(&a.get(i, m).mul(mu.get(m, l, h)).mul(a.get(j, l)));
                        }
                        acc = acc.add(&a.get(i, m).mul(&ys[m].apply(a.get(j, h))));
                        acc = acc.sub(&a.get(j, m).mul(&ys[m].apply(a.get(i, h))));
                    }
                    acc
                })
                .collect();
            for k in 0..r {
                let t = Expr::sum(&(0..r).map(|h| bracket[h].mul(inv.get(h, k))).collect::<Vec<_>>());
                theta.set(i, j, k, t);
            }
        }
    }
    Ok(theta)
}

/// Data known on one side of `Phi = M^{-1} Phi S^T`.
#[derive(Clone, Debug)]
pub enum BridgeGiven {
    S(Matrix),
    M(Matrix),
}

#[derive(Clone, Debug)]
pub struct Bridge {
    pub s: Matrix,
    pub m: Matrix,
    /// `[Phi^{-1} D_x Phi, S^T]`.
    pub commutator: Matrix,
    pub lift: ZeroVerdict,
}

pub fn mu_sigma_bridge(ctx: &JetContext, phi: &Matrix, given: &BridgeGiven, zt: &ZeroTest) -> Result<Bridge> {
    let inv = invert(phi, zt)?;
    let (s, m) = match given {
        BridgeGiven::S(s) => (s.clone(), phi.mul(&s.transpose())?.mul(&inv)?),
        BridgeGiven::M(m) => (inv.mul(m)?.mul(phi)?.transpose(), m.clone()),
    };
    let g = inv.mul(&phi.total_derivative(ctx))?;
    let st = s.transpose();
    let commutator = g.mul(&st)?.sub(&st.mul(&g)?)?;
    let lift = commutator.equals(&Matrix::zeros(commutator.rows(), commutator.cols()), zt)?;
    Ok(Bridge { s, m, commutator, lift })
}

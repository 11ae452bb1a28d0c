//! Structure functions, bracket closure and the conditions on σ that
//! preserve involution relations under σ-prolongation.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::check::{overall, Residual, Verdict};
use crate::error::{Error, Result};
use crate::expr::{common_denominator, rational_gcd, Expr, Symbol, ZeroTest};
use crate::jet::{common_order, lie_bracket, VectorField};
use crate::linalg::{zero_status, Matrix};
use crate::prolong::{sigma_prolong, validate_sigma};

/// How bracket membership in the span of a set is decided.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SpanMode {
    /// Combinations with function coefficients (the distribution spanned).
    #[default]
    Functions,
    /// Combinations with rational constant coefficients.
    Constants,
}

/// `mu[i][j][k]`, antisymmetric in `(i, j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureFunctions {
    r: usize,
    mu: Vec<Expr>,
}

impl StructureFunctions {
    pub fn zeros(r: usize) -> StructureFunctions {
        StructureFunctions { r, mu: vec![Expr::zero(); r * r * r] }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &Expr {
        &self.mu[(i * self.r + j) * self.r + k]
    }

    /// Sets `mu[i][j][k]` and `mu[j][i][k] = -value`.
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: Expr) {
        let r = self.r;
        self.mu[(j * r + i) * r + k] = value.neg();
        self.mu[(i * r + j) * r + k] = value;
    }

    /// The bracket coefficients `(mu[i][j][k])_k`.
    pub fn row(&self, i: usize, j: usize) -> Vec<Expr> {
        (0..self.r).map(|k| self.get(i, j, k).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.mu.iter().all(Expr::is_zero)
    }

    pub fn is_antisymmetric(&self) -> bool {
        (0..self.r).all(|i| {
            (0..self.r).all(|j| (0..self.r).all(|k| self.get(i, j, k).add(self.get(j, i, k)).is_zero()))
        })
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> StructureFunctions {
        StructureFunctions { r: self.r, mu: self.mu.iter().map(f).collect() }
    }

    pub fn entries(&self) -> &[Expr] {
        &self.mu
    }
}

/// A bracket leaving the span.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonInvolutive {
    pub pair: (usize, usize),
    pub bracket: VectorField,
    /// Bracket reduced modulo the span.
    pub residual: VectorField,
    /// First coordinate on which the residual does not vanish.
    pub coordinate: Symbol,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Involution {
    Involutive(StructureFunctions),
    NotInvolutive(NonInvolutive),
}

impl Involution {
    pub fn structure_functions(&self) -> Option<&StructureFunctions> {
        match self {
            Involution::Involutive(s) => Some(s),
            Involution::NotInvolutive(_) => None,
        }
    }
}

struct Row {
    pivot: usize,
    entries: Vec<Expr>,
    combo: Vec<Expr>,
}

/// Incrementally maintained span of a list of fields.
pub struct Span {
    mode: SpanMode,
    zt: ZeroTest,
    fields: Vec<VectorField>,
    rows: Vec<Row>,
}

impl Span {
    pub fn new(mode: SpanMode, zt: &ZeroTest) -> Span {
        Span { mode, zt: zt.clone(), fields: Vec::new(), rows: Vec::new() }
    }

    pub fn fields(&self) -> &[VectorField] {
        &self.fields
    }

    /// Writes `v = residual + sum combo[k] F_k`.
    pub fn reduce(&self, v: &VectorField) -> Result<(VectorField, Vec<Expr>)> {
        let combo = match self.mode {
            SpanMode::Functions => self.reduce_functions(v)?,
            SpanMode::Constants => self.reduce_constants(v),
        };
        let mut residual = v.clone();
        for (k, c) in combo.iter().enumerate() {
            if !c.is_zero() {
                residual = residual.sub(&self.fields[k].scale(c));
            }
        }
        Ok((residual, combo))
    }

    fn coefficient_vector(v: &VectorField) -> Vec<Expr> {
        v.coefficients().into_iter().map(|(_, c)| c).collect()
    }

    fn reduce_functions(&self, v: &VectorField) -> Result<Vec<Expr>> {
        let mut w = Span::coefficient_vector(v);
        let mut combo = vec![Expr::zero(); self.fields.len()];
        for row in &self.rows {
            let c = &w[row.pivot];
            if c.is_zero() {
                continue;
            }
            let f = c.div(&row.entries[row.pivot]);
            for (x, y) in w.iter_mut().zip(&row.entries) {
                if !y.is_zero() {
                    *x = x.sub(&f.mul(y));
                }
            }
            for (x, y) in combo.iter_mut().zip(&row.combo) {
                if !y.is_zero() {
                    *x = x.add(&f.mul(y));
                }
            }
        }
        Ok(combo)
    }

    /// Rational-coefficient reduction in the basis of monomials over a
    /// per-coordinate common denominator.
    fn reduce_constants(&self, v: &VectorField) -> Vec<Expr> {
        type Key = (usize, Expr);
        let all: Vec<Vec<Expr>> = self.fields.iter().chain(std::iter::once(v)).map(Span::coefficient_vector).collect();
        let width = all[0].len();
        let dens: Vec<Expr> = (0..width).map(|c| common_denominator(all.iter().map(|f| &f[c]))).collect();
        let to_terms = |f: &Vec<Expr>| -> BTreeMap<Key, BigRational> {
            let mut out = BTreeMap::new();
            for (c, e) in f.iter().enumerate() {
                if e.is_zero() {
                    continue;
                }
                let scaled = e.mul(&dens[c]);
                let terms = scaled.terms().expect("common denominator clears fractions");
                for (m, k) in terms {
                    out.insert((c, m), k);
                }
            }
            out
        };
        let m = self.fields.len();
        let mut basis: Vec<(Key, BTreeMap<Key, BigRational>, Vec<BigRational>)> = Vec::new();
        let reduce = |vec: &mut BTreeMap<Key, BigRational>, combo: &mut Vec<BigRational>, basis: &[(Key, BTreeMap<Key, BigRational>, Vec<BigRational>)]| {
            for (pk, row, rc) in basis {
                let Some(c) = vec.get(pk).cloned() else {
                    continue;
                };
                let f = c / &row[pk];
                for (k, y) in row {
                    let e = vec.entry(k.clone()).or_insert_with(BigRational::zero);
                    *e -= &f * y;
                    if e.is_zero() {
                        vec.remove(k);
                    }
                }
                for (x, y) in combo.iter_mut().zip(rc) {
                    *x += &f * y;
                }
            }
        };
        for (i, f) in all[..m].iter().enumerate() {
            let mut vec = to_terms(f);
            let mut combo = vec![BigRational::zero(); m];
            reduce(&mut vec, &mut combo, &basis);
            // `f - sum combo F = vec`, so `vec` has combination `e_i - combo`.
            let mut rc: Vec<BigRational> = combo.into_iter().map(|c| -c).collect();
            rc[i] += BigRational::one();
            if let Some((k, _)) = vec.iter().next() {
                let k = k.clone();
                basis.push((k, vec, rc));
            }
        }
        let mut vec = to_terms(&all[m]);
        let mut combo = vec![BigRational::zero(); m];
        reduce(&mut vec, &mut combo, &basis);
        combo.into_iter().map(Expr::rational).collect()
    }

    /// Adds a field; returns false (and adds nothing) when it already lies
    /// in the span.
    pub fn push(&mut self, v: VectorField) -> Result<bool> {
        let (residual, combo) = self.reduce(&v)?;
        if self.first_nonzero(&residual)?.is_none() {
            return Ok(false);
        }
        if self.mode == SpanMode::Functions {
            let entries = Span::coefficient_vector(&residual);
            let pivot = self.first_nonzero(&residual)?.expect("nonzero residual");
            let mut rc: Vec<Expr> = combo.iter().map(Expr::neg).collect();
            rc.push(Expr::one());
            for row in &mut self.rows {
                row.combo.push(Expr::zero());
            }
            self.rows.push(Row { pivot, entries, combo: rc });
        }
        self.fields.push(v);
        Ok(true)
    }

    /// Index into `coefficients()` of the first nonzero entry.
    fn first_nonzero(&self, v: &VectorField) -> Result<Option<usize>> {
        for (i, (_, c)) in v.coefficients().iter().enumerate() {
            match zero_status(c, &self.zt)? {
                Some(true) => {}
                Some(false) => return Ok(Some(i)),
                None => return Err(Error::PivotUndecidable { row: self.fields.len(), col: i }),
            }
        }
        Ok(None)
    }
}

/// Divides out the rational content, making the first nonzero coefficient's
/// leading term positive. Returns the normalized field and the factor.
pub fn strip_content(v: &VectorField) -> (VectorField, BigRational) {
    let coeffs: Vec<Expr> = v.coefficients().into_iter().map(|(_, c)| c).filter(|c| !c.is_zero()).collect();
    let contents: Vec<BigRational> = coeffs.iter().map(Expr::numeric_content).collect();
    let mut c = rational_gcd(&contents);
    if coeffs.first().map(Expr::leading_sign) == Some(-1) {
        c = -c;
    }
    if c.is_one() {
        return (v.clone(), c);
    }
    let k = Expr::rational(c.recip());
    (v.scale(&k), c)
}

fn bracket_table(span: &Span) -> Result<std::result::Result<StructureFunctions, NonInvolutive>> {
    let fields = span.fields();
    let r = fields.len();
    let mut mu = StructureFunctions::zeros(r);
    for j in 0..r {
        for i in 0..j {
            let b = lie_bracket(&fields[i], &fields[j])?;
            let (residual, combo) = span.reduce(&b)?;
            if let Some(idx) = span.first_nonzero(&residual)? {
                let coordinate = residual.coefficients()[idx].0.clone();
                return Ok(Err(NonInvolutive { pair: (i, j), bracket: b, residual, coordinate }));
            }
            for (k, c) in combo.into_iter().enumerate() {
                mu.set(i, j, k, c);
            }
        }
    }
    Ok(Ok(mu))
}

fn span_of(vs: &[VectorField], mode: SpanMode, zt: &ZeroTest) -> Result<Span> {
    common_order(vs)?;
    let mut span = Span::new(mode, zt);
    for (i, v) in vs.iter().enumerate() {
        if !span.push(v.clone())? {
            return Err(Error::DimensionMismatch(format!("field {} lies in the span of the preceding ones", i)));
        }
    }
    Ok(span)
}

/// Solves `[V_i, V_j] = mu_ij^k V_k` with function coefficients.
pub fn structure_functions(vs: &[VectorField], zt: &ZeroTest) -> Result<Involution> {
    structure_functions_in(vs, SpanMode::Functions, zt)
}

pub fn structure_functions_in(vs: &[VectorField], mode: SpanMode, zt: &ZeroTest) -> Result<Involution> {
    let span = span_of(vs, mode, zt)?;
    Ok(match bracket_table(&span)? {
        Ok(mu) => Involution::Involutive(mu),
        Err(w) => Involution::NotInvolutive(w),
    })
}

/// Origin of a generator adjoined by the closure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Adjoined {
    pub index: usize,
    pub pair: (usize, usize),
    /// The adjoined field times this constant is the bracket residual.
    pub factor: BigRational,
}

#[derive(Clone, Debug)]
pub struct Closure {
    pub fields: Vec<VectorField>,
    pub structure: StructureFunctions,
    pub adjoined: Vec<Adjoined>,
}

pub const DEFAULT_MAX_NEW: usize = 8;

/// Adjoins reduced bracket residuals until the set is involutive.
pub fn close_under_bracket(vs: &[VectorField], max_new: usize, mode: SpanMode, zt: &ZeroTest) -> Result<Closure> {
    let mut span = span_of(vs, mode, zt)?;
    let mut adjoined = Vec::new();
    let mut j = 1;
    while j < span.fields().len() {
        for i in 0..j {
            let b = lie_bracket(&span.fields()[i], &span.fields()[j])?;
            let (residual, _) = span.reduce(&b)?;
            if span.first_nonzero(&residual)?.is_none() {
                continue;
            }
            if adjoined.len() == max_new {
                return Err(Error::ClosureExceeded(max_new));
            }
            let (field, factor) = strip_content(&residual);
            adjoined.push(Adjoined { index: span.fields().len(), pair: (i, j), factor });
            span.push(field)?;
        }
        j += 1;
    }
    let structure = match bracket_table(&span)? {
        Ok(mu) => mu,
        Err(w) => return Err(Error::NotInvolutive(w.pair.0, w.pair.1)),
    };
    Ok(Closure { fields: span.fields, structure, adjoined })
}

#[derive(Clone, Debug)]
pub struct Theorem2Report {
    /// Structure functions of the base fields.
    pub mu: StructureFunctions,
    /// `Q_ij^k = Y_i(sigma_j^k) - Y_j(sigma_i^k)` on first σ-prolongations.
    pub q: StructureFunctions,
    pub r: StructureFunctions,
    /// `sum_k Q_ij^k phi^a_k` for `i < j`, indexed by pair then `a`.
    pub q_phi: Vec<((usize, usize), Vec<Expr>)>,
    /// One residual per `R_ij^k`, `i < j`.
    pub la: Vec<Residual>,
    /// One residual per `sum_k R_ij^k phi^a_k`, `i < j`.
    pub lagen: Vec<Residual>,
}

impl Theorem2Report {
    pub fn holds_la(&self) -> Verdict {
        overall(&self.la)
    }

    pub fn holds_lagen(&self) -> Verdict {
        overall(&self.lagen)
    }
}

pub fn check_theorem2(xs: &[VectorField], sigma: &Matrix, zt: &ZeroTest) -> Result<Theorem2Report> {
    let r = xs.len();
    let Some(first) = xs.first() else {
        return Err(Error::DimensionMismatch("empty field set".into()));
    };
    let ctx = first.ctx.clone();
    validate_sigma(&ctx, sigma, r)?;
    let mu = match structure_functions(xs, zt)? {
        Involution::Involutive(mu) => mu,
        Involution::NotInvolutive(w) => return Err(Error::NotInvolutive(w.pair.0, w.pair.1)),
    };
    let ys = sigma_prolong(xs, sigma, 1)?;
    let s = |i: usize, k: usize| sigma.get(i, k);
    let mut q = StructureFunctions::zeros(r);
    let mut rr = StructureFunctions::zeros(r);
    for j in 0..r {
        for i in 0..j {
            for k in 0..r {
                let qv = ys[i].apply(s(j, k)).sub(&ys[j].apply(s(i, k)));
                let mut rv = qv.add(&ctx.total_derivative(mu.get(i, j, k)));
                for m in 0..r {
                    rv = rv.add(&s(i, m).mul(mu.get(m, j, k)));
                    rv = rv.sub(&s(j, m).mul(mu.get(m, i, k)));
                    rv = rv.sub(&mu.get(i, j, m).mul(s(m, k)));
                }
                q.set(i, j, k, qv);
                rr.set(i, j, k, rv);
            }
        }
    }
    let contract = |t: &StructureFunctions, i: usize, j: usize| -> Vec<Expr> {
        (0..ctx.p())
            .map(|a| Expr::sum(&(0..r).map(|k| t.get(i, j, k).mul(&xs[k].psi[a][0])).collect::<Vec<_>>()))
            .collect()
    };
    let mut q_phi = Vec::new();
    let mut la = Vec::new();
    let mut lagen = Vec::new();
    for j in 0..r {
        for i in 0..j {
            q_phi.push(((i, j), contract(&q, i, j)));
            for k in 0..r {
                la.push(Residual::new(format!("R[{},{}][{}]", i + 1, j + 1, k + 1), rr.get(i, j, k).clone(), zt)?);
            }
            for (a, e) in contract(&rr, i, j).into_iter().enumerate() {
                lagen.push(Residual::new(format!("R[{},{}].phi^{}", i + 1, j + 1, a + 1), e, zt)?);
            }
        }
    }
    Ok(Theorem2Report { mu, q, r: rr, q_phi, la, lagen })
}

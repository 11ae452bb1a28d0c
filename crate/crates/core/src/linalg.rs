//! Matrices of expressions and fraction-free elimination.

use std::fmt;

use crate::error::{Error, Result};
use crate::expr::{Expr, ZeroTest, ZeroVerdict};
use crate::jet::JetContext;

/// `Some(true)` for zero, `Some(false)` for nonzero, `None` when undecided.
pub fn zero_status(e: &Expr, zt: &ZeroTest) -> Result<Option<bool>> {
    if e.is_zero() {
        return Ok(Some(true));
    }
    if e.provably_nonzero() {
        return Ok(Some(false));
    }
    Ok(match zt.check(e)? {
        ZeroVerdict::Zero => Some(true),
        ZeroVerdict::NonZero(_) => Some(false),
        ZeroVerdict::Unknown => None,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Expr>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![Expr::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Expr::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Expr>>) -> Result<Matrix> {
        let r = rows.len();
        let c = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged matrix rows".into()));
        }
        Ok(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// Parses a row-major list of entries.
    pub fn parse(ctx: &JetContext, rows: &[&[&str]]) -> Result<Matrix> {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|s| ctx.parse(s).map_err(Error::from)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_rows(rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, e: Expr) {
        self.data[i * self.cols + j] = e;
    }

    pub fn row(&self, i: usize) -> Vec<Expr> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn to_rows(&self) -> Vec<Vec<Expr>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn entries(&self) -> &[Expr] {
        &self.data
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.add(b)).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.sub(b)).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, k: &Expr) -> Matrix {
        self.map(|e| e.mul(k))
    }

    pub fn neg(&self) -> Matrix {
        self.map(Expr::neg)
    }

    fn same_shape(&self, other: &Matrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} against {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Expr::zero();
                for k in 0..self.cols {
                    let (a, b) = (self.get(i, k), other.get(k, j));
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.add(&a.mul(b));
                    }
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Expr]) -> Result<Vec<Expr>> {
        let col = Matrix::from_rows(v.iter().map(|e| vec![e.clone()]).collect())?;
        Ok(self.mul(&col)?.data)
    }

    /// Entrywise total derivative.
    pub fn total_derivative(&self, ctx: &JetContext) -> Matrix {
        self.map(|e| ctx.total_derivative(e))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Expr::is_zero)
    }

    pub fn det(&self, zt: &ZeroTest) -> Result<Expr> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut m = self.to_rows();
        let mut prev = Expr::one();
        let mut sign = false;
        for k in 0..n {
            let Some(p) = find_pivot(&m, k, k, zt)? else {
                return Ok(Expr::zero());
            };
            if p != k {
                m.swap(p, k);
                sign = !sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = m[k][k].mul(&m[i][j]).sub(&m[i][k].mul(&m[k][j])).div(&prev);
                    m[i][j] = v;
                }
                m[i][k] = Expr::zero();
            }
            prev = m[k][k].clone();
        }
        Ok(if sign { prev.neg() } else { prev })
    }

    pub fn inverse(&self, zt: &ZeroTest) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let e: Vec<Expr> = (0..n).map(|i| if i == j { Expr::one() } else { Expr::zero() }).collect();
            match linear_solve(self, &e, zt)? {
                Solution::Unique(x) => cols.push(x),
                _ => return Err(Error::SingularMatrix),
            }
        }
        let mut inv = Matrix::zeros(n, n);
        for (j, c) in cols.into_iter().enumerate() {
            for (i, e) in c.into_iter().enumerate() {
                inv.set(i, j, e);
            }
        }
        Ok(inv)
    }

    /// Entrywise comparison through the zero test.
    pub fn equals(&self, other: &Matrix, zt: &ZeroTest) -> Result<ZeroVerdict> {
        self.same_shape(other)?;
        let mut unknown = false;
        for (a, b) in self.data.iter().zip(&other.data) {
            match zt.check(&a.sub(b))? {
                ZeroVerdict::Zero => {}
                v @ ZeroVerdict::NonZero(_) => return Ok(v),
                ZeroVerdict::Unknown => unknown = true,
            }
        }
        Ok(if unknown { ZeroVerdict::Unknown } else { ZeroVerdict::Zero })
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(|e| e.to_string()).collect();
            write!(f, "{}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// First row at or below `from` with a nonzero entry in column `col`.
fn find_pivot(m: &[Vec<Expr>], from: usize, col: usize, zt: &ZeroTest) -> Result<Option<usize>> {
    let mut undecided = None;
    for (i, row) in m.iter().enumerate().skip(from) {
        match zero_status(&row[col], zt)? {
            Some(false) => return Ok(Some(i)),
            Some(true) => {}
            None => undecided = undecided.or(Some(i)),
        }
    }
    match undecided {
        Some(row) => Err(Error::PivotUndecidable { row, col }),
        None => Ok(None),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    Unique(Vec<Expr>),
    /// Row `row` of the echelon form reads `0 = residual`.
    Inconsistent { row: usize, residual: Expr },
    /// One particular solution (free unknowns set to zero).
    Underdetermined { particular: Vec<Expr>, free: Vec<usize> },
}

/// Echelon form of the rows, with pivot columns. Columns at or beyond
/// `pivot_cols` are carried along but never pivoted on.
pub struct Echelon {
    pub rows: Vec<Vec<Expr>>,
    pub pivots: Vec<usize>,
    /// Original index of each echelon row.
    pub order: Vec<usize>,
}

pub fn echelon(rows: &[Vec<Expr>], pivot_cols: usize, zt: &ZeroTest) -> Result<Echelon> {
    let mut m = rows.to_vec();
    let mut order: Vec<usize> = (0..m.len()).collect();
    let width = m.first().map(Vec::len).unwrap_or(0);
    let mut pivots = Vec::new();
    let mut prev = Expr::one();
    let mut r = 0;
    for c in 0..pivot_cols {
        if r == m.len() {
            break;
        }
        let Some(p) = find_pivot(&m, r, c, zt)? else {
            continue;
        };
        m.swap(p, r);
        order.swap(p, r);
        for i in r + 1..m.len() {
            if m[i][c].is_zero() {
                for j in c + 1..width {
                    m[i][j] = m[r][c].mul(&m[i][j]).div(&prev);
                }
                continue;
            }
            for j in c + 1..width {
                m[i][j] = m[r][c].mul(&m[i][j]).sub(&m[i][c].mul(&m[r][j])).div(&prev);
            }
            m[i][c] = Expr::zero();
        }
        prev = m[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    Ok(Echelon { rows: m, pivots, order })
}

pub fn rank(rows: &[Vec<Expr>], zt: &ZeroTest) -> Result<usize> {
    let width = rows.first().map(Vec::len).unwrap_or(0);
    Ok(echelon(rows, width, zt)?.pivots.len())
}

/// Solves `a x = b`.
pub fn linear_solve(a: &Matrix, b: &[Expr], zt: &ZeroTest) -> Result<Solution> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!("{} right-hand sides for {} rows", b.len(), a.rows())));
    }
    let n = a.cols();
    let aug: Vec<Vec<Expr>> = (0..a.rows())
        .map(|i| {
            let mut r = a.row(i);
            r.push(b[i].clone());
            r
        })
        .collect();
    let ech = echelon(&aug, n, zt)?;
    let rank = ech.pivots.len();
    for (i, row) in ech.rows.iter().enumerate().skip(rank) {
        if zero_status(&row[n], zt)? != Some(true) {
            return Ok(Solution::Inconsistent { row: ech.order[i], residual: row[n].clone() });
        }
    }
    let mut x = vec![Expr::zero(); n];
    for (r, &c) in ech.pivots.iter().enumerate().rev() {
        let row = &ech.rows[r];
        let mut acc = row[n].clone();
        for j in c + 1..n {
            if !row[j].is_zero() && !x[j].is_zero() {
                acc = acc.sub(&row[j].mul(&x[j]));
            }
        }
        x[c] = acc.div(&row[c]);
    }
    if rank == n {
        Ok(Solution::Unique(x))
    } else {
        let free = (0..n).filter(|c| !ech.pivots.contains(c)).collect();
        Ok(Solution::Underdetermined { particular: x, free })
    }
}

//! Fixed-step RK4 integration of solved systems and trajectory checks of
//! invariants and reductions.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::expr::{sample_point, Expr, OpaqueDefs, Symbol};
use crate::jet::JetContext;
use crate::reduction::{CoordinateChange, OdeSystem};

/// Samples `u^a_k`, `k < q_a`, on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub ctx: JetContext,
    pub coords: Vec<Symbol>,
    pub grid: Vec<f64>,
    /// `values[step][slot]`.
    pub values: Vec<Vec<f64>>,
    pub h: f64,
}

impl Trajectory {
    pub fn column(&self, s: &Symbol) -> Option<Vec<f64>> {
        let i = self.coords.iter().position(|c| c == s)?;
        Some(self.values.iter().map(|row| row[i]).collect())
    }

    pub fn last(&self) -> &[f64] {
        self.values.last().expect("nonempty trajectory")
    }

    /// Evaluates `e` at grid point `step`.
    pub fn eval_at(&self, e: &Expr, step: usize, defs: &OpaqueDefs) -> Result<f64> {
        let x = self.ctx.x();
        let row = &self.values[step];
        let t = self.grid[step];
        let lookup = |s: &Symbol| {
            if *s == x {
                return Some(t);
            }
            self.coords.iter().position(|c| c == s).map(|i| row[i])
        };
        Ok(e.eval_with(&lookup, defs)?)
    }

    /// Header `t,<coord>...`, 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for c in &self.coords {
            out.push(',');
            out.push_str(c.name());
        }
        out.push('\n');
        for (t, row) in self.grid.iter().zip(&self.values) {
            out.push_str(&format_g12(*t));
            for v in row {
                out.push(',');
                out.push_str(&format_g12(*v));
            }
            out.push('\n');
        }
        out
    }
}

/// `%.12g`.
pub fn format_g12(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    let s = if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, v);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{:.11e}", v);
        let (m, e) = s.split_once('e').expect("exponent");
        let m = if m.contains('.') { m.trim_end_matches('0').trim_end_matches('.') } else { m };
        let e: i32 = e.parse().expect("exponent");
        format!("{}e{}{:02}", m, if e < 0 { '-' } else { '+' }, e.abs())
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

enum Slot {
    Next(usize),
    Rhs(usize),
}

struct FirstOrder {
    coords: Vec<Symbol>,
    slots: Vec<Slot>,
    rhs: Vec<Expr>,
}

fn first_order(sys: &OdeSystem) -> Result<FirstOrder> {
    let solved = sys.solved.as_ref().ok_or(Error::NoSolvedForm)?;
    let mut rows: Vec<&(usize, usize, Expr)> = solved.iter().collect();
    rows.sort_by_key(|(a, _, _)| *a);
    let present: BTreeSet<usize> = rows.iter().map(|(a, _, _)| *a).collect();
    if present.len() != sys.ctx.p() || rows.len() != sys.ctx.p() {
        return Err(Error::DimensionMismatch("solved form must designate one derivative per dependent".into()));
    }
    let (mut coords, mut slots, mut rhs) = (Vec::new(), Vec::new(), Vec::new());
    for (a, q, r) in rows {
        if *q == 0 {
            return Err(Error::DimensionMismatch(format!("order zero equation for {}", sys.ctx.dependents()[*a])));
        }
        for k in 0..*q {
            coords.push(sys.ctx.coord(*a, k));
            if k + 1 < *q {
                slots.push(Slot::Next(coords.len()));
            } else {
                slots.push(Slot::Rhs(rhs.len()));
                rhs.push(r.clone());
            }
        }
    }
    Ok(FirstOrder { coords, slots, rhs })
}

impl FirstOrder {
    fn eval(&self, x: &Symbol, t: f64, y: &[f64], defs: &OpaqueDefs) -> Result<Vec<f64>> {
        let lookup = |s: &Symbol| {
            if s == x {
                return Some(t);
            }
            self.coords.iter().position(|c| c == s).map(|i| y[i])
        };
        let r: Vec<f64> = self.rhs.iter().map(|e| e.eval_with(&lookup, defs)).collect::<std::result::Result<_, _>>()?;
        Ok(self
            .slots
            .iter()
            .map(|s| match s {
                Slot::Next(j) => y[*j],
                Slot::Rhs(j) => r[*j],
            })
            .collect())
    }
}

fn axpy(y: &[f64], k: &[f64], c: f64) -> Vec<f64> {
    y.iter().zip(k).map(|(a, b)| a + c * b).collect()
}

/// Classical RK4 on the first-order reformulation. `initial` must cover
/// every `u^a_k` with `k < q_a`.
pub fn integrate(
    sys: &OdeSystem,
    initial: &BTreeMap<Symbol, f64>,
    t_span: (f64, f64),
    h: f64,
    defs: &OpaqueDefs,
) -> Result<Trajectory> {
    if !(h > 0.0) || !(t_span.1 > t_span.0) {
        return Err(Error::NonFinite(h));
    }
    let fo = first_order(sys)?;
    let x = sys.ctx.x();
    let mut y: Vec<f64> = fo
        .coords
        .iter()
        .map(|c| initial.get(c).copied().ok_or_else(|| Error::MissingSessionData(format!("initial value for {}", c))))
        .collect::<Result<_>>()?;
    let steps = ((t_span.1 - t_span.0) / h).round() as usize;
    let mut grid = vec![t_span.0];
    let mut values = vec![y.clone()];
    for n in 0..steps {
        let t = t_span.0 + n as f64 * h;
        let k1 = fo.eval(&x, t, &y, defs)?;
        let k2 = fo.eval(&x, t + h / 2.0, &axpy(&y, &k1, h / 2.0), defs)?;
        let k3 = fo.eval(&x, t + h / 2.0, &axpy(&y, &k2, h / 2.0), defs)?;
        let k4 = fo.eval(&x, t + h, &axpy(&y, &k3, h), defs)?;
        for i in 0..y.len() {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t1 = t_span.0 + (n + 1) as f64 * h;
        if let Some(bad) = y.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(*bad));
        }
        grid.push(t1);
        values.push(y.clone());
    }
    Ok(Trajectory { ctx: sys.ctx.clone(), coords: fo.coords, grid, values, h })
}

/// Central differences inside, second-order one-sided at the ends.
pub fn central_difference(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    if n < 3 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            if i == 0 {
                (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h)
            } else if i == n - 1 {
                (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h)
            } else {
                (values[i + 1] - values[i - 1]) / (2.0 * h)
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub values: Vec<f64>,
    pub derivative: Vec<f64>,
}

/// Restricts `e` to the solution manifold and samples it along `traj`.
pub fn invariant_along_trajectory(sys: &OdeSystem, e: &Expr, traj: &Trajectory, defs: &OpaqueDefs) -> Result<Series> {
    let r = sys.restrict(e)?;
    let values: Vec<f64> = (0..traj.grid.len()).map(|i| traj.eval_at(&r, i, defs)).collect::<Result<_>>()?;
    let derivative = central_difference(&values, traj.h);
    Ok(Series { values, derivative })
}

/// For each state slot `z^j_k` of the reduced system, the old-coordinate
/// expression `D_x^k forward_j`.
pub fn lifted_state(change: &CoordinateChange, reduced: &OdeSystem) -> Result<Vec<(Symbol, Expr)>> {
    let fo = first_order(reduced)?;
    let names = change.new_names();
    fo.coords
        .iter()
        .map(|c| {
            let (j, k) = reduced.ctx.decode(c).ok_or_else(|| Error::DimensionMismatch(c.to_string()))?;
            let name = &reduced.ctx.dependents()[j];
            let idx = names.iter().position(|n| n == name).ok_or_else(|| Error::DimensionMismatch(name.clone()))?;
            Ok((c.clone(), change.source.total_derivative_n(&change.forward[idx], k)))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    /// Lifted series along the full trajectory, one per reduced state slot.
    pub lifted: Vec<(Symbol, Vec<f64>)>,
    pub full: Trajectory,
    pub reduced: Trajectory,
    /// Sup-norm of lifted minus reduced trajectory values.
    pub flow_error: f64,
    /// Sup-norm of the reduced equations evaluated on lifted series, with
    /// derivatives from central differences.
    pub defect: f64,
}

impl Reconstruction {
    pub fn within(&self, tol: f64) -> bool {
        self.flow_error <= tol && self.defect <= tol
    }
}

/// Integrates the full system, lifts its trajectory through the forward
/// coordinates, and compares with the integrated reduced system started
/// from the lifted initial values.
pub fn reconstruction_check(
    full: &OdeSystem,
    reduced: &OdeSystem,
    change: &CoordinateChange,
    initial: &BTreeMap<Symbol, f64>,
    t_span: (f64, f64),
    h: f64,
    defs: &OpaqueDefs,
) -> Result<Reconstruction> {
    let traj = integrate(full, initial, t_span, h, defs)?;
    let mut lifted = Vec::new();
    for (s, e) in lifted_state(change, reduced)? {
        lifted.push((s, invariant_along_trajectory(full, &e, &traj, defs)?));
    }
    let start: BTreeMap<Symbol, f64> = lifted.iter().map(|(s, series)| (s.clone(), series.values[0])).collect();
    let red = integrate(reduced, &start, t_span, h, defs)?;
    if red.grid.len() != traj.grid.len() || red.grid.iter().zip(&traj.grid).any(|(a, b)| (a - b).abs() > 1e-12) {
        return Err(Error::GridMismatch);
    }
    let mut flow_error: f64 = 0.0;
    for (s, series) in &lifted {
        let col = red.column(s).ok_or(Error::GridMismatch)?;
        for (a, b) in series.values.iter().zip(col) {
            flow_error = flow_error.max((a - b).abs());
        }
    }
    let fo = first_order(reduced)?;
    let x = reduced.ctx.x();
    let mut defect: f64 = 0.0;
    for step in 0..traj.grid.len() {
        let y: Vec<f64> = lifted.iter().map(|(_, s)| s.values[step]).collect();
        let f = fo.eval(&x, traj.grid[step], &y, defs)?;
        for (i, (_, series)) in lifted.iter().enumerate() {
            defect = defect.max((series.derivative[step] - f[i]).abs());
        }
    }
    Ok(Reconstruction {
        lifted: lifted.into_iter().map(|(s, series)| (s, series.values)).collect(),
        full: traj,
        reduced: red,
        flow_error,
        defect,
    })
}

/// `|y_h - y_{h/2}| / |y_{h/2} - y_{h/4}|` at the endpoint, in max-norm.
pub fn convergence_ratio(
    sys: &OdeSystem,
    initial: &BTreeMap<Symbol, f64>,
    t_span: (f64, f64),
    h: f64,
    defs: &OpaqueDefs,
) -> Result<f64> {
    let ends: Vec<Vec<f64>> = [h, h / 2.0, h / 4.0]
        .iter()
        .map(|&s| integrate(sys, initial, t_span, s, defs).map(|t| t.last().to_vec()))
        .collect::<Result<_>>()?;
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(dist(&ends[0], &ends[1]) / dist(&ends[1], &ends[2]))
}

/// Random rational point in `x`, the jet coordinates and the parameters of
/// `ctx`, off the zero sets of `deny`.
pub fn sample_jet_point(ctx: &JetContext, seed: u64, deny: &[Expr]) -> Result<BTreeMap<Symbol, BigRational>> {
    let mut syms: BTreeSet<Symbol> = ctx.coordinates(ctx.order()).into_iter().collect();
    syms.extend(ctx.params().iter().map(|p| Symbol::new(p)));
    for d in deny {
        syms.extend(d.symbols());
    }
    sample_point(&syms, seed, deny, &OpaqueDefs::new(), 1000).ok_or(Error::Exhausted)
}

//! Line-oriented session files.
//!
//! ```text
//! [context]
//! independent=x dependent=u,v order=2
//! [field X1]
//! xi=0 phi=1,0
//! [sigma]
//! row=0,v_x
//! row=u_x,0
//! [equation]
//! solved=u_2:u_x*v_x*(1 + exp(-u))
//! ```
//!
//! A line holds `key=value` pairs; a key starts after whitespace and values
//! run to the next key, so expressions may contain spaces. Sections may come
//! in any order.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::determining::Ansatz;
use crate::equivalence::Convention;
use crate::error::{Error, Result};
use crate::expr::{Expr, Symbol, ZeroTest};
use crate::involution::SpanMode;
use crate::jet::{JetContext, VectorField};
use crate::linalg::Matrix;
use crate::reduction::{CoordinateChange, OdeSystem};

#[derive(Clone, Debug)]
pub struct Options {
    pub convention: Convention,
    pub span: SpanMode,
    /// Base invariant for IBDP; `x` when absent.
    pub eta: Option<Expr>,
    /// `[field]` entries are the standard-side `W`; the σ-side fields are
    /// then derived through matrix `A`.
    pub standard_side: bool,
    pub deny: Vec<Expr>,
}

impl Default for Options {
    fn default() -> Self {
        Options { convention: Convention::InverseOfA, span: SpanMode::Functions, eta: None, standard_side: false, deny: Vec::new() }
    }
}

#[derive(Clone, Debug)]
pub struct OracleSpec {
    pub initial: BTreeMap<Symbol, f64>,
    pub t_end: f64,
    pub step: f64,
    /// Coarsest step of the self-convergence test.
    pub ratio_step: f64,
}

#[derive(Clone, Debug)]
pub struct Seed {
    pub expr: Expr,
    pub order: usize,
}

#[derive(Clone, Debug)]
pub struct Session {
    pub ctx: JetContext,
    pub fields: Vec<(String, VectorField)>,
    pub sigma: Option<Matrix>,
    pub system: Option<OdeSystem>,
    pub invariants: Vec<Seed>,
    pub matrices: Vec<(String, Matrix)>,
    pub change: Option<CoordinateChange>,
    pub ansatz: Option<Ansatz>,
    pub options: Options,
    pub oracle: Option<OracleSpec>,
}

impl Session {
    pub fn xs(&self) -> Vec<VectorField> {
        self.fields.iter().map(|(_, f)| f.clone()).collect()
    }

    pub fn matrix(&self, name: &str) -> Option<&Matrix> {
        self.matrices.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }

    pub fn zero_test(&self, trials: usize, seed: u64) -> ZeroTest {
        ZeroTest::new(trials, seed).with_deny(self.options.deny.clone())
    }

    pub fn eta(&self) -> Expr {
        self.options.eta.clone().unwrap_or_else(|| self.ctx.x_expr())
    }
}

pub fn load_session(path: &Path) -> Result<Session> {
    load_session_with(path, None)
}

pub fn load_session_with(path: &Path, max_order: Option<usize>) -> Result<Session> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {}", path.display(), e)))?;
    parse_session(&text, max_order)
}

fn err(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Session { line, col, msg: msg.into() }
}

#[derive(Clone, Debug)]
struct Pair {
    key: String,
    value: String,
    /// 1-based column of the value.
    col: usize,
}

#[derive(Clone, Debug)]
struct Line {
    no: usize,
    words: Vec<String>,
    pairs: Vec<Pair>,
}

#[derive(Clone, Debug)]
struct Section {
    kind: String,
    name: Option<String>,
    no: usize,
    lines: Vec<Line>,
}

fn is_ident(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

/// Splits a line into leading bare words and `key=value` pairs.
fn split_line(text: &str, no: usize) -> Line {
    let b = text.as_bytes();
    let mut starts = Vec::new();
    let mut i = 0;
    while i < b.len() {
        if (i == 0 || b[i - 1].is_ascii_whitespace()) && is_ident(b[i]) {
            let mut j = i;
            while j < b.len() && is_ident(b[j]) {
                j += 1;
            }
            if j < b.len() && b[j] == b'=' {
                starts.push((i, j));
                i = j + 1;
                continue;
            }
        }
        i += 1;
    }
    let head = starts.first().map_or(text.len(), |s| s.0);
    let words = text[..head].split_whitespace().map(str::to_string).collect();
    let pairs = starts
        .iter()
        .enumerate()
        .map(|(n, &(k, eq))| {
            let end = starts.get(n + 1).map_or(text.len(), |s| s.0);
            let raw = &text[eq + 1..end];
            let lead = raw.len() - raw.trim_start().len();
            Pair { key: text[k..eq].to_string(), value: raw.trim().to_string(), col: eq + 2 + lead }
        })
        .collect();
    Line { no, words, pairs }
}

fn sections(text: &str) -> Result<Vec<Section>> {
    let mut out: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let t = content.trim();
        if let Some(inner) = t.strip_prefix('[') {
            let inner = inner.strip_suffix(']').ok_or_else(|| err(no, raw.len(), "unterminated section header"))?;
            let mut it = inner.split_whitespace();
            let kind = it.next().ok_or_else(|| err(no, 2, "empty section header"))?.to_string();
            let name = it.next().map(str::to_string);
            out.push(Section { kind, name, no, lines: Vec::new() });
            continue;
        }
        let sec = out.last_mut().ok_or_else(|| err(no, 1, "content before the first section"))?;
        sec.lines.push(split_line(content, no));
    }
    if out.is_empty() {
        return Err(err(1, 1, "empty session"));
    }
    Ok(out)
}

/// Splits on `sep` outside parentheses and brackets.
fn split_top(s: &str, sep: char) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push((start, &s[start..i]));
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push((start, &s[start..]));
    out
}

struct Builder {
    ctx: JetContext,
}

impl Builder {
    fn expr(&self, text: &str, line: usize, col: usize) -> Result<Expr> {
        let lead = text.len() - text.trim_start().len();
        self.ctx.parse(text.trim()).map_err(|e| err(line, col + lead + e.offset, format!("{:?}", e.kind)))
    }

    fn list(&self, p: &Pair, line: usize) -> Result<Vec<Expr>> {
        split_top(&p.value, ',').into_iter().map(|(off, t)| self.expr(t, line, p.col + off)).collect()
    }

    fn in_ctx(&self, ctx: &JetContext, text: &str, line: usize, col: usize) -> Result<Expr> {
        let lead = text.len() - text.trim_start().len();
        ctx.parse(text.trim()).map_err(|e| err(line, col + lead + e.offset, format!("{:?}", e.kind)))
    }
}

fn one<'a>(sec: &'a [&Section], kind: &str) -> Result<Option<&'a Section>> {
    match sec.iter().filter(|s| s.kind == kind).collect::<Vec<_>>().as_slice() {
        [] => Ok(None),
        [s] => Ok(Some(s)),
        [_, s, ..] => Err(err(s.no, 1, format!("duplicate [{}] section", kind))),
    }
}

fn pairs(s: &Section) -> impl Iterator<Item = (&Line, &Pair)> {
    s.lines.iter().flat_map(|l| l.pairs.iter().map(move |p| (l, p)))
}

fn unknown_key(line: &Line, p: &Pair, sec: &str) -> Error {
    err(line.no, p.col.saturating_sub(p.key.len() + 1), format!("unknown key {} in [{}]", p.key, sec))
}

fn parse_f64(p: &Pair, line: usize) -> Result<f64> {
    p.value.parse::<f64>().map_err(|_| err(line, p.col, format!("expected a number for {}", p.key)))
}

fn parse_context(s: &Section, max_order: Option<usize>) -> Result<JetContext> {
    let (mut ind, mut dep, mut order) = (None, None, None);
    for (l, p) in pairs(s) {
        match p.key.as_str() {
            "independent" => ind = Some(p.value.clone()),
            "dependent" => dep = Some(p.value.split(',').map(|d| d.trim().to_string()).collect::<Vec<_>>()),
            "order" => order = Some(p.value.parse::<usize>().map_err(|_| err(l.no, p.col, "order must be a natural number"))?),
            _ => return Err(unknown_key(l, p, "context")),
        }
    }
    let ind = ind.ok_or_else(|| err(s.no, 1, "[context] needs independent="))?;
    let dep = dep.ok_or_else(|| err(s.no, 1, "[context] needs dependent="))?;
    let order = max_order.or(order).ok_or_else(|| err(s.no, 1, "[context] needs order="))?;
    let names: Vec<&str> = dep.iter().map(String::as_str).collect();
    Ok(JetContext::new(&ind, &names, order))
}

fn parse_matrix(b: &Builder, s: &Section) -> Result<Matrix> {
    let mut rows = Vec::new();
    for (l, p) in pairs(s) {
        if p.key != "row" {
            return Err(unknown_key(l, p, &s.kind));
        }
        rows.push(b.list(p, l.no)?);
    }
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(err(s.no, 1, "rows of different lengths"));
    }
    Ok(Matrix::from_rows(rows)?)
}

/// `r11,r12;r21,r22`.
fn parse_inline_matrix(b: &Builder, p: &Pair, line: usize) -> Result<Matrix> {
    let mut rows = Vec::new();
    for (off, row) in split_top(&p.value, ';') {
        let sub = Pair { key: p.key.clone(), value: row.to_string(), col: p.col + off };
        rows.push(b.list(&sub, line)?);
    }
    Ok(Matrix::from_rows(rows)?)
}

pub fn parse_session(text: &str, max_order: Option<usize>) -> Result<Session> {
    let secs = sections(text)?;
    let all: Vec<&Section> = secs.iter().collect();
    let known = ["context", "params", "functions", "field", "sigma", "equation", "invariant", "matrix", "change", "ansatz", "options", "oracle"];
    if let Some(s) = secs.iter().find(|s| !known.contains(&s.kind.as_str())) {
        return Err(err(s.no, 2, format!("unknown section [{}]", s.kind)));
    }
    let ctx_sec = one(&all, "context")?.ok_or_else(|| err(1, 1, "missing [context] section"))?;
    let mut ctx = parse_context(ctx_sec, max_order)?;
    if let Some(s) = one(&all, "params")? {
        let names: Vec<String> = s.lines.iter().flat_map(|l| l.words.clone()).collect();
        ctx = ctx.with_params(&names.iter().map(String::as_str).collect::<Vec<_>>());
    }
    if let Some(s) = one(&all, "functions")? {
        let mut fs = Vec::new();
        for l in &s.lines {
            for w in &l.words {
                let (n, a) = w.split_once('/').ok_or_else(|| err(l.no, 1, format!("expected name/arity, got {}", w)))?;
                let a: usize = a.parse().map_err(|_| err(l.no, 1, format!("bad arity in {}", w)))?;
                fs.push((n.to_string(), a));
            }
        }
        ctx = ctx.with_functions(&fs.iter().map(|(n, a)| (n.as_str(), *a)).collect::<Vec<_>>());
    }
    let b = Builder { ctx: ctx.clone() };

    let mut options = Options::default();
    if let Some(s) = one(&all, "options")? {
        for (l, p) in pairs(s) {
            match p.key.as_str() {
                "convention" => {
                    options.convention = Convention::from_name(&p.value)
                        .ok_or_else(|| err(l.no, p.col, "convention must be inverse or direct"))?
                }
                "span" => {
                    options.span = match p.value.as_str() {
                        "functions" => SpanMode::Functions,
                        "constants" => SpanMode::Constants,
                        _ => return Err(err(l.no, p.col, "span must be functions or constants")),
                    }
                }
                "side" => {
                    options.standard_side = match p.value.as_str() {
                        "standard" => true,
                        "sigma" => false,
                        _ => return Err(err(l.no, p.col, "side must be standard or sigma")),
                    }
                }
                "eta" => options.eta = Some(b.expr(&p.value, l.no, p.col)?),
                "deny" => options.deny.push(b.expr(&p.value, l.no, p.col)?),
                _ => return Err(unknown_key(l, p, "options")),
            }
        }
    }
    let zt = ZeroTest::default().with_deny(options.deny.clone());
    if options.standard_side && !secs.iter().any(|s| s.kind == "matrix" && s.name.as_deref() == Some("A")) {
        return Err(err(1, 1, "side=standard needs [matrix A]"));
    }

    let mut fields = Vec::new();
    for s in all.iter().filter(|s| s.kind == "field") {
        let name = s.name.clone().unwrap_or_else(|| format!("X{}", fields.len() + 1));
        let (mut xi, mut phi) = (Expr::zero(), None);
        for (l, p) in pairs(s) {
            match p.key.as_str() {
                "xi" => xi = b.expr(&p.value, l.no, p.col)?,
                "phi" => phi = Some(b.list(p, l.no)?),
                _ => return Err(unknown_key(l, p, "field")),
            }
        }
        let phi = phi.ok_or_else(|| err(s.no, 1, format!("field {} needs phi=", name)))?;
        if phi.len() != ctx.p() {
            return Err(err(s.no, 1, format!("field {} has {} components for {} dependents", name, phi.len(), ctx.p())));
        }
        fields.push((name, VectorField::new(&ctx, xi, phi)?));
    }

    let sigma = match one(&all, "sigma")? {
        Some(s) => {
            let m = parse_matrix(&b, s)?;
            if !m.is_square() {
                return Err(Error::DimensionMismatch(format!("sigma is {}x{}", m.rows(), m.cols())));
            }
            if m.rows() != fields.len() {
                return Err(Error::DimensionMismatch(format!("sigma is {0}x{0} for {1} fields", m.rows(), fields.len())));
            }
            Some(m)
        }
        None => None,
    };

    let system = match one(&all, "equation")? {
        Some(s) => {
            let (mut implicit, mut solved) = (Vec::new(), Vec::new());
            for (l, p) in pairs(s) {
                match p.key.as_str() {
                    "implicit" => implicit.push(b.expr(&p.value, l.no, p.col)?),
                    "solved" => {
                        let (lhs, rhs) =
                            p.value.split_once(':').ok_or_else(|| err(l.no, p.col, "solved= needs coordinate:expression"))?;
                        let c = b.expr(lhs, l.no, p.col)?.as_symbol().filter(|c| ctx.decode(c).is_some());
                        let c = c.ok_or_else(|| err(l.no, p.col, format!("{} is not a jet coordinate", lhs.trim())))?;
                        solved.push((c, b.expr(rhs, l.no, p.col + lhs.len() + 1)?));
                    }
                    _ => return Err(unknown_key(l, p, "equation")),
                }
            }
            match (implicit.is_empty(), solved.is_empty()) {
                (false, true) => Some(OdeSystem::implicit(&ctx, implicit)),
                (true, false) => Some(OdeSystem::solved(&ctx, solved, &zt)?),
                (true, true) => return Err(err(s.no, 1, "[equation] is empty")),
                (false, false) => return Err(err(s.no, 1, "[equation] mixes implicit and solved rows")),
            }
        }
        None => None,
    };

    let mut invariants = Vec::new();
    for s in all.iter().filter(|s| s.kind == "invariant") {
        for l in &s.lines {
            let (mut order, mut expr) = (None, None);
            for p in &l.pairs {
                match p.key.as_str() {
                    "order" => order = Some(p.value.parse::<usize>().map_err(|_| err(l.no, p.col, "order must be a natural number"))?),
                    "expr" => expr = Some((b.expr(&p.value, l.no, p.col)?, p.col)),
                    _ => return Err(unknown_key(l, p, "invariant")),
                }
            }
            let (expr, col) = expr.ok_or_else(|| err(l.no, 1, "invariant needs expr="))?;
            let actual = ctx.jet_order(&expr);
            if let Some(o) = order.filter(|o| *o != actual) {
                return Err(err(l.no, col, format!("declared order {} but the expression has order {}", o, actual)));
            }
            invariants.push(Seed { expr, order: actual });
        }
    }

    let mut matrices = Vec::new();
    for s in all.iter().filter(|s| s.kind == "matrix") {
        let name = s.name.clone().ok_or_else(|| err(s.no, 2, "[matrix] needs a name"))?;
        matrices.push((name, parse_matrix(&b, s)?));
    }

    let change = match one(&all, "change")? {
        Some(s) => Some(parse_change(&b, s, &zt)?),
        None => None,
    };

    let ansatz = match one(&all, "ansatz")? {
        Some(s) => Some(parse_ansatz(&b, s)?),
        None => None,
    };

    let oracle = match one(&all, "oracle")? {
        Some(s) => {
            let mut spec = OracleSpec { initial: BTreeMap::new(), t_end: 0.5, step: 1e-3, ratio_step: 0.05 };
            for (l, p) in pairs(s) {
                match p.key.as_str() {
                    "initial" => {
                        for (off, item) in split_top(&p.value, ',') {
                            let (c, v) = item.split_once(':').ok_or_else(|| err(l.no, p.col + off, "initial= needs coordinate:value"))?;
                            let sym = b.expr(c, l.no, p.col + off)?.as_symbol().filter(|c| ctx.decode(c).is_some());
                            let sym = sym.ok_or_else(|| err(l.no, p.col + off, format!("{} is not a jet coordinate", c.trim())))?;
                            let v: f64 = v.trim().parse().map_err(|_| err(l.no, p.col + off, "bad initial value"))?;
                            spec.initial.insert(sym, v);
                        }
                    }
                    "t_end" => spec.t_end = parse_f64(p, l.no)?,
                    "step" => spec.step = parse_f64(p, l.no)?,
                    "ratio_step" => spec.ratio_step = parse_f64(p, l.no)?,
                    _ => return Err(unknown_key(l, p, "oracle")),
                }
            }
            Some(spec)
        }
        None => None,
    };

    Ok(Session { ctx, fields, sigma, system, invariants, matrices, change, ansatz, options, oracle })
}

fn parse_change(b: &Builder, s: &Section, zt: &ZeroTest) -> Result<CoordinateChange> {
    let (mut forward, mut inverse, mut retained) = (Vec::new(), Vec::new(), Vec::new());
    for l in &s.lines {
        let is_inverse = match l.words.as_slice() {
            [] => false,
            [w] if w == "inverse" => true,
            _ => return Err(err(l.no, 1, format!("unexpected {} in [change]", l.words.join(" ")))),
        };
        for p in &l.pairs {
            if is_inverse {
                inverse.push((p.key.clone(), p.value.clone(), l.no, p.col));
            } else if p.key == "retained" {
                retained.extend(p.value.split(',').map(|r| r.trim().to_string()));
            } else {
                forward.push((p.key.clone(), b.expr(&p.value, l.no, p.col)?));
            }
        }
    }
    if forward.is_empty() {
        return Err(err(s.no, 1, "[change] declares no new variables"));
    }
    let names: Vec<&str> = forward.iter().map(|(n, _)| n.as_str()).collect();
    let mixed = crate::reduction::mixed_context(&b.ctx, &names);
    let mut inv = Vec::new();
    for (lhs, rhs, line, col) in inverse {
        let c = b.expr(&lhs, line, 1)?.as_symbol().filter(|c| b.ctx.decode(c).is_some());
        let c = c.ok_or_else(|| err(line, 1, format!("{} is not a jet coordinate", lhs)))?;
        inv.push((c, b.in_ctx(&mixed, &rhs, line, col)?));
    }
    let retained: Vec<&str> = retained.iter().map(String::as_str).collect();
    CoordinateChange::new(&b.ctx, forward, &retained, inv, zt)
}

fn parse_ansatz(b: &Builder, s: &Section) -> Result<Ansatz> {
    let (mut phi, mut xi, mut sigma, mut xi_zero) = (BTreeMap::new(), BTreeMap::new(), None, true);
    for (l, p) in pairs(s) {
        let idx = |prefix: &str| -> Option<usize> { p.key.strip_prefix(prefix)?.parse::<usize>().ok().filter(|i| *i > 0) };
        if let Some(i) = idx("phi") {
            phi.insert(i, b.list(p, l.no)?);
        } else if let Some(i) = idx("xi") {
            xi.insert(i, b.expr(&p.value, l.no, p.col)?);
        } else if p.key == "sigma" {
            sigma = Some(parse_inline_matrix(b, p, l.no)?);
        } else if p.key == "xi_zero" {
            xi_zero = match p.value.as_str() {
                "true" => true,
                "false" => false,
                _ => return Err(err(l.no, p.col, "xi_zero must be true or false")),
            };
        } else {
            return Err(unknown_key(l, p, "ansatz"));
        }
    }
    let r = phi.len();
    if phi.keys().copied().ne(1..=r) {
        return Err(err(s.no, 1, "phi templates must be numbered phi1..phiN"));
    }
    let sigma = sigma.ok_or_else(|| err(s.no, 1, "[ansatz] needs sigma="))?;
    let xi = if xi_zero {
        if !xi.is_empty() {
            return Err(err(s.no, 1, "xi templates given with xi_zero=true"));
        }
        None
    } else {
        Some((1..=r).map(|i| xi.get(&i).cloned().unwrap_or_else(Expr::zero)).collect())
    };
    Ansatz::new(&b.ctx, phi.into_values().collect(), sigma, xi)
}

/// A solved system as a session that `parse_session` accepts.
pub fn system_session_text(sys: &OdeSystem) -> Result<String> {
    let solved = sys.solved.as_ref().ok_or(Error::NoSolvedForm)?;
    let ctx = &sys.ctx;
    let order = solved.iter().map(|(_, k, _)| *k).max().unwrap_or(1).max(1);
    let mut out = String::new();
    let _ = writeln!(out, "[context]");
    let _ = writeln!(out, "independent={} dependent={} order={}", ctx.independent(), ctx.dependents().join(","), order);
    if !ctx.params().is_empty() {
        let _ = writeln!(out, "[params]\n{}", ctx.params().join(" "));
    }
    if !ctx.functions().is_empty() {
        let fs: Vec<String> = ctx.functions().iter().map(|(f, n)| format!("{}/{}", f, n)).collect();
        let _ = writeln!(out, "[functions]\n{}", fs.join(" "));
    }
    let _ = writeln!(out, "[equation]");
    for (a, k, r) in solved {
        let _ = writeln!(out, "solved={}:{}", ctx.coord(*a, *k), r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX1: &str = "\
[context]
independent=x dependent=u,v order=2
[field X1]
xi=0 phi=1,0
[field X2]
xi=0 phi=0,1
[sigma]
row=0,v_x
row=u_x,0
";

    #[test]
    fn pairs_keep_spaces_in_values() {
        let l = split_line("solved=u_2:u_x*v_x*(1 + exp(-u)) t_end=0.5", 3);
        assert_eq!(l.pairs.len(), 2);
        assert_eq!(l.pairs[0].value, "u_2:u_x*v_x*(1 + exp(-u))");
        assert_eq!(l.pairs[0].col, 8);
        let l = split_line("inverse u_1=exp(v)*z2", 1);
        assert_eq!(l.words, vec!["inverse"]);
        assert_eq!(l.pairs[0].key, "u_1");
    }

    #[test]
    fn minimal_session() {
        let s = parse_session(EX1, None).unwrap();
        assert_eq!(s.fields.len(), 2);
        assert_eq!(s.sigma.unwrap().get(0, 1), &s.ctx.parse("v_x").unwrap());
    }

    #[test]
    fn empty_file_is_a_parse_error() {
        assert!(matches!(parse_session("", None), Err(Error::Session { .. })));
        assert!(matches!(parse_session("# nothing\n", None), Err(Error::Session { .. })));
    }

    #[test]
    fn rectangular_sigma_is_a_dimension_error() {
        let text = EX1.replace("row=0,v_x\nrow=u_x,0\n", "row=0,v_x,1\nrow=u_x,0,1\n");
        assert!(matches!(parse_session(&text, None), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn bad_expression_reports_line_and_column() {
        let text = EX1.replace("phi=1,0", "phi=1,)");
        match parse_session(&text, None) {
            Err(Error::Session { line, col, .. }) => assert_eq!((line, col), (4, 12)),
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn undeclared_symbol_is_rejected() {
        let text = EX1.replace("phi=1,0", "phi=c,0");
        assert!(matches!(parse_session(&text, None), Err(Error::Session { line: 4, .. })));
    }

    #[test]
    fn commas_inside_calls_do_not_split() {
        let v: Vec<&str> = split_top("A(u_x,v_x),B[1,0](u,v)", ',').into_iter().map(|(_, s)| s).collect();
        assert_eq!(v, vec!["A(u_x,v_x)", "B[1,0](u,v)"]);
    }
}

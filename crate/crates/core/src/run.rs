//! Command dispatch over a loaded session and the report it produces.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::check::{Residual, Verdict};
use crate::determining::{generate_determining, parameter_equations, polynomial_system_text};
use crate::equivalence::{
    gauge_transform_sigma, invert, mu_sigma_bridge, sigma_from_a, theorem5_roundtrip, transform_fields, verify_a_sigma,
    BridgeGiven, Convention,
};
use crate::error::{Error, Result};
use crate::expr::{Expr, OpaqueDefs, Symbol, ZeroTest, ZeroVerdict};
use crate::invariants::{generate_invariants, verify_invariant};
use crate::involution::{check_theorem2, close_under_bracket, structure_functions_in, Involution, DEFAULT_MAX_NEW};
use crate::jet::{lie_bracket, VectorField};
use crate::linalg::Matrix;
use crate::numeric::{convergence_ratio, integrate, reconstruction_check, Trajectory};
use crate::prolong::{check_lemma1, sigma_prolong};
use crate::reduction::{reduce, verify_sigma_symmetry, OdeSystem};
use crate::session::{system_session_text, Session};

pub const SCHEMA: &str = "jetsigma-report/1";

pub const COMMANDS: [&str; 13] = [
    "prolong",
    "bracket",
    "involution",
    "theorem2",
    "check-symmetry",
    "ibdp",
    "reduce",
    "equivalence",
    "gauge",
    "bridge",
    "determining",
    "oracle",
    "all",
];

#[derive(Clone, Debug)]
pub struct Flags {
    pub numeric_trials: usize,
    pub seed: u64,
    /// Replace the session's σ by zeros.
    pub zero_sigma: bool,
}

impl Default for Flags {
    fn default() -> Self {
        Flags { numeric_trials: 20, seed: 0, zero_sigma: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckEntry {
    pub section: String,
    pub name: String,
    /// `Zero`, `NonZero`, `Unknown` for residuals; `true`, `false` otherwise.
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<BTreeMap<String, String>>,
    #[serde(skip)]
    pub outcome: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Derived {
    pub section: String,
    pub name: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub seed: u64,
    pub numeric_trials: usize,
    pub status: String,
    pub exit_code: i32,
    pub checks: Vec<CheckEntry>,
    pub derived: Vec<Derived>,
    /// Reduced session for `reduce`, trajectory CSV for `oracle`.
    #[serde(skip)]
    pub artifact: Option<String>,
}

impl Report {
    fn new(command: &str, flags: &Flags) -> Report {
        Report {
            schema: SCHEMA,
            command: command.to_string(),
            seed: flags.seed,
            numeric_trials: flags.numeric_trials,
            status: String::new(),
            exit_code: 0,
            checks: Vec::new(),
            derived: Vec::new(),
            artifact: None,
        }
    }

    pub fn verdict(&self) -> Verdict {
        Verdict::all(self.checks.iter().map(|c| c.outcome))
    }

    fn finish(mut self) -> Report {
        let v = self.verdict();
        self.status = v.to_string();
        self.exit_code = v.exit_code();
        self
    }

    fn residual(&mut self, section: &str, r: &Residual) {
        let (verdict, witness) = match &r.verdict {
            ZeroVerdict::Zero => ("Zero", None),
            ZeroVerdict::NonZero(w) => ("NonZero", Some(w.iter().map(|(s, v)| (s.to_string(), v.to_string())).collect())),
            ZeroVerdict::Unknown => ("Unknown", None),
        };
        self.checks.push(CheckEntry {
            section: section.into(),
            name: r.label.clone(),
            verdict: verdict.into(),
            residual: Some(r.residual.to_string()),
            witness,
            outcome: r.verdict(),
        });
    }

    fn residuals(&mut self, section: &str, rs: &[Residual]) {
        for r in rs {
            self.residual(section, r);
        }
    }

    fn boolean(&mut self, section: &str, name: impl Into<String>, ok: bool, detail: Option<String>) {
        self.checks.push(CheckEntry {
            section: section.into(),
            name: name.into(),
            verdict: ok.to_string(),
            residual: detail,
            witness: None,
            outcome: Verdict::from_bool(ok),
        });
    }

    fn derive(&mut self, section: &str, name: impl Into<String>, value: impl Into<String>) {
        self.derived.push(Derived { section: section.into(), name: name.into(), value: value.into() });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} ({})", self.command, self.status);
        for c in &self.checks {
            let _ = write!(out, "  {:<8} {}/{}", c.verdict, c.section, c.name);
            if c.outcome != Verdict::Pass {
                if let Some(r) = &c.residual {
                    let _ = write!(out, "  residual {}", r);
                }
                if let Some(w) = &c.witness {
                    let pts: Vec<String> = w.iter().map(|(s, v)| format!("{}={}", s, v)).collect();
                    let _ = write!(out, "  at {}", pts.join(" "));
                }
            }
            out.push('\n');
        }
        for d in &self.derived {
            let _ = writeln!(out, "  {}/{}: {}", d.section, d.name, d.value);
        }
        out
    }
}

fn field_text(v: &VectorField) -> String {
    let terms: Vec<String> = v.coefficients().into_iter().filter(|(_, e)| !e.is_zero()).map(|(s, e)| format!("({})*d/d{}", e, s)).collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

fn matrix_text(m: &Matrix) -> String {
    let rows: Vec<String> =
        m.to_rows().iter().map(|r| format!("[{}]", r.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", "))).collect();
    format!("[{}]", rows.join(", "))
}

struct Ctx<'a> {
    s: &'a Session,
    flags: &'a Flags,
    zt: ZeroTest,
}

impl Ctx<'_> {
    /// σ-side fields: the session fields, or `T W` when the session gives
    /// the standard side.
    fn fields(&self) -> Result<Vec<VectorField>> {
        if self.s.fields.is_empty() {
            return Err(Error::MissingSessionData("field".into()));
        }
        let ws = self.s.xs();
        match (self.s.options.standard_side, self.s.matrix("A")) {
            (true, Some(a)) => match self.s.options.convention {
                Convention::InverseOfA => transform_fields(&invert(a, &self.zt)?, &ws),
                Convention::DirectA => transform_fields(a, &ws),
            },
            _ => Ok(ws),
        }
    }

    /// Session σ, zeros under the override, zeros when absent.
    fn sigma(&self, required: bool) -> Result<Matrix> {
        let r = self.s.fields.len();
        if self.flags.zero_sigma {
            return Ok(Matrix::zeros(r, r));
        }
        match &self.s.sigma {
            Some(m) => Ok(m.clone()),
            None if required => Err(Error::MissingSessionData("sigma".into())),
            None => Ok(Matrix::zeros(r, r)),
        }
    }

    fn system(&self) -> Result<&OdeSystem> {
        self.s.system.as_ref().ok_or_else(|| Error::MissingSessionData("equation".into()))
    }

    fn prolonged(&self) -> Result<Vec<VectorField>> {
        sigma_prolong(&self.fields()?, &self.sigma(false)?, self.s.ctx.order())
    }
}

pub fn run(command: &str, session: &Session, flags: &Flags) -> Result<Report> {
    let c = Ctx { s: session, flags, zt: session.zero_test(flags.numeric_trials, flags.seed) };
    let mut rep = Report::new(command, flags);
    match command {
        "all" => {
            for cmd in &COMMANDS[..COMMANDS.len() - 1] {
                if enabled(cmd, session) {
                    dispatch(cmd, &c, &mut rep)?;
                }
            }
        }
        cmd if COMMANDS.contains(&cmd) => dispatch(cmd, &c, &mut rep)?,
        other => return Err(Error::MissingSessionData(format!("unknown command {}", other))),
    }
    Ok(rep.finish())
}

/// Whether the session carries what `command` needs.
pub fn enabled(command: &str, s: &Session) -> bool {
    let fields = !s.fields.is_empty();
    match command {
        "prolong" | "bracket" | "involution" => fields,
        "theorem2" => fields && s.sigma.is_some(),
        "check-symmetry" => fields && s.system.is_some(),
        "ibdp" => fields && !s.invariants.is_empty(),
        "reduce" => s.system.is_some() && s.change.is_some(),
        "equivalence" => fields && (s.matrix("A").is_some() || s.matrix("B").is_some()),
        "gauge" => fields && s.sigma.is_some() && s.matrix("B").is_some(),
        "bridge" => s.matrix("Phi").is_some() && (s.matrix("S").is_some() || s.matrix("M").is_some()),
        "determining" => s.ansatz.is_some() && s.system.is_some(),
        "oracle" => s.system.is_some() && s.oracle.is_some(),
        _ => false,
    }
}

fn dispatch(cmd: &str, c: &Ctx, rep: &mut Report) -> Result<()> {
    match cmd {
        "prolong" => prolong(c, rep),
        "bracket" => bracket(c, rep),
        "involution" => involution(c, rep),
        "theorem2" => theorem2(c, rep),
        "check-symmetry" => check_symmetry(c, rep),
        "ibdp" => ibdp(c, rep),
        "reduce" => reduce_cmd(c, rep),
        "equivalence" => equivalence(c, rep),
        "gauge" => gauge(c, rep),
        "bridge" => bridge(c, rep),
        "determining" => determining(c, rep),
        "oracle" => oracle(c, rep),
        _ => unreachable!("checked by run"),
    }
}

fn prolong(c: &Ctx, rep: &mut Report) -> Result<()> {
    let ys = c.prolonged()?;
    for ((name, _), y) in c.s.fields.iter().zip(&ys) {
        rep.derive("prolong", format!("pr({})", name), field_text(y));
    }
    let lemma = check_lemma1(&ys, &c.sigma(false)?, &c.zt)?;
    rep.residuals("prolong", &lemma.residuals);
    Ok(())
}

fn bracket(c: &Ctx, rep: &mut Report) -> Result<()> {
    let ys = c.prolonged()?;
    for i in 0..ys.len() {
        for j in i + 1..ys.len() {
            rep.derive("bracket", format!("[Y{},Y{}]", i + 1, j + 1), field_text(&lie_bracket(&ys[i], &ys[j])?));
        }
    }
    Ok(())
}

fn involution(c: &Ctx, rep: &mut Report) -> Result<()> {
    let ys = c.prolonged()?;
    match structure_functions_in(&ys, c.s.options.span, &c.zt)? {
        Involution::Involutive(mu) => {
            rep.boolean("involution", "involutive", true, None);
            for i in 0..ys.len() {
                for j in i + 1..ys.len() {
                    let row: Vec<String> = mu.row(i, j).iter().map(|e| e.to_string()).collect();
                    rep.derive("involution", format!("mu({},{})", i + 1, j + 1), format!("[{}]", row.join(", ")));
                }
            }
        }
        Involution::NotInvolutive(w) => {
            let detail = format!("[Y{},Y{}] leaves the span on {}", w.pair.0 + 1, w.pair.1 + 1, w.coordinate);
            rep.boolean("involution", "involutive", false, Some(detail));
            let cl = close_under_bracket(&ys, DEFAULT_MAX_NEW, c.s.options.span, &c.zt)?;
            for a in &cl.adjoined {
                let name = format!("Y{} from [Y{},Y{}]", a.index + 1, a.pair.0 + 1, a.pair.1 + 1);
                rep.derive("involution", name, field_text(&cl.fields[a.index]));
            }
        }
    }
    Ok(())
}

fn theorem2(c: &Ctx, rep: &mut Report) -> Result<()> {
    let t2 = check_theorem2(&c.fields()?, &c.sigma(true)?, &c.zt)?;
    for ((i, j), v) in &t2.q_phi {
        let row: Vec<String> = v.iter().map(|e| e.to_string()).collect();
        rep.derive("theorem2", format!("Q{}{}.phi", i + 1, j + 1), format!("[{}]", row.join(", ")));
    }
    rep.residuals("theorem2.la", &t2.la);
    rep.residuals("theorem2.lagen", &t2.lagen);
    Ok(())
}

fn check_symmetry(c: &Ctx, rep: &mut Report) -> Result<()> {
    let r = verify_sigma_symmetry(&c.fields()?, &c.sigma(false)?, c.system()?, &c.zt)?;
    rep.residuals("check-symmetry", &r.residuals);
    Ok(())
}

fn ibdp(c: &Ctx, rep: &mut Report) -> Result<()> {
    if c.s.invariants.is_empty() {
        return Err(Error::MissingSessionData("invariant".into()));
    }
    let ys = c.prolonged()?;
    let seeds: Vec<_> = c.s.invariants.iter().map(|s| s.expr.clone()).collect();
    let table = generate_invariants(&ys, &c.s.eta(), &seeds, c.s.ctx.order(), &c.zt)?;
    for (i, chain) in table.chains.iter().enumerate() {
        for (k, e) in chain.iter().enumerate() {
            let name = format!("zeta{}^({})", i + 1, k);
            rep.derive("ibdp", name.clone(), e.expr.to_string());
            for r in verify_invariant(&ys, &e.expr, &c.zt)? {
                rep.residual("ibdp", &Residual { label: format!("{} {}", r.label, name), ..r });
            }
        }
    }
    Ok(())
}

fn reduce_cmd(c: &Ctx, rep: &mut Report) -> Result<()> {
    let change = c.s.change.as_ref().ok_or_else(|| Error::MissingSessionData("coordinate_change".into()))?;
    let red = reduce(c.system()?, change, &c.zt)?;
    rep.residuals("reduce.change", &change.check_roundtrip(&c.zt)?);
    let solved = red.system.solved.as_ref().ok_or(Error::NoSolvedForm)?;
    for (a, k, r) in solved {
        rep.derive("reduce", red.system.ctx.coord(*a, *k).to_string(), r.to_string());
    }
    let lowered = red.orders.iter().all(|(n, k)| *k < red.old_order || change.retained.contains(n));
    rep.boolean("reduce", "order lowered", lowered, None);
    let text = system_session_text(&red.system)?;
    rep.derive("reduce", "session", text.clone());
    rep.artifact = Some(text);
    Ok(())
}

/// `W` for the round trip through `m`.
fn standard_side(c: &Ctx, m: &Matrix) -> Result<Vec<VectorField>> {
    if c.s.options.standard_side {
        return Ok(c.s.xs());
    }
    let xs = c.fields()?;
    match c.s.options.convention {
        Convention::InverseOfA => transform_fields(m, &xs),
        Convention::DirectA => transform_fields(&invert(m, &c.zt)?, &xs),
    }
}

fn equivalence(c: &Ctx, rep: &mut Report) -> Result<()> {
    let conv = c.s.options.convention;
    let mut any = false;
    for name in ["A", "B"] {
        let Some(m) = c.s.matrix(name) else { continue };
        any = true;
        let sec = format!("equivalence.{}", name);
        let sigma = sigma_from_a(&c.s.ctx, m, conv, &c.zt)?;
        rep.derive(&sec, format!("sigma ({})", conv.name()), matrix_text(&sigma));
        if let Some(s) = &c.s.sigma {
            rep.residuals(&format!("{}.sigma", sec), &verify_a_sigma(&c.s.ctx, m, s, conv, &c.zt)?);
        }
        let ws = standard_side(c, m)?;
        let rt = theorem5_roundtrip(&ws, m, c.s.ctx.order(), conv, &c.zt)?;
        rep.residuals(&format!("{}.roundtrip", sec), &rt.residuals);
    }
    if !any {
        return Err(Error::MissingSessionData("matrix A".into()));
    }
    Ok(())
}

fn gauge(c: &Ctx, rep: &mut Report) -> Result<()> {
    let b = c.s.matrix("B").ok_or_else(|| Error::MissingSessionData("matrix B".into()))?;
    let sigma = c.sigma(true)?;
    let hat = gauge_transform_sigma(&c.s.ctx, b, &sigma, &c.zt)?;
    rep.derive("gauge", "sigma_hat", matrix_text(&hat));
    let n = c.s.ctx.order();
    let xs = c.fields()?;
    let lhs = sigma_prolong(&transform_fields(b, &xs)?, &hat, n)?;
    let rhs = transform_fields(b, &sigma_prolong(&xs, &sigma, n)?)?;
    for (i, (l, r)) in lhs.iter().zip(&rhs).enumerate() {
        for ((s, a), (_, e)) in l.coefficients().iter().zip(r.coefficients()) {
            rep.residual("gauge", &Residual::new(format!("(BY){}[{}]", i + 1, s), a.sub(&e), &c.zt)?);
        }
    }
    Ok(())
}

fn bridge(c: &Ctx, rep: &mut Report) -> Result<()> {
    let phi = c.s.matrix("Phi").ok_or_else(|| Error::MissingSessionData("matrix Phi".into()))?;
    let given = match (c.s.matrix("S"), c.s.matrix("M")) {
        (Some(s), _) => BridgeGiven::S(s.clone()),
        (None, Some(m)) => BridgeGiven::M(m.clone()),
        (None, None) => return Err(Error::MissingSessionData("matrix S".into())),
    };
    let b = mu_sigma_bridge(&c.s.ctx, phi, &given, &c.zt)?;
    rep.derive("bridge", "S", matrix_text(&b.s));
    rep.derive("bridge", "M", matrix_text(&b.m));
    rep.derive("bridge", "commutator", matrix_text(&b.commutator));
    let r = Residual { label: "[Phi^-1 D_x Phi, S^T]".into(), residual: Expr::zero(), verdict: b.lift.clone() };
    let detail = if b.commutator.is_zero() { None } else { Some(matrix_text(&b.commutator)) };
    rep.residual("bridge", &r);
    if let (Some(d), Some(last)) = (detail, rep.checks.last_mut()) {
        last.residual = Some(d);
    }
    Ok(())
}

fn determining(c: &Ctx, rep: &mut Report) -> Result<()> {
    let ansatz = c.s.ansatz.as_ref().ok_or_else(|| Error::MissingSessionData("ansatz".into()))?;
    let d = generate_determining(c.system()?, ansatz, &c.zt)?;
    let params: Vec<Symbol> = c.s.ctx.params().iter().map(|p| Symbol::new(p)).collect();
    let templates = ansatz.xi.iter().chain(ansatz.phi.iter().flatten()).chain(ansatz.sigma.entries());
    let concrete = ansatz.is_parametric() && templates.into_iter().all(|e| params.iter().all(|p| !e.depends_on(p)));
    if !concrete {
        for r in &d.residuals {
            rep.derive("determining", r.label.clone(), r.residual.to_string());
        }
    } else {
        rep.residuals("determining", &d.residuals);
    }
    if let Some(col) = &d.collected {
        if !concrete {
            let vars: Vec<String> = col.vars.iter().map(|v| v.to_string()).collect();
            rep.derive("determining", "collected over", vars.join(", "));
            let pure = parameter_equations(&c.s.ctx, &col.equations)?;
            rep.derive("determining", "polynomial system", polynomial_system_text(&pure));
        }
    }
    Ok(())
}

fn oracle(c: &Ctx, rep: &mut Report) -> Result<()> {
    let spec = c.s.oracle.as_ref().ok_or_else(|| Error::MissingSessionData("oracle".into()))?;
    let sys = c.system()?.solve_for_highest(&c.zt)?;
    let defs = OpaqueDefs::new();
    let span = (0.0, spec.t_end);
    let traj: Trajectory = integrate(&sys, &spec.initial, span, spec.step, &defs)?;
    let end: Vec<String> = traj.coords.iter().zip(traj.last()).map(|(s, v)| format!("{}={}", s, crate::numeric::format_g12(*v))).collect();
    rep.derive("oracle", "endpoint", end.join(" "));
    let ratio = convergence_ratio(&sys, &spec.initial, span, spec.ratio_step, &defs)?;
    rep.boolean("oracle", "RK4 self-convergence ratio in [12, 20]", (12.0..=20.0).contains(&ratio), Some(format!("{:.4}", ratio)));
    if let Some(change) = &c.s.change {
        let red = reduce(&sys, change, &c.zt)?;
        let rc = reconstruction_check(&sys, &red.system, change, &spec.initial, span, spec.step, &defs)?;
        let detail = format!("flow {:.3e} defect {:.3e}", rc.flow_error, rc.defect);
        rep.boolean("oracle", "reduced flow matches lifted invariants within 1e-5", rc.within(1e-5), Some(detail));
    }
    rep.artifact = Some(traj.to_csv());
    Ok(())
}

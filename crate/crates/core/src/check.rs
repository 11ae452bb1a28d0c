//! Residual bookkeeping shared by every verification routine.

use std::fmt;

use crate::error::Result;
use crate::expr::{Expr, ZeroTest, ZeroVerdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    Pass,
    Fail,
    Unknown,
}

impl Verdict {
    pub fn of(z: &ZeroVerdict) -> Verdict {
        match z {
            ZeroVerdict::Zero => Verdict::Pass,
            ZeroVerdict::NonZero(_) => Verdict::Fail,
            ZeroVerdict::Unknown => Verdict::Unknown,
        }
    }

    pub fn from_bool(b: bool) -> Verdict {
        if b {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// Fail dominates Unknown, which dominates Pass.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::Unknown, _) | (_, Verdict::Unknown) => Verdict::Unknown,
            _ => Verdict::Pass,
        }
    }

    pub fn all(items: impl IntoIterator<Item = Verdict>) -> Verdict {
        items.into_iter().fold(Verdict::Pass, Verdict::and)
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Unknown => 2,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Unknown => "unknown",
        })
    }
}

/// A named expression that should vanish.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Residual {
    pub label: String,
    pub residual: Expr,
    pub verdict: ZeroVerdict,
}

impl Residual {
    pub fn new(label: impl Into<String>, residual: Expr, zt: &ZeroTest) -> Result<Residual> {
        let verdict = zt.check(&residual)?;
        Ok(Residual { label: label.into(), residual, verdict })
    }

    pub fn verdict(&self) -> Verdict {
        Verdict::of(&self.verdict)
    }
}

pub fn overall(residuals: &[Residual]) -> Verdict {
    Verdict::all(residuals.iter().map(Residual::verdict))
}

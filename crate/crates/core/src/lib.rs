pub mod check;
pub mod determining;
pub mod equivalence;
pub mod error;
pub mod expr;
pub mod invariants;
pub mod involution;
pub mod jet;
pub mod linalg;
pub mod numeric;
pub mod prolong;
pub mod reduction;
pub mod run;
pub mod session;

pub use check::{Residual, Verdict};
pub use error::{Error, Result};
pub use expr::{Expr, Symbol, ZeroTest, ZeroVerdict};
pub use jet::{lie_bracket, JetContext, VectorField};
pub use linalg::{linear_solve, Matrix, Solution};

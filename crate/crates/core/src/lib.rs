//! Jacobi last multipliers, Lagrangians and Noether integrals for
//! second-order ordinary differential equations.

pub mod lagrangian;
pub mod multiplier;
pub mod noether;
pub mod numlab;
pub mod odemodel;
pub mod shell;
pub mod symcore;

use symcore::Expr;

/// Expressions appear in reports as grammar text.
pub(crate) fn ser_expr<S: serde::Serializer>(e: &Expr, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&e.to_string())
}

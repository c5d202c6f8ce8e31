//! Symbolic expression kernel.

pub mod diff;
pub mod eval;
pub mod expr;
pub mod integrate;
pub mod normal;
pub mod parse;
pub mod poly;
pub mod ratfunc;
mod render;
pub mod zero;

pub use diff::{diff, point_derivative, total_derivative};
pub use eval::{eval_num, EvalError, Point};
pub use expr::{q, qi, Expr, Func, Symbol, Q};
pub use integrate::{antiderivative, NoPattern};
pub use normal::{normalize, simplify};
pub use parse::{parse, ParseError};
pub use zero::{current_seed, is_zero, is_zero_seeded, set_seed, ZeroVerdict};

use std::collections::BTreeMap;

use num_traits::{Signed, ToPrimitive};
use thiserror::Error;

use super::expr::{Expr, Func, Symbol, Q};

/// Values for every free symbol of an expression.
pub type Point = BTreeMap<Symbol, f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("symbol `{0}` is not bound")]
    Unbound(String),
    #[error("denominator {0:e} is too close to zero")]
    NearZeroDenominator(f64),
    #[error("{0}")]
    Domain(String),
}

/// Denominators smaller than this are an evaluation fault.
pub const DEN_TOL: f64 = 1e-12;

pub fn eval_num(e: &Expr, point: &Point) -> Result<f64, EvalError> {
    eval_tracked(e, point, DEN_TOL).map(|(v, _)| v)
}

fn to_f64(c: &Q) -> f64 {
    c.to_f64().unwrap_or(f64::NAN)
}

/// Value together with a magnitude scale: the value the expression would
/// take if no cancellation happened in sums. Used to make the sampled zero
/// test relative.
pub(crate) fn eval_tracked(e: &Expr, point: &Point, den_tol: f64) -> Result<(f64, f64), EvalError> {
    let out = match e {
        Expr::Num(c) => {
            let v = to_f64(c);
            (v, v.abs())
        }
        Expr::Sym(s) => {
            let v = *point
                .get(s)
                .ok_or_else(|| EvalError::Unbound(s.name().to_string()))?;
            (v, v.abs())
        }
        Expr::Add(items) => {
            let (mut v, mut m) = (0.0, 0.0);
            for it in items {
                let (a, b) = eval_tracked(it, point, den_tol)?;
                v += a;
                m += b;
            }
            (v, m)
        }
        Expr::Mul(items) => {
            let (mut v, mut m) = (1.0, 1.0);
            for it in items {
                let (a, b) = eval_tracked(it, point, den_tol)?;
                v *= a;
                m *= b;
            }
            (v, m)
        }
        Expr::Pow(b, ex) => {
            let (base, bm) = eval_tracked(b, point, den_tol)?;
            if ex.is_negative() && base.abs() < den_tol {
                return Err(EvalError::NearZeroDenominator(base));
            }
            let v = if ex.is_integer() {
                let n = ex.to_integer().to_i32().ok_or_else(|| EvalError::Domain("exponent too large".into()))?;
                base.powi(n)
            } else {
                if base < 0.0 {
                    return Err(EvalError::Domain(format!("fractional power of negative value {base}")));
                }
                base.powf(to_f64(ex))
            };
            let m = if ex.is_positive() {
                bm.powf(to_f64(ex))
            } else {
                v.abs()
            };
            (v, m.max(v.abs()))
        }
        Expr::Fun(f, a) => {
            let (x, xm) = eval_tracked(a, point, den_tol)?;
            let v = match f {
                Func::Exp => x.exp(),
                Func::Log => {
                    if x <= 0.0 {
                        return Err(EvalError::Domain(format!("log of non-positive value {x}")));
                    }
                    x.ln()
                }
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Atan => x.atan(),
            };
            let m = match f {
                Func::Exp => v.abs() * (1.0 + xm),
                Func::Log => v.abs() + xm / x,
                _ => v.abs() + xm,
            };
            (v, m)
        }
    };
    if !out.0.is_finite() {
        return Err(EvalError::Domain("non-finite value".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::parse::parse;

    fn at(pairs: &[(&str, f64)]) -> Point {
        pairs.iter().map(|(k, v)| (Symbol::new(k), *v)).collect()
    }

    #[test]
    fn simple_values() {
        let p = vec!["lam".to_string()];
        let e = parse("xdot+x^2", &p).unwrap();
        assert_eq!(eval_num(&e, &at(&[("xdot", 1.0), ("x", 1.0)])).unwrap(), 2.0);
        let e = parse("1/(lam*x^2+1)", &p).unwrap();
        assert_eq!(eval_num(&e, &at(&[("lam", 1.0), ("x", 0.0)])).unwrap(), 1.0);
        let e = parse("x^2/t", &p).unwrap();
        assert_eq!(eval_num(&e, &at(&[("x", 2.0), ("t", 4.0)])).unwrap(), 1.0);
    }

    #[test]
    fn faults() {
        let e = parse("1/x", &[]).unwrap();
        assert!(matches!(eval_num(&e, &at(&[("x", 0.0)])), Err(EvalError::NearZeroDenominator(_))));
        let e = parse("sqrt(x)", &[]).unwrap();
        assert!(matches!(eval_num(&e, &at(&[("x", -1.0)])), Err(EvalError::Domain(_))));
        assert!(matches!(eval_num(&e, &at(&[])), Err(EvalError::Unbound(_))));
    }
}

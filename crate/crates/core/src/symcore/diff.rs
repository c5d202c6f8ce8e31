use super::expr::{Expr, Func, Symbol};
use num_traits::One;

/// Partial derivative with `t`, `x`, `xdot` and parameters independent.
pub fn diff(e: &Expr, s: &Symbol) -> Expr {
    match e {
        Expr::Num(_) => Expr::zero(),
        Expr::Sym(x) => {
            if x == s {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Add(terms) => Expr::add_all(terms.iter().map(|t| diff(t, s))),
        Expr::Mul(factors) => {
            let mut terms = Vec::with_capacity(factors.len());
            for (i, f) in factors.iter().enumerate() {
                if !f.contains(s) {
                    continue;
                }
                let df = diff(f, s);
                let mut prod = factors.clone();
                prod[i] = df;
                terms.push(Expr::mul_all(prod));
            }
            Expr::add_all(terms)
        }
        Expr::Pow(base, ex) => {
            if !base.contains(s) {
                return Expr::zero();
            }
            let lowered = ex - num_rational::BigRational::one();
            Expr::mul_all([
                Expr::Num(ex.clone()),
                Expr::pow((**base).clone(), lowered),
                diff(base, s),
            ])
        }
        Expr::Fun(f, arg) => {
            if !arg.contains(s) {
                return Expr::zero();
            }
            let a = (**arg).clone();
            let da = diff(arg, s);
            let outer = match f {
                Func::Exp => Expr::exp(a),
                Func::Log => a.recip(),
                Func::Sin => Expr::fun(Func::Cos, a),
                Func::Cos => -Expr::fun(Func::Sin, a),
                Func::Atan => (Expr::one() + Expr::powi(a, 2)).recip(),
            };
            outer * da
        }
    }
}

/// Derivative along the flow of `xddot = F`: `e_t + xdot e_x + F e_xdot`.
pub fn total_derivative(e: &Expr, rhs: &Expr) -> Expr {
    let t = Symbol::t();
    let x = Symbol::x();
    let v = Symbol::v();
    diff(e, &t) + Expr::v() * diff(e, &x) + rhs * diff(e, &v)
}

/// `D = ∂_t + xdot ∂_x`, the total derivative of a function of `(t, x)`.
pub fn point_derivative(e: &Expr) -> Expr {
    diff(e, &Symbol::t()) + Expr::v() * diff(e, &Symbol::x())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::parse::parse_plain;

    #[test]
    fn power_rule() {
        let e = parse_plain("xdot^2").unwrap();
        assert_eq!(diff(&e, &Symbol::v()), parse_plain("2*xdot").unwrap());
    }

    #[test]
    fn flow_derivative_of_position_is_velocity() {
        let f = parse_plain("-3*x*xdot - x^3").unwrap();
        assert_eq!(total_derivative(&Expr::x(), &f), Expr::v());
        assert_eq!(total_derivative(&Expr::v(), &Expr::zero()), Expr::zero());
    }
}

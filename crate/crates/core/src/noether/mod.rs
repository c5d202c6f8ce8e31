//! Noether's theorem for point symmetries with a gauge term.

pub mod linalg;
mod solve;
mod span;
mod system;

use serde::Serialize;
use thiserror::Error;

use crate::odemodel::{PointSymmetry, SecondOrderOde};
use crate::symcore::{diff, is_zero, point_derivative, simplify, total_derivative, Expr, Symbol, ZeroVerdict};

pub use solve::{exponential_rates, noether_solve, NoetherSolution, RatePlan, RateReport, SolveOptions};
pub use span::{functionally_dependent, in_linear_span, span_verdict, SpanVerdict};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Origin {
    NoetherFrom {
        symmetry: String,
        #[serde(serialize_with = "crate::ser_expr")]
        gauge: Expr,
    },
    Ratio,
    Energy,
    UserSupplied,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FirstIntegral {
    #[serde(serialize_with = "crate::ser_expr")]
    pub i: Expr,
    pub label: String,
    pub origin: Origin,
    pub conserved: ZeroVerdict,
}

impl FirstIntegral {
    pub fn user(label: &str, i: Expr, ode: &SecondOrderOde) -> FirstIntegral {
        let conserved = conservation_check(&i, ode);
        FirstIntegral {
            i,
            label: label.to_string(),
            origin: Origin::UserSupplied,
            conserved,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoetherCandidate {
    pub sym: PointSymmetry,
    #[serde(serialize_with = "crate::ser_expr")]
    pub gauge_g: Expr,
    pub residual: ZeroVerdict,
    pub integral: Option<FirstIntegral>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("invariance condition is {} for {label}", residual.label())]
pub struct NotNoether {
    pub label: String,
    pub residual: ZeroVerdict,
}

/// `tau L_t + xi L_x + eta L_v + L D tau - D g` with `eta = D xi - v D tau`.
pub fn invariance_expr(l: &Expr, s: &PointSymmetry, g: &Expr) -> Expr {
    let (t, x, v) = (Symbol::t(), Symbol::x(), Symbol::v());
    let dtau = point_derivative(&s.tau);
    let eta = point_derivative(&s.xi) - Expr::v() * dtau.clone();
    s.tau.clone() * diff(l, &t) + s.xi.clone() * diff(l, &x) + eta * diff(l, &v) + l.clone() * dtau
        - point_derivative(g)
}

pub fn noether_residual(l: &Expr, s: &PointSymmetry, g: &Expr) -> ZeroVerdict {
    is_zero(&invariance_expr(l, s, g))
}

/// `tau L + (xi - tau v) L_v - g`, without any check.
pub fn noether_integral_expr(l: &Expr, s: &PointSymmetry, g: &Expr) -> Expr {
    let lv = diff(l, &Symbol::v());
    s.tau.clone() * l.clone() + (s.xi.clone() - s.tau.clone() * Expr::v()) * lv - g.clone()
}

pub fn noether_integral(
    l: &Expr,
    s: &PointSymmetry,
    g: &Expr,
    ode: &SecondOrderOde,
) -> Result<FirstIntegral, NotNoether> {
    let residual = noether_residual(l, s, g);
    if !residual.is_zero() {
        return Err(NotNoether {
            label: s.label.clone(),
            residual,
        });
    }
    let i = simplify(&noether_integral_expr(l, s, g));
    let conserved = conservation_check(&i, ode);
    Ok(FirstIntegral {
        i,
        label: format!("N[{}]", s.label),
        origin: Origin::NoetherFrom {
            symmetry: s.label.clone(),
            gauge: g.clone(),
        },
        conserved,
    })
}

pub fn conservation_check(i: &Expr, ode: &SecondOrderOde) -> ZeroVerdict {
    is_zero(&total_derivative(i, &ode.f))
}

/// `v L_v - L`.
pub fn energy(l: &Expr) -> Expr {
    Expr::v() * diff(l, &Symbol::v()) - l.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::parse::parse;

    fn ex(s: &str, params: &[&str]) -> Expr {
        let ps: Vec<String> = params.iter().map(|s| s.to_string()).collect();
        parse(s, &ps).unwrap()
    }

    fn ode(f: &str, params: &[&str]) -> SecondOrderOde {
        SecondOrderOde::parse("t", params, f).unwrap()
    }

    fn same_up_to_factor(a: &Expr, b: &Expr) -> bool {
        crate::multiplier::constant_ratio(a, b)
    }

    #[test]
    fn residual_examples() {
        let l = ex("xdot^2/2", &[]);
        let tt = PointSymmetry::new("T", Expr::one(), Expr::zero());
        assert!(noether_residual(&l, &tt, &Expr::zero()).is_zero());
        let boost = PointSymmetry::new("B", Expr::zero(), Expr::t());
        assert!(noether_residual(&l, &boost, &Expr::x()).is_zero());
        assert!(noether_residual(&l, &boost, &Expr::zero()).is_nonzero());
    }

    #[test]
    fn mathews_lakshmanan_energy() {
        let p = ["a", "lam"];
        let o = ode("x*(-a + lam*xdot^2)/(lam*x^2 + 1)", &p);
        let l = ex("xdot^2/(2*(lam*x^2 + 1)) - a*x^2/(2*(lam*x^2 + 1))", &p);
        let tt = PointSymmetry::new("T", Expr::one(), Expr::zero());
        let fi = noether_integral(&l, &tt, &Expr::zero(), &o).unwrap();
        assert!(fi.conserved.is_zero());
        assert!(same_up_to_factor(&fi.i, &ex("(a*x^2 + xdot^2)/(2*(lam*x^2 + 1))", &p)));
    }

    #[test]
    fn riccati_i3() {
        let o = ode("-3*x*xdot - x^3", &[]);
        let l = ex("-1/(2*(xdot + x^2))", &[]);
        let tt = PointSymmetry::new("T", Expr::one(), Expr::zero());
        let fi = noether_integral(&l, &tt, &Expr::zero(), &o).unwrap();
        assert!(same_up_to_factor(&fi.i, &ex("(x^2 + 2*xdot)/(2*(x^2 + xdot)^2)", &[])));
    }

    #[test]
    fn conservation_examples() {
        let nm = ode("-xdot^2/x + xdot/t", &[]);
        assert!(conservation_check(&ex("x*(x - xdot*t)", &[]), &nm).is_zero());
        let ric = ode("-3*x*xdot - x^3", &[]);
        let in5 = ex("(x^2 + 2*xdot)/(2*(x^2*t^2 - 2*x*t + xdot*t^2 + 2)^2)", &[]);
        assert!(conservation_check(&in5, &ric).is_zero());
        assert!(conservation_check(&Expr::x(), &ode("0", &[])).is_nonzero());
    }
}

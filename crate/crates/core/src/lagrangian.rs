//! Lagrangians from multipliers: double integration in `xdot`, then the
//! `(t, x)` completion `f3` and an optional gauge `G`.

use serde::Serialize;
use thiserror::Error;

use crate::multiplier::{power, AlphaRoute};
use crate::odemodel::SecondOrderOde;
use crate::symcore::{
    antiderivative, diff, is_zero, point_derivative, simplify, Expr, Symbol, ZeroVerdict,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lagrangian {
    #[serde(serialize_with = "crate::ser_expr")]
    pub l: Expr,
    #[serde(serialize_with = "crate::ser_expr")]
    pub kinetic: Expr,
    #[serde(serialize_with = "crate::ser_expr")]
    pub f3: Expr,
    #[serde(serialize_with = "ser_opt")]
    pub gauge: Option<Expr>,
    pub el_verified: ZeroVerdict,
    /// Display form with normalization constants dropped.
    pub display: Option<String>,
}

fn ser_opt<S: serde::Serializer>(e: &Option<Expr>, s: S) -> Result<S::Ok, S::Error> {
    match e {
        Some(e) => s.serialize_some(&e.to_string()),
        None => s.serialize_none(),
    }
}

impl Lagrangian {
    /// Wraps a given expression; `kinetic` is the expression itself.
    pub fn from_expr(l: Expr, ode: &SecondOrderOde) -> Lagrangian {
        let el_verified = verify_el(&l, ode).verdict;
        Lagrangian {
            kinetic: l.clone(),
            l,
            f3: Expr::zero(),
            gauge: None,
            el_verified,
            display: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
pub enum LagrangianError {
    #[error("no antiderivative for {integrand} in {var}")]
    NoPattern { integrand: String, var: String },
    #[error("gauge completion is not solvable: R = {0} depends on xdot")]
    SolvabilityFailure(String),
    #[error("alpha = {0} is excluded")]
    BadAlpha(String),
}

impl From<crate::symcore::NoPattern> for LagrangianError {
    fn from(e: crate::symcore::NoPattern) -> Self {
        LagrangianError::NoPattern {
            integrand: e.integrand,
            var: e.var,
        }
    }
}

/// `K_vt + v K_vx - K_x + M F`, the `x`-derivative of `f3`.
pub fn completion_rhs(k: &Expr, m: &Expr, f: &Expr) -> Expr {
    let (x, v) = (Symbol::x(), Symbol::v());
    let kv = diff(k, &v);
    point_derivative(&kv) - diff(k, &x) + m.clone() * f.clone()
}

fn assemble(k: &Expr, f3: &Expr, gauge: &Option<Expr>) -> Expr {
    let mut terms = vec![k.clone(), f3.clone()];
    if let Some(g) = gauge {
        terms.push(point_derivative(g));
    }
    Expr::add_all(terms)
}

fn complete(
    k: Expr,
    m: &Expr,
    ode: &SecondOrderOde,
    gauge: Option<Expr>,
) -> Result<Lagrangian, LagrangianError> {
    let r = simplify(&completion_rhs(&k, m, &ode.f));
    if !is_zero(&diff(&r, &Symbol::v())).is_zero() {
        return Err(LagrangianError::SolvabilityFailure(r.to_string()));
    }
    let f3 = if r.is_zero_literal() {
        Expr::zero()
    } else {
        antiderivative(&r, &Symbol::x())?
    };
    let l = assemble(&k, &f3, &gauge);
    let el_verified = verify_el(&l, ode).verdict;
    Ok(Lagrangian {
        l,
        kinetic: k,
        f3,
        gauge,
        el_verified,
        display: None,
    })
}

pub fn build_lagrangian(
    m: &Expr,
    ode: &SecondOrderOde,
    gauge: Option<Expr>,
) -> Result<Lagrangian, LagrangianError> {
    let v = Symbol::v();
    let k1 = antiderivative(m, &v)?;
    let k = antiderivative(&k1, &v)?;
    complete(k, m, ode, gauge)
}

/// `L_vt + v L_vx + xddot L_vv - L_x` with `xddot` free.
pub fn el_expression(l: &Expr) -> Expr {
    let (x, v) = (Symbol::x(), Symbol::v());
    let lv = diff(l, &v);
    point_derivative(&lv) + Expr::Sym(Symbol::xddot()) * diff(&lv, &v) - diff(l, &x)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ElCheck {
    /// The expression on `xddot = F`.
    pub verdict: ZeroVerdict,
    /// `E - L_vv (xddot - F)`.
    pub factorization: ZeroVerdict,
}

pub fn verify_el(l: &Expr, ode: &SecondOrderOde) -> ElCheck {
    let a = Symbol::xddot();
    let e = el_expression(l);
    let verdict = is_zero(&e.subst1(&a, &ode.f));
    let lvv = hessian(l);
    let factorization = is_zero(&(e - lvv * (Expr::Sym(a) - ode.f.clone())));
    ElCheck {
        verdict,
        factorization,
    }
}

/// `L_vv`.
pub fn hessian(l: &Expr) -> Expr {
    let v = Symbol::v();
    simplify(&diff(&diff(l, &v), &v))
}

/// The double integral of `u^(-1/alpha)` in closed form, with the
/// logarithm when `alpha = 1/2`.
pub fn lienard_lagrangian(
    ar: &AlphaRoute,
    ode: &SecondOrderOde,
    gauge: Option<Expr>,
) -> Result<Lagrangian, LagrangianError> {
    let alpha = &ar.alpha;
    if is_zero(alpha).is_zero() || is_zero(&(alpha.clone() - Expr::one())).is_zero() {
        return Err(LagrangianError::BadAlpha(alpha.to_string()));
    }
    let r = simplify(&(Expr::one() / alpha.clone()));
    let u = ar.u.clone();
    let (k, display) = if is_zero(&(r.clone() - Expr::int(2))).is_zero() {
        (-Expr::log(u.clone()), -Expr::log(u.clone()))
    } else {
        let e = simplify(&(Expr::int(2) - r.clone()));
        let scale = simplify(&((Expr::one() - r.clone()) * (Expr::int(2) - r.clone())));
        let p = power(u.clone(), &e);
        (p.clone() / scale, p)
    };
    let m = power(u, &simplify(&-r));
    let mut lag = complete(k, &m, ode, gauge)?;
    lag.display = Some(display.to_string());
    Ok(lag)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum LagrangianMatch {
    Exact,
    /// The difference is a constant.
    UpToConstant,
    /// The difference has an identically vanishing Euler-Lagrange expression.
    UpToGauge,
    /// `built - c golden` has an identically vanishing Euler-Lagrange expression.
    UpToFactorAndGauge { factor: String },
    Failed { reason: String },
}

impl LagrangianMatch {
    pub fn matched(&self) -> bool {
        !matches!(self, LagrangianMatch::Failed { .. })
    }
}

/// Compares up to an additive constant, a total derivative and a constant
/// factor, in that order.
pub fn match_lagrangian(built: &Expr, golden: &Expr) -> LagrangianMatch {
    let d = built.clone() - golden.clone();
    match is_zero(&d) {
        ZeroVerdict::Zero => return LagrangianMatch::Exact,
        ZeroVerdict::Unknown(why) => {
            return LagrangianMatch::Failed {
                reason: format!("undecided difference: {why}"),
            }
        }
        ZeroVerdict::NonZero => {}
    }
    let (t, x, v) = (Symbol::t(), Symbol::x(), Symbol::v());
    if [t, x, v].iter().all(|s| is_zero(&diff(&d, s)).is_zero()) {
        return LagrangianMatch::UpToConstant;
    }
    if is_zero(&el_expression(&d)).is_zero() {
        return LagrangianMatch::UpToGauge;
    }
    let hb = hessian(built);
    let hg = hessian(golden);
    if is_zero(&hg).is_zero() {
        return LagrangianMatch::Failed {
            reason: "golden is degenerate".into(),
        };
    }
    match crate::multiplier::ratio_constant(&hb, &hg) {
        Some(c) => {
            let d = built.clone() - Expr::num(c.clone()) * golden.clone();
            if is_zero(&el_expression(&d)).is_zero() {
                LagrangianMatch::UpToFactorAndGauge {
                    factor: c.to_string(),
                }
            } else {
                LagrangianMatch::Failed {
                    reason: format!("hessians agree up to {c} but the remainder is not a total derivative"),
                }
            }
        }
        None => LagrangianMatch::Failed {
            reason: "hessians are not proportional".into(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiplier::{alpha_roots, jlm_from_alpha};
    use crate::odemodel::lienard_form;
    use crate::symcore::parse::parse;

    fn ex(s: &str, params: &[&str]) -> Expr {
        let ps: Vec<String> = params.iter().map(|s| s.to_string()).collect();
        parse(s, &ps).unwrap()
    }

    fn ode(f: &str, params: &[&str]) -> SecondOrderOde {
        SecondOrderOde::parse("t", params, f).unwrap()
    }

    fn same(a: &Expr, b: &Expr) -> bool {
        is_zero(&(a.clone() - b.clone())).is_zero()
    }

    #[test]
    fn riccati_l56() {
        let o = ode("-3*x*xdot - x^3", &[]);
        let l = build_lagrangian(&ex("-(xdot + x^2)^(-3)", &[]), &o, None).unwrap();
        assert!(same(&l.l, &ex("-1/(2*(xdot + x^2))", &[])));
        assert!(l.f3.is_zero_literal());
        assert!(l.el_verified.is_zero());
    }

    #[test]
    fn mathews_lakshmanan() {
        let p = ["a", "lam"];
        let o = ode("x*(-a + lam*xdot^2)/(lam*x^2 + 1)", &p);
        let l = build_lagrangian(&ex("1/(lam*x^2 + 1)", &p), &o, None).unwrap();
        assert!(same(&l.kinetic, &ex("xdot^2/(2*(lam*x^2 + 1))", &p)));
        assert!(same(&l.f3, &ex("a/(2*lam*(lam*x^2 + 1))", &p)));
        let golden = ex("xdot^2/(2*(lam*x^2 + 1)) - a*x^2/(2*(lam*x^2 + 1))", &p);
        assert!(same(&(l.l.clone() - golden.clone()), &ex("a/(2*lam)", &p)));
        assert_eq!(match_lagrangian(&l.l, &golden), LagrangianMatch::UpToConstant);
    }

    #[test]
    fn el_checks() {
        let free = ode("0", &[]);
        let l = ex("xdot^2/2", &[]);
        assert_eq!(verify_el(&l, &free).verdict, ZeroVerdict::Zero);
        assert_eq!(verify_el(&l, &ode("-x", &[])).verdict, ZeroVerdict::NonZero);
        assert_eq!(verify_el(&l, &ode("-x", &[])).factorization, ZeroVerdict::NonZero);
        let built = build_lagrangian(&Expr::one(), &free, Some(ex("t*x^3", &[]))).unwrap();
        assert!(built.el_verified.is_zero());
        assert_eq!(match_lagrangian(&built.l, &l), LagrangianMatch::UpToGauge);
    }

    #[test]
    fn hessians() {
        assert!(same(&hessian(&ex("xdot^2*x^2/(2*t)", &[])), &ex("x^2/t", &[])));
        assert!(same(&hessian(&ex("-1/(2*(xdot + x^2))", &[])), &ex("-(xdot + x^2)^(-3)", &[])));
    }

    #[test]
    fn lienard_branches() {
        let p = ["k", "lam"];
        let o = ode("-k*x*xdot - k^2*x^3/9 - lam*x", &p);
        let lf = lienard_form(&o).unwrap();
        for a in alpha_roots(&lf).unwrap().roots {
            let (ar, m) = jlm_from_alpha(&lf, &a, &o);
            let l = lienard_lagrangian(&ar, &o, None).unwrap();
            assert!(l.el_verified.is_zero(), "alpha = {a}");
            assert!(same(&hessian(&l.l), &m.m));
        }
        let o = ode("-2*xdot - x", &[]);
        let lf = lienard_form(&o).unwrap();
        let (ar, _) = jlm_from_alpha(&lf, &Expr::rat(1, 2), &o);
        let l = lienard_lagrangian(&ar, &o, None).unwrap();
        assert!(same(&l.l, &ex("-log(xdot + x)", &[])));
        assert!(l.el_verified.is_zero());
    }
}

//! Second-order equations `xddot = F(t, x, xdot)`, their two structural
//! classes, point symmetries and point maps between equations.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::symcore::{
    antiderivative, diff, is_zero, point_derivative, simplify, total_derivative, Expr, Symbol,
    ZeroVerdict,
};

#[derive(Clone, Debug, PartialEq)]
pub struct SecondOrderOde {
    pub name: String,
    pub params: Vec<String>,
    /// Right-hand side `F`.
    pub f: Expr,
}

impl SecondOrderOde {
    pub fn new(name: &str, params: &[&str], f: Expr) -> Self {
        SecondOrderOde {
            name: name.to_string(),
            params: params.iter().map(|s| s.to_string()).collect(),
            f,
        }
    }

    /// Parses `F` with the given parameter names.
    pub fn parse(name: &str, params: &[&str], f: &str) -> Result<Self, crate::symcore::ParseError> {
        let ps: Vec<String> = params.iter().map(|s| s.to_string()).collect();
        let f = crate::symcore::parse(f, &ps)?;
        Ok(SecondOrderOde {
            name: name.to_string(),
            params: ps,
            f,
        })
    }
}

/// `xddot + f(x) xdot + g(x) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LienardForm {
    #[serde(serialize_with = "crate::ser_expr")]
    pub f: Expr,
    #[serde(serialize_with = "crate::ser_expr")]
    pub g: Expr,
}

impl LienardForm {
    /// The equation `xddot = -f xdot - g`.
    pub fn rhs(&self) -> Expr {
        -(self.f.clone() * Expr::v()) - self.g.clone()
    }
}

/// `xddot + phi_x xdot^2 / 2 + phi_t xdot + B = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JacobiForm {
    #[serde(serialize_with = "crate::ser_expr")]
    pub phi: Expr,
    #[serde(serialize_with = "crate::ser_expr")]
    pub b: Expr,
}

/// `tau d/dt + xi d/dx` with `tau`, `xi` functions of `(t, x)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointSymmetry {
    pub label: String,
    #[serde(serialize_with = "crate::ser_expr")]
    pub tau: Expr,
    #[serde(serialize_with = "crate::ser_expr")]
    pub xi: Expr,
}

impl PointSymmetry {
    pub fn new(label: &str, tau: Expr, xi: Expr) -> Self {
        PointSymmetry {
            label: label.to_string(),
            tau,
            xi,
        }
    }

    pub fn is_point(&self) -> bool {
        let v = Symbol::v();
        !self.tau.contains(&v) && !self.xi.contains(&v)
    }

    pub fn sub(&self, other: &PointSymmetry, label: &str) -> PointSymmetry {
        PointSymmetry::new(
            label,
            self.tau.clone() - other.tau.clone(),
            self.xi.clone() - other.xi.clone(),
        )
    }
}

/// `(t, x) -> (T(t, x), X(t, x))`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointMap {
    pub t: Expr,
    pub x: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
#[error("not in class: {0}")]
pub struct NotInClass(pub String);

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("degenerate map: D T vanishes identically")]
    DegenerateTime,
    #[error("degenerate map: the Jacobian vanishes identically")]
    DegenerateJacobian,
}

fn require_free(e: &Expr, s: &Symbol, what: &str) -> Result<(), NotInClass> {
    match is_zero(&diff(e, s)) {
        ZeroVerdict::Zero => Ok(()),
        ZeroVerdict::NonZero => Err(NotInClass(format!("{what} depends on {}", s.name()))),
        ZeroVerdict::Unknown(why) => Err(NotInClass(format!(
            "could not decide whether {what} depends on {} ({why})",
            s.name()
        ))),
    }
}

pub fn lienard_form(ode: &SecondOrderOde) -> Result<LienardForm, NotInClass> {
    let (t, v) = (Symbol::t(), Symbol::v());
    let f = simplify(&-diff(&ode.f, &v));
    require_free(&f, &v, "f")?;
    require_free(&f, &t, "f")?;
    let g = simplify(&(-ode.f.clone() - f.clone() * Expr::v()));
    require_free(&g, &v, "g")?;
    require_free(&g, &t, "g")?;
    let lf = LienardForm { f, g };
    if !is_zero(&(ode.f.clone() - lf.rhs())).is_zero() {
        return Err(NotInClass("re-substitution check failed".into()));
    }
    Ok(lf)
}

pub fn jacobi_form(ode: &SecondOrderOde) -> Result<JacobiForm, NotInClass> {
    let (t, x, v) = (Symbol::t(), Symbol::x(), Symbol::v());
    let fv = diff(&ode.f, &v);
    // -F = a v^2 + c v + B
    let a = simplify(&(-diff(&fv, &v) / Expr::int(2)));
    require_free(&a, &v, "the xdot^2 coefficient")?;
    let ia = antiderivative(&a, &x)
        .map_err(|e| NotInClass(format!("cannot integrate the xdot^2 coefficient: {e}")))?;
    let c = simplify(&(-fv - Expr::int(2) * a * Expr::v()));
    require_free(&c, &v, "the xdot coefficient")?;
    let rho = simplify(&(c - Expr::int(2) * diff(&ia, &t)));
    require_free(&rho, &x, "psi'(t)")?;
    let psi = antiderivative(&rho, &t)
        .map_err(|e| NotInClass(format!("cannot integrate psi'(t): {e}")))?;
    let phi = simplify(&(Expr::int(2) * ia + psi));
    let b = simplify(
        &(-ode.f.clone()
            - diff(&phi, &x) * Expr::powi(Expr::v(), 2) / Expr::int(2)
            - diff(&phi, &t) * Expr::v()),
    );
    require_free(&b, &v, "B")?;
    let jf = JacobiForm { phi, b };
    if !is_zero(&(ode.f.clone() - jacobi_rhs(&jf))).is_zero() {
        return Err(NotInClass("re-substitution check failed".into()));
    }
    Ok(jf)
}

/// The equation `xddot = -phi_x xdot^2/2 - phi_t xdot - B`.
pub fn jacobi_rhs(jf: &JacobiForm) -> Expr {
    let (t, x) = (Symbol::t(), Symbol::x());
    -(diff(&jf.phi, &x) * Expr::powi(Expr::v(), 2) / Expr::int(2))
        - diff(&jf.phi, &t) * Expr::v()
        - jf.b.clone()
}

/// `(tau, xi, D xi - xdot D tau)`.
pub fn characteristic_row(s: &PointSymmetry) -> [Expr; 3] {
    let eta = point_derivative(&s.xi) - Expr::v() * point_derivative(&s.tau);
    [s.tau.clone(), s.xi.clone(), simplify(&eta)]
}

/// Checks that solutions of `src` are mapped to solutions of `dst`.
pub fn point_transform_check(
    src: &SecondOrderOde,
    map: &PointMap,
    dst: &SecondOrderOde,
) -> Result<ZeroVerdict, MapError> {
    let (t, x) = (Symbol::t(), Symbol::x());
    let dt = point_derivative(&map.t);
    if is_zero(&dt).is_zero() {
        return Err(MapError::DegenerateTime);
    }
    let jac = diff(&map.t, &t) * diff(&map.x, &x) - diff(&map.t, &x) * diff(&map.x, &t);
    if is_zero(&jac).is_zero() {
        return Err(MapError::DegenerateJacobian);
    }
    let p = simplify(&(point_derivative(&map.x) / dt.clone()));
    let p2 = total_derivative(&p, &src.f) / dt;
    let mut bind = BTreeMap::new();
    bind.insert(t, map.t.clone());
    bind.insert(x, map.x.clone());
    bind.insert(Symbol::v(), p);
    let target = dst.f.subst(&bind);
    Ok(is_zero(&(p2 - target)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::parse::parse;

    fn ode(f: &str, params: &[&str]) -> SecondOrderOde {
        SecondOrderOde::parse("t", params, f).unwrap()
    }

    fn ex(s: &str, params: &[&str]) -> Expr {
        let ps: Vec<String> = params.iter().map(|s| s.to_string()).collect();
        parse(s, &ps).unwrap()
    }

    fn same(a: &Expr, b: &Expr) -> bool {
        is_zero(&(a.clone() - b.clone())).is_zero()
    }

    #[test]
    fn lienard_examples() {
        let p = ["k", "lam"];
        let lf = lienard_form(&ode("-k*x*xdot - k^2*x^3/9 - lam*x", &p)).unwrap();
        assert!(same(&lf.f, &ex("k*x", &p)));
        assert!(same(&lf.g, &ex("k^2*x^3/9 + lam*x", &p)));
        let lf = lienard_form(&ode("-3*x*xdot - x^3", &[])).unwrap();
        assert!(same(&lf.f, &ex("3*x", &[])));
        assert!(same(&lf.g, &ex("x^3", &[])));
        assert!(lienard_form(&ode("-xdot^2/x + xdot/t", &[])).is_err());
    }

    #[test]
    fn jacobi_examples() {
        let p = ["a", "lam"];
        let jf = jacobi_form(&ode("x*(-a + lam*xdot^2)/(lam*x^2 + 1)", &p)).unwrap();
        assert!(same(&jf.phi, &ex("-log(lam*x^2 + 1)", &p)));
        assert!(same(&jf.b, &ex("a*x/(lam*x^2 + 1)", &p)));
        let jf = jacobi_form(&ode("-xdot^2/x + xdot/t", &[])).unwrap();
        assert!(same(&Expr::exp(jf.phi.clone()), &ex("x^2/t", &[])));
        assert!(jf.b.is_zero_literal());
        let jf = jacobi_form(&ode("0", &[])).unwrap();
        assert!(jf.phi.is_zero_literal() && jf.b.is_zero_literal());
        assert!(jacobi_form(&ode("xdot^3", &[])).is_err());
    }

    #[test]
    fn rows() {
        let r = characteristic_row(&PointSymmetry::new("G5", ex("x", &[]), ex("-x^3", &[])));
        assert!(same(&r[2], &ex("-3*x^2*xdot - xdot^2", &[])));
        let r = characteristic_row(&PointSymmetry::new("b", Expr::zero(), Expr::t()));
        assert!(same(&r[2], &Expr::one()));
    }

    #[test]
    fn maps() {
        let ric = ode("-3*x*xdot - x^3", &[]);
        let free = ode("0", &[]);
        let m = PointMap {
            t: ex("(t*x - 1)/(t*(t*x - 2))", &[]),
            x: ex("-x/(2*t*(t*x - 2))", &[]),
        };
        assert_eq!(point_transform_check(&ric, &m, &free), Ok(ZeroVerdict::Zero));
        // With x in place of t in the denominator of T the map does not linearize.
        let m = PointMap {
            t: ex("(t*x - 1)/(x*(t*x - 2))", &[]),
            x: ex("-x/(2*t*(t*x - 2))", &[]),
        };
        assert_eq!(point_transform_check(&ric, &m, &free), Ok(ZeroVerdict::NonZero));
        let id = PointMap { t: Expr::t(), x: Expr::x() };
        assert_eq!(point_transform_check(&ric, &id, &ric), Ok(ZeroVerdict::Zero));
        let sc = PointMap { t: Expr::t(), x: ex("2*x", &[]) };
        assert_eq!(point_transform_check(&free, &sc, &free), Ok(ZeroVerdict::Zero));
        assert_eq!(point_transform_check(&ric, &id, &free), Ok(ZeroVerdict::NonZero));
        let bad = PointMap { t: Expr::x(), x: Expr::x() };
        assert!(point_transform_check(&free, &bad, &free).is_err());
    }
}

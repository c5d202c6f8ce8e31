//! Jacobi last multipliers by every available route.

use serde::Serialize;
use thiserror::Error;

use crate::noether::{conservation_check, FirstIntegral, Origin};
use crate::odemodel::{characteristic_row, JacobiForm, LienardForm, PointSymmetry, SecondOrderOde};
use crate::symcore::poly::Var;
use crate::symcore::{diff, is_zero, normalize, simplify, total_derivative, Expr, Symbol, ZeroVerdict, Q};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Route {
    FromPhi,
    FromAlpha {
        #[serde(serialize_with = "crate::ser_expr")]
        alpha: Expr,
    },
    FromSymmetryPair { first: String, second: String },
    FromIntegralPair { first: String, second: String },
    Rescaled { parent: Box<Route>, factor: String },
}

impl Route {
    pub fn describe(&self) -> String {
        match self {
            Route::FromPhi => "exp(phi)".into(),
            Route::FromAlpha { alpha } => format!("alpha = {alpha}"),
            Route::FromSymmetryPair { first, second } => format!("symmetries {first}, {second}"),
            Route::FromIntegralPair { first, second } => format!("integrals {first}, {second}"),
            Route::Rescaled { parent, factor } => format!("{} times {factor}", parent.describe()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Multiplier {
    #[serde(serialize_with = "crate::ser_expr")]
    pub m: Expr,
    pub route: Route,
    pub verified: ZeroVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaRoute {
    #[serde(serialize_with = "crate::ser_expr")]
    pub alpha: Expr,
    #[serde(serialize_with = "crate::ser_expr")]
    pub u: Expr,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaRoots {
    #[serde(serialize_with = "ser_exprs")]
    pub roots: Vec<Expr>,
    #[serde(serialize_with = "crate::ser_expr")]
    pub c: Expr,
    /// `c = 1/4`: the single root 1/2.
    pub double: bool,
    /// `1 - 4c` contains parameters of unknown sign.
    pub symbolic: bool,
}

fn ser_exprs<S: serde::Serializer>(es: &[Expr], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(es.len()))?;
    for e in es {
        seq.serialize_element(&e.to_string())?;
    }
    seq.end()
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
pub enum MultiplierError {
    #[error("no valid alpha: {0}")]
    NoValidAlpha(String),
    #[error("degenerate pair {0}, {1}")]
    DegeneratePair(String, String),
}

/// `M_t + v M_x + F M_v + M F_v`.
pub fn jlm_residual(m: &Expr, f: &Expr) -> Expr {
    total_derivative(m, f) + m.clone() * diff(f, &Symbol::v())
}

/// Checks the multiplier equation in both its transport and divergence forms.
pub fn verify_multiplier(m: &Expr, ode: &SecondOrderOde) -> ZeroVerdict {
    let (t, x, v) = (Symbol::t(), Symbol::x(), Symbol::v());
    let transport = is_zero(&jlm_residual(m, &ode.f));
    let div = diff(m, &t) + diff(&(m.clone() * Expr::v()), &x) + diff(&(m.clone() * ode.f.clone()), &v);
    let divergence = is_zero(&div);
    if transport == divergence {
        transport
    } else {
        ZeroVerdict::Unknown(format!(
            "transport form {} but divergence form {}",
            transport.label(),
            divergence.label()
        ))
    }
}

fn verified(m: Expr, route: Route, ode: &SecondOrderOde) -> Multiplier {
    let verified = verify_multiplier(&m, ode);
    Multiplier { m, route, verified }
}

pub fn jlm_from_phi(jf: &JacobiForm, ode: &SecondOrderOde) -> Multiplier {
    let m = simplify(&Expr::exp(jf.phi.clone()));
    verified(m, Route::FromPhi, ode)
}

pub fn alpha_roots(lf: &LienardForm) -> Result<AlphaRoots, MultiplierError> {
    let (t, x, v) = (Symbol::t(), Symbol::x(), Symbol::v());
    if is_zero(&lf.f).is_zero() {
        return Err(MultiplierError::NoValidAlpha("f vanishes".into()));
    }
    let c = simplify(&(diff(&(lf.g.clone() / lf.f.clone()), &x) / lf.f.clone()));
    for s in [&t, &x, &v] {
        if !is_zero(&diff(&c, s)).is_zero() {
            return Err(MultiplierError::NoValidAlpha(format!(
                "(g/f)'/f = {c} is not constant in {}",
                s.name()
            )));
        }
    }
    let disc = simplify(&(Expr::one() - Expr::int(4) * c.clone()));
    let half = Expr::rat(1, 2);
    let (roots, double, symbolic) = match disc.as_num() {
        Some(d) if d == &Q::from_integer(0.into()) => (vec![half], true, false),
        Some(d) if d < &Q::from_integer(0.into()) => {
            return Err(MultiplierError::NoValidAlpha(format!("complex roots, 1 - 4c = {d}")));
        }
        Some(_) => {
            let r = Expr::sqrt(disc.clone());
            let mut rs = vec![
                simplify(&(half.clone() - half.clone() * r.clone())),
                simplify(&(half.clone() + half * r)),
            ];
            rs.sort_by(|a, b| {
                let (a, b) = (a.as_num(), b.as_num());
                a.partial_cmp(&b).unwrap_or(std::cmp::Ordering::Equal)
            });
            (rs, false, false)
        }
        None => {
            let r = Expr::sqrt(disc.clone());
            let rs = vec![
                half.clone() - half.clone() * r.clone(),
                half.clone() + half * r,
            ];
            (rs, false, true)
        }
    };
    let roots: Vec<Expr> = roots
        .into_iter()
        .filter(|a| !is_zero(a).is_zero() && !is_zero(&(a.clone() - Expr::one())).is_zero())
        .collect();
    if roots.is_empty() {
        return Err(MultiplierError::NoValidAlpha("c = 0 leaves only 0 and 1".into()));
    }
    Ok(AlphaRoots {
        roots,
        c,
        double,
        symbolic,
    })
}

/// `u^e`, using `exp(e log u)` when the exponent is not a rational number.
pub fn power(u: Expr, e: &Expr) -> Expr {
    match e.as_num() {
        Some(k) => Expr::pow(u, k.clone()),
        None => Expr::exp(e.clone() * Expr::log(u)),
    }
}

pub fn alpha_route(lf: &LienardForm, alpha: &Expr) -> AlphaRoute {
    let u = simplify(&(Expr::v() + lf.g.clone() / (alpha.clone() * lf.f.clone())));
    AlphaRoute {
        alpha: alpha.clone(),
        u,
    }
}

pub fn jlm_from_alpha(lf: &LienardForm, alpha: &Expr, ode: &SecondOrderOde) -> (AlphaRoute, Multiplier) {
    let ar = alpha_route(lf, alpha);
    let e = simplify(&(-Expr::one() / alpha.clone()));
    let m = power(ar.u.clone(), &e);
    let mult = verified(m, Route::FromAlpha { alpha: alpha.clone() }, ode);
    (ar, mult)
}

fn det3(r: [[Expr; 3]; 3]) -> Expr {
    let m = |i: usize, j: usize| r[i][j].clone();
    m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
        + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
}

/// `1/Delta` with rows `(1, v, F)`, then the two characteristic rows.
pub fn jlm_from_pair(
    ode: &SecondOrderOde,
    s1: &PointSymmetry,
    s2: &PointSymmetry,
) -> Result<Multiplier, MultiplierError> {
    let delta = simplify(&det3([
        [Expr::one(), Expr::v(), ode.f.clone()],
        characteristic_row(s1),
        characteristic_row(s2),
    ]));
    if is_zero(&delta).is_zero() {
        return Err(MultiplierError::DegeneratePair(s1.label.clone(), s2.label.clone()));
    }
    let m = simplify(&delta.recip());
    Ok(verified(
        m,
        Route::FromSymmetryPair {
            first: s1.label.clone(),
            second: s2.label.clone(),
        },
        ode,
    ))
}

/// `d(I1, I2)/d(x, v)`.
pub fn jlm_from_integrals(
    ode: &SecondOrderOde,
    i1: &FirstIntegral,
    i2: &FirstIntegral,
) -> Result<Multiplier, MultiplierError> {
    let (x, v) = (Symbol::x(), Symbol::v());
    let m = simplify(&(diff(&i1.i, &x) * diff(&i2.i, &v) - diff(&i1.i, &v) * diff(&i2.i, &x)));
    if is_zero(&m).is_zero() {
        return Err(MultiplierError::DegeneratePair(i1.label.clone(), i2.label.clone()));
    }
    Ok(verified(
        m,
        Route::FromIntegralPair {
            first: i1.label.clone(),
            second: i2.label.clone(),
        },
        ode,
    ))
}

/// True when `a/b` has vanishing `t`, `x` and `xdot` derivatives.
pub fn constant_ratio(a: &Expr, b: &Expr) -> bool {
    let phase = [Symbol::t(), Symbol::x(), Symbol::v()];
    // Reduced quotients of kernel-free normal forms decide it directly.
    if let (Ok(ra), Ok(rb)) = (normalize(a), normalize(b)) {
        if !rb.is_zero() {
            let w = ra.div(&rb);
            if phase.iter().all(|s| !w.depends_on(s)) {
                return true;
            }
            if w.vars().iter().all(|v| matches!(v, Var::Sym(_))) {
                return false;
            }
        }
    }
    let w = a.clone() / b.clone();
    phase.iter().all(|s| is_zero(&diff(&w, s)).is_zero())
}

/// The constant `a/b`, if it is one.
pub fn ratio_constant(a: &Expr, b: &Expr) -> Option<Q> {
    if !constant_ratio(a, b) {
        return None;
    }
    simplify(&(a.clone() / b.clone())).as_num().cloned()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RatioOutcome {
    TrivialConstant,
    Integral(FirstIntegral),
}

pub fn ratio_integral(m1: &Multiplier, m2: &Multiplier, ode: &SecondOrderOde, label: &str) -> RatioOutcome {
    if constant_ratio(&m1.m, &m2.m) {
        return RatioOutcome::TrivialConstant;
    }
    let w = simplify(&(m1.m.clone() / m2.m.clone()));
    let conserved = conservation_check(&w, ode);
    RatioOutcome::Integral(FirstIntegral {
        i: w,
        label: label.to_string(),
        origin: Origin::Ratio,
        conserved,
    })
}

pub fn rescale(m: &Multiplier, i: &FirstIntegral, ode: &SecondOrderOde) -> Multiplier {
    let prod = simplify(&(m.m.clone() * i.i.clone()));
    verified(
        prod,
        Route::Rescaled {
            parent: Box::new(m.route.clone()),
            factor: i.label.clone(),
        },
        ode,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairScan {
    pub multipliers: Vec<Multiplier>,
    pub notes: Vec<String>,
}

/// Multipliers from every unordered pair, with duplicates up to a constant
/// factor removed. Pairs are taken in label order.
pub fn enumerate_pairs(ode: &SecondOrderOde, syms: &[PointSymmetry]) -> PairScan {
    let mut sorted: Vec<&PointSymmetry> = syms.iter().collect();
    sorted.sort_by(|a, b| natural_cmp(&a.label, &b.label));
    let mut pairs = Vec::new();
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            pairs.push((sorted[i], sorted[j]));
        }
    }
    let run = |&(a, b): &(&PointSymmetry, &PointSymmetry)| jlm_from_pair(ode, a, b);
    #[cfg(feature = "parallel")]
    let results: Vec<_> = {
        use rayon::prelude::*;
        pairs.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<_> = pairs.iter().map(run).collect();

    let mut out: Vec<Multiplier> = Vec::new();
    let mut notes = Vec::new();
    for r in results {
        match r {
            Err(e) => notes.push(e.to_string()),
            Ok(m) if !m.verified.is_zero() => {
                notes.push(format!("{} not verified ({})", m.route.describe(), m.verified.label()))
            }
            Ok(m) => {
                if let Some(prev) = out.iter().find(|p| constant_ratio(&p.m, &m.m)) {
                    notes.push(format!(
                        "{} duplicates {} up to a constant",
                        m.route.describe(),
                        prev.route.describe()
                    ));
                } else {
                    out.push(m);
                }
            }
        }
    }
    PairScan { multipliers: out, notes }
}

/// Orders labels like `G2 < G10` by comparing digit runs numerically.
pub fn natural_cmp(a: &str, b: &str) -> std::cmp::Ordering {
    fn key(s: &str) -> Vec<(bool, String, u64)> {
        let mut out = Vec::new();
        let mut chars = s.chars().peekable();
        while let Some(&c) = chars.peek() {
            let digit = c.is_ascii_digit();
            let mut run = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_ascii_digit() != digit {
                    break;
                }
                run.push(d);
                chars.next();
            }
            let n = if digit { run.parse().unwrap_or(u64::MAX) } else { 0 };
            out.push((digit, if digit { String::new() } else { run }, n));
        }
        out
    }
    key(a).cmp(&key(b)).then_with(|| a.cmp(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odemodel::{jacobi_form, lienard_form};
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

    fn sym(label: &str, tau: &str, xi: &str) -> PointSymmetry {
        PointSymmetry::new(label, ex(tau, &[]), ex(xi, &[]))
    }

    #[test]
    fn phi_route() {
        let p = ["a", "lam"];
        let o = ode("x*(-a + lam*xdot^2)/(lam*x^2 + 1)", &p);
        let m = jlm_from_phi(&jacobi_form(&o).unwrap(), &o);
        assert!(m.verified.is_zero());
        assert!(same(&m.m, &ex("1/(lam*x^2 + 1)", &p)));
        let o = ode("-xdot^2/x + xdot/t", &[]);
        let m = jlm_from_phi(&jacobi_form(&o).unwrap(), &o);
        assert!(same(&m.m, &ex("x^2/t", &[])));
    }

    #[test]
    fn alpha_examples() {
        let p = ["k", "lam"];
        let o = ode("-k*x*xdot - k^2*x^3/9 - lam*x", &p);
        let lf = lienard_form(&o).unwrap();
        let ar = alpha_roots(&lf).unwrap();
        assert_eq!(ar.roots, vec![Expr::rat(1, 3), Expr::rat(2, 3)]);
        let (route, m) = jlm_from_alpha(&lf, &Expr::rat(1, 3), &o);
        assert!(same(&route.u, &ex("xdot + k*x^2/3 + 3*lam/k", &p)));
        assert!(m.verified.is_zero());
        let (_, m) = jlm_from_alpha(&lf, &Expr::rat(2, 3), &o);
        assert!(m.verified.is_zero());

        let o = ode("-2*xdot - x", &[]);
        let ar = alpha_roots(&lienard_form(&o).unwrap()).unwrap();
        assert!(ar.double);
        assert_eq!(ar.roots, vec![Expr::rat(1, 2)]);
        let (_, m) = jlm_from_alpha(&lienard_form(&o).unwrap(), &Expr::rat(1, 2), &o);
        assert!(same(&m.m, &ex("(xdot + x)^(-2)", &[])));
        assert!(m.verified.is_zero());
    }

    #[test]
    fn riccati_pairs() {
        let o = ode("-3*x*xdot - x^3", &[]);
        let g5 = sym("G5", "x", "-x^3");
        let g6 = sym("G6", "1", "0");
        let m = jlm_from_pair(&o, &g5, &g6).unwrap();
        assert!(same(&m.m, &ex("-(xdot + x^2)^(-3)", &[])));
        assert!(m.verified.is_zero());
        let swapped = jlm_from_pair(&o, &g6, &g5).unwrap();
        assert!(same(&swapped.m, &(-m.m.clone())));
        let free = ode("0", &[]);
        let err = jlm_from_pair(&free, &sym("a", "1", "0"), &sym("b", "0", "1"));
        assert!(matches!(err, Err(MultiplierError::DegeneratePair(..))));
    }

    #[test]
    fn free_particle_pairs() {
        let free = ode("0", &[]);
        let syms = [sym("a", "1", "0"), sym("b", "0", "1"), sym("c", "0", "t")];
        let scan = enumerate_pairs(&free, &syms);
        assert!(scan.multipliers.iter().any(|m| same(&m.m, &Expr::one())));
        assert!(enumerate_pairs(&free, &syms[..1]).multipliers.is_empty());
    }

    #[test]
    fn verification() {
        let free = ode("0", &[]);
        assert_eq!(verify_multiplier(&Expr::one(), &free), ZeroVerdict::Zero);
        assert_eq!(verify_multiplier(&Expr::x(), &free), ZeroVerdict::NonZero);
    }

    #[test]
    fn label_order() {
        let mut v = vec!["G10", "G2", "G1", "G9"];
        v.sort_by(|a, b| natural_cmp(a, b));
        assert_eq!(v, ["G1", "G2", "G9", "G10"]);
    }
}

//! Search for Noether point symmetries with an ansatz.
//!
//! `tau = P e^(rho t)`, `xi = Q e^(rho t)` where `P`, `Q` are Laurent
//! polynomials in `t`, `x` with unknown coefficients. Writing the
//! invariance condition as `R = D g`, the gauge is eliminated: with
//! `R = e^(rho t) S`, a gauge exists iff `S_vv = 0` and
//! `A_x - B_t - rho B = 0` for `B = S_v`, `A = S - v B`. Both are linear in
//! the unknowns, so each rate gives a linear system; the gauge is then
//! recovered by two quadratures.
//!
//! Rates other than zero are tried for autonomous equations with a rest
//! point at the origin, from the eigenvalues of the linearization there.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::odemodel::{PointSymmetry, SecondOrderOde};
use crate::symcore::normal::{poly_to_expr, to_expr, Kernel};
use crate::symcore::poly::{squarefree, Var};
use crate::symcore::ratfunc::RatFunc;
use crate::symcore::{
    antiderivative, diff, is_zero, normalize, simplify, Expr, Symbol, ZeroVerdict, Q,
};

use super::system::{solve, Bases, Term};
use super::{conservation_check, noether_integral, FirstIntegral, NoetherCandidate};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolveOptions {
    /// Largest exponent of `t` and of `x` in the ansatz.
    pub degree: u32,
    /// Smallest exponent of `t` and of `x` in the ansatz.
    pub min_exponent: i32,
    pub allow_gauge: bool,
    pub exponential_rates: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            degree: 4,
            min_exponent: -2,
            allow_gauge: true,
            exponential_rates: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateReport {
    #[serde(serialize_with = "crate::ser_expr")]
    pub rate: Expr,
    pub dimension: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoetherSolution {
    pub dimension: usize,
    pub rates: Vec<RateReport>,
    pub candidates: Vec<NoetherCandidate>,
    /// Parameter-dependent pivots; the solution holds where they are nonzero.
    pub assumptions: Vec<String>,
    pub notes: Vec<String>,
}

impl NoetherSolution {
    pub fn integrals(&self) -> Vec<&FirstIntegral> {
        self.candidates.iter().filter_map(|c| c.integral.as_ref()).collect()
    }
}

/// Exponential rates to try, with an optional reparametrization that makes
/// the square root in them rational.
#[derive(Clone, Debug, PartialEq)]
pub struct RatePlan {
    pub rates: Vec<Expr>,
    /// `p -> value(mu)` applied to the problem before solving.
    pub subst: Option<(Symbol, Expr)>,
    /// `mu -> sqrt(d)` applied to the results.
    pub back: Option<(Symbol, Expr)>,
    pub notes: Vec<String>,
}

impl RatePlan {
    fn zero_only(notes: Vec<String>) -> RatePlan {
        RatePlan {
            rates: vec![Expr::zero()],
            subst: None,
            back: None,
            notes,
        }
    }
}

fn fresh_name(params: &[String]) -> String {
    let mut name = "mu".to_string();
    while params.contains(&name) {
        name.push('_');
    }
    name
}

/// Rates `0, (a +- mu)/2, +-mu` with `mu^2 = a^2 + 4b`, where `F` is
/// linearized at the origin as `a v + b x`.
pub fn exponential_rates(ode: &SecondOrderOde) -> RatePlan {
    let (t, x, v) = (Symbol::t(), Symbol::x(), Symbol::v());
    if !is_zero(&diff(&ode.f, &t)).is_zero() {
        return RatePlan::zero_only(vec!["equation depends on t: only rate 0".into()]);
    }
    let at0 = |e: &Expr| -> Option<RatFunc> {
        let mut b = std::collections::BTreeMap::new();
        b.insert(x.clone(), Expr::zero());
        b.insert(v.clone(), Expr::zero());
        normalize(&e.subst(&b)).ok()
    };
    let f0 = at0(&ode.f);
    if !matches!(&f0, Some(r) if r.is_zero()) {
        return RatePlan::zero_only(vec!["origin is not a rest point: only rate 0".into()]);
    }
    let (Some(a), Some(b)) = (at0(&diff(&ode.f, &v)), at0(&diff(&ode.f, &x))) else {
        return RatePlan::zero_only(vec!["linearization at the origin is singular: only rate 0".into()]);
    };
    let d = a.mul(&a).add(&b.scale(&Q::from_integer(4.into())));
    let a_e = to_expr(&a);
    let d_e = to_expr(&d);
    let rates = |mu: Expr, a_e: Expr| -> Vec<Expr> {
        let half = Expr::rat(1, 2);
        vec![
            Expr::zero(),
            half.clone() * (a_e.clone() + mu.clone()),
            half * (a_e - mu.clone()),
            mu.clone(),
            -mu,
        ]
    };
    // mu rational in the parameters
    if let Ok(r) = normalize(&Expr::sqrt(d_e.clone())) {
        let rooted = r.vars().iter().any(|v| matches!(v, Var::Ker(_)));
        let negative = d.as_constant().is_some_and(|c| c < Q::zero());
        if negative {
            return RatePlan::zero_only(vec![format!("a^2 + 4b = {d_e} < 0: only rate 0")]);
        }
        if !rooted || d.as_constant().is_some() {
            return RatePlan {
                rates: dedupe(rates(to_expr(&r), a_e)),
                subst: None,
                back: None,
                notes: Vec::new(),
            };
        }
    }
    // d = d0 + d1 p: solve for p in terms of a new parameter mu
    for p in &ode.params {
        let ps = Symbol::new(p);
        let pv = Var::Sym(ps.clone());
        if d.den().depends_on(&ps) || d.num().degree(&pv) != 1 {
            continue;
        }
        let d0 = RatFunc::new(d.num().coeff_in(&pv, 0), d.den().clone());
        let d1 = RatFunc::new(d.num().coeff_in(&pv, 1), d.den().clone());
        let mu = Symbol::new(&fresh_name(&ode.params));
        let mu_e = Expr::Sym(mu.clone());
        let value = simplify(&((Expr::powi(mu_e.clone(), 2) - to_expr(&d0)) / to_expr(&d1)));
        let a_sub = simplify(&a_e.subst1(&ps, &value));
        return RatePlan {
            rates: dedupe(rates(mu_e, a_sub)),
            subst: Some((ps, value)),
            back: Some((mu, Expr::sqrt(d_e.clone()))),
            notes: vec![format!(
                "{} written as mu^2 = {d_e}; exponential rates use mu",
                p
            )],
        };
    }
    RatePlan::zero_only(vec![format!(
        "a^2 + 4b = {d_e} is not a square and not linear in a parameter: only rate 0"
    )])
}

fn dedupe(rates: Vec<Expr>) -> Vec<Expr> {
    let mut out: Vec<(Expr, RatFunc)> = Vec::new();
    for r in rates {
        let Ok(n) = normalize(&r) else { continue };
        if out.iter().all(|(_, m)| m != &n) {
            out.push((to_expr(&n), n));
        }
    }
    out.into_iter().map(|(e, _)| e).collect()
}

/// Falling factorial `n (n-1) ... (n-k+1)`.
fn falling(n: i32, k: i32) -> i64 {
    (0..k).map(|j| (n - j) as i64).product()
}

/// Coefficient functions of the invariance condition, in the order
/// `P: (W, C2, C3)`, `Q: (U, C5, C6)`.
struct Coeffs {
    g: [RatFunc; 6],
}

impl Coeffs {
    fn new(l: &RatFunc, rho: &RatFunc) -> Coeffs {
        let (t, x, v) = (Symbol::t(), Symbol::x(), Symbol::v());
        let vr = RatFunc::symbol(&v);
        let lv = l.diff(&v);
        let c2 = l.sub(&vr.mul(&lv));
        let c3 = vr.mul(&c2);
        let w = l.diff(&t).add(&rho.mul(&c2));
        let u = l.diff(&x).add(&rho.mul(&lv));
        let c6 = vr.mul(&lv);
        Coeffs {
            g: [w, c2, c3, u, lv, c6],
        }
    }

    /// `(function index, t-derivative order, x-derivative order)`.
    const LAYOUT: [(usize, i32, i32); 6] = [(0, 0, 0), (1, 1, 0), (2, 0, 1), (3, 0, 0), (4, 1, 0), (5, 0, 1)];

    /// `S` for concrete `P`, `Q`.
    fn apply(&self, p: &RatFunc, q: &RatFunc) -> RatFunc {
        let (t, x) = (Symbol::t(), Symbol::x());
        let parts = [p.clone(), p.diff(&t), p.diff(&x), q.clone(), q.diff(&t), q.diff(&x)];
        let mut acc = RatFunc::zero();
        for (k, part) in parts.iter().enumerate() {
            acc = acc.add(&part.mul(&self.g[k]));
        }
        acc
    }
}

struct RawSolution {
    p: Expr,
    q: Expr,
}

fn monomial(i: i32, j: i32) -> Expr {
    Expr::powi(Expr::t(), i as i64) * Expr::powi(Expr::x(), j as i64)
}

fn solve_rate(
    l: &RatFunc,
    rho: &RatFunc,
    opts: &SolveOptions,
) -> (Vec<RawSolution>, Vec<RatFunc>) {
    let v = Symbol::v();
    let (t, x) = (Symbol::t(), Symbol::x());
    let co = Coeffs::new(l, rho);
    let vr = RatFunc::symbol(&v);
    // bases and the terms each (function, derivative) contributes
    let mut bases: Vec<RatFunc> = Vec::new();
    let mut per_g: Vec<Vec<(usize, i32, i32, i64, usize)>> = Vec::new();
    for gk in &co.g {
        if opts.allow_gauge {
            let gv = gk.diff(&v);
            let gvv = gv.diff(&v);
            let hat = gk.sub(&vr.mul(&gv));
            let h = hat.diff(&x).sub(&gv.diff(&t)).sub(&rho.mul(&gv));
            let b0 = bases.len();
            bases.extend([gvv, hat, gv, h]);
            per_g.push(vec![
                (0, 0, 0, 1, b0),
                (1, 0, 1, 1, b0 + 1),
                (1, 1, 0, -1, b0 + 2),
                (1, 0, 0, 1, b0 + 3),
            ]);
        } else {
            per_g.push(vec![(0, 0, 0, 1, bases.len())]);
            bases.push(gk.clone());
        }
    }
    let sys = Bases::new(&bases);
    let lo = opts.min_exponent;
    let hi = opts.degree as i32;
    let mut index = Vec::new();
    let mut columns = Vec::new();
    for which in 0..2 {
        for i in lo..=hi {
            for j in lo..=hi {
                let mut terms = Vec::new();
                for &(gi, da, db) in &Coeffs::LAYOUT[which * 3..which * 3 + 3] {
                    for &(cond, ea, eb, sign, base) in &per_g[gi] {
                        let (ta, tb) = (da + ea, db + eb);
                        let f = sign * falling(i, ta) * falling(j, tb);
                        if f == 0 {
                            continue;
                        }
                        terms.push(Term {
                            cond,
                            factor: Q::from_integer(f.into()),
                            shift: (i - ta, j - tb),
                            base,
                        });
                    }
                }
                index.push((which, i, j));
                columns.push(terms);
            }
        }
    }
    let solved = solve(sys.rows(&columns), columns.len());
    let mut out = Vec::new();
    for vec in solved.basis() {
        let vec = clear_denominators(vec);
        let mut p = Vec::new();
        let mut q = Vec::new();
        for (c, &(which, i, j)) in vec.iter().zip(&index) {
            if c.is_zero() {
                continue;
            }
            let term = to_expr(c) * monomial(i, j);
            if which == 0 {
                p.push(term);
            } else {
                q.push(term);
            }
        }
        out.push(RawSolution {
            p: Expr::add_all(p),
            q: Expr::add_all(q),
        });
    }
    (out, solved.assumptions())
}

/// Scales a parametric vector to polynomial entries.
fn clear_denominators(vec: Vec<RatFunc>) -> Vec<RatFunc> {
    let mut den = RatFunc::one();
    for c in &vec {
        if !c.den().is_constant() {
            let g = crate::symcore::poly::gcd(den.num(), c.den());
            den = den.mul(&RatFunc::from_poly(c.den().div_exact(&g).expect("gcd divides")));
        }
    }
    let mut out: Vec<RatFunc> = vec.iter().map(|c| c.mul(&den)).collect();
    // integer entries where possible
    let mut lcm = num_bigint::BigInt::one();
    for c in &out {
        if let Some(k) = c.as_constant() {
            lcm = num_integer::Integer::lcm(&lcm, k.denom());
        }
    }
    if lcm != num_bigint::BigInt::one() {
        let s = Q::from_integer(lcm);
        out = out.iter().map(|c| c.scale(&s)).collect();
    }
    out
}

/// The nonconstant irreducible-looking factors of a pivot: monomial
/// variables and square-free parts of numerator and denominator. Roots are
/// replaced by their radicands.
fn pivot_factors(r: &RatFunc) -> Vec<Expr> {
    let mut out: Vec<Expr> = Vec::new();
    let mut push = |e: Expr| {
        if !out.contains(&e) {
            out.push(e);
        }
    };
    for p in [r.num(), r.den()] {
        let mono = p.monomial_content();
        for (_, pw) in mono.monomials() {
            for (v, _) in pw {
                match &v {
                    Var::Sym(s) => push(Expr::Sym(s.clone())),
                    Var::Ker(k) => match &**k {
                        Kernel::Root { base, .. } if !base.is_constant() => push(poly_to_expr(base)),
                        Kernel::Root { .. } => {}
                        other => push(other.to_expr()),
                    },
                }
            }
        }
        let rest = p.div_exact(&mono).expect("monomial content divides");
        if rest.is_constant() {
            continue;
        }
        let (_, factors) = squarefree(&rest);
        for (f, _) in factors {
            if !f.is_constant() {
                push(poly_to_expr(&f.primitive()));
            }
        }
    }
    out
}

/// `g` with `g_x = e^(rho t) B`, `g_t = e^(rho t) A`.
fn recover_gauge(s: &RatFunc, rho: &Expr) -> Result<Expr, String> {
    let (t, x, v) = (Symbol::t(), Symbol::x(), Symbol::v());
    let b = s.diff(&v);
    let a = s.sub(&RatFunc::symbol(&v).mul(&b));
    let b_e = to_expr(&b);
    let g1 = if b.is_zero() {
        Expr::zero()
    } else {
        antiderivative(&b_e, &x).map_err(|e| e.to_string())?
    };
    let rest = simplify(&(to_expr(&a) - diff(&g1, &t) - rho.clone() * g1.clone()));
    if !is_zero(&diff(&rest, &x)).is_zero() {
        return Err(format!("gauge compatibility fails: {rest} depends on x"));
    }
    let zero_rate = rho.is_zero_literal();
    let h = if rest.is_zero_literal() {
        Expr::zero()
    } else if zero_rate {
        antiderivative(&rest, &t).map_err(|e| e.to_string())?
    } else {
        let e = Expr::exp(rho.clone() * Expr::t());
        let inner = antiderivative(&(e.clone() * rest), &t).map_err(|e| e.to_string())?;
        simplify(&(inner / e))
    };
    let g = g1 + h;
    Ok(if zero_rate {
        simplify(&g)
    } else {
        Expr::exp(rho.clone() * Expr::t()) * simplify(&g)
    })
}

fn with_rate(e: Expr, rho: &Expr) -> Expr {
    if rho.is_zero_literal() || e.is_zero_literal() {
        e
    } else {
        e * Expr::exp(rho.clone() * Expr::t())
    }
}

pub fn noether_solve(l: &Expr, ode: &SecondOrderOde, opts: &SolveOptions) -> NoetherSolution {
    let mut notes = Vec::new();
    let plan = if opts.exponential_rates {
        exponential_rates(ode)
    } else {
        RatePlan::zero_only(Vec::new())
    };
    notes.extend(plan.notes.iter().cloned());
    let (l_work, ode_work) = match &plan.subst {
        Some((p, value)) => {
            let mut params = ode.params.clone();
            if let Some((mu, _)) = &plan.back {
                params.push(mu.name().to_string());
            }
            let f = simplify(&ode.f.subst1(p, value));
            (
                l.subst1(p, value),
                SecondOrderOde {
                    name: ode.name.clone(),
                    params,
                    f,
                },
            )
        }
        None => (l.clone(), ode.clone()),
    };
    let lr = match normalize(&l_work) {
        Ok(r) => r,
        Err(e) => {
            notes.push(format!("Lagrangian has no normal form: {e}"));
            return NoetherSolution {
                dimension: 0,
                rates: Vec::new(),
                candidates: Vec::new(),
                assumptions: Vec::new(),
                notes,
            };
        }
    };
    let back = |e: &Expr| -> Expr {
        match &plan.back {
            Some((mu, root)) => simplify(&e.subst1(mu, root)),
            None => e.clone(),
        }
    };
    let mut rates = Vec::new();
    let mut candidates = Vec::new();
    let mut assumptions: Vec<String> = Vec::new();
    for rho in &plan.rates {
        let rho_r = normalize(rho).expect("rates normalize");
        let (raw, assume) = solve_rate(&lr, &rho_r, opts);
        for a in assume {
            for f in pivot_factors(&a) {
                let s = format!("{} != 0", back(&f));
                if !assumptions.contains(&s) {
                    assumptions.push(s);
                }
            }
        }
        rates.push(RateReport {
            rate: back(rho),
            dimension: raw.len(),
        });
        let co = Coeffs::new(&lr, &rho_r);
        for sol in raw {
            let label = format!("S{}", candidates.len() + 1);
            let tau = with_rate(sol.p.clone(), rho);
            let xi = with_rate(sol.q.clone(), rho);
            let sym = PointSymmetry::new(&label, simplify(&tau), simplify(&xi));
            let gauge = if opts.allow_gauge {
                let (p, q) = (normalize(&sol.p), normalize(&sol.q));
                match (p, q) {
                    (Ok(p), Ok(q)) => recover_gauge(&co.apply(&p, &q), rho),
                    _ => Err("ansatz does not normalize".into()),
                }
            } else {
                Ok(Expr::zero())
            };
            candidates.push(finish(sym, gauge, &l_work, &ode_work, l, ode, &back));
        }
    }
    NoetherSolution {
        dimension: candidates.len(),
        rates,
        candidates,
        assumptions,
        notes,
    }
}

/// Builds the integral in the working parameters, then maps it back to the
/// original ones when a reparametrization was used.
fn finish(
    sym: PointSymmetry,
    gauge: Result<Expr, String>,
    l_work: &Expr,
    ode_work: &SecondOrderOde,
    l: &Expr,
    ode: &SecondOrderOde,
    back: &dyn Fn(&Expr) -> Expr,
) -> NoetherCandidate {
    let g = match gauge {
        Ok(g) => g,
        Err(why) => {
            return NoetherCandidate {
                sym,
                gauge_g: Expr::zero(),
                residual: ZeroVerdict::Unknown(why.clone()),
                integral: None,
                note: Some(format!("gauge not recovered: {why}")),
            }
        }
    };
    let reparam = ode_work.params.len() != ode.params.len();
    match noether_integral(l_work, &sym, &g, ode_work) {
        Err(e) => NoetherCandidate {
            residual: e.residual.clone(),
            sym,
            gauge_g: g,
            integral: None,
            note: Some(e.to_string()),
        },
        Ok(fi) if !reparam => NoetherCandidate {
            sym,
            gauge_g: g,
            residual: ZeroVerdict::Zero,
            integral: Some(fi),
            note: None,
        },
        Ok(fi) => {
            let sym_b = PointSymmetry::new(&sym.label, back(&sym.tau), back(&sym.xi));
            let g_b = back(&g);
            let i_b = back(&fi.i);
            let direct = conservation_check(&i_b, ode);
            let residual = super::noether_residual(l, &sym_b, &g_b);
            let note = if direct.is_zero() && residual.is_zero() {
                None
            } else {
                Some(format!(
                    "checked with the parameter kept symbolic (residual {}, conservation {}); after substitution: residual {}, conservation {}",
                    ZeroVerdict::Zero.label(),
                    fi.conserved.label(),
                    residual.label(),
                    direct.label()
                ))
            };
            let conserved = if direct.is_zero() { direct } else { fi.conserved.clone() };
            let origin = match fi.origin {
                super::Origin::NoetherFrom { symmetry, .. } => super::Origin::NoetherFrom {
                    symmetry,
                    gauge: g_b.clone(),
                },
                o => o,
            };
            NoetherCandidate {
                sym: sym_b,
                gauge_g: g_b,
                residual: ZeroVerdict::Zero,
                integral: Some(FirstIntegral {
                    i: i_b,
                    label: fi.label,
                    origin,
                    conserved,
                }),
                note,
            }
        }
    }
}

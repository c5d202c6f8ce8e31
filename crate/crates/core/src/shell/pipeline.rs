//! The derivation pipeline and the two reduced stages behind `verify` and
//! `numcheck`.

use std::collections::BTreeMap;

use crate::lagrangian::{build_lagrangian, hessian, lienard_lagrangian, match_lagrangian, verify_el, Lagrangian};
use crate::multiplier::{
    alpha_roots, constant_ratio, enumerate_pairs, jlm_from_alpha, jlm_from_pair, jlm_from_phi, ratio_integral,
    rescale, verify_multiplier, AlphaRoute, Multiplier, RatioOutcome,
};
use crate::noether::{
    conservation_check, energy, noether_solve, span_verdict, FirstIntegral, NoetherSolution, SolveOptions,
    SpanVerdict,
};
use crate::numlab::{drift, rk4, OrderCheck, Trajectory, NOISE_FLOOR};
use crate::odemodel::{jacobi_form, lienard_form, point_transform_check, LienardForm};
use crate::symcore::{current_seed, is_zero, simplify, Expr, ZeroVerdict};

use super::par_map;
use super::problem::{Golden, MapExpectation, Problem};
use super::report::*;

/// Drift bound at the scenario step for symbolically conserved integrals.
pub const DRIFT_TOL: f64 = 1e-7;
/// Coarse step of the order check; at the scenario step most drifts sit at
/// the rounding floor and their ratio says nothing.
pub const ORDER_H: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeriveOptions {
    pub degree: u32,
    pub numeric: bool,
}

impl Default for DeriveOptions {
    fn default() -> Self {
        DeriveOptions {
            degree: SolveOptions::default().degree,
            numeric: true,
        }
    }
}

/// Collects verdicts: undecided ones go to `unknowns`, required ones that
/// are not zero go to `failures`.
struct Ledger<'a> {
    report: &'a mut Report,
}

impl Ledger<'_> {
    fn note(&mut self, context: &str, v: &ZeroVerdict) {
        if let ZeroVerdict::Unknown(why) = v {
            self.report.unknowns.push(format!("{context}: {why}"));
        }
    }

    fn require(&mut self, context: &str, v: &ZeroVerdict) {
        self.note(context, v);
        if !v.is_zero() {
            self.report.failures.push(format!("{context} is {}", v.label()));
        }
    }

    fn fail(&mut self, msg: String) {
        self.report.failures.push(msg);
    }
}

fn new_report(p: &Problem) -> Report {
    Report {
        schema: REPORT_SCHEMA,
        problem: p.name().to_string(),
        seed: current_seed(),
        ode: OdeSummary {
            rhs: p.ode.f.to_string(),
            parameters: p.ode.params.clone(),
        },
        ..Default::default()
    }
}

fn integral_entry(i: &FirstIntegral) -> IntegralEntry {
    IntegralEntry {
        label: i.label.clone(),
        expr: i.i.to_string(),
        origin: origin_text(&i.origin),
        conserved: i.conserved.clone(),
    }
}

fn origin_text(o: &crate::noether::Origin) -> String {
    use crate::noether::Origin;
    match o {
        Origin::NoetherFrom { symmetry, gauge } => format!("noether {symmetry}, gauge {gauge}"),
        Origin::Ratio => "multiplier ratio".into(),
        Origin::Energy => "energy".into(),
        Origin::UserSupplied => "supplied".into(),
    }
}

struct Derived {
    label: String,
    mult: Multiplier,
    alpha: Option<AlphaRoute>,
    duplicate_of: Option<String>,
}

struct Built {
    label: String,
    multiplier: String,
    lag: Lagrangian,
    solution: NoetherSolution,
}

/// Runs every applicable stage on `p`. Nothing here is fatal: problems are
/// entries in the report.
pub fn derive(p: &Problem, opts: &DeriveOptions) -> Report {
    let mut report = new_report(p);
    let ode = &p.ode;

    // forms
    let lf: Result<LienardForm, String> = match &p.lienard {
        Some(lf) => Ok(lf.clone()),
        None => lienard_form(ode).map_err(|e| e.to_string()),
    };
    report.forms.lienard = match &lf {
        Ok(lf) => FormResult {
            applies: true,
            coefficients: [("f", &lf.f), ("g", &lf.g)]
                .into_iter()
                .map(|(k, e)| (k.to_string(), e.to_string()))
                .collect(),
            reason: None,
        },
        Err(e) => FormResult {
            applies: false,
            coefficients: BTreeMap::new(),
            reason: Some(e.clone()),
        },
    };
    let jf = jacobi_form(ode);
    report.forms.jacobi = match &jf {
        Ok(jf) => FormResult {
            applies: true,
            coefficients: [("phi", &jf.phi), ("B", &jf.b)]
                .into_iter()
                .map(|(k, e)| (k.to_string(), e.to_string()))
                .collect(),
            reason: None,
        },
        Err(e) => FormResult {
            applies: false,
            coefficients: BTreeMap::new(),
            reason: Some(e.to_string()),
        },
    };

    // multipliers
    let mut found: Vec<(Multiplier, Option<AlphaRoute>)> = Vec::new();
    match &jf {
        Ok(jf) => {
            found.push((jlm_from_phi(jf, ode), None));
            report.routes.push(RouteNote {
                route: "exp(phi)".into(),
                applied: true,
                detail: format!("phi = {}", jf.phi),
            });
        }
        Err(e) => report.routes.push(RouteNote {
            route: "exp(phi)".into(),
            applied: false,
            detail: e.to_string(),
        }),
    }
    match &lf {
        Ok(lf) => match alpha_roots(lf) {
            Ok(roots) => {
                let list: Vec<String> = roots.roots.iter().map(|r| r.to_string()).collect();
                let mut detail = format!("c = {}, alpha in {{{}}}", roots.c, list.join(", "));
                if roots.double {
                    detail.push_str(", double root");
                }
                if roots.symbolic {
                    detail.push_str(", roots depend on parameters");
                }
                report.routes.push(RouteNote {
                    route: "alpha".into(),
                    applied: true,
                    detail,
                });
                for a in &roots.roots {
                    let (ar, m) = jlm_from_alpha(lf, a, ode);
                    found.push((m, Some(ar)));
                }
            }
            Err(e) => report.routes.push(RouteNote {
                route: "alpha".into(),
                applied: false,
                detail: e.to_string(),
            }),
        },
        Err(e) => report.routes.push(RouteNote {
            route: "alpha".into(),
            applied: false,
            detail: format!("not of Lienard type: {e}"),
        }),
    }
    let syms = p.all_symmetries();
    if syms.len() >= 2 {
        let scan = enumerate_pairs(ode, &syms);
        report.routes.push(RouteNote {
            route: "symmetry pairs".into(),
            applied: true,
            detail: format!(
                "{} generators, {} distinct multipliers",
                syms.len(),
                scan.multipliers.len()
            ),
        });
        for n in scan.notes {
            report.routes.push(RouteNote {
                route: "symmetry pairs".into(),
                applied: false,
                detail: n,
            });
        }
        found.extend(scan.multipliers.into_iter().map(|m| (m, None)));
    } else {
        report.routes.push(RouteNote {
            route: "symmetry pairs".into(),
            applied: false,
            detail: format!("{} symmetries supplied, need two", syms.len()),
        });
    }

    let mut derived: Vec<Derived> = Vec::new();
    for (k, (mult, alpha)) in found.into_iter().enumerate() {
        let label = format!("M{}", k + 1);
        let duplicate_of = derived
            .iter()
            .filter(|d| d.duplicate_of.is_none())
            .find(|d| constant_ratio(&d.mult.m, &mult.m))
            .map(|d| d.label.clone());
        derived.push(Derived {
            label,
            mult,
            alpha,
            duplicate_of,
        });
    }
    {
        let mut led = Ledger { report: &mut report };
        for d in &derived {
            led.require(&format!("multiplier {} ({})", d.label, d.mult.route.describe()), &d.mult.verified);
        }
    }
    report.multipliers = derived
        .iter()
        .map(|d| MultiplierEntry {
            label: d.label.clone(),
            expr: d.mult.m.to_string(),
            route: d.mult.route.describe(),
            verified: d.mult.verified.clone(),
            duplicate_of: d.duplicate_of.clone(),
        })
        .collect();
    let distinct: Vec<&Derived> = derived.iter().filter(|d| d.duplicate_of.is_none()).collect();

    // Lagrangians and their Noether solves
    let solve_opts = SolveOptions {
        degree: opts.degree,
        ..SolveOptions::default()
    };
    let outcomes = par_map(&distinct, |d| {
        let lag = match (&d.alpha, &lf) {
            (Some(ar), Ok(_)) => lienard_lagrangian(ar, ode, None),
            _ => build_lagrangian(&d.mult.m, ode, None),
        };
        lag.map(|lag| {
            let el = verify_el(&lag.l, ode);
            let hess = is_zero(&(hessian(&lag.l) - d.mult.m.clone()));
            let solution = noether_solve(&lag.l, ode, &solve_opts);
            (lag, el, hess, solution)
        })
    });
    let mut built: Vec<Built> = Vec::new();
    for (d, out) in distinct.iter().zip(outcomes) {
        let label = format!("L{}", &d.label[1..]);
        match out {
            Ok((lag, el, hess, solution)) => {
                let mut led = Ledger { report: &mut report };
                led.require(&format!("Euler-Lagrange check of {label}"), &el.verdict);
                led.require(&format!("factorization of the EL expression of {label}"), &el.factorization);
                led.require(&format!("hessian of {label} against {}", d.label), &hess);
                report.lagrangians.push(LagrangianEntry {
                    label: label.clone(),
                    multiplier: d.label.clone(),
                    expr: Some(lag.l.to_string()),
                    display: lag.display.clone(),
                    f3: Some(lag.f3.to_string()),
                    el: Some(el.verdict),
                    factorization: Some(el.factorization),
                    hessian_roundtrip: Some(hess),
                    error: None,
                });
                built.push(Built {
                    label,
                    multiplier: d.label.clone(),
                    lag,
                    solution,
                });
            }
            Err(e) => report.lagrangians.push(LagrangianEntry {
                label,
                multiplier: d.label.clone(),
                expr: None,
                display: None,
                f3: None,
                el: None,
                factorization: None,
                hessian_roundtrip: None,
                error: Some(e.to_string()),
            }),
        }
    }
    let mut all_integrals: Vec<FirstIntegral> = Vec::new();
    for b in &built {
        let mut integrals = Vec::new();
        let mut symmetries = Vec::new();
        for c in &b.solution.candidates {
            let integral = c.integral.as_ref().map(|i| {
                let mut i = i.clone();
                i.label = format!("{}:{}", b.label, i.label);
                i
            });
            symmetries.push(SymmetryEntry {
                label: c.sym.label.clone(),
                tau: c.sym.tau.to_string(),
                xi: c.sym.xi.to_string(),
                gauge: c.gauge_g.to_string(),
                residual: c.residual.clone(),
                integral: integral.as_ref().map(|i| i.label.clone()),
                note: c.note.clone(),
            });
            let mut led = Ledger { report: &mut report };
            led.require(&format!("Noether residual of {}:{}", b.label, c.sym.label), &c.residual);
            match integral {
                Some(i) => {
                    led.require(&format!("conservation of {}", i.label), &i.conserved);
                    integrals.push(integral_entry(&i));
                    all_integrals.push(i);
                }
                None => led.fail(format!(
                    "Noether symmetry {}:{} has no integral{}",
                    b.label,
                    c.sym.label,
                    c.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default()
                )),
            }
        }
        report.noether.push(NoetherEntry {
            lagrangian: b.label.clone(),
            degree: opts.degree,
            dimension: b.solution.dimension,
            rates: b
                .solution
                .rates
                .iter()
                .map(|r| RateEntry {
                    rate: r.rate.to_string(),
                    dimension: r.dimension,
                })
                .collect(),
            symmetries,
            integrals,
            assumptions: b.solution.assumptions.clone(),
            notes: b.solution.notes.clone(),
        });
    }

    // ratios, then one rescale
    let mut pairs = Vec::new();
    for i in 0..distinct.len() {
        for j in i + 1..distinct.len() {
            pairs.push((distinct[i], distinct[j]));
        }
    }
    let ratios = par_map(&pairs, |(a, b)| {
        ratio_integral(&a.mult, &b.mult, ode, &format!("{}/{}", a.label, b.label))
    });
    let mut first_ratio: Option<(String, FirstIntegral)> = None;
    for ((a, b), r) in pairs.iter().zip(ratios) {
        let integral = match r {
            RatioOutcome::TrivialConstant => None,
            RatioOutcome::Integral(i) => {
                Ledger { report: &mut report }.require(&format!("conservation of {}", i.label), &i.conserved);
                if first_ratio.is_none() && i.conserved.is_zero() {
                    first_ratio = Some((a.label.clone(), i.clone()));
                }
                let e = integral_entry(&i);
                all_integrals.push(i);
                Some(e)
            }
        };
        report.ratios.push(RatioEntry {
            first: a.label.clone(),
            second: b.label.clone(),
            integral,
        });
    }
    let mut rescaled = None;
    if let Some((parent, i)) = &first_ratio {
        let d = distinct.iter().find(|d| &d.label == parent).expect("ratio parents are distinct multipliers");
        let m = rescale(&d.mult, i, ode);
        let label = format!("{}*{}", d.label, i.label);
        Ledger { report: &mut report }.require(&format!("rescaled multiplier {label}"), &m.verified);
        rescaled = Some((label.clone(), m.m.clone()));
        report.rescaled.push(MultiplierEntry {
            label,
            expr: m.m.to_string(),
            route: m.route.describe(),
            verified: m.verified,
            duplicate_of: None,
        });
    }

    // the alpha-route closed-form integral against the energy
    if let Ok(lf) = &lf {
        for d in &distinct {
            let Some(ar) = &d.alpha else { continue };
            let literal = FirstIntegral::user(
                &format!("closed form for alpha = {}", ar.alpha),
                alpha_closed_form(lf, ar),
                ode,
            );
            let energy_integral = built.iter().find(|b| b.multiplier == d.label).map(|b| {
                let mut e = FirstIntegral::user(&format!("energy of {}", b.label), simplify(&energy(&b.lag.l)), ode);
                e.origin = crate::noether::Origin::Energy;
                e
            });
            let mut led = Ledger { report: &mut report };
            led.note(&literal.label, &literal.conserved);
            let finding = match &literal.conserved {
                ZeroVerdict::Zero => "the closed form is conserved".to_string(),
                ZeroVerdict::NonZero => {
                    "the closed form is not conserved; the energy v*L_v - L is the integral".to_string()
                }
                ZeroVerdict::Unknown(w) => format!("undecided for the closed form: {w}"),
            };
            match &energy_integral {
                Some(e) => led.require(&format!("conservation of {}", e.label), &e.conserved),
                None => led.fail(format!("no Lagrangian for {} to take the energy of", d.label)),
            }
            report.energy_audit.push(EnergyAudit {
                alpha: ar.alpha.to_string(),
                literal: integral_entry(&literal),
                energy: energy_integral.as_ref().map(integral_entry),
                finding,
            });
            all_integrals.push(literal);
            all_integrals.extend(energy_integral);
        }
    }

    report.linearization = linearization(p, &mut report.failures);

    let goldens = golden_rows(p, &derived, rescaled.as_ref(), &built, opts.degree, &mut report);
    report.goldens = goldens;
    for g in &p.integrals {
        all_integrals.push(FirstIntegral::user(&g.label, g.expr.clone(), ode));
    }

    if opts.numeric {
        if let Some(n) = numeric(p, &all_integrals) {
            for row in n.drift.iter().filter(|r| !r.pass) {
                report.failures.push(format!("numeric check of {}: {}", row.label, drift_reason(row)));
            }
            if let Some(e) = &n.error {
                report.failures.push(format!("numeric scenario: {e}"));
            }
            report.numeric = Some(n);
        }
    }
    report
}

/// `u^(1 - 1/alpha) (alpha f v - f v - g) / (alpha^2 f^2)`.
pub fn alpha_closed_form(lf: &LienardForm, ar: &AlphaRoute) -> Expr {
    let a = ar.alpha.clone();
    let e = simplify(&(Expr::one() - Expr::one() / a.clone()));
    let num = a.clone() * lf.f.clone() * Expr::v() - lf.f.clone() * Expr::v() - lf.g.clone();
    crate::multiplier::power(ar.u.clone(), &e) * num / (Expr::powi(a, 2) * Expr::powi(lf.f.clone(), 2))
}

fn drift_reason(row: &DriftRow) -> String {
    if let Some(e) = &row.error {
        return e.clone();
    }
    let mut parts = Vec::new();
    if let Some(d) = row.drift {
        if d >= DRIFT_TOL {
            parts.push(format!("drift {d:.3e} >= {DRIFT_TOL:e}"));
        }
    }
    if let Some(o) = &row.order {
        if !o.fourth_order() {
            parts.push(format!(
                "order ratio {} outside [8, 32]",
                o.ratio.map(|r| format!("{r:.2}")).unwrap_or_else(|| "n/a".into())
            ));
        }
    }
    parts.join("; ")
}

fn linearization(p: &Problem, failures: &mut Vec<String>) -> Vec<MapEntry> {
    p.maps
        .iter()
        .map(|m| {
            let (verdict, pass) = match point_transform_check(&p.ode, &m.map, &m.target) {
                Ok(v) => {
                    let pass = match m.expect {
                        MapExpectation::Linearizes => v.is_zero(),
                        MapExpectation::Fails => v.is_nonzero(),
                    };
                    (v.label().to_string(), pass)
                }
                Err(e) => (e.to_string(), m.expect == MapExpectation::Fails),
            };
            let expected = match m.expect {
                MapExpectation::Linearizes => "zero",
                MapExpectation::Fails => "nonzero",
            };
            if !pass {
                failures.push(format!("map {}: expected {expected}, got {verdict}", m.label));
            }
            MapEntry {
                label: m.label.clone(),
                t: m.map.t.to_string(),
                x: m.map.x.to_string(),
                target: m.target.f.to_string(),
                verdict,
                expected: expected.into(),
                pass,
                note: m.note.clone(),
            }
        })
        .collect()
}

fn same(a: &Expr, b: &Expr) -> ZeroVerdict {
    is_zero(&(a.clone() - b.clone()))
}

fn multiplier_row(p: &Problem, g: &Golden, candidates: &[(String, Expr)], unknowns: &mut Vec<String>) -> GoldenRow {
    let mut detail = Vec::new();
    let v = verify_multiplier(&g.expr, &p.ode);
    detail.push(format!("multiplier equation: {}", v.label()));
    if let ZeroVerdict::Unknown(w) = &v {
        unknowns.push(format!("golden {}: {w}", g.label));
    }
    let mut matched = None;
    let mut status = "unmatched".to_string();
    if let Some([a, b]) = &g.spec.pair {
        let syms = p.all_symmetries();
        let find = |l: &str| syms.iter().find(|s| s.label == l).expect("pair labels are validated");
        match jlm_from_pair(&p.ode, find(a), find(b)) {
            Ok(m) => {
                detail.push(format!("pair {a}, {b} gives {}", m.m));
                if same(&m.m, &g.expr).is_zero() {
                    status = "exact".into();
                    matched = Some(format!("pair {a}, {b}"));
                } else if !g.spec.exact && constant_ratio(&m.m, &g.expr) {
                    status = "constant_ratio".into();
                    matched = Some(format!("pair {a}, {b}"));
                }
            }
            Err(e) => detail.push(e.to_string()),
        }
    } else {
        for (label, m) in candidates {
            if same(m, &g.expr).is_zero() {
                status = "exact".into();
                matched = Some(label.clone());
                break;
            }
            if !g.spec.exact && constant_ratio(m, &g.expr) {
                status = "constant_ratio".into();
                matched = Some(label.clone());
                break;
            }
        }
    }
    let pass = v.is_zero() && matched.is_some();
    GoldenRow {
        kind: "multiplier".into(),
        label: g.label.clone(),
        expr: g.expr.to_string(),
        status,
        matched,
        detail,
        pass,
    }
}

fn golden_rows(
    p: &Problem,
    derived: &[Derived],
    rescaled: Option<&(String, Expr)>,
    built: &[Built],
    degree: u32,
    report: &mut Report,
) -> Vec<GoldenRow> {
    let ode = &p.ode;
    let mut rows = Vec::new();
    let mut candidates: Vec<(String, Expr)> = derived.iter().map(|d| (d.label.clone(), d.mult.m.clone())).collect();
    candidates.extend(rescaled.cloned());
    for g in &p.multipliers {
        rows.push(multiplier_row(p, g, &candidates, &mut report.unknowns));
    }

    // golden Lagrangian label -> index into `built`
    let mut l_match: BTreeMap<String, usize> = BTreeMap::new();
    let matches = par_map(&p.lagrangians, |g| {
        let el = verify_el(&g.expr, ode);
        let mut found = None;
        let mut reasons = Vec::new();
        for (k, b) in built.iter().enumerate() {
            let m = match_lagrangian(&b.lag.l, &g.expr);
            if m.matched() {
                found = Some((k, m));
                break;
            }
            if let crate::lagrangian::LagrangianMatch::Failed { reason } = m {
                reasons.push(format!("{}: {reason}", b.label));
            }
        }
        (el, found, reasons)
    });
    for (g, (el, found, reasons)) in p.lagrangians.iter().zip(matches) {
        let mut detail = vec![format!("Euler-Lagrange check: {}", el.verdict.label())];
        if let ZeroVerdict::Unknown(w) = &el.verdict {
            report.unknowns.push(format!("golden {}: {w}", g.label));
        }
        let (status, matched, mut pass) = match &found {
            Some((k, m)) => {
                l_match.insert(g.label.clone(), *k);
                let status = serde_json::to_value(m)
                    .ok()
                    .and_then(|v| v.get("status").and_then(|s| s.as_str()).map(String::from))
                    .unwrap_or_default();
                if let crate::lagrangian::LagrangianMatch::UpToFactorAndGauge { factor } = m {
                    detail.push(format!("factor {factor}"));
                }
                (status, Some(built[*k].label.clone()), true)
            }
            None => {
                detail.extend(reasons);
                ("unmatched".to_string(), None, false)
            }
        };
        pass &= el.verdict.is_zero();
        if let (Some(want), Some((k, _))) = (g.spec.noether_dimension, &found) {
            let got = built[*k].solution.dimension;
            detail.push(format!("Noether dimension {got}, expected {want}"));
            pass &= got == want;
        }
        if let Some(n) = &g.spec.note {
            detail.push(n.clone());
        }
        rows.push(GoldenRow {
            kind: "lagrangian".into(),
            label: g.label.clone(),
            expr: g.expr.to_string(),
            status,
            matched,
            detail,
            pass,
        });
    }

    // gauge-free solves, only for Lagrangians that integrals point at
    let mut wanted: Vec<usize> = p
        .integrals
        .iter()
        .filter_map(|g| g.spec.lagrangian.as_ref().and_then(|l| l_match.get(l).copied()))
        .collect();
    wanted.sort_unstable();
    wanted.dedup();
    let no_gauge = SolveOptions {
        allow_gauge: false,
        degree,
        ..SolveOptions::default()
    };
    let gauge_free: BTreeMap<usize, NoetherSolution> = wanted
        .iter()
        .copied()
        .zip(par_map(&wanted, |k| noether_solve(&built[*k].lag.l, ode, &no_gauge)))
        .collect();

    let integral_rows = par_map(&p.integrals, |g| {
        let conserved = conservation_check(&g.expr, ode);
        let spans = g.spec.lagrangian.as_ref().map(|l| {
            l_match.get(l).map(|k| {
                let basis: Vec<Expr> = built[*k].solution.integrals().iter().map(|i| i.i.clone()).collect();
                let free: Vec<Expr> = gauge_free[k].integrals().iter().map(|i| i.i.clone()).collect();
                (built[*k].label.clone(), span_verdict(&g.expr, &basis), span_verdict(&g.expr, &free))
            })
        });
        (conserved, spans)
    });
    for (g, (conserved, spans)) in p.integrals.iter().zip(integral_rows) {
        let mut detail = vec![format!("conservation: {}", conserved.label())];
        if let ZeroVerdict::Unknown(w) = &conserved {
            report.unknowns.push(format!("golden {}: {w}", g.label));
        }
        let mut pass = conserved.is_zero();
        let mut matched = None;
        let status = match spans {
            None => conserved.label().to_string(),
            Some(None) => {
                detail.push(format!(
                    "golden Lagrangian {} was not matched by a built one",
                    g.spec.lagrangian.as_deref().unwrap_or_default()
                ));
                pass = false;
                "unmatched".into()
            }
            Some(Some((label, with, without))) => {
                detail.push(format!("span of the Noether basis of {label}: {}", span_text(&with)));
                detail.push(format!("span without gauge: {}", span_text(&without)));
                pass &= matches!(with, SpanVerdict::Linear | SpanVerdict::Functional);
                matched = Some(label);
                span_text(&with).to_string()
            }
        };
        if let Some(n) = &g.spec.note {
            detail.push(n.clone());
        }
        rows.push(GoldenRow {
            kind: "integral".into(),
            label: g.label.clone(),
            expr: g.expr.to_string(),
            status,
            matched,
            detail,
            pass,
        });
    }
    for r in rows.iter().filter(|r| !r.pass) {
        report.failures.push(format!("golden {} {} not matched ({})", r.kind, r.label, r.status));
    }
    rows
}

fn span_text(s: &SpanVerdict) -> &'static str {
    match s {
        SpanVerdict::Linear => "linear",
        SpanVerdict::Functional => "functional",
        SpanVerdict::Outside => "outside",
        SpanVerdict::Undecided => "undecided",
    }
}

/// Numeric values for every parameter: declarations overlaid by the scenario.
pub fn numeric_params(p: &Problem) -> BTreeMap<String, f64> {
    let mut out: BTreeMap<String, f64> = p
        .file
        .parameters
        .iter()
        .filter_map(|d| d.value.map(|v| (d.name.clone(), v)))
        .collect();
    if let Some(n) = p.numeric() {
        out.extend(n.params.iter().map(|(k, v)| (k.clone(), *v)));
    }
    out
}

/// Drift of each integral at the scenario step, plus the `h -> h/2` ratio
/// at the coarse step for the symbolically conserved ones.
pub fn numeric(p: &Problem, integrals: &[FirstIntegral]) -> Option<NumericReport> {
    let n = p.numeric()?;
    let params = numeric_params(p);
    let mut out = NumericReport {
        params: params.clone(),
        ic: n.ic,
        t_end: n.t_end,
        h: n.h,
        order_h: ORDER_H,
        end_state: None,
        error: None,
        drift: Vec::new(),
    };
    let run = |h: f64| rk4(&p.ode, &params, n.ic, n.t_end, h);
    let (fine, coarse, half) = match (run(n.h), run(ORDER_H), run(ORDER_H / 2.0)) {
        (Ok(a), Ok(b), Ok(c)) => (a, b, c),
        (a, b, c) => {
            let e = [a.err(), b.err(), c.err()].into_iter().flatten().next().expect("one run failed");
            out.error = Some(e.to_string());
            return Some(out);
        }
    };
    out.end_state = Some(fine.last());
    out.drift = par_map(integrals, |i| drift_row(i, &fine, &coarse, &half));
    Some(out)
}

fn drift_row(i: &FirstIntegral, fine: &Trajectory, coarse: &Trajectory, half: &Trajectory) -> DriftRow {
    let mut row = DriftRow {
        label: i.label.clone(),
        conserved: i.conserved.clone(),
        drift: None,
        order: None,
        error: None,
        pass: true,
    };
    let d = match drift(&i.i, fine) {
        Ok(d) => d,
        Err(e) => {
            row.error = Some(e.to_string());
            row.pass = !i.conserved.is_zero();
            return row;
        }
    };
    row.drift = Some(d);
    if !i.conserved.is_zero() {
        return row;
    }
    match (drift(&i.i, coarse), drift(&i.i, half)) {
        (Ok(d1), Ok(d2)) => {
            let oc = OrderCheck {
                h: ORDER_H,
                drift_h: d1,
                drift_half: d2,
                ratio: (d1 > NOISE_FLOOR && d2 > NOISE_FLOOR).then(|| d1 / d2),
            };
            row.pass = d < DRIFT_TOL && oc.fourth_order();
            row.order = Some(oc);
        }
        (Err(e), _) | (_, Err(e)) => {
            row.error = Some(format!("order check: {e}"));
            row.pass = false;
        }
    }
    row
}

/// Goldens checked on their own, without deriving anything.
pub fn verify(p: &Problem) -> Report {
    let mut report = new_report(p);
    let ode = &p.ode;
    for g in &p.multipliers {
        let row = multiplier_row(p, g, &[], &mut report.unknowns);
        // without derivation only a pair can be matched
        let pass = row.detail[0].ends_with("zero") && (g.spec.pair.is_none() || row.matched.is_some());
        report.goldens.push(GoldenRow {
            status: if g.spec.pair.is_some() { row.status.clone() } else { "verified".into() },
            pass,
            ..row
        });
    }
    let ls = par_map(&p.lagrangians, |g| (verify_el(&g.expr, ode), is_zero(&hessian(&g.expr))));
    for (g, (el, h)) in p.lagrangians.iter().zip(ls) {
        let mut detail = vec![
            format!("Euler-Lagrange check: {}", el.verdict.label()),
            format!("factorization: {}", el.factorization.label()),
        ];
        if h.is_zero() {
            detail.push("degenerate: L_vv vanishes".into());
        }
        for v in [&el.verdict, &el.factorization] {
            if let ZeroVerdict::Unknown(w) = v {
                report.unknowns.push(format!("golden {}: {w}", g.label));
            }
        }
        report.goldens.push(GoldenRow {
            kind: "lagrangian".into(),
            label: g.label.clone(),
            expr: g.expr.to_string(),
            status: el.verdict.label().into(),
            matched: None,
            detail,
            pass: el.verdict.is_zero() && el.factorization.is_zero() && !h.is_zero(),
        });
    }
    let is = par_map(&p.integrals, |g| conservation_check(&g.expr, ode));
    for (g, c) in p.integrals.iter().zip(is) {
        if let ZeroVerdict::Unknown(w) = &c {
            report.unknowns.push(format!("golden {}: {w}", g.label));
        }
        report.goldens.push(GoldenRow {
            kind: "integral".into(),
            label: g.label.clone(),
            expr: g.expr.to_string(),
            status: c.label().into(),
            matched: None,
            detail: vec![format!("conservation: {}", c.label())],
            pass: c.is_zero(),
        });
    }
    for r in report.goldens.iter().filter(|r| !r.pass) {
        report.failures.push(format!("golden {} {} failed ({})", r.kind, r.label, r.status));
    }
    report
}

/// Drift table for the golden integrals only.
pub fn numcheck(p: &Problem) -> Report {
    let mut report = new_report(p);
    let integrals: Vec<FirstIntegral> = p
        .integrals
        .iter()
        .map(|g| FirstIntegral::user(&g.label, g.expr.clone(), &p.ode))
        .collect();
    match numeric(p, &integrals) {
        Some(n) => {
            for row in n.drift.iter().filter(|r| !r.pass) {
                report.failures.push(format!("numeric check of {}: {}", row.label, drift_reason(row)));
            }
            if let Some(e) = &n.error {
                report.failures.push(format!("numeric scenario: {e}"));
            }
            report.numeric = Some(n);
        }
        None => report.failures.push("problem has no numeric scenario".into()),
    }
    report
}

//! Browser front end: trajectories, drift curves and parameter sweeps for
//! the bundled problems, computed in the page.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use lastmult::numlab::{drift, rk4, Trajectory};
use lastmult::shell::pipeline::numeric_params;
use lastmult::shell::{problem_from_str, Problem};
use lastmult::symcore::{eval_num, parse, Expr, Point, Symbol};

const BUNDLED: [(&str, &str); 5] = [
    ("critically-damped", include_str!("../../core/corpus/critically-damped.json")),
    ("lienard", include_str!("../../core/corpus/lienard.json")),
    ("mathews-lakshmanan", include_str!("../../core/corpus/mathews-lakshmanan.json")),
    ("nonautonomous", include_str!("../../core/corpus/nonautonomous.json")),
    ("riccati", include_str!("../../core/corpus/riccati.json")),
];

/// Scenario overrides sent by the page. Missing fields fall back to the
/// problem's numeric block.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub ic: Option<[f64; 3]>,
    pub t_end: Option<f64>,
    pub h: Option<f64>,
    /// Candidate integrals typed in the page, checked alongside the goldens.
    #[serde(default)]
    pub integrals: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
struct Setup {
    integrals: Vec<(String, Expr)>,
    params: BTreeMap<String, f64>,
    ic: [f64; 3],
    t_end: f64,
    h: f64,
}

fn setup(p: &Problem, s: &Scenario) -> Result<Setup, String> {
    let mut params = numeric_params(p);
    params.extend(s.params.iter().map(|(k, v)| (k.clone(), *v)));
    let n = p.numeric();
    let ic = s.ic.or(n.map(|n| n.ic)).ok_or("no initial condition")?;
    let t_end = s.t_end.or(n.map(|n| n.t_end)).ok_or("no end time")?;
    let h = s.h.or(n.map(|n| n.h)).ok_or("no step size")?;
    if let Some(missing) = p.ode.params.iter().find(|k| !params.contains_key(*k)) {
        return Err(format!("parameter {missing} has no value"));
    }
    let mut integrals: Vec<(String, Expr)> =
        p.integrals.iter().map(|g| (g.label.clone(), g.expr.clone())).collect();
    for (k, text) in s.integrals.iter().enumerate() {
        let e = parse(text, &p.ode.params).map_err(|e| format!("candidate {}: {e}", k + 1))?;
        integrals.push((format!("C{}", k + 1), e));
    }
    Ok(Setup {
        integrals,
        params,
        ic,
        t_end,
        h,
    })
}

fn load(problem: &str, scenario: &str) -> Result<(Problem, Setup), String> {
    let p = problem_from_str(problem).map_err(|e| e.to_string())?;
    let s: Scenario = if scenario.trim().is_empty() {
        Scenario::default()
    } else {
        serde_json::from_str(scenario).map_err(|e| format!("scenario: {e}"))?
    };
    let st = setup(&p, &s)?;
    Ok((p, st))
}

fn at(params: &BTreeMap<String, f64>, s: [f64; 3]) -> Point {
    let mut pt: Point = params.iter().map(|(k, v)| (Symbol::new(k), *v)).collect();
    pt.insert(Symbol::t(), s[0]);
    pt.insert(Symbol::x(), s[1]);
    pt.insert(Symbol::v(), s[2]);
    pt
}

#[derive(Debug, Serialize)]
pub struct Curve {
    pub label: String,
    pub expr: String,
    /// `I(t) - I(t0)` at each sample; `None` where the integral cannot be
    /// evaluated.
    pub deviation: Vec<Option<f64>>,
    pub drift: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct TrajectoryOut {
    pub params: BTreeMap<String, f64>,
    pub h: f64,
    pub samples: Vec<[f64; 3]>,
    pub curves: Vec<Curve>,
    /// Set when the integrator stopped early; `samples` holds what was computed.
    pub error: Option<String>,
}

fn curves(ints: &[(String, Expr)], traj: &Trajectory) -> Vec<Curve> {
    ints.iter()
        .cloned()
        .map(|(label, e)| {
            let ys: Vec<Option<f64>> = traj
                .samples
                .iter()
                .map(|s| eval_num(&e, &at(&traj.params, *s)).ok().filter(|y| y.is_finite()))
                .collect();
            let base = ys.first().copied().flatten();
            Curve {
                label,
                expr: e.to_string(),
                deviation: ys.iter().map(|y| Some(y.as_ref()? - base?)).collect(),
                drift: drift(&e, traj).ok(),
            }
        })
        .collect()
}

/// Integrates the problem and evaluates every golden integral along the path.
pub fn trajectory_json(problem: &str, scenario: &str) -> Result<String, String> {
    let (p, st) = load(problem, scenario)?;
    let (traj, error) = match rk4(&p.ode, &st.params, st.ic, st.t_end, st.h) {
        Ok(t) => (t, None),
        Err(lastmult::numlab::NumError::EvaluationFault { partial, source, t, .. }) => {
            (*partial, Some(format!("stopped at t = {t}: {source}")))
        }
        Err(e) => return Err(e.to_string()),
    };
    let out = TrajectoryOut {
        params: st.params,
        h: traj.h,
        curves: curves(&st.integrals, &traj),
        samples: traj.samples,
        error,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
pub struct StepRow {
    pub h: f64,
    /// Drift per integral, in the order of `labels`.
    pub drift: Vec<Option<f64>>,
}

#[derive(Debug, Serialize)]
pub struct StepStudy {
    pub labels: Vec<String>,
    pub rows: Vec<StepRow>,
}

/// Drift of each integral for `steps` halvings of the step, starting at `h0`.
pub fn step_study_json(problem: &str, scenario: &str, h0: f64, steps: usize) -> Result<String, String> {
    let (p, st) = load(problem, scenario)?;
    if !(h0 > 0.0) {
        return Err(format!("step must be positive, got {h0}"));
    }
    let ints = st.integrals.clone();
    let rows = (0..steps.clamp(1, 12))
        .map(|k| {
            let h = h0 / f64::from(1u32 << k);
            let traj = rk4(&p.ode, &st.params, st.ic, st.t_end, h).ok();
            StepRow {
                h,
                drift: ints
                    .iter()
                    .map(|(_, e)| traj.as_ref().and_then(|t| drift(e, t).ok()))
                    .collect(),
            }
        })
        .collect();
    let out = StepStudy {
        labels: ints.into_iter().map(|(l, _)| l).collect(),
        rows,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub end_state: Option<[f64; 3]>,
    pub drift: Vec<Option<f64>>,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct Sweep {
    pub parameter: String,
    pub labels: Vec<String>,
    pub rows: Vec<SweepRow>,
}

/// Drift of each integral as one parameter runs over `[lo, hi]` in `n` points.
pub fn sweep_json(problem: &str, scenario: &str, name: &str, lo: f64, hi: f64, n: usize) -> Result<String, String> {
    let (p, st) = load(problem, scenario)?;
    if !p.ode.params.iter().any(|k| k == name) {
        return Err(format!("{name} is not a parameter of {}", p.name()));
    }
    let ints = st.integrals.clone();
    let n = n.clamp(2, 200);
    let rows = (0..n)
        .map(|k| {
            let value = lo + (hi - lo) * k as f64 / (n - 1) as f64;
            let mut params = st.params.clone();
            params.insert(name.to_string(), value);
            match rk4(&p.ode, &params, st.ic, st.t_end, st.h) {
                Ok(traj) => SweepRow {
                    value,
                    end_state: Some(traj.last()),
                    drift: ints.iter().map(|(_, e)| drift(e, &traj).ok()).collect(),
                    error: None,
                },
                Err(e) => SweepRow {
                    value,
                    end_state: None,
                    drift: vec![None; ints.len()],
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let out = Sweep {
        parameter: name.to_string(),
        labels: ints.into_iter().map(|(l, _)| l).collect(),
        rows,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

/// `[{name, text}]` for the problems compiled into the page.
#[wasm_bindgen]
pub fn bundled_problems() -> String {
    let list: Vec<_> = BUNDLED
        .iter()
        .map(|(name, text)| serde_json::json!({ "name": name, "text": text }))
        .collect();
    serde_json::to_string(&list).expect("static json")
}

/// Parameters of a problem with their default values.
#[wasm_bindgen]
pub fn parameters(problem: &str) -> Result<String, JsError> {
    let p = problem_from_str(problem).map_err(|e| JsError::new(&e.to_string()))?;
    let values = numeric_params(&p);
    let list: Vec<_> = p
        .ode
        .params
        .iter()
        .map(|k| serde_json::json!({ "name": k, "value": values.get(k) }))
        .collect();
    Ok(serde_json::to_string(&list).expect("json"))
}

#[wasm_bindgen]
pub fn trajectory(problem: &str, scenario: &str) -> Result<String, JsError> {
    trajectory_json(problem, scenario).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn step_study(problem: &str, scenario: &str, h0: f64, steps: usize) -> Result<String, JsError> {
    step_study_json(problem, scenario, h0, steps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn sweep(problem: &str, scenario: &str, name: &str, lo: f64, hi: f64, n: usize) -> Result<String, JsError> {
    sweep_json(problem, scenario, name, lo, hi, n).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn text(name: &str) -> &'static str {
        BUNDLED.iter().find(|(n, _)| *n == name).unwrap().1
    }

    fn value(s: String) -> serde_json::Value {
        serde_json::from_str(&s).unwrap()
    }

    #[test]
    fn every_bundled_problem_loads() {
        for (name, t) in BUNDLED {
            let p = problem_from_str(t).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(p.numeric().is_some(), "{name}");
        }
    }

    #[test]
    fn trajectory_has_flat_curves() {
        let v = value(trajectory_json(text("mathews-lakshmanan"), "").unwrap());
        assert!(v["error"].is_null());
        let n = v["samples"].as_array().unwrap().len();
        for c in v["curves"].as_array().unwrap() {
            assert_eq!(c["deviation"].as_array().unwrap().len(), n);
            assert!(c["drift"].as_f64().unwrap() < 1e-7, "{c}");
        }
    }

    #[test]
    fn scenario_overrides_apply() {
        let v = value(trajectory_json(text("critically-damped"), r#"{"ic":[0,2,0],"t_end":1,"h":0.5}"#).unwrap());
        let s = v["samples"].as_array().unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[0], serde_json::json!([0.0, 2.0, 0.0]));
    }

    #[test]
    fn step_study_shows_fourth_order() {
        let v = value(step_study_json(text("mathews-lakshmanan"), "", 0.1, 3).unwrap());
        let rows = v["rows"].as_array().unwrap();
        let d = |k: usize| rows[k]["drift"][0].as_f64().unwrap();
        let r = d(0) / d(1);
        assert!((8.0..=32.0).contains(&r), "{r}");
    }

    #[test]
    fn sweep_rejects_unknown_parameter() {
        assert!(sweep_json(text("lienard"), "", "q", 0.0, 1.0, 3).is_err());
        let v = value(sweep_json(text("lienard"), "", "lam", -2.0, -0.5, 4).unwrap());
        assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn candidates_are_checked() {
        let sc = r#"{"integrals":["(xdot + x)*exp(t)","xdot"]}"#;
        let v = value(trajectory_json(text("critically-damped"), sc).unwrap());
        let c = v["curves"].as_array().unwrap();
        assert_eq!(c.len(), 2);
        assert!(c[0]["drift"].as_f64().unwrap() < 1e-9);
        assert!(c[1]["drift"].as_f64().unwrap() > 0.1);
        assert!(trajectory_json(text("lienard"), r#"{"integrals":["x +"]}"#).is_err());
    }

    #[test]
    fn unknown_scenario_fields_are_errors() {
        assert!(trajectory_json(text("lienard"), r#"{"ics":[0,0,1]}"#).is_err());
    }
}

//! Numeric cross-checks: classical RK4 trajectories and the drift of
//! candidate first integrals along them.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::odemodel::SecondOrderOde;
use crate::symcore::{eval_num, EvalError, Expr, Point, Symbol};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    /// `(t, x, xdot)` at uniform spacing `h`.
    pub samples: Vec<[f64; 3]>,
    pub h: f64,
    pub params: BTreeMap<String, f64>,
}

impl Trajectory {
    pub fn last(&self) -> [f64; 3] {
        *self.samples.last().expect("a trajectory has its initial sample")
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum NumError {
    #[error("step size must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("evaluation fault at t = {t} (step {step}): {source}")]
    EvaluationFault {
        step: usize,
        t: f64,
        source: EvalError,
        partial: Box<Trajectory>,
    },
}

fn point(params: &BTreeMap<String, f64>, s: [f64; 3]) -> Point {
    let mut p: Point = params.iter().map(|(k, v)| (Symbol::new(k), *v)).collect();
    p.insert(Symbol::t(), s[0]);
    p.insert(Symbol::x(), s[1]);
    p.insert(Symbol::v(), s[2]);
    p
}

fn finite(r: Result<f64, EvalError>) -> Result<f64, EvalError> {
    match r {
        Ok(y) if !y.is_finite() => Err(EvalError::Domain(format!("non-finite value {y}"))),
        other => other,
    }
}

/// Integrates `x' = v, v' = F` from `ic = (t0, x0, v0)` to `t_end`.
///
/// The step is adjusted to `(t_end - t0)/n` with `n = round((t_end - t0)/h)`
/// so that the last sample lands on `t_end`.
pub fn rk4(
    ode: &SecondOrderOde,
    params: &BTreeMap<String, f64>,
    ic: [f64; 3],
    t_end: f64,
    h: f64,
) -> Result<Trajectory, NumError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(NumError::BadStep(h));
    }
    let span = t_end - ic[0];
    let n = ((span / h).round() as usize).max(1);
    let h = span / n as f64;
    let mut traj = Trajectory {
        samples: Vec::with_capacity(n + 1),
        h,
        params: params.clone(),
    };
    traj.samples.push(ic);
    let accel = |s: [f64; 3]| finite(eval_num(&ode.f, &point(params, s)));
    let mut s = ic;
    for step in 0..n {
        let stage = || -> Result<[f64; 3], EvalError> {
            let [t, x, v] = s;
            let k1 = (v, accel(s)?);
            let s2 = [t + h / 2.0, x + h / 2.0 * k1.0, v + h / 2.0 * k1.1];
            let k2 = (s2[2], accel(s2)?);
            let s3 = [t + h / 2.0, x + h / 2.0 * k2.0, v + h / 2.0 * k2.1];
            let k3 = (s3[2], accel(s3)?);
            let s4 = [t + h, x + h * k3.0, v + h * k3.1];
            let k4 = (s4[2], accel(s4)?);
            Ok([
                ic[0] + (step + 1) as f64 * h,
                x + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
                v + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
            ])
        };
        match stage() {
            Ok(next) => {
                s = next;
                traj.samples.push(s);
            }
            Err(source) => {
                return Err(NumError::EvaluationFault {
                    step,
                    t: s[0],
                    source,
                    partial: Box::new(traj),
                })
            }
        }
    }
    Ok(traj)
}

/// `max |I - I0| / max(1, |I0|)` over the samples.
pub fn drift(i: &Expr, traj: &Trajectory) -> Result<f64, NumError> {
    let mut i0 = None;
    let mut worst: f64 = 0.0;
    for (step, s) in traj.samples.iter().enumerate() {
        let y = finite(eval_num(i, &point(&traj.params, *s))).map_err(|source| {
            NumError::EvaluationFault {
                step,
                t: s[0],
                source,
                partial: Box::new(Trajectory {
                    samples: traj.samples[..step].to_vec(),
                    h: traj.h,
                    params: traj.params.clone(),
                }),
            }
        })?;
        let base = *i0.get_or_insert(y);
        worst = worst.max((y - base).abs());
    }
    Ok(worst / i0.unwrap_or(0.0).abs().max(1.0))
}

/// Below this a drift is indistinguishable from rounding.
pub const NOISE_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderCheck {
    pub h: f64,
    pub drift_h: f64,
    pub drift_half: f64,
    /// `drift_h / drift_half`; `None` when either is at the noise floor.
    pub ratio: Option<f64>,
}

impl OrderCheck {
    /// A ratio in `[8, 32]`, or both drifts at the noise floor.
    pub fn fourth_order(&self) -> bool {
        match self.ratio {
            Some(r) => (8.0..=32.0).contains(&r),
            None => self.drift_h < 1e-10,
        }
    }
}

/// Drift at `h` and at `h/2` on the same interval.
pub fn order_check(
    ode: &SecondOrderOde,
    params: &BTreeMap<String, f64>,
    ic: [f64; 3],
    t_end: f64,
    i: &Expr,
    h: f64,
) -> Result<OrderCheck, NumError> {
    let d1 = drift(i, &rk4(ode, params, ic, t_end, h)?)?;
    let d2 = drift(i, &rk4(ode, params, ic, t_end, h / 2.0)?)?;
    let ratio = (d1 > NOISE_FLOOR && d2 > NOISE_FLOOR).then(|| d1 / d2);
    Ok(OrderCheck {
        h,
        drift_h: d1,
        drift_half: d2,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::parse::parse_plain;

    fn ode(f: &str) -> SecondOrderOde {
        SecondOrderOde::parse("t", &[], f).unwrap()
    }

    fn none() -> BTreeMap<String, f64> {
        BTreeMap::new()
    }

    #[test]
    fn free_particle_is_exact() {
        let tr = rk4(&ode("0"), &none(), [0.0, 0.0, 1.0], 1.0, 0.1).unwrap();
        assert_eq!(tr.samples.len(), 11);
        assert!((tr.last()[1] - 1.0).abs() < 1e-15);
        assert_eq!(drift(&parse_plain("xdot").unwrap(), &tr).unwrap(), 0.0);
        let dx = drift(&parse_plain("x").unwrap(), &tr).unwrap();
        assert!((dx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn harmonic_matches_sine() {
        let tr = rk4(&ode("-x"), &none(), [0.0, 0.0, 1.0], std::f64::consts::FRAC_PI_2, 1e-3).unwrap();
        let [t, x, _] = tr.last();
        assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!((x - t.sin()).abs() < 1e-10);
    }

    #[test]
    fn riccati_closed_form() {
        let tr = rk4(&ode("-3*x*xdot - x^3"), &none(), [0.0, 1.0, 1.0], 1.0, 1e-3).unwrap();
        for s in &tr.samples {
            assert!(s[2] + s[1] * s[1] > 0.0);
        }
        let [t, x, _] = tr.last();
        let exact = (1.0 + 2.0 * t) / (1.0 + t + t * t);
        assert!((x - exact).abs() < 1e-8);
    }

    #[test]
    fn riccati_integral_order() {
        let f = ode("-3*x*xdot - x^3");
        let i3 = parse_plain("(x^2 + 2*xdot)/(2*(x^2 + xdot)^2)").unwrap();
        let tr = rk4(&f, &none(), [0.0, 1.0, 1.0], 1.0, 1e-3).unwrap();
        assert!(drift(&i3, &tr).unwrap() < 1e-8);
        let oc = order_check(&f, &none(), [0.0, 1.0, 1.0], 1.0, &i3, 0.05).unwrap();
        assert!(oc.fourth_order(), "{oc:?}");
    }

    #[test]
    fn faults_keep_the_partial_path() {
        // x = 1/(1 - t) blows up at t = 1
        let err = rk4(&ode("2*xdot^2/x"), &none(), [0.0, 1.0, 1.0], 2.0, 1e-2).unwrap_err();
        match err {
            NumError::EvaluationFault { partial, .. } => assert!(!partial.samples.is_empty()),
            other => panic!("{other}"),
        }
        assert!(matches!(rk4(&ode("0"), &none(), [0.0; 3], 1.0, 0.0), Err(NumError::BadStep(_))));
    }
}

//! Layered zero test: exact normal form first, seeded sampling second.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::eval::{eval_tracked, Point};
use super::expr::Expr;
use super::normal::normalize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroVerdict {
    Zero,
    NonZero,
    Unknown(String),
}

impl ZeroVerdict {
    pub fn is_zero(&self) -> bool {
        matches!(self, ZeroVerdict::Zero)
    }

    pub fn is_nonzero(&self) -> bool {
        matches!(self, ZeroVerdict::NonZero)
    }

    pub fn label(&self) -> &'static str {
        match self {
            ZeroVerdict::Zero => "zero",
            ZeroVerdict::NonZero => "nonzero",
            ZeroVerdict::Unknown(_) => "unknown",
        }
    }
}

/// Seed used when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 20_080_317;
/// Number of admissible sample points.
pub const SAMPLES: usize = 16;
/// Sample points with any denominator below this are skipped.
pub const SAMPLE_DEN_TOL: f64 = 1e-6;
/// A sample counts as nonzero above this, relative to the expression scale.
pub const NONZERO_TOL: f64 = 1e-9;

static SEED: AtomicU64 = AtomicU64::new(DEFAULT_SEED);

/// Changes the seed used by [`is_zero`] for the whole process.
pub fn set_seed(seed: u64) {
    SEED.store(seed, Ordering::Relaxed);
}

pub fn current_seed() -> u64 {
    SEED.load(Ordering::Relaxed)
}

pub fn is_zero(e: &Expr) -> ZeroVerdict {
    is_zero_seeded(e, current_seed())
}

pub fn is_zero_seeded(e: &Expr, seed: u64) -> ZeroVerdict {
    let why = match normalize(e) {
        Ok(r) if r.is_zero() => return ZeroVerdict::Zero,
        Ok(_) => "normal form has a nonzero numerator",
        Err(_) => "normalization failed",
    };
    sample(e, seed, why)
}

/// Draws a coordinate: a rational `p/q` with `1 <= p <= 29`, `1 <= q <= 7`,
/// negated with probability 1/4.
fn coordinate(rng: &mut ChaCha8Rng) -> f64 {
    let p: u32 = rng.gen_range(1..=29);
    let q: u32 = rng.gen_range(1..=7);
    let v = p as f64 / q as f64;
    if rng.gen_range(0..4) == 0 {
        -v
    } else {
        v
    }
}

fn sample(e: &Expr, seed: u64, why: &str) -> ZeroVerdict {
    let symbols: Vec<_> = e.symbols().into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut admissible = 0;
    let mut last_fault = String::new();
    for _ in 0..SAMPLES * 4 {
        let point: Point = symbols.iter().map(|s| (s.clone(), coordinate(&mut rng))).collect();
        match eval_tracked(e, &point, SAMPLE_DEN_TOL) {
            Ok((v, scale)) => {
                admissible += 1;
                if v.abs() > NONZERO_TOL * scale.max(1.0) {
                    return ZeroVerdict::NonZero;
                }
            }
            Err(err) => last_fault = err.to_string(),
        }
        if admissible == SAMPLES {
            break;
        }
    }
    if admissible == 0 {
        return ZeroVerdict::Unknown(format!("{why}; no admissible sample point ({last_fault})"));
    }
    ZeroVerdict::Unknown(format!("{why}; numerically zero at {admissible} sample points"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::diff::total_derivative;
    use crate::symcore::parse::parse_plain;

    #[test]
    fn verdicts() {
        assert_eq!(is_zero(&parse_plain("exp(2*log(x)) - x^2").unwrap()), ZeroVerdict::Zero);
        assert_eq!(is_zero(&parse_plain("xdot - x").unwrap()), ZeroVerdict::NonZero);
        let i3 = parse_plain("(x^2+2*xdot)/(2*(x^2+xdot)^2)").unwrap();
        let f = parse_plain("-3*x*xdot - x^3").unwrap();
        assert_eq!(is_zero(&total_derivative(&i3, &f)), ZeroVerdict::Zero);
    }

    #[test]
    fn kernel_identity_is_not_decided_wrongly() {
        // sin^2 + cos^2 - 1 is outside the rational layer.
        let e = parse_plain("sin(x)^2 + cos(x)^2 - 1").unwrap();
        assert!(matches!(is_zero(&e), ZeroVerdict::Unknown(_)));
    }
}

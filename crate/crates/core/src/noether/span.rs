//! Membership of an integral in the span of a family.

use num_traits::One;
use serde::Serialize;

use crate::symcore::ratfunc::RatFunc;
use crate::symcore::{diff, is_zero, normalize, Expr, Symbol, Q};

use super::system::{solve, Bases, Term};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpanVerdict {
    /// `target = c0 + sum c_i I_i` with constant `c_i`.
    Linear,
    /// Not a linear combination, but a function of the family.
    Functional,
    Outside,
    Undecided,
}

/// Looks for constants with `target - c0 - sum c_i I_i = 0` identically.
pub fn in_linear_span(target: &Expr, family: &[Expr]) -> Option<bool> {
    let mut items = vec![target.clone(), Expr::one()];
    items.extend(family.iter().cloned());
    let mut bases: Vec<RatFunc> = Vec::with_capacity(items.len());
    for e in &items {
        bases.push(normalize(e).ok()?);
    }
    let sys = Bases::new(&bases);
    let columns: Vec<Vec<Term>> = (0..bases.len())
        .map(|k| {
            vec![Term {
                cond: 0,
                factor: Q::one(),
                shift: (0, 0),
                base: k,
            }]
        })
        .collect();
    let solved = solve(sys.rows(&columns), bases.len());
    Some(solved.basis().iter().any(|v| !v[0].is_zero()))
}

fn det3(r: [[Expr; 3]; 3]) -> Expr {
    let m = |i: usize, j: usize| r[i][j].clone();
    m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
        + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
}

fn grad(e: &Expr) -> [Expr; 3] {
    [diff(e, &Symbol::t()), diff(e, &Symbol::x()), diff(e, &Symbol::v())]
}

/// True if some pair of the family is independent and the target's gradient
/// lies in the plane of theirs.
pub fn functionally_dependent(target: &Expr, family: &[Expr]) -> Option<bool> {
    let (x, v) = (Symbol::x(), Symbol::v());
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            let (a, b) = (&family[i], &family[j]);
            let jac = diff(a, &x) * diff(b, &v) - diff(a, &v) * diff(b, &x);
            if !is_zero(&jac).is_nonzero() {
                continue;
            }
            return match is_zero(&det3([grad(target), grad(a), grad(b)])) {
                z if z.is_zero() => Some(true),
                z if z.is_nonzero() => Some(false),
                _ => None,
            };
        }
    }
    None
}

pub fn span_verdict(target: &Expr, family: &[Expr]) -> SpanVerdict {
    match in_linear_span(target, family) {
        Some(true) => SpanVerdict::Linear,
        _ => match functionally_dependent(target, family) {
            Some(true) => SpanVerdict::Functional,
            Some(false) => SpanVerdict::Outside,
            None => SpanVerdict::Undecided,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::parse::parse_plain;

    #[test]
    fn linear_membership() {
        let fam = [parse_plain("xdot").unwrap(), parse_plain("x - t*xdot").unwrap()];
        let target = parse_plain("3 + 2*xdot - (x - t*xdot)/5").unwrap();
        assert_eq!(in_linear_span(&target, &fam), Some(true));
        let sq = parse_plain("xdot^2").unwrap();
        assert_eq!(in_linear_span(&sq, &fam), Some(false));
        assert_eq!(span_verdict(&sq, &fam), SpanVerdict::Functional);
    }
}

//! Linear identities in `(t, x, xdot)` with coefficients in the parameters.
//!
//! A column is a list of terms `factor * t^a x^b * base`. Every base is put
//! over one common denominator and its numerator is collected by monomials
//! in the phase variables; exponents of `t` and `x` are kept as signed
//! integers so that Laurent shifts need no extra denominators.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::symcore::poly::{gcd, Poly, Var};
use crate::symcore::ratfunc::RatFunc;
use crate::symcore::{Symbol, Q};

use super::linalg::{nullspace, Nullspace, Row};

/// `(t exponent, x exponent, remaining phase monomial)`.
type Key = (i32, i32, Vec<(Var, u32)>);

#[derive(Clone, Debug)]
pub(crate) struct Term {
    pub cond: usize,
    pub factor: Q,
    pub shift: (i32, i32),
    pub base: usize,
}

fn is_phase(v: &Var) -> bool {
    match v {
        Var::Sym(s) => s.is_phase(),
        Var::Ker(_) => {
            let (t, x, xd) = (Symbol::t(), Symbol::x(), Symbol::v());
            v.depends_on(&t) || v.depends_on(&x) || v.depends_on(&xd)
        }
    }
}

fn collect(p: &Poly) -> BTreeMap<Key, Poly> {
    let (t, x) = (Var::Sym(Symbol::t()), Var::Sym(Symbol::x()));
    let mut out: BTreeMap<Key, Poly> = BTreeMap::new();
    for (c, pw) in p.monomials() {
        let (mut et, mut ex) = (0i32, 0i32);
        let mut rest = Vec::new();
        let mut coeff = Vec::new();
        for (v, k) in pw {
            if v == t {
                et = k as i32;
            } else if v == x {
                ex = k as i32;
            } else if is_phase(&v) {
                rest.push((v, k));
            } else {
                coeff.push((v, k));
            }
        }
        let slot = out.entry((et, ex, rest)).or_default();
        *slot = slot.add(&Poly::monomial(c, coeff));
    }
    out
}

pub(crate) struct Bases {
    collected: Vec<BTreeMap<Key, Poly>>,
}

impl Bases {
    pub fn new(bases: &[RatFunc]) -> Bases {
        let mut den = Poly::one();
        for b in bases {
            let g = gcd(&den, b.den());
            den = den.mul(&b.den().div_exact(&g).expect("gcd divides"));
        }
        let collected = bases
            .iter()
            .map(|b| {
                let cof = den.div_exact(b.den()).expect("common denominator");
                let n = RatFunc::from_poly(b.num().mul(&cof));
                collect(n.num())
            })
            .collect();
        Bases { collected }
    }

    /// One row per `(condition, monomial)`; entries are polynomials in the
    /// parameters.
    pub fn rows(&self, columns: &[Vec<Term>]) -> Vec<BTreeMap<usize, Poly>> {
        let mut rows: BTreeMap<(usize, Key), BTreeMap<usize, Poly>> = BTreeMap::new();
        for (col, terms) in columns.iter().enumerate() {
            for term in terms {
                if term.factor.is_zero() {
                    continue;
                }
                for ((a, b, rest), c) in &self.collected[term.base] {
                    let key = (term.cond, (a + term.shift.0, b + term.shift.1, rest.clone()));
                    let entry = rows.entry(key).or_default().entry(col).or_default();
                    *entry = entry.add(&c.scale(&term.factor));
                }
            }
        }
        rows.into_values()
            .map(|mut r| {
                r.retain(|_, p| !p.is_zero());
                r
            })
            .filter(|r| !r.is_empty())
            .collect()
    }
}

/// Solution space over the rationals when every entry is constant, else
/// over rational functions of the parameters.
pub(crate) enum Solved {
    Rational(Nullspace<Q>),
    Parametric(Nullspace<RatFunc>),
}

impl Solved {
    pub fn basis(&self) -> Vec<Vec<RatFunc>> {
        match self {
            Solved::Rational(ns) => ns
                .basis
                .iter()
                .map(|v| v.iter().map(|c| RatFunc::constant(c.clone())).collect())
                .collect(),
            Solved::Parametric(ns) => ns.basis.clone(),
        }
    }

    pub fn assumptions(&self) -> Vec<RatFunc> {
        match self {
            Solved::Rational(_) => Vec::new(),
            Solved::Parametric(ns) => ns.assumptions.clone(),
        }
    }
}

pub(crate) fn solve(rows: Vec<BTreeMap<usize, Poly>>, ncols: usize) -> Solved {
    if rows.iter().all(|r| r.values().all(Poly::is_constant)) {
        let qrows = rows.into_iter().map(|r| -> Row<Q> {
            r.into_iter().map(|(c, p)| (c, p.as_constant().unwrap_or_default())).collect()
        });
        Solved::Rational(nullspace(qrows, ncols))
    } else {
        let frows = rows
            .into_iter()
            .map(|r| -> Row<RatFunc> { r.into_iter().map(|(c, p)| (c, RatFunc::from_poly(p))).collect() });
        Solved::Parametric(nullspace(frows, ncols))
    }
}

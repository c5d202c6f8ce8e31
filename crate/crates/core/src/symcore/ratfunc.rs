//! Quotients of polynomials with the gcd removed.
//!
//! The denominator is kept primitive with a positive leading coefficient so
//! that equal functions built the same way compare equal. Powers of root
//! kernels at or above their index are reduced in both numerator and
//! denominator.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::expr::{Symbol, Q};
use super::normal::Kernel;
use super::poly::{gcd, Poly, Var};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl Default for RatFunc {
    fn default() -> Self {
        RatFunc::zero()
    }
}

/// Rewrites `K^n` with `n >= index` for every root kernel `K` in `p`.
fn reduce_roots(p: &Poly) -> Poly {
    let mut out = p.clone();
    for v in p.vars() {
        let Var::Ker(k) = v else { continue };
        let Kernel::Root { base, index } = &**k else { continue };
        if out.degree(v) < *index {
            continue;
        }
        let mut acc = Poly::zero();
        for (e, c) in out.coeffs_in(v) {
            let (q, r) = (e / index, e % index);
            let term = c.mul(&base.pow(q)).shift(v, r);
            acc = acc.add(&term);
        }
        out = acc;
    }
    out
}

/// Clears root kernels from the denominator where this is cheap: a kernel
/// occurring as a monomial factor, or a square root occurring linearly.
fn rationalize(mut num: Poly, mut den: Poly) -> (Poly, Poly) {
    for _ in 0..4 {
        let mut changed = false;
        for v in den.vars().to_vec() {
            let Var::Ker(k) = &v else { continue };
            let Kernel::Root { index, .. } = &**k else { continue };
            let coeffs = den.coeffs_in(&v);
            let conj = if coeffs.len() == 1 {
                let j = *coeffs.keys().next().unwrap();
                Poly::monomial(num_traits::One::one(), vec![(v.clone(), index - j)])
            } else if *index == 2 && den.degree(&v) == 1 {
                let a = den.coeff_in(&v, 0);
                let b = den.coeff_in(&v, 1);
                a.sub(&b.shift(&v, 1))
            } else {
                continue;
            };
            num = reduce_roots(&num.mul(&conj));
            den = reduce_roots(&den.mul(&conj));
            changed = true;
        }
        if !changed {
            break;
        }
    }
    (num, den)
}

impl RatFunc {
    pub fn zero() -> RatFunc {
        RatFunc {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> RatFunc {
        RatFunc::constant(Q::one())
    }

    pub fn constant(c: Q) -> RatFunc {
        RatFunc {
            num: Poly::constant(c),
            den: Poly::one(),
        }
    }

    pub fn from_poly(p: Poly) -> RatFunc {
        RatFunc {
            num: reduce_roots(&p),
            den: Poly::one(),
        }
    }

    pub fn var(v: Var) -> RatFunc {
        RatFunc::from_poly(Poly::var(v))
    }

    pub fn symbol(s: &Symbol) -> RatFunc {
        RatFunc::from_poly(Poly::symbol(s))
    }

    /// Builds `num/den` in lowest terms. Panics if `den` is zero.
    pub fn new(num: Poly, den: Poly) -> RatFunc {
        let (num, den) = rationalize(reduce_roots(&num), reduce_roots(&den));
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return RatFunc::zero();
        }
        if let Some(c) = den.as_constant() {
            return RatFunc {
                num: num.scale(&c.recip()),
                den: Poly::one(),
            };
        }
        let g = gcd(&num, &den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (
                num.div_exact(&g).expect("gcd divides numerator"),
                den.div_exact(&g).expect("gcd divides denominator"),
            )
        };
        let c = den.content_q();
        RatFunc {
            num: num.scale(&c.recip()),
            den: den.scale(&c.recip()),
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn into_parts(self) -> (Poly, Poly) {
        (self.num, self.den)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num.is_one()
    }

    pub fn as_constant(&self) -> Option<Q> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    pub fn depends_on(&self, s: &Symbol) -> bool {
        self.num.depends_on(s) || self.den.depends_on(s)
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out: Vec<Var> = self.num.vars().to_vec();
        out.extend(self.den.vars().iter().cloned());
        out.sort();
        out.dedup();
        out
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn scale(&self, c: &Q) -> RatFunc {
        if c.is_zero() {
            return RatFunc::zero();
        }
        RatFunc {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn add(&self, o: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            return RatFunc::new(self.num.add(&o.num), self.den.clone());
        }
        if o.den.is_one() {
            return RatFunc::new(self.num.add(&o.num.mul(&self.den)), self.den.clone());
        }
        if self.den.is_one() {
            return RatFunc::new(self.num.mul(&o.den).add(&o.num), o.den.clone());
        }
        let g = gcd(&self.den, &o.den);
        let a = self.den.div_exact(&g).expect("gcd divides");
        let b = o.den.div_exact(&g).expect("gcd divides");
        let num = self.num.mul(&b).add(&o.num.mul(&a));
        RatFunc::new(num, a.mul(&o.den))
    }

    pub fn sub(&self, o: &RatFunc) -> RatFunc {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &RatFunc) -> RatFunc {
        if self.is_zero() || o.is_zero() {
            return RatFunc::zero();
        }
        if let Some(c) = o.as_constant() {
            return self.scale(&c);
        }
        if let Some(c) = self.as_constant() {
            return o.scale(&c);
        }
        if self.den.is_one() && o.den.is_one() {
            return RatFunc::from_poly(self.num.mul(&o.num));
        }
        // Cross-cancel first to keep intermediate sizes down.
        let g1 = gcd(&self.num, &o.den);
        let g2 = gcd(&o.num, &self.den);
        let n1 = self.num.div_exact(&g1).expect("gcd divides");
        let d2 = o.den.div_exact(&g1).expect("gcd divides");
        let n2 = o.num.div_exact(&g2).expect("gcd divides");
        let d1 = self.den.div_exact(&g2).expect("gcd divides");
        RatFunc::new(n1.mul(&n2), d1.mul(&d2))
    }

    pub fn recip(&self) -> RatFunc {
        assert!(!self.is_zero(), "reciprocal of zero");
        RatFunc::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, o: &RatFunc) -> RatFunc {
        self.mul(&o.recip())
    }

    pub fn powi(&self, n: i64) -> RatFunc {
        if n < 0 {
            return self.recip().powi(-n);
        }
        let n = n as u32;
        RatFunc::new(self.num.pow(n), self.den.pow(n))
    }

    /// Multiplies by a polynomial without re-running gcd on the denominator
    /// when it is trivially coprime.
    pub fn mul_poly(&self, p: &Poly) -> RatFunc {
        self.mul(&RatFunc::from_poly(p.clone()))
    }

    /// Partial derivative, propagating through kernels by the chain rule.
    pub fn diff(&self, s: &Symbol) -> RatFunc {
        if !self.depends_on(s) {
            return RatFunc::zero();
        }
        let dn = poly_diff(&self.num, s);
        if self.den.is_one() {
            return dn;
        }
        let dd = poly_diff(&self.den, s);
        let d = RatFunc::from_poly(self.den.clone());
        // (n'/1 * d - n * d') / d^2
        let top = dn.mul(&d).sub(&dd.mul_poly(&self.num));
        top.div(&d.mul(&d))
    }

    /// Substitutes `value` for every occurrence of the indeterminate `v`
    /// (an atom, not a symbol inside kernels).
    pub fn compose_var(&self, v: &Var, value: &RatFunc) -> RatFunc {
        let n = compose_poly(&self.num, v, value);
        let d = compose_poly(&self.den, v, value);
        n.div(&d)
    }
}

fn compose_poly(p: &Poly, v: &Var, value: &RatFunc) -> RatFunc {
    if !p.contains_var(v) {
        return RatFunc::from_poly(p.clone());
    }
    let mut acc = RatFunc::zero();
    for (k, c) in p.coeffs_in(v) {
        acc = acc.add(&value.powi(k as i64).mul_poly(&c));
    }
    acc
}

/// `d/ds` of a polynomial whose indeterminates may be kernels.
pub fn poly_diff(p: &Poly, s: &Symbol) -> RatFunc {
    let mut acc = RatFunc::zero();
    for v in p.vars() {
        if !v.depends_on(s) {
            continue;
        }
        let dp = p.derivative(v);
        if dp.is_zero() {
            continue;
        }
        let dv = var_diff(v, s);
        acc = acc.add(&dv.mul_poly(&dp));
    }
    acc
}

fn var_diff(v: &Var, s: &Symbol) -> RatFunc {
    match v {
        Var::Sym(x) => {
            if x == s {
                RatFunc::one()
            } else {
                RatFunc::zero()
            }
        }
        Var::Ker(k) => k.diff(s),
    }
}

/// Collects a polynomial by the monomials of the variables selected by
/// `keep`; the coefficients are polynomials in the remaining variables.
pub fn collect_by(p: &Poly, keep: impl Fn(&Var) -> bool) -> BTreeMap<Vec<(Var, u32)>, Poly> {
    let mut out: BTreeMap<Vec<(Var, u32)>, Poly> = BTreeMap::new();
    for (c, pw) in p.monomials() {
        let (kept, rest): (Vec<_>, Vec<_>) = pw.into_iter().partition(|(v, _)| keep(v));
        let coeff = Poly::monomial(c, rest);
        let slot = out.entry(kept).or_default();
        *slot = slot.add(&coeff);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::expr::qi;

    fn x() -> RatFunc {
        RatFunc::symbol(&Symbol::x())
    }

    #[test]
    fn cancels_common_factors() {
        let one = RatFunc::one();
        let a = x().add(&one);
        let b = x().sub(&one);
        let q = a.mul(&b).div(&b);
        assert_eq!(q, a);
        let r = one.div(&a).sub(&one.div(&b));
        let expect = RatFunc::constant(qi(-2)).div(&a.mul(&b));
        assert_eq!(r, expect);
    }

    #[test]
    fn quotient_rule() {
        let one = RatFunc::one();
        let f = one.div(&x().mul(&x()).add(&one));
        let d = f.diff(&Symbol::x());
        let expect = x().scale(&qi(-2)).div(&x().mul(&x()).add(&one).powi(2));
        assert_eq!(d, expect);
    }

    #[test]
    fn denominator_is_normalized() {
        let f = RatFunc::one().div(&x().scale(&qi(-2)));
        assert_eq!(f.den().lead_coeff(), qi(1));
        assert_eq!(f.num().as_constant(), Some(Q::new((-1).into(), 2.into())));
    }
}

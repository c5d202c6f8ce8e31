//! Rational normal forms with transcendental kernels.
//!
//! An [`Expr`] is mapped to a [`RatFunc`] whose indeterminates are symbols
//! and kernels: `exp`, `log`, `sin`, `cos`, `atan` of a normalized argument,
//! and roots `base^(1/n)` of a primitive polynomial. On the way the
//! following rewrites are applied:
//!
//! * `exp(c*log q) -> q^c` and `exp(a + b) -> exp(a)*exp(b)` term by term
//! * `log(exp p) -> p`, `log(p^m q) -> m log p + log q` over the square-free
//!   factors of the argument, with a positive constant split off
//! * `(p^m)^(a/b)` pulls whole powers out of roots; `root^n` reduces to the
//!   base once `n` reaches the index
//! * odd functions pull a negative sign out of their argument
//!
//! Fractional powers and logarithms assume a positive argument.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use super::expr::{split_perfect_power, Expr, Func, Symbol, Q};
use super::poly::{squarefree, Poly, Var};
use super::ratfunc::RatFunc;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kernel {
    Fun(Func, RatFunc),
    /// `base^(1/index)` with `base` primitive up to sign.
    Root { base: Poly, index: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum NormError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0}")]
    Domain(String),
}

impl Kernel {
    pub fn depends_on(&self, s: &Symbol) -> bool {
        match self {
            Kernel::Fun(_, a) => a.depends_on(s),
            Kernel::Root { base, .. } => base.depends_on(s),
        }
    }

    fn as_var(&self) -> RatFunc {
        RatFunc::var(Var::Ker(Arc::new(self.clone())))
    }

    pub fn diff(&self, s: &Symbol) -> RatFunc {
        match self {
            Kernel::Fun(f, a) => {
                let da = a.diff(s);
                if da.is_zero() {
                    return RatFunc::zero();
                }
                let outer = match f {
                    Func::Exp => self.as_var(),
                    Func::Log => a.recip(),
                    Func::Sin => Kernel::Fun(Func::Cos, a.clone()).as_var(),
                    Func::Cos => Kernel::Fun(Func::Sin, a.clone()).as_var().neg(),
                    Func::Atan => RatFunc::one().add(&a.mul(a)).recip(),
                };
                outer.mul(&da)
            }
            Kernel::Root { base, index } => {
                let b = RatFunc::from_poly(base.clone());
                let db = b.diff(s);
                if db.is_zero() {
                    return RatFunc::zero();
                }
                self.as_var()
                    .mul(&db)
                    .div(&b.scale(&Q::from_integer(BigInt::from(*index))))
            }
        }
    }

    pub fn to_expr(&self) -> Expr {
        match self {
            Kernel::Fun(f, a) => Expr::Fun(*f, Box::new(to_expr(a))),
            Kernel::Root { base, index } => Expr::Pow(
                Box::new(poly_display(base)),
                Q::new(BigInt::one(), BigInt::from(*index)),
            ),
        }
    }
}

fn ker(k: Kernel) -> RatFunc {
    RatFunc::var(Var::Ker(Arc::new(k)))
}

/// Rational normal form of `e`.
pub fn normalize(e: &Expr) -> Result<RatFunc, NormError> {
    Ok(match e {
        Expr::Num(c) => RatFunc::constant(c.clone()),
        Expr::Sym(s) => RatFunc::symbol(s),
        Expr::Add(items) => {
            let mut acc = RatFunc::zero();
            for it in items {
                acc = acc.add(&normalize(it)?);
            }
            acc
        }
        Expr::Mul(items) => {
            let mut acc = RatFunc::one();
            for it in items {
                let f = normalize(it)?;
                if f.is_zero() {
                    return Ok(RatFunc::zero());
                }
                acc = acc.mul(&f);
            }
            acc
        }
        Expr::Pow(b, ex) => pow_rat(&normalize(b)?, ex)?,
        Expr::Fun(f, a) => apply(*f, &normalize(a)?)?,
    })
}

/// Applies one of the unary functions to a normal form.
pub fn apply(f: Func, a: &RatFunc) -> Result<RatFunc, NormError> {
    match f {
        Func::Exp => Ok(exp_of(a)),
        Func::Log => log_of(a),
        Func::Sin | Func::Cos | Func::Atan => {
            if a.is_zero() {
                return Ok(if f == Func::Cos {
                    RatFunc::one()
                } else {
                    RatFunc::zero()
                });
            }
            let negative = a.num().lead_coeff().is_negative();
            let arg = if negative { a.neg() } else { a.clone() };
            let k = ker(Kernel::Fun(f, arg));
            Ok(if negative && f != Func::Cos { k.neg() } else { k })
        }
    }
}

/// `a^e` for rational `e`.
pub fn pow_rat(a: &RatFunc, e: &Q) -> Result<RatFunc, NormError> {
    if e.is_integer() {
        if a.is_zero() {
            return if e.is_negative() {
                Err(NormError::DivisionByZero)
            } else if e.is_zero() {
                Ok(RatFunc::one())
            } else {
                Ok(RatFunc::zero())
            };
        }
        let n = e.to_integer().to_i64().ok_or_else(|| NormError::Domain("exponent too large".into()))?;
        return Ok(a.powi(n));
    }
    if a.is_zero() {
        return if e.is_positive() {
            Ok(RatFunc::zero())
        } else {
            Err(NormError::DivisionByZero)
        };
    }
    let top = poly_pow_rat(a.num(), e)?;
    let bottom = poly_pow_rat(a.den(), e)?;
    Ok(top.div(&bottom))
}

/// Content, monomial factors and square-free factors of a polynomial.
fn split_factors(p: &Poly) -> (Q, Vec<(Poly, u32)>) {
    let mono = p.monomial_content();
    let rest = p.div_exact(&mono).expect("monomial content divides");
    let mut factors: Vec<(Poly, u32)> = Vec::new();
    if let Some((_, pw)) = mono.monomials().pop() {
        for (v, k) in pw {
            factors.push((Poly::var(v), k));
        }
    }
    let (c, sqf) = if rest.nterms() == 1 {
        (rest.lead_coeff(), Vec::new())
    } else {
        squarefree(&rest)
    };
    factors.extend(sqf);
    (c, factors)
}

/// Moves a negative content into the first factor of odd multiplicity.
fn absorb_sign(c: &mut Q, factors: &mut [(Poly, u32)]) -> bool {
    if !c.is_negative() {
        return true;
    }
    if let Some(slot) = factors.iter_mut().find(|(_, m)| m % 2 == 1) {
        slot.0 = slot.0.neg();
        *c = -c.clone();
        return true;
    }
    false
}

fn single_var(p: &Poly) -> Option<Var> {
    if p.nterms() != 1 || p.vars().len() != 1 || !p.lead_coeff().is_one() {
        return None;
    }
    if p.total_degree() != 1 {
        return None;
    }
    Some(p.vars()[0].clone())
}

fn poly_pow_rat(p: &Poly, e: &Q) -> Result<RatFunc, NormError> {
    if let Some(c) = p.as_constant() {
        return const_pow(&c, e);
    }
    let (mut c, mut factors) = split_factors(p);
    if e.denom() % 2u32 == BigInt::zero() && !absorb_sign(&mut c, &mut factors) {
        return Err(NormError::Domain(
            "even root of a negative quantity".into(),
        ));
    }
    let mut acc = const_pow(&c, e)?;
    for (f, m) in factors {
        let r = e * Q::from_integer(BigInt::from(m));
        let part = match single_var(&f) {
            Some(Var::Ker(k)) => match &*k {
                Kernel::Fun(Func::Exp, arg) => exp_of(&arg.scale(&r)),
                Kernel::Root { base, index } => {
                    poly_pow_rat(base, &(r / Q::from_integer(BigInt::from(*index))))?
                }
                _ => root_power(&f, &r),
            },
            _ => root_power(&f, &r),
        };
        acc = acc.mul(&part);
    }
    Ok(acc)
}

/// `f^r` for a primitive square-free `f`: whole part times a root kernel.
fn root_power(f: &Poly, r: &Q) -> RatFunc {
    let den = r.denom().to_u32().expect("small root index");
    let num = r.numer();
    let (whole, rem) = num.div_mod_floor(&BigInt::from(den));
    let fr = RatFunc::from_poly(f.clone());
    let mut out = fr.powi(whole.to_i64().expect("small exponent"));
    if !rem.is_zero() {
        let k = ker(Kernel::Root {
            base: f.clone(),
            index: den,
        });
        out = out.mul(&k.powi(rem.to_i64().unwrap()));
    }
    out
}

/// `c^e` for rational constants, leaving a root kernel for the irrational part.
fn const_pow(c: &Q, e: &Q) -> Result<RatFunc, NormError> {
    if c.is_zero() {
        return if e.is_positive() {
            Ok(RatFunc::zero())
        } else {
            Err(NormError::DivisionByZero)
        };
    }
    let q = e.denom().to_u32().ok_or_else(|| NormError::Domain("root index too large".into()))?;
    let p = e.numer().to_i64().ok_or_else(|| NormError::Domain("exponent too large".into()))?;
    if q == 1 {
        return Ok(RatFunc::constant(num_traits::pow::Pow::pow(c, p as i32)));
    }
    if c.is_negative() && q % 2 == 0 {
        return Err(NormError::Domain("even root of a negative constant".into()));
    }
    // c^(1/q) = (n d^(q-1))^(1/q) / d
    let n = c.numer().clone();
    let d = c.denom().clone();
    let lifted = n * num_traits::pow(d.clone(), (q - 1) as usize);
    let (outside, inside) = split_perfect_power(&lifted, q);
    let base = Q::new(outside, d);
    let mut out = RatFunc::constant(num_traits::pow::Pow::pow(&base, p as i32));
    if inside.is_one() {
        return Ok(out);
    }
    if inside == -BigInt::one() {
        return Ok(if p % 2 == 0 { out } else { out.neg() });
    }
    let (whole, rem) = (p.div_euclid(q as i64), p.rem_euclid(q as i64));
    let inside_q = Q::from_integer(inside.clone());
    out = out.scale(&num_traits::pow::Pow::pow(&inside_q, whole as i32));
    if rem != 0 {
        let k = ker(Kernel::Root {
            base: Poly::constant(inside_q),
            index: q,
        });
        out = out.mul(&k.powi(rem));
    }
    Ok(out)
}

/// `exp(a)` split over the terms of a polynomial argument.
fn exp_of(a: &RatFunc) -> RatFunc {
    if a.is_zero() {
        return RatFunc::one();
    }
    if !a.is_polynomial() {
        let negative = a.num().lead_coeff().is_negative();
        let arg = if negative { a.neg() } else { a.clone() };
        let k = ker(Kernel::Fun(Func::Exp, arg));
        return if negative { k.recip() } else { k };
    }
    let scale = a.den().as_constant().expect("polynomial").recip();
    let mut acc = RatFunc::one();
    for (c, pw) in a.num().monomials() {
        let c = c * &scale;
        if let [(Var::Ker(k), 1)] = pw.as_slice() {
            if let Kernel::Fun(Func::Log, inner) = &**k {
                if let Ok(p) = pow_rat(inner, &c) {
                    acc = acc.mul(&p);
                    continue;
                }
            }
        }
        let unit = Q::new(BigInt::one(), c.denom().clone());
        let m = Poly::monomial(unit, pw);
        let k = ker(Kernel::Fun(Func::Exp, RatFunc::from_poly(m)));
        let n = c.numer().to_i64().expect("small exponent");
        acc = acc.mul(&k.powi(n));
    }
    acc
}

fn log_of(a: &RatFunc) -> Result<RatFunc, NormError> {
    if a.is_zero() {
        return Err(NormError::Domain("log of zero".into()));
    }
    let top = log_poly(a.num())?;
    let bottom = log_poly(a.den())?;
    Ok(top.sub(&bottom))
}

fn log_poly(p: &Poly) -> Result<RatFunc, NormError> {
    let (mut c, mut factors) = if let Some(c) = p.as_constant() {
        (c, Vec::new())
    } else {
        split_factors(p)
    };
    if !absorb_sign(&mut c, &mut factors) {
        return Err(NormError::Domain("log of a negative quantity".into()));
    }
    let mut acc = if c.is_one() {
        RatFunc::zero()
    } else {
        ker(Kernel::Fun(Func::Log, RatFunc::constant(c)))
    };
    for (f, m) in factors {
        let mq = Q::from_integer(BigInt::from(m));
        let part = match single_var(&f) {
            Some(Var::Ker(k)) => match &*k {
                Kernel::Fun(Func::Exp, arg) => arg.clone(),
                Kernel::Root { base, index } => {
                    log_poly(base)?.scale(&Q::new(BigInt::one(), BigInt::from(*index)))
                }
                _ => ker(Kernel::Fun(Func::Log, RatFunc::from_poly(f.clone()))),
            },
            _ => ker(Kernel::Fun(Func::Log, RatFunc::from_poly(f.clone()))),
        };
        acc = acc.add(&part.scale(&mq));
    }
    Ok(acc)
}

fn var_expr(v: &Var, k: u32) -> Expr {
    match v {
        Var::Sym(s) => Expr::powi(Expr::Sym(s.clone()), k as i64),
        Var::Ker(kr) => match &**kr {
            Kernel::Root { base, index } => Expr::pow(
                poly_display(base),
                Q::new(BigInt::from(k), BigInt::from(*index)),
            ),
            other => Expr::powi(other.to_expr(), k as i64),
        },
    }
}

/// Expanded polynomial, largest term first.
pub fn poly_to_expr(p: &Poly) -> Expr {
    let mut terms: Vec<Expr> = Vec::with_capacity(p.nterms());
    for (c, mut pw) in p.monomials().into_iter().rev() {
        // Parameters read better in front: lam*x^2 rather than x^2*lam.
        pw.sort_by_key(|(v, _)| match v {
            Var::Sym(s) if !s.is_reserved() => 0,
            Var::Sym(_) => 1,
            Var::Ker(_) => 2,
        });
        let mut fs = vec![Expr::Num(c)];
        fs.extend(pw.iter().map(|(v, k)| var_expr(v, *k)));
        terms.push(Expr::mul_all(fs));
    }
    if terms.is_empty() {
        return Expr::zero();
    }
    // Keep the polynomial's order rather than letting add_all move constants.
    if terms.len() == 1 {
        return terms.pop().unwrap();
    }
    Expr::Add(terms)
}

/// Polynomial as content times square-free factors.
pub fn poly_display(p: &Poly) -> Expr {
    if p.nterms() <= 1 {
        return poly_to_expr(p);
    }
    let (c, factors) = split_factors(p);
    let mut fs = vec![Expr::Num(c)];
    for (f, m) in &factors {
        fs.push(Expr::powi(poly_to_expr(f), *m as i64));
    }
    Expr::mul_all(fs)
}

/// Converts a normal form back to a readable expression.
pub fn to_expr(r: &RatFunc) -> Expr {
    let num = poly_display(r.num());
    if r.den().is_one() {
        return num;
    }
    num / poly_display(r.den())
}

/// Normalizes and converts back; expressions that cannot be normalized are
/// returned unchanged.
pub fn simplify(e: &Expr) -> Expr {
    match normalize(e) {
        Ok(r) => to_expr(&r),
        Err(_) => e.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::parse::parse;

    fn n(s: &str) -> RatFunc {
        normalize(&parse(s, &["a".into(), "lam".into(), "k".into()]).unwrap()).unwrap()
    }

    #[test]
    fn rational_identities() {
        assert!(n("(x+1)^2 - x^2 - 2*x - 1").is_zero());
        assert_eq!(n("(x^2-1)/(x-1)"), n("x+1"));
        assert_eq!(n("1/(2*x) + 1/(2*x)"), n("1/x"));
    }

    #[test]
    fn exp_log_rewrites() {
        assert_eq!(n("exp(2*log(x))"), n("x^2"));
        assert_eq!(n("exp(2*log(x) - log(t))"), n("x^2/t"));
        assert_eq!(n("exp(-log(lam*x^2+1))"), n("1/(lam*x^2+1)"));
        assert_eq!(n("log(exp(x+t))"), n("x+t"));
        assert_eq!(n("exp(x+t)"), n("exp(x)*exp(t)"));
        assert!(n("log(x^2*t) - 2*log(x) - log(t)").is_zero());
        assert!(n("exp(t)*exp(-t) - 1").is_zero());
    }

    #[test]
    fn root_rewrites() {
        assert!(n("sqrt(x+1)^2 - x - 1").is_zero());
        assert_eq!(n("sqrt(x^2)"), n("x"));
        assert_eq!(n("sqrt(8)"), n("2*sqrt(2)"));
        assert_eq!(n("(xdot+x^2)^(-3/2)"), n("1/((xdot+x^2)*sqrt(xdot+x^2))"));
        assert_eq!(n("sqrt(1/3)"), n("sqrt(3)/3"));
        assert!(n("sqrt(-4*lam) - 2*sqrt(-lam)").is_zero());
        let d = n("sqrt(xdot + k*x^2/6)").diff(&Symbol::v());
        assert_eq!(d, n("1/(2*sqrt(xdot + k*x^2/6))"));
    }

    #[test]
    fn odd_functions() {
        assert!(n("sin(-x) + sin(x)").is_zero());
        assert!(n("cos(-x) - cos(x)").is_zero());
        assert!(n("atan(-x) + atan(x)").is_zero());
    }

    #[test]
    fn display_factors() {
        let e = to_expr(&n("xdot^2/(2*lam*x^2+2)"));
        assert_eq!(e.to_string(), "xdot^2/(2*(lam*x^2 + 1))");
        let e = to_expr(&n("-(xdot+x^2)^(-3)"));
        assert_eq!(e.to_string(), "-1/(x^2 + xdot)^3");
    }
}

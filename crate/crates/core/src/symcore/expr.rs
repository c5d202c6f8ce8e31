//! Immutable expression trees over `t`, `x`, `xdot` and declared parameters.
//!
//! Constructors fold literal subtrees into a single exact rational, flatten
//! nested sums and products and drop neutral elements. They do not attempt
//! any further simplification; that is the job of [`super::normal`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational constants.
pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Name of the time variable.
pub const T: &str = "t";
/// Name of the dependent variable.
pub const X: &str = "x";
/// Name of the velocity symbol; the grammar spells it `xdot`.
pub const V: &str = "xdot";
/// Fresh acceleration symbol used when forming Euler-Lagrange expressions.
pub const A: &str = "xddot";

pub const RESERVED: [&str; 4] = [T, X, V, A];

/// A symbol name. Reserved symbols sort before parameters in the fixed
/// order `t < x < xdot < xddot`; parameters sort lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn t() -> Self {
        Symbol::new(T)
    }

    pub fn x() -> Self {
        Symbol::new(X)
    }

    pub fn v() -> Self {
        Symbol::new(V)
    }

    pub fn xddot() -> Self {
        Symbol::new(A)
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    pub fn is_reserved(&self) -> bool {
        RESERVED.contains(&self.name())
    }

    /// True for the phase-space coordinates `t`, `x`, `xdot`.
    pub fn is_phase(&self) -> bool {
        matches!(self.name(), T | X | V)
    }

    fn rank(&self) -> usize {
        RESERVED
            .iter()
            .position(|r| *r == self.name())
            .unwrap_or(RESERVED.len())
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.rank(), self.name()).cmp(&(other.rank(), other.name()))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Atan,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Atan => "atan",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "atan" => Func::Atan,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Num(Q),
    Sym(Symbol),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    /// Power with an exact rational exponent; `sqrt(a)` is `Pow(a, 1/2)`.
    Pow(Box<Expr>, Q),
    Fun(Func, Box<Expr>),
}

impl Expr {
    pub fn num(value: Q) -> Expr {
        Expr::Num(value)
    }

    pub fn int(n: i64) -> Expr {
        Expr::Num(qi(n))
    }

    pub fn rat(n: i64, d: i64) -> Expr {
        Expr::Num(q(n, d))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn sym(name: &str) -> Expr {
        Expr::Sym(Symbol::new(name))
    }

    pub fn t() -> Expr {
        Expr::Sym(Symbol::t())
    }

    pub fn x() -> Expr {
        Expr::Sym(Symbol::x())
    }

    pub fn v() -> Expr {
        Expr::Sym(Symbol::v())
    }

    pub fn as_num(&self) -> Option<&Q> {
        match self {
            Expr::Num(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Expr::Num(c) if c.is_zero())
    }

    pub fn is_one_literal(&self) -> bool {
        matches!(self, Expr::Num(c) if c.is_one())
    }

    pub fn add_all(terms: impl IntoIterator<Item = Expr>) -> Expr {
        let mut flat = Vec::new();
        let mut constant = Q::zero();
        for term in terms {
            match term {
                Expr::Num(c) => constant += c,
                Expr::Add(inner) => {
                    for t in inner {
                        match t {
                            Expr::Num(c) => constant += c,
                            other => flat.push(other),
                        }
                    }
                }
                other => flat.push(other),
            }
        }
        if !constant.is_zero() {
            flat.push(Expr::Num(constant));
        }
        match flat.len() {
            0 => Expr::zero(),
            1 => flat.pop().unwrap(),
            _ => Expr::Add(flat),
        }
    }

    pub fn mul_all(factors: impl IntoIterator<Item = Expr>) -> Expr {
        let mut flat = Vec::new();
        let mut constant = Q::one();
        for factor in factors {
            match factor {
                Expr::Num(c) => constant *= c,
                Expr::Mul(inner) => {
                    for f in inner {
                        match f {
                            Expr::Num(c) => constant *= c,
                            other => flat.push(other),
                        }
                    }
                }
                other => flat.push(other),
            }
        }
        if constant.is_zero() {
            return Expr::zero();
        }
        if !constant.is_one() {
            flat.insert(0, Expr::Num(constant));
        }
        match flat.len() {
            0 => Expr::one(),
            1 => flat.pop().unwrap(),
            _ => Expr::Mul(flat),
        }
    }

    pub fn pow(base: Expr, exponent: Q) -> Expr {
        if exponent.is_zero() {
            return Expr::one();
        }
        if exponent.is_one() {
            return base;
        }
        match base {
            Expr::Num(c) => match rational_power(&c, &exponent) {
                Some(value) => Expr::Num(value),
                None => Expr::Pow(Box::new(Expr::Num(c)), exponent),
            },
            Expr::Pow(inner, e) if exponent.is_integer() => Expr::pow(*inner, e * exponent),
            other => Expr::Pow(Box::new(other), exponent),
        }
    }

    pub fn powi(base: Expr, n: i64) -> Expr {
        Expr::pow(base, qi(n))
    }

    pub fn sqrt(base: Expr) -> Expr {
        Expr::pow(base, q(1, 2))
    }

    pub fn recip(self) -> Expr {
        Expr::powi(self, -1)
    }

    pub fn fun(f: Func, arg: Expr) -> Expr {
        if arg.is_zero_literal() {
            match f {
                Func::Exp | Func::Cos => return Expr::one(),
                Func::Sin | Func::Atan => return Expr::zero(),
                Func::Log => {}
            }
        }
        if f == Func::Log && arg.is_one_literal() {
            return Expr::zero();
        }
        Expr::Fun(f, Box::new(arg))
    }

    pub fn exp(arg: Expr) -> Expr {
        Expr::fun(Func::Exp, arg)
    }

    pub fn log(arg: Expr) -> Expr {
        Expr::fun(Func::Log, arg)
    }

    /// Every symbol occurring in the tree.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Expr::Num(_) => {}
            Expr::Sym(s) => {
                out.insert(s.clone());
            }
            Expr::Add(items) | Expr::Mul(items) => {
                items.iter().for_each(|e| e.collect_symbols(out))
            }
            Expr::Pow(b, _) => b.collect_symbols(out),
            Expr::Fun(_, a) => a.collect_symbols(out),
        }
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Sym(x) => x == s,
            Expr::Add(items) | Expr::Mul(items) => items.iter().any(|e| e.contains(s)),
            Expr::Pow(b, _) => b.contains(s),
            Expr::Fun(_, a) => a.contains(s),
        }
    }

    /// Simultaneous substitution of symbols by expressions.
    pub fn subst(&self, bindings: &BTreeMap<Symbol, Expr>) -> Expr {
        match self {
            Expr::Num(_) => self.clone(),
            Expr::Sym(s) => bindings.get(s).cloned().unwrap_or_else(|| self.clone()),
            Expr::Add(items) => Expr::add_all(items.iter().map(|e| e.subst(bindings))),
            Expr::Mul(items) => Expr::mul_all(items.iter().map(|e| e.subst(bindings))),
            Expr::Pow(b, e) => Expr::pow(b.subst(bindings), e.clone()),
            Expr::Fun(f, a) => Expr::fun(*f, a.subst(bindings)),
        }
    }

    pub fn subst1(&self, s: &Symbol, value: &Expr) -> Expr {
        let mut m = BTreeMap::new();
        m.insert(s.clone(), value.clone());
        self.subst(&m)
    }

    /// Number of nodes, used to keep heuristics bounded.
    pub fn size(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Sym(_) => 1,
            Expr::Add(items) | Expr::Mul(items) => 1 + items.iter().map(Expr::size).sum::<usize>(),
            Expr::Pow(b, _) => 1 + b.size(),
            Expr::Fun(_, a) => 1 + a.size(),
        }
    }
}

/// `c^e` when the result is again rational.
pub(crate) fn rational_power(c: &Q, e: &Q) -> Option<Q> {
    if c.is_zero() {
        return if e.is_positive() { Some(Q::zero()) } else { None };
    }
    if c.is_one() {
        return Some(Q::one());
    }
    let n = e.numer().to_i64()?;
    let d = e.denom().to_u32()?;
    if n.unsigned_abs() > 4096 {
        return None;
    }
    let base = if d == 1 {
        c.clone()
    } else {
        if c.is_negative() && d % 2 == 0 {
            return None;
        }
        let num = exact_root(c.numer(), d)?;
        let den = exact_root(c.denom(), d)?;
        Q::new(num, den)
    };
    let powered = num_traits::pow(base.clone(), n.unsigned_abs() as usize);
    Some(if n < 0 { powered.recip() } else { powered })
}

/// Exact integer `d`-th root if one exists.
pub(crate) fn exact_root(n: &BigInt, d: u32) -> Option<BigInt> {
    if d == 1 {
        return Some(n.clone());
    }
    if n.is_negative() {
        if d % 2 == 0 {
            return None;
        }
        return exact_root(&-n, d).map(|r| -r);
    }
    let r = n.nth_root(d);
    if num_traits::pow(r.clone(), d as usize) == *n {
        Some(r)
    } else {
        None
    }
}

/// Largest `a` with `a^d | n` (trial division by small primes), returned with
/// the cofactor, which keeps the sign of `n`.
pub(crate) fn split_perfect_power(n: &BigInt, d: u32) -> (BigInt, BigInt) {
    let mut outside = BigInt::one();
    let mut inside = n.abs();
    let mut p = BigInt::from(2u32);
    let limit = BigInt::from(10_000u32);
    while &p * &p <= inside && p < limit {
        let pd = num_traits::pow(p.clone(), d as usize);
        while (&inside % &pd).is_zero() {
            inside /= &pd;
            outside *= &p;
        }
        p += 1u32;
    }
    if let Some(r) = exact_root(&inside, d) {
        outside *= r;
        inside = BigInt::one();
    }
    if n.is_negative() {
        inside = -inside;
    }
    (outside, inside)
}

impl From<Q> for Expr {
    fn from(c: Q) -> Self {
        Expr::Num(c)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<Symbol> for Expr {
    fn from(s: Symbol) -> Self {
        Expr::Sym(s)
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add_all([self, rhs])
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::add_all([self, -rhs])
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul_all([self, rhs])
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::mul_all([self, rhs.recip()])
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self {
            Expr::Num(c) => Expr::Num(-c),
            other => Expr::mul_all([Expr::int(-1), other]),
        }
    }
}

macro_rules! ref_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                $tr::$m(self.clone(), rhs.clone())
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                $tr::$m(self.clone(), rhs)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                $tr::$m(self, rhs.clone())
            }
        }
    )*};
}

ref_ops!(Add add, Sub sub, Mul mul, Div div);

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -(self.clone())
    }
}

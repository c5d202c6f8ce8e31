//! Sparse multivariate polynomials over the rationals.
//!
//! Indeterminates are plain symbols or transcendental kernels (see
//! [`super::normal::Kernel`]). Terms are stored in a `BTreeMap` keyed by
//! exponent vectors aligned with a sorted variable list, so the map order is
//! lexicographic with the first variable most significant.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::expr::{Symbol, Q};
use super::normal::Kernel;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Sym(Symbol),
    Ker(Arc<Kernel>),
}

impl Var {
    pub fn sym(name: &str) -> Var {
        Var::Sym(Symbol::new(name))
    }

    /// Whether the value of this indeterminate changes with `s`.
    pub fn depends_on(&self, s: &Symbol) -> bool {
        match self {
            Var::Sym(x) => x == s,
            Var::Ker(k) => k.depends_on(s),
        }
    }

    pub fn as_sym(&self) -> Option<&Symbol> {
        match self {
            Var::Sym(s) => Some(s),
            Var::Ker(_) => None,
        }
    }
}

pub type Exps = Vec<u32>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly {
    vars: Vec<Var>,
    terms: BTreeMap<Exps, Q>,
}

impl Default for Poly {
    fn default() -> Self {
        Poly::zero()
    }
}

fn merge_vars(a: &[Var], b: &[Var]) -> Vec<Var> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i].clone());
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl Poly {
    pub fn zero() -> Poly {
        Poly {
            vars: Vec::new(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Poly {
        Poly::constant(Q::one())
    }

    pub fn constant(c: Q) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c);
        }
        Poly {
            vars: Vec::new(),
            terms,
        }
    }

    pub fn var(v: Var) -> Poly {
        Poly::monomial(Q::one(), vec![(v, 1)])
    }

    pub fn symbol(s: &Symbol) -> Poly {
        Poly::var(Var::Sym(s.clone()))
    }

    /// `c * prod v^e`; repeated variables are merged.
    pub fn monomial(c: Q, powers: Vec<(Var, u32)>) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        let mut merged: BTreeMap<Var, u32> = BTreeMap::new();
        for (v, e) in powers {
            if e > 0 {
                *merged.entry(v).or_insert(0) += e;
            }
        }
        let vars: Vec<Var> = merged.keys().cloned().collect();
        let exps: Exps = merged.values().copied().collect();
        let mut terms = BTreeMap::new();
        terms.insert(exps, c);
        Poly { vars, terms }
    }

    fn from_parts(vars: Vec<Var>, terms: BTreeMap<Exps, Q>) -> Poly {
        let mut p = Poly { vars, terms };
        p.trim();
        p
    }

    /// Drops variables that no longer occur.
    fn trim(&mut self) {
        self.terms.retain(|_, c| !c.is_zero());
        let n = self.vars.len();
        let mut used = vec![false; n];
        for e in self.terms.keys() {
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    used[i] = true;
                }
            }
        }
        if used.iter().all(|&u| u) {
            return;
        }
        let keep: Vec<usize> = (0..n).filter(|&i| used[i]).collect();
        self.vars = keep.iter().map(|&i| self.vars[i].clone()).collect();
        let old = std::mem::take(&mut self.terms);
        for (e, c) in old {
            let ne: Exps = keep.iter().map(|&i| e[i]).collect();
            self.terms.insert(ne, c);
        }
    }

    fn aligned(&self, vars: &[Var]) -> BTreeMap<Exps, Q> {
        if self.vars.as_slice() == vars {
            return self.terms.clone();
        }
        let map: Vec<usize> = self
            .vars
            .iter()
            .map(|v| vars.binary_search(v).expect("variable missing from superset"))
            .collect();
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut ne = vec![0u32; vars.len()];
                for (i, &k) in e.iter().enumerate() {
                    ne[map[i]] = k;
                }
                (ne, c.clone())
            })
            .collect()
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exps, &Q)> {
        self.terms.iter()
    }

    /// Terms as explicit `(coefficient, [(var, exponent)])` lists.
    pub fn monomials(&self) -> Vec<(Q, Vec<(Var, u32)>)> {
        self.terms
            .iter()
            .map(|(e, c)| {
                let pw = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(i, &k)| (self.vars[i].clone(), k))
                    .collect();
                (c.clone(), pw)
            })
            .collect()
    }

    pub fn nterms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Q> {
        if self.terms.is_empty() {
            return Some(Q::zero());
        }
        if self.vars.is_empty() {
            return self.terms.values().next().cloned();
        }
        None
    }

    pub fn is_constant(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn contains_var(&self, v: &Var) -> bool {
        self.vars.binary_search(v).is_ok()
    }

    pub fn depends_on(&self, s: &Symbol) -> bool {
        self.vars.iter().any(|v| v.depends_on(s))
    }

    /// Largest term in lexicographic order.
    pub fn lead(&self) -> Option<(&Exps, &Q)> {
        self.terms.iter().next_back()
    }

    pub fn lead_coeff(&self) -> Q {
        self.lead().map(|(_, c)| c.clone()).unwrap_or_else(Q::zero)
    }

    pub fn neg(&self) -> Poly {
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: &Q) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect(),
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        let vars = merge_vars(&self.vars, &other.vars);
        let mut terms = self.aligned(&vars);
        for (e, c) in other.aligned(&vars) {
            let slot = terms.entry(e).or_insert_with(Q::zero);
            *slot += c;
        }
        Poly::from_parts(vars, terms)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        let vars = merge_vars(&self.vars, &other.vars);
        let a = self.aligned(&vars);
        let b = other.aligned(&vars);
        let mut terms: BTreeMap<Exps, Q> = BTreeMap::new();
        for (ea, ca) in &a {
            for (eb, cb) in &b {
                let e: Exps = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                let slot = terms.entry(e).or_insert_with(Q::zero);
                *slot += ca * cb;
            }
        }
        Poly::from_parts(vars, terms)
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn degree(&self, v: &Var) -> u32 {
        match self.vars.binary_search(v) {
            Ok(i) => self.terms.keys().map(|e| e[i]).max().unwrap_or(0),
            Err(_) => 0,
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Coefficients of `self` viewed as a polynomial in `v`.
    pub fn coeffs_in(&self, v: &Var) -> BTreeMap<u32, Poly> {
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        let Ok(i) = self.vars.binary_search(v) else {
            if !self.is_zero() {
                out.insert(0, self.clone());
            }
            return out;
        };
        let mut buckets: BTreeMap<u32, BTreeMap<Exps, Q>> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut ne = e.clone();
            let k = ne[i];
            ne[i] = 0;
            buckets.entry(k).or_default().insert(ne, c.clone());
        }
        for (k, terms) in buckets {
            out.insert(k, Poly::from_parts(self.vars.clone(), terms));
        }
        out
    }

    pub fn coeff_in(&self, v: &Var, k: u32) -> Poly {
        self.coeffs_in(v).remove(&k).unwrap_or_default()
    }

    /// Multiplies by `v^k`.
    pub fn shift(&self, v: &Var, k: u32) -> Poly {
        if k == 0 {
            return self.clone();
        }
        self.mul(&Poly::monomial(Q::one(), vec![(v.clone(), k)]))
    }

    /// Formal partial derivative with respect to an indeterminate.
    pub fn derivative(&self, v: &Var) -> Poly {
        let Ok(i) = self.vars.binary_search(v) else {
            return Poly::zero();
        };
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut ne = e.clone();
            ne[i] -= 1;
            terms.insert(ne, c * Q::from_integer(BigInt::from(e[i])));
        }
        Poly::from_parts(self.vars.clone(), terms)
    }

    /// Exact quotient, or `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        if d.vars.iter().any(|v| !self.contains_var(v)) {
            return None;
        }
        if d.nterms() > self.nterms() && d.total_degree() > self.total_degree() {
            return None;
        }
        let vars = self.vars.clone();
        let dd: Vec<(Exps, Q)> = d.aligned(&vars).into_iter().rev().collect();
        let (dle, dlc) = dd[0].clone();
        let mut rem = self.terms.clone();
        let mut quot: BTreeMap<Exps, Q> = BTreeMap::new();
        while let Some((re, rc)) = rem.iter().next_back().map(|(e, c)| (e.clone(), c.clone())) {
            if re.iter().zip(&dle).any(|(a, b)| a < b) {
                return None;
            }
            let qe: Exps = re.iter().zip(&dle).map(|(a, b)| a - b).collect();
            let qc = &rc / &dlc;
            for (e, c) in &dd {
                let pe: Exps = e.iter().zip(&qe).map(|(a, b)| a + b).collect();
                let slot = rem.entry(pe.clone()).or_insert_with(Q::zero);
                *slot -= c * &qc;
                if slot.is_zero() {
                    rem.remove(&pe);
                }
            }
            quot.insert(qe, qc);
        }
        Some(Poly::from_parts(vars, quot))
    }

    /// Rational content with the sign of the leading coefficient, so that
    /// `self / content` has coprime integer coefficients and a positive lead.
    pub fn content_q(&self) -> Q {
        let Some((_, lc)) = self.lead() else {
            return Q::one();
        };
        let mut g = BigInt::zero();
        let mut l = BigInt::one();
        for c in self.terms.values() {
            g = g.gcd(c.numer());
            l = l.lcm(c.denom());
        }
        let c = Q::new(g, l);
        if lc.is_negative() {
            -c
        } else {
            c
        }
    }

    /// Primitive integer normalization with positive leading coefficient.
    pub fn primitive(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let c = self.content_q();
        if c.is_one() {
            return self.clone();
        }
        self.scale(&c.recip())
    }

    /// Exponentwise minimum over all terms, as a monic monomial.
    pub fn monomial_content(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let n = self.vars.len();
        let mut m = vec![u32::MAX; n];
        for e in self.terms.keys() {
            for i in 0..n {
                m[i] = m[i].min(e[i]);
            }
        }
        let pw = m
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(i, &k)| (self.vars[i].clone(), k))
            .collect();
        Poly::monomial(Q::one(), pw)
    }

    /// Substitutes a polynomial for an indeterminate.
    pub fn compose(&self, v: &Var, value: &Poly) -> Poly {
        let coeffs = self.coeffs_in(v);
        let mut acc = Poly::zero();
        let mut last = 0u32;
        let mut power = Poly::one();
        for (k, c) in coeffs {
            power = power.mul(&value.pow(k - last));
            last = k;
            acc = acc.add(&c.mul(&power));
        }
        acc
    }
}

/// Greatest common divisor, normalized by [`Poly::primitive`].
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.primitive();
    }
    if b.is_zero() {
        return a.primitive();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a.nterms() == 1 {
        return monomial_gcd(a, &b.monomial_content());
    }
    if b.nterms() == 1 {
        return monomial_gcd(b, &a.monomial_content());
    }
    let pa = a.primitive();
    let pb = b.primitive();
    if pa == pb {
        return pa;
    }
    if pa.nterms() >= pb.nterms() && pa.div_exact(&pb).is_some() {
        return pb;
    }
    if pb.nterms() >= pa.nterms() && pb.div_exact(&pa).is_some() {
        return pa;
    }
    gcd_rec(&pa, &pb)
}

fn monomial_gcd(m: &Poly, other: &Poly) -> Poly {
    let (_, me) = m.monomials().pop().unwrap();
    let (_, oe) = other.monomials().pop().unwrap_or((Q::one(), vec![]));
    let mut pw = Vec::new();
    for (v, k) in me {
        if let Some((_, j)) = oe.iter().find(|(w, _)| *w == v) {
            pw.push((v, k.min(*j)));
        }
    }
    Poly::monomial(Q::one(), pw)
}

/// Content of `p` with respect to `v`: the gcd of its coefficients in `v`.
pub fn content_in(p: &Poly, v: &Var) -> Poly {
    let mut g = Poly::zero();
    for (_, c) in p.coeffs_in(v) {
        g = gcd(&g, &c);
        if g.is_one() {
            break;
        }
    }
    g
}

fn gcd_rec(a: &Poly, b: &Poly) -> Poly {
    if let Some(h) = heu_gcd(a, b) {
        return h;
    }
    prs_gcd_rec(a, b)
}

fn prs_gcd_rec(a: &Poly, b: &Poly) -> Poly {
    if let Some(v) = a.vars.iter().find(|v| !b.contains_var(v)) {
        return gcd(&content_in(a, v), b);
    }
    if let Some(v) = b.vars.iter().find(|v| !a.contains_var(v)) {
        return gcd(a, &content_in(b, v));
    }
    let main = a
        .vars
        .iter()
        .min_by_key(|v| a.degree(v).max(b.degree(v)))
        .unwrap()
        .clone();
    let ca = content_in(a, &main);
    let cb = content_in(b, &main);
    let ppa = a.div_exact(&ca).expect("content divides");
    let ppb = b.div_exact(&cb).expect("content divides");
    let c = gcd(&ca, &cb);
    let g = prs_gcd(ppa, ppb, &main);
    c.mul(&g).primitive()
}

type ZPoly = BTreeMap<Exps, BigInt>;

/// Evaluation points larger than this many bits are not tried.
const HEU_MAX_BITS: u64 = 60_000;

/// Heuristic gcd: evaluate at large integers, take the integer gcd and read
/// the polynomial back from its balanced base-`xi` digits. Every candidate
/// is confirmed by exact division; `None` means the heuristic gave up.
fn heu_gcd(a: &Poly, b: &Poly) -> Option<Poly> {
    let vars = merge_vars(&a.vars, &b.vars);
    let za = to_z(a, &vars)?;
    let zb = to_z(b, &vars)?;
    let h = heu_rec(&za, &zb, &vars, 0)?;
    Some(from_z(&vars, &h).primitive())
}

fn to_z(p: &Poly, vars: &[Var]) -> Option<ZPoly> {
    p.aligned(vars)
        .into_iter()
        .map(|(e, c)| c.is_integer().then(|| (e, c.to_integer())))
        .collect()
}

fn from_z(vars: &[Var], z: &ZPoly) -> Poly {
    Poly::from_parts(
        vars.to_vec(),
        z.iter().map(|(e, c)| (e.clone(), Q::from_integer(c.clone()))).collect(),
    )
}

fn z_content(f: &ZPoly) -> BigInt {
    f.values().fold(BigInt::zero(), |g, c| g.gcd(c))
}

fn z_norm(f: &ZPoly) -> BigInt {
    f.values().map(|c| c.abs()).max().unwrap_or_default()
}

fn z_divides(h: &ZPoly, f: &ZPoly, vars: &[Var]) -> bool {
    from_z(vars, f).div_exact(&from_z(vars, h)).is_some_and(|q| q.terms.values().all(|c| c.is_integer()))
}

fn heu_rec(f: &ZPoly, g: &ZPoly, vars: &[Var], level: usize) -> Option<ZPoly> {
    let n = vars.len();
    let Some(i) = (level..n).find(|&i| f.keys().chain(g.keys()).any(|e| e[i] > 0)) else {
        let a = f.values().next().cloned().unwrap_or_default();
        let b = g.values().next().cloned().unwrap_or_default();
        let mut out = ZPoly::new();
        out.insert(vec![0; n], a.gcd(&b));
        return Some(out);
    };
    let (cf, cg) = (z_content(f), z_content(g));
    let c = cf.gcd(&cg);
    let f: ZPoly = f.iter().map(|(e, k)| (e.clone(), k / &cf)).collect();
    let g: ZPoly = g.iter().map(|(e, k)| (e.clone(), k / &cg)).collect();
    let (fnorm, gnorm) = (z_norm(&f), z_norm(&g));
    let lf = f.values().next_back()?.abs();
    let lg = g.values().next_back()?.abs();
    let bound: BigInt = BigInt::from(2) * fnorm.clone().min(gnorm.clone()) + 29;
    let small = (BigInt::from(99) * bound.sqrt()).min(bound.clone());
    let mut xi = small.max(BigInt::from(2) * (&fnorm / &lf).min(&gnorm / &lg) + 2);
    for _ in 0..6 {
        if xi.bits() > HEU_MAX_BITS {
            return None;
        }
        let ff = z_eval(&f, i, &xi);
        let gg = z_eval(&g, i, &xi);
        if !ff.is_empty() && !gg.is_empty() {
            if let Some(hh) = heu_rec(&ff, &gg, vars, i + 1) {
                let mut h = z_interpolate(&hh, i, &xi);
                let hc = z_content(&h);
                let neg = h.values().next_back().is_some_and(|c| c.is_negative());
                for k in h.values_mut() {
                    *k /= &hc;
                    if neg {
                        *k = -&*k;
                    }
                }
                if z_divides(&h, &f, vars) && z_divides(&h, &g, vars) {
                    for k in h.values_mut() {
                        *k *= &c;
                    }
                    return Some(h);
                }
            }
        }
        xi = BigInt::from(73794) * &xi * xi.sqrt().sqrt() / 27011;
    }
    None
}

fn z_eval(f: &ZPoly, i: usize, xi: &BigInt) -> ZPoly {
    let mut powers: Vec<BigInt> = vec![BigInt::one()];
    let mut out = ZPoly::new();
    for (e, c) in f {
        let k = e[i] as usize;
        while powers.len() <= k {
            let next = powers.last().unwrap() * xi;
            powers.push(next);
        }
        let mut ne = e.clone();
        ne[i] = 0;
        *out.entry(ne).or_default() += c * &powers[k];
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn z_interpolate(h: &ZPoly, i: usize, xi: &BigInt) -> ZPoly {
    let half = xi / 2;
    let mut out = ZPoly::new();
    let mut h = h.clone();
    let mut k = 0u32;
    while !h.is_empty() {
        let mut next = ZPoly::new();
        for (e, c) in &h {
            let mut r = c.mod_floor(xi);
            if r > half {
                r -= xi;
            }
            if !r.is_zero() {
                let mut ne = e.clone();
                ne[i] = k;
                out.insert(ne, r.clone());
            }
            let q = (c - &r) / xi;
            if !q.is_zero() {
                next.insert(e.clone(), q);
            }
        }
        h = next;
        k += 1;
    }
    out
}

/// Primitive polynomial remainder sequence on inputs primitive in `v`.
fn prs_gcd(a: Poly, b: Poly, v: &Var) -> Poly {
    let (mut f, mut g) = if a.degree(v) >= b.degree(v) { (a, b) } else { (b, a) };
    loop {
        if g.is_zero() {
            return primitive_in(&f, v);
        }
        if g.degree(v) == 0 {
            return Poly::one();
        }
        let r = pseudo_rem(&f, &g, v);
        f = g;
        g = if r.is_zero() { r } else { primitive_in(&r, v) };
    }
}

fn primitive_in(p: &Poly, v: &Var) -> Poly {
    let c = content_in(p, v);
    p.div_exact(&c).expect("content divides").primitive()
}

/// Sparse pseudo-remainder of `f` by `g` in `v`.
pub fn pseudo_rem(f: &Poly, g: &Poly, v: &Var) -> Poly {
    let dg = g.degree(v);
    let lg = g.coeff_in(v, dg);
    let mut r = f.clone();
    while !r.is_zero() && r.degree(v) >= dg {
        let dr = r.degree(v);
        let lr = r.coeff_in(v, dr);
        r = r.mul(&lg).sub(&g.mul(&lr).shift(v, dr - dg));
        r = r.primitive();
    }
    r
}

/// Square-free decomposition: `p = c * prod f_i^m_i` with each `f_i`
/// primitive and square-free, and the `f_i` pairwise coprime.
pub fn squarefree(p: &Poly) -> (Q, Vec<(Poly, u32)>) {
    if p.is_zero() {
        return (Q::zero(), Vec::new());
    }
    let c = p.content_q();
    let pp = p.scale(&c.recip());
    let mut factors = Vec::new();
    sqf_into(&pp, &mut factors);
    factors.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    let mut product = Poly::one();
    for (f, m) in &factors {
        product = product.mul(&f.pow(*m));
    }
    let rest = pp.div_exact(&product).and_then(|r| r.as_constant());
    (c * rest.unwrap_or_else(Q::one), factors)
}

fn sqf_into(p: &Poly, out: &mut Vec<(Poly, u32)>) {
    if p.is_constant() {
        return;
    }
    let main = p.vars[0].clone();
    let cont = content_in(p, &main);
    let pp = p.div_exact(&cont).expect("content divides").primitive();
    yun(&pp, &main, out);
    sqf_into(&cont, out);
}

fn yun(f: &Poly, v: &Var, out: &mut Vec<(Poly, u32)>) {
    if f.degree(v) == 0 {
        return;
    }
    let df = f.derivative(v);
    let a0 = gcd(f, &df);
    let mut b = f.div_exact(&a0).expect("gcd divides");
    let c = df.div_exact(&a0).expect("gcd divides");
    let mut d = c.sub(&b.derivative(v));
    let mut i = 1u32;
    while b.degree(v) > 0 {
        let a = gcd(&b, &d);
        if !a.is_constant() {
            out.push((a.primitive(), i));
        }
        let nb = b.div_exact(&a).expect("gcd divides");
        let c = d.div_exact(&a).expect("gcd divides");
        d = c.sub(&nb.derivative(v));
        b = nb;
        i += 1;
    }
}

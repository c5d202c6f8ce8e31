//! Exact nullspaces by incremental reduction to row echelon form.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::symcore::normal::to_expr;
use crate::symcore::ratfunc::RatFunc;
use crate::symcore::Q;

pub trait Field: Clone + PartialEq {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Free of parameters; such pivots need no case split.
    fn is_constant(&self) -> bool;
    /// Rough size, used to prefer small pivots.
    fn weight(&self) -> usize;
    fn describe(&self) -> String;
}

impl Field for Q {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_constant(&self) -> bool {
        true
    }
    fn weight(&self) -> usize {
        (self.numer().bits() + self.denom().bits()) as usize
    }
    fn describe(&self) -> String {
        self.to_string()
    }
}

impl Field for RatFunc {
    fn zero() -> Self {
        RatFunc::zero()
    }
    fn one() -> Self {
        RatFunc::one()
    }
    fn is_zero(&self) -> bool {
        RatFunc::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        RatFunc::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        RatFunc::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        RatFunc::mul(self, o)
    }
    fn div(&self, o: &Self) -> Self {
        RatFunc::div(self, o)
    }
    fn neg(&self) -> Self {
        RatFunc::neg(self)
    }
    fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }
    fn weight(&self) -> usize {
        self.num().nterms() + self.den().nterms()
    }
    fn describe(&self) -> String {
        to_expr(self).to_string()
    }
}

pub type Row<F> = BTreeMap<usize, F>;

#[derive(Clone, Debug)]
pub struct Nullspace<F> {
    pub basis: Vec<Vec<F>>,
    /// Nonconstant pivots divided by; the basis is valid where they are nonzero.
    pub assumptions: Vec<F>,
    pub rank: usize,
}

fn axpy<F: Field>(row: &mut Row<F>, k: &F, other: &Row<F>) {
    // row -= k * other
    for (c, v) in other {
        let delta = k.mul(v);
        match row.get_mut(c) {
            Some(x) => {
                let nx = x.sub(&delta);
                if nx.is_zero() {
                    row.remove(c);
                } else {
                    *x = nx;
                }
            }
            None => {
                row.insert(*c, delta.neg());
            }
        }
    }
}

/// Incremental reduced row echelon form.
pub struct Echelon<F> {
    ncols: usize,
    pivots: BTreeMap<usize, Row<F>>,
    assumptions: Vec<F>,
}

impl<F: Field> Echelon<F> {
    pub fn new(ncols: usize) -> Self {
        Echelon {
            ncols,
            pivots: BTreeMap::new(),
            assumptions: Vec::new(),
        }
    }

    /// Adds a row; returns false if it was dependent on earlier ones.
    pub fn push(&mut self, mut row: Row<F>) -> bool {
        row.retain(|_, v| !v.is_zero());
        let hits: Vec<usize> = row.keys().filter(|c| self.pivots.contains_key(c)).copied().collect();
        for c in hits {
            if let Some(k) = row.get(&c).cloned() {
                axpy(&mut row, &k, &self.pivots[&c]);
            }
        }
        if row.is_empty() {
            return false;
        }
        let (&pc, pv) = row
            .iter()
            .min_by_key(|(c, v)| (!v.is_constant(), v.weight(), **c))
            .expect("nonempty row");
        let pv = pv.clone();
        if !pv.is_constant() {
            self.assumptions.push(pv.clone());
        }
        let inv = F::one().div(&pv);
        for v in row.values_mut() {
            *v = v.mul(&inv);
        }
        for prow in self.pivots.values_mut() {
            if let Some(k) = prow.get(&pc).cloned() {
                axpy(prow, &k, &row);
            }
        }
        self.pivots.insert(pc, row);
        true
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn nullspace(self) -> Nullspace<F> {
        let free: Vec<usize> = (0..self.ncols).filter(|c| !self.pivots.contains_key(c)).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &f in &free {
            let mut vec = vec![F::zero(); self.ncols];
            vec[f] = F::one();
            for (&p, prow) in &self.pivots {
                if let Some(v) = prow.get(&f) {
                    vec[p] = v.neg();
                }
            }
            basis.push(vec);
        }
        Nullspace {
            basis,
            assumptions: self.assumptions,
            rank: self.pivots.len(),
        }
    }
}

pub fn nullspace<F: Field>(rows: impl IntoIterator<Item = Row<F>>, ncols: usize) -> Nullspace<F> {
    let mut ech = Echelon::new(ncols);
    for r in rows {
        ech.push(r);
        if ech.rank() == ncols {
            break;
        }
    }
    ech.nullspace()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::expr::qi;

    fn row(entries: &[(usize, i64)]) -> Row<Q> {
        entries.iter().map(|&(c, v)| (c, qi(v))).collect()
    }

    #[test]
    fn small_system() {
        // x0 + x1 = 0, x1 - x2 = 0 over three unknowns
        let ns = nullspace(vec![row(&[(0, 1), (1, 1)]), row(&[(1, 1), (2, -1)])], 3);
        assert_eq!(ns.rank, 2);
        assert_eq!(ns.basis.len(), 1);
        let v = &ns.basis[0];
        assert_eq!(&v[0] + &v[1], qi(0));
        assert_eq!(&v[1] - &v[2], qi(0));
    }

    #[test]
    fn dependent_rows() {
        let ns = nullspace(vec![row(&[(0, 2), (1, 4)]), row(&[(0, 1), (1, 2)])], 2);
        assert_eq!(ns.rank, 1);
        assert_eq!(ns.basis.len(), 1);
    }
}

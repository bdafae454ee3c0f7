//! Diagonalization of sparse integer matrices.
//!
//! Elimination always pivots on an entry of smallest absolute value. Row and column
//! operations reduce every other entry in the pivot's row and column to a remainder; a
//! nonzero remainder is strictly smaller than the pivot and becomes the next pivot. The
//! diagonal found this way is then normalized to invariant factors.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Column-major sparse integer matrix.
#[derive(Debug, Clone, Default)]
pub struct SparseMatrix {
    rows: usize,
    cols: Vec<BTreeMap<usize, BigInt>>,
}

impl SparseMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols: vec![BTreeMap::new(); cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols.len()
    }

    /// Adds `v` to entry `(r, c)`.
    pub fn add(&mut self, r: usize, c: usize, v: i64) {
        assert!(r < self.rows, "row {r} out of range");
        let e = self.cols[c].entry(r).or_insert_with(BigInt::zero);
        *e += v;
        if e.is_zero() {
            self.cols[c].remove(&r);
        }
    }

    pub fn get(&self, r: usize, c: usize) -> BigInt {
        self.cols[c].get(&r).cloned().unwrap_or_default()
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(|c| c.len()).sum()
    }

    /// Nonzero diagonal entries (absolute values) of a diagonal form, in pivot order.
    pub fn diagonalize(self) -> Vec<BigInt> {
        Eliminator::new(self).run()
    }

    pub fn rank(self) -> usize {
        self.diagonalize().len()
    }
}

struct Eliminator {
    cols: Vec<BTreeMap<usize, BigInt>>,
    row_index: Vec<BTreeSet<usize>>,
}

impl Eliminator {
    fn new(m: SparseMatrix) -> Self {
        let mut row_index = vec![BTreeSet::new(); m.rows];
        for (c, col) in m.cols.iter().enumerate() {
            for &r in col.keys() {
                row_index[r].insert(c);
            }
        }
        Self { cols: m.cols, row_index }
    }

    fn entry(&self, r: usize, c: usize) -> BigInt {
        self.cols[c].get(&r).cloned().unwrap_or_default()
    }

    fn set(&mut self, r: usize, c: usize, v: BigInt) {
        if v.is_zero() {
            self.cols[c].remove(&r);
            self.row_index[r].remove(&c);
        } else {
            self.cols[c].insert(r, v);
            self.row_index[r].insert(c);
        }
    }

    fn smallest(&self) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize, BigInt)> = None;
        for (c, col) in self.cols.iter().enumerate() {
            for (&r, v) in col {
                let a = v.abs();
                if a.is_one() {
                    return Some((r, c));
                }
                if best.as_ref().is_none_or(|(_, _, b)| a < *b) {
                    best = Some((r, c, a));
                }
            }
        }
        best.map(|(r, c, _)| (r, c))
    }

    /// `col[j] -= q * col[c]`.
    fn column_op(&mut self, j: usize, c: usize, q: &BigInt) {
        let pivot_col: Vec<(usize, BigInt)> = self.cols[c].iter().map(|(&r, v)| (r, v.clone())).collect();
        for (r, v) in pivot_col {
            let nv = self.entry(r, j) - q * v;
            self.set(r, j, nv);
        }
    }

    fn run(mut self) -> Vec<BigInt> {
        let mut diag = Vec::new();
        while let Some((mut r, mut c)) = self.smallest() {
            loop {
                let p = self.entry(r, c);
                // clear the pivot row with column operations
                let others: Vec<usize> = self.row_index[r].iter().copied().filter(|&j| j != c).collect();
                let mut next: Option<(usize, BigInt)> = None;
                for j in others {
                    let q = self.entry(r, j) / &p;
                    if !q.is_zero() {
                        self.column_op(j, c, &q);
                    }
                    let rem = self.entry(r, j);
                    if !rem.is_zero() && next.as_ref().is_none_or(|(_, b)| rem.abs() < *b) {
                        next = Some((j, rem.abs()));
                    }
                }
                if let Some((j, _)) = next {
                    c = j;
                    continue;
                }
                // the pivot row is now the single entry (r, c); row operations only
                // touch column c
                let others: Vec<usize> = self.cols[c].keys().copied().filter(|&i| i != r).collect();
                let mut next: Option<(usize, BigInt)> = None;
                for i in others {
                    let rem = self.entry(i, c).mod_floor(&p.abs());
                    let rem = if rem.is_zero() { rem } else { rem - p.abs() };
                    self.set(i, c, rem.clone());
                    if !rem.is_zero() && next.as_ref().is_none_or(|(_, b)| rem.abs() < *b) {
                        next = Some((i, rem.abs()));
                    }
                }
                if let Some((i, _)) = next {
                    r = i;
                    continue;
                }
                diag.push(p.abs());
                self.set(r, c, BigInt::zero());
                break;
            }
        }
        diag
    }
}

/// Rewrites a diagonal into invariant factors `d_1 | d_2 | ...`, dropping units.
pub fn invariant_factors(diag: &[BigInt]) -> Vec<BigInt> {
    let mut d: Vec<BigInt> = diag.iter().map(|x| x.abs()).filter(|x| !x.is_zero()).collect();
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            let g = d[i].gcd(&d[j]);
            let l = d[i].lcm(&d[j]);
            d[i] = g;
            d[j] = l;
        }
    }
    d.into_iter().filter(|x| !x.is_one()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn from_dense(rows: &[&[i64]]) -> SparseMatrix {
        let mut m = SparseMatrix::new(rows.len(), rows[0].len());
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                m.add(r, c, v);
            }
        }
        m
    }

    #[test]
    fn normalization() {
        assert_eq!(invariant_factors(&big(&[2, 3])), big(&[6]));
        assert_eq!(invariant_factors(&big(&[4, 6])), big(&[2, 12]));
        assert_eq!(invariant_factors(&big(&[2, 4, 6])), big(&[2, 2, 12]));
        assert_eq!(invariant_factors(&big(&[1, 1, 5])), big(&[5]));
    }

    #[test]
    fn small_matrices() {
        let m = from_dense(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
        let d = m.diagonalize();
        let mut prod = BigInt::one();
        for x in &d {
            prod *= x;
        }
        assert_eq!(d.len(), 3);
        // |det| = 144, invariant factors 2, 6, 12
        assert_eq!(prod, BigInt::from(144));
        assert_eq!(invariant_factors(&d), big(&[2, 6, 12]));
        let m = from_dense(&[&[1, 2], &[2, 4]]);
        assert_eq!(m.rank(), 1);
        assert!(SparseMatrix::new(3, 0).diagonalize().is_empty());
    }
}

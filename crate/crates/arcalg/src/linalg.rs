//! Exact linear algebra over the rationals.
//!
//! Two tools live here: a sparse fraction-free echelon builder over the
//! integers (rows are cleared of denominators, combined by cross
//! multiplication and divided by their content), and dense reduced row
//! echelon forms over `Q` for the small blocks where kernels are needed.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::scalar::Q;

/// A sparse row: strictly increasing column indices with nonzero entries.
pub type SparseRow = Vec<(usize, BigInt)>;

fn content_normalize(row: &mut SparseRow) {
    if row.is_empty() {
        return;
    }
    let mut g = BigInt::zero();
    for (_, v) in row.iter() {
        g = g.gcd(v);
        if g.is_one() {
            break;
        }
    }
    if row[0].1.is_negative() {
        g = -g;
    }
    if !g.is_one() {
        for (_, v) in row.iter_mut() {
            *v /= &g;
        }
    }
}

/// Converts a rational row to a primitive integer row.
pub fn integer_row(entries: impl IntoIterator<Item = (usize, Q)>) -> SparseRow {
    let mut m: BTreeMap<usize, Q> = BTreeMap::new();
    for (c, v) in entries {
        let e = m.entry(c).or_insert_with(Q::zero);
        *e += v;
    }
    m.retain(|_, v| !v.is_zero());
    let mut l = BigInt::one();
    for v in m.values() {
        l = l.lcm(v.denom());
    }
    let mut row: SparseRow = m
        .into_iter()
        .map(|(c, v)| (c, (v * Q::from_integer(l.clone())).to_integer()))
        .collect();
    content_normalize(&mut row);
    row
}

/// `a * x - b * y` on sparse rows.
fn combine(a: &BigInt, x: &SparseRow, b: &BigInt, y: &SparseRow) -> SparseRow {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let ci = x.get(i).map(|e| e.0).unwrap_or(usize::MAX);
        let cj = y.get(j).map(|e| e.0).unwrap_or(usize::MAX);
        if ci < cj {
            out.push((ci, a * &x[i].1));
            i += 1;
        } else if cj < ci {
            out.push((cj, -(b * &y[j].1)));
            j += 1;
        } else {
            let v = a * &x[i].1 - b * &y[j].1;
            if !v.is_zero() {
                out.push((ci, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Incremental row echelon form built by fraction-free elimination.
///
/// Rows are inserted one at a time; the first nonzero column of a row that
/// survives reduction becomes its pivot. Results depend only on the
/// insertion order.
#[derive(Debug, Clone, Default)]
pub struct Echelon {
    pivots: BTreeMap<usize, SparseRow>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Reduces a row until its leading column is not a pivot column.
    pub fn reduce(&self, mut row: SparseRow) -> SparseRow {
        loop {
            let Some(&(c, ref v)) = row.first() else {
                return row;
            };
            let Some(p) = self.pivots.get(&c) else {
                return row;
            };
            let pv = &p[0].1;
            let g = pv.gcd(v);
            let a = pv / &g;
            let b = v / &g;
            row = combine(&a, &row, &b, p);
            content_normalize(&mut row);
        }
    }

    /// Inserts a row; returns true iff it was independent of the previous ones.
    pub fn insert(&mut self, row: SparseRow) -> bool {
        let r = self.reduce(row);
        if r.is_empty() {
            return false;
        }
        self.pivots.insert(r[0].0, r);
        true
    }

    /// Whether a row lies in the span of the inserted rows.
    pub fn contains(&self, row: SparseRow) -> bool {
        self.reduce(row).is_empty()
    }

    /// The echelon rows, by pivot column.
    pub fn rows(&self) -> impl Iterator<Item = &SparseRow> {
        self.pivots.values()
    }

    pub fn pivot_columns(&self) -> Vec<usize> {
        self.pivots.keys().copied().collect()
    }
}

/// Rank of a list of sparse rational rows.
pub fn rank_sparse(rows: impl IntoIterator<Item = Vec<(usize, Q)>>) -> usize {
    let mut e = Echelon::new();
    for r in rows {
        e.insert(integer_row(r));
    }
    e.rank()
}

/// Dense matrix over `Q`, stored by rows.
pub type Dense = Vec<Vec<Q>>;

/// Sparse rational vector as (column, value) pairs.
pub type QVec = Vec<(usize, Q)>;

/// Brings `m` into reduced row echelon form in place (first nonzero pivot in
/// each column, rows in order) and returns the pivot columns. Zero rows are
/// removed.
#[allow(clippy::needless_range_loop)]
pub fn rref(m: &mut Dense, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Q::one() / m[r][c].clone();
        for v in m[r].iter_mut() {
            *v *= inv.clone();
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for k in 0..ncols {
                    if !m[r][k].is_zero() {
                        let t = m[r][k].clone() * f.clone();
                        m[i][k] -= t;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    pivots
}

/// Rank of a dense rational matrix.
pub fn rank_dense(m: &Dense, ncols: usize) -> usize {
    let mut w = m.clone();
    rref(&mut w, ncols).len()
}

/// A basis of `{x : m x = 0}`.
pub fn nullspace(m: &Dense, ncols: usize) -> Vec<Vec<Q>> {
    let mut w = m.clone();
    let pivots = rref(&mut w, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); ncols];
            v[f] = Q::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -w[i][f].clone();
            }
            v
        })
        .collect()
}

/// Scales a vector so that its entries are coprime integers with a positive
/// first nonzero entry.
pub fn primitive(v: &[Q]) -> Vec<BigInt> {
    let row = integer_row(v.iter().cloned().enumerate());
    let mut out = vec![BigInt::zero(); v.len()];
    for (c, x) in row {
        out[c] = x;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;
    use proptest::prelude::*;

    fn dense_from(a: &[Vec<i64>]) -> Dense {
        a.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect()
    }

    #[test]
    fn small_ranks() {
        let m = dense_from(&[vec![1, 2, 3], vec![2, 4, 6], vec![0, 1, 1]]);
        assert_eq!(rank_dense(&m, 3), 2);
        let ns = nullspace(&m, 3);
        assert_eq!(ns.len(), 1);
        assert_eq!(primitive(&ns[0]), vec![BigInt::from(1), BigInt::from(1), BigInt::from(-1)]);
    }

    #[test]
    fn echelon_membership() {
        let mut e = Echelon::new();
        assert!(e.insert(integer_row([(0, q(2)), (3, q(4))])));
        assert!(e.insert(integer_row([(0, q(1)), (1, q(1))])));
        assert!(!e.insert(integer_row([(1, q(-3)), (3, q(6))])));
        assert!(e.contains(integer_row([(0, q(3)), (1, q(1)), (3, q(4))])));
        assert_eq!(e.rank(), 2);
    }

    proptest! {
        #[test]
        fn sparse_and_dense_ranks_agree(entries in proptest::collection::vec(-3i64..=3, 30)) {
            let rows: Vec<Vec<i64>> = entries.chunks(6).map(|c| c.to_vec()).collect();
            let d = dense_from(&rows);
            let sparse = rows.iter().map(|r| r.iter().enumerate().map(|(c, &x)| (c, q(x))).collect::<Vec<_>>());
            prop_assert_eq!(rank_dense(&d, 6), rank_sparse(sparse));
        }

        #[test]
        fn nullspace_vectors_are_annihilated(entries in proptest::collection::vec(-2i64..=2, 20)) {
            let rows: Vec<Vec<i64>> = entries.chunks(5).map(|c| c.to_vec()).collect();
            let d = dense_from(&rows);
            let ns = nullspace(&d, 5);
            prop_assert_eq!(ns.len() + rank_dense(&d, 5), 5);
            for v in ns {
                for r in &d {
                    let s: Q = r.iter().zip(&v).map(|(a, b)| a * b).sum();
                    prop_assert!(s.is_zero());
                }
            }
        }
    }
}

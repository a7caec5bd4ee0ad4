//! Exact linear algebra over `Q` (sparse echelon forms) and a small dense
//! floating point solver for the Moser field.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar_poly::{q0, Rational};

pub type SparseVec = BTreeMap<usize, Rational>;

/// Row echelon basis of a growing set of sparse rows. Stored rows are
/// normalized so that their pivot entry is 1.
#[derive(Debug, Clone, Default)]
pub struct Echelon {
    rows: BTreeMap<usize, SparseVec>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = &usize> {
        self.rows.keys()
    }

    /// Reduces `row` against the stored pivots.
    pub fn reduce(&self, mut row: SparseVec) -> SparseVec {
        let mut cursor = 0usize;
        loop {
            let next = row.range(cursor..).map(|(k, _)| *k).find(|k| self.rows.contains_key(k));
            let Some(p) = next else { break };
            let c = row[&p].clone();
            for (j, v) in &self.rows[&p] {
                let e = row.entry(*j).or_insert_with(q0);
                *e -= &c * v;
                if e.is_zero() {
                    row.remove(j);
                }
            }
            cursor = p + 1;
        }
        row
    }

    /// Inserts `row`; returns false when it was already in the span.
    pub fn insert(&mut self, row: SparseVec) -> bool {
        let row = self.reduce(row);
        let Some((&p, lead)) = row.iter().next() else {
            return false;
        };
        let inv = lead.recip();
        let row: SparseVec = row.into_iter().map(|(k, v)| (k, v * &inv)).collect();
        self.rows.insert(p, row);
        true
    }

    pub fn contains(&self, row: SparseVec) -> bool {
        self.reduce(row).is_empty()
    }

    /// Reduced row echelon form, rows ordered by pivot.
    pub fn into_rref(mut self) -> Vec<SparseVec> {
        let pivots: Vec<usize> = self.rows.keys().rev().copied().collect();
        for p in pivots {
            let prow = self.rows[&p].clone();
            for (_, row) in self.rows.range_mut(..p) {
                if let Some(c) = row.get(&p).cloned() {
                    for (j, v) in &prow {
                        let e = row.entry(*j).or_insert_with(q0);
                        *e -= &c * v;
                        if e.is_zero() {
                            row.remove(j);
                        }
                    }
                }
            }
        }
        self.rows.into_values().collect()
    }
}

/// Particular solution of `A x = b` (free variables set to zero), or `None`
/// when the system is inconsistent.
pub fn solve<I>(rows: I, ncols: usize) -> Option<Vec<Rational>>
where
    I: IntoIterator<Item = (SparseVec, Rational)>,
{
    let mut ech = Echelon::new();
    for (mut row, rhs) in rows {
        if !rhs.is_zero() {
            row.insert(ncols, rhs);
        }
        ech.insert(row);
    }
    if ech.rows.contains_key(&ncols) {
        return None;
    }
    let mut x = vec![q0(); ncols];
    for row in ech.into_rref() {
        let (&p, _) = row.iter().next().expect("nonempty row");
        if let Some(v) = row.get(&ncols) {
            x[p] = v.clone();
        }
    }
    Some(x)
}

/// Basis of the nullspace of the rows, one sparse vector per free column.
pub fn nullspace<I>(rows: I, ncols: usize) -> Vec<SparseVec>
where
    I: IntoIterator<Item = SparseVec>,
{
    let mut ech = Echelon::new();
    for row in rows {
        ech.insert(row);
    }
    let rref = ech.into_rref();
    let pivot_rows: BTreeMap<usize, &SparseVec> =
        rref.iter().map(|r| (*r.keys().next().expect("nonempty"), r)).collect();
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivot_rows.contains_key(c)) {
        let mut v = SparseVec::new();
        v.insert(free, Rational::one());
        for (&p, row) in &pivot_rows {
            if let Some(c) = row.get(&free) {
                v.insert(p, -c.clone());
            }
        }
        basis.push(v);
    }
    basis
}

pub fn to_sparse(dense: &[Rational]) -> SparseVec {
    dense.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(i, v)| (i, v.clone())).collect()
}

pub fn to_dense(sparse: &SparseVec, n: usize) -> Vec<Rational> {
    let mut out = vec![q0(); n];
    for (i, v) in sparse {
        out[*i] = v.clone();
    }
    out
}

pub fn rank_dense(rows: &[Vec<Rational>]) -> usize {
    let mut ech = Echelon::new();
    for r in rows {
        ech.insert(to_sparse(r));
    }
    ech.rank()
}

/// Nonzero rows of the reduced row echelon form.
pub fn rref_dense(rows: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    let mut ech = Echelon::new();
    for r in rows {
        ech.insert(to_sparse(r));
    }
    ech.into_rref().iter().map(|r| to_dense(r, ncols)).collect()
}

pub fn nullspace_dense(rows: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    nullspace(rows.iter().map(|r| to_sparse(r)), ncols).iter().map(|v| to_dense(v, ncols)).collect()
}

pub fn det_dense(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return q0();
        };
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &p;
            for c in col..n {
                let delta = &f * &a[col][c];
                a[r][c] -= delta;
            }
        }
    }
    det
}

pub fn inverse_dense(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    if rank_dense(m) < n {
        return None;
    }
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let rows = m.iter().enumerate().map(|(i, r)| {
            let rhs = if i == j { Rational::one() } else { q0() };
            (to_sparse(r), rhs)
        });
        cols.push(solve(rows, n)?);
    }
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect())
}

pub fn mat_vec(m: &[Vec<Rational>], v: &[Rational]) -> Vec<Rational> {
    m.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).fold(q0(), |s, t| s + t)).collect()
}

/// Solves the dense `n x n` system in place with partial pivoting.
/// Returns an estimate of the ratio of the largest to smallest pivot.
pub fn solve_f64(a: &mut [f64], b: &mut [f64], n: usize) -> Result<f64> {
    let mut pmax: f64 = 0.0;
    let mut pmin = f64::INFINITY;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .expect("nonempty");
        let pv = a[piv * n + col];
        if pv == 0.0 || !pv.is_finite() {
            return Err(Error::Numerical("singular linear system".into()));
        }
        if piv != col {
            for c in 0..n {
                a.swap(piv * n + c, col * n + c);
            }
            b.swap(piv, col);
        }
        pmax = pmax.max(pv.abs());
        pmin = pmin.min(pv.abs());
        for r in col + 1..n {
            let f = a[r * n + col] / pv;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[r * n + c] -= f * a[col * n + c];
            }
            b[r] -= f * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for c in col + 1..n {
            s -= a[col * n + c] * b[c];
        }
        b[col] = s / a[col * n + col];
    }
    Ok(pmax / pmin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar_poly::q;

    #[test]
    fn nullspace_of_rank_one() {
        let rows = vec![vec![q(1), q(2), q(3)]];
        let ns = nullspace_dense(&rows, 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(mat_vec(&rows, v).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn inconsistent_system() {
        let rows = vec![(to_sparse(&[q(1), q(1)]), q(1)), (to_sparse(&[q(2), q(2)]), q(3))];
        assert!(solve(rows, 2).is_none());
    }

    #[test]
    fn determinant_and_inverse() {
        let m = vec![vec![q(2), q(1)], vec![q(1), q(1)]];
        assert_eq!(det_dense(&m), q(1));
        let inv = inverse_dense(&m).unwrap();
        assert_eq!(inv, vec![vec![q(1), q(-1)], vec![q(-1), q(2)]]);
        assert!(inverse_dense(&[vec![q(1), q(2)], vec![q(2), q(4)]]).is_none());
    }

    #[test]
    fn float_solver() {
        let mut a = [0.0, 2.0, 1.0, 1.0];
        let mut b = [4.0, 3.0];
        solve_f64(&mut a, &mut b, 2).unwrap();
        assert!((b[0] - 1.0).abs() < 1e-14 && (b[1] - 2.0).abs() < 1e-14);
    }
}

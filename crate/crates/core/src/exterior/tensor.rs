use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;

use super::form::{mask_indices, wedge_sign};
use crate::linalg::{mat_vec, nullspace_dense, rank_dense, rref_dense};
use crate::scalar_poly::{q0, Chart, Rational};

/// Alternating tensor with constant coefficients, keyed like `DiffForm`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantTensor {
    dim: usize,
    degree: usize,
    entries: BTreeMap<u64, Rational>,
}

impl ConstantTensor {
    pub fn new(dim: usize, degree: usize, entries: BTreeMap<u64, Rational>) -> Self {
        ConstantTensor { dim, degree, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn entries(&self) -> &BTreeMap<u64, Rational> {
        &self.entries
    }

    pub fn get(&self, mask: u64) -> Rational {
        self.entries.get(&mask).cloned().unwrap_or_else(q0)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// `v _| T`.
    pub fn contract(&self, v: &[Rational]) -> ConstantTensor {
        let mut out: BTreeMap<u64, Rational> = BTreeMap::new();
        for (m, c) in &self.entries {
            for i in mask_indices(*m) {
                if v[i].is_zero() {
                    continue;
                }
                let rest = m & !(1 << i);
                let term = &v[i] * c * Rational::from_integer(wedge_sign(1 << i, rest).into());
                *out.entry(rest).or_insert_with(q0) += term;
            }
        }
        out.retain(|_, v| !v.is_zero());
        ConstantTensor { dim: self.dim, degree: self.degree.saturating_sub(1), entries: out }
    }

    /// Full evaluation on `degree` vectors.
    pub fn eval(&self, vs: &[Vec<Rational>]) -> Rational {
        let mut t = self.clone();
        for v in vs {
            t = t.contract(v);
        }
        t.get(0)
    }

    /// Matrix of `v -> v _| T` with columns indexed by `v`.
    pub fn contraction_matrix(&self) -> Vec<Vec<Rational>> {
        let mut rows: BTreeMap<u64, Vec<Rational>> = BTreeMap::new();
        for j in 0..self.dim {
            let mut e = vec![q0(); self.dim];
            e[j] = Rational::from_integer(1.into());
            for (m, c) in self.contract(&e).entries {
                rows.entry(m).or_insert_with(|| vec![q0(); self.dim])[j] = c;
            }
        }
        rows.into_values().collect()
    }

    /// Antisymmetric matrix `T(e_i, e_j)` of a 2-tensor.
    pub fn matrix(&self) -> Vec<Vec<Rational>> {
        let mut a = vec![vec![q0(); self.dim]; self.dim];
        for (m, c) in &self.entries {
            let idx = mask_indices(*m);
            if idx.len() == 2 {
                a[idx[0]][idx[1]] = c.clone();
                a[idx[1]][idx[0]] = -c.clone();
            }
        }
        a
    }

    pub fn rank(&self) -> usize {
        rank_dense(&self.contraction_matrix())
    }

    pub fn kernel(&self) -> Subspace {
        if self.degree == 0 {
            return Subspace::full(self.dim);
        }
        let rows = self.contraction_matrix();
        Subspace::from_vectors(self.dim, &nullspace_dense(&rows, self.dim))
    }
}

/// Linear subspace of `Q^n` stored as its reduced row echelon basis, so that
/// equal subspaces have equal representations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<Vec<Rational>>,
}

impl Subspace {
    pub fn from_vectors(ambient: usize, vs: &[Vec<Rational>]) -> Self {
        Subspace { ambient, basis: rref_dense(vs, ambient) }
    }

    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, basis: Vec::new() }
    }

    pub fn full(ambient: usize) -> Self {
        let vs: Vec<Vec<Rational>> = (0..ambient)
            .map(|i| {
                let mut e = vec![q0(); ambient];
                e[i] = Rational::from_integer(1.into());
                e
            })
            .collect();
        Subspace { ambient, basis: vs }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Rational>] {
        &self.basis
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        rank_dense(&rows) == self.basis.len()
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.basis.iter().all(|v| self.contains(v))
    }

    /// Linear forms vanishing on the subspace.
    pub fn annihilator(&self) -> Vec<Vec<Rational>> {
        nullspace_dense(&self.basis, self.ambient)
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        let mut eqs = self.annihilator();
        eqs.extend(other.annihilator());
        Subspace::from_vectors(self.ambient, &nullspace_dense(&eqs, self.ambient))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut vs = self.basis.clone();
        vs.extend(other.basis.iter().cloned());
        Subspace::from_vectors(self.ambient, &vs)
    }

    /// `{v : A v in self}` for a square matrix `A`.
    pub fn preimage(&self, a: &[Vec<Rational>]) -> Subspace {
        let n = a.first().map_or(self.ambient, Vec::len);
        let eqs: Vec<Vec<Rational>> = self
            .annihilator()
            .iter()
            .map(|l| (0..n).map(|j| a.iter().zip(l).map(|(row, lk)| &row[j] * lk).fold(q0(), |s, t| s + t)).collect())
            .collect();
        Subspace::from_vectors(n, &nullspace_dense(&eqs, n))
    }

    pub fn image(&self, a: &[Vec<Rational>]) -> Subspace {
        let vs: Vec<Vec<Rational>> = self.basis.iter().map(|v| mat_vec(a, v)).collect();
        Subspace::from_vectors(a.len(), &vs)
    }

    /// Basis vectors written against chart names, e.g. `[d/dx + 2*d/dy]`.
    pub fn format_with(&self, chart: &Chart) -> String {
        let mut parts = Vec::new();
        for v in &self.basis {
            let mut s = String::new();
            for (i, c) in v.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let neg = crate::scalar_poly::signum(c) < 0;
                let abs = if neg { -c.clone() } else { c.clone() };
                if s.is_empty() {
                    if neg {
                        s.push('-');
                    }
                } else {
                    s.push_str(if neg { " - " } else { " + " });
                }
                if abs != Rational::from_integer(1.into()) {
                    s.push_str(&alloc::format!("{abs}*"));
                }
                s.push_str(&alloc::format!("d/d{}", chart.var(i)));
            }
            parts.push(s);
        }
        alloc::format!("[{}]", parts.join(", "))
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "span{{")?;
        for (k, v) in self.basis.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            let s: Vec<String> = v.iter().map(|c| alloc::format!("{c}")).collect();
            write!(f, "({})", s.join(", "))?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar_poly::q;

    #[test]
    fn rank_and_kernel_of_2_tensor() {
        // dx^dy on R^3 has rank 2 and kernel d/dz
        let mut e = BTreeMap::new();
        e.insert(0b011, q(1));
        let t = ConstantTensor::new(3, 2, e);
        assert_eq!(t.rank(), 2);
        let k = t.kernel();
        assert_eq!(k, Subspace::from_vectors(3, &[vec![q(0), q(0), q(5)]]));
        assert_eq!(t.eval(&[vec![q(1), q(0), q(0)], vec![q(0), q(1), q(0)]]), q(1));
        assert_eq!(t.eval(&[vec![q(0), q(1), q(0)], vec![q(1), q(0), q(0)]]), q(-1));
    }

    #[test]
    fn intersection_and_preimage() {
        let a = Subspace::from_vectors(3, &[vec![q(1), q(0), q(0)], vec![q(0), q(1), q(0)]]);
        let b = Subspace::from_vectors(3, &[vec![q(0), q(1), q(0)], vec![q(0), q(0), q(1)]]);
        assert_eq!(a.intersect(&b), Subspace::from_vectors(3, &[vec![q(0), q(1), q(0)]]));
        let swap = vec![vec![q(0), q(0), q(1)], vec![q(0), q(1), q(0)], vec![q(1), q(0), q(0)]];
        assert_eq!(a.preimage(&swap), b);
        assert_eq!(a.image(&swap), b);
    }
}

//! Linear subspaces of `Q^n` with exact membership and canonical comparison.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{self, QMatrix};
use crate::rational::{self, Q};

/// A subspace given by linearly independent spanning vectors.
#[derive(Clone, Debug)]
pub struct Subspace {
    ambient: usize,
    basis: QMatrix,
}

impl Subspace {
    /// Builds a subspace from independent vectors; dependent input is rejected.
    pub fn new(ambient: usize, basis: QMatrix) -> Result<Self> {
        for v in &basis {
            if v.len() != ambient {
                return Err(Error::DimensionMismatch { expected: ambient, got: v.len() });
            }
        }
        if linalg::rank(&basis, ambient) != basis.len() {
            return Err(Error::DependentBasis);
        }
        Ok(Self { ambient, basis })
    }

    /// Span of arbitrary vectors; keeps a maximal independent subset in input order.
    pub fn span(ambient: usize, vectors: &[Vec<Q>]) -> Self {
        let mut basis: QMatrix = Vec::new();
        for v in vectors {
            assert_eq!(v.len(), ambient, "vector length mismatch");
            if rational::is_zero_vec(v) {
                continue;
            }
            basis.push(v.clone());
            if linalg::rank(&basis, ambient) < basis.len() {
                basis.pop();
            }
        }
        Self { ambient, basis }
    }

    pub fn zero(ambient: usize) -> Self {
        Self { ambient, basis: Vec::new() }
    }

    pub fn full(ambient: usize) -> Self {
        Self { ambient, basis: linalg::identity(ambient) }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Q>] {
        &self.basis
    }

    pub fn basis_f64(&self) -> Vec<Vec<f64>> {
        self.basis.iter().map(|v| rational::vec_to_f64(v)).collect()
    }

    /// Rows of the reduced echelon form of the basis; equal for equal subspaces.
    pub fn canonical(&self) -> QMatrix {
        linalg::rref(&self.basis, self.ambient).rows
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        self.coords(v).is_some()
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.basis.iter().all(|v| self.contains(v))
    }

    /// Coefficients of `v` in this basis, if `v` lies in the subspace.
    pub fn coords(&self, v: &[Q]) -> Option<Vec<Q>> {
        if v.len() != self.ambient {
            return None;
        }
        if self.basis.is_empty() {
            return rational::is_zero_vec(v).then(Vec::new);
        }
        let a = linalg::transpose(&self.basis, self.ambient);
        linalg::solve(&a, v, self.basis.len())
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut all = self.basis.clone();
        all.extend(other.basis.iter().cloned());
        Subspace::span(self.ambient, &all)
    }

    pub fn intersection(&self, other: &Subspace) -> Subspace {
        if self.basis.is_empty() || other.basis.is_empty() {
            return Subspace::zero(self.ambient);
        }
        // a in ker [U | -W]  gives  U a_u = W a_w
        let (du, dw) = (self.dim(), other.dim());
        let rows: QMatrix = (0..self.ambient)
            .map(|i| {
                self.basis
                    .iter()
                    .map(|u| u[i].clone())
                    .chain(other.basis.iter().map(|w| -w[i].clone()))
                    .collect()
            })
            .collect();
        let kernel = linalg::nullspace(&rows, du + dw);
        let vectors: QMatrix = kernel
            .iter()
            .map(|a| self.combine(&a[..du]))
            .collect();
        Subspace::span(self.ambient, &vectors)
    }

    /// Linear combination of the basis vectors with the given coefficients.
    pub fn combine(&self, coeffs: &[Q]) -> Vec<Q> {
        let mut out = rational::zeros(self.ambient);
        for (c, v) in coeffs.iter().zip(&self.basis) {
            if c.is_zero() {
                continue;
            }
            for (o, x) in out.iter_mut().zip(v) {
                *o += c * x;
            }
        }
        out
    }

    /// Coordinate vectors completing this basis, chosen greedily in index order.
    pub fn coordinate_complement(&self) -> Subspace {
        let mut all = self.basis.clone();
        let mut extra = Vec::new();
        for i in 0..self.ambient {
            let e = rational::unit(self.ambient, i);
            all.push(e.clone());
            if linalg::rank(&all, self.ambient) == all.len() {
                extra.push(e);
            } else {
                all.pop();
            }
        }
        Subspace { ambient: self.ambient, basis: extra }
    }

    /// Covectors vanishing on the subspace.
    pub fn annihilator(&self) -> Subspace {
        if self.basis.is_empty() {
            return Subspace::full(self.ambient);
        }
        let kernel = linalg::nullspace(&self.basis, self.ambient);
        Subspace { ambient: self.ambient, basis: kernel }
    }
}

impl PartialEq for Subspace {
    fn eq(&self, other: &Self) -> bool {
        self.ambient == other.ambient && self.canonical() == other.canonical()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn v(xs: &[i64]) -> Vec<Q> {
        xs.iter().map(|&x| q(x)).collect()
    }

    #[test]
    fn equality_is_basis_independent() {
        let a = Subspace::new(3, vec![v(&[1, 1, 0]), v(&[0, 1, 0])]).unwrap();
        let b = Subspace::new(3, vec![v(&[1, 0, 0]), v(&[2, 3, 0])]).unwrap();
        assert_eq!(a, b);
        assert!(Subspace::new(3, vec![v(&[1, 0, 0]), v(&[2, 0, 0])]).is_err());
    }

    #[test]
    fn intersection_and_sum() {
        let a = Subspace::new(3, vec![v(&[1, 0, 0]), v(&[0, 1, 0])]).unwrap();
        let b = Subspace::new(3, vec![v(&[0, 1, 0]), v(&[0, 0, 1])]).unwrap();
        let i = a.intersection(&b);
        assert_eq!(i, Subspace::new(3, vec![v(&[0, 1, 0])]).unwrap());
        assert_eq!(a.sum(&b), Subspace::full(3));
    }

    #[test]
    fn complement_and_annihilator() {
        let a = Subspace::new(3, vec![v(&[1, 1, 0])]).unwrap();
        let c = a.coordinate_complement();
        assert_eq!(c.dim(), 2);
        assert_eq!(a.sum(&c), Subspace::full(3));
        let ann = a.annihilator();
        assert_eq!(ann.dim(), 2);
        for w in ann.basis() {
            assert!(rational::dot(w, &a.basis()[0]).is_zero());
        }
        assert_eq!(a.coords(&v(&[2, 2, 0])), Some(v(&[2])));
        assert_eq!(a.coords(&v(&[1, 0, 0])), None);
    }
}

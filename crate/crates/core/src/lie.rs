//! Finite-dimensional Lie algebras given by structure constants.

use std::fmt;

use nalgebra::DMatrix;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{self, QMatrix};
use crate::rational::{self, Q};
use crate::subspace::Subspace;

/// A single failed structural check. Indices are zero-based internally and printed one-based.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Antisymmetry { i: usize, j: usize, k: usize },
    Jacobi { i: usize, j: usize, l: usize, k: usize },
    Structure(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Antisymmetry { i, j, k } => {
                write!(f, "antisymmetry fails at ({}, {}, {})", i + 1, j + 1, k + 1)
            }
            Violation::Jacobi { i, j, l, k } => write!(
                f,
                "Jacobi identity fails for ({}, {}, {}) in component {}",
                i + 1,
                j + 1,
                l + 1,
                k + 1
            ),
            Violation::Structure(msg) => f.write_str(msg),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, v: Violation) {
        self.violations.push(v);
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for (idx, v) in self.violations.iter().enumerate() {
            if idx > 0 {
                writeln!(f)?;
            }
            write!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// Structure constants `c[i][j][k]`: the coefficient of `e_k` in `[e_i, e_j]`.
#[derive(Clone, Debug)]
pub struct LieAlgebra {
    dim: usize,
    labels: Vec<String>,
    /// Sparse rows indexed by `i * dim + j`.
    exact: Vec<Vec<(usize, Q)>>,
    /// Flat list of nonzero entries `(i, j, k, c)` for numeric work.
    entries: Vec<(usize, usize, usize, f64)>,
}

impl LieAlgebra {
    /// Builds the algebra from raw entries `(i, j, k, c)`; nothing is symmetrized.
    /// Repeated entries are summed.
    pub fn from_constants(
        dim: usize,
        labels: Vec<String>,
        constants: impl IntoIterator<Item = (usize, usize, usize, Q)>,
    ) -> Result<Self> {
        if labels.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: labels.len() });
        }
        let mut exact: Vec<Vec<(usize, Q)>> = vec![Vec::new(); dim * dim];
        for (i, j, k, c) in constants {
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::InvalidArgument(format!(
                    "structure constant index ({}, {}, {}) out of range 1..={dim}",
                    i + 1,
                    j + 1,
                    k + 1
                )));
            }
            let row = &mut exact[i * dim + j];
            match row.iter_mut().find(|(kk, _)| *kk == k) {
                Some((_, v)) => *v += c,
                None => row.push((k, c)),
            }
        }
        for row in &mut exact {
            row.retain(|(_, c)| !c.is_zero());
            row.sort_by_key(|(k, _)| *k);
        }
        Ok(Self::from_rows(dim, labels, exact))
    }

    /// Builds the algebra from brackets `[e_i, e_j] = v` for `i < j` (or any order),
    /// filling in the antisymmetric partner.
    pub fn from_brackets(dim: usize, labels: Vec<String>, brackets: &[(usize, usize, Vec<Q>)]) -> Result<Self> {
        let mut constants = Vec::new();
        for (i, j, v) in brackets {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
            }
            for (k, c) in v.iter().enumerate() {
                if !c.is_zero() {
                    constants.push((*i, *j, k, c.clone()));
                    constants.push((*j, *i, k, -c.clone()));
                }
            }
        }
        Self::from_constants(dim, labels, constants)
    }

    fn from_rows(dim: usize, labels: Vec<String>, exact: Vec<Vec<(usize, Q)>>) -> Self {
        let entries = exact
            .iter()
            .enumerate()
            .flat_map(|(ij, row)| {
                row.iter()
                    .map(move |(k, c)| (ij / dim, ij % dim, *k, rational::to_f64(c)))
            })
            .collect();
        Self { dim, labels, exact, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Nonzero `(k, c[i][j][k])` pairs.
    pub fn row(&self, i: usize, j: usize) -> &[(usize, Q)] {
        &self.exact[i * self.dim + j]
    }

    pub fn constant(&self, i: usize, j: usize, k: usize) -> Q {
        self.row(i, j)
            .iter()
            .find(|(kk, _)| *kk == k)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Q::zero)
    }

    /// All nonzero constants as `(i, j, k, c)`.
    pub fn nonzero_constants(&self) -> impl Iterator<Item = (usize, usize, usize, &Q)> + '_ {
        self.exact.iter().enumerate().flat_map(move |(ij, row)| {
            row.iter().map(move |(k, c)| (ij / self.dim, ij % self.dim, *k, c))
        })
    }

    pub fn float_entries(&self) -> &[(usize, usize, usize, f64)] {
        &self.entries
    }

    pub fn is_abelian(&self) -> bool {
        self.entries.is_empty()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim, got: len })
        }
    }

    pub fn bracket(&self, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        self.check_len(a.len())?;
        self.check_len(b.len())?;
        Ok(self.bracket_unchecked(a, b))
    }

    pub(crate) fn bracket_unchecked(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(i, j, k, c) in &self.entries {
            out[k] += a[i] * b[j] * c;
        }
        out
    }

    pub fn bracket_q(&self, a: &[Q], b: &[Q]) -> Result<Vec<Q>> {
        self.check_len(a.len())?;
        self.check_len(b.len())?;
        Ok(self.bracket_q_unchecked(a, b))
    }

    pub(crate) fn bracket_q_unchecked(&self, a: &[Q], b: &[Q]) -> Vec<Q> {
        let mut out = rational::zeros(self.dim);
        for (i, ai) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, bj) in b.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
                let row = self.row(i, j);
                if row.is_empty() {
                    continue;
                }
                let w = ai * bj;
                for (k, c) in row {
                    out[*k] += &w * c;
                }
            }
        }
        out
    }

    /// Matrix of `ad x`; column `j` is `[x, e_j]`.
    pub fn ad_matrix(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_len(x.len())?;
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(i, j, k, c) in &self.entries {
            m[(k, j)] += x[i] * c;
        }
        Ok(m)
    }

    pub fn ad_matrix_q(&self, x: &[Q]) -> Result<QMatrix> {
        self.check_len(x.len())?;
        let n = self.dim;
        let mut m = vec![rational::zeros(n); n];
        for (i, xi) in x.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
            for j in 0..n {
                for (k, c) in self.row(i, j) {
                    m[*k][j] += xi * c;
                }
            }
        }
        Ok(m)
    }

    /// The covector `e_j -> p([x, e_j])`.
    pub fn coad_apply(&self, x: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        self.check_len(p.len())?;
        Ok(self.coad_apply_unchecked(x, p))
    }

    pub(crate) fn coad_apply_unchecked(&self, x: &[f64], p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(i, j, k, c) in &self.entries {
            out[j] += x[i] * p[k] * c;
        }
        out
    }

    /// `K[i][j] = tr(ad e_i ad e_j) = sum_{a,b} c[i][b][a] c[j][a][b]`.
    pub fn killing_form(&self) -> QMatrix {
        let n = self.dim;
        let mut k = vec![rational::zeros(n); n];
        for i in 0..n {
            for j in i..n {
                let mut acc = Q::zero();
                for b in 0..n {
                    for (a, cib) in self.row(i, b) {
                        for (bb, cja) in self.row(j, *a) {
                            if *bb == b {
                                acc += cib * cja;
                            }
                        }
                    }
                }
                k[j][i] = acc.clone();
                k[i][j] = acc;
            }
        }
        k
    }

    pub fn killing_kernel(&self) -> Subspace {
        let k = self.killing_form();
        let basis = linalg::nullspace(&k, self.dim);
        Subspace::new(self.dim, basis).expect("nullspace basis is independent")
    }

    /// Exact antisymmetry and Jacobi check.
    pub fn validate(&self) -> ValidationReport {
        let n = self.dim;
        let mut report = ValidationReport::default();
        for i in 0..n {
            for j in i..n {
                for k in 0..n {
                    if self.constant(i, j, k) != -self.constant(j, i, k) {
                        report.push(Violation::Antisymmetry { i, j, k });
                    }
                }
            }
        }
        let antisymmetric = report.is_valid();
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    // with antisymmetry the Jacobiator is alternating, so sorted triples suffice
                    if antisymmetric && !(i < j && j < l) {
                        continue;
                    }
                    let jac = self.jacobiator(i, j, l);
                    for (k, v) in jac.iter().enumerate() {
                        if !v.is_zero() {
                            report.push(Violation::Jacobi { i, j, l, k });
                        }
                    }
                }
            }
        }
        report
    }

    fn basis_bracket_then(&self, i: usize, j: usize, l: usize, out: &mut [Q]) {
        // [[e_i, e_j], e_l]
        for (m, cijm) in self.row(i, j) {
            for (k, cmlk) in self.row(*m, l) {
                out[*k] += cijm * cmlk;
            }
        }
    }

    fn jacobiator(&self, i: usize, j: usize, l: usize) -> Vec<Q> {
        let mut out = rational::zeros(self.dim);
        self.basis_bracket_then(i, j, l, &mut out);
        self.basis_bracket_then(j, l, i, &mut out);
        self.basis_bracket_then(l, i, j, &mut out);
        out
    }

    /// Span of all brackets `[a, b]` with `a` in `left` and `b` in `right`.
    pub fn bracket_span(&self, left: &Subspace, right: &Subspace) -> Subspace {
        let mut vectors = Vec::new();
        for a in left.basis() {
            for b in right.basis() {
                vectors.push(self.bracket_q_unchecked(a, b));
            }
        }
        Subspace::span(self.dim, &vectors)
    }

    pub fn derived_algebra(&self) -> Subspace {
        let full = Subspace::full(self.dim);
        self.bracket_span(&full, &full)
    }

    pub fn is_ideal(&self, i: &Subspace) -> bool {
        i.contains_subspace(&self.bracket_span(&Subspace::full(self.dim), i))
    }

    pub fn is_subalgebra(&self, s: &Subspace) -> bool {
        s.contains_subspace(&self.bracket_span(s, s))
    }

    /// Smallest subspace containing `start` and closed under brackets with `generators`.
    pub fn bracket_closure(&self, generators: &Subspace, start: &Subspace) -> Subspace {
        let mut current = start.clone();
        loop {
            let next = current.sum(&self.bracket_span(generators, &current));
            if next.dim() == current.dim() {
                return current;
            }
            current = next;
        }
    }

    /// Subalgebra generated by a subspace.
    pub fn generated_subalgebra(&self, s: &Subspace) -> Subspace {
        let mut current = s.clone();
        loop {
            let next = current.sum(&self.bracket_span(&current, &current));
            if next.dim() == current.dim() {
                return current;
            }
            current = next;
        }
    }
}

/// Recovers structure constants from a faithful matrix representation by
/// decomposing every commutator in the span of the given matrices.
pub fn algebra_from_matrices(labels: Vec<String>, matrices: &[QMatrix]) -> Result<LieAlgebra> {
    let n = matrices.len();
    let flat: Vec<Vec<Q>> = matrices.iter().map(|m| m.iter().flatten().cloned().collect()).collect();
    let len = flat.first().map_or(0, Vec::len);
    if flat.iter().any(|f| f.len() != len) {
        return Err(Error::InvalidArgument("matrices of different sizes".into()));
    }
    if linalg::rank(&flat, len) != n {
        return Err(Error::DependentBasis);
    }
    let size = matrices.first().map_or(0, Vec::len);
    let columns = linalg::transpose(&flat, len);
    let mut brackets = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let ab = linalg::mat_mul(&matrices[i], &matrices[j], size);
            let ba = linalg::mat_mul(&matrices[j], &matrices[i], size);
            let comm: Vec<Q> = ab
                .iter()
                .flatten()
                .zip(ba.iter().flatten())
                .map(|(x, y)| x - y)
                .collect();
            let coeffs = linalg::solve(&columns, &comm, n).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "commutator of {} and {} leaves the span of the matrices",
                    labels[i], labels[j]
                ))
            })?;
            brackets.push((i, j, coeffs));
        }
    }
    LieAlgebra::from_brackets(n, labels, &brackets)
}

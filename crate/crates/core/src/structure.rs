//! Left-invariant sub-Riemannian structures `(g, k, m, Δ, B)` on homogeneous spaces.

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lie::{LieAlgebra, ValidationReport, Violation};
use crate::linalg::{self, QMatrix};
use crate::rational::{self, Q};
use crate::subspace::Subspace;

/// Tolerance factor for membership of a float covector in the annihilator of `k`.
pub const ANNIHILATOR_TOL: f64 = 1e-12;

/// Raw ingredients of a structure, before validation.
#[derive(Clone, Debug)]
pub struct StructureParts {
    pub algebra: LieAlgebra,
    pub k_basis: QMatrix,
    pub m_basis: QMatrix,
    pub delta_basis: QMatrix,
    /// Gram matrix of the metric on `delta_basis`.
    pub metric: QMatrix,
    /// Layers `g_1, ..., g_s` of a stratification of `m`.
    pub grading: Option<Vec<QMatrix>>,
    /// One square matrix per basis vector of `g`.
    pub representation: Option<Vec<QMatrix>>,
    /// Declared complement of `Δ` in `m` for the skew-symmetry test, with identity metric.
    pub complement: Option<QMatrix>,
    pub isotropy_connected: bool,
}

impl StructureParts {
    pub fn new(algebra: LieAlgebra, k_basis: QMatrix, m_basis: QMatrix, delta_basis: QMatrix, metric: QMatrix) -> Self {
        Self {
            algebra,
            k_basis,
            m_basis,
            delta_basis,
            metric,
            grading: None,
            representation: None,
            complement: None,
            isotropy_connected: true,
        }
    }
}

/// A validated structure with precomputed exact and floating-point data.
#[derive(Clone, Debug)]
pub struct HomogeneousSRStructure {
    parts: StructureParts,
    k: Subspace,
    m: Subspace,
    delta: Subspace,
    grading: Option<Vec<Subspace>>,
    complement: Option<Subspace>,
    metric_inv: QMatrix,
    /// Basis `(m_1..m_r, k_1..k_s)` of `g` as vectors.
    adapted_basis: QMatrix,
    /// Rows of the inverse change of basis: row `i` is the dual covector of adapted vector `i`.
    dual_rows: QMatrix,
    adapted: LieAlgebra,
    /// `p(δ_i) = sum_j delta_in_m[i][j] q_j` for `p` in the annihilator of `k`.
    delta_in_m: QMatrix,
    /// `H(p) = 1/2 p^T ham p` and `dH = ham p`.
    ham: DMatrix<f64>,
    k_f64: Vec<Vec<f64>>,
    dual_f64: DMatrix<f64>,
    m_f64: DMatrix<f64>,
}

fn check_vectors(report: &mut ValidationReport, what: &str, vectors: &[Vec<Q>], n: usize) -> bool {
    if let Some(v) = vectors.iter().find(|v| v.len() != n) {
        report.push(Violation::Structure(format!(
            "{what} vector has length {}, expected {n}",
            v.len()
        )));
        return false;
    }
    if linalg::rank(vectors, n) != vectors.len() {
        report.push(Violation::Structure(format!("{what} basis is linearly dependent")));
        return false;
    }
    true
}

/// Runs every structural check and lists all failures.
pub fn validate_parts(parts: &StructureParts) -> ValidationReport {
    let g = &parts.algebra;
    let n = g.dim();
    let mut report = g.validate();
    let algebra_ok = report.is_valid();
    let ok_k = check_vectors(&mut report, "isotropy", &parts.k_basis, n);
    let ok_m = check_vectors(&mut report, "complement m", &parts.m_basis, n);
    let ok_d = check_vectors(&mut report, "distribution", &parts.delta_basis, n);
    if !(ok_k && ok_m && ok_d) {
        return report;
    }
    let k = Subspace::new(n, parts.k_basis.clone()).expect("checked");
    let m = Subspace::new(n, parts.m_basis.clone()).expect("checked");
    let delta = Subspace::new(n, parts.delta_basis.clone()).expect("checked");
    if k.dim() + m.dim() != n || k.sum(&m).dim() != n {
        report.push(Violation::Structure("g is not the direct sum of k and m".into()));
    }
    if !m.contains_subspace(&delta) {
        report.push(Violation::Structure("distribution is not contained in m".into()));
    }
    if algebra_ok {
        if !g.is_subalgebra(&k) {
            report.push(Violation::Structure("k is not a subalgebra".into()));
        }
        if !m.contains_subspace(&g.bracket_span(&k, &m)) {
            report.push(Violation::Structure("decomposition is not reductive: [k, m] is not in m".into()));
        }
        if !delta.contains_subspace(&g.bracket_span(&k, &delta)) {
            report.push(Violation::Structure("distribution is not invariant under k".into()));
        }
        if g.generated_subalgebra(&delta).sum(&k).dim() != n {
            report.push(Violation::Structure("distribution is not bracket generating".into()));
        }
    }
    let d = delta.dim();
    if parts.metric.len() != d || parts.metric.iter().any(|r| r.len() != d) {
        report.push(Violation::Structure(format!("metric must be {d}x{d}")));
    } else if !linalg::is_positive_definite(&parts.metric) {
        report.push(Violation::Structure("metric is not symmetric positive definite".into()));
    } else if algebra_ok {
        check_metric_invariance(g, &k, &delta, &parts.metric, &mut report);
    }
    if let Some(layers) = &parts.grading {
        check_grading(g, layers, &m, &delta, &mut report);
    }
    if let Some(c) = &parts.complement {
        if check_vectors(&mut report, "declared complement", c, n) {
            let c = Subspace::new(n, c.clone()).expect("checked");
            if c.dim() + d != m.dim() || !m.contains_subspace(&c) || c.sum(&delta).dim() != m.dim() {
                report.push(Violation::Structure("declared complement does not complete Δ in m".into()));
            }
        }
    }
    if let Some(rep) = &parts.representation {
        check_representation(g, rep, &mut report);
    }
    report
}

fn check_metric_invariance(g: &LieAlgebra, k: &Subspace, delta: &Subspace, metric: &QMatrix, report: &mut ValidationReport) {
    // B([z, x], y) + B(x, [z, y]) = 0 for z in k and x, y in Δ
    let d = delta.dim();
    for z in k.basis() {
        let ad: Vec<Vec<Q>> = delta
            .basis()
            .iter()
            .map(|x| delta.coords(&g.bracket_q_unchecked(z, x)).expect("Δ is k-invariant"))
            .collect();
        let bad = (0..d).any(|i| {
            (0..d).any(|j| {
                let lhs: Q = (0..d).map(|a| &ad[i][a] * &metric[a][j]).sum();
                let rhs: Q = (0..d).map(|a| &metric[i][a] * &ad[j][a]).sum();
                !(lhs + rhs).is_zero()
            })
        });
        if bad {
            report.push(Violation::Structure("metric is not invariant under k".into()));
            return;
        }
    }
}

fn check_grading(g: &LieAlgebra, layers: &[QMatrix], m: &Subspace, delta: &Subspace, report: &mut ValidationReport) {
    let n = g.dim();
    let mut subspaces = Vec::new();
    for (idx, layer) in layers.iter().enumerate() {
        if !check_vectors(report, &format!("grading layer {}", idx + 1), layer, n) {
            return;
        }
        subspaces.push(Subspace::new(n, layer.clone()).expect("checked"));
    }
    let total: usize = subspaces.iter().map(Subspace::dim).sum();
    let sum = subspaces.iter().fold(Subspace::zero(n), |acc, s| acc.sum(s));
    if total != m.dim() || sum != *m {
        report.push(Violation::Structure("grading layers do not decompose m".into()));
        return;
    }
    let Some(first) = subspaces.first() else {
        report.push(Violation::Structure("grading has no layers".into()));
        return;
    };
    if first != delta {
        report.push(Violation::Structure("first grading layer differs from Δ".into()));
    }
    for i in 0..subspaces.len() {
        let next = g.bracket_span(first, &subspaces[i]);
        let expected = subspaces.get(i + 1).cloned().unwrap_or_else(|| Subspace::zero(n));
        if next != expected {
            report.push(Violation::Structure(format!(
                "[g_1, g_{}] does not equal g_{}",
                i + 1,
                i + 2
            )));
        }
    }
}

fn check_representation(g: &LieAlgebra, rep: &[QMatrix], report: &mut ValidationReport) {
    let n = g.dim();
    if rep.len() != n {
        report.push(Violation::Structure(format!(
            "representation has {} matrices, expected {n}",
            rep.len()
        )));
        return;
    }
    let size = rep[0].len();
    if rep.iter().any(|m| m.len() != size || m.iter().any(|r| r.len() != size)) {
        report.push(Violation::Structure("representation matrices must be square and equal-sized".into()));
        return;
    }
    for i in 0..n {
        for j in i + 1..n {
            let ab = linalg::mat_mul(&rep[i], &rep[j], size);
            let ba = linalg::mat_mul(&rep[j], &rep[i], size);
            let mut expected = vec![rational::zeros(size); size];
            for (k, c) in g.row(i, j) {
                for (er, rr) in expected.iter_mut().zip(&rep[*k]) {
                    for (e, r) in er.iter_mut().zip(rr) {
                        *e += c * r;
                    }
                }
            }
            let ok = (0..size).all(|a| (0..size).all(|b| &ab[a][b] - &ba[a][b] == expected[a][b]));
            if !ok {
                report.push(Violation::Structure(format!(
                    "representation is not a homomorphism on ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
}

/// A covector on `g` annihilating the isotropy algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct Momentum(Vec<f64>);

impl Momentum {
    /// Wraps coordinates without checking; for states produced by the flow.
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl HomogeneousSRStructure {
    pub fn new(parts: StructureParts) -> Result<Self> {
        let report = validate_parts(&parts);
        if !report.is_valid() {
            return Err(Error::InvalidStructure(report));
        }
        let g = &parts.algebra;
        let n = g.dim();
        let k = Subspace::new(n, parts.k_basis.clone())?;
        let m = Subspace::new(n, parts.m_basis.clone())?;
        let delta = Subspace::new(n, parts.delta_basis.clone())?;
        let grading = parts
            .grading
            .as_ref()
            .map(|layers| layers.iter().map(|l| Subspace::new(n, l.clone())).collect::<Result<Vec<_>>>())
            .transpose()?;
        let complement = parts.complement.as_ref().map(|c| Subspace::new(n, c.clone())).transpose()?;
        let metric_inv = linalg::inverse(&parts.metric).ok_or(Error::DependentBasis)?;

        let mut adapted_basis = parts.m_basis.clone();
        adapted_basis.extend(parts.k_basis.iter().cloned());
        let columns = linalg::transpose(&adapted_basis, n);
        let dual_rows = linalg::inverse(&columns).ok_or(Error::DependentBasis)?;
        let to_adapted = |v: &[Q]| linalg::mat_vec(&dual_rows, v);
        let mut brackets = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let b = g.bracket_q_unchecked(&adapted_basis[i], &adapted_basis[j]);
                if !rational::is_zero_vec(&b) {
                    brackets.push((i, j, to_adapted(&b)));
                }
            }
        }
        let mut adapted_labels: Vec<String> = (1..=m.dim()).map(|i| format!("m{i}")).collect();
        adapted_labels.extend((1..=k.dim()).map(|i| format!("k{i}")));
        let adapted = LieAlgebra::from_brackets(n, adapted_labels, &brackets)?;

        let r = m.dim();
        let delta_in_m: QMatrix = parts
            .delta_basis
            .iter()
            .map(|d| to_adapted(d)[..r].to_vec())
            .collect();

        let dmat = linalg::columns_to_dmatrix(&parts.delta_basis, n);
        let binv = linalg::to_dmatrix(&metric_inv, delta.dim());
        let ham = &dmat * binv * dmat.transpose();
        let k_f64 = k.basis_f64();
        let dual_f64 = linalg::to_dmatrix(&dual_rows, n);
        let m_f64 = linalg::columns_to_dmatrix(&parts.m_basis, n);
        Ok(Self {
            parts,
            k,
            m,
            delta,
            grading,
            complement,
            metric_inv,
            adapted_basis,
            dual_rows,
            adapted,
            delta_in_m,
            ham,
            k_f64,
            dual_f64,
            m_f64,
        })
    }

    pub fn parts(&self) -> &StructureParts {
        &self.parts
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.parts.algebra
    }

    pub fn dim(&self) -> usize {
        self.parts.algebra.dim()
    }

    pub fn k(&self) -> &Subspace {
        &self.k
    }

    pub fn m(&self) -> &Subspace {
        &self.m
    }

    pub fn delta(&self) -> &Subspace {
        &self.delta
    }

    pub fn metric(&self) -> &QMatrix {
        &self.parts.metric
    }

    pub fn metric_inverse(&self) -> &QMatrix {
        &self.metric_inv
    }

    pub fn grading(&self) -> Option<&[Subspace]> {
        self.grading.as_deref()
    }

    pub fn complement(&self) -> Option<&Subspace> {
        self.complement.as_ref()
    }

    pub fn representation(&self) -> Option<&[QMatrix]> {
        self.parts.representation.as_deref()
    }

    pub fn isotropy_connected(&self) -> bool {
        self.parts.isotropy_connected
    }

    /// Basis `(m_1..m_r, k_1..k_s)` of `g`.
    pub fn adapted_basis(&self) -> &QMatrix {
        &self.adapted_basis
    }

    /// Row `i` is the covector dual to adapted basis vector `i`.
    pub fn dual_rows(&self) -> &QMatrix {
        &self.dual_rows
    }

    /// The algebra written in the adapted basis.
    pub fn adapted_algebra(&self) -> &LieAlgebra {
        &self.adapted
    }

    /// `p(δ_i)` as linear forms in the coordinates `q_j = p(m_j)`.
    pub fn delta_in_m(&self) -> &QMatrix {
        &self.delta_in_m
    }

    /// Matrix `M` with `H(p) = 1/2 p^T M p` and `dH(p) = M p`.
    pub fn hamiltonian_matrix(&self) -> &DMatrix<f64> {
        &self.ham
    }

    /// Largest `|p(z)|` over the isotropy basis.
    pub fn annihilator_residual(&self, p: &[f64]) -> f64 {
        self.k_f64
            .iter()
            .map(|z| z.iter().zip(p).map(|(a, b)| a * b).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }

    /// Validates a covector given in the dual basis of `g`.
    pub fn momentum(&self, coords: &[f64]) -> Result<Momentum> {
        if coords.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: coords.len() });
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("momentum has non-finite entries".into()));
        }
        let norm = coords.iter().map(|x| x * x).sum::<f64>().sqrt();
        let residual = self.annihilator_residual(coords);
        if residual > ANNIHILATOR_TOL * norm.max(1.0) {
            return Err(Error::NotInAnnihilator { residual });
        }
        Ok(Momentum(coords.to_vec()))
    }

    /// Builds the covector with `p(m_i) = q_i` and `p(k) = 0`.
    pub fn momentum_from_m(&self, q: &[f64]) -> Result<Momentum> {
        let r = self.m.dim();
        if q.len() != r {
            return Err(Error::DimensionMismatch { expected: r, got: q.len() });
        }
        let rows = self.dual_f64.rows(0, r);
        let p = rows.transpose() * DVector::from_column_slice(q);
        Ok(Momentum(p.iter().copied().collect()))
    }

    /// Accepts either a full covector on `g` or its `m` coordinates.
    pub fn momentum_from_input(&self, values: &[f64]) -> Result<Momentum> {
        if values.len() == self.dim() {
            self.momentum(values)
        } else if values.len() == self.m.dim() {
            self.momentum_from_m(values)
        } else {
            Err(Error::DimensionMismatch { expected: self.dim(), got: values.len() })
        }
    }

    /// Coordinates `q_i = p(m_i)`.
    pub fn m_coords(&self, p: &[f64]) -> Vec<f64> {
        let v = self.m_f64.transpose() * DVector::from_column_slice(p);
        v.iter().copied().collect()
    }
}

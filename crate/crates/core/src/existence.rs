//! Construction of a homogeneous geodesic: the solvable case, factorization by an ideal,
//! and the eigenvector of `A = K^{-1} B̂` on a nondegenerate part of the distribution.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::hamiltonian_raw;
use crate::homogeneity::{check_homogeneous, HomogeneityCertificate, Verdict};
use crate::lie::LieAlgebra;
use crate::linalg::{self, QMatrix};
use crate::rational::{self, Q};
use crate::structure::{HomogeneousSRStructure, Momentum, StructureParts};
use crate::subspace::Subspace;

/// Quotient of a structure by an ideal, with the projection `π: g -> g/i`.
#[derive(Clone, Debug)]
pub struct Factorization {
    pub quotient: HomogeneousSRStructure,
    pub ideal: Subspace,
    /// Vectors of `g` whose images form the quotient basis.
    pub section: QMatrix,
    /// `projection[a]` is the covector giving quotient coordinate `a`.
    pub projection: QMatrix,
}

impl Factorization {
    pub fn project(&self, v: &[Q]) -> Vec<Q> {
        linalg::mat_vec(&self.projection, v)
    }

    /// Pullback `p = p̂ ∘ π` of a quotient momentum.
    pub fn lift_momentum(&self, p_hat: &[f64]) -> Vec<f64> {
        let n = self.ideal.ambient_dim();
        (0..n)
            .map(|j| {
                self.projection
                    .iter()
                    .zip(p_hat)
                    .map(|(row, x)| rational::to_f64(&row[j]) * x)
                    .sum()
            })
            .collect()
    }
}

/// Coordinates of vectors of `Δ` in the Δ-basis, for vectors known to lie in `Δ`.
fn delta_coords(s: &HomogeneousSRStructure, v: &[Q]) -> Vec<Q> {
    s.delta().coords(v).expect("vector lies in Δ")
}

fn gram(metric: &QMatrix, us: &[Vec<Q>]) -> QMatrix {
    us.iter()
        .map(|u| {
            us.iter()
                .map(|w| rational::dot(u, &linalg::mat_vec(metric, w)))
                .collect()
        })
        .collect()
}

/// `B`-orthogonal complement, inside `Δ`, of the subspace spanned by `inner` (Δ-coordinates).
fn metric_complement_in_delta(metric: &QMatrix, inner: &[Vec<Q>]) -> QMatrix {
    let d = metric.len();
    if inner.is_empty() {
        return linalg::identity(d);
    }
    let rows: QMatrix = inner.iter().map(|w| linalg::mat_vec(metric, w)).collect();
    linalg::nullspace(&rows, d)
}

fn delta_vector(s: &HomogeneousSRStructure, u: &[Q]) -> Vec<Q> {
    let n = s.dim();
    let mut v = rational::zeros(n);
    for (c, d) in u.iter().zip(s.delta().basis()) {
        for (vi, di) in v.iter_mut().zip(d) {
            *vi += c * di;
        }
    }
    v
}

pub fn factorize_by_ideal(s: &HomogeneousSRStructure, ideal: &Subspace) -> Result<Factorization> {
    let g = s.algebra();
    let n = s.dim();
    if ideal.ambient_dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: ideal.ambient_dim() });
    }
    if !g.is_ideal(ideal) {
        return Err(Error::NotAnIdeal("[g, i] is not contained in i".into()));
    }
    if s.delta().dim() > 0 && ideal.contains_subspace(s.delta()) {
        return Err(Error::NotAnIdeal("the ideal contains the distribution".into()));
    }
    let section = ideal.coordinate_complement().basis().to_vec();
    let dq = section.len();
    let mut frame = section.clone();
    frame.extend(ideal.basis().iter().cloned());
    let inverse = linalg::inverse(&linalg::transpose(&frame, n)).ok_or(Error::DependentBasis)?;
    let projection: QMatrix = inverse[..dq].to_vec();
    let project = |v: &[Q]| linalg::mat_vec(&projection, v);

    let mut brackets = Vec::new();
    for a in 0..dq {
        for b in a + 1..dq {
            let v = project(&g.bracket_q_unchecked(&section[a], &section[b]));
            if !rational::is_zero_vec(&v) {
                brackets.push((a, b, v));
            }
        }
    }
    let labels: Vec<String> = section
        .iter()
        .map(|v| {
            let idx = v.iter().position(|x| !x.is_zero()).expect("nonzero");
            g.labels()[idx].clone()
        })
        .collect();
    let algebra = LieAlgebra::from_brackets(dq, labels, &brackets)?;

    let inter = s.delta().intersection(ideal);
    let inner: QMatrix = inter.basis().iter().map(|v| delta_coords(s, v)).collect();
    let kept = metric_complement_in_delta(s.metric(), &inner);
    let delta_hat: QMatrix = kept.iter().map(|u| project(&delta_vector(s, u))).collect();
    let metric_hat = gram(s.metric(), &kept);
    let k_hat = Subspace::span(dq, &s.k().basis().iter().map(|v| project(v)).collect::<Vec<_>>());
    let mut m_hat = Subspace::span(dq, &s.m().basis().iter().map(|v| project(v)).collect::<Vec<_>>());
    if k_hat.dim() + m_hat.dim() != dq {
        // π(k) meets π(m); fall back to the Killing complement of k̂, which is ad k̂-invariant
        let killing = algebra.killing_form();
        m_hat = killing_orthogonal(&killing, k_hat.basis(), dq);
        let delta_span = Subspace::span(dq, &delta_hat);
        if k_hat.intersection(&m_hat).dim() != 0 || !m_hat.contains_subspace(&delta_span) {
            return Err(Error::InvalidArgument("no reductive complement of the projected isotropy contains the projected distribution".into()));
        }
    }
    let grading = s.grading().map(|layers| {
        layers
            .iter()
            .map(|l| Subspace::span(dq, &l.basis().iter().map(|v| project(v)).collect::<Vec<_>>()))
            .filter(|l| l.dim() > 0)
            .map(|l| l.basis().to_vec())
            .collect::<Vec<_>>()
    });
    let mut parts = StructureParts::new(algebra, k_hat.basis().to_vec(), m_hat.basis().to_vec(), delta_hat, metric_hat);
    parts.grading = grading;
    parts.isotropy_connected = s.isotropy_connected();
    let quotient = HomogeneousSRStructure::new(parts)?;
    Ok(Factorization { quotient, ideal: ideal.clone(), section, projection })
}

/// Exact data of the eigenvector construction on a structure with nondegenerate Killing form.
#[derive(Clone, Debug)]
pub struct EigenSetup {
    pub killing: QMatrix,
    /// `Δ ∩ Δ^{⊥K}`.
    pub d0: Subspace,
    /// `B`-orthogonal complement of `d0` in `Δ`.
    pub gamma: Subspace,
    /// `Γ^{⊥K}`.
    pub gamma_perp: Subspace,
    /// Columns `[Γ | D0 | W]`, a basis of `g`.
    pub frame: QMatrix,
    /// `B̂` in frame coordinates.
    pub b_hat: QMatrix,
    /// `A = K^{-1} B̂` in frame coordinates.
    pub a: QMatrix,
}

fn killing_orthogonal(killing: &QMatrix, vectors: &[Vec<Q>], n: usize) -> Subspace {
    if vectors.is_empty() {
        return Subspace::full(n);
    }
    let rows: QMatrix = vectors.iter().map(|v| linalg::mat_vec(killing, v)).collect();
    Subspace::new(n, linalg::nullspace(&rows, n)).expect("nullspace basis is independent")
}

pub fn eigen_setup(s: &HomogeneousSRStructure) -> Result<EigenSetup> {
    let n = s.dim();
    let killing = s.algebra().killing_form();
    let delta_perp = killing_orthogonal(&killing, s.delta().basis(), n);
    let d0 = s.delta().intersection(&delta_perp);
    let inner: QMatrix = d0.basis().iter().map(|v| delta_coords(s, v)).collect();
    let gamma_coords = metric_complement_in_delta(s.metric(), &inner);
    let gamma = Subspace::new(n, gamma_coords.iter().map(|u| delta_vector(s, u)).collect())?;
    let gamma_perp = killing_orthogonal(&killing, gamma.basis(), n);
    if gamma.sum(&gamma_perp).dim() != n || gamma.intersection(&gamma_perp).dim() != 0 {
        return Err(Error::NoEigenvector("g is not the direct sum of Γ and its Killing complement".into()));
    }
    // W completes D0 to a basis of Γ^{⊥K}
    let mut w: QMatrix = Vec::new();
    let mut span = d0.clone();
    for v in gamma_perp.basis() {
        if !span.contains(v) {
            span = span.sum(&Subspace::new(n, vec![v.clone()])?);
            w.push(v.clone());
        }
    }
    let mut frame: QMatrix = gamma.basis().to_vec();
    frame.extend(d0.basis().iter().cloned());
    frame.extend(w.iter().cloned());
    let (g_dim, d0_dim) = (gamma.dim(), d0.dim());
    let mut delta_part: QMatrix = gamma_coords.clone();
    delta_part.extend(inner.iter().cloned());
    let b_delta = gram(s.metric(), &delta_part);
    let mut b_hat = vec![rational::zeros(n); n];
    for i in 0..g_dim + d0_dim {
        for j in 0..g_dim + d0_dim {
            b_hat[i][j] = b_delta[i][j].clone();
        }
    }
    for i in g_dim + d0_dim..n {
        b_hat[i][i] = rational::q(1);
    }
    let cols = linalg::transpose(&frame, n);
    let k_frame = linalg::mat_mul(&linalg::mat_mul(&frame, &killing, n), &cols, n);
    let k_inv = linalg::inverse(&k_frame)
        .ok_or_else(|| Error::NoEigenvector("Killing form is degenerate".into()))?;
    let a = linalg::mat_mul(&k_inv, &b_hat, n);
    Ok(EigenSetup { killing, d0, gamma, gamma_perp, frame, b_hat, a })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    SolvableCase,
    Factorized,
    Eigenvector,
}

#[derive(Clone, Debug, Serialize)]
pub struct Audit {
    pub killing_kernel: Vec<Vec<f64>>,
    /// Dimension of the quotient when the structure was factorized.
    pub quotient_dim: Option<usize>,
    pub ideal: Option<Vec<Vec<f64>>>,
    pub gamma: Option<Vec<Vec<f64>>>,
    pub extended_metric: Option<Vec<Vec<f64>>>,
    pub eigenvalue: Option<f64>,
    /// Eigenvector in the coordinates of the (possibly quotient) algebra.
    pub eigenvector: Option<Vec<f64>>,
    /// Momentum on the (possibly quotient) structure.
    pub base_momentum: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExistenceResult {
    pub route: Route,
    pub momentum: Vec<f64>,
    pub geodesic_vector: Vec<f64>,
    pub hamiltonian: f64,
    pub certificate: HomogeneityCertificate,
    pub audit: Audit,
}

fn to_f64_rows(m: &[Vec<Q>]) -> Vec<Vec<f64>> {
    m.iter().map(|r| rational::vec_to_f64(r)).collect()
}

fn normalize_energy(s: &HomogeneousSRStructure, p: Vec<f64>) -> Vec<f64> {
    let h = hamiltonian_raw(s, &p);
    if h > 0.0 {
        let c = (0.5 / h).sqrt();
        p.into_iter().map(|x| x * c).collect()
    } else {
        p
    }
}

fn finish(
    s: &HomogeneousSRStructure,
    route: Route,
    p: Vec<f64>,
    audit: Audit,
) -> Result<ExistenceResult> {
    let momentum = s.momentum(&p).map_err(|e| Error::NoEigenvector(format!("constructed covector is invalid: {e}")))?;
    let certificate = check_homogeneous(s, &momentum);
    if certificate.verdict != Verdict::Homogeneous {
        return Err(Error::NoEigenvector(format!(
            "constructed momentum is not homogeneous (residual {:e})",
            certificate.residual
        )));
    }
    Ok(ExistenceResult {
        route,
        geodesic_vector: certificate.witness.clone().expect("homogeneous verdict has a witness"),
        hamiltonian: hamiltonian_raw(s, &p),
        momentum: momentum.into_vec(),
        certificate,
        audit,
    })
}

/// Case `Ker K = m`: a covector vanishing on `k` and on `[r, r]`, nonzero on `Δ`.
fn solvable_route(s: &HomogeneousSRStructure, kernel: &Subspace) -> Result<ExistenceResult> {
    let n = s.dim();
    let derived = s.algebra().bracket_span(kernel, kernel);
    let mut constraints: QMatrix = derived.basis().to_vec();
    constraints.extend(s.k().basis().iter().cloned());
    let candidates = if constraints.is_empty() { linalg::identity(n) } else { linalg::nullspace(&constraints, n) };
    let chosen = candidates
        .into_iter()
        .find(|p| s.delta().basis().iter().any(|d| !rational::dot(p, d).is_zero()))
        .ok_or_else(|| Error::HypothesesFail("no covector annihilating [r, r] is nonzero on Δ".into()))?;
    let p = normalize_energy(s, rational::vec_to_f64(&chosen));
    let audit = Audit {
        killing_kernel: to_f64_rows(kernel.basis()),
        quotient_dim: None,
        ideal: None,
        gamma: None,
        extended_metric: None,
        eigenvalue: None,
        eigenvector: None,
        base_momentum: Some(p.clone()),
    };
    finish(s, Route::SolvableCase, p, audit)
}

/// Eigenpair of `A|Γ` with the largest `|λ|`; ties go to the lexicographically largest
/// sign-normalized vector.
fn choose_eigenvector(s: &HomogeneousSRStructure, setup: &EigenSetup) -> Result<(f64, Vec<f64>)> {
    let n = s.dim();
    let k = setup.gamma.dim();
    if k == 0 {
        return Err(Error::NoEigenvector("Γ is zero".into()));
    }
    let b = linalg::to_dmatrix(&setup.b_hat, n).view((0, 0), (k, k)).into_owned();
    let kg = {
        let cols = linalg::transpose(setup.gamma.basis(), n);
        let kq = linalg::mat_mul(&linalg::mat_mul(setup.gamma.basis(), &setup.killing, n), &cols, k);
        linalg::to_dmatrix(&kq, k)
    };
    // B x = λ K x  <=>  K x = μ B x with μ = 1/λ
    let l = b.clone().cholesky().ok_or_else(|| Error::NoEigenvector("metric on Γ is not definite".into()))?.l();
    let l_inv = l.clone().try_inverse().expect("Cholesky factor is invertible");
    let sym = &l_inv * &kg * l_inv.transpose();
    let sym = (&sym + sym.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let lambdas: Vec<f64> = eig.eigenvalues.iter().map(|mu| if mu.abs() > 1e-14 { 1.0 / mu } else { 0.0 }).collect();
    let max = lambdas.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max <= 1e-10 {
        return Err(Error::NoEigenvector("no nonzero eigenvalue on Γ".into()));
    }
    let gamma_f = linalg::columns_to_dmatrix(setup.gamma.basis(), n);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let groups: Vec<f64> = {
        let mut v: Vec<f64> = lambdas.iter().copied().filter(|x| (x.abs() - max).abs() <= 1e-9 * max).collect();
        v.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
        v.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * max);
        v
    };
    for lambda in groups {
        let cols: Vec<DVector<f64>> = (0..k)
            .filter(|&i| (lambdas[i] - lambda).abs() <= 1e-9 * max)
            .map(|i| l_inv.transpose() * eig.eigenvectors.column(i))
            .map(|x| &gamma_f * x)
            .collect();
        for x in float_rref_rows(&DMatrix::from_columns(&cols).transpose()) {
            let x = normalize_vector(s, x);
            let better = match &best {
                None => true,
                Some((_, bx)) => lexicographically_greater(&x, bx),
            };
            if better {
                best = Some((lambda, x));
            }
        }
    }
    best.ok_or_else(|| Error::NoEigenvector("empty eigenspace".into()))
}

fn lexicographically_greater(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > 1e-12 {
            return x > y;
        }
    }
    false
}

/// Reduced row echelon form of a float matrix with partial pivoting; nonzero rows only.
fn float_rref_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let scale = a.amax().max(f64::MIN_POSITIVE);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (pivot, val) = (r..rows).map(|i| (i, a[(i, c)].abs())).fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= 1e-9 * scale {
            continue;
        }
        a.swap_rows(r, pivot);
        let p = a[(r, c)];
        for j in 0..cols {
            a[(r, j)] /= p;
        }
        for i in 0..rows {
            if i != r {
                let f = a[(i, c)];
                if f != 0.0 {
                    for j in 0..cols {
                        a[(i, j)] -= f * a[(r, j)];
                    }
                }
            }
        }
        r += 1;
    }
    (0..r).map(|i| a.row(i).iter().copied().collect()).collect()
}

/// Scales a vector of `Δ` to unit `B`-length with first nonzero coordinate positive.
fn normalize_vector(s: &HomogeneousSRStructure, x: Vec<f64>) -> Vec<f64> {
    let dmat = linalg::columns_to_dmatrix(s.delta().basis(), s.dim());
    let u = linalg::lstsq_min_norm(&dmat, &DVector::from_column_slice(&x));
    let b = linalg::to_dmatrix(s.metric(), s.delta().dim());
    let norm = u.dot(&(&b * &u)).sqrt();
    let sign = x.iter().find(|v| v.abs() > 1e-12).map_or(1.0, |v| v.signum());
    x.into_iter().map(|v| sign * v / norm).collect()
}

/// Momentum `p = B̂(X, ·)` and the eigenpair on a structure with nondegenerate Killing form.
fn eigen_momentum(s: &HomogeneousSRStructure) -> Result<(EigenSetup, f64, Vec<f64>, Vec<f64>)> {
    let setup = eigen_setup(s)?;
    let (lambda, x) = choose_eigenvector(s, &setup)?;
    let n = s.dim();
    let frame_cols = linalg::columns_to_dmatrix(&setup.frame, n);
    let frame_inv = frame_cols.clone().try_inverse().expect("frame is a basis");
    let x_frame = &frame_inv * DVector::from_column_slice(&x);
    let p_frame = linalg::to_dmatrix(&setup.b_hat, n) * x_frame;
    let p = frame_inv.transpose() * p_frame;
    Ok((setup, lambda, x, p.iter().copied().collect()))
}

/// Finds one homogeneous geodesic when `Ker K = m` or `K|Δ ≠ 0`.
pub fn construct_homogeneous_geodesic(s: &HomogeneousSRStructure) -> Result<ExistenceResult> {
    let kernel = s.algebra().killing_kernel();
    if kernel == *s.m() {
        return solvable_route(s, &kernel);
    }
    let killing = s.algebra().killing_form();
    let delta = s.delta().basis();
    let nondegenerate_on_delta = delta
        .iter()
        .any(|a| delta.iter().any(|b| !rational::dot(a, &linalg::mat_vec(&killing, b)).is_zero()));
    if !nondegenerate_on_delta {
        return Err(Error::HypothesesFail(
            "the Killing kernel differs from m and the Killing form vanishes on Δ".into(),
        ));
    }
    let (target, factorization) = if kernel.dim() > 0 {
        let f = factorize_by_ideal(s, &kernel)?;
        (f.quotient.clone(), Some(f))
    } else {
        (s.clone(), None)
    };
    let (setup, lambda, x, p_hat) = eigen_momentum(&target)?;
    target
        .momentum(&p_hat)
        .map_err(|_| Error::NoEigenvector("B̂(X) does not annihilate the isotropy algebra".into()))?;
    let p = match &factorization {
        Some(f) => f.lift_momentum(&p_hat),
        None => p_hat.clone(),
    };
    let audit = Audit {
        killing_kernel: to_f64_rows(kernel.basis()),
        quotient_dim: factorization.as_ref().map(|f| f.quotient.dim()),
        ideal: factorization.as_ref().map(|f| to_f64_rows(f.ideal.basis())),
        gamma: Some(to_f64_rows(setup.gamma.basis())),
        extended_metric: Some(to_f64_rows(&setup.b_hat)),
        eigenvalue: Some(lambda),
        eigenvector: Some(x),
        base_momentum: Some(p_hat),
    };
    let route = if factorization.is_some() { Route::Factorized } else { Route::Eigenvector };
    finish(s, route, p, audit)
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenVerification {
    pub ok: bool,
    /// `max_j |p([X, e_j])|` on the structure where the eigenvector was taken.
    pub bracket_defect: f64,
    /// `|A X - λ X|`.
    pub eigen_residual: f64,
    /// Distance of `X` from `Γ`.
    pub gamma_distance: f64,
}

/// Recomputes the construction data independently and checks the stored eigenpair.
pub fn verify_eigenconstruction(s: &HomogeneousSRStructure, result: &ExistenceResult) -> Result<EigenVerification> {
    let (Some(lambda), Some(x), Some(p)) = (
        result.audit.eigenvalue,
        result.audit.eigenvector.as_ref(),
        result.audit.base_momentum.as_ref(),
    ) else {
        return Err(Error::InvalidArgument("result carries no eigenpair".into()));
    };
    let target = if result.route == Route::Factorized {
        factorize_by_ideal(s, &s.algebra().killing_kernel())?.quotient
    } else {
        s.clone()
    };
    let n = target.dim();
    if x.len() != n || p.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() });
    }
    let bracket_defect = target
        .algebra()
        .coad_apply_unchecked(x, p)
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let setup = eigen_setup(&target)?;
    let frame = linalg::columns_to_dmatrix(&setup.frame, n);
    let a_g = &frame * linalg::to_dmatrix(&setup.a, n) * frame.clone().try_inverse().expect("frame is a basis");
    let xv = DVector::from_column_slice(x);
    let eigen_residual = (&a_g * &xv - &xv * lambda).norm();
    let gamma = linalg::columns_to_dmatrix(setup.gamma.basis(), n);
    let coeffs = linalg::lstsq_min_norm(&gamma, &xv);
    let gamma_distance = (&gamma * coeffs - &xv).norm();
    Ok(EigenVerification {
        ok: bracket_defect < 1e-9 && eigen_residual <= 1e-10 && gamma_distance <= 1e-10,
        bracket_defect,
        eigen_residual,
        gamma_distance,
    })
}

/// The momentum as a validated value on `s`.
pub fn result_momentum(s: &HomogeneousSRStructure, result: &ExistenceResult) -> Result<Momentum> {
    s.momentum(&result.momentum)
}

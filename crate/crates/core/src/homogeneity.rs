//! Homogeneity of a geodesic from its initial momentum: the geodesic through `p` is an
//! orbit of a one-parameter isometry group iff some `z ∈ k` gives `p([d_pH + z, g]) = 0`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::hamiltonian::{dh_raw, vertical_field_raw};
use crate::integrator::Trajectory;
use crate::linalg::{self, QMatrix};
use crate::polynomial::Polynomial;
use crate::rational::{self, Q};
use crate::sampling::MomentumSampler;
use crate::structure::{HomogeneousSRStructure, Momentum};

pub const DEFAULT_THRESHOLD: f64 = 1e-8;
pub const MAX_COUNTEREXAMPLES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Homogeneous,
    NotHomogeneous,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct HomogeneityCertificate {
    pub verdict: Verdict,
    /// Geodesic vector `X = d_pH + z` in the basis of `g`.
    pub witness: Option<Vec<f64>>,
    /// `|A z - b| / (1 + |b|)` for the least-squares `z`.
    pub residual: f64,
    pub threshold: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct HomogeneityOptions {
    pub threshold: f64,
    /// Re-solve borderline cases exactly over the rationals.
    pub exact_retry: bool,
}

impl Default for HomogeneityOptions {
    fn default() -> Self {
        Self { threshold: DEFAULT_THRESHOLD, exact_retry: true }
    }
}

pub fn check_homogeneous(s: &HomogeneousSRStructure, p: &Momentum) -> HomogeneityCertificate {
    check_homogeneous_with(s, p, HomogeneityOptions::default())
}

fn constraint_system(s: &HomogeneousSRStructure, p: &[f64]) -> (DMatrix<f64>, DVector<f64>) {
    let n = s.dim();
    let g = s.algebra();
    let kb = s.k().basis_f64();
    let mut a = DMatrix::zeros(n, kb.len());
    for (t, z) in kb.iter().enumerate() {
        let row = g.coad_apply_unchecked(z, p);
        a.column_mut(t).copy_from_slice(&row);
    }
    let b = -DVector::from_vec(vertical_field_raw(s, p));
    (a, b)
}

fn witness_from(s: &HomogeneousSRStructure, p: &[f64], z: &[f64]) -> Vec<f64> {
    let mut x = dh_raw(s, p);
    for (zt, kt) in z.iter().zip(s.k().basis_f64()) {
        for (xi, ki) in x.iter_mut().zip(kt) {
            *xi += zt * ki;
        }
    }
    x
}

pub fn check_homogeneous_with(
    s: &HomogeneousSRStructure,
    p: &Momentum,
    options: HomogeneityOptions,
) -> HomogeneityCertificate {
    let coords = p.coords();
    let (a, b) = constraint_system(s, coords);
    let z = linalg::lstsq_min_norm(&a, &b);
    let residual = (&a * &z - &b).norm() / (1.0 + b.norm());
    let threshold = options.threshold;
    let homogeneous = |z: &[f64], residual: f64| HomogeneityCertificate {
        verdict: Verdict::Homogeneous,
        witness: Some(witness_from(s, coords, z)),
        residual,
        threshold,
    };
    let not_homogeneous = HomogeneityCertificate { verdict: Verdict::NotHomogeneous, witness: None, residual, threshold };
    if residual < threshold {
        return homogeneous(z.as_slice(), residual);
    }
    if residual > 10.0 * threshold {
        return not_homogeneous;
    }
    if options.exact_retry {
        if let Some(z) = solve_exact(s, coords) {
            let zf = rational::vec_to_f64(&z);
            let residual = (&a * DVector::from_column_slice(&zf) - &b).norm() / (1.0 + b.norm());
            return homogeneous(&zf, residual);
        }
        return not_homogeneous;
    }
    HomogeneityCertificate { verdict: Verdict::Inconclusive, witness: None, residual, threshold }
}

/// Exact feasibility of the constraint system for the rational value of `p`.
fn solve_exact(s: &HomogeneousSRStructure, p: &[f64]) -> Option<Vec<Q>> {
    let n = s.dim();
    let g = s.algebra();
    let pq: Vec<Q> = p.iter().map(|&x| rational::from_f64(x)).collect::<Option<_>>()?;
    let d = s.delta().basis();
    let a_delta: Vec<Q> = d.iter().map(|v| rational::dot(v, &pq)).collect();
    let coeffs = linalg::mat_vec(s.metric_inverse(), &a_delta);
    let mut x = rational::zeros(n);
    for (c, v) in coeffs.iter().zip(d) {
        for (xi, vi) in x.iter_mut().zip(v) {
            *xi += c * vi;
        }
    }
    // row j: sum_t p([z_t, e_j]) w_t = -p([x, e_j])
    let coad = |v: &[Q]| -> Vec<Q> {
        (0..n)
            .map(|j| rational::dot(&g.bracket_q_unchecked(v, &rational::unit(n, j)), &pq))
            .collect()
    };
    let cols: Vec<Vec<Q>> = s.k().basis().iter().map(|z| coad(z)).collect();
    let rhs: Vec<Q> = coad(&x).into_iter().map(|v| -v).collect();
    if cols.is_empty() {
        return rational::is_zero_vec(&rhs).then(Vec::new);
    }
    let rows: QMatrix = linalg::transpose(&cols, n);
    linalg::solve(&rows, &rhs, cols.len())
}

/// Largest `|p([X, e_j])|`, recomputed directly.
pub fn witness_defect(s: &HomogeneousSRStructure, p: &Momentum, x: &[f64]) -> f64 {
    s.algebra()
        .coad_apply_unchecked(x, p.coords())
        .iter()
        .fold(0.0, |m, v| m.max(v.abs()))
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitTangencyReport {
    /// `sup_t |F(p(t)) - F(p(0))|` per invariant.
    pub drifts: Vec<f64>,
    pub tolerance: f64,
    pub consistent: bool,
}

/// Drift of `k`-invariant polynomials (in the coordinates `q_i = p(m_i)`) along a trajectory.
pub fn orbit_tangency_check(
    s: &HomogeneousSRStructure,
    traj: &Trajectory,
    invariants: &[Polynomial],
    tolerance: f64,
) -> OrbitTangencyReport {
    let qs: Vec<Vec<f64>> = traj.momenta.iter().map(|p| s.m_coords(p.coords())).collect();
    let drifts: Vec<f64> = invariants
        .iter()
        .map(|f| {
            let f0 = f.eval(&qs[0]);
            qs.iter().map(|q| (f.eval(q) - f0).abs()).fold(0.0, f64::max)
        })
        .collect();
    let consistent = drifts.iter().all(|d| *d < tolerance);
    OrbitTangencyReport { drifts, tolerance, consistent }
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub index: u64,
    pub momentum: Vec<f64>,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanSummary {
    pub samples: usize,
    pub seed: u64,
    pub homogeneous: usize,
    pub not_homogeneous: usize,
    pub inconclusive: usize,
    pub fraction_homogeneous: f64,
    pub counterexamples: Vec<Counterexample>,
}

/// Checks `samples` seeded momenta on `H = 1/2`.
pub fn scan_homogeneous(s: &HomogeneousSRStructure, samples: usize, seed: u64) -> ScanSummary {
    scan_homogeneous_with(s, samples, seed, HomogeneityOptions::default())
}

pub fn scan_homogeneous_with(
    s: &HomogeneousSRStructure,
    samples: usize,
    seed: u64,
    options: HomogeneityOptions,
) -> ScanSummary {
    let sampler = MomentumSampler::new(s);
    let results: Vec<(Momentum, HomogeneityCertificate)> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let p = sampler.sample(seed, i);
            let cert = check_homogeneous_with(s, &p, options);
            (p, cert)
        })
        .collect();
    let count = |v: Verdict| results.iter().filter(|(_, c)| c.verdict == v).count();
    let homogeneous = count(Verdict::Homogeneous);
    let counterexamples = results
        .iter()
        .enumerate()
        .filter(|(_, (_, c))| c.verdict == Verdict::NotHomogeneous)
        .take(MAX_COUNTEREXAMPLES)
        .map(|(i, (p, c))| Counterexample { index: i as u64, momentum: p.coords().to_vec(), residual: c.residual })
        .collect();
    ScanSummary {
        samples,
        seed,
        homogeneous,
        not_homogeneous: count(Verdict::NotHomogeneous),
        inconclusive: count(Verdict::Inconclusive),
        fraction_homogeneous: if samples == 0 { 0.0 } else { homogeneous as f64 / samples as f64 },
        counterexamples,
    }
}

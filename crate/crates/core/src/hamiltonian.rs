//! The normal Hamiltonian `H(p) = 1/2 B^{-1}(p|Δ, p|Δ)`, its vertical flow and Lie–Poisson brackets.

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lie::LieAlgebra;
use crate::linalg;
use crate::polynomial::Polynomial;
use crate::structure::{HomogeneousSRStructure, Momentum};

pub fn hamiltonian_value(s: &HomogeneousSRStructure, p: &Momentum) -> f64 {
    hamiltonian_raw(s, p.coords())
}

pub(crate) fn hamiltonian_raw(s: &HomogeneousSRStructure, p: &[f64]) -> f64 {
    let v = DVector::from_column_slice(p);
    0.5 * v.dot(&(s.hamiltonian_matrix() * &v))
}

/// `d_pH = B^{-1}(p|Δ)` as a vector of `g`.
pub fn dh(s: &HomogeneousSRStructure, p: &Momentum) -> Vec<f64> {
    dh_raw(s, p.coords())
}

pub(crate) fn dh_raw(s: &HomogeneousSRStructure, p: &[f64]) -> Vec<f64> {
    let v = s.hamiltonian_matrix() * DVector::from_column_slice(p);
    v.iter().copied().collect()
}

/// `ṗ = p([d_pH, ·])`.
pub fn vertical_field(s: &HomogeneousSRStructure, p: &Momentum) -> Vec<f64> {
    vertical_field_raw(s, p.coords())
}

pub(crate) fn vertical_field_raw(s: &HomogeneousSRStructure, p: &[f64]) -> Vec<f64> {
    let x = dh_raw(s, p);
    s.algebra().coad_apply_unchecked(&x, p)
}

/// Jacobian of the vertical field with respect to `p`.
pub fn vertical_jacobian(s: &HomogeneousSRStructure, p: &[f64]) -> DMatrix<f64> {
    let n = s.dim();
    let m = s.hamiltonian_matrix();
    let x = dh_raw(s, p);
    let mut jac = DMatrix::zeros(n, n);
    // V_j = sum c_ijk x_i p_k with x = M p
    for &(i, j, k, c) in s.algebra().float_entries() {
        jac[(j, k)] += c * x[i];
        for l in 0..n {
            jac[(j, l)] += c * m[(i, l)] * p[k];
        }
    }
    jac
}

/// `H` as an exact polynomial on `g*`.
pub fn hamiltonian_polynomial(s: &HomogeneousSRStructure) -> Polynomial {
    let n = s.dim();
    let d = s.delta().basis();
    let binv = s.metric_inverse();
    let dcols = linalg::transpose(d, n);
    let ham = linalg::mat_mul(&linalg::mat_mul(&dcols, binv, binv.len()), d, n);
    Polynomial::half_quadratic_form(&ham)
}

/// `H` restricted to the annihilator of `k`, in the coordinates `q_i = p(m_i)`.
pub fn hamiltonian_polynomial_m(s: &HomogeneousSRStructure) -> Polynomial {
    let r = s.m().dim();
    let a = s.delta_in_m();
    let at = linalg::transpose(a, r);
    let binv = s.metric_inverse();
    let ham = linalg::mat_mul(&linalg::mat_mul(&at, binv, binv.len()), a, r);
    Polynomial::half_quadratic_form(&ham)
}

fn poisson(
    alg: &LieAlgebra,
    f: &Polynomial,
    g: &Polynomial,
    nvars: usize,
) -> Polynomial {
    let df: Vec<Polynomial> = (0..nvars).map(|i| f.derivative(i)).collect();
    let dg: Vec<Polynomial> = (0..nvars).map(|i| g.derivative(i)).collect();
    let mut out = Polynomial::zero(nvars);
    for (i, j, k, c) in alg.nonzero_constants() {
        if i >= nvars || j >= nvars || k >= nvars || df[i].is_zero() || dg[j].is_zero() {
            continue;
        }
        let term = (&df[i] * &dg[j]).scale(c);
        out = &out + &(&term * &Polynomial::var(nvars, k));
    }
    out
}

/// `{F, G}(p) = sum c_ijk p_k ∂_i F ∂_j G`.
pub fn lie_poisson_bracket(alg: &LieAlgebra, f: &Polynomial, g: &Polynomial) -> Result<Polynomial> {
    let n = alg.dim();
    for p in [f, g] {
        if p.nvars() != n {
            return Err(Error::DimensionMismatch { expected: n, got: p.nvars() });
        }
    }
    Ok(poisson(alg, f, g, n))
}

/// Bracket of functions on `m*` pulled back to `g*` and restricted to the annihilator of `k`.
pub fn reduced_bracket(s: &HomogeneousSRStructure, f: &Polynomial, g: &Polynomial) -> Result<Polynomial> {
    let r = s.m().dim();
    for p in [f, g] {
        if p.nvars() != r {
            return Err(Error::DimensionMismatch { expected: r, got: p.nvars() });
        }
    }
    Ok(poisson(s.adapted_algebra(), f, g, r))
}

/// True iff `{p_i, F} = 0` for every coordinate function.
pub fn casimir_check(f: &Polynomial, alg: &LieAlgebra) -> bool {
    let n = alg.dim();
    if f.nvars() != n {
        return false;
    }
    let df: Vec<Polynomial> = (0..n).map(|j| f.derivative(j)).collect();
    // {p_i, F} = sum_{j,k} c_ijk p_k ∂_j F
    (0..n).all(|i| {
        let mut acc = Polynomial::zero(n);
        for j in 0..n {
            if df[j].is_zero() {
                continue;
            }
            for (k, c) in alg.row(i, j) {
                if c.is_zero() {
                    continue;
                }
                acc = &acc + &(&df[j] * &Polynomial::var(n, *k)).scale(c);
            }
        }
        acc.is_zero()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, unit};
    use crate::structure::StructureParts;

    fn heisenberg() -> HomogeneousSRStructure {
        let labels = ["e1", "e2", "e3"].map(String::from).to_vec();
        let g = LieAlgebra::from_brackets(3, labels, &[(0, 1, unit(3, 2))]).unwrap();
        HomogeneousSRStructure::new(StructureParts::new(
            g,
            vec![],
            vec![unit(3, 0), unit(3, 1), unit(3, 2)],
            vec![unit(3, 0), unit(3, 1)],
            vec![vec![q(1), q(0)], vec![q(0), q(1)]],
        ))
        .unwrap()
    }

    #[test]
    fn heisenberg_values() {
        let s = heisenberg();
        let p = s.momentum(&[3.0, 4.0, 7.0]).unwrap();
        assert_eq!(hamiltonian_value(&s, &p), 12.5);
        let p = s.momentum(&[1.0, 0.0, 2.0]).unwrap();
        assert_eq!(dh(&s, &p), vec![1.0, 0.0, 0.0]);
        let p = s.momentum(&[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(vertical_field(&s, &p), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn heisenberg_bracket() {
        let s = heisenberg();
        let x = Polynomial::var(3, 0);
        let y = Polynomial::var(3, 1);
        let b = lie_poisson_bracket(s.algebra(), &x, &y).unwrap();
        assert_eq!(b, Polynomial::var(3, 2));
        assert!(casimir_check(&Polynomial::var(3, 2), s.algebra()));
        assert!(!casimir_check(&x, s.algebra()));
        let h = hamiltonian_polynomial(&s);
        assert_eq!(h.to_string(), "1/2*p1^2 + 1/2*p2^2");
        assert_eq!(hamiltonian_polynomial_m(&s), h);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let s = heisenberg();
        let p = [0.3, -0.7, 1.1];
        let jac = vertical_jacobian(&s, &p);
        let eps = 1e-6;
        for l in 0..3 {
            let mut pp = p;
            pp[l] += eps;
            let mut pm = p;
            pm[l] -= eps;
            let fp = vertical_field_raw(&s, &pp);
            let fm = vertical_field_raw(&s, &pm);
            for j in 0..3 {
                assert!(((fp[j] - fm[j]) / (2.0 * eps) - jac[(j, l)]).abs() < 1e-8);
            }
        }
    }
}

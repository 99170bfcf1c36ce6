//! Linear algebra over the rationals (fraction-free elimination) and small
//! floating-point helpers built on `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rational::Q;

/// Dense rational matrix stored by rows.
pub type QMatrix = Vec<Vec<Q>>;

/// Relative singular-value cutoff for numerical rank decisions.
pub const SVD_REL_TOL: f64 = 1e-10;

/// Reduced row echelon form: nonzero rows only, with the pivot column of each row.
#[derive(Clone, Debug)]
pub struct Echelon {
    pub rows: QMatrix,
    pub pivots: Vec<usize>,
    pub ncols: usize,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

fn to_integer_row(row: &[Q]) -> Vec<BigInt> {
    let lcm = row
        .iter()
        .filter(|x| !x.is_zero())
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    row.iter()
        .map(|x| {
            if x.is_zero() {
                BigInt::zero()
            } else {
                x.numer() * (&lcm / x.denom())
            }
        })
        .collect()
}

fn remove_content(row: &mut [BigInt]) {
    let g = row.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in row.iter_mut() {
            *x /= &g;
        }
    }
}

/// `target <- p * target - a * src`, where `p` is the pivot of `src` and `a` the entry of `target`.
fn eliminate(target: &mut [BigInt], src: &[BigInt], col: usize) {
    let a = target[col].clone();
    if a.is_zero() {
        return;
    }
    let p = &src[col];
    let g = a.gcd(p);
    let (a, p) = (&a / &g, p / &g);
    for (t, s) in target.iter_mut().zip(src) {
        if s.is_zero() {
            if !t.is_zero() {
                *t *= &p;
            }
        } else {
            *t = &*t * &p - &a * s;
        }
    }
    remove_content(target);
}

/// Row-reduces `rows` (each of length `ncols`) with fraction-free integer elimination.
pub fn rref(rows: &[Vec<Q>], ncols: usize) -> Echelon {
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| {
            assert_eq!(r.len(), ncols, "row length mismatch");
            let mut ir = to_integer_row(r);
            remove_content(&mut ir);
            ir
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == m.len() {
            break;
        }
        let best = (r..m.len())
            .filter(|&i| !m[i][col].is_zero())
            .min_by_key(|&i| m[i][col].bits());
        let Some(best) = best else { continue };
        m.swap(r, best);
        let (head, tail) = m.split_at_mut(r + 1);
        let pivot_row = &head[r];
        for row in tail.iter_mut() {
            eliminate(row, pivot_row, col);
        }
        pivots.push(col);
        r += 1;
    }
    m.truncate(r);
    for (i, &col) in pivots.iter().enumerate().rev() {
        let (head, tail) = m.split_at_mut(i);
        let pivot_row = &tail[0];
        for row in head.iter_mut() {
            eliminate(row, pivot_row, col);
        }
    }
    let rows = m
        .into_iter()
        .zip(&pivots)
        .map(|(row, &col)| {
            let p = row[col].clone();
            row.into_iter()
                .map(|x| Q::new(x, p.clone()))
                .collect::<Vec<Q>>()
        })
        .collect();
    Echelon { rows, pivots, ncols }
}

pub fn rank(rows: &[Vec<Q>], ncols: usize) -> usize {
    rref(rows, ncols).rank()
}

/// Basis of `{x : A x = 0}`, one vector per free column (free entry equal to one).
pub fn nullspace(rows: &[Vec<Q>], ncols: usize) -> QMatrix {
    let e = rref(rows, ncols);
    nullspace_from_echelon(&e)
}

pub fn nullspace_from_echelon(e: &Echelon) -> QMatrix {
    let mut is_pivot = vec![false; e.ncols];
    for &p in &e.pivots {
        is_pivot[p] = true;
    }
    (0..e.ncols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = vec![Q::zero(); e.ncols];
            v[free] = Q::one();
            for (row, &p) in e.rows.iter().zip(&e.pivots) {
                v[p] = -row[free].clone();
            }
            v
        })
        .collect()
}

/// Some solution of `A x = b`, or `None` when the system is inconsistent.
pub fn solve(a: &[Vec<Q>], b: &[Q], ncols: usize) -> Option<Vec<Q>> {
    let aug: QMatrix = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let e = rref(&aug, ncols + 1);
    if e.pivots.last() == Some(&ncols) {
        return None;
    }
    let mut x = vec![Q::zero(); ncols];
    for (row, &p) in e.rows.iter().zip(&e.pivots) {
        x[p] = row[ncols].clone();
    }
    Some(x)
}

pub fn inverse(m: &[Vec<Q>]) -> Option<QMatrix> {
    let n = m.len();
    let aug: QMatrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    let e = rref(&aug, 2 * n);
    if e.rank() < n || e.pivots[n - 1] != n - 1 {
        return None;
    }
    Some(e.rows.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn transpose(m: &[Vec<Q>], ncols: usize) -> QMatrix {
    (0..ncols)
        .map(|j| m.iter().map(|r| r[j].clone()).collect())
        .collect()
}

pub fn mat_mul(a: &[Vec<Q>], b: &[Vec<Q>], bcols: usize) -> QMatrix {
    a.iter()
        .map(|row| {
            (0..bcols)
                .map(|j| {
                    row.iter()
                        .zip(b)
                        .filter(|(x, _)| !x.is_zero())
                        .fold(Q::zero(), |acc, (x, brow)| acc + x * &brow[j])
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &[Vec<Q>], v: &[Q]) -> Vec<Q> {
    a.iter().map(|row| crate::rational::dot(row, v)).collect()
}

pub fn identity(n: usize) -> QMatrix {
    (0..n).map(|i| crate::rational::unit(n, i)).collect()
}

pub fn is_symmetric(m: &[Vec<Q>]) -> bool {
    let n = m.len();
    m.iter().all(|r| r.len() == n) && (0..n).all(|i| (0..i).all(|j| m[i][j] == m[j][i]))
}

/// Exact positive-definiteness test: elimination without pivoting keeps every pivot positive.
pub fn is_positive_definite(m: &[Vec<Q>]) -> bool {
    let n = m.len();
    if !is_symmetric(m) {
        return false;
    }
    let mut a: QMatrix = m.to_vec();
    for k in 0..n {
        if !a[k][k].is_positive() {
            return false;
        }
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &a[k][k];
            for j in k..n {
                let delta = &f * &a[k][j];
                a[i][j] -= delta;
            }
        }
    }
    true
}

pub fn to_dmatrix(m: &[Vec<Q>], ncols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m.len(), ncols, |i, j| crate::rational::to_f64(&m[i][j]))
}

/// Matrix whose columns are the given vectors.
pub fn columns_to_dmatrix(cols: &[Vec<Q>], nrows: usize) -> DMatrix<f64> {
    DMatrix::from_fn(nrows, cols.len(), |i, j| crate::rational::to_f64(&cols[j][i]))
}

/// Minimum-norm least-squares solution with singular values below
/// `SVD_REL_TOL * sigma_max` treated as zero.
pub fn lstsq_min_norm(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if a.ncols() == 0 {
        return DVector::zeros(0);
    }
    if a.nrows() == 0 {
        return DVector::zeros(a.ncols());
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if smax == 0.0 || !smax.is_finite() {
        return DVector::zeros(a.ncols());
    }
    svd.solve(b, SVD_REL_TOL * smax)
        .unwrap_or_else(|_| DVector::zeros(a.ncols()))
}

/// Orthonormal basis (as columns) of the numerical kernel of `a`.
pub fn null_space_f64(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let rows = a.nrows().max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.max();
    let cutoff = SVD_REL_TOL * smax.max(f64::MIN_POSITIVE);
    let cols: Vec<DVector<f64>> = (0..n)
        .filter(|&i| smax == 0.0 || svd.singular_values[i] <= cutoff)
        .map(|i| v_t.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

pub fn numerical_rank(a: &DMatrix<f64>) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > SVD_REL_TOL * smax).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    fn m(rows: &[&[i64]]) -> QMatrix {
        rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect()
    }

    #[test]
    fn rref_of_rank_deficient_matrix() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        let e = rref(&a, 3);
        assert_eq!(e.pivots, vec![0, 1]);
        assert_eq!(e.rows[0], vec![q(1), q(0), q(1)]);
        assert_eq!(e.rows[1], vec![q(0), q(1), q(1)]);
    }

    #[test]
    fn nullspace_vectors_are_annihilated() {
        let a = m(&[&[1, 2, 3, 4], &[2, 3, 4, 5]]);
        let ns = nullspace(&a, 4);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(mat_vec(&a, v).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn solve_detects_inconsistency() {
        let a = m(&[&[1, 1], &[2, 2]]);
        assert!(solve(&a, &[q(1), q(3)], 2).is_none());
        let x = solve(&a, &[q(1), q(2)], 2).unwrap();
        assert_eq!(&x[0] + &x[1], q(1));
    }

    #[test]
    fn inverse_and_definiteness() {
        let a = vec![vec![q(2), q(1)], vec![q(1), q(2)]];
        let inv = inverse(&a).unwrap();
        assert_eq!(inv[0][0], qf(2, 3));
        assert_eq!(inv[0][1], qf(-1, 3));
        assert!(is_positive_definite(&a));
        let b = vec![vec![q(1), q(2)], vec![q(2), q(1)]];
        assert!(!is_positive_definite(&b));
        assert!(inverse(&m(&[&[1, 2], &[2, 4]])).is_none());
    }

    #[test]
    fn float_min_norm_solution() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![2.0, 2.0]);
        let x = lstsq_min_norm(&a, &b);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        let ns = null_space_f64(&a);
        assert_eq!(ns.ncols(), 1);
        assert_eq!(numerical_rank(&a), 1);
    }
}

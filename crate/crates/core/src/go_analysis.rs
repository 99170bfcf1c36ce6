//! Geodesic-orbit analysis: `k`-invariant polynomials on `m*`, the Poisson-commutation
//! criterion `{H, F} = 0`, and the skew-symmetry obstruction for Carnot structures.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::hamiltonian::{hamiltonian_polynomial_m, reduced_bracket};
use crate::homogeneity::{scan_homogeneous, ScanSummary};
use crate::linalg::{self, QMatrix};
use crate::polynomial::{Exponents, Polynomial};
use crate::rational::{self, Q};
use crate::structure::HomogeneousSRStructure;

/// Prefix of the `m*` coordinates `q_i = p(m_i)` in printed polynomials.
pub const M_PREFIX: &str = "q";
pub const DEFAULT_DEGREE_CAP: usize = 4;

#[derive(Clone, Debug)]
pub struct InvariantBasis {
    pub degree_cap: usize,
    /// Homogeneous invariants, grouped by increasing degree.
    pub polynomials: Vec<Polynomial>,
}

impl InvariantBasis {
    pub fn of_degree(&self, d: usize) -> impl Iterator<Item = &Polynomial> {
        self.polynomials.iter().filter(move |p| p.degree() == Some(d))
    }

    /// One polynomial per line, in the variables `q1..qr`.
    pub fn to_text(&self) -> String {
        self.polynomials
            .iter()
            .map(|p| format!("{}\n", p.display_with(M_PREFIX)))
            .collect()
    }
}

/// Matrices `C_z` with `(C_z)_{ij}` the coefficient of `m_j` in `[z, m_i]`, one per isotropy
/// basis vector.
pub fn isotropy_action_matrices(s: &HomogeneousSRStructure) -> Vec<QMatrix> {
    let r = s.m().dim();
    let alg = s.adapted_algebra();
    (r..s.dim())
        .map(|z| {
            (0..r)
                .map(|i| {
                    let mut row = rational::zeros(r);
                    for (j, c) in alg.row(z, i) {
                        if *j < r {
                            row[*j] = c.clone();
                        }
                    }
                    row
                })
                .collect()
        })
        .collect()
}

/// `(L F)(q) = sum_i ∂_i F(q) (C q)_i`, the derivative of `F` along the isotropy action.
pub fn infinitesimal_action(c: &QMatrix, f: &Polynomial) -> Polynomial {
    let r = f.nvars();
    let mut out = Polynomial::zero(r);
    for (i, row) in c.iter().enumerate() {
        let di = f.derivative(i);
        if di.is_zero() || rational::is_zero_vec(row) {
            continue;
        }
        out = &out + &(&di * &Polynomial::linear(row));
    }
    out
}

pub fn is_invariant(s: &HomogeneousSRStructure, f: &Polynomial) -> bool {
    isotropy_action_matrices(s).iter().all(|c| infinitesimal_action(c, f).is_zero())
}

/// Signed permutation `q_i -> sign_i q_{perm_i}`.
#[derive(Clone, Debug)]
struct SignedPermutation {
    perm: Vec<usize>,
    sign: Vec<i8>,
}

impl SignedPermutation {
    /// Image of the monomial `q^e` under `q -> M q`, as `(sign, exponents)`.
    fn act(&self, e: &[u16]) -> (i8, Exponents) {
        let mut out = vec![0u16; e.len()];
        let mut sign = 1i8;
        for (i, &k) in e.iter().enumerate() {
            out[self.perm[i]] += k;
            if self.sign[i] < 0 && k % 2 == 1 {
                sign = -sign;
            }
        }
        (sign, out)
    }
}

/// `exp(π/2 C) = I + C + C²` when `C³ = -C`, kept if it is a signed permutation.
fn quarter_turn(c: &QMatrix) -> Option<SignedPermutation> {
    let r = c.len();
    let c2 = linalg::mat_mul(c, c, r);
    let c3 = linalg::mat_mul(&c2, c, r);
    if (0..r).any(|i| (0..r).any(|j| &c3[i][j] + &c[i][j] != Q::zero())) {
        return None;
    }
    let mut perm = Vec::with_capacity(r);
    let mut sign = Vec::with_capacity(r);
    for i in 0..r {
        let row: Vec<Q> = (0..r)
            .map(|j| {
                let id = if i == j { Q::one() } else { Q::zero() };
                id + &c[i][j] + &c2[i][j]
            })
            .collect();
        let nonzero: Vec<usize> = (0..r).filter(|&j| !row[j].is_zero()).collect();
        if nonzero.len() != 1 || row[nonzero[0]].abs() != Q::one() {
            return None;
        }
        perm.push(nonzero[0]);
        sign.push(if row[nonzero[0]].is_positive() { 1 } else { -1 });
    }
    Some(SignedPermutation { perm, sign })
}

fn monomials(r: usize, d: usize) -> Vec<Exponents> {
    fn rec(i: usize, left: u16, cur: &mut Exponents, out: &mut Vec<Exponents>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for k in (0..=left).rev() {
            cur[i] = k;
            rec(i + 1, left - k, cur, out);
        }
        cur[i] = 0;
    }
    let mut out = Vec::new();
    if r == 0 {
        return out;
    }
    rec(0, d as u16, &mut vec![0; r], &mut out);
    out
}

/// Signed orbit sums of degree-`d` monomials; orbits on which the signs are inconsistent
/// carry no invariant and are dropped.
fn orbit_sums(r: usize, d: usize, group: &[SignedPermutation]) -> Vec<Vec<(Exponents, i8)>> {
    let all = monomials(r, d);
    let mut seen: HashMap<Exponents, ()> = HashMap::new();
    let mut out = Vec::new();
    for start in all {
        if seen.contains_key(&start) {
            continue;
        }
        let mut signs: HashMap<Exponents, i8> = HashMap::new();
        let mut order = vec![start.clone()];
        signs.insert(start.clone(), 1);
        let mut consistent = true;
        let mut idx = 0;
        while idx < order.len() {
            let e = order[idx].clone();
            let s = signs[&e];
            for g in group {
                let (gs, ge) = g.act(&e);
                let ns = s * gs;
                match signs.get(&ge) {
                    Some(&old) if old != ns => consistent = false,
                    Some(_) => {}
                    None => {
                        signs.insert(ge.clone(), ns);
                        order.push(ge);
                    }
                }
            }
            idx += 1;
        }
        for e in &order {
            seen.insert(e.clone(), ());
        }
        if consistent {
            out.push(order.into_iter().map(|e| {
                let s = signs[&e];
                (e, s)
            }).collect());
        }
    }
    out
}

/// Integer multiple of a rational matrix.
fn integer_matrix(c: &QMatrix) -> Vec<Vec<i128>> {
    let lcm = c
        .iter()
        .flatten()
        .filter(|x| !x.is_zero())
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    c.iter()
        .map(|row| {
            row.iter()
                .map(|x| {
                    (x.numer() * (&lcm / x.denom()))
                        .to_i128()
                        .expect("isotropy action entries fit in i128")
                })
                .collect()
        })
        .collect()
}

fn ipow(x: i128, k: u16) -> i128 {
    (0..k).fold(1i128, |acc, _| acc * x)
}

/// `(L cand)(x)` for a signed orbit sum, with `y = C x` precomputed.
fn eval_action(cand: &[(Exponents, i8)], x: &[i128], y: &[i128]) -> i128 {
    let mut total = 0i128;
    for (e, s) in cand {
        for i in 0..e.len() {
            if e[i] == 0 || y[i] == 0 {
                continue;
            }
            let mut term = i128::from(e[i]) * y[i];
            for (j, &k) in e.iter().enumerate() {
                let k = if j == i { k - 1 } else { k };
                if k > 0 {
                    term *= ipow(x[j], k);
                }
            }
            total += i128::from(*s) * term;
        }
    }
    total
}

fn candidate_polynomial(r: usize, cand: &[(Exponents, i8)]) -> Polynomial {
    let mut p = Polynomial::zero(r);
    for (e, s) in cand {
        p.add_term(e.clone(), rational::q(i64::from(*s)));
    }
    p
}

fn invariants_of_degree(r: usize, d: usize, actions: &[QMatrix], group: &[SignedPermutation]) -> Vec<Polynomial> {
    let candidates = orbit_sums(r, d, group);
    if actions.is_empty() {
        return candidates.iter().map(|c| candidate_polynomial(r, c).normalized()).collect();
    }
    let n = candidates.len();
    if n == 0 {
        return Vec::new();
    }
    let int_actions: Vec<Vec<Vec<i128>>> = actions.iter().map(integer_matrix).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x1d_e6ee + d as u64);
    let mut rows: Vec<Vec<Q>> = Vec::new();
    let mut target = n + 8;
    loop {
        while rows.len() < target {
            let z = rows.len() % int_actions.len();
            let x: Vec<i128> = (0..r).map(|_| rng.random_range(-7i128..=7)).collect();
            let y: Vec<i128> = int_actions[z]
                .iter()
                .map(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum())
                .collect();
            rows.push(
                candidates
                    .iter()
                    .map(|c| Q::from_integer(BigInt::from(eval_action(c, &x, &y))))
                    .collect(),
            );
        }
        let kernel = linalg::nullspace(&rows, n);
        let polys: Vec<Polynomial> = kernel
            .iter()
            .map(|coeffs| {
                candidates
                    .iter()
                    .zip(coeffs)
                    .filter(|(_, a)| !a.is_zero())
                    .fold(Polynomial::zero(r), |acc, (c, a)| &acc + &candidate_polynomial(r, c).scale(a))
            })
            .collect();
        let verified = polys
            .iter()
            .all(|f| actions.iter().all(|c| infinitesimal_action(c, f).is_zero()));
        if verified {
            return polys.into_iter().map(|p| p.normalized()).collect();
        }
        target *= 2;
    }
}

/// Basis of the `k`-invariant polynomials on `m*` of degrees `1..=degree_cap`.
pub fn invariant_polynomials(s: &HomogeneousSRStructure, degree_cap: usize) -> InvariantBasis {
    let r = s.m().dim();
    let actions: Vec<QMatrix> = isotropy_action_matrices(s)
        .into_iter()
        .filter(|c| !c.iter().all(|row| rational::is_zero_vec(row)))
        .collect();
    let group: Vec<SignedPermutation> = actions.iter().filter_map(quarter_turn).collect();
    let per_degree: Vec<Vec<Polynomial>> = (1..=degree_cap)
        .into_par_iter()
        .map(|d| invariants_of_degree(r, d, &actions, &group))
        .collect();
    InvariantBasis { degree_cap, polynomials: per_degree.into_iter().flatten().collect() }
}

#[derive(Clone, Debug, Serialize)]
pub struct NonzeroBracket {
    pub invariant: String,
    pub bracket: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct BracketReport {
    pub degree_cap: usize,
    pub invariants_checked: usize,
    pub all_vanish: bool,
    pub nonzero: Vec<NonzeroBracket>,
}

/// `{H, F}` restricted to the annihilator of `k` for every invariant `F` up to `degree_cap`.
pub fn go_test_bracket(s: &HomogeneousSRStructure, degree_cap: usize) -> BracketReport {
    let basis = invariant_polynomials(s, degree_cap);
    bracket_report(s, &basis)
}

pub fn bracket_report(s: &HomogeneousSRStructure, basis: &InvariantBasis) -> BracketReport {
    let h = hamiltonian_polynomial_m(s);
    let nonzero: Vec<NonzeroBracket> = basis
        .polynomials
        .par_iter()
        .filter_map(|f| {
            let b = reduced_bracket(s, &h, f).expect("variables match m");
            (!b.is_zero()).then(|| NonzeroBracket {
                invariant: f.display_with(M_PREFIX).to_string(),
                bracket: b.display_with(M_PREFIX).to_string(),
            })
        })
        .collect();
    BracketReport {
        degree_cap: basis.degree_cap,
        invariants_checked: basis.polynomials.len(),
        all_vanish: nonzero.is_empty(),
        nonzero,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplementSource {
    Grading,
    Declared,
}

#[derive(Clone, Debug, Serialize)]
pub struct SkewReport {
    pub complement: ComplementSource,
    /// The metric extension used on the complement.
    pub extension: String,
    /// `|M_X + M_X^T|` (Frobenius) for each basis vector `X` of `Δ`.
    pub asymmetry: Vec<f64>,
    pub max_asymmetry: f64,
    pub all_skew: bool,
    pub all_zero: bool,
    /// Number of grading layers, when the structure is Carnot.
    pub step: Option<usize>,
    /// A `Δ` vector whose operator is not skew-symmetric.
    pub witness: Option<Vec<f64>>,
    /// Skew operators on a nilpotent algebra must vanish, which forces step at most 2.
    pub step_consistent: Option<bool>,
}

/// Matrices of `π_{Δ⊥} ∘ ad X` on the complement `Δ⊥` of `Δ` in `m`, in a basis declared
/// orthonormal (identity extension of the metric).
pub fn carnot_skew_test(s: &HomogeneousSRStructure) -> crate::error::Result<SkewReport> {
    let n = s.dim();
    let (source, complement) = match (s.grading(), s.complement()) {
        (Some(layers), _) => {
            let vectors: Vec<Vec<Q>> = layers[1..].iter().flat_map(|l| l.basis().to_vec()).collect();
            (ComplementSource::Grading, vectors)
        }
        (None, Some(c)) => (ComplementSource::Declared, c.basis().to_vec()),
        (None, None) => return Err(crate::error::Error::NoComplement),
    };
    let delta = s.delta().basis();
    let c = complement.len();
    let mut frame: Vec<Vec<Q>> = delta.to_vec();
    frame.extend(complement.iter().cloned());
    frame.extend(s.k().basis().iter().cloned());
    let to_frame = linalg::inverse(&linalg::transpose(&frame, n)).ok_or(crate::error::Error::DependentBasis)?;
    let d = delta.len();
    let mut asymmetry = Vec::new();
    let mut all_skew = true;
    let mut all_zero = true;
    let mut witness: Option<(f64, Vec<f64>)> = None;
    for x in delta {
        // column b: complement coordinates of [X, c_b]
        let cols: Vec<Vec<Q>> = complement
            .iter()
            .map(|cb| {
                let coords = linalg::mat_vec(&to_frame, &s.algebra().bracket_q_unchecked(x, cb));
                coords[d..d + c].to_vec()
            })
            .collect();
        let mut norm2 = 0.0;
        for a in 0..c {
            for b in 0..c {
                let sym = &cols[b][a] + &cols[a][b];
                if !sym.is_zero() {
                    all_skew = false;
                }
                if !cols[b][a].is_zero() {
                    all_zero = false;
                }
                norm2 += rational::to_f64(&sym).powi(2);
            }
        }
        let norm = norm2.sqrt();
        if norm > 0.0 && witness.as_ref().is_none_or(|(w, _)| norm > *w) {
            witness = Some((norm, rational::vec_to_f64(x)));
        }
        asymmetry.push(norm);
    }
    let step = s.grading().map(<[_]>::len);
    let max_asymmetry = asymmetry.iter().copied().fold(0.0, f64::max);
    Ok(SkewReport {
        complement: source,
        extension: "B on Δ, identity on the complement basis".into(),
        asymmetry,
        max_asymmetry,
        all_skew,
        all_zero,
        step,
        witness: witness.map(|(_, x)| x),
        step_consistent: step.map(|st| !all_skew || (all_zero && st <= 2)),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GoStatus {
    #[serde(rename = "GO_affirmed_up_to_degree")]
    AffirmedUpToDegree,
    #[serde(rename = "GO_refuted_with_witness")]
    RefutedWithWitness,
    #[serde(rename = "evidence_only")]
    EvidenceOnly,
}

#[derive(Clone, Debug, Serialize)]
pub struct RefutationWitness {
    pub skew_vector: Option<Vec<f64>>,
    pub momentum: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GoVerdict {
    pub verdict: GoStatus,
    pub degree_cap: usize,
    pub isotropy_connected: bool,
    pub bracket: BracketReport,
    pub skew: Option<SkewReport>,
    pub scan: ScanSummary,
    pub witness: Option<RefutationWitness>,
    pub notes: Vec<String>,
}

pub fn go_verdict(s: &HomogeneousSRStructure, degree_cap: usize, samples: usize, seed: u64) -> GoVerdict {
    let bracket = go_test_bracket(s, degree_cap);
    let skew = carnot_skew_test(s).ok();
    let scan = scan_homogeneous(s, samples, seed);
    let mut notes = Vec::new();
    if !s.isotropy_connected() {
        notes.push("isotropy group is disconnected; only infinitesimal invariance was used".into());
    }
    let carnot = s.grading().is_some();
    let skew_fails = skew.as_ref().is_some_and(|r| !r.all_skew);
    let counterexample = scan.counterexamples.first().map(|c| c.momentum.clone());
    let (verdict, witness) = if carnot && skew_fails {
        notes.push("skew-symmetry fails on a Carnot structure".into());
        let w = RefutationWitness { skew_vector: skew.as_ref().and_then(|r| r.witness.clone()), momentum: counterexample };
        (GoStatus::RefutedWithWitness, Some(w))
    } else if bracket.all_vanish && s.isotropy_connected() && scan.not_homogeneous == 0 && !skew_fails {
        notes.push(format!("all brackets vanish for invariants of degree <= {degree_cap}"));
        (GoStatus::AffirmedUpToDegree, None)
    } else {
        if scan.not_homogeneous > 0 {
            notes.push(format!("{} sampled momenta are not homogeneous", scan.not_homogeneous));
        }
        let w = counterexample.map(|m| RefutationWitness { skew_vector: None, momentum: Some(m) });
        (GoStatus::EvidenceOnly, w)
    };
    GoVerdict {
        verdict,
        degree_cap,
        isotropy_connected: s.isotropy_connected(),
        bracket,
        skew,
        scan,
        witness,
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_enumeration() {
        assert_eq!(monomials(3, 2).len(), 6);
        assert_eq!(monomials(21, 4).len(), 10626);
        assert_eq!(monomials(2, 1), vec![vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn rotation_quarter_turn() {
        // C = generator of rotations of (q1, q2): (C q)_1 = -q2, (C q)_2 = q1
        let c = vec![
            vec![rational::q(0), rational::q(-1), rational::q(0)],
            vec![rational::q(1), rational::q(0), rational::q(0)],
            vec![rational::q(0), rational::q(0), rational::q(0)],
        ];
        let g = quarter_turn(&c).unwrap();
        let orbits = orbit_sums(3, 2, &[g]);
        let polys: Vec<String> = orbits.iter().map(|o| candidate_polynomial(3, o).to_string()).collect();
        assert!(polys.contains(&"p1^2 + p2^2".to_string()));
        assert!(polys.contains(&"p3^2".to_string()));
        let invariants = invariants_of_degree(3, 2, &[c], &[quarter_turn(&c_rot()).unwrap()]);
        assert_eq!(invariants.len(), 2);
    }

    fn c_rot() -> QMatrix {
        vec![
            vec![rational::q(0), rational::q(-1), rational::q(0)],
            vec![rational::q(1), rational::q(0), rational::q(0)],
            vec![rational::q(0), rational::q(0), rational::q(0)],
        ]
    }
}

//! Fixed-step RK4 integration of the vertical system, horizontal reconstruction in a
//! matrix representation, the closed-form axisymmetric flow and fixed-point search.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::{dh_raw, hamiltonian_raw, vertical_field_raw, vertical_jacobian};
use crate::linalg;
use crate::polynomial::Polynomial;
use crate::rational::{self, Q};
use crate::sampling::MomentumSampler;
use crate::structure::{HomogeneousSRStructure, Momentum};

pub const DEFAULT_STEP: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub momenta: Vec<Momentum>,
    pub group_points: Option<Vec<DMatrix<f64>>>,
    /// `H(p(t))` per sample.
    pub hamiltonian: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &Momentum {
        self.momenta.last().expect("trajectory has at least one sample")
    }

    pub fn max_energy_drift(&self) -> f64 {
        let h0 = self.hamiltonian[0];
        self.hamiltonian.iter().map(|h| (h - h0).abs()).fold(0.0, f64::max)
    }

    /// `sup_t |F(p(t)) - F(p(0))|`.
    pub fn max_drift_of(&self, f: &Polynomial) -> f64 {
        let f0 = f.eval(self.momenta[0].coords());
        self.momenta
            .iter()
            .map(|p| (f.eval(p.coords()) - f0).abs())
            .fold(0.0, f64::max)
    }

    /// Writes `t,p_1..p_n,H,<names>` and, when present, the group matrix entries.
    pub fn write_csv<W: Write>(&self, mut out: W, casimirs: &[(String, Polynomial)]) -> std::io::Result<()> {
        let n = self.momenta[0].coords().len();
        let mut header: Vec<String> = vec!["t".into()];
        header.extend((1..=n).map(|i| format!("p_{i}")));
        header.push("H".into());
        header.extend(casimirs.iter().map(|(name, _)| name.clone()));
        let size = self.group_points.as_ref().map(|g| g[0].nrows()).unwrap_or(0);
        for i in 1..=size {
            for j in 1..=size {
                header.push(if size < 10 { format!("g_{i}{j}") } else { format!("g_{i}_{j}") });
            }
        }
        writeln!(out, "{}", header.join(","))?;
        for (idx, (t, p)) in self.times.iter().zip(&self.momenta).enumerate() {
            let mut row: Vec<String> = vec![fmt_float(*t)];
            row.extend(p.coords().iter().map(|x| fmt_float(*x)));
            row.push(fmt_float(self.hamiltonian[idx]));
            row.extend(casimirs.iter().map(|(_, f)| fmt_float(f.eval(p.coords()))));
            if let Some(g) = &self.group_points {
                let m = &g[idx];
                for i in 0..size {
                    for j in 0..size {
                        row.push(fmt_float(m[(i, j)]));
                    }
                }
            }
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Seventeen significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn rk4_step<F: Fn(&[f64]) -> Vec<f64>>(f: &F, y: &[f64], h: f64) -> Vec<f64> {
    let axpy = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + s * y).collect() };
    let k1 = f(y);
    let k2 = f(&axpy(y, 0.5 * h, &k1));
    let k3 = f(&axpy(y, 0.5 * h, &k2));
    let k4 = f(&axpy(y, h, &k3));
    (0..y.len())
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Grid `0, step, 2 step, ...` ending exactly at `t_end`.
fn time_grid(t_end: f64, step: f64) -> Vec<f64> {
    let n = (t_end / step + 1e-9).floor() as usize;
    let mut times: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
    let last = *times.last().expect("nonempty");
    if t_end - last > 1e-12 * t_end.max(1.0) {
        times.push(t_end);
    } else if let Some(l) = times.last_mut() {
        *l = t_end;
    }
    times
}

fn check_times(t_end: f64, step: f64) -> Result<()> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::InvalidArgument(format!("final time must be positive, got {t_end}")));
    }
    if !(step.is_finite() && step > 0.0 && step <= t_end) {
        return Err(Error::InvalidArgument(format!("step must lie in (0, T], got {step}")));
    }
    Ok(())
}

/// Outcome of an integration that may stop early on a non-finite state.
#[derive(Clone, Debug)]
pub struct Integration {
    pub trajectory: Trajectory,
    /// Time of the last valid sample when the state blew up.
    pub blow_up: Option<f64>,
}

/// RK4 integration of `ṗ = p([d_pH, ·])`, keeping every valid sample.
pub fn integrate_vertical_partial(
    s: &HomogeneousSRStructure,
    p0: &Momentum,
    t_end: f64,
    step: f64,
) -> Result<Integration> {
    check_times(t_end, step)?;
    let grid = time_grid(t_end, step);
    let field = |p: &[f64]| vertical_field_raw(s, p);
    let mut times = vec![0.0];
    let mut states = vec![p0.coords().to_vec()];
    let mut energies = vec![hamiltonian_raw(s, p0.coords())];
    let mut blow_up = None;
    for w in grid.windows(2) {
        let next = rk4_step(&field, states.last().expect("nonempty"), w[1] - w[0]);
        let h = hamiltonian_raw(s, &next);
        if !h.is_finite() || next.iter().any(|x| !x.is_finite()) {
            blow_up = Some(w[0]);
            break;
        }
        times.push(w[1]);
        states.push(next);
        energies.push(h);
    }
    Ok(Integration {
        trajectory: Trajectory {
            times,
            momenta: states.into_iter().map(Momentum::from_raw).collect(),
            group_points: None,
            hamiltonian: energies,
        },
        blow_up,
    })
}

/// RK4 integration; a non-finite state is reported with the last valid time.
pub fn integrate_vertical(s: &HomogeneousSRStructure, p0: &Momentum, t_end: f64, step: f64) -> Result<Trajectory> {
    let run = integrate_vertical_partial(s, p0, t_end, step)?;
    match run.blow_up {
        Some(time) => Err(Error::NonFinite { time }),
        None => Ok(run.trajectory),
    }
}

fn rep_image(rep: &[Vec<Vec<Q>>], x: &[f64]) -> DMatrix<f64> {
    let size = rep[0].len();
    let mut out = DMatrix::zeros(size, size);
    for (m, xi) in rep.iter().zip(x) {
        if *xi == 0.0 {
            continue;
        }
        out += linalg::to_dmatrix(m, size) * *xi;
    }
    out
}

/// Solves `Ġ = G ρ(d_pH(p(t)))`, `G(0) = I`, on the trajectory's grid. Within a step the
/// momentum is interpolated by the cubic Hermite polynomial through both endpoints and
/// their vertical-field derivatives.
pub fn integrate_horizontal(s: &HomogeneousSRStructure, traj: &Trajectory) -> Result<Trajectory> {
    let rep = s.representation().ok_or(Error::MissingRepresentation)?;
    let size = rep[0].len();
    let generator = |p: &[f64]| rep_image(rep, &dh_raw(s, p));
    let mut g = DMatrix::<f64>::identity(size, size);
    let mut points = vec![g.clone()];
    for (w, pw) in traj.times.windows(2).zip(traj.momenta.windows(2)) {
        let h = w[1] - w[0];
        let (p0, p1) = (pw[0].coords(), pw[1].coords());
        let (f0, f1) = (vertical_field_raw(s, p0), vertical_field_raw(s, p1));
        let mid: Vec<f64> = (0..p0.len())
            .map(|i| 0.5 * (p0[i] + p1[i]) + h / 8.0 * (f0[i] - f1[i]))
            .collect();
        let (a0, am, a1) = (generator(p0), generator(&mid), generator(p1));
        let k1 = &g * &a0;
        let k2 = (&g + &k1 * (0.5 * h)) * &am;
        let k3 = (&g + &k2 * (0.5 * h)) * &am;
        let k4 = (&g + &k3 * h) * &a1;
        g = &g + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { time: w[0] });
        }
        points.push(g.clone());
    }
    let mut out = traj.clone();
    out.group_points = Some(points);
    Ok(out)
}

/// Index of the symmetry axis used by the closed-form axisymmetric flow.
pub const AXIS: usize = 2;

/// Checks that `Δ = span(e_1, e_2)` with a metric proportional to the identity and
/// that `ad e_3` preserves `Δ`.
pub fn check_axisymmetric(s: &HomogeneousSRStructure) -> Result<()> {
    let n = s.dim();
    if n < 3 {
        return Err(Error::NotAxisymmetric("dimension below 3".into()));
    }
    let plane = crate::subspace::Subspace::new(n, vec![rational::unit(n, 0), rational::unit(n, 1)])?;
    if *s.delta() != plane {
        return Err(Error::NotAxisymmetric("distribution is not span(e1, e2)".into()));
    }
    let b = s.metric();
    if b[0][1] != b[1][0] || !num_traits::Zero::is_zero(&b[0][1]) || b[0][0] != b[1][1] {
        return Err(Error::NotAxisymmetric("metric is not rotation invariant".into()));
    }
    let axis = rational::unit(n, AXIS);
    let ad: Vec<Vec<Q>> = plane
        .basis()
        .iter()
        .map(|x| s.algebra().bracket_q_unchecked(&axis, x))
        .collect();
    if !ad.iter().all(|v| plane.contains(v)) {
        return Err(Error::NotAxisymmetric("e3 does not rotate the distribution".into()));
    }
    Ok(())
}

/// `p(t) = exp(-t κ p_3 A) p_0` with `(A p)_j = p([e_3, e_j])`.
pub fn closed_form_axisymmetric(s: &HomogeneousSRStructure, p0: &Momentum, t: f64, kappa: f64) -> Result<Momentum> {
    check_axisymmetric(s)?;
    let n = s.dim();
    let mut axis = vec![0.0; n];
    axis[AXIS] = 1.0;
    let a = s.algebra().ad_matrix(&axis)?.transpose();
    let rate = -t * kappa * p0.coords()[AXIS];
    let flow = (a * rate).exp();
    let p = flow * DVector::from_column_slice(p0.coords());
    Ok(Momentum::from_raw(p.iter().copied().collect()))
}

pub const FIXED_POINT_TOL: f64 = 1e-10;
pub const FIXED_POINT_DEDUP: f64 = 1e-6;
const NEWTON_ITERATIONS: usize = 100;

/// Gauss–Newton polish of `V(p) = 0`, `H(p) = 1/2` in the coordinates `q_i = p(m_i)`.
pub fn polish_fixed_point(s: &HomogeneousSRStructure, seed: &Momentum) -> Option<Momentum> {
    let r = s.m().dim();
    let n = s.dim();
    let dual = linalg::to_dmatrix(&s.dual_rows()[..r], n);
    let mbasis = linalg::columns_to_dmatrix(&s.adapted_basis()[..r], n);
    let ham = s.hamiltonian_matrix();
    let mut q = DVector::from_vec(s.m_coords(seed.coords()));
    let residual = |p: &DVector<f64>| -> DVector<f64> {
        let v = DVector::from_vec(vertical_field_raw(s, p.as_slice()));
        let vm = mbasis.transpose() * v;
        let h = 0.5 * p.dot(&(ham * p));
        DVector::from_iterator(r + 1, vm.iter().copied().chain(std::iter::once(h - 0.5)))
    };
    for _ in 0..NEWTON_ITERATIONS {
        let p = dual.transpose() * &q;
        let res = residual(&p);
        if res.norm() < FIXED_POINT_TOL {
            return Some(Momentum::from_raw(p.iter().copied().collect()));
        }
        let jv = vertical_jacobian(s, p.as_slice());
        let top = mbasis.transpose() * jv * dual.transpose();
        let grad_h = (ham * &p).transpose() * dual.transpose();
        let mut jac = DMatrix::zeros(r + 1, r);
        jac.view_mut((0, 0), (r, r)).copy_from(&top);
        jac.row_mut(r).copy_from(&grad_h);
        let delta = linalg::lstsq_min_norm(&jac, &res);
        q -= delta;
        if q.iter().any(|x| !x.is_finite()) {
            return None;
        }
    }
    let p = dual.transpose() * &q;
    (residual(&p).norm() < FIXED_POINT_TOL).then(|| Momentum::from_raw(p.iter().copied().collect()))
}

/// Samples seeds on `H = 1/2`, polishes them and returns deduplicated fixed points in
/// seed order.
pub fn find_fixed_points_seeded(s: &HomogeneousSRStructure, samples: usize, seed: u64) -> Vec<Momentum> {
    let sampler = MomentumSampler::new(s);
    let polished: Vec<Option<Momentum>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| polish_fixed_point(s, &sampler.sample(seed, i)))
        .collect();
    let mut found: Vec<Momentum> = Vec::new();
    for p in polished.into_iter().flatten() {
        let duplicate = found.iter().any(|f| {
            f.coords()
                .iter()
                .zip(p.coords())
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
                < FIXED_POINT_DEDUP
        });
        if !duplicate {
            found.push(p);
        }
    }
    found
}

pub fn find_fixed_points(s: &HomogeneousSRStructure, samples: usize) -> Vec<Momentum> {
    find_fixed_points_seeded(s, samples, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::LieAlgebra;
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
    fn grid_ends_exactly() {
        let g = time_grid(1.0, 0.3);
        assert_eq!(g.len(), 5);
        assert_eq!(*g.last().unwrap(), 1.0);
        let g = time_grid(1.0, 0.25);
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn heisenberg_rotation() {
        let s = heisenberg();
        let p0 = s.momentum(&[1.0, 0.0, 1.0]).unwrap();
        let traj = integrate_vertical(&s, &p0, 1.0, 1e-3).unwrap();
        let p = traj.last().coords();
        assert!((p[0] - 1f64.cos()).abs() < 1e-10);
        assert!((p[1] - 1f64.sin()).abs() < 1e-10);
        assert!(integrate_vertical(&s, &p0, 0.0, 1e-3).is_err());
    }

    #[test]
    fn fixed_points_of_heisenberg_lie_in_plane() {
        let s = heisenberg();
        let pts = find_fixed_points(&s, 50);
        assert!(!pts.is_empty());
        assert!(pts.iter().all(|p| p.coords()[2].abs() < 1e-8));
    }

    #[test]
    fn central_axis_gives_constant_closed_form() {
        let s = heisenberg();
        let p0 = s.momentum(&[1.0, 0.0, 1.0]).unwrap();
        // Heisenberg: e3 is central, so it preserves Δ and the closed form is the identity flow
        let p = closed_form_axisymmetric(&s, &p0, 1.0, 1.0).unwrap();
        assert_eq!(p.coords(), p0.coords());
    }
}

//! Worked examples checked against values computed independently of the library.

use nalgebra::DMatrix;
use srgeo::existence::{construct_homogeneous_geodesic, eigen_setup, factorize_by_ideal, verify_eigenconstruction, Route};
use srgeo::go_analysis::{carnot_skew_test, go_verdict, invariant_polynomials, isotropy_action_matrices, GoStatus};
use srgeo::hamiltonian::{hamiltonian_value, vertical_field};
use srgeo::homogeneity::{check_homogeneous, Verdict};
use srgeo::integrator::{closed_form_axisymmetric, find_fixed_points, integrate_horizontal, integrate_vertical};
use srgeo::linalg;
use srgeo::models::spec_file::ModelFile;
use srgeo::models::{is_m_casimir, load_model, replay_facts, ModelSpec, MODEL_NAMES};
use srgeo::rational::{q, qf, to_f64, unit};
use srgeo::sampling::MomentumSampler;
use srgeo::{Error, Polynomial, Subspace};

fn model(name: &str) -> ModelSpec {
    load_model(name).unwrap()
}

fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn killing_forms_of_small_algebras() {
    let so3 = model("so3_kp");
    let k = so3.structure.algebra().killing_form();
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(k[i][j], if i == j { q(-2) } else { q(0) });
        }
    }
    let sl2 = model("sl2_kp");
    let k = sl2.structure.algebra().killing_form();
    let diag = [q(2), q(2), q(-2)];
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(k[i][j], if i == j { diag[i].clone() } else { q(0) });
        }
    }
}

#[test]
fn rolling_sphere_killing_kernel_is_the_abelian_factor() {
    let spec = model("rolling_sphere");
    let kernel = spec.structure.algebra().killing_kernel();
    let expected = Subspace::new(5, vec![unit(5, 3), unit(5, 4)]).unwrap();
    assert_eq!(kernel, expected);
}

#[test]
fn heisenberg_flow_is_a_rotation() {
    let spec = model("heisenberg");
    let s = &spec.structure;
    let p0 = s.momentum_from_m(&[1.0, 0.0, 1.0]).unwrap();
    let traj = integrate_vertical(s, &p0, 3.0, 1e-3).unwrap();
    for (t, p) in traj.times.iter().zip(&traj.momenta).step_by(250) {
        let expected = [t.cos(), t.sin(), 1.0];
        assert!(sup(&s.m_coords(p.coords()), &expected) < 1e-9, "t = {t}");
    }
}

#[test]
fn heisenberg_returns_after_full_period() {
    let spec = model("heisenberg");
    let s = &spec.structure;
    let p0 = s.momentum_from_m(&[1.0, 0.0, 1.0]).unwrap();
    let traj = integrate_vertical(s, &p0, 2.0 * std::f64::consts::PI, 1e-3).unwrap();
    assert!(sup(traj.last().coords(), p0.coords()) < 1e-7);
}

#[test]
fn rk4_error_shrinks_sixteenfold_under_halving() {
    let spec = model("so3_generic");
    let s = &spec.structure;
    let p0 = s.momentum(&[0.3, 0.9, 0.5]).unwrap();
    let reference = integrate_vertical(s, &p0, 1.0, 1e-4).unwrap();
    let err = |h: f64| sup(integrate_vertical(s, &p0, 1.0, h).unwrap().last().coords(), reference.last().coords());
    let factor = err(0.1) / err(0.05);
    assert!((12.0..=20.0).contains(&factor), "factor {factor}");
}

#[test]
fn cartan_casimirs_are_exact_and_conserved() {
    let spec = model("cartan");
    let s = &spec.structure;
    assert_eq!(spec.casimirs.len(), 3);
    for (name, c) in &spec.casimirs {
        assert!(is_m_casimir(s, c), "{name}");
    }
    assert!(!is_m_casimir(s, &Polynomial::var(6, 0)));
    let p0 = MomentumSampler::new(s).sample(9, 0);
    let traj = integrate_vertical(s, &p0, 5.0, 1e-3).unwrap();
    for (name, c) in &spec.casimirs {
        assert!(traj.max_drift_of(c) < 1e-10, "{name}");
    }
}

#[test]
fn euler_top_fixed_points_are_the_principal_axes() {
    let spec = model("so3_generic");
    let mut found: Vec<Vec<f64>> = find_fixed_points(&spec.structure, 200).into_iter().map(|p| p.into_vec()).collect();
    // H = 1/2 sum p_i^2 / B_ii with B = diag(1, 2, 3)
    let mut axes = Vec::new();
    for (i, b) in [1.0f64, 2.0, 3.0].iter().enumerate() {
        for sign in [1.0, -1.0] {
            let mut v = vec![0.0; 3];
            v[i] = sign * b.sqrt();
            axes.push(v);
        }
    }
    assert_eq!(found.len(), 6);
    for axis in &axes {
        let idx = found.iter().position(|p| sup(p, axis) < 1e-8).expect("axis found");
        found.remove(idx);
    }
}

#[test]
fn cartan_homogeneity_examples() {
    let spec = model("cartan");
    let s = &spec.structure;
    let on_axis = s.momentum_from_input(&[1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
    assert_eq!(check_homogeneous(s, &on_axis).verdict, Verdict::Homogeneous);
    let off_axis = s.momentum_from_input(&[1.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
    let cert = check_homogeneous(s, &off_axis);
    assert_eq!(cert.verdict, Verdict::NotHomogeneous);
    assert!(cert.residual > 1e-4);
    assert!(matches!(
        s.momentum_from_input(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.5]),
        Err(Error::NotInAnnihilator { .. })
    ));
}

#[test]
fn without_isotropy_homogeneous_means_fixed_point() {
    let spec = model("rolling_sphere");
    let s = &spec.structure;
    let sampler = MomentumSampler::new(s);
    for i in 0..50 {
        let mut p = sampler.sample(4, i).into_vec();
        if i % 2 == 0 {
            // P = 0 makes the so3 part an isotropic rotation
            p[3] = 0.0;
            p[4] = 0.0;
        }
        let p = s.momentum(&p).unwrap();
        let fixed = vertical_field(s, &p).iter().all(|v| v.abs() < 1e-12);
        let hom = check_homogeneous(s, &p).verdict == Verdict::Homogeneous;
        assert_eq!(fixed, hom, "sample {i}");
    }
}

/// Number of degree-`d` monomials in complex coordinates of total weight zero, for an
/// `so(2)` action with the given weights on real coordinate pairs plus `fixed` trivial coordinates.
fn so2_invariant_count(pairs: &[i32], fixed: usize, d: usize) -> usize {
    let mut weights: Vec<i32> = pairs.iter().flat_map(|w| [*w, -*w]).collect();
    weights.extend(std::iter::repeat_n(0, fixed));
    fn count(weights: &[i32], d: usize, total: i32) -> usize {
        match weights.split_first() {
            None => usize::from(d == 0 && total == 0),
            Some((w, rest)) => (0..=d).map(|k| count(rest, d - k, total + w * k as i32)).sum(),
        }
    }
    count(&weights, d, 0)
}

#[test]
fn invariant_counts_match_weight_enumeration() {
    let heis = invariant_polynomials(&model("heisenberg").structure, 4);
    for d in 1..=4 {
        assert_eq!(heis.of_degree(d).count(), so2_invariant_count(&[1], 1, d), "heisenberg degree {d}");
    }
    let cartan = invariant_polynomials(&model("cartan").structure, 4);
    for d in 1..=4 {
        assert_eq!(cartan.of_degree(d).count(), so2_invariant_count(&[1, 1], 1, d), "cartan degree {d}");
    }
    // SO(3) on two vectors: free algebra on a.a, b.b, a.b
    let free3 = invariant_polynomials(&model("free_step2_rank3").structure, 4);
    let counts: Vec<usize> = (1..=4).map(|d| free3.of_degree(d).count()).collect();
    assert_eq!(counts, vec![0, 3, 0, 6]);
}

#[test]
fn invariants_are_constant_on_isotropy_orbits() {
    for name in ["cartan", "free_step2_rank3", "so3_axisym"] {
        let s = &model(name).structure;
        let invariants = invariant_polynomials(s, 4).polynomials;
        let r = s.m().dim();
        let point: Vec<f64> = (0..r).map(|i| 0.3 + 0.17 * i as f64).collect();
        for c in isotropy_action_matrices(s) {
            // the action on q is the transpose of the coadjoint generator
            let gen = linalg::to_dmatrix(&c, r);
            let flow = (gen * 0.7).exp();
            let moved = &flow * nalgebra::DVector::from_column_slice(&point);
            for f in &invariants {
                let before = f.eval(&point);
                let after = f.eval(moved.as_slice());
                assert!((before - after).abs() < 1e-9, "{name}: {f}");
            }
        }
    }
}

#[test]
fn cartan_skew_witness_lies_in_first_layer() {
    let s = &model("cartan").structure;
    let report = carnot_skew_test(s).unwrap();
    assert!(!report.all_skew);
    assert_eq!(report.step, Some(3));
    let w = report.witness.unwrap();
    assert!(w[2..].iter().all(|x| x.abs() < 1e-12) && w[..2].iter().any(|x| x.abs() > 0.5));
    let v = go_verdict(s, 4, 100, 0);
    assert_eq!(v.verdict, GoStatus::RefutedWithWitness);
}

#[test]
fn rolling_sphere_reports_counterexamples() {
    let v = go_verdict(&model("rolling_sphere").structure, 4, 200, 0);
    assert_eq!(v.verdict, GoStatus::EvidenceOnly);
    assert!(!v.scan.counterexamples.is_empty());
}

#[test]
fn so3_eigen_operator_is_minus_half_on_the_distribution() {
    let s = &model("so3_kp").structure;
    let setup = eigen_setup(s).unwrap();
    assert_eq!(setup.gamma, *s.delta());
    let g = setup.gamma.dim();
    for i in 0..g {
        for j in 0..g {
            assert_eq!(setup.a[i][j], if i == j { qf(-1, 2) } else { q(0) });
        }
    }
    let res = construct_homogeneous_geodesic(s).unwrap();
    assert_eq!(res.route, Route::Eigenvector);
    assert!(verify_eigenconstruction(s, &res).unwrap().ok);
    assert!((hamiltonian_value(s, &s.momentum(&res.momentum).unwrap()) - 0.5).abs() < 1e-12);
}

#[test]
fn tampered_eigenvector_is_rejected() {
    for name in ["so3_kp", "sl2_kp"] {
        let s = &model(name).structure;
        let mut res = construct_homogeneous_geodesic(s).unwrap();
        assert!(verify_eigenconstruction(s, &res).unwrap().ok, "{name}");
        if let Some(x) = res.audit.eigenvector.as_mut() {
            x[1] += 1e-3;
        }
        assert!(!verify_eigenconstruction(s, &res).unwrap().ok, "{name}");
    }
}

#[test]
fn rolling_sphere_quotient_is_riemannian_so3() {
    let s = &model("rolling_sphere").structure;
    let f = factorize_by_ideal(s, &s.algebra().killing_kernel()).unwrap();
    assert_eq!(f.quotient.dim(), 3);
    assert_eq!(f.quotient.delta().dim(), 3);
    let k = f.quotient.algebra().killing_form();
    for i in 0..3 {
        assert_eq!(k[i][i], q(-2));
    }
    let res = construct_homogeneous_geodesic(s).unwrap();
    assert_eq!(res.route, Route::Factorized);
    assert!(verify_eigenconstruction(s, &res).unwrap().ok);
}

#[test]
fn factorization_rejects_non_ideals_and_the_distribution() {
    let s = &model("cartan").structure;
    let not_ideal = Subspace::new(6, vec![unit(6, 2)]).unwrap();
    assert!(matches!(factorize_by_ideal(s, &not_ideal), Err(Error::NotAnIdeal(_))));
    let whole = Subspace::full(6);
    assert!(matches!(factorize_by_ideal(s, &whole), Err(Error::NotAnIdeal(_))));
    let zero = factorize_by_ideal(s, &Subspace::zero(6)).unwrap();
    assert_eq!(zero.quotient.dim(), 6);
}

#[test]
fn bi_invariant_eigen_momentum_misses_the_annihilator() {
    let s = &model("biinvariant_compact").structure;
    assert!(matches!(construct_homogeneous_geodesic(s), Err(Error::NoEigenvector(_))));
}

#[test]
fn sl2_axisymmetric_closed_form() {
    let spec = model("sl2_axisym");
    let s = &spec.structure;
    let p0 = MomentumSampler::new(s).sample(2, 0);
    let traj = integrate_vertical(s, &p0, 5.0, 1e-3).unwrap();
    for (t, p) in traj.times.iter().zip(&traj.momenta).step_by(100) {
        let exact = closed_form_axisymmetric(s, &p0, *t, spec.kappa.unwrap()).unwrap();
        assert!(sup(exact.coords(), p.coords()) < 1e-9, "t = {t}");
    }
}

#[test]
fn bi_invariant_horizontal_curve_is_a_one_parameter_subgroup() {
    let s = &model("biinvariant_compact").structure;
    let p0 = MomentumSampler::new(s).sample(1, 0);
    let traj = integrate_horizontal(s, &integrate_vertical(s, &p0, 2.0, 1e-2).unwrap()).unwrap();
    let rep = s.representation().unwrap();
    let x = srgeo::hamiltonian::dh(s, &p0);
    let size = rep[0].len();
    let mut gen = DMatrix::<f64>::zeros(size, size);
    for (m, c) in rep.iter().zip(&x) {
        gen += linalg::to_dmatrix(m, size) * *c;
    }
    for (t, g) in traj.times.iter().zip(traj.group_points.as_ref().unwrap()) {
        let exact = (&gen * *t).exp();
        assert!((g - exact).amax() < 1e-9, "t = {t}");
    }
}

#[test]
fn model_files_round_trip() {
    for name in MODEL_NAMES {
        let spec = model(name);
        let text = serde_json::to_string(&ModelFile::from_spec(&spec)).unwrap();
        let back = ModelFile::parse(&text).unwrap().to_spec().unwrap();
        let a: Vec<_> = spec.structure.algebra().nonzero_constants().map(|(i, j, k, c)| (i, j, k, c.clone())).collect();
        let b: Vec<_> = back.structure.algebra().nonzero_constants().map(|(i, j, k, c)| (i, j, k, c.clone())).collect();
        assert_eq!(a, b, "{name}");
        assert_eq!(spec.casimirs, back.casimirs, "{name}");
        assert_eq!(spec.facts, back.facts, "{name}");
    }
}

#[test]
fn recorded_facts_replay() {
    for name in MODEL_NAMES {
        for report in replay_facts(&model(name)) {
            assert!(report.passed, "{name}: {:?} {}", report.fact.claim, report.detail);
        }
    }
}

#[test]
fn polynomial_text_round_trip() {
    let spec = model("cartan");
    let (_, c) = &spec.casimirs[0];
    assert_eq!(c.to_string(), "p1*p5 - p2*p4 + 1/2*p3^2");
    assert_eq!(&Polynomial::parse(6, &c.to_string(), "p").unwrap(), c);
    assert_eq!(to_f64(&c.coefficient(&[0, 0, 2, 0, 0, 0])), 0.5);
}

use proptest::prelude::*;
use srgeo::existence::{eigen_setup, factorize_by_ideal};
use srgeo::hamiltonian::{hamiltonian_value, lie_poisson_bracket, vertical_field};
use srgeo::homogeneity::{check_homogeneous, witness_defect, Verdict};
use srgeo::integrator::integrate_vertical;
use srgeo::linalg;
use srgeo::models::{load_model, MODEL_NAMES};
use srgeo::rational::{dot, q, Q};
use srgeo::sampling::MomentumSampler;
use srgeo::{LieAlgebra, Polynomial};

fn model_name() -> impl Strategy<Value = &'static str> {
    prop::sample::select(MODEL_NAMES.to_vec())
}

fn algebra(name: &str) -> LieAlgebra {
    load_model(name).unwrap().structure.algebra().clone()
}

fn vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bracket_is_antisymmetric_and_satisfies_jacobi(name in model_name(), seed in any::<u64>()) {
        let g = algebra(name);
        let n = g.dim();
        let mut rng = srgeo::sampling::stream_rng(seed, 0);
        use rand::Rng;
        let mut v = || (0..n).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
        let (x, y, z) = (v(), v(), v());
        let xy = g.bracket(&x, &y).unwrap();
        let yx = g.bracket(&y, &x).unwrap();
        prop_assert!(xy.iter().zip(&yx).all(|(a, b)| (a + b).abs() < 1e-12));
        let j1 = g.bracket(&x, &g.bracket(&y, &z).unwrap()).unwrap();
        let j2 = g.bracket(&y, &g.bracket(&z, &x).unwrap()).unwrap();
        let j3 = g.bracket(&z, &xy).unwrap();
        prop_assert!((0..n).all(|i| (j1[i] + j2[i] + j3[i]).abs() < 1e-10));
    }

    #[test]
    fn killing_form_is_ad_invariant(name in model_name(), a in vector(36), b in vector(36), c in vector(36)) {
        let g = algebra(name);
        let n = g.dim();
        let k = linalg::to_dmatrix(&g.killing_form(), n);
        let (x, y, z) = (&a[..n], &b[..n], &c[..n]);
        let form = |u: &[f64], v: &[f64]| {
            let uv = nalgebra::DVector::from_column_slice(u);
            let vv = nalgebra::DVector::from_column_slice(v);
            uv.dot(&(&k * vv))
        };
        let lhs = form(&g.bracket(z, x).unwrap(), y) + form(x, &g.bracket(z, y).unwrap());
        prop_assert!(lhs.abs() < 1e-9 * (1.0 + k.amax()));
    }

    #[test]
    fn sampled_momenta_lie_on_the_unit_level_in_the_annihilator(name in model_name(), seed in any::<u64>(), index in 0u64..1000) {
        let s = &load_model(name).unwrap().structure;
        let p = MomentumSampler::new(s).sample(seed, index);
        prop_assert!((hamiltonian_value(s, &p) - 0.5).abs() < 1e-12);
        prop_assert!(s.annihilator_residual(p.coords()) < 1e-12);
        let again = MomentumSampler::new(s).sample(seed, index);
        prop_assert_eq!(p.coords(), again.coords());
    }

    #[test]
    fn vertical_field_preserves_energy_to_first_order(name in model_name(), seed in any::<u64>()) {
        let s = &load_model(name).unwrap().structure;
        let p = MomentumSampler::new(s).sample(seed, 0);
        let v = vertical_field(s, &p);
        let dh = srgeo::hamiltonian::dh(s, &p);
        let rate: f64 = v.iter().zip(&dh).map(|(a, b)| a * b).sum();
        prop_assert!(rate.abs() < 1e-12);
    }

    #[test]
    fn casimirs_are_conserved_along_cartan_flow(seed in any::<u64>()) {
        let spec = load_model("cartan").unwrap();
        let s = &spec.structure;
        let p0 = MomentumSampler::new(s).sample(seed, 0);
        let traj = integrate_vertical(s, &p0, 1.0, 1e-3).unwrap();
        let scale = 1.0 + p0.norm().powi(2);
        prop_assert!(traj.max_energy_drift() < 1e-10 * scale);
        for (_, c) in &spec.casimirs {
            prop_assert!(traj.max_drift_of(c) < 1e-10 * scale);
        }
    }

    #[test]
    fn homogeneous_witness_satisfies_the_criterion(name in model_name(), seed in any::<u64>()) {
        let s = &load_model(name).unwrap().structure;
        let p = MomentumSampler::new(s).sample(seed, 0);
        let cert = check_homogeneous(s, &p);
        prop_assert_ne!(cert.verdict, Verdict::Inconclusive);
        if let Some(x) = &cert.witness {
            prop_assert!(witness_defect(s, &p, x) < 1e-7);
        }
    }

    #[test]
    fn lifted_quotient_geodesics_stay_homogeneous(name in prop::sample::select(vec!["rolling_sphere", "so3_axisym", "sl2_axisym", "cartan"]), seed in any::<u64>()) {
        let s = &load_model(name).unwrap().structure;
        let ideal = if name == "cartan" {
            srgeo::Subspace::new(6, vec![srgeo::rational::unit(6, 3), srgeo::rational::unit(6, 4)]).unwrap()
        } else {
            s.algebra().killing_kernel()
        };
        let f = factorize_by_ideal(s, &ideal).unwrap();
        let p_hat = MomentumSampler::new(&f.quotient).sample(seed, 0);
        if check_homogeneous(&f.quotient, &p_hat).verdict == Verdict::Homogeneous {
            let p = s.momentum(&f.lift_momentum(p_hat.coords())).unwrap();
            prop_assert_eq!(check_homogeneous(s, &p).verdict, Verdict::Homogeneous);
        }
    }

    #[test]
    fn lie_poisson_bracket_is_antisymmetric(coeffs in prop::collection::vec(-3i64..4, 6)) {
        let g = algebra("cartan");
        let f = Polynomial::linear(&coeffs.iter().map(|c| q(*c)).collect::<Vec<Q>>());
        let h = &f * &Polynomial::var(6, 2);
        let fg = lie_poisson_bracket(&g, &f, &h).unwrap();
        let gf = lie_poisson_bracket(&g, &h, &f).unwrap();
        prop_assert!((&fg + &gf).is_zero());
    }

    #[test]
    fn polynomial_text_round_trips(terms in prop::collection::vec((prop::collection::vec(0u16..3, 4), -5i64..6, 1i64..4), 0..6)) {
        let mut f = Polynomial::zero(4);
        for (e, num, den) in terms {
            f.add_term(e, srgeo::rational::qf(num, den));
        }
        let text = f.to_string();
        prop_assert_eq!(Polynomial::parse(4, &text, "p").unwrap(), f);
    }

    #[test]
    fn exact_nullspace_satisfies_rank_nullity(rows in prop::collection::vec(prop::collection::vec(-3i64..4, 5), 1..5)) {
        let m: Vec<Vec<Q>> = rows.iter().map(|r| r.iter().map(|x| q(*x)).collect()).collect();
        let null = linalg::nullspace(&m, 5);
        prop_assert_eq!(linalg::rank(&m, 5) + null.len(), 5);
        for v in &null {
            prop_assert!(m.iter().all(|r| dot(r, v) == q(0)));
        }
    }
}

#[test]
fn gamma_splits_and_is_invariant_under_a() {
    for name in ["so3_kp", "sl2_kp", "so3_generic"] {
        let s = &load_model(name).unwrap().structure;
        let setup = eigen_setup(s).unwrap();
        let n = s.dim();
        assert_eq!(setup.gamma.sum(&setup.gamma_perp).dim(), n, "{name}");
        assert_eq!(setup.gamma.intersection(&setup.gamma_perp).dim(), 0, "{name}");
        // in frame coordinates Γ is spanned by the first dim Γ unit vectors
        let g = setup.gamma.dim();
        for row in setup.a.iter().skip(g) {
            assert!(row[..g].iter().all(|x| *x == q(0)), "{name}");
        }
    }
}

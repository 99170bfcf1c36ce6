//! Constructors for the bundled models.

use crate::error::{Error, Result};
use crate::lie::{algebra_from_matrices, LieAlgebra};
use crate::linalg::{self, QMatrix};
use crate::polynomial::Polynomial;
use crate::rational::{q, qf, unit, zeros, Q};
use crate::structure::{HomogeneousSRStructure, StructureParts};

use super::{Claim, KnownFact, ModelSpec, Source};

pub const MODEL_NAMES: &[&str] = &[
    "heisenberg",
    "free_step2_rank2",
    "free_step2_rank3",
    "free_step2_rank4",
    "free_step2_rank5",
    "free_step2_rank6",
    "cartan",
    "so3_axisym",
    "so3_generic",
    "sl2_axisym",
    "so3_kp",
    "sl2_kp",
    "rolling_sphere",
    "biinvariant_compact",
];

pub fn load_model(name: &str) -> Result<ModelSpec> {
    match name {
        "heisenberg" => heisenberg(),
        "cartan" => cartan(),
        "so3_axisym" => so3_axisym(),
        "so3_generic" => so3_generic(),
        "sl2_axisym" => sl2_axisym(),
        "so3_kp" => so3_kp(),
        "sl2_kp" => sl2_kp(),
        "rolling_sphere" => rolling_sphere(),
        "biinvariant_compact" => biinvariant_compact(),
        other => match other.strip_prefix("free_step2_rank").map(str::parse::<usize>) {
            Some(Ok(r)) if (2..=6).contains(&r) => generate_free_step2(r),
            _ => Err(Error::UnknownModel(name.to_string())),
        },
    }
}

fn square(size: usize) -> QMatrix {
    vec![zeros(size); size]
}

/// Matrix sending `e_from` to `e_to` and `e_to` to `-e_from`, placed at `offset`.
fn rotation(size: usize, offset: usize, from: usize, to: usize) -> QMatrix {
    let mut m = square(size);
    m[offset + to][offset + from] = q(1);
    m[offset + from][offset + to] = q(-1);
    m
}

fn add(a: &QMatrix, b: &QMatrix) -> QMatrix {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
        .collect()
}

fn scaled(a: &QMatrix, c: &Q) -> QMatrix {
    a.iter().map(|r| r.iter().map(|x| x * c).collect()).collect()
}

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn diagonal(entries: &[Q]) -> QMatrix {
    let n = entries.len();
    (0..n)
        .map(|i| {
            let mut r = zeros(n);
            r[i] = entries[i].clone();
            r
        })
        .collect()
}

fn units(n: usize, idx: &[usize]) -> QMatrix {
    idx.iter().map(|&i| unit(n, i)).collect()
}

fn fact(claim: Claim, source: Source, note: &str) -> KnownFact {
    KnownFact { claim, source, note: (!note.is_empty()).then(|| note.to_string()) }
}

/// Generators `L_1, L_2, L_3` of rotations of `R^3` (`L_1 e_2 = e_3` and cyclic), at `offset`.
fn so3_generators(size: usize, offset: usize) -> [QMatrix; 3] {
    [rotation(size, offset, 1, 2), rotation(size, offset, 2, 0), rotation(size, offset, 0, 1)]
}

/// `g = V ⊕ Λ²V ⊕ so(V)` realized by `(2r+1)`-square matrices.
pub fn generate_free_step2(rank: usize) -> Result<ModelSpec> {
    if !(2..=8).contains(&rank) {
        return Err(Error::InvalidArgument(format!("rank must lie in 2..=8, got {rank}")));
    }
    let r = rank;
    let size = 2 * r + 1;
    let pairs: Vec<(usize, usize)> = (0..r).flat_map(|a| (a + 1..r).map(move |b| (a, b))).collect();
    let mut mats = Vec::new();
    let mut names = Vec::new();
    for a in 0..r {
        let mut m = square(size);
        m[a][r] = q(1);
        m[r][r + 1 + a] = q(1);
        mats.push(m);
        names.push(format!("e{}", a + 1));
    }
    for &(a, b) in &pairs {
        let mut m = square(size);
        m[a][r + 1 + b] = q(1);
        m[b][r + 1 + a] = q(-1);
        mats.push(m);
        names.push(format!("w{}{}", a + 1, b + 1));
    }
    for &(a, b) in &pairs {
        let m = add(&rotation(size, 0, a, b), &rotation(size, r + 1, a, b));
        mats.push(m);
        names.push(format!("J{}{}", a + 1, b + 1));
    }
    let algebra = algebra_from_matrices(names, &mats)?;
    let n = algebra.dim();
    let nil = r + pairs.len();
    let mut parts = StructureParts::new(
        algebra,
        units(n, &(nil..n).collect::<Vec<_>>()),
        units(n, &(0..nil).collect::<Vec<_>>()),
        units(n, &(0..r).collect::<Vec<_>>()),
        linalg::identity(r),
    );
    parts.grading = Some(vec![units(n, &(0..r).collect::<Vec<_>>()), units(n, &(r..nil).collect::<Vec<_>>())]);
    parts.representation = Some(mats);
    let structure = HomogeneousSRStructure::new(parts)?;
    Ok(ModelSpec {
        name: format!("free_step2_rank{r}"),
        structure,
        casimirs: Vec::new(),
        facts: vec![fact(
            Claim::GeodesicOrbit { value: true },
            Source::Published,
            "step-2 free Carnot group with isometry algebra n ⋊ so(V)",
        )],
        kappa: None,
        notes: vec!["so(V) acts tautologically on V and by conjugation on Λ²V; J_ab e_a = e_b".into()],
    })
}

fn heisenberg() -> Result<ModelSpec> {
    let mut spec = generate_free_step2(2)?;
    let old = spec.structure.parts().clone();
    let algebra = LieAlgebra::from_constants(
        4,
        labels(&["e1", "e2", "e3", "J"]),
        old.algebra.nonzero_constants().map(|(i, j, k, c)| (i, j, k, c.clone())).collect::<Vec<_>>(),
    )?;
    let parts = StructureParts { algebra, ..old };
    spec.structure = HomogeneousSRStructure::new(parts)?;
    spec.name = "heisenberg".into();
    spec.casimirs = vec![("C1".into(), Polynomial::var(4, 2))];
    spec.facts.push(fact(
        Claim::HomogeneousMomentum { momentum: vec![1.0, 0.0, 2.0, 0.0], homogeneous: true },
        Source::Derived,
        "witness e1 + 2 J",
    ));
    spec.facts.push(fact(Claim::FixedPointsAnnihilate { coordinate: 3 }, Source::Derived, ""));
    spec.notes = vec!["[J, e1] = e2, [J, e2] = -e1".into()];
    Ok(spec)
}

fn cartan() -> Result<ModelSpec> {
    let n = 6;
    let e = |i: usize| unit(n, i);
    let neg = |i: usize| {
        let mut v = zeros(n);
        v[i] = q(-1);
        v
    };
    let algebra = LieAlgebra::from_brackets(
        n,
        labels(&["e1", "e2", "e3", "e4", "e5", "J"]),
        &[
            (0, 1, e(2)),
            (0, 2, e(3)),
            (1, 2, e(4)),
            (5, 0, e(1)),
            (5, 1, neg(0)),
            (5, 3, e(4)),
            (5, 4, neg(3)),
        ],
    )?;
    let mut parts = StructureParts::new(algebra, units(n, &[5]), units(n, &[0, 1, 2, 3, 4]), units(n, &[0, 1]), linalg::identity(2));
    parts.grading = Some(vec![units(n, &[0, 1]), units(n, &[2]), units(n, &[3, 4])]);
    let structure = HomogeneousSRStructure::new(parts)?;
    let casimirs = ["1/2*p3^2 + p1*p5 - p2*p4", "p4", "p5"]
        .iter()
        .enumerate()
        .map(|(i, s)| Ok((format!("C{}", i + 1), Polynomial::parse(n, s, "p")?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ModelSpec {
        name: "cartan".into(),
        structure,
        casimirs,
        facts: vec![
            fact(Claim::GeodesicOrbit { value: false }, Source::Published, "step 3 Carnot group"),
            fact(
                Claim::HomogeneousMomentum { momentum: vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0], homogeneous: true },
                Source::Published,
                "h4 = h5 = 0",
            ),
            fact(
                Claim::HomogeneousMomentum { momentum: vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0], homogeneous: false },
                Source::Published,
                "h4^2 + h5^2 != 0",
            ),
        ],
        kappa: None,
        notes: vec![
            "J rotates (e1, e2) and (e4, e5) and fixes e3".into(),
            "casimirs are those of the nilpotent part, checked on m".into(),
        ],
    })
}

/// `so3 ⊕ so2` with isotropy `Z = X3 - Y`, realized in `5x5` matrices.
fn so3_with_rotation() -> Result<(LieAlgebra, Vec<QMatrix>)> {
    let [l1, l2, l3] = so3_generators(5, 0);
    let y = rotation(5, 3, 0, 1);
    let z = add(&l3, &scaled(&y, &q(-1)));
    let mats = vec![l1, l2, l3, z];
    let algebra = algebra_from_matrices(labels(&["X1", "X2", "X3", "Z"]), &mats)?;
    Ok((algebra, mats))
}

/// `sl2 ⊕ so2` with `[X1, X2] = -X3`, `[X2, X3] = X1`, `[X3, X1] = X2` and isotropy `Z = X3 - Y`.
fn sl2_with_rotation() -> Result<(LieAlgebra, Vec<QMatrix>)> {
    let h = qf(1, 2);
    let mut x1 = square(4);
    x1[0][0] = h.clone();
    x1[1][1] = -h.clone();
    let mut x2 = square(4);
    x2[0][1] = h.clone();
    x2[1][0] = h.clone();
    let mut x3 = square(4);
    x3[0][1] = -h.clone();
    x3[1][0] = h;
    let y = rotation(4, 2, 0, 1);
    let z = add(&x3, &scaled(&y, &q(-1)));
    let mats = vec![x1, x2, x3, z];
    let algebra = algebra_from_matrices(labels(&["X1", "X2", "X3", "Z"]), &mats)?;
    Ok((algebra, mats))
}

fn axisymmetric(name: &str, algebra: LieAlgebra, mats: Vec<QMatrix>, kappa: f64, note: &str) -> Result<ModelSpec> {
    let n = 4;
    let mut parts = StructureParts::new(algebra, units(n, &[3]), units(n, &[0, 1, 2]), units(n, &[0, 1]), diagonal(&[q(2), q(2)]));
    parts.representation = Some(mats);
    let structure = HomogeneousSRStructure::new(parts)?;
    Ok(ModelSpec {
        name: name.into(),
        structure,
        casimirs: Vec::new(),
        facts: vec![
            fact(Claim::GeodesicOrbit { value: true }, Source::Published, "every geodesic is homogeneous"),
            fact(Claim::AxisymmetricClosedForm { kappa }, Source::Derived, "kappa calibrated against the numerical flow"),
        ],
        kappa: Some(kappa),
        notes: vec![note.into(), "metric diag(2, 2) on span(X1, X2); Z = X3 - Y".into()],
    })
}

fn so3_axisym() -> Result<ModelSpec> {
    let (algebra, mats) = so3_with_rotation()?;
    axisymmetric("so3_axisym", algebra, mats, 0.5, "(SO3 x SO2)/SO2; kappa = 1/I1")
}

fn sl2_axisym() -> Result<ModelSpec> {
    let (algebra, mats) = sl2_with_rotation()?;
    axisymmetric("sl2_axisym", algebra, mats, -0.5, "(PSL2(R) x SO2)/SO2; kappa = -1/I1")
}

fn so3_plain() -> Result<(LieAlgebra, Vec<QMatrix>)> {
    let mats = so3_generators(3, 0).to_vec();
    let algebra = algebra_from_matrices(labels(&["X1", "X2", "X3"]), &mats)?;
    Ok((algebra, mats))
}

fn so3_generic() -> Result<ModelSpec> {
    let (algebra, mats) = so3_plain()?;
    let mut parts = StructureParts::new(algebra, vec![], units(3, &[0, 1, 2]), units(3, &[0, 1, 2]), diagonal(&[q(1), q(2), q(3)]));
    parts.representation = Some(mats);
    parts.isotropy_connected = false;
    let structure = HomogeneousSRStructure::new(parts)?;
    Ok(ModelSpec {
        name: "so3_generic".into(),
        structure,
        casimirs: vec![("C1".into(), Polynomial::parse(3, "p1^2 + p2^2 + p3^2", "p")?)],
        facts: vec![fact(
            Claim::FixedPointCount { count: 6 },
            Source::Published,
            "the points ±sqrt(I_i) e_i on H = 1/2",
        )],
        kappa: None,
        notes: vec!["isotropy is a discrete group; its Lie algebra is 0".into()],
    })
}

fn so3_kp() -> Result<ModelSpec> {
    let (algebra, mats) = so3_plain()?;
    let mut parts = StructureParts::new(algebra, vec![], units(3, &[0, 1, 2]), units(3, &[0, 1]), linalg::identity(2));
    parts.representation = Some(mats);
    let structure = HomogeneousSRStructure::new(parts)?;
    Ok(ModelSpec {
        name: "so3_kp".into(),
        structure,
        casimirs: vec![("C1".into(), Polynomial::parse(3, "p1^2 + p2^2 + p3^2", "p")?)],
        facts: vec![fact(Claim::FixedPointsAnnihilate { coordinate: 3 }, Source::Derived, "")],
        kappa: None,
        notes: vec!["Δ is the p-part of so3 = k ⊕ p with k = span(X3)".into()],
    })
}

fn sl2_kp() -> Result<ModelSpec> {
    let (algebra, _) = sl2_with_rotation()?;
    let constants: Vec<_> = algebra
        .nonzero_constants()
        .filter(|(i, j, k, _)| *i < 3 && *j < 3 && *k < 3)
        .map(|(i, j, k, c)| (i, j, k, c.clone()))
        .collect();
    let algebra = LieAlgebra::from_constants(3, labels(&["X1", "X2", "X3"]), constants)?;
    let structure = HomogeneousSRStructure::new(StructureParts::new(
        algebra,
        vec![],
        units(3, &[0, 1, 2]),
        units(3, &[0, 1]),
        diagonal(&[q(2), q(2)]),
    ))?;
    Ok(ModelSpec {
        name: "sl2_kp".into(),
        structure,
        casimirs: vec![("C1".into(), Polynomial::parse(3, "p1^2 + p2^2 - p3^2", "p")?)],
        facts: vec![],
        kappa: None,
        notes: vec!["Δ is the p-part of the Cartan decomposition, B = K restricted to Δ".into()],
    })
}

fn rolling_sphere() -> Result<ModelSpec> {
    let size = 6;
    let [l1, l2, l3] = so3_generators(size, 0);
    let mut t1 = square(size);
    t1[3][5] = q(1);
    let mut t2 = square(size);
    t2[4][5] = q(1);
    let mats = vec![l1, l2, l3, t1, t2];
    let algebra = algebra_from_matrices(labels(&["V1", "V2", "V3", "e1", "e2"]), &mats)?;
    let n = 5;
    let frame = vec![
        vec![q(0), q(-1), q(0), q(1), q(0)],
        vec![q(1), q(0), q(0), q(0), q(1)],
        unit(n, 2),
    ];
    let mut parts = StructureParts::new(algebra, vec![], linalg::identity(n), frame, linalg::identity(3));
    parts.representation = Some(mats);
    let structure = HomogeneousSRStructure::new(parts)?;
    Ok(ModelSpec {
        name: "rolling_sphere".into(),
        structure,
        casimirs: vec![
            ("C1".into(), Polynomial::var(n, 3)),
            ("C2".into(), Polynomial::var(n, 4)),
            ("C3".into(), Polynomial::parse(n, "p1^2 + p2^2 + p3^2", "p")?),
        ],
        facts: vec![
            fact(Claim::GeodesicOrbit { value: false }, Source::Published, "rolling sphere with twisting"),
            fact(
                Claim::HomogeneousMomentum { momentum: vec![0.3, -0.2, 0.5, 0.0, 0.0], homogeneous: true },
                Source::Published,
                "zero translational momentum",
            ),
            fact(
                Claim::HomogeneousMomentum { momentum: vec![0.0, 1.0, 0.0, 1.0, 0.0], homogeneous: true },
                Source::Published,
                "rotational part collinear with the rolling axis",
            ),
            fact(
                Claim::HomogeneousMomentum { momentum: vec![1.0, 0.0, 0.0, 1.0, 0.0], homogeneous: false },
                Source::Published,
                "rotational part not collinear with the rolling axis",
            ),
        ],
        kappa: None,
        notes: vec![
            "so3 basis with [V1, V2] = V3 (cyclic), not normalized by the Killing form".into(),
            "isotropy is not determined; the model uses k = 0".into(),
            "the rolling axis of momentum (p1..p3, P1, P2) is (-P2, P1, 0)".into(),
        ],
    })
}

fn biinvariant_compact() -> Result<ModelSpec> {
    let size = 6;
    let x = so3_generators(size, 0);
    let y = so3_generators(size, 3);
    let mut mats: Vec<QMatrix> = x.to_vec();
    mats.extend(x.iter().zip(&y).map(|(a, b)| add(a, b)));
    let algebra = algebra_from_matrices(labels(&["X1", "X2", "X3", "Z1", "Z2", "Z3"]), &mats)?;
    let n = 6;
    let mut parts = StructureParts::new(
        algebra,
        units(n, &[3, 4, 5]),
        units(n, &[0, 1, 2]),
        units(n, &[0, 1, 2]),
        diagonal(&[q(2), q(2), q(2)]),
    );
    parts.representation = Some(mats);
    let structure = HomogeneousSRStructure::new(parts)?;
    Ok(ModelSpec {
        name: "biinvariant_compact".into(),
        structure,
        casimirs: Vec::new(),
        facts: vec![
            fact(Claim::VerticalFieldVanishes, Source::Published, "Δ = m with B = -K"),
            fact(Claim::GeodesicOrbit { value: true }, Source::Derived, "symmetric pair (SO3 x SO3)/SO3"),
        ],
        kappa: None,
        notes: vec!["Z_i = X_i + Y_i spans the diagonal isotropy".into()],
    })
}

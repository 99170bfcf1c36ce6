//! Bundled example structures, model files, and replay of their recorded facts.

mod registry;
pub mod spec_file;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::go_analysis::{go_verdict, GoStatus, DEFAULT_DEGREE_CAP};
use crate::hamiltonian::{reduced_bracket, vertical_field};
use crate::homogeneity::{check_homogeneous, Verdict};
use crate::integrator::{closed_form_axisymmetric, find_fixed_points, integrate_vertical};
use crate::polynomial::Polynomial;
use crate::sampling::MomentumSampler;
use crate::structure::HomogeneousSRStructure;

pub use registry::{generate_free_step2, load_model, MODEL_NAMES};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "claim", rename_all = "snake_case")]
pub enum Claim {
    GeodesicOrbit { value: bool },
    FixedPointCount { count: usize },
    /// Every fixed point of the vertical flow has vanishing coordinate (1-based).
    FixedPointsAnnihilate { coordinate: usize },
    HomogeneousMomentum { momentum: Vec<f64>, homogeneous: bool },
    VerticalFieldVanishes,
    AxisymmetricClosedForm { kappa: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Published,
    Derived,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnownFact {
    #[serde(flatten)]
    pub claim: Claim,
    pub source: Source,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ModelSpec {
    pub name: String,
    pub structure: HomogeneousSRStructure,
    /// Casimirs of the `m`-subalgebra, as polynomials in the full coordinates `p_1..p_n`.
    pub casimirs: Vec<(String, Polynomial)>,
    pub facts: Vec<KnownFact>,
    /// Rate in the closed form `p(t) = exp(-t κ p_3 ad(e_3)^T) p_0`.
    pub kappa: Option<f64>,
    pub notes: Vec<String>,
}

/// Rewrites a polynomial in `p_1..p_n` in the coordinates `q_i = p(m_i)` on the annihilator of `k`.
pub fn to_m_coordinates(s: &HomogeneousSRStructure, f: &Polynomial) -> Polynomial {
    let r = s.m().dim();
    let dual = s.dual_rows();
    let subs: Vec<Vec<_>> = (0..s.dim()).map(|j| (0..r).map(|i| dual[i][j].clone()).collect()).collect();
    f.linear_substitution(&subs)
}

/// True iff `F` Poisson-commutes with every coordinate for the bracket of the `m`-subalgebra.
pub fn is_m_casimir(s: &HomogeneousSRStructure, f: &Polynomial) -> bool {
    let r = s.m().dim();
    let fm = to_m_coordinates(s, f);
    (0..r).all(|a| {
        reduced_bracket(s, &Polynomial::var(r, a), &fm).map(|b| b.is_zero()).unwrap_or(false)
    })
}

/// Names of the recorded Casimirs that fail the exact check.
pub fn failing_casimirs(spec: &ModelSpec) -> Vec<String> {
    spec.casimirs
        .iter()
        .filter(|(_, f)| f.nvars() != spec.structure.dim() || !is_m_casimir(&spec.structure, f))
        .map(|(name, _)| name.clone())
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct FactReport {
    pub fact: KnownFact,
    pub passed: bool,
    pub detail: String,
}

const REPLAY_SAMPLES: usize = 100;
const REPLAY_SEED: u64 = 0;

pub fn replay_fact(spec: &ModelSpec, fact: &KnownFact) -> FactReport {
    let s = &spec.structure;
    let (passed, detail) = match &fact.claim {
        Claim::GeodesicOrbit { value } => {
            let v = go_verdict(s, DEFAULT_DEGREE_CAP, REPLAY_SAMPLES, REPLAY_SEED);
            let passed = match v.verdict {
                GoStatus::AffirmedUpToDegree => *value,
                GoStatus::RefutedWithWitness => !*value,
                GoStatus::EvidenceOnly => (v.scan.not_homogeneous == 0) == *value,
            };
            (passed, format!("verdict {:?}", v.verdict))
        }
        Claim::FixedPointCount { count } => {
            let found = find_fixed_points(s, REPLAY_SAMPLES).len();
            (found == *count, format!("found {found} fixed points"))
        }
        Claim::FixedPointsAnnihilate { coordinate } => {
            let points = find_fixed_points(s, REPLAY_SAMPLES);
            let worst = points
                .iter()
                .filter_map(|p| p.coords().get(coordinate.wrapping_sub(1)))
                .fold(0.0f64, |m, x| m.max(x.abs()));
            (!points.is_empty() && worst < 1e-8, format!("{} fixed points, max |p_{coordinate}| = {worst:e}", points.len()))
        }
        Claim::HomogeneousMomentum { momentum, homogeneous } => match s.momentum_from_input(momentum) {
            Ok(p) => {
                let cert = check_homogeneous(s, &p);
                let is_hom = cert.verdict == Verdict::Homogeneous;
                (is_hom == *homogeneous, format!("verdict {:?}, residual {:e}", cert.verdict, cert.residual))
            }
            Err(e) => (false, e.to_string()),
        },
        Claim::VerticalFieldVanishes => {
            let sampler = MomentumSampler::new(s);
            let worst = (0..REPLAY_SAMPLES as u64)
                .map(|i| {
                    let p = sampler.sample(REPLAY_SEED, i);
                    vertical_field(s, &p).iter().fold(0.0f64, |m, x| m.max(x.abs()))
                })
                .fold(0.0f64, f64::max);
            (worst < 1e-12, format!("max |V(p)| = {worst:e}"))
        }
        Claim::AxisymmetricClosedForm { kappa } => match closed_form_gap(s, *kappa) {
            Ok(gap) => (gap < 1e-8, format!("max deviation {gap:e}")),
            Err(e) => (false, e.to_string()),
        },
    };
    FactReport { fact: fact.clone(), passed, detail }
}

/// Largest distance between the closed form and the numerical flow on `[0, 1]`.
fn closed_form_gap(s: &HomogeneousSRStructure, kappa: f64) -> Result<f64> {
    let p0 = MomentumSampler::new(s).sample(REPLAY_SEED, 0);
    let traj = integrate_vertical(s, &p0, 1.0, 1e-3)?;
    let mut gap = 0.0f64;
    for (t, p) in traj.times.iter().zip(&traj.momenta) {
        let exact = closed_form_axisymmetric(s, &p0, *t, kappa)?;
        let d = exact.coords().iter().zip(p.coords()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        gap = gap.max(d);
    }
    Ok(gap)
}

pub fn replay_facts(spec: &ModelSpec) -> Vec<FactReport> {
    spec.facts.iter().map(|f| replay_fact(spec, f)).collect()
}

/// A registered model name, or otherwise a path to a JSON model file.
pub fn load_model_or_file(arg: &str) -> Result<ModelSpec> {
    match load_model(arg) {
        Err(Error::UnknownModel(_)) => {
            let path = Path::new(arg);
            if path.is_file() {
                spec_file::load_file(path)
            } else {
                Err(Error::UnknownModel(arg.to_string()))
            }
        }
        other => other,
    }
}

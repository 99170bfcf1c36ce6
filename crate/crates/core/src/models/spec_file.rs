//! JSON model files.
//!
//! Structure constants are listed as `[i, j, k, c]` or `[i, j, k, num, den]` with 1-based
//! indices, meaning `[e_i, e_j]` has coefficient `c` on `e_k`. Entries are taken as given,
//! so a file must list both `[i, j, k, c]` and `[j, i, k, -c]`.

use std::path::Path;

use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{LieAlgebra, ValidationReport, Violation};
use crate::linalg::QMatrix;
use crate::polynomial::Polynomial;
use crate::rational::{Rational, Q};
use crate::structure::{validate_parts, HomogeneousSRStructure, StructureParts};

use super::{KnownFact, ModelSpec};

type RMatrix = Vec<Vec<Rational>>;

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(default)]
    pub name: Option<String>,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub constants: Vec<Vec<Rational>>,
    pub k_basis: RMatrix,
    pub m_basis: RMatrix,
    pub delta_basis: RMatrix,
    pub metric: RMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grading: Option<Vec<RMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub representation: Option<Vec<RMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complement: Option<RMatrix>,
    #[serde(default = "default_true")]
    pub isotropy_connected: bool,
    /// Polynomials in `p1..pn`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub casimirs: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub facts: Vec<KnownFact>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

fn unwrap_matrix(m: &RMatrix) -> QMatrix {
    m.iter().map(|r| r.iter().map(|x| x.0.clone()).collect()).collect()
}

fn wrap_matrix(m: &[Vec<Q>]) -> RMatrix {
    m.iter().map(|r| r.iter().cloned().map(Rational).collect()).collect()
}

fn index(x: &Q, dim: usize) -> Option<usize> {
    if !x.is_integer() || !x.is_positive() {
        return None;
    }
    let i = x.to_integer().to_usize()?;
    (1..=dim).contains(&i).then(|| i - 1)
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn algebra(&self, report: &mut ValidationReport) -> Option<LieAlgebra> {
        let n = self.dim;
        let mut entries = Vec::new();
        for (row, e) in self.constants.iter().enumerate() {
            let parsed = match e.as_slice() {
                [i, j, k, c] => Some((i, j, k, c.0.clone())),
                [i, j, k, num, den] if !den.0.is_zero() => Some((i, j, k, &num.0 / &den.0)),
                _ => None,
            };
            let Some((i, j, k, c)) = parsed else {
                report.push(Violation::Structure(format!("constant entry {} is malformed", row + 1)));
                continue;
            };
            match (index(&i.0, n), index(&j.0, n), index(&k.0, n)) {
                (Some(i), Some(j), Some(k)) => entries.push((i, j, k, c)),
                _ => report.push(Violation::Structure(format!("constant entry {} has an index outside 1..={n}", row + 1))),
            }
        }
        let labels = match &self.labels {
            Some(l) if l.len() == n => l.clone(),
            Some(l) => {
                report.push(Violation::Structure(format!("{} labels for dimension {n}", l.len())));
                return None;
            }
            None => (1..=n).map(|i| format!("e{i}")).collect(),
        };
        match LieAlgebra::from_constants(n, labels, entries) {
            Ok(g) => Some(g),
            Err(e) => {
                report.push(Violation::Structure(e.to_string()));
                None
            }
        }
    }

    /// Structure data with the problems found while reading it.
    pub fn to_parts(&self) -> (Option<StructureParts>, ValidationReport) {
        let mut report = ValidationReport::default();
        let Some(algebra) = self.algebra(&mut report) else {
            return (None, report);
        };
        let mut parts = StructureParts::new(
            algebra,
            unwrap_matrix(&self.k_basis),
            unwrap_matrix(&self.m_basis),
            unwrap_matrix(&self.delta_basis),
            unwrap_matrix(&self.metric),
        );
        parts.grading = self.grading.as_ref().map(|g| g.iter().map(unwrap_matrix).collect());
        parts.representation = self.representation.as_ref().map(|r| r.iter().map(unwrap_matrix).collect());
        parts.complement = self.complement.as_ref().map(unwrap_matrix);
        parts.isotropy_connected = self.isotropy_connected;
        report.extend(validate_parts(&parts));
        (Some(parts), report)
    }

    /// Full validation: structure, then the recorded Casimirs.
    pub fn validate(&self) -> ValidationReport {
        match self.to_spec() {
            Ok(spec) => {
                let mut report = ValidationReport::default();
                for name in super::failing_casimirs(&spec) {
                    report.push(Violation::Structure(format!("{name} is not a Casimir of the m-subalgebra")));
                }
                report
            }
            Err(Error::InvalidStructure(report)) => report,
            Err(e) => {
                let mut report = ValidationReport::default();
                report.push(Violation::Structure(e.to_string()));
                report
            }
        }
    }

    pub fn to_spec(&self) -> Result<ModelSpec> {
        let (parts, report) = self.to_parts();
        let parts = match parts {
            Some(p) if report.is_valid() => p,
            _ => return Err(Error::InvalidStructure(report)),
        };
        let structure = HomogeneousSRStructure::new(parts)?;
        let n = structure.dim();
        let casimirs = self
            .casimirs
            .iter()
            .enumerate()
            .map(|(i, text)| Ok((format!("C{}", i + 1), Polynomial::parse(n, text, "p")?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ModelSpec {
            name: self.name.clone().unwrap_or_else(|| "custom".into()),
            structure,
            casimirs,
            facts: self.facts.clone(),
            kappa: self.kappa,
            notes: self.notes.clone(),
        })
    }

    pub fn from_spec(spec: &ModelSpec) -> Self {
        let parts = spec.structure.parts();
        let constants = parts
            .algebra
            .nonzero_constants()
            .map(|(i, j, k, c)| {
                let mut e: Vec<Rational> = [i, j, k].iter().map(|&x| Rational(Q::from_integer((x as i64 + 1).into()))).collect();
                e.push(Rational(c.clone()));
                e
            })
            .collect();
        ModelFile {
            name: Some(spec.name.clone()),
            dim: parts.algebra.dim(),
            labels: Some(parts.algebra.labels().to_vec()),
            constants,
            k_basis: wrap_matrix(&parts.k_basis),
            m_basis: wrap_matrix(&parts.m_basis),
            delta_basis: wrap_matrix(&parts.delta_basis),
            metric: wrap_matrix(&parts.metric),
            grading: parts.grading.as_ref().map(|g| g.iter().map(|l| wrap_matrix(l)).collect()),
            representation: parts.representation.as_ref().map(|r| r.iter().map(|m| wrap_matrix(m)).collect()),
            complement: parts.complement.as_ref().map(|c| wrap_matrix(c)),
            isotropy_connected: parts.isotropy_connected,
            casimirs: spec.casimirs.iter().map(|(_, f)| f.to_string()).collect(),
            facts: spec.facts.clone(),
            kappa: spec.kappa,
            notes: spec.notes.clone(),
        }
    }
}

pub fn load_file(path: &Path) -> Result<ModelSpec> {
    let text = std::fs::read_to_string(path)?;
    ModelFile::parse(&text)?.to_spec()
}

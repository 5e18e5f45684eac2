//! JSON problem specs (schema 1).

use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sipframe_core::{DualVector, FrameFamily, LinearOperator, SipSpace, Tolerances, C64};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// `[re, im]`.
pub type Complex = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Axioms,
    Certify,
    Reconstruct,
    Perturb,
    Sample,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Task::Axioms => "axioms",
            Task::Certify => "certify",
            Task::Reconstruct => "reconstruct",
            Task::Perturb => "perturb",
            Task::Sample => "sample",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceSpec>,
    /// Members of the family, each given by its coordinates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Vec<Vec<Complex>>>,
    /// Exponent of the coefficient space `X_d`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_d: Option<String>,
    /// Row-major square matrix of `K`; the identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<Vec<Vec<Complex>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certify: Option<CertifySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reconstruct: Option<ReconstructSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturb: Option<PerturbSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<SampleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axioms: Option<AxiomsSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub dim: usize,
    /// Decimal (`"1.5"`) or fraction (`"3/2"`).
    pub p: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CertifySpec {
    /// Attach the grid oracle (complex dimension at most 3).
    pub oracle: bool,
    pub oracle_resolution: Option<usize>,
    /// Number of random directions in the ratio profile.
    pub profile_samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReconstructSpec {
    pub trials: Option<usize>,
    /// Functional `f*` to reconstruct `K* f*` for, as action coefficients.
    pub functional: Option<Vec<Complex>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbSpec {
    /// The perturbed family `{g_j}`, same length as `family`.
    pub family: Vec<Vec<Complex>>,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleOperator {
    #[default]
    Identity,
    /// Euclidean projector onto the span of the sampled kernel family.
    Projector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    /// Row `t` is the feature vector of point `t`; `space.dim` columns.
    pub features: Vec<Vec<Complex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<String>>,
    /// Indices of sampled points; all points when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<Vec<usize>>,
    /// Functional `f*` whose samples are taken; seeded random when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional: Option<Vec<Complex>>,
    #[serde(default)]
    pub operator: SampleOperator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AxiomsSpec {
    pub exponents: Vec<String>,
    pub draws: usize,
    pub max_dim: usize,
}

impl Default for AxiomsSpec {
    fn default() -> Self {
        Self {
            exponents: ["1.25", "1.5", "2", "3", "4"].map(String::from).to_vec(),
            draws: 1000,
            max_dim: 8,
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

/// Parses `"1.5"` or `"3/2"`.
pub fn parse_exponent(field: &str, s: &str) -> Result<f64, CliError> {
    let t = s.trim();
    let v = match t.split_once('/') {
        Some((a, b)) => {
            let (a, b): (f64, f64) = (
                a.trim().parse().map_err(|_| invalid(format!("{field}: cannot parse {s:?}")))?,
                b.trim().parse().map_err(|_| invalid(format!("{field}: cannot parse {s:?}")))?,
            );
            a / b
        }
        None => t.parse().map_err(|_| invalid(format!("{field}: cannot parse {s:?}")))?,
    };
    if !(v > 1.0 && v.is_finite()) {
        return Err(invalid(format!("{field}: exponent must satisfy 1 < p < inf, got {s:?}")));
    }
    Ok(v)
}

fn c(z: &Complex) -> C64 {
    C64::new(z[0], z[1])
}

fn complex_vec(field: &str, v: &[Complex], n: usize) -> Result<DVector<C64>, CliError> {
    if v.len() != n {
        return Err(invalid(format!("{field}: expected {n} entries, found {}", v.len())));
    }
    Ok(DVector::from_iterator(n, v.iter().map(c)))
}

/// Columns are the given vectors.
fn columns(field: &str, cols: &[Vec<Complex>], n: usize) -> Result<DMatrix<C64>, CliError> {
    if cols.is_empty() {
        return Err(invalid(format!("{field}: must contain at least one member")));
    }
    let mut m = DMatrix::zeros(n, cols.len());
    for (j, col) in cols.iter().enumerate() {
        m.set_column(j, &complex_vec(&format!("{field}[{j}]"), col, n)?);
    }
    Ok(m)
}

fn rows(field: &str, rows: &[Vec<Complex>], nrows: usize, ncols: usize) -> Result<DMatrix<C64>, CliError> {
    if rows.len() != nrows {
        return Err(invalid(format!("{field}: expected {nrows} rows, found {}", rows.len())));
    }
    let mut m = DMatrix::zeros(nrows, ncols);
    for (i, row) in rows.iter().enumerate() {
        m.set_row(i, &complex_vec(&format!("{field}[{i}]"), row, ncols)?.transpose());
    }
    Ok(m)
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let spec: Self = serde_json::from_str(text).map_err(|e| invalid(format!("spec: {e}")))?;
        if spec.schema != SCHEMA_VERSION {
            return Err(invalid(format!(
                "schema: unsupported version {}, expected {SCHEMA_VERSION}",
                spec.schema
            )));
        }
        Ok(spec)
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The task to run: the requested one, which must match the spec's own
    /// `task` field when that is present.
    pub fn resolve_task(&self, requested: Task) -> Result<Task, CliError> {
        match self.task {
            Some(t) if t != requested => Err(invalid(format!("task: spec declares {t}, command requested {requested}"))),
            _ => Ok(requested),
        }
    }

    pub fn space(&self) -> Result<SipSpace, CliError> {
        let s = self.space.as_ref().ok_or_else(|| invalid("space: required for this task"))?;
        let p = parse_exponent("space.p", &s.p)?;
        let weights = match &s.weights {
            Some(w) if w.len() != s.dim => {
                return Err(invalid(format!("space.weights: expected {} entries, found {}", s.dim, w.len())));
            }
            Some(w) => w.clone(),
            None => vec![1.0; s.dim],
        };
        SipSpace::with_weights(p, weights).map_err(|e| invalid(format!("space: {e}")))
    }

    pub fn coeff_exponent(&self) -> Result<f64, CliError> {
        let s = self.p_d.as_deref().ok_or_else(|| invalid("p_d: required for this task"))?;
        parse_exponent("p_d", s)
    }

    pub fn family(&self) -> Result<FrameFamily, CliError> {
        let space = self.space()?;
        let members = self.family.as_ref().ok_or_else(|| invalid("family: required for this task"))?;
        let m = columns("family", members, space.dim())?;
        FrameFamily::from_synthesis(space, m, self.coeff_exponent()?).map_err(|e| invalid(format!("family: {e}")))
    }

    pub fn operator(&self) -> Result<LinearOperator, CliError> {
        let n = self.space()?.dim();
        match &self.operator {
            Some(r) => Ok(LinearOperator::new(rows("operator", r, n, n)?)),
            None => Ok(LinearOperator::identity(n)),
        }
    }

    pub fn seed(&self, override_seed: Option<u64>) -> Result<u64, CliError> {
        override_seed
            .or(self.seed)
            .ok_or_else(|| invalid("seed: required (set `seed` in the spec or pass --seed)"))
    }

    pub fn tolerances(&self, seed: u64, restarts: Option<usize>) -> Result<Tolerances, CliError> {
        let mut tol = self.tolerances.clone().unwrap_or_default();
        tol.seed = seed;
        if let Some(r) = restarts {
            tol.restarts = r;
        }
        if tol.restarts == 0 {
            return Err(invalid("tolerances.restarts: must be at least 1"));
        }
        Ok(tol)
    }

    pub fn perturbed_family(&self) -> Result<(FrameFamily, &PerturbSpec), CliError> {
        let p = self.perturb.as_ref().ok_or_else(|| invalid("perturb: required for this task"))?;
        let space = self.space()?;
        let m = columns("perturb.family", &p.family, space.dim())?;
        let fam = FrameFamily::from_synthesis(space, m, self.coeff_exponent()?).map_err(|e| invalid(format!("perturb.family: {e}")))?;
        Ok((fam, p))
    }

    pub fn sample_features(&self) -> Result<(DMatrix<C64>, &SampleSpec), CliError> {
        let s = self.sample.as_ref().ok_or_else(|| invalid("sample: required for this task"))?;
        let n = self.space()?.dim();
        if s.features.is_empty() {
            return Err(invalid("sample.features: must contain at least one point"));
        }
        Ok((rows("sample.features", &s.features, s.features.len(), n)?, s))
    }
}

pub fn functional(field: &str, v: &[Complex], n: usize) -> Result<DualVector, CliError> {
    Ok(DualVector(complex_vec(field, v, n)?))
}

//! Serializable reports. Complex numbers are `[re, im]`; infinite bounds
//! are written as `null`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use sipframe_core::axioms::AxiomCheck;
use sipframe_core::perturb::{ConclusionReport, PremiseCertification, PremiseReport};
use sipframe_core::{CertificationReport, Verdict, C64};

use crate::spec::{Complex, Task};

pub const TOOL: &str = "sipframe";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub schema: u32,
    pub task: Task,
    pub seed: u64,
    pub restarts: usize,
    pub notes: Vec<String>,
    /// Wall-clock time; only recorded on request so that reports stay
    /// byte-identical across runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
    pub result: TaskResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskResult {
    Axioms(AxiomsResult),
    Certify(CertifyResult),
    Reconstruct(ReconstructResult),
    Perturb(PerturbResult),
    Sample(SampleResult),
}

pub fn complex(z: C64) -> Complex {
    [z.re, z.im]
}

pub fn coords(v: &DVector<C64>) -> Vec<Complex> {
    v.iter().map(|&z| complex(z)).collect()
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    pub verdict: Verdict,
    /// `null` means `+inf` (the lower inequality is vacuous).
    pub a_est: Option<f64>,
    pub b_est: Option<f64>,
    pub witness_lower: Option<Vec<Complex>>,
    pub witness_upper: Vec<Complex>,
    pub oracle_a: Option<f64>,
    pub oracle_b: Option<f64>,
    pub restarts_used: usize,
    pub converged: bool,
    pub kernel_refutation: bool,
    pub notes: Vec<String>,
}

impl From<&CertificationReport> for Certification {
    fn from(r: &CertificationReport) -> Self {
        Self {
            verdict: r.verdict,
            a_est: finite(r.a_est),
            b_est: finite(r.b_est),
            witness_lower: r.witness_lower.as_ref().map(|w| coords(&w.0)),
            witness_upper: coords(&r.witness_upper.0),
            oracle_a: r.oracle_a,
            oracle_b: r.oracle_b,
            restarts_used: r.restarts_used,
            converged: r.converged,
            kernel_refutation: r.kernel_refutation,
            notes: r.notes.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomRow {
    pub p: String,
    pub property: String,
    pub max_violation: f64,
    pub tolerance: f64,
    pub draws: usize,
    pub passed: bool,
}

impl AxiomRow {
    pub fn new(p: &str, c: &AxiomCheck) -> Self {
        Self {
            p: p.to_string(),
            property: c.property.clone(),
            max_violation: c.max_violation,
            tolerance: c.tolerance,
            draws: c.draws,
            passed: c.passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomsResult {
    pub max_dim: usize,
    pub draws: usize,
    pub checks: Vec<AxiomRow>,
    pub all_passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyResult {
    /// Certification with `K = I`.
    pub frame: Certification,
    /// Certification with the spec's `K`; absent when no operator is given.
    pub k_frame: Option<Certification>,
    /// `|T f*| / |f*|` at seeded random directions.
    pub ratio_profile: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReconstruction {
    pub functional: Vec<Complex>,
    pub target: Vec<Complex>,
    pub reconstructed: Vec<Complex>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructResult {
    pub certification: Certification,
    /// Action coefficients of each `g_j*`.
    pub dual_family: Vec<Vec<Complex>>,
    pub dual_bessel: Option<f64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub passed: bool,
    pub functional: Option<FunctionalReconstruction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Premise {
    pub sup: f64,
    pub worst: Vec<Complex>,
    pub oracle_sup: Option<f64>,
    pub grid_checked: bool,
    pub holds: bool,
}

impl From<&PremiseReport> for Premise {
    fn from(p: &PremiseReport) -> Self {
        Self {
            sup: p.sup,
            worst: coords(&p.worst.0),
            oracle_sup: p.oracle_sup,
            grid_checked: p.certification == PremiseCertification::Oracle,
            holds: p.holds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PkFrame {
    /// Row-major.
    pub projector: Vec<Vec<Complex>>,
    pub projector_norm: f64,
    pub certification: Certification,
    pub lower_bound: f64,
    pub lower_bound_alt: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conclusion {
    pub a: f64,
    pub b: f64,
    pub k_norm: f64,
    pub dagger_norm: f64,
    pub factor: f64,
    pub bessel_g: f64,
    pub bessel_bound: f64,
    pub bessel_ok: bool,
    pub pk_frame: Option<PkFrame>,
    pub sandwich_lower: f64,
    pub sandwich_upper: f64,
    pub sandwich_ok: bool,
    pub sandwich_trials: Vec<(f64, f64)>,
    pub passed: bool,
    pub notes: Vec<String>,
}

impl From<&ConclusionReport> for Conclusion {
    fn from(c: &ConclusionReport) -> Self {
        Self {
            a: c.a,
            b: c.b,
            k_norm: c.k_norm,
            dagger_norm: c.dagger_norm,
            factor: c.factor,
            bessel_g: c.bessel_g,
            bessel_bound: c.bessel_bound,
            bessel_ok: c.bessel_ok,
            pk_frame: c.pk.as_ref().map(|p| PkFrame {
                projector: p
                    .projector
                    .matrix()
                    .row_iter()
                    .map(|r| r.iter().map(|&z| complex(z)).collect())
                    .collect(),
                projector_norm: p.projector_norm,
                certification: (&p.certification).into(),
                lower_bound: p.lower_bound,
                lower_bound_alt: p.lower_bound_alt,
                passed: p.passed,
            }),
            sandwich_lower: c.sandwich_lower,
            sandwich_upper: c.sandwich_upper,
            sandwich_ok: c.sandwich_ok,
            sandwich_trials: c.sandwich_trials.clone(),
            passed: c.passed(),
            notes: c.notes.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbResult {
    pub certification: Certification,
    pub premise: Premise,
    pub dagger_norm: Option<f64>,
    pub factor: Option<f64>,
    pub smallness: bool,
    /// Present only when the premise, the smallness condition and the
    /// `K`-frame certification all hold.
    pub conclusion: Option<Conclusion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointValue {
    pub point: String,
    pub true_value: Complex,
    pub reconstructed: Complex,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleResult {
    pub pattern: Vec<String>,
    pub operator: crate::spec::SampleOperator,
    pub certification: Certification,
    pub functional: Vec<Complex>,
    pub samples: Vec<Complex>,
    /// `K* f*`, the functional the samples should determine.
    pub target: Vec<Complex>,
    /// Absent when the pattern is not certified.
    pub reconstructed: Option<Vec<Complex>>,
    pub residual: Option<f64>,
    /// `(K* f*)(t)` against the reconstruction at every point.
    pub points: Vec<PointValue>,
}

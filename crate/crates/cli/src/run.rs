//! Task dispatch.

use std::time::Instant;

use sipframe_core::atomic::{construct_dual_family, reconstruction_residuals};
use sipframe_core::axioms::axiom_suite;
use sipframe_core::certifier::{certify_frame, certify_k_frame, grid_bounds, ratio_profile, GRID_ORACLE_MAX_DIM};
use sipframe_core::perturb::{perturbation_factor, pseudo_inverse, smallness_condition, verify_conclusion, verify_premise};
use sipframe_core::{
    rng, DiscreteRkbs, DualVector, LinearOperator, PerturbationInstance, SamplingPattern,
    Tolerances, Verdict,
};

use crate::error::CliError;
use crate::report::{
    complex, coords, AxiomRow, AxiomsResult, CertifyResult, Conclusion, FunctionalReconstruction, PerturbResult,
    PointValue, ReconstructResult, Report, SampleResult, TaskResult, TOOL,
};
use crate::spec::{functional, parse_exponent, ProblemSpec, SampleOperator, Task, SCHEMA_VERSION};

/// Default grid resolution when the oracle is requested.
pub const ORACLE_RESOLUTION: usize = 60;
const PROFILE_SAMPLES: usize = 64;
const RECONSTRUCT_TRIALS: usize = 100;
const SANDWICH_SAMPLES: usize = 100;

pub const SIP_CONVENTION_NOTE: &str = "s.i.p. convention: [g, h] = |h|^(2-p) sum_k w_k g_k conj(h_k) |h_k|^(p-2); \
the norm prefactor is taken on the second argument so that [h, h] = |h|^2 and [g, h] is linear in g";

/// Command-line overrides applied on top of the spec.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
    /// Attach the grid oracle to certifications.
    pub oracle: bool,
    pub timing: bool,
}

pub fn run(spec: &ProblemSpec, requested: Task, opts: &RunOptions) -> Result<Report, CliError> {
    let start = Instant::now();
    let task = spec.resolve_task(requested)?;
    let seed = spec.seed(opts.seed)?;
    let tol = spec.tolerances(seed, opts.restarts)?;
    let mut notes = vec![SIP_CONVENTION_NOTE.to_string()];
    let result = match task {
        Task::Axioms => TaskResult::Axioms(run_axioms(spec, seed)?),
        Task::Certify => TaskResult::Certify(run_certify(spec, opts, &tol)?),
        Task::Reconstruct => TaskResult::Reconstruct(run_reconstruct(spec, &tol)?),
        Task::Perturb => TaskResult::Perturb(run_perturb(spec, &tol, &mut notes)?),
        Task::Sample => TaskResult::Sample(run_sample(spec, &tol, &mut notes)?),
    };
    Ok(Report {
        tool: TOOL.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        schema: SCHEMA_VERSION,
        task,
        seed,
        restarts: tol.restarts,
        notes,
        timing_ms: opts.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
        result,
    })
}

fn run_axioms(spec: &ProblemSpec, seed: u64) -> Result<AxiomsResult, CliError> {
    let a = spec.axioms.clone().unwrap_or_default();
    if a.exponents.is_empty() || a.draws == 0 || a.max_dim == 0 {
        return Err(CliError::Validation("axioms: exponents, draws and max_dim must be nonempty".into()));
    }
    let mut checks = Vec::new();
    for (i, p) in a.exponents.iter().enumerate() {
        let v = parse_exponent(&format!("axioms.exponents[{i}]"), p)?;
        checks.extend(axiom_suite(v, a.draws, a.max_dim, seed).iter().map(|c| AxiomRow::new(p, c)));
    }
    Ok(AxiomsResult {
        max_dim: a.max_dim,
        draws: a.draws,
        all_passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

fn run_certify(spec: &ProblemSpec, opts: &RunOptions, tol: &Tolerances) -> Result<CertifyResult, CliError> {
    let fam = spec.family()?;
    let c = spec.certify.clone().unwrap_or_default();
    let n = fam.space().dim();
    let resolution = if opts.oracle || c.oracle {
        if n > GRID_ORACLE_MAX_DIM {
            return Err(CliError::Validation(format!(
                "oracle: complex dimension {n} exceeds the grid limit {GRID_ORACLE_MAX_DIM}"
            )));
        }
        Some(c.oracle_resolution.unwrap_or(ORACLE_RESOLUTION))
    } else {
        None
    };
    let mut frame = certify_frame(&fam, tol)?;
    let mut k_frame = match spec.operator {
        Some(_) => Some(certify_k_frame(&fam, &spec.operator()?, tol)?),
        None => None,
    };
    if let Some(res) = resolution {
        let g = grid_bounds(&fam, &spec.operator()?, res)?;
        frame.oracle_a = Some(g.frame_lower);
        frame.oracle_b = Some(g.upper);
        if let Some(kf) = k_frame.as_mut() {
            kf.oracle_a = g.k_lower;
            kf.oracle_b = Some(g.upper);
        }
    }
    Ok(CertifyResult {
        frame: (&frame).into(),
        k_frame: k_frame.as_ref().map(Into::into),
        ratio_profile: ratio_profile(&fam, c.profile_samples.unwrap_or(PROFILE_SAMPLES), tol.seed),
    })
}

fn run_reconstruct(spec: &ProblemSpec, tol: &Tolerances) -> Result<ReconstructResult, CliError> {
    let fam = spec.family()?;
    let k = spec.operator()?;
    let space = fam.space();
    let r = spec.reconstruct.clone().unwrap_or_default();
    let cert = certify_k_frame(&fam, &k, tol)?;
    if cert.verdict != Verdict::KFrame {
        return Err(sipframe_core::Error::Precondition {
            reason: format!("the family is not certified as a K-frame (verdict {:?})", cert.verdict),
            witness: cert.witness_lower,
        }
        .into());
    }
    let dual = construct_dual_family(&fam, &k, tol)?;
    let residuals = reconstruction_residuals(&fam, &k, &dual, r.trials.unwrap_or(RECONSTRUCT_TRIALS), tol.seed)?;
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    let functional = match &r.functional {
        Some(v) => {
            let fs = functional("reconstruct.functional", v, space.dim())?;
            let target = k.adjoint_apply(&fs)?;
            let rec = dual.reconstruct(&fam.analyze(&fs)?)?;
            let residual = space.dual_norm(&(&target - &rec))? / space.dual_norm(&fs)?.max(f64::MIN_POSITIVE);
            Some(FunctionalReconstruction {
                functional: coords(&fs.0),
                target: coords(&target.0),
                reconstructed: coords(&rec.0),
                residual,
            })
        }
        None => None,
    };
    Ok(ReconstructResult {
        certification: (&cert).into(),
        dual_family: dual.gstars.iter().map(|g| coords(&g.0)).collect(),
        dual_bessel: dual.bessel_constant(space, fam.coeff_exponent(), tol).ok(),
        passed: max_residual <= tol.reconstruction_rel,
        residuals,
        max_residual,
        functional,
    })
}

fn run_perturb(spec: &ProblemSpec, tol: &Tolerances, notes: &mut Vec<String>) -> Result<PerturbResult, CliError> {
    let fam_f = spec.family()?;
    let (fam_g, p) = spec.perturbed_family()?;
    if fam_g.len() != fam_f.len() {
        return Err(CliError::Validation(format!(
            "perturb.family: expected {} members, found {}",
            fam_f.len(),
            fam_g.len()
        )));
    }
    let k = spec.operator()?;
    let inst = PerturbationInstance::new(fam_f, fam_g, k, p.alpha, p.beta, p.gamma)?;
    let cert = certify_k_frame(&inst.fam_f, &inst.k, tol)?;
    let premise = verify_premise(&inst, tol)?;
    let mut out = PerturbResult {
        certification: (&cert).into(),
        premise: (&premise).into(),
        dagger_norm: None,
        factor: None,
        smallness: false,
        conclusion: None,
    };
    if cert.verdict != Verdict::KFrame {
        notes.push("{f_j} is not certified as a K-frame; the conclusion is not checked".into());
        return Ok(out);
    }
    let dag = pseudo_inverse(&inst.k, inst.fam_f.space(), tol)?;
    out.dagger_norm = Some(dag.norm_est);
    if cert.a_est.is_finite() {
        out.factor = Some(perturbation_factor(&inst, cert.a_est, &dag)?);
        out.smallness = smallness_condition(&inst, cert.a_est, &dag)?;
    } else {
        notes.push("K = 0: the smallness condition has no finite lower bound to use".into());
    }
    if !premise.holds {
        notes.push("the perturbation premise fails; the conclusion is not checked".into());
    } else if !out.smallness {
        notes.push("the smallness condition fails; the conclusion is not checked".into());
    } else {
        let c = verify_conclusion(&inst, p.samples.unwrap_or(SANDWICH_SAMPLES), tol)?;
        out.conclusion = Some(Conclusion::from(&c));
    }
    Ok(out)
}

fn run_sample(spec: &ProblemSpec, tol: &Tolerances, notes: &mut Vec<String>) -> Result<SampleResult, CliError> {
    let space = spec.space()?;
    let (features, s) = spec.sample_features()?;
    let m = features.nrows();
    let rkbs = match &s.points {
        Some(labels) => DiscreteRkbs::new(labels.clone(), features, space.clone(), spec.coeff_exponent()?)?,
        None => DiscreteRkbs::with_features(features, space.clone(), spec.coeff_exponent()?)?,
    };
    let z = match &s.pattern {
        Some(idx) => SamplingPattern::new(idx.clone())?,
        None => SamplingPattern::full(m)?,
    };
    if spec.operator.is_some() {
        return Err(CliError::Validation(
            "operator: the sample task selects K through sample.operator".into(),
        ));
    }
    let k = match s.operator {
        SampleOperator::Identity => LinearOperator::identity(space.dim()),
        SampleOperator::Projector => rkbs.sampled_span_projector(&z, tol)?,
    };
    let fs = match &s.functional {
        Some(v) => functional("sample.functional", v, space.dim())?,
        None => DualVector(rng::complex_vector(&mut rng::stream(tol.seed, 0x6673), space.dim())),
    };
    let cert = rkbs.sampled_frame_certify(&z, &k, tol)?;
    let samples = rkbs.sampling_operator(&z, &fs)?;
    let target = k.adjoint_apply(&fs)?;
    let reconstructed = if cert.verdict == Verdict::KFrame {
        Some(rkbs.reconstruct_from_samples(&z, &k, &samples, tol)?)
    } else {
        notes.push("the sampling pattern is not certified; no reconstruction".into());
        None
    };
    let residual = match &reconstructed {
        Some(rec) => Some(space.dual_norm(&(&target - rec))? / space.dual_norm(&target)?.max(f64::MIN_POSITIVE)),
        None => None,
    };
    let mut points = Vec::new();
    if let Some(rec) = &reconstructed {
        for t in 0..m {
            let truth = rkbs.functional_value(&target, t)?;
            let got = rkbs.functional_value(rec, t)?;
            points.push(PointValue {
                point: rkbs.labels()[t].clone(),
                true_value: complex(truth),
                reconstructed: complex(got),
                abs_error: (truth - got).norm(),
            });
        }
    }
    Ok(SampleResult {
        pattern: z.indices().iter().map(|&t| rkbs.labels()[t].clone()).collect(),
        operator: s.operator,
        certification: (&cert).into(),
        functional: coords(&fs.0),
        samples: coords(&samples.0),
        target: coords(&target.0),
        reconstructed: reconstructed.as_ref().map(|r| coords(&r.0)),
        residual,
        points,
    })
}

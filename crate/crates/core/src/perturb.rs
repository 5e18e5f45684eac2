//! Pseudo-inverses, frame-operator inequalities and Paley-Wiener type
//! perturbation of `X_d*`-`K`-frames.

use nalgebra::DMatrix;

use crate::certifier::{certify_bessel, certify_k_frame, CertificationReport, Verdict};
use crate::config::Tolerances;
use crate::error::{check_dim, Error, Result};
use crate::frame::{coordinate_starts, CoeffVector, FrameFamily, LinearOperator};
use crate::linalg::{max_abs_diff, pinv, projector_onto, range_basis, C64};
use crate::optim::{grid_extrema, multistart, to_complex, NormMap, NormRatio, Sense, Strategy};
use crate::rng;
use crate::sip::{DualVector, SipSpace};

/// `K^+` realized with Euclidean-orthogonal complements of the kernel and
/// range.
#[derive(Debug, Clone)]
pub struct PseudoInverse {
    pub source: LinearOperator,
    pub dagger: LinearOperator,
    /// `|K^+|` as an operator on `X`, estimated by optimization.
    pub norm_est: f64,
}

impl PseudoInverse {
    /// `(max |K K^+ K - K|, max |K^+ K K^+ - K^+|)`.
    pub fn identity_residuals(&self) -> (f64, f64) {
        let k = self.source.matrix();
        let d = self.dagger.matrix();
        (max_abs_diff(&(k * d * k), k), max_abs_diff(&(d * k * d), d))
    }

    /// Largest `|f*| / (norm_est |K* f*|)` over seeded `f* = K* h`.
    ///
    /// At most 1 when `R(K) = R(K^H)`; other operators can exceed it
    /// because the Euclidean complements do not make `K K^+` fix `R(K*)`.
    pub fn range_ratio(&self, space: &SipSpace, samples: usize, seed: u64) -> Result<f64> {
        let mut worst = 0.0f64;
        for i in 0..samples {
            let mut r = rng::stream(seed, 0x7069_0000 + i as u64);
            let h = DualVector(rng::complex_vector(&mut r, space.dim()));
            let fs = self.source.adjoint_apply(&h)?;
            let n = space.dual_norm(&fs)?;
            if n <= 1e-12 * space.dual_norm(&h)? {
                continue;
            }
            let kf = space.dual_norm(&self.source.adjoint_apply(&fs)?)?;
            worst = worst.max(n / (self.norm_est * kf));
        }
        Ok(worst)
    }
}

pub fn pseudo_inverse(k: &LinearOperator, space: &SipSpace, tol: &Tolerances) -> Result<PseudoInverse> {
    check_dim(space.dim(), k.nrows())?;
    let dagger = LinearOperator::new(pinv(k.matrix(), tol.rank_rel));
    let norm_est = dagger.operator_norm(space, tol)?;
    Ok(PseudoInverse {
        source: k.clone(),
        dagger,
        norm_est,
    })
}

/// Worst-case ratios of the frame-operator inequality chains; each holds
/// when its ratio is at most `1 + slack`.
#[derive(Debug, Clone)]
pub struct FrameOperatorReport {
    /// `A^2 |K* f*|^2 / f*(S f*)`.
    pub energy_lower: f64,
    /// `f*(S f*) / (B^2 |f*|^2)`.
    pub energy_upper: f64,
    /// `A^2 |K^+|^{-2} |f*| / |S f*|` on `R(K*)`.
    pub range_lower: f64,
    /// `|S f*| / (B^2 |f*|)`.
    pub range_upper: f64,
    /// `|T f*| / (A^{-1} |K^+| |S f*|)` on `R(K*)`.
    pub analysis: f64,
    pub slack: f64,
}

impl FrameOperatorReport {
    pub fn worst(&self) -> f64 {
        [self.energy_lower, self.energy_upper, self.range_lower, self.range_upper, self.analysis]
            .into_iter()
            .fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.worst() <= 1.0 + self.slack
    }
}

/// Samples the three inequality chains relating `S`, `T` and `K*` for a
/// `K`-frame with bounds `a`, `b`.
pub fn frame_operator_inequalities(
    fam: &FrameFamily,
    dag: &PseudoInverse,
    a: f64,
    b: f64,
    samples: usize,
    seed: u64,
    slack: f64,
) -> Result<FrameOperatorReport> {
    let space = fam.space();
    let n = space.dim();
    let k = &dag.source;
    let mut rep = FrameOperatorReport {
        energy_lower: 0.0,
        energy_upper: 0.0,
        range_lower: 0.0,
        range_upper: 0.0,
        analysis: 0.0,
        slack,
    };
    let ratio = |num: f64, den: f64| if num == 0.0 { 0.0 } else { num / den };
    for i in 0..samples {
        let mut r = rng::stream(seed, 0x7335_0000 + i as u64);
        let d = DualVector(rng::complex_vector(&mut r, n));
        let energy = fam.coeff_dual_norm(&fam.analyze(&d)?).powi(2);
        let kd = space.dual_norm(&k.adjoint_apply(&d)?)?;
        let dn = space.dual_norm(&d)?;
        let s = fam.frame_operator(&d)?;
        rep.energy_lower = rep.energy_lower.max(ratio(a * a * kd * kd, energy));
        rep.energy_upper = rep.energy_upper.max(ratio(energy, b * b * dn * dn));
        rep.range_upper = rep.range_upper.max(ratio(space.norm(&s)?, b * b * dn));

        let fs = k.adjoint_apply(&DualVector(rng::complex_vector(&mut r, n)))?;
        let fn_ = space.dual_norm(&fs)?;
        if fn_ == 0.0 {
            continue;
        }
        let sf = space.norm(&fam.frame_operator(&fs)?)?;
        let tf = fam.coeff_dual_norm(&fam.analyze(&fs)?);
        let kdn = dag.norm_est;
        rep.range_lower = rep.range_lower.max(ratio(a * a * fn_ / (kdn * kdn), sf));
        rep.analysis = rep.analysis.max(ratio(tf, kdn * sf / a));
    }
    Ok(rep)
}

/// A family `{g_j}` perturbed from the `K`-frame `{f_j}` with constants
/// `alpha`, `beta`, `gamma`.
#[derive(Debug, Clone)]
pub struct PerturbationInstance {
    pub fam_f: FrameFamily,
    pub fam_g: FrameFamily,
    pub k: LinearOperator,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl PerturbationInstance {
    pub fn new(fam_f: FrameFamily, fam_g: FrameFamily, k: LinearOperator, alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if fam_f.space() != fam_g.space() {
            return Err(Error::InvalidArgument("families live in different spaces".into()));
        }
        if fam_f.coeff_exponent() != fam_g.coeff_exponent() {
            return Err(Error::InvalidArgument("families use different coefficient spaces".into()));
        }
        check_dim(fam_f.len(), fam_g.len())?;
        check_dim(fam_f.space().dim(), k.nrows())?;
        check_dim(fam_f.space().dim(), k.ncols())?;
        for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be a nonnegative number, got {v}")));
            }
        }
        Ok(Self {
            fam_f,
            fam_g,
            k,
            alpha,
            beta,
            gamma,
        })
    }

    fn premise_objective(&self) -> NormRatio {
        let space = self.fam_f.space();
        let p = space.exponent();
        let w = Some(space.weights().to_vec());
        let f = self.fam_f.synthesis_matrix();
        let g = self.fam_g.synthesis_matrix();
        let j = f.ncols();
        NormRatio::new(
            vec![
                (1.0, NormMap::new(g - f, p, w.clone())),
                (-self.alpha, NormMap::new(f.clone(), p, w.clone())),
                (-self.beta, NormMap::new(g.clone(), p, w)),
            ],
            NormMap::new(DMatrix::identity(j, j), self.fam_f.coeff_exponent(), None),
            Sense::Maximize,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PremiseCertification {
    /// Optimizer cross-checked by the projective grid.
    Oracle,
    /// Optimizer only; the family is too long for the grid.
    Optimizer,
}

#[derive(Debug, Clone)]
pub struct PremiseReport {
    /// `sup_{|c| = 1} |(G - F) c| - alpha |F c| - beta |G c|`.
    pub sup: f64,
    pub worst: CoeffVector,
    pub oracle_sup: Option<f64>,
    pub certification: PremiseCertification,
    pub holds: bool,
}

/// Grid resolution used for the premise oracle at a given family length.
pub fn premise_grid_resolution(members: usize) -> usize {
    match members {
        0..=2 => 120,
        _ => 36,
    }
}

pub fn verify_premise(inst: &PerturbationInstance, tol: &Tolerances) -> Result<PremiseReport> {
    let obj = inst.premise_objective();
    let j = inst.fam_f.len();
    let r = multistart(&obj, &coordinate_starts(j), Strategy::Gradient, tol, 0x7072);
    let mut worst = to_complex(&r.best.x);
    worst /= C64::new(inst.fam_f.coeff_norm(&CoeffVector(worst.clone())), 0.0);
    let mut sup = obj.ratio(&worst).unwrap_or(r.best.value);
    let (oracle_sup, certification) = if j <= 3 {
        let res = premise_grid_resolution(j);
        let (_, hi) = grid_extrema(j, res, || (), |z, _| (None, obj.ratio(z)));
        (hi, PremiseCertification::Oracle)
    } else {
        (None, PremiseCertification::Optimizer)
    };
    if let Some(o) = oracle_sup {
        sup = sup.max(o);
    }
    Ok(PremiseReport {
        sup,
        worst: CoeffVector(worst),
        oracle_sup,
        certification,
        holds: sup <= inst.gamma * (1.0 + tol.inequality_slack) + tol.premise_abs,
    })
}

/// `alpha + gamma |K^+| / A`, the contraction factor of the perturbation.
pub fn perturbation_factor(inst: &PerturbationInstance, a_est: f64, dag: &PseudoInverse) -> Result<f64> {
    if !(a_est > 0.0) {
        return Err(Error::Precondition {
            reason: "the smallness condition needs a positive lower frame bound".into(),
            witness: None,
        });
    }
    Ok(inst.alpha + inst.gamma * dag.norm_est / a_est)
}

/// `max{beta, alpha + gamma A^{-1} |K^+| |Phi|} < 1` with `|Phi| = 1`.
pub fn smallness_condition(inst: &PerturbationInstance, a_est: f64, dag: &PseudoInverse) -> Result<bool> {
    Ok(inst.beta.max(perturbation_factor(inst, a_est, dag)?) < 1.0)
}

/// `V Phi U* f*`, the family `{g_j}` synthesizing the dualized analysis
/// coefficients of `{f_j}`.
pub fn transfer(inst: &PerturbationInstance, fstar: &DualVector) -> Result<crate::sip::Vector> {
    let c = inst.fam_f.coeff_duality_map(&inst.fam_f.analyze(fstar)?)?;
    inst.fam_g.synthesize(&c)
}

#[derive(Debug, Clone)]
pub struct ConclusionReport {
    pub a: f64,
    pub b: f64,
    pub k_norm: f64,
    pub dagger_norm: f64,
    /// `alpha + gamma |K^+| / A`.
    pub factor: f64,
    pub bessel_g: f64,
    pub bessel_bound: f64,
    pub bessel_ok: bool,
    /// Present only for `p_d = 2`.
    pub pk: Option<PkFrameCheck>,
    /// Worst `lower_bound / |V Phi U* f*|` and `|V Phi U* f*| / upper_bound`
    /// over sampled `f*` in `R(K*)`.
    pub sandwich_lower: f64,
    pub sandwich_upper: f64,
    pub sandwich_ok: bool,
    /// Per-sample `(lower, upper)` ratios behind the two worst values.
    pub sandwich_trials: Vec<(f64, f64)>,
    pub notes: Vec<String>,
}

impl ConclusionReport {
    pub fn passed(&self) -> bool {
        self.bessel_ok && self.sandwich_ok && self.pk.as_ref().is_none_or(|p| p.passed)
    }
}

#[derive(Debug, Clone)]
pub struct PkFrameCheck {
    /// Euclidean projector onto the span of `V Phi U*` applied to `R(K*)`.
    pub projector: LinearOperator,
    /// `|P|` on `X`; 1 for `p = 2`.
    pub projector_norm: f64,
    pub certification: CertificationReport,
    /// `(1 - factor) A^2 |K^+|^{-2} / (B (1 + beta) |K|)`.
    pub lower_bound: f64,
    /// `(1 - factor A^2 |K^+|^{-2}) / (B (1 + beta) |K|)`, the display
    /// read with the opposite precedence; reported only.
    pub lower_bound_alt: f64,
    pub passed: bool,
}

/// For `samples` random `f*` in `R(K*)`, the ratios
/// `lower_bound / |V Phi U* f*|` and `|V Phi U* f*| / upper_bound`, where
/// the bounds are `(1 -+ factor) / (1 +- beta)` times `|S f*|`. Samples with
/// `S f* = 0` are skipped.
pub fn sandwich_ratios(inst: &PerturbationInstance, factor: f64, samples: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    let space = inst.fam_f.space();
    let n = space.dim();
    let lo = (1.0 - factor) / (1.0 + inst.beta);
    let hi = (1.0 + factor) / (1.0 - inst.beta);
    let mut out = Vec::with_capacity(samples);
    for i in 0..samples {
        let mut r = rng::stream(seed, 0x7377_0000 + i as u64);
        let fs = inst.k.adjoint_apply(&DualVector(rng::complex_vector(&mut r, n)))?;
        let s = space.norm(&inst.fam_f.frame_operator(&fs)?)?;
        if s == 0.0 {
            continue;
        }
        let v = space.norm(&transfer(inst, &fs)?)?;
        out.push((lo * s / v, v / (hi * s)));
    }
    Ok(out)
}

/// Checks the conclusions of the perturbation theorem on a certified
/// instance: the Bessel bound of `{g_j}`, the two-sided estimate of
/// `V Phi U*` on `R(K*)`, and for `p_d = 2` the `PK`-frame lower bound.
pub fn verify_conclusion(inst: &PerturbationInstance, samples: usize, tol: &Tolerances) -> Result<ConclusionReport> {
    if inst.beta >= 1.0 {
        return Err(Error::Precondition {
            reason: "beta must be below 1".into(),
            witness: None,
        });
    }
    let space = inst.fam_f.space();
    let n = space.dim();
    let cert = certify_k_frame(&inst.fam_f, &inst.k, tol)?;
    if cert.verdict != Verdict::KFrame {
        return Err(Error::Precondition {
            reason: "{f_j} is not certified as a K-frame".into(),
            witness: cert.witness_lower,
        });
    }
    let (a, b) = (cert.a_est, cert.b_est);
    let dag = pseudo_inverse(&inst.k, space, tol)?;
    let factor = perturbation_factor(inst, a, &dag)?;
    if !smallness_condition(inst, a, &dag)? {
        return Err(Error::Precondition {
            reason: format!("smallness condition fails: beta {}, factor {factor}", inst.beta),
            witness: None,
        });
    }
    let k_norm = inst.k.operator_norm(space, tol)?;
    let mut notes = Vec::new();

    let bessel_g = certify_bessel(&inst.fam_g, tol).b_est;
    let bessel_bound = ((1.0 + inst.alpha) * b + inst.gamma) / (1.0 - inst.beta);
    let bessel_ok = bessel_g <= bessel_bound * (1.0 + 1e-3);

    let sandwich_trials = sandwich_ratios(inst, factor, samples, tol.seed)?;
    let sandwich_lower = sandwich_trials.iter().fold(0.0f64, |m, t| m.max(t.0));
    let sandwich_upper = sandwich_trials.iter().fold(0.0f64, |m, t| m.max(t.1));
    let sandwich_ok = sandwich_lower <= 1.0 + tol.inequality_slack && sandwich_upper <= 1.0 + tol.inequality_slack;

    let pk = if inst.fam_f.coeff_exponent() == 2.0 {
        // Phi is conjugation here, so V Phi U* is conjugate-linear and maps
        // R(K*) onto the span of its values on a basis.
        let basis = range_basis(&inst.k.adjoint_matrix(), tol.rank_rel);
        let mut images = DMatrix::<C64>::zeros(n, basis.ncols());
        for c in 0..basis.ncols() {
            let v = transfer(inst, &DualVector(basis.column(c).into_owned()))?;
            images.set_column(c, &v.0);
        }
        let projector = LinearOperator::new(projector_onto(&images, tol.rank_rel));
        let projector_norm = projector.operator_norm(space, tol)?;
        let pk_op = projector.compose(&inst.k)?;
        let certification = certify_k_frame(&inst.fam_g, &pk_op, tol)?;
        let scale = a * a / (dag.norm_est * dag.norm_est);
        let den = b * (1.0 + inst.beta) * k_norm;
        let lower_bound = (1.0 - factor) * scale / den;
        let lower_bound_alt = (1.0 - factor * scale) / den;
        let passed = certification.verdict == Verdict::KFrame && certification.a_est >= lower_bound * (1.0 - 1e-2);
        Some(PkFrameCheck {
            projector,
            projector_norm,
            certification,
            lower_bound,
            lower_bound_alt,
            passed,
        })
    } else {
        notes.push("p_d != 2: V Phi U* is nonlinear, so only the Bessel bound and the two-sided estimate are checked".into());
        None
    };

    Ok(ConclusionReport {
        a,
        b,
        k_norm,
        dagger_norm: dag.norm_est,
        factor,
        bessel_g,
        bessel_bound,
        bessel_ok,
        pk,
        sandwich_lower,
        sandwich_upper,
        sandwich_ok,
        sandwich_trials,
        notes,
    })
}

/// Perturbation `g_j = (1 + eps) f_j + E e_j` with `|E|` scaled by
/// `size`; `alpha = eps`, and `gamma` is the premise supremum at that
/// `alpha, beta` inflated by 1%.
pub fn perturbed_instance(
    fam_f: &FrameFamily,
    k: &LinearOperator,
    eps: f64,
    beta: f64,
    size: f64,
    seed: u64,
    tol: &Tolerances,
) -> Result<PerturbationInstance> {
    let mut r = rng::stream(seed, 0x7065_7274);
    let f = fam_f.synthesis_matrix();
    let e = rng::complex_matrix(&mut r, f.nrows(), f.ncols());
    let scale = size * f.norm() / e.norm().max(f64::MIN_POSITIVE);
    let g = f * C64::new(1.0 + eps, 0.0) + e * C64::new(scale, 0.0);
    let fam_g = FrameFamily::from_synthesis(fam_f.space().clone(), g, fam_f.coeff_exponent())?;
    let mut inst = PerturbationInstance::new(fam_f.clone(), fam_g, k.clone(), eps, beta, 0.0)?;
    let m = verify_premise(&inst, tol)?.sup;
    inst.gamma = m.max(0.0) * 1.01;
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::random_family;
    use crate::instances::hermitian_in_range;
    use crate::sip::Vector;

    fn tol() -> Tolerances {
        Tolerances::default().with_restarts(16)
    }

    fn coordinate_family() -> FrameFamily {
        let x = SipSpace::new(3, 1.5).unwrap();
        FrameFamily::new(x, &[Vector::unit(3, 0), Vector::unit(3, 1), Vector::zeros(3)], 1.5).unwrap()
    }

    #[test]
    fn pseudo_inverse_examples() {
        let x3 = SipSpace::new(3, 1.5).unwrap();
        let p = pseudo_inverse(&LinearOperator::identity(3), &x3, &tol()).unwrap();
        assert!((p.norm_est - 1.0).abs() < 1e-9);
        assert!(max_abs_diff(p.dagger.matrix(), &DMatrix::identity(3, 3)) < 1e-14);
        let k = LinearOperator::diagonal(&[1.0, 1.0, 0.0]);
        let p = pseudo_inverse(&k, &x3, &tol()).unwrap();
        assert!(max_abs_diff(p.dagger.matrix(), k.matrix()) < 1e-14);
        let x2 = SipSpace::new(2, 1.5).unwrap();
        let p = pseudo_inverse(&LinearOperator::diagonal(&[2.0, 0.0]), &x2, &tol()).unwrap();
        assert!((p.dagger.matrix()[(0, 0)].re - 0.5).abs() < 1e-14);
        assert!((p.norm_est - 0.5).abs() < 1e-9);
    }

    #[test]
    fn pseudo_inverse_identities_and_range_bound() {
        let mut r = rng::stream(41, 0);
        for n in 1..=6 {
            let x = SipSpace::new(n, 3.0).unwrap();
            let fam = random_family(&mut r, x.clone(), n + 1, 2.0).unwrap();
            for k in [
                LinearOperator::new(rng::complex_matrix(&mut r, n, n)),
                hermitian_in_range(&mut r, &fam, n.div_ceil(2)),
            ] {
                let p = pseudo_inverse(&k, &x, &tol()).unwrap();
                let (r1, r2) = p.identity_residuals();
                assert!(r1 < 1e-10 && r2 < 1e-10, "{r1} {r2}");
                assert!(p.range_ratio(&x, 200, 3).unwrap() <= 1.0 + 1e-6);
            }
        }
    }

    #[test]
    fn nilpotent_operator_breaks_range_bound() {
        let x = SipSpace::new(2, 2.0).unwrap();
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        let p = pseudo_inverse(&LinearOperator::new(m), &x, &tol()).unwrap();
        // K* kills R(K*) entirely, so no finite |K^+| can bound |f*|
        assert!(p.range_ratio(&x, 20, 3).unwrap() > 1.0);
    }

    #[test]
    fn frame_operator_chains() {
        let mut r = rng::stream(42, 0);
        for (p, pd) in [(1.5, 3.0), (3.0, 1.5), (2.0, 2.0)] {
            let fam = random_family(&mut r, SipSpace::new(3, p).unwrap(), 3, pd).unwrap();
            let k = hermitian_in_range(&mut r, &fam, 2);
            let cert = certify_k_frame(&fam, &k, &tol()).unwrap();
            assert!(cert.is_k_frame());
            let dag = pseudo_inverse(&k, fam.space(), &tol()).unwrap();
            let rep = frame_operator_inequalities(&fam, &dag, cert.a_est, cert.b_est, 200, 7, 1e-6).unwrap();
            assert!(rep.passed(), "{rep:?}");
        }
    }

    #[test]
    fn premise_examples() {
        let t = tol();
        let f = coordinate_family();
        let k = LinearOperator::diagonal(&[1.0, 1.0, 0.0]);
        let same = PerturbationInstance::new(f.clone(), f.clone(), k.clone(), 0.0, 0.0, 0.0).unwrap();
        let rep = verify_premise(&same, &t).unwrap();
        assert!(rep.holds && rep.sup <= 1e-12 && rep.certification == PremiseCertification::Oracle);

        let g = FrameFamily::from_synthesis(f.space().clone(), f.synthesis_matrix() * C64::new(1.1, 0.0), 1.5).unwrap();
        let scaled = PerturbationInstance::new(f.clone(), g, k.clone(), 0.1, 0.0, 0.0).unwrap();
        assert!(verify_premise(&scaled, &t).unwrap().holds);

        let delta = 0.3;
        let g = FrameFamily::new(
            f.space().clone(),
            &[Vector::unit(3, 0), Vector::unit(3, 1), Vector::from_real(&[0.0, 0.0, delta])],
            1.5,
        )
        .unwrap();
        let inst = PerturbationInstance::new(f.clone(), g, k, 0.0, 0.0, delta).unwrap();
        let rep = verify_premise(&inst, &t).unwrap();
        assert!((rep.sup - delta).abs() < 1e-9 && rep.holds, "{rep:?}");
        assert!((rep.oracle_sup.unwrap() - delta).abs() < 1e-9);
    }

    #[test]
    fn smallness_examples() {
        let t = tol();
        let f = coordinate_family();
        let k = LinearOperator::diagonal(&[1.0, 1.0, 0.0]);
        let dag = pseudo_inverse(&k, f.space(), &t).unwrap();
        let mk = |a, b, g| PerturbationInstance::new(f.clone(), f.clone(), k.clone(), a, b, g).unwrap();
        assert!(smallness_condition(&mk(0.0, 0.0, 0.0), 1.0, &dag).unwrap());
        assert!(!smallness_condition(&mk(0.0, 1.0, 0.0), 1.0, &dag).unwrap());
        assert!(smallness_condition(&mk(0.0, 0.0, 0.5), 1.0, &dag).unwrap());
        assert!(smallness_condition(&mk(0.0, 0.0, 0.0), 0.0, &dag).is_err());
    }

    #[test]
    fn conclusion_identical_and_scaled() {
        let t = tol();
        let mut r = rng::stream(43, 0);
        let fam = random_family(&mut r, SipSpace::new(3, 2.0).unwrap(), 4, 2.0).unwrap();
        let k = hermitian_in_range(&mut r, &fam, 2);
        let same = PerturbationInstance::new(fam.clone(), fam.clone(), k.clone(), 0.0, 0.0, 0.0).unwrap();
        let rep = verify_conclusion(&same, 50, &t).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert!((rep.bessel_g - rep.b).abs() < 1e-8);
        let pk = rep.pk.unwrap();
        // with g = f the projector maps onto S(R(K*)) = F F^H R(K)
        let f = fam.synthesis_matrix();
        let proj_k = projector_onto(&(f * f.adjoint() * k.matrix()), 1e-10);
        assert!(max_abs_diff(pk.projector.matrix(), &proj_k) < 1e-9);

        let g = FrameFamily::from_synthesis(fam.space().clone(), fam.synthesis_matrix() * C64::new(1.1, 0.0), 2.0).unwrap();
        let scaled = PerturbationInstance::new(fam.clone(), g, k.clone(), 0.1, 0.0, 0.0).unwrap();
        assert!(verify_premise(&scaled, &t).unwrap().holds);
        let rep = verify_conclusion(&scaled, 50, &t).unwrap();
        assert!(rep.passed() && rep.bessel_g <= 1.1 * rep.b * (1.0 + 1e-6), "{rep:?}");

        let bad = PerturbationInstance::new(fam.clone(), fam, k, 0.0, 1.0, 0.0).unwrap();
        assert!(matches!(verify_conclusion(&bad, 5, &t), Err(Error::Precondition { .. })));
    }

    #[test]
    fn generated_perturbations_satisfy_conclusion() {
        let t = tol();
        let mut r = rng::stream(44, 0);
        for (i, (p, pd)) in [(2.0, 2.0), (1.5, 2.0), (3.0, 2.0), (1.5, 3.0), (3.0, 1.5)].into_iter().enumerate() {
            let fam = random_family(&mut r, SipSpace::new(3, p).unwrap(), 4, pd).unwrap();
            let k = hermitian_in_range(&mut r, &fam, 2);
            let inst = perturbed_instance(&fam, &k, 0.05, 0.1, 0.01, i as u64, &t).unwrap();
            assert!(verify_premise(&inst, &t).unwrap().holds);
            let rep = verify_conclusion(&inst, 50, &t).unwrap();
            assert!(rep.passed(), "{rep:?}");
            assert_eq!(rep.pk.is_some(), pd == 2.0);
        }
    }
}

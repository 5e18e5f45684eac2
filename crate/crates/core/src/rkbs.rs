//! Discrete s.i.p. reproducing kernel Banach spaces given by a feature map.
//!
//! A function on the finite set `Omega = {t_1, ..., t_m}` is
//! `f(t_i) = sum_k a_k V[i, k]` and carries the norm of its coefficient
//! vector `a` in a weighted `l^p` space. Elements and functionals are
//! stored through their coefficients, so `G(t, .)` is the element dual to
//! the evaluation row `V[t, .]` and a functional `f*` takes the value
//! `f*(t) = f*(G(t, .))`.

use nalgebra::DMatrix;

use crate::atomic::construct_dual_family;
use crate::certifier::{certify_k_frame, CertificationReport};
use crate::config::Tolerances;
use crate::error::{check_dim, Error, Result};
use crate::frame::{CoeffDualVector, FrameFamily, LinearOperator};
use crate::linalg::{numerical_rank, projector_onto, svd_full, C64};
use crate::sip::{DualVector, SipSpace, Vector};

#[derive(Debug, Clone)]
pub struct DiscreteRkbs {
    labels: Vec<String>,
    features: DMatrix<C64>,
    coeff_space: SipSpace,
    sample_exponent: f64,
}

impl DiscreteRkbs {
    /// `sample_exponent` is the `p_d` of the coefficient space that samples
    /// are measured in.
    pub fn new(labels: Vec<String>, features: DMatrix<C64>, coeff_space: SipSpace, sample_exponent: f64) -> Result<Self> {
        check_dim(labels.len(), features.nrows())?;
        check_dim(coeff_space.dim(), features.ncols())?;
        // rejects sample exponents outside (1, inf)
        SipSpace::new(1, sample_exponent)?;
        for (i, row) in features.row_iter().enumerate() {
            if row.iter().all(|z| z.norm() == 0.0) {
                return Err(Error::InvalidArgument(format!("point {i} has a zero feature row")));
            }
        }
        let rank = numerical_rank(&svd_full(&features).sigma, 1e-10);
        if rank < features.ncols() {
            return Err(Error::RankDeficient {
                rank,
                expected: features.ncols(),
            });
        }
        Ok(Self {
            labels,
            features,
            coeff_space,
            sample_exponent,
        })
    }

    /// Points labelled `t1, t2, ...`.
    pub fn with_features(features: DMatrix<C64>, coeff_space: SipSpace, sample_exponent: f64) -> Result<Self> {
        let labels = (1..=features.nrows()).map(|i| format!("t{i}")).collect();
        Self::new(labels, features, coeff_space, sample_exponent)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn point_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn features(&self) -> &DMatrix<C64> {
        &self.features
    }

    pub fn coeff_space(&self) -> &SipSpace {
        &self.coeff_space
    }

    pub fn sample_exponent(&self) -> f64 {
        self.sample_exponent
    }

    fn check_point(&self, t: usize) -> Result<()> {
        if t < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownPoint(t))
        }
    }

    /// Evaluation at `t` as a functional on coefficients.
    pub fn evaluation(&self, t: usize) -> Result<DualVector> {
        self.check_point(t)?;
        Ok(DualVector(self.features.row(t).transpose()))
    }

    /// `f(t)` for the function with coefficients `a`.
    pub fn evaluate(&self, a: &Vector, t: usize) -> Result<C64> {
        self.evaluation(t)?.apply(a)
    }

    /// `G(t, .)`: the element with `f(t) = [f, G(t, .)]`.
    pub fn kernel_g(&self, t: usize) -> Result<Vector> {
        self.coeff_space.undualize(&self.evaluation(t)?)
    }

    /// `k(s, t)`, the value at `s` of `k(., t)`, the functional dual to
    /// `G(t, .)`.
    pub fn kernel_k(&self, s: usize, t: usize) -> Result<C64> {
        let kt = self.coeff_space.dualize(&self.kernel_g(t)?)?;
        self.functional_value(&kt, s)
    }

    /// `f*(t) = f*(G(t, .))`.
    pub fn functional_value(&self, fstar: &DualVector, t: usize) -> Result<C64> {
        fstar.apply(&self.kernel_g(t)?)
    }

    /// The family `K_Z = {G(t_j, .)}_{j in Z}`.
    pub fn sampled_family(&self, z: &SamplingPattern) -> Result<FrameFamily> {
        z.check(self)?;
        let members = z.indices.iter().map(|&t| self.kernel_g(t)).collect::<Result<Vec<_>>>()?;
        FrameFamily::new(self.coeff_space.clone(), &members, self.sample_exponent)
    }

    /// `{f*(t_j)}_{j in Z}` as the analysis coefficients of `K_Z`.
    pub fn sampling_operator(&self, z: &SamplingPattern, fstar: &DualVector) -> Result<CoeffDualVector> {
        self.sampled_family(z)?.analyze(fstar)
    }

    /// `{f*(t_j)}` computed as `[G(t_j, .), f]` with `f` the element dual
    /// to `f*`.
    pub fn sample_directly(&self, z: &SamplingPattern, fstar: &DualVector) -> Result<CoeffDualVector> {
        z.check(self)?;
        let f = self.coeff_space.undualize(fstar)?;
        let vals = z
            .indices
            .iter()
            .map(|&t| self.coeff_space.sip(&self.kernel_g(t)?, &f))
            .collect::<Result<Vec<_>>>()?;
        Ok(CoeffDualVector::new(vals))
    }

    /// Certifies `K_Z` as a `K`-frame; with `K = I` this decides whether `Z`
    /// is a stable sampling set.
    pub fn sampled_frame_certify(&self, z: &SamplingPattern, k: &LinearOperator, tol: &Tolerances) -> Result<CertificationReport> {
        certify_k_frame(&self.sampled_family(z)?, k, tol)
    }

    /// `sum_j s_j g_j*` for the dual family of `K_Z`; equals `K* f*` when
    /// `s = I_Z(f*)`.
    pub fn reconstruct_from_samples(
        &self,
        z: &SamplingPattern,
        k: &LinearOperator,
        samples: &CoeffDualVector,
        tol: &Tolerances,
    ) -> Result<DualVector> {
        check_dim(z.len(), samples.len())?;
        let dual = construct_dual_family(&self.sampled_family(z)?, k, tol)?;
        dual.reconstruct(samples)
    }

    /// Euclidean projector onto the span of `K_Z`, the natural `K` for a
    /// pattern too small to sample everything.
    pub fn sampled_span_projector(&self, z: &SamplingPattern, tol: &Tolerances) -> Result<LinearOperator> {
        let fam = self.sampled_family(z)?;
        Ok(LinearOperator::new(projector_onto(fam.synthesis_matrix(), tol.rank_rel)))
    }
}

/// Indices of the sampled points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingPattern {
    indices: Vec<usize>,
}

impl SamplingPattern {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidArgument("sampling pattern is empty".into()));
        }
        let mut seen = indices.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != indices.len() {
            return Err(Error::InvalidArgument("sampling pattern repeats a point".into()));
        }
        Ok(Self { indices })
    }

    pub fn full(m: usize) -> Result<Self> {
        Self::new((0..m).collect())
    }

    /// Every point except `t`.
    pub fn without(m: usize, t: usize) -> Result<Self> {
        Self::new((0..m).filter(|&i| i != t).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub(crate) fn check(&self, rkbs: &DiscreteRkbs) -> Result<()> {
        match self.indices.iter().find(|&&t| t >= rkbs.len()) {
            Some(&t) => Err(Error::UnknownPoint(t)),
            None => Ok(()),
        }
    }
}

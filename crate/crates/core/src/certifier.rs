//! Numerical certification of the `X_d*`-`K`-frame inequalities
//!
//! ```text
//! A |K* f*| <= |T f*|_{X_d*} <= B |f*|
//! ```
//!
//! `B` is the supremum of `|T f*| / |f*|` and `A` the infimum of
//! `|T f*| / |K* f*|` over `K* f* != 0`. A functional in the kernel of `T`
//! that `K*` does not annihilate refutes the lower bound outright; it is
//! searched for by an SVD before any optimization runs. Otherwise both
//! ratios are optimized by multi-start search on the unit sphere, and for
//! complex dimension at most 3 a projective grid oracle can cross-check the
//! result.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{check_dim, Error, Result};
use crate::frame::{coordinate_starts, FrameFamily, LinearOperator};
use crate::linalg::{null_space, svd_full, C64};
use crate::optim::{grid_minima, multistart, to_complex, NormMap, NormRatio, Sense, Strategy};
use crate::rng;
use crate::sip::{weighted_lp_norm, DualVector, SipSpace};

/// Largest complex dimension the grid oracle accepts.
pub const GRID_ORACLE_MAX_DIM: usize = 3;

/// Angular discretization error allowance used when comparing the
/// optimizer against the grid oracle.
pub const GRID_ERROR: f64 = 2e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    KFrame,
    BesselOnly,
    NotBesselBoundFound,
    Refuted,
}

#[derive(Debug, Clone)]
pub struct CertificationReport {
    /// Lower bound estimate; `+inf` when `K = 0` makes it vacuous.
    pub a_est: f64,
    pub b_est: f64,
    /// Unit-norm functional attaining `a_est` (absent when vacuous).
    pub witness_lower: Option<DualVector>,
    /// Unit-norm functional attaining `b_est`.
    pub witness_upper: DualVector,
    pub oracle_a: Option<f64>,
    pub oracle_b: Option<f64>,
    pub verdict: Verdict,
    pub restarts_used: usize,
    pub converged: bool,
    /// The refutation came from the kernel of `T` rather than the optimizer.
    pub kernel_refutation: bool,
    pub notes: Vec<String>,
}

impl CertificationReport {
    pub fn is_k_frame(&self) -> bool {
        self.verdict == Verdict::KFrame
    }
}

fn normalized(space: &SipSpace, d: DualVector) -> DualVector {
    let n = space.dual_norm(&d).unwrap_or(0.0);
    if n > 0.0 {
        d.scale(C64::new(1.0 / n, 0.0))
    } else {
        d
    }
}

fn check_operator(fam: &FrameFamily, k: &LinearOperator) -> Result<()> {
    check_dim(fam.space().dim(), k.nrows())?;
    check_dim(fam.space().dim(), k.ncols())
}

/// Upper bound `B = sup |T f*| / |f*|` with its witness.
fn upper_bound(fam: &FrameFamily, tol: &Tolerances) -> (f64, DualVector, usize, bool) {
    let space = fam.space();
    let n = space.dim();
    if fam.synthesis_matrix().iter().all(|z| z.norm() == 0.0) {
        return (0.0, normalized(space, DualVector::unit(n, 0)), 0, true);
    }
    let obj = fam.analysis_ratio(None, Sense::Maximize);
    let r = multistart(&obj, &coordinate_starts(n), Strategy::Gradient, tol, 0xb0);
    let w = normalized(space, DualVector(to_complex(&r.best.x)));
    let b = obj.ratio(&w.0).unwrap_or(r.best.value);
    (b, w, r.restarts, r.all_converged)
}

/// Searches `ker T` (orthonormal basis `null`) for a functional not
/// annihilated by `K*`.
fn kernel_witness(space: &SipSpace, null: &DMatrix<C64>, kt: &DMatrix<C64>, tol: &Tolerances) -> Option<DualVector> {
    if null.ncols() == 0 {
        return None;
    }
    let svd = svd_full(&(kt * null));
    let top = svd.sigma.first().copied().unwrap_or(0.0);
    let scale = svd_full(kt).sigma.first().copied().unwrap_or(0.0);
    if top <= tol.span_rel * scale {
        return None;
    }
    let v = svd.v.column(0).into_owned();
    Some(normalized(space, DualVector(null * v)))
}

/// A functional with `T f* = 0` and `K* f* != 0`, if one exists.
pub(crate) fn kernel_inclusion_witness(fam: &FrameFamily, k: &LinearOperator, tol: &Tolerances) -> Option<DualVector> {
    let null = null_space(&fam.analysis_matrix(), tol.rank_rel);
    kernel_witness(fam.space(), &null, &k.adjoint_matrix(), tol)
}

/// Estimates the optimal `X_d*`-`K`-frame bounds of `fam`.
pub fn certify_k_frame(fam: &FrameFamily, k: &LinearOperator, tol: &Tolerances) -> Result<CertificationReport> {
    check_operator(fam, k)?;
    let space = fam.space();
    let n = space.dim();
    let (b_est, witness_upper, upper_restarts, upper_conv) = upper_bound(fam, tol);
    let mut notes = Vec::new();
    let mut report = CertificationReport {
        a_est: f64::INFINITY,
        b_est,
        witness_lower: None,
        witness_upper,
        oracle_a: None,
        oracle_b: None,
        verdict: Verdict::KFrame,
        restarts_used: upper_restarts,
        converged: upper_conv,
        kernel_refutation: false,
        notes: Vec::new(),
    };
    if !b_est.is_finite() {
        report.verdict = Verdict::NotBesselBoundFound;
        return Ok(report);
    }
    if k.is_zero() {
        notes.push("K = 0: the lower inequality is vacuous, A reported as +inf".to_string());
        report.notes = notes;
        return Ok(report);
    }
    let kt = k.adjoint_matrix();
    let obj = fam.analysis_ratio(Some(&kt), Sense::Minimize);
    let null = null_space(&fam.analysis_matrix(), tol.rank_rel);
    if let Some(w) = kernel_witness(space, &null, &kt, tol) {
        report.a_est = obj.ratio(&w.0).unwrap_or(0.0);
        report.witness_lower = Some(w);
        report.verdict = Verdict::Refuted;
        report.kernel_refutation = true;
        notes.push("a functional in ker T is not annihilated by K*".to_string());
        report.notes = notes;
        return Ok(report);
    }
    // With ker T inside ker K*, both norms are constant along ker T, so the
    // search runs over its orthogonal complement.
    let basis = if null.ncols() == 0 {
        DMatrix::identity(n, n)
    } else {
        null_space(&null.adjoint(), tol.rank_rel)
    };
    let dw = if space.is_unweighted() { None } else { Some(space.dual_weights()) };
    let reduced = NormRatio::simple(
        NormMap::new(fam.analysis_matrix() * &basis, fam.coeff_conjugate(), None),
        NormMap::new(&kt * &basis, space.conjugate(), dw),
        Sense::Minimize,
    );
    let r = multistart(&reduced, &coordinate_starts(basis.ncols()), Strategy::Gradient, tol, 0xa0);
    let w = normalized(space, DualVector(&basis * to_complex(&r.best.x)));
    report.restarts_used += r.restarts;
    report.converged &= r.all_converged;
    let a = obj.ratio(&w.0).unwrap_or(-r.best.value);
    report.a_est = a;
    report.witness_lower = Some(w);
    if a < tol.refute_ratio {
        report.verdict = Verdict::Refuted;
        notes.push("optimizer found a numerically null lower ratio".to_string());
    }
    report.notes = notes;
    Ok(report)
}

/// `X_d*`-frame certification, i.e. `K = I`.
pub fn certify_frame(fam: &FrameFamily, tol: &Tolerances) -> Result<CertificationReport> {
    certify_k_frame(fam, &LinearOperator::identity(fam.space().dim()), tol)
}

/// Bessel bound only; the verdict is `BesselOnly` unless no finite bound
/// was found.
pub fn certify_bessel(fam: &FrameFamily, tol: &Tolerances) -> CertificationReport {
    let (b_est, witness_upper, restarts, conv) = upper_bound(fam, tol);
    CertificationReport {
        a_est: 0.0,
        b_est,
        witness_lower: None,
        witness_upper,
        oracle_a: None,
        oracle_b: None,
        verdict: if b_est.is_finite() {
            Verdict::BesselOnly
        } else {
            Verdict::NotBesselBoundFound
        },
        restarts_used: restarts,
        converged: conv,
        kernel_refutation: false,
        notes: Vec::new(),
    }
}

/// Grid values of the frame ratios for `K = I` and a given `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridBounds {
    /// Smallest `|T f*| / |f*|`, the frame lower bound.
    pub frame_lower: f64,
    /// Smallest `|T f*| / |K* f*|`; `None` when `K* = 0` on every point.
    pub k_lower: Option<f64>,
    /// Largest `|T f*| / |f*|`.
    pub upper: f64,
}

/// Exhaustive evaluation of the frame ratios on the projective grid, for
/// `K = I` and the given `K` in one pass.
pub fn grid_bounds(fam: &FrameFamily, k: &LinearOperator, resolution: usize) -> Result<GridBounds> {
    check_operator(fam, k)?;
    let space = fam.space();
    let n = space.dim();
    if n > GRID_ORACLE_MAX_DIM {
        return Err(Error::DimensionTooLarge {
            dim: n,
            limit: GRID_ORACLE_MAX_DIM,
        });
    }
    if resolution < 2 {
        return Err(Error::InvalidArgument("grid resolution must be at least 2".into()));
    }
    let t = NormMap::new(fam.analysis_matrix(), fam.coeff_conjugate(), None);
    let dw = if space.is_unweighted() { None } else { Some(space.dual_weights()) };
    let kt = NormMap::new(k.adjoint_matrix(), space.conjugate(), dw.clone());
    let floor = 1e-12 * k.matrix().norm();
    let q = space.conjugate();
    let [frame_lower, k_lower, neg_upper] = grid_minima(
        n,
        resolution,
        || (DVector::zeros(t.matrix.nrows()), DVector::zeros(n)),
        |z, (tb, kb)| {
            let tz = t.eval_with(z, tb);
            let nz = weighted_lp_norm(z.as_slice(), q, dw.as_deref());
            let kz = kt.eval_with(z, kb);
            let r = tz / nz;
            [Some(r), (kz > floor).then(|| tz / kz), Some(-r)]
        },
    );
    Ok(GridBounds {
        frame_lower: frame_lower.unwrap_or(0.0),
        k_lower,
        upper: neg_upper.map_or(0.0, |v| -v),
    })
}

/// Exhaustive evaluation of both frame ratios on the projective grid.
/// Returns `(oracle_a, oracle_b)`; `oracle_a` is `None` when `K* = 0` on
/// every grid point.
pub fn grid_oracle(fam: &FrameFamily, k: &LinearOperator, resolution: usize) -> Result<(Option<f64>, f64)> {
    let g = grid_bounds(fam, k, resolution)?;
    Ok((g.k_lower, g.upper))
}

/// Runs [`certify_k_frame`] and attaches the grid oracle.
pub fn certify_with_oracle(
    fam: &FrameFamily,
    k: &LinearOperator,
    resolution: usize,
    tol: &Tolerances,
) -> Result<CertificationReport> {
    let mut rep = certify_k_frame(fam, k, tol)?;
    let (a, b) = grid_oracle(fam, k, resolution)?;
    rep.oracle_a = a;
    rep.oracle_b = Some(b);
    Ok(rep)
}

/// Analysis ratio `|T f*| / |f*|` at `samples` seeded random directions.
pub fn ratio_profile(fam: &FrameFamily, samples: usize, seed: u64) -> Vec<f64> {
    let obj = fam.analysis_ratio(None, Sense::Maximize);
    let n = fam.space().dim();
    (0..samples)
        .map(|i| {
            let mut r = rng::stream(seed, 0x7072_0000 + i as u64);
            let x = rng::unit_sphere(&mut r, 2 * n);
            obj.ratio(&to_complex(&x)).unwrap_or(0.0)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Margin {
    pub margin: f64,
    pub witness: DualVector,
}

/// `inf |Q* f*| / |f*|`; positive exactly when `Q*` is bounded below.
pub fn bounded_below_margin(q: &LinearOperator, space: &SipSpace, tol: &Tolerances) -> Result<Margin> {
    let n = space.dim();
    check_dim(n, q.nrows())?;
    check_dim(n, q.ncols())?;
    let qt = q.adjoint_matrix();
    let dw = if space.is_unweighted() { None } else { Some(space.dual_weights()) };
    let obj = NormRatio::simple(
        NormMap::new(qt.clone(), space.conjugate(), dw.clone()),
        NormMap::new(DMatrix::identity(n, n), space.conjugate(), dw),
        Sense::Maximize,
    );
    let null = null_space(&qt, tol.rank_rel);
    if null.ncols() > 0 {
        let w = normalized(space, DualVector(null.column(0).into_owned()));
        return Ok(Margin {
            margin: obj.ratio(&w.0).unwrap_or(0.0),
            witness: w,
        });
    }
    let min_obj = NormRatio::simple(obj.numer[0].1.clone(), obj.denom.clone(), Sense::Minimize);
    let r = multistart(&min_obj, &coordinate_starts(n), Strategy::Gradient, tol, 0xbb);
    let w = normalized(space, DualVector(to_complex(&r.best.x)));
    Ok(Margin {
        margin: min_obj.ratio(&w.0).unwrap_or(-r.best.value),
        witness: w,
    })
}

#[derive(Debug, Clone)]
pub struct TransformedReport {
    pub base: CertificationReport,
    pub q_family: CertificationReport,
    pub q_margin: Margin,
    /// `margin(Q*) > 0` exactly when `{Q f_j}` is certified a frame.
    pub q_consistent: bool,
    pub k_family: CertificationReport,
    pub k_norm: f64,
    /// `A({K f_j}) >= A (1 - tol)`.
    pub k_lower_ok: bool,
    /// `B({K f_j}) <= B |K| (1 + tol)`.
    pub k_upper_ok: bool,
}

impl TransformedReport {
    pub fn passed(&self) -> bool {
        self.q_consistent && self.k_lower_ok && self.k_upper_ok
    }
}

/// Certifies `{Q f_j}` against the bounded-below margin of `Q*` and
/// `{K f_j}` as a `K`-frame with bounds `A` and `B |K|`.
pub fn transformed_family_checks(
    fam: &FrameFamily,
    q: &LinearOperator,
    k: &LinearOperator,
    rel: f64,
    tol: &Tolerances,
) -> Result<TransformedReport> {
    let base = certify_frame(fam, tol)?;
    if !base.is_k_frame() {
        return Err(Error::Precondition {
            reason: "the base family is not an X_d*-frame".into(),
            witness: base.witness_lower.clone(),
        });
    }
    let q_family = certify_frame(&fam.transformed(q)?, tol)?;
    let q_margin = bounded_below_margin(q, fam.space(), tol)?;
    let q_consistent = (q_margin.margin > tol.refute_ratio) == q_family.is_k_frame();
    let k_family = certify_k_frame(&fam.transformed(k)?, k, tol)?;
    let k_norm = k.operator_norm(fam.space(), tol)?;
    let k_lower_ok = k_family.a_est >= base.a_est * (1.0 - rel);
    let k_upper_ok = k_family.b_est <= base.b_est * k_norm * (1.0 + rel);
    Ok(TransformedReport {
        base,
        q_family,
        q_margin,
        q_consistent,
        k_family,
        k_norm,
        k_lower_ok,
        k_upper_ok,
    })
}

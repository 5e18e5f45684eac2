//! Frame families, analysis and synthesis operators, the coefficient-space
//! duality map and the (nonlinear) frame operator `S = U Phi T`.
//!
//! A family `{f_j}` of `J` vectors in `X` comes with a coefficient space
//! `X_d = l^{p_d}(J)` (unweighted). Functionals on `X_d` are stored as their
//! coefficient lists, so `X_d*` is `l^{q_d}(J)` acting by `sum_j c_j a_j`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::config::Tolerances;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{C64, ZERO};
use crate::optim::{multistart, NormMap, NormRatio, Sense, Strategy};
use crate::rng;
use crate::sip::{conjugate_exponent, coord_newtype, lp_duality, weighted_lp_norm, DualVector, SipSpace, Vector};

/// Element of the coefficient space `X_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVector(pub DVector<C64>);

/// Functional on `X_d`, i.e. an element of `X_d*`, by coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffDualVector(pub DVector<C64>);

coord_newtype!(CoeffVector);
coord_newtype!(CoeffDualVector);

impl CoeffDualVector {
    pub fn apply(&self, c: &CoeffVector) -> Result<C64> {
        check_dim(self.len(), c.len())?;
        Ok(self.0.iter().zip(c.0.iter()).map(|(a, b)| a * b).sum())
    }
}

/// Dense operator on coordinates. Its Banach adjoint acts on action
/// coefficients through the plain (non-conjugated) transpose, so that
/// `(K* f*)(g) = f*(K g)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    matrix: DMatrix<C64>,
}

impl LinearOperator {
    pub fn new(matrix: DMatrix<C64>) -> Self {
        Self { matrix }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n))
    }

    pub fn zero(n: usize) -> Self {
        Self::new(DMatrix::zeros(n, n))
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let d = DVector::from_iterator(entries.len(), entries.iter().map(|&x| C64::new(x, 0.0)));
        Self::new(DMatrix::from_diagonal(&d))
    }

    /// Operator whose adjoint is the given array on action coefficients.
    pub fn from_adjoint(adjoint: DMatrix<C64>) -> Self {
        Self::new(adjoint.transpose())
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// The array of `K*` on action coefficients.
    pub fn adjoint_matrix(&self) -> DMatrix<C64> {
        self.matrix.transpose()
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|z| *z == ZERO)
    }

    pub fn apply(&self, g: &Vector) -> Result<Vector> {
        check_dim(self.ncols(), g.len())?;
        Ok(Vector(&self.matrix * &g.0))
    }

    pub fn adjoint_apply(&self, f: &DualVector) -> Result<DualVector> {
        check_dim(self.nrows(), f.len())?;
        Ok(DualVector(self.matrix.tr_mul(&f.0)))
    }

    pub fn compose(&self, inner: &LinearOperator) -> Result<LinearOperator> {
        check_dim(self.ncols(), inner.nrows())?;
        Ok(Self::new(&self.matrix * &inner.matrix))
    }

    /// `sup |K g| / |g|` on the given space, estimated by multi-start
    /// optimization (equal to the norm of `K*` on `X*`).
    pub fn operator_norm(&self, space: &SipSpace, tol: &Tolerances) -> Result<f64> {
        check_dim(space.dim(), self.ncols())?;
        check_dim(space.dim(), self.nrows())?;
        if self.is_zero() {
            return Ok(0.0);
        }
        let obj = NormRatio::simple(
            NormMap::new(self.matrix.clone(), space.exponent(), Some(space.weights().to_vec())),
            NormMap::new(DMatrix::identity(space.dim(), space.dim()), space.exponent(), Some(space.weights().to_vec())),
            Sense::Maximize,
        );
        let r = multistart(&obj, &coordinate_starts(space.dim()), Strategy::Gradient, tol, 0x6f70);
        Ok(r.best.value)
    }
}

/// Real coordinate directions `e_k` in the interleaved parametrization.
pub(crate) fn coordinate_starts(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|k| {
            let mut x = vec![0.0; 2 * n];
            x[2 * k] = 1.0;
            x
        })
        .collect()
}

/// Finite family `{f_j}` in `X` with coefficient exponent `p_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameFamily {
    space: SipSpace,
    coeff_exponent: f64,
    synthesis: DMatrix<C64>,
}

impl FrameFamily {
    pub fn new(space: SipSpace, members: &[Vector], coeff_exponent: f64) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyFamily);
        }
        for m in members {
            check_dim(space.dim(), m.len())?;
        }
        let cols: Vec<DVector<C64>> = members.iter().map(|m| m.0.clone()).collect();
        Self::from_synthesis(space, DMatrix::from_columns(&cols), coeff_exponent)
    }

    /// Family given by the columns of an `n x J` synthesis array.
    pub fn from_synthesis(space: SipSpace, synthesis: DMatrix<C64>, coeff_exponent: f64) -> Result<Self> {
        if synthesis.ncols() == 0 {
            return Err(Error::EmptyFamily);
        }
        check_dim(space.dim(), synthesis.nrows())?;
        if !(coeff_exponent.is_finite() && coeff_exponent > 1.0) {
            return Err(Error::InvalidExponent(coeff_exponent));
        }
        Ok(Self {
            space,
            coeff_exponent,
            synthesis,
        })
    }

    pub fn space(&self) -> &SipSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.synthesis.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coeff_exponent(&self) -> f64 {
        self.coeff_exponent
    }

    pub fn coeff_conjugate(&self) -> f64 {
        conjugate_exponent(self.coeff_exponent)
    }

    pub fn member(&self, j: usize) -> Vector {
        Vector(self.synthesis.column(j).into_owned())
    }

    pub fn members(&self) -> Vec<Vector> {
        (0..self.len()).map(|j| self.member(j)).collect()
    }

    /// `n x J` array of `U`.
    pub fn synthesis_matrix(&self) -> &DMatrix<C64> {
        &self.synthesis
    }

    /// `J x n` array of `T` acting on action coefficients.
    pub fn analysis_matrix(&self) -> DMatrix<C64> {
        self.synthesis.transpose()
    }

    /// `T f* = {f*(f_j)}`.
    pub fn analyze(&self, fstar: &DualVector) -> Result<CoeffDualVector> {
        check_dim(self.space.dim(), fstar.len())?;
        Ok(CoeffDualVector(self.synthesis.tr_mul(&fstar.0)))
    }

    /// `U c = sum_j c_j f_j`.
    pub fn synthesize(&self, c: &CoeffVector) -> Result<Vector> {
        check_dim(self.len(), c.len())?;
        Ok(Vector(&self.synthesis * &c.0))
    }

    pub fn coeff_norm(&self, c: &CoeffVector) -> f64 {
        weighted_lp_norm(c.coords(), self.coeff_exponent, None)
    }

    pub fn coeff_dual_norm(&self, c: &CoeffDualVector) -> f64 {
        weighted_lp_norm(c.coords(), self.coeff_conjugate(), None)
    }

    /// Duality map `Phi: X_d* -> X_d`,
    /// `Phi(c)_j = conj(c_j) |c_j|^(q_d-2) |c|^(2-q_d)`.
    pub fn coeff_duality_map(&self, c: &CoeffDualVector) -> Result<CoeffVector> {
        check_dim(self.len(), c.len())?;
        Ok(CoeffVector::new(lp_duality(c.coords(), self.coeff_conjugate(), None)))
    }

    /// `S f* = U Phi T f*`; nonlinear in `f*` unless `p_d = 2`.
    pub fn frame_operator(&self, fstar: &DualVector) -> Result<Vector> {
        let t = self.analyze(fstar)?;
        let c = self.coeff_duality_map(&t)?;
        self.synthesize(&c)
    }

    /// The family `{Q f_j}`.
    pub fn transformed(&self, q: &LinearOperator) -> Result<FrameFamily> {
        check_dim(self.space.dim(), q.ncols())?;
        check_dim(self.space.dim(), q.nrows())?;
        Self::from_synthesis(self.space.clone(), q.matrix() * &self.synthesis, self.coeff_exponent)
    }

    /// Ratio objective `|T f*|_{q_d} / |f*|_*` over action coefficients.
    pub(crate) fn analysis_ratio(&self, denom_adjoint: Option<&DMatrix<C64>>, sense: Sense) -> NormRatio {
        let n = self.space.dim();
        let den = denom_adjoint.cloned().unwrap_or_else(|| DMatrix::identity(n, n));
        let dw = if self.space.is_unweighted() {
            None
        } else {
            Some(self.space.dual_weights())
        };
        NormRatio::simple(
            NormMap::new(self.analysis_matrix(), self.coeff_conjugate(), None),
            NormMap::new(den, self.space.conjugate(), dw),
            sense,
        )
    }

    /// Upper (Bessel) bound by two routes: the analysis norm
    /// `sup |T f*| / |f*|` and the synthesis norm `sup |U c| / |c|`.
    pub fn bessel_bound(&self, tol: &Tolerances) -> BesselBound {
        let n = self.space.dim();
        let j = self.len();
        if self.synthesis.iter().all(|z| *z == ZERO) {
            return BesselBound {
                analysis_norm: 0.0,
                synthesis_norm: 0.0,
                witness: DualVector::unit(n, 0),
            };
        }
        let analysis = self.analysis_ratio(None, Sense::Maximize);
        let ra = multistart(&analysis, &coordinate_starts(n), Strategy::Gradient, tol, 0xb0);
        let synth = NormRatio::simple(
            NormMap::new(self.synthesis.clone(), self.space.exponent(), Some(self.space.weights().to_vec())),
            NormMap::new(DMatrix::identity(j, j), self.coeff_exponent, None),
            Sense::Maximize,
        );
        let rs = multistart(&synth, &coordinate_starts(j), Strategy::Gradient, tol, 0xb1);
        let mut witness = DualVector(crate::optim::to_complex(&ra.best.x));
        let wn = self.space.dual_norm(&witness).unwrap_or(1.0);
        witness = witness.scale(C64::new(1.0 / wn, 0.0));
        BesselBound {
            analysis_norm: ra.best.value,
            synthesis_norm: rs.best.value,
            witness,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BesselBound {
    pub analysis_norm: f64,
    pub synthesis_norm: f64,
    /// Unit-norm functional attaining the analysis norm.
    pub witness: DualVector,
}

impl BesselBound {
    pub fn bound(&self) -> f64 {
        self.analysis_norm.max(self.synthesis_norm)
    }

    pub fn discrepancy(&self) -> f64 {
        (self.analysis_norm - self.synthesis_norm).abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdjointReport {
    pub passed: bool,
    pub max_residual: f64,
    pub trials: usize,
}

/// Checks `(U* f*)(c) = f*(U c) = (T f*)(c)` on random `f*`, `c`.
pub fn adjoint_check(fam: &FrameFamily, trials: usize, seed: u64) -> AdjointReport {
    adjoint_check_with(fam, |f| fam.analyze(f), trials, seed)
}

/// Same as [`adjoint_check`] with a caller-supplied analysis map.
pub fn adjoint_check_with<A>(fam: &FrameFamily, analysis: A, trials: usize, seed: u64) -> AdjointReport
where
    A: Fn(&DualVector) -> Result<CoeffDualVector>,
{
    let mut r = rng::stream(seed, 0xad);
    let mut max_residual: f64 = 0.0;
    for _ in 0..trials {
        let f = DualVector(rng::complex_vector(&mut r, fam.space.dim()));
        let c = CoeffVector(rng::complex_vector(&mut r, fam.len()));
        let lhs = match analysis(&f).and_then(|t| t.apply(&c)) {
            Ok(v) => v,
            Err(_) => {
                return AdjointReport {
                    passed: false,
                    max_residual: f64::INFINITY,
                    trials,
                }
            }
        };
        let rhs = fam.synthesize(&c).and_then(|u| f.apply(&u)).unwrap_or(C64::new(f64::NAN, 0.0));
        let scale = rhs.norm().max(1.0);
        let res = (lhs - rhs).norm() / scale;
        max_residual = if res.is_nan() { f64::INFINITY } else { max_residual.max(res) };
    }
    AdjointReport {
        passed: max_residual <= 1e-9,
        max_residual,
        trials,
    }
}

/// Random family with columns drawn from a complex Gaussian.
pub fn random_family<R: Rng + ?Sized>(rng: &mut R, space: SipSpace, members: usize, coeff_exponent: f64) -> Result<FrameFamily> {
    let f = rng::complex_matrix(rng, space.dim(), members);
    FrameFamily::from_synthesis(space, f, coeff_exponent)
}

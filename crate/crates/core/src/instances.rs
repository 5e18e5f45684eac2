//! Seeded generators for test and benchmark instances.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::Result;
use crate::frame::{FrameFamily, LinearOperator};
use crate::linalg::C64;
use crate::rng;
use crate::sip::SipSpace;

/// How the operator `K` of an instance relates to the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Identity,
    /// Dense complex Gaussian.
    Full,
    /// Gaussian of the given rank.
    RankDeficient(usize),
    /// `K = F M`, so `R(K)` lies in the span of the family.
    InRange,
    /// Hermitian of the given rank with range inside the span of the family.
    HermitianInRange(usize),
}

/// Complex Gaussian matrix of rank `min(rank, rows, cols)`.
pub fn low_rank_matrix<R: Rng + ?Sized>(r: &mut R, rows: usize, cols: usize, rank: usize) -> DMatrix<C64> {
    let k = rank.min(rows).min(cols);
    if k == 0 {
        return DMatrix::zeros(rows, cols);
    }
    rng::complex_matrix(r, rows, k) * rng::complex_matrix(r, k, cols)
}

/// Family of `members` vectors spanning a subspace of dimension `rank`.
pub fn low_rank_family<R: Rng + ?Sized>(
    r: &mut R,
    space: SipSpace,
    members: usize,
    rank: usize,
    coeff_exponent: f64,
) -> Result<FrameFamily> {
    let f = low_rank_matrix(r, space.dim(), members, rank);
    FrameFamily::from_synthesis(space, f, coeff_exponent)
}

/// `W D W^H` with `W = F M` of `rank` columns and real nonzero `D`; the
/// result is Hermitian, so its range equals the range of its adjoint.
pub fn hermitian_in_range<R: Rng + ?Sized>(r: &mut R, fam: &FrameFamily, rank: usize) -> LinearOperator {
    let f = fam.synthesis_matrix();
    let w = f * rng::complex_matrix(r, f.ncols(), rank);
    let d = DMatrix::from_fn(rank, rank, |i, j| {
        if i == j {
            let v: f64 = r.random_range(0.5..2.0);
            C64::new(if r.random_bool(0.5) { v } else { -v }, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    LinearOperator::new(&w * d * w.adjoint())
}

pub fn operator<R: Rng + ?Sized>(r: &mut R, fam: &FrameFamily, kind: OperatorKind) -> LinearOperator {
    let n = fam.space().dim();
    match kind {
        OperatorKind::Identity => LinearOperator::identity(n),
        OperatorKind::Full => LinearOperator::new(rng::complex_matrix(r, n, n)),
        OperatorKind::RankDeficient(s) => LinearOperator::new(low_rank_matrix(r, n, n, s)),
        OperatorKind::InRange => LinearOperator::new(fam.synthesis_matrix() * rng::complex_matrix(r, fam.len(), n)),
        OperatorKind::HermitianInRange(s) => hermitian_in_range(r, fam, s),
    }
}

/// One instance of the equivalence sweep.
#[derive(Debug, Clone)]
pub struct Instance {
    pub fam: FrameFamily,
    pub k: LinearOperator,
    pub kind: OperatorKind,
    pub rank: usize,
}

const EXPONENTS: [f64; 4] = [1.5, 2.0, 3.0, 1.25];
const COEFF_EXPONENTS: [f64; 3] = [3.0, 2.0, 1.5];

/// Instance `index` of a deterministic sweep: dimension at most
/// `max_dim`, at most `max_members` members, mixed exponents, family rank
/// sometimes below the dimension and operators of every kind.
pub fn equivalence_instance(seed: u64, index: u64, max_dim: usize, max_members: usize) -> Result<Instance> {
    let mut r = rng::stream(seed, index);
    let n = r.random_range(1..=max_dim);
    let members = r.random_range(1..=max_members);
    let p = EXPONENTS[(index % 4) as usize];
    let pd = COEFF_EXPONENTS[(index / 4 % 3) as usize];
    let full = members.min(n);
    let rank = if r.random_bool(0.6) { full } else { r.random_range(0..=full) };
    let fam = low_rank_family(&mut r, SipSpace::new(n, p)?, members, rank, pd)?;
    let kind = match index % 5 {
        0 => OperatorKind::Identity,
        1 => OperatorKind::Full,
        2 => OperatorKind::RankDeficient(r.random_range(0..=n)),
        3 => OperatorKind::InRange,
        _ => OperatorKind::HermitianInRange(r.random_range(0..=rank)),
    };
    let k = operator(&mut r, &fam, kind);
    Ok(Instance { fam, k, kind, rank })
}

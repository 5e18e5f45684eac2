//! Fixed inputs for the benchmarks.

use nalgebra::{DMatrix, DVector};
use sipframe_core::frame::random_family;
use sipframe_core::instances::hermitian_in_range;
use sipframe_core::{rng, FrameFamily, LinearOperator, SipSpace, Vector, C64};

/// `{e1, e2, 0}` in `l^{3/2}` of dimension 3 with `K = diag(1, 1, 0)`.
pub fn coordinate_example() -> (FrameFamily, LinearOperator) {
    let x = SipSpace::new(3, 1.5).expect("valid space");
    let fam = FrameFamily::new(x, &[Vector::unit(3, 0), Vector::unit(3, 1), Vector::zeros(3)], 1.5).expect("valid family");
    (fam, LinearOperator::diagonal(&[1.0, 1.0, 0.0]))
}

/// Gaussian family of `members` vectors with a Hermitian `K` of rank
/// `n - 1` inside its span.
pub fn random_instance(n: usize, members: usize, p: f64, coeff_exponent: f64, seed: u64) -> (FrameFamily, LinearOperator) {
    let mut r = rng::stream(seed, 0);
    let fam = random_family(&mut r, SipSpace::new(n, p).expect("valid space"), members, coeff_exponent).expect("valid family");
    let k = hermitian_in_range(&mut r, &fam, n.saturating_sub(1).max(1));
    (fam, k)
}

/// Underdetermined system `F a = b` for the minimal-norm solver.
pub fn min_norm_system(rows: usize, cols: usize, seed: u64) -> (DMatrix<C64>, DVector<C64>) {
    let mut r = rng::stream(seed, 1);
    (rng::complex_matrix(&mut r, rows, cols), rng::complex_vector(&mut r, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_well_formed() {
        let (fam, k) = coordinate_example();
        assert_eq!((fam.len(), k.nrows()), (3, 3));
        let (fam, k) = random_instance(4, 6, 1.5, 3.0, 1);
        assert_eq!((fam.space().dim(), fam.len(), k.ncols()), (4, 6, 4));
        let (f, b) = min_norm_system(3, 7, 2);
        assert_eq!((f.shape(), b.len()), ((3, 7), 3));
    }
}

//! Dense complex linear algebra helpers on top of nalgebra's SVD.

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Full singular value decomposition `m = u * diag(sigma) * v^H`.
///
/// `u` is `r x r` and `v` is `c x c`; `sigma` has `min(r, c)` entries in
/// non-increasing order.
#[derive(Debug, Clone)]
pub struct FullSvd {
    pub u: DMatrix<C64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<C64>,
}

pub fn svd_full(m: &DMatrix<C64>) -> FullSvd {
    let (r, c) = m.shape();
    let s = r.max(c);
    if s == 0 {
        return FullSvd {
            u: DMatrix::zeros(r, r),
            sigma: Vec::new(),
            v: DMatrix::zeros(c, c),
        };
    }
    // nalgebra returns thin factors; padding to a square matrix yields full
    // orthonormal bases for both the row and the column side.
    let mut padded = DMatrix::<C64>::zeros(s, s);
    padded.view_mut((0, 0), (r, c)).copy_from(m);
    let svd = padded.svd(true, true);
    let u_all = svd.u.expect("u requested");
    let vt_all = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let k = r.min(c);
    let sigma: Vec<f64> = order.iter().take(k).map(|&i| svd.singular_values[i]).collect();
    // Columns of `u_all` beyond row `r` only matter for zero singular
    // values; a QR of the leading block recovers an orthonormal r x r basis.
    let u = reorder_and_orthonormalize(&u_all, &order, r);
    let v_full = vt_all.adjoint();
    let v = reorder_and_orthonormalize(&v_full, &order, c);
    FullSvd { u, sigma, v }
}

/// Takes the leading `rows` rows of the reordered basis and repairs the
/// columns that lost orthonormality through the padding.
fn reorder_and_orthonormalize(basis: &DMatrix<C64>, order: &[usize], rows: usize) -> DMatrix<C64> {
    let mut out = DMatrix::<C64>::zeros(rows, rows);
    let mut filled = 0usize;
    let mut candidates: Vec<DVector<C64>> = order
        .iter()
        .map(|&i| basis.column(i).rows(0, rows).into_owned())
        .collect();
    for e in 0..rows {
        let mut unit = DVector::<C64>::zeros(rows);
        unit[e] = ONE;
        candidates.push(unit);
    }
    for mut col in candidates {
        if filled == rows {
            break;
        }
        for j in 0..filled {
            let q = out.column(j);
            let proj = q.dotc(&col);
            col -= q * proj;
        }
        // second pass for numerical orthogonality
        for j in 0..filled {
            let q = out.column(j);
            let proj = q.dotc(&col);
            col -= q * proj;
        }
        let nrm = col.norm();
        if nrm > 0.5 {
            out.set_column(filled, &(col / C64::new(nrm, 0.0)));
            filled += 1;
        }
    }
    out
}

/// Number of singular values above `rel * sigma_max`.
pub fn numerical_rank(sigma: &[f64], rel: f64) -> usize {
    let smax = sigma.first().copied().unwrap_or(0.0);
    if smax <= f64::MIN_POSITIVE {
        return 0;
    }
    sigma.iter().filter(|&&s| s > rel * smax).count()
}

/// Orthonormal basis (columns) of the null space of `m`.
pub fn null_space(m: &DMatrix<C64>, rel: f64) -> DMatrix<C64> {
    let svd = svd_full(m);
    let rank = numerical_rank(&svd.sigma, rel);
    let c = m.ncols();
    svd.v.columns(rank, c - rank).into_owned()
}

/// Orthonormal basis (columns) of the range of `m`.
pub fn range_basis(m: &DMatrix<C64>, rel: f64) -> DMatrix<C64> {
    let svd = svd_full(m);
    let rank = numerical_rank(&svd.sigma, rel);
    svd.u.columns(0, rank).into_owned()
}

/// Moore-Penrose pseudo-inverse with a relative singular value cutoff.
pub fn pinv(m: &DMatrix<C64>, rel: f64) -> DMatrix<C64> {
    let (r, c) = m.shape();
    let svd = svd_full(m);
    let rank = numerical_rank(&svd.sigma, rel);
    let mut out = DMatrix::<C64>::zeros(c, r);
    for k in 0..rank {
        let inv = 1.0 / svd.sigma[k];
        let vk = svd.v.column(k);
        let uk = svd.u.column(k);
        out += (vk * uk.adjoint()) * C64::new(inv, 0.0);
    }
    out
}

/// Euclidean orthogonal projector onto the span of the columns of `m`.
pub fn projector_onto(m: &DMatrix<C64>, rel: f64) -> DMatrix<C64> {
    let q = range_basis(m, rel);
    &q * q.adjoint()
}

/// Relative least-squares residual of `m x = b`, i.e. `|b - m m^+ b| / |b|`.
pub fn span_residual(m: &DMatrix<C64>, b: &DVector<C64>, rel: f64) -> f64 {
    let bn = b.norm();
    if bn == 0.0 {
        return 0.0;
    }
    let x = pinv(m, rel) * b;
    (b - m * x).norm() / bn
}

/// Largest absolute entry difference, used for identity residuals.
pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn from_real(v: f64) -> C64 {
    C64::new(v, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn full_svd_reconstructs_wide_and_tall() {
        let m = DMatrix::from_row_slice(2, 3, &[c(1.0, 0.5), c(0.0, 1.0), c(2.0, 0.0), c(-1.0, 0.0), c(0.3, 0.2), c(0.0, -1.0)]);
        for a in [m.clone(), m.transpose()] {
            let s = svd_full(&a);
            let (r, cc) = a.shape();
            let mut d = DMatrix::<C64>::zeros(r, cc);
            for (k, sv) in s.sigma.iter().enumerate() {
                d[(k, k)] = from_real(*sv);
            }
            let rec = &s.u * d * s.v.adjoint();
            assert!(max_abs_diff(&rec, &a) < 1e-12);
            let iu = s.u.adjoint() * &s.u;
            assert!(max_abs_diff(&iu, &DMatrix::identity(r, r)) < 1e-12);
            let iv = s.v.adjoint() * &s.v;
            assert!(max_abs_diff(&iv, &DMatrix::identity(cc, cc)) < 1e-12);
        }
    }

    #[test]
    fn null_space_of_rank_one() {
        let m = DMatrix::from_row_slice(2, 3, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
        let n = null_space(&m, 1e-10);
        assert_eq!(n.ncols(), 2);
        assert!((m * n).norm() < 1e-12);
    }

    #[test]
    fn pinv_identities() {
        let m = DMatrix::from_row_slice(3, 3, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let p = pinv(&m, 1e-10);
        assert!(max_abs_diff(&p, &m) < 1e-14);
        let d = DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let pd = pinv(&d, 1e-10);
        assert!((pd[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
        assert!(pd[(1, 1)].norm() < 1e-15);
    }
}

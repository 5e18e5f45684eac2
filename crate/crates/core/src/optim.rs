//! Multi-start optimization of scale-invariant objectives on the unit
//! sphere of `C^n`, parametrized as `R^(2n)` by interleaved real and
//! imaginary parts.
//!
//! Local searches run Riemannian gradient ascent with Armijo backtracking.
//! When no ascent step is found before the value settles (typically near a
//! point where some `l^p` coordinate vanishes and the objective is not
//! smooth) the search switches to a Nelder-Mead polytope on the normalized
//! objective. Restarts are independent and are reduced in index order.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::config::Tolerances;
use crate::linalg::C64;
use crate::rng;
use crate::sip::weighted_lp_norm;

/// An objective evaluated on (not necessarily normalized) points of
/// `R^dim`; implementations must be invariant under positive scaling.
pub trait SphereObjective: Sync {
    fn dim(&self) -> usize;

    /// Objective value; non-finite values mark infeasible points.
    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

pub fn to_complex(x: &[f64]) -> DVector<C64> {
    DVector::from_iterator(x.len() / 2, x.chunks(2).map(|c| C64::new(c[0], c[1])))
}

pub fn to_real(z: &DVector<C64>) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

fn normalize(x: &[f64]) -> Vec<f64> {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n == 0.0 {
        x.to_vec()
    } else {
        x.iter().map(|v| v / n).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `z -> (sum_i w_i |(M z)_i|^s)^(1/s)`.
#[derive(Debug, Clone)]
pub struct NormMap {
    pub matrix: DMatrix<C64>,
    pub exponent: f64,
    pub weights: Option<Vec<f64>>,
}

impl NormMap {
    pub fn new(matrix: DMatrix<C64>, exponent: f64, weights: Option<Vec<f64>>) -> Self {
        Self {
            matrix,
            exponent,
            weights,
        }
    }

    pub fn eval(&self, z: &DVector<C64>) -> f64 {
        let y = &self.matrix * z;
        weighted_lp_norm(y.as_slice(), self.exponent, self.weights.as_deref())
    }

    /// [`NormMap::eval`] writing `M z` into `buf` (length `M.nrows()`).
    pub fn eval_with(&self, z: &DVector<C64>, buf: &mut DVector<C64>) -> f64 {
        buf.gemv(C64::new(1.0, 0.0), &self.matrix, z, C64::new(0.0, 0.0));
        weighted_lp_norm(buf.as_slice(), self.exponent, self.weights.as_deref())
    }

    /// Value and Wirtinger gradient `M^H g` (real gradient is its real and
    /// imaginary parts).
    fn value_and_grad(&self, z: &DVector<C64>) -> (f64, DVector<C64>) {
        let y = &self.matrix * z;
        let s = self.exponent;
        let n = weighted_lp_norm(y.as_slice(), s, self.weights.as_deref());
        if n == 0.0 {
            return (0.0, DVector::zeros(z.len()));
        }
        let g = DVector::from_iterator(
            y.len(),
            y.iter().enumerate().map(|(i, yi)| {
                let w = self.weights.as_ref().map_or(1.0, |w| w[i]);
                // exact zeros are nudged; the factor y_i keeps the term at 0
                let u = yi / n;
                let mag = u.norm().max(1e-12);
                u * (w * mag.powf(s - 2.0))
            }),
        );
        (n, self.matrix.adjoint() * g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// `sum_k c_k N_k(z) / N_den(z)`, maximized or minimized.
#[derive(Debug, Clone)]
pub struct NormRatio {
    pub numer: Vec<(f64, NormMap)>,
    pub denom: NormMap,
    pub sense: Sense,
    den_floor: f64,
}

impl NormRatio {
    pub fn new(numer: Vec<(f64, NormMap)>, denom: NormMap, sense: Sense) -> Self {
        let den_floor = 1e-13 * denom.matrix.norm().max(f64::MIN_POSITIVE);
        Self {
            numer,
            denom,
            sense,
            den_floor,
        }
    }

    pub fn simple(numer: NormMap, denom: NormMap, sense: Sense) -> Self {
        Self::new(vec![(1.0, numer)], denom, sense)
    }

    pub fn complex_dim(&self) -> usize {
        self.denom.matrix.ncols()
    }

    /// Ratio at `z`, `None` when the denominator vanishes.
    pub fn ratio(&self, z: &DVector<C64>) -> Option<f64> {
        let den = self.denom.eval(z);
        if !(den > self.den_floor * z.norm()) {
            return None;
        }
        let num: f64 = self.numer.iter().map(|(c, m)| c * m.eval(z)).sum();
        Some(num / den)
    }

    fn signed(&self, r: f64) -> f64 {
        match self.sense {
            Sense::Maximize => r,
            Sense::Minimize => -r,
        }
    }
}

impl SphereObjective for NormRatio {
    fn dim(&self) -> usize {
        2 * self.complex_dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        match self.ratio(&to_complex(x)) {
            Some(r) => self.signed(r),
            None => f64::NEG_INFINITY,
        }
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let z = to_complex(x);
        let (den, dgrad) = self.denom.value_and_grad(&z);
        if !(den > self.den_floor * z.norm()) {
            return None;
        }
        let mut num = 0.0;
        let mut ngrad = DVector::<C64>::zeros(z.len());
        for (c, m) in &self.numer {
            let (v, g) = m.value_and_grad(&z);
            num += c * v;
            ngrad += g * C64::new(*c, 0.0);
        }
        let scale = match self.sense {
            Sense::Maximize => 1.0,
            Sense::Minimize => -1.0,
        };
        let grad = (ngrad * C64::new(1.0 / den, 0.0) - dgrad * C64::new(num / (den * den), 0.0))
            * C64::new(scale, 0.0);
        Some(to_real(&grad))
    }
}

/// Objective given by a closure; gradients come from central differences.
pub struct FnObjective<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnObjective<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> SphereObjective for FnObjective<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

/// Outcome of one local search.
#[derive(Debug, Clone)]
pub struct LocalResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub used_polytope: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Gradient,
    DerivativeFree,
}

fn fd_gradient<O: SphereObjective + ?Sized>(obj: &O, x: &[f64], v0: f64) -> Vec<f64> {
    let h = 1e-7;
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let orig = xp[i];
        xp[i] = orig + h;
        let fp = obj.value(&normalize(&xp));
        xp[i] = orig - h;
        let fm = obj.value(&normalize(&xp));
        xp[i] = orig;
        g[i] = if fp.is_finite() && fm.is_finite() {
            (fp - fm) / (2.0 * h)
        } else if fp.is_finite() {
            (fp - v0) / h
        } else if fm.is_finite() {
            (v0 - fm) / h
        } else {
            0.0
        };
    }
    g
}

pub fn local_search<O: SphereObjective + ?Sized>(
    obj: &O,
    start: &[f64],
    strategy: Strategy,
    tol: &Tolerances,
) -> LocalResult {
    let mut x = normalize(start);
    let mut v = obj.value(&x);
    if !v.is_finite() {
        return LocalResult {
            x,
            value: v,
            iterations: 0,
            converged: false,
            used_polytope: false,
        };
    }
    let mut iterations = 0;
    let mut converged = false;
    let mut stalled = strategy == Strategy::DerivativeFree;
    let mut step = 0.25;
    let mut quiet = 0;
    while !stalled && iterations < tol.max_local_iters {
        iterations += 1;
        let g = obj.gradient(&x).unwrap_or_else(|| fd_gradient(obj, &x, v));
        let radial = dot(&g, &x);
        let gt: Vec<f64> = g.iter().zip(&x).map(|(gi, xi)| gi - radial * xi).collect();
        let gn2 = dot(&gt, &gt);
        if gn2 < 1e-28 {
            converged = true;
            break;
        }
        let mut accepted = None;
        let mut s = step;
        for _ in 0..60 {
            let cand = normalize(&x.iter().zip(&gt).map(|(xi, gi)| xi + s * gi).collect::<Vec<_>>());
            let vc = obj.value(&cand);
            if vc.is_finite() && vc >= v + 1e-4 * s * gn2 {
                accepted = Some((cand, vc));
                break;
            }
            s *= 0.5;
            if s * gn2.sqrt() < 1e-16 {
                break;
            }
        }
        match accepted {
            Some((cand, vc)) => {
                let dv = vc - v;
                x = cand;
                v = vc;
                step = (s * 2.0).min(1e3);
                if dv < tol.converge * v.abs().max(1.0) {
                    quiet += 1;
                    if quiet >= 2 {
                        converged = true;
                        break;
                    }
                } else {
                    quiet = 0;
                }
            }
            None => {
                stalled = true;
            }
        }
    }
    let mut used_polytope = false;
    if stalled || !converged {
        used_polytope = true;
        let (xn, vn, it, conv) = nelder_mead(obj, &x, v, tol);
        iterations += it;
        if vn >= v {
            x = xn;
            v = vn;
        }
        converged = conv;
    }
    LocalResult {
        x,
        value: v,
        iterations,
        converged,
        used_polytope,
    }
}

/// Nelder-Mead maximization of `obj(normalize(x))`.
fn nelder_mead<O: SphereObjective + ?Sized>(
    obj: &O,
    x0: &[f64],
    v0: f64,
    tol: &Tolerances,
) -> (Vec<f64>, f64, usize, bool) {
    let n = x0.len();
    let eval = |x: &[f64]| {
        let v = obj.value(&normalize(x));
        if v.is_finite() {
            v
        } else {
            f64::NEG_INFINITY
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), v0));
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += if p[i].abs() > 0.5 { -0.05 } else { 0.05 };
        let vp = eval(&p);
        simplex.push((p, vp));
    }
    let max_iter = 400 * n.max(1);
    let mut it = 0;
    let mut converged = false;
    while it < max_iter {
        it += 1;
        // descending order: best first
        simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let spread: f64 = simplex
            .iter()
            .skip(1)
            .map(|(p, _)| p.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if (best - worst).abs() <= tol.converge * best.abs().max(1.0) && spread < 1e-9 {
            converged = true;
            break;
        }
        let mut centroid = vec![0.0; n];
        for (p, _) in simplex.iter().take(n) {
            for (c, pi) in centroid.iter_mut().zip(p) {
                *c += pi / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let xr = along(1.0);
        let vr = eval(&xr);
        if vr > simplex[0].1 {
            let xe = along(2.0);
            let ve = eval(&xe);
            simplex[n] = if ve > vr { (xe, ve) } else { (xr, vr) };
        } else if vr > simplex[n - 1].1 {
            simplex[n] = (xr, vr);
        } else {
            let (xc, vc) = if vr > simplex[n].1 {
                let xc = along(0.5);
                let vc = eval(&xc);
                (xc, vc)
            } else {
                let xc = along(-0.5);
                let vc = eval(&xc);
                (xc, vc)
            };
            if vc > simplex[n].1.max(vr) {
                simplex[n] = (xc, vc);
            } else {
                let b = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let p: Vec<f64> = entry.0.iter().zip(&b).map(|(pi, bi)| bi + 0.5 * (pi - bi)).collect();
                    let vp = eval(&p);
                    *entry = (p, vp);
                }
            }
        }
    }
    simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    let (x, v) = simplex.swap_remove(0);
    (normalize(&x), v, it, converged)
}

/// Result of a multi-start run.
#[derive(Debug, Clone)]
pub struct MultiStart {
    pub best: LocalResult,
    pub best_index: usize,
    /// Final objective of each restart, in restart order.
    pub values: Vec<f64>,
    pub restarts: usize,
    pub all_converged: bool,
}

/// Seed for the restart stream of one optimization problem.
pub fn problem_seed(seed: u64, salt: u64) -> u64 {
    seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Runs local searches from the given starts followed by `tol.restarts`
/// random starts drawn from `stream(problem_seed(seed, salt), i)`.
pub fn multistart<O: SphereObjective>(
    obj: &O,
    extra_starts: &[Vec<f64>],
    strategy: Strategy,
    tol: &Tolerances,
    salt: u64,
) -> MultiStart {
    let dim = obj.dim();
    let seed = problem_seed(tol.seed, salt);
    let mut starts: Vec<Vec<f64>> = extra_starts.to_vec();
    for i in 0..tol.restarts.max(1) {
        let mut r = rng::stream(seed, i as u64);
        starts.push(rng::unit_sphere(&mut r, dim));
    }
    let run = |s: &Vec<f64>| local_search(obj, s, strategy, tol);
    let results: Vec<LocalResult> = if tol.parallel {
        starts.par_iter().map(run).collect()
    } else {
        starts.iter().map(run).collect()
    };
    let mut best_index = 0;
    for (i, r) in results.iter().enumerate() {
        if r.value > results[best_index].value || !results[best_index].value.is_finite() && r.value.is_finite() {
            best_index = i;
        }
    }
    MultiStart {
        values: results.iter().map(|r| r.value).collect(),
        restarts: results.len(),
        all_converged: results.iter().all(|r| r.converged || !r.value.is_finite()),
        best: results[best_index].clone(),
        best_index,
    }
}

/// Point `index` of the deterministic projective grid on `C^n`.
///
/// Magnitudes use `n - 1` hyperspherical angles on `[0, pi/2]` (endpoints
/// included), relative phases use `n - 1` angles on `[0, 2 pi)`; the first
/// coordinate is kept real because every objective here is invariant under
/// complex scaling. There are `resolution^(2(n-1))` points.
pub fn grid_point(n: usize, resolution: usize, mut index: usize) -> DVector<C64> {
    let res = resolution.max(2);
    let mut thetas = Vec::with_capacity(n.saturating_sub(1));
    let mut phases = Vec::with_capacity(n.saturating_sub(1));
    for _ in 1..n {
        let k = index % res;
        index /= res;
        thetas.push(k as f64 / (res - 1) as f64 * std::f64::consts::FRAC_PI_2);
    }
    for _ in 1..n {
        let k = index % res;
        index /= res;
        phases.push(k as f64 / res as f64 * std::f64::consts::TAU);
    }
    let mut z = DVector::<C64>::zeros(n);
    let mut carry = 1.0;
    for i in 0..n {
        let mag = if i + 1 < n {
            let m = carry * thetas[i].cos();
            carry *= thetas[i].sin();
            m
        } else {
            carry
        };
        let phase = if i == 0 { 0.0 } else { phases[i - 1] };
        z[i] = C64::from_polar(mag, phase);
    }
    z
}

pub fn grid_size(n: usize, resolution: usize) -> usize {
    resolution.max(2).pow(2 * (n.saturating_sub(1)) as u32)
}

/// Trigonometric tables for [`grid_point`], so that points can be written
/// into a reused buffer.
struct GridTables {
    n: usize,
    res: usize,
    theta_cos: Vec<f64>,
    theta_sin: Vec<f64>,
    phase: Vec<C64>,
}

impl GridTables {
    fn new(n: usize, resolution: usize) -> Self {
        let res = resolution.max(2);
        let theta = |k: usize| k as f64 / (res - 1) as f64 * std::f64::consts::FRAC_PI_2;
        Self {
            n,
            res,
            theta_cos: (0..res).map(|k| theta(k).cos()).collect(),
            theta_sin: (0..res).map(|k| theta(k).sin()).collect(),
            phase: (0..res)
                .map(|k| C64::from_polar(1.0, k as f64 / res as f64 * std::f64::consts::TAU))
                .collect(),
        }
    }

    /// Same point as [`grid_point`].
    fn point_into(&self, mut index: usize, z: &mut DVector<C64>) {
        let (n, res) = (self.n, self.res);
        let mut mags = [0usize; 8];
        for m in mags.iter_mut().take(n - 1) {
            *m = index % res;
            index /= res;
        }
        let mut carry = 1.0;
        for i in 0..n {
            let mag = if i + 1 < n {
                let m = carry * self.theta_cos[mags[i]];
                carry *= self.theta_sin[mags[i]];
                m
            } else {
                carry
            };
            z[i] = if i == 0 {
                C64::new(mag, 0.0)
            } else {
                let k = index % res;
                index /= res;
                self.phase[k] * mag
            };
        }
    }
}

/// Componentwise minima of `f` over the projective grid, ignoring `None`
/// entries. `init` builds per-worker scratch space handed to `f`. The
/// reduction is order-independent, so the result does not depend on
/// scheduling.
pub fn grid_minima<const M: usize, S, I, F>(n: usize, resolution: usize, init: I, f: F) -> [Option<f64>; M]
where
    I: Fn() -> S + Sync,
    F: Fn(&DVector<C64>, &mut S) -> [Option<f64>; M] + Sync,
{
    assert!(n <= 9, "grid dimension too large");
    let merge = |a: [Option<f64>; M], b: [Option<f64>; M]| {
        std::array::from_fn(|k| match (a[k], b[k]) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        })
    };
    let tables = GridTables::new(n, resolution);
    (0..grid_size(n, resolution))
        .into_par_iter()
        .map_init(
            || (DVector::<C64>::zeros(n), init()),
            |(z, scratch), i| {
                tables.point_into(i, z);
                f(z, scratch)
            },
        )
        .reduce(|| [None; M], merge)
}

/// Minimum of the first and maximum of the second component of `f` over
/// the projective grid; see [`grid_minima`].
pub fn grid_extrema<S, I, F>(n: usize, resolution: usize, init: I, f: F) -> (Option<f64>, Option<f64>)
where
    I: Fn() -> S + Sync,
    F: Fn(&DVector<C64>, &mut S) -> (Option<f64>, Option<f64>) + Sync,
{
    let [lo, hi] = grid_minima(n, resolution, init, |z, s| {
        let (a, b) = f(z, s);
        [a, b.map(|v| -v)]
    });
    (lo, hi.map(|v| -v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn grid_points_are_unit() {
        for n in 1..=3 {
            for i in (0..grid_size(n, 7)).step_by(5) {
                let z = grid_point(n, 7, i);
                assert!((z.norm() - 1.0).abs() < 1e-12);
                let mut buf = DVector::zeros(n);
                GridTables::new(n, 7).point_into(i, &mut buf);
                assert!((&buf - &z).norm() < 1e-14);
            }
        }
        assert_eq!(grid_size(1, 60), 1);
        assert_eq!(grid_size(3, 10), 10_000);
    }

    #[test]
    fn maximizes_diagonal_rayleigh_ratio() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(3.0), c(2.0)]));
        let obj = NormRatio::simple(
            NormMap::new(m.clone(), 2.0, None),
            NormMap::new(DMatrix::identity(3, 3), 2.0, None),
            Sense::Maximize,
        );
        let tol = Tolerances::default().with_restarts(8);
        let r = multistart(&obj, &[], Strategy::Gradient, &tol, 1);
        assert!((r.best.value - 3.0).abs() < 1e-9);

        let obj = NormRatio::simple(
            NormMap::new(m, 2.0, None),
            NormMap::new(DMatrix::identity(3, 3), 2.0, None),
            Sense::Minimize,
        );
        let r = multistart(&obj, &[], Strategy::Gradient, &tol, 2);
        assert!((-r.best.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let mut r = rng::stream(3, 0);
        let m = rng::complex_matrix(&mut r, 4, 3);
        let obj = NormRatio::simple(
            NormMap::new(m, 3.0, None),
            NormMap::new(DMatrix::identity(3, 3), 1.5, Some(vec![1.0, 2.0, 0.5])),
            Sense::Maximize,
        );
        let x = rng::unit_sphere(&mut r, 6);
        let g = obj.gradient(&x).unwrap();
        let h = 1e-6;
        for i in 0..6 {
            let mut xp = x.clone();
            xp[i] += h;
            let mut xm = x.clone();
            xm[i] -= h;
            let fd = (obj.value(&xp) - obj.value(&xm)) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-6, "component {i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn derivative_free_handles_kinks() {
        // max of -(|x1| + |x2|)/|x| over the circle sits on the axes
        let obj = FnObjective::new(2, |x: &[f64]| {
            let n = (x[0] * x[0] + x[1] * x[1]).sqrt();
            -(x[0].abs() + x[1].abs()) / n
        });
        let tol = Tolerances::default().with_restarts(4);
        let r = multistart(&obj, &[], Strategy::DerivativeFree, &tol, 0);
        assert!((r.best.value + 1.0).abs() < 1e-7);
    }

    #[test]
    fn serial_and_parallel_agree() {
        let mut r = rng::stream(9, 0);
        let m = rng::complex_matrix(&mut r, 5, 3);
        let obj = NormRatio::simple(
            NormMap::new(m, 1.5, None),
            NormMap::new(DMatrix::identity(3, 3), 3.0, None),
            Sense::Maximize,
        );
        let tol = Tolerances::default().with_restarts(16);
        let a = multistart(&obj, &[], Strategy::Gradient, &tol, 4);
        let b = multistart(&obj, &[], Strategy::Gradient, &tol.clone().serial(), 4);
        assert_eq!(a.best.value.to_bits(), b.best.value.to_bits());
        assert_eq!(a.best.x, b.best.x);
        assert_eq!(a.values, b.values);
    }
}

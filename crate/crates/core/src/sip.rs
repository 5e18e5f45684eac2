//! Weighted finite-dimensional `l^p` spaces with their compatible
//! semi-inner product and duality map.
//!
//! For `X = l^p_w(n)` with `1 < p < inf` the semi-inner product is
//!
//! ```text
//! [g, h] = |h|^(2-p) * sum_j w_j g_j conj(h_j) |h_j|^(p-2)
//! ```
//!
//! and the dual element `h*` is the functional `g -> [g, h]`. Functionals
//! are stored by their action coefficients `d_j`, acting bilinearly as
//! `d(g) = sum_j d_j g_j`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{C64, ZERO};

/// Finite-dimensional weighted `l^p` space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SipSpace {
    dim: usize,
    exponent: f64,
    weights: Vec<f64>,
}

/// Coordinates of an element of `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(pub DVector<C64>);

/// Action coefficients of a functional on `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualVector(pub DVector<C64>);

macro_rules! coord_newtype {
    ($t:ident) => {
        impl $t {
            pub fn new(coords: Vec<C64>) -> Self {
                Self(DVector::from_vec(coords))
            }

            pub fn from_real(coords: &[f64]) -> Self {
                Self(DVector::from_iterator(
                    coords.len(),
                    coords.iter().map(|&x| C64::new(x, 0.0)),
                ))
            }

            pub fn zeros(n: usize) -> Self {
                Self(DVector::zeros(n))
            }

            /// Unit coordinate vector `e_k`.
            pub fn unit(n: usize, k: usize) -> Self {
                let mut v = DVector::zeros(n);
                v[k] = C64::new(1.0, 0.0);
                Self(v)
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn coords(&self) -> &[C64] {
                self.0.as_slice()
            }

            pub fn is_zero(&self) -> bool {
                self.0.iter().all(|z| *z == ZERO)
            }

            pub fn scale(&self, s: C64) -> Self {
                Self(&self.0 * s)
            }
        }

        impl From<DVector<C64>> for $t {
            fn from(v: DVector<C64>) -> Self {
                Self(v)
            }
        }

        impl std::ops::Add for &$t {
            type Output = $t;
            fn add(self, rhs: Self) -> $t {
                $t(&self.0 + &rhs.0)
            }
        }

        impl std::ops::Sub for &$t {
            type Output = $t;
            fn sub(self, rhs: Self) -> $t {
                $t(&self.0 - &rhs.0)
            }
        }
    };
}

pub(crate) use coord_newtype;

coord_newtype!(Vector);
coord_newtype!(DualVector);

impl DualVector {
    /// Evaluates the functional at `g`: `sum_j d_j g_j`.
    pub fn apply(&self, g: &Vector) -> Result<C64> {
        check_dim(self.len(), g.len())?;
        Ok(self.0.iter().zip(g.0.iter()).map(|(d, x)| d * x).sum())
    }
}

/// `r^s`, with integer exponents multiplied out.
#[inline]
fn pow_small(r: f64, s: f64) -> f64 {
    if s.fract() == 0.0 && s <= 8.0 {
        r.powi(s as i32)
    } else {
        r.powf(s)
    }
}

/// `(sum_j w_j |z_j|^s)^(1/s)`, computed with rescaling against overflow.
pub(crate) fn weighted_lp_norm(z: &[C64], s: f64, weights: Option<&[f64]>) -> f64 {
    // scale by the largest real or imaginary part, so the squares below
    // cannot overflow
    let m = z.iter().map(|c| c.re.abs().max(c.im.abs())).fold(0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    let inv = 1.0 / m;
    let sum: f64 = z
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != ZERO)
        .map(|(i, c)| {
            let w = weights.map_or(1.0, |w| w[i]);
            let (a, b) = (c.re * inv, c.im * inv);
            let r2 = a * a + b * b;
            w * if s == 2.0 { r2 } else { pow_small(r2.sqrt(), s) }
        })
        .sum();
    m * if s == 2.0 {
        sum.sqrt()
    } else if s == 3.0 {
        sum.cbrt()
    } else {
        sum.powf(1.0 / s)
    }
}

/// Duality map of `l^s_w`: returns `w_j conj(z_j) |z_j|^(s-2) |z|^(2-s)`.
pub(crate) fn lp_duality(z: &[C64], s: f64, weights: Option<&[f64]>) -> Vec<C64> {
    let n = weighted_lp_norm(z, s, weights);
    if n == 0.0 {
        return vec![ZERO; z.len()];
    }
    z.iter()
        .enumerate()
        .map(|(i, c)| {
            if *c == ZERO {
                return ZERO;
            }
            let u = c / n;
            let w = weights.map_or(1.0, |w| w[i]);
            u.conj() * (w * u.norm().powf(s - 2.0) * n)
        })
        .collect()
}

impl SipSpace {
    /// Unweighted `l^p(n)`.
    pub fn new(dim: usize, exponent: f64) -> Result<Self> {
        Self::with_weights(exponent, vec![1.0; dim])
    }

    pub fn with_weights(exponent: f64, weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptySpace);
        }
        if !(exponent.is_finite() && exponent > 1.0) {
            return Err(Error::InvalidExponent(exponent));
        }
        if let Some((index, &value)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::InvalidWeight { index, value });
        }
        Ok(Self {
            dim: weights.len(),
            exponent,
            weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// Conjugate exponent `q = p / (p - 1)`.
    pub fn conjugate(&self) -> f64 {
        conjugate_exponent(self.exponent)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_unweighted(&self) -> bool {
        self.weights.iter().all(|&w| w == 1.0)
    }

    /// Weights of the dual norm, `w_j^(1-q)`.
    pub fn dual_weights(&self) -> Vec<f64> {
        let q = self.conjugate();
        self.weights.iter().map(|w| w.powf(1.0 - q)).collect()
    }

    fn weight_opt(&self) -> Option<&[f64]> {
        if self.is_unweighted() {
            None
        } else {
            Some(&self.weights)
        }
    }

    pub fn norm(&self, f: &Vector) -> Result<f64> {
        check_dim(self.dim, f.len())?;
        Ok(weighted_lp_norm(f.coords(), self.exponent, self.weight_opt()))
    }

    /// The compatible semi-inner product `[g, h]`.
    pub fn sip(&self, g: &Vector, h: &Vector) -> Result<C64> {
        check_dim(self.dim, g.len())?;
        check_dim(self.dim, h.len())?;
        let n = weighted_lp_norm(h.coords(), self.exponent, self.weight_opt());
        if n == 0.0 {
            return Ok(ZERO);
        }
        let p = self.exponent;
        let acc: C64 = g
            .0
            .iter()
            .zip(h.0.iter())
            .zip(self.weights.iter())
            .filter(|((_, hj), _)| **hj != ZERO)
            .map(|((gj, hj), w)| {
                let u = hj / n;
                gj * u.conj() * (w * u.norm().powf(p - 2.0))
            })
            .sum();
        Ok(acc * n)
    }

    /// Dual element `f*`: the functional `g -> [g, f]`.
    pub fn dualize(&self, f: &Vector) -> Result<DualVector> {
        check_dim(self.dim, f.len())?;
        Ok(DualVector::new(lp_duality(
            f.coords(),
            self.exponent,
            Some(&self.weights),
        )))
    }

    /// Inverse of the duality map.
    pub fn undualize(&self, d: &DualVector) -> Result<Vector> {
        check_dim(self.dim, d.len())?;
        let m = self.dual_norm(d)?;
        if m == 0.0 {
            return Ok(Vector::zeros(self.dim));
        }
        let q = self.conjugate();
        let coords = d
            .0
            .iter()
            .zip(self.weights.iter())
            .map(|(dj, w)| {
                if *dj == ZERO {
                    return ZERO;
                }
                let v = dj / m;
                let mag = v.norm();
                (v.conj() / mag) * ((mag / w).powf(q - 1.0) * m)
            })
            .collect();
        Ok(Vector::new(coords))
    }

    /// `(sum_j w_j^(1-q) |d_j|^q)^(1/q)`.
    pub fn dual_norm(&self, d: &DualVector) -> Result<f64> {
        check_dim(self.dim, d.len())?;
        if self.is_unweighted() {
            Ok(weighted_lp_norm(d.coords(), self.conjugate(), None))
        } else {
            let dw = self.dual_weights();
            Ok(weighted_lp_norm(d.coords(), self.conjugate(), Some(&dw)))
        }
    }

    /// The compatible semi-inner product on `X*`, `[f*, g*]_* = [g, f]`.
    pub fn dual_sip(&self, fstar: &DualVector, gstar: &DualVector) -> Result<C64> {
        let f = self.undualize(fstar)?;
        let g = self.undualize(gstar)?;
        self.sip(&g, &f)
    }
}

pub fn conjugate_exponent(p: f64) -> f64 {
    p / (p - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rejects_degenerate_exponents_and_weights() {
        assert!(matches!(SipSpace::new(3, 1.0), Err(Error::InvalidExponent(_))));
        assert!(matches!(SipSpace::new(3, f64::INFINITY), Err(Error::InvalidExponent(_))));
        assert!(matches!(SipSpace::new(0, 2.0), Err(Error::EmptySpace)));
        assert!(matches!(
            SipSpace::with_weights(2.0, vec![1.0, 0.0]),
            Err(Error::InvalidWeight { index: 1, .. })
        ));
    }

    #[test]
    fn conjugate_exponent_relation() {
        for p in [1.1, 1.5, 2.0, 3.0, 7.5] {
            let q = conjugate_exponent(p);
            assert!((1.0 / p + 1.0 / q - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn norm_examples() {
        let x = SipSpace::new(3, 2.0).unwrap();
        let f = Vector::from_real(&[3.0, 4.0, 0.0]);
        assert!((x.norm(&f).unwrap() - 5.0).abs() < 1e-15);

        let y = SipSpace::new(3, 1.5).unwrap();
        let f = Vector::from_real(&[1.0, 1.0, 0.0]);
        // 2^(2/3) = 1.5874010519681994...
        assert!((y.norm(&f).unwrap() - 1.587_401_051_968_199_4).abs() < 1e-15);
        assert_eq!(y.norm(&Vector::zeros(3)).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let x = SipSpace::new(3, 2.0).unwrap();
        let err = x.norm(&Vector::zeros(2)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 3, found: 2 }));
        assert!(x.sip(&Vector::zeros(3), &Vector::zeros(4)).is_err());
        assert!(x.undualize(&DualVector::zeros(1)).is_err());
    }

    #[test]
    fn sip_examples() {
        let x = SipSpace::new(2, 2.0).unwrap();
        let g = Vector::new(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        let h = Vector::from_real(&[1.0, 1.0]);
        assert!((x.sip(&g, &h).unwrap() - c(1.0, 1.0)).norm() < 1e-15);

        let y = SipSpace::new(3, 1.5).unwrap();
        let g = Vector::from_real(&[1.0, 1.0, 0.0]);
        let h = Vector::unit(3, 0);
        let v = y.sip(&g, &h).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-15);
        // Gateaux oracle: Re[g,h] = |h| d/dt |h + t g| at t = 0
        let t = 1e-6;
        let plus = y.norm(&(&h + &g.scale(c(t, 0.0)))).unwrap();
        let minus = y.norm(&(&h - &g.scale(c(t, 0.0)))).unwrap();
        let fd = y.norm(&h).unwrap() * (plus - minus) / (2.0 * t);
        assert!((fd - v.re).abs() < 1e-6);

        let z = y.sip(&Vector::unit(3, 0), &Vector::unit(3, 1)).unwrap();
        assert_eq!(z, ZERO);
        assert_eq!(y.sip(&g, &Vector::zeros(3)).unwrap(), ZERO);
    }

    #[test]
    fn dualize_examples() {
        let x = SipSpace::new(2, 2.0).unwrap();
        let f = Vector::new(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        let d = x.dualize(&f).unwrap();
        assert!((d.0[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((d.0[1] - c(0.0, -1.0)).norm() < 1e-15);
        let back = x.undualize(&d).unwrap();
        assert!((back.0 - f.0).norm() < 1e-15);

        let y = SipSpace::new(3, 1.5).unwrap();
        let f = Vector::from_real(&[1.0, 1.0, 0.0]);
        let d = y.dualize(&f).unwrap();
        let cube_root_two = 2f64.powf(1.0 / 3.0);
        assert!((d.0[0] - c(cube_root_two, 0.0)).norm() < 1e-14);
        assert!((d.0[1] - c(cube_root_two, 0.0)).norm() < 1e-14);
        assert_eq!(d.0[2], ZERO);
        assert!((y.dual_norm(&d).unwrap() - 2f64.powf(2.0 / 3.0)).abs() < 1e-14);

        let mut r = rng::stream(11, 0);
        for _ in 0..100 {
            let g = Vector(rng::complex_vector(&mut r, 3));
            let lhs = d.apply(&g).unwrap();
            let rhs = y.sip(&g, &f).unwrap();
            assert!((lhs - rhs).norm() < 1e-10 * (1.0 + rhs.norm()));
        }

        let back = y.undualize(&d).unwrap();
        assert!((back.0 - f.0).norm() < 1e-14);
        assert!(y.dualize(&Vector::zeros(3)).unwrap().is_zero());
        assert!(y.undualize(&DualVector::zeros(3)).unwrap().is_zero());
    }

    #[test]
    fn dual_norm_examples() {
        let y = SipSpace::new(3, 1.5).unwrap();
        let d = DualVector::new(vec![c(1.0, 1.0), c(-2.0, 0.0), c(0.0, 0.5)]);
        let expected = (2f64.sqrt().powi(3) + 8.0 + 0.125f64).powf(1.0 / 3.0);
        assert!((y.dual_norm(&d).unwrap() - expected).abs() < 1e-14);

        let w = SipSpace::with_weights(2.0, vec![2.0, 1.0]).unwrap();
        let d = DualVector::from_real(&[2.0, 0.0]);
        assert!((w.dual_norm(&d).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        // dense circle sweep of |d(g)| over the unit sphere (real and
        // imaginary parts are irrelevant here because d is real and supported
        // on one coordinate)
        let mut best: f64 = 0.0;
        for k in 0..20000 {
            let th = k as f64 / 20000.0 * std::f64::consts::TAU;
            let g = Vector::from_real(&[th.cos(), th.sin()]);
            let ng = w.norm(&g).unwrap();
            best = best.max(d.apply(&g).unwrap().norm() / ng);
        }
        assert!((best - 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn weighted_duality_roundtrip() {
        let x = SipSpace::with_weights(3.0, vec![0.5, 2.0, 1.5, 4.0]).unwrap();
        let mut r = rng::stream(5, 1);
        for _ in 0..50 {
            let f = Vector(rng::complex_vector(&mut r, 4));
            let d = x.dualize(&f).unwrap();
            let nf = x.norm(&f).unwrap();
            assert!((x.dual_norm(&d).unwrap() - nf).abs() < 1e-12 * nf);
            let back = x.undualize(&d).unwrap();
            assert!((back.0 - &f.0).norm() < 1e-12 * f.0.norm());
            let s = x.sip(&f, &f).unwrap();
            assert!((s.re - nf * nf).abs() < 1e-12 * nf * nf && s.im.abs() < 1e-12 * nf * nf);
        }
    }

    #[test]
    fn dual_sip_matches_reversed_primal() {
        let x = SipSpace::new(3, 1.5).unwrap();
        let f = Vector::new(vec![c(1.0, 0.2), c(-0.3, 0.0), c(0.0, 2.0)]);
        let g = Vector::new(vec![c(0.5, 0.0), c(1.0, 1.0), c(0.0, 0.0)]);
        let fs = x.dualize(&f).unwrap();
        let gs = x.dualize(&g).unwrap();
        let lhs = x.dual_sip(&fs, &gs).unwrap();
        let rhs = x.sip(&g, &f).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
        let nf = x.norm(&f).unwrap();
        assert!((x.dual_sip(&fs, &fs).unwrap().re - nf * nf).abs() < 1e-12);
    }
}

//! Deterministic random streams.
//!
//! Every consumer derives its generator from a master seed and a stream
//! index, so parallel and serial runs draw identical numbers.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::C64;

pub type StreamRng = ChaCha8Rng;

pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(gaussian(rng), gaussian(rng))
}

pub fn complex_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<C64> {
    DVector::from_fn(n, |_, _| complex_gaussian(rng))
}

pub fn complex_matrix<R: Rng + ?Sized>(rng: &mut R, r: usize, c: usize) -> DMatrix<C64> {
    DMatrix::from_fn(r, c, |_, _| complex_gaussian(rng))
}

/// Random real unit vector in `R^dim`.
pub fn unit_sphere<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| gaussian(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

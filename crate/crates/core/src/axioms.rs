//! Randomized check of the semi-inner-product axioms and duality maps.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::C64;
use crate::rng;
use crate::sip::{SipSpace, Vector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub property: String,
    /// Largest relative violation over all draws.
    pub max_violation: f64,
    pub tolerance: f64,
    pub draws: usize,
    pub passed: bool,
}

struct Tally {
    name: &'static str,
    tolerance: f64,
    worst: f64,
    draws: usize,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            tolerance,
            worst: 0.0,
            draws: 0,
        }
    }

    fn record(&mut self, v: f64) {
        self.draws += 1;
        if v.is_nan() || v > self.worst {
            self.worst = v;
        }
    }

    fn finish(self) -> AxiomCheck {
        AxiomCheck {
            property: self.name.to_string(),
            max_violation: self.worst,
            tolerance: self.tolerance,
            draws: self.draws,
            passed: self.worst <= self.tolerance,
        }
    }
}

fn random_space<R: Rng + ?Sized>(r: &mut R, p: f64, max_dim: usize) -> SipSpace {
    let n = r.random_range(1..=max_dim);
    if r.random_bool(0.5) {
        SipSpace::new(n, p).expect("valid exponent")
    } else {
        let w = (0..n).map(|_| r.random_range(0.2..5.0)).collect();
        SipSpace::with_weights(p, w).expect("valid weights")
    }
}

fn random_vector<R: Rng + ?Sized>(r: &mut R, n: usize) -> Vector {
    let scale = 10f64.powf(r.random_range(-2.0..2.0));
    Vector(rng::complex_vector(r, n) * C64::new(scale, 0.0))
}

fn rel(a: C64, b: C64, scale: f64) -> f64 {
    if scale == 0.0 {
        (a - b).norm()
    } else {
        (a - b).norm() / scale
    }
}

/// Runs `draws` random (space, vectors) draws of dimension at most
/// `max_dim` for exponent `p`. The Gateaux check only uses draws whose
/// smallest coordinate of `h` is at least 1% of the largest.
pub fn axiom_suite(p: f64, draws: usize, max_dim: usize, seed: u64) -> Vec<AxiomCheck> {
    let mut cs = Tally::new("cauchy_schwarz", 1e-9);
    let mut compat = Tally::new("norm_compatibility", 1e-10);
    let mut linear = Tally::new("first_slot_linearity", 1e-9);
    let mut homog = Tally::new("second_slot_conjugate_homogeneity", 1e-9);
    let mut roundtrip = Tally::new("duality_roundtrip", 1e-10);
    let mut iso = Tally::new("duality_isometry", 1e-10);
    let mut action = Tally::new("dual_action_matches_sip", 1e-10);
    let mut gateaux = Tally::new("gateaux_derivative", 1e-5);
    for i in 0..draws {
        let mut r = rng::stream(seed, i as u64);
        let x = random_space(&mut r, p, max_dim);
        let n = x.dim();
        let (g, g2, h) = (random_vector(&mut r, n), random_vector(&mut r, n), random_vector(&mut r, n));
        let lam = rng::complex_gaussian(&mut r);
        let (ng, ng2, nh) = (x.norm(&g).unwrap(), x.norm(&g2).unwrap(), x.norm(&h).unwrap());
        let s = x.sip(&g, &h).unwrap();

        cs.record((s.norm() - ng * nh).max(0.0) / (ng * nh));
        compat.record(rel(x.sip(&h, &h).unwrap(), C64::new(nh * nh, 0.0), nh * nh));

        let combo = Vector(&g.0 * lam + &g2.0);
        let lhs = x.sip(&combo, &h).unwrap();
        let rhs = lam * s + x.sip(&g2, &h).unwrap();
        linear.record(rel(lhs, rhs, (lam.norm() * ng + ng2) * nh));

        let scaled = x.sip(&g, &h.scale(lam)).unwrap();
        homog.record(rel(scaled, lam.conj() * s, lam.norm() * ng * nh));

        let d = x.dualize(&h).unwrap();
        let back = x.undualize(&d).unwrap();
        roundtrip.record((&back.0 - &h.0).norm() / h.0.norm());
        let dd = x.dualize(&back).unwrap();
        roundtrip.record((&dd.0 - &d.0).norm() / d.0.norm());
        iso.record((x.dual_norm(&d).unwrap() - nh).abs() / nh);
        action.record(rel(d.apply(&g).unwrap(), s, ng * nh));

        let mags: Vec<f64> = h.0.iter().map(|z| z.norm()).collect();
        let (lo, hi) = mags.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &m| (a.min(m), b.max(m)));
        if lo >= 1e-2 * hi {
            let t = 1e-6 * nh / ng;
            let plus = x.norm(&Vector(&h.0 + &g.0 * C64::new(t, 0.0))).unwrap();
            let minus = x.norm(&Vector(&h.0 - &g.0 * C64::new(t, 0.0))).unwrap();
            let fd = nh * (plus - minus) / (2.0 * t);
            gateaux.record((fd - s.re).abs() / (ng * nh));
        }
    }
    [cs, compat, linear, homog, roundtrip, iso, action, gateaux]
        .into_iter()
        .map(Tally::finish)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_and_is_deterministic() {
        for p in [1.25, 2.0, 4.0] {
            let a = axiom_suite(p, 200, 8, 3);
            assert!(a.iter().all(|c| c.passed), "{a:?}");
            assert!(a.iter().all(|c| c.draws > 0));
            assert_eq!(a, axiom_suite(p, 200, 8, 3));
        }
    }
}

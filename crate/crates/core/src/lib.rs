//! Frames, `K`-frames and atomic systems in finite-dimensional weighted
//! `l^p` spaces with a semi-inner product.
//!
//! Vectors are coordinate lists in a [`SipSpace`]; functionals are stored
//! by their action coefficients ([`DualVector`]). A [`FrameFamily`] pairs a
//! list of vectors with the exponent of its coefficient space, and the
//! [`certifier`] estimates its frame bounds relative to an operator `K`.

pub mod atomic;
pub mod axioms;
pub mod certifier;
pub mod config;
pub mod error;
pub mod frame;
pub mod instances;
pub mod linalg;
pub mod optim;
pub mod perturb;
pub mod rkbs;
pub mod rng;
pub mod sip;

pub use atomic::{DualFamily, EquivalenceReport, LocalAtomFamily};
pub use certifier::{CertificationReport, Verdict};
pub use config::Tolerances;
pub use error::{Error, Result};
pub use frame::{CoeffDualVector, CoeffVector, FrameFamily, LinearOperator};
pub use linalg::C64;
pub use perturb::{PerturbationInstance, PseudoInverse};
pub use rkbs::{DiscreteRkbs, SamplingPattern};
pub use sip::{DualVector, SipSpace, Vector};

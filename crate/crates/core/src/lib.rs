//! Samplers, densities and transition laws for p-tempered α-stable
//! Ornstein–Uhlenbeck processes.
//!
//! The crate is layered bottom-up:
//!
//! * [`rng`]: seeded ChaCha streams with O(1) substream derivation.
//! * [`ggsm`]: generalized gamma laws and the scale-mixture kernels every
//!   other law plugs into.
//! * [`iga`], [`ibgm`], [`dgga`]: the three jump-size laws that appear in
//!   transition decompositions, each with several exact samplers.
//! * [`tempered_stable`]: one-dimensional TS laws with a finite atomic
//!   Rosiński measure.
//! * [`ou`]: transition decompositions, cumulants, characteristic
//!   functions and path simulation for TSOU and OUTS processes.
//! * [`stats`]: sample moments, k-statistics and two-sample tests used by
//!   the validation harness.

pub mod dgga;
pub mod error;
pub mod ggsm;
pub mod ibgm;
pub mod iga;
pub mod numerics;
pub mod ou;
pub mod rng;
pub mod stats;
pub mod tempered_stable;

pub use error::{Error, Result};
pub use rng::RandomStream;

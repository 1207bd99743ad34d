//! Simulation and estimation kernels for excited random walks on `Z^d`.
//!
//! The crate is `no_std` (it only needs `alloc`). It covers:
//!
//! * [`walk`]: the m-excited walk family, visit bookkeeping and trajectories;
//! * [`renewal`]: renewal-time detection and regenerative cycles;
//! * [`weights`]: likelihood-ratio weights between bias levels and the score;
//! * [`estimators`]: speed, speed derivative, range and windowed novelty rates;
//! * [`coupling`]: the monotone coupling of a stationary walk with the m-ERW;
//! * [`oracle`]: brute-force path enumeration used as ground truth;
//! * [`stats`]: mergeable summaries and compensated sums.
//!
//! IO, file formats, parallel scheduling and the CLI live in the `erwlab`
//! crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod coupling;
pub mod error;
pub mod estimators;
pub mod oracle;
pub mod renewal;
pub mod rng;
pub mod stats;
pub mod walk;
pub mod weights;

pub use error::{Error, Result};
pub use stats::{Estimate, EstimateSummary};
pub use walk::{Excitation, LatticePoint, Trajectory, WalkKind, WalkParams};

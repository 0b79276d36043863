//! Sampling and numerical verification for Dyson Brownian motion, Brownian
//! melons, nonintersecting Brownian bridges and the Airy line ensemble.
//!
//! The crate is organised bottom-up:
//!
//! * [`bridge`]: Brownian bridges and rejection sampling of nonintersecting
//!   bridge systems.
//! * [`tridiag`] and [`dyson`]: GUE spectra, Dyson Brownian motion, melons
//!   and the edge rescaling.
//! * [`airy`]: Airy function, Airy kernels, Tracy-Widom distribution and
//!   point-counting statistics.
//! * [`jam`]: jammed points, greedy matchings and the jam graph.
//! * [`bridge_rep`]: the bridge representation of the Airy line ensemble
//!   and the modulus-of-continuity scan.
//! * [`verify`]: parameterised drivers behind every verification test.
//!
//! All randomness flows through [`rng::RngStream`]; every sampler is a pure
//! function of its inputs and stream, so replica-parallel runs are
//! reproducible bit for bit.

pub mod airy;
pub mod bridge;
pub mod bridge_rep;
pub mod dyson;
pub mod ensemble;
pub mod error;
pub mod io;
pub mod jam;
pub mod parallel;
pub mod report;
pub mod rng;
pub mod stats;
pub mod tridiag;
pub mod verify;

pub use ensemble::{BridgeSpec, GridSpec, LineEnsemble, Path};
pub use error::{Error, Result};
pub use report::StatReport;
pub use rng::RngStream;

//! Desk-scale simulator for terrestrial-satellite spectrum coexistence.
//!
//! A terrestrial gNB with a uniform planar array serves one UE per time slot
//! while a LEO constellation shares the band overhead. The library provides
//! the three protection strategies under study and the machinery to evaluate
//! them:
//!
//! - [`nulling`]: trade beamformed gain toward the served UE against leakage
//!   toward the satellites via a regularization parameter.
//! - [`power`]: QoS-aware downlink power selection under rate and
//!   interference-to-noise constraints.
//! - [`scenario`]: the end-to-end per-slot pipeline (propagate, build
//!   channels, schedule, solve, record) plus parameter sweeps and a CLI.
//!
//! Supporting modules: [`numerics`] (small dense complex linear algebra),
//! [`orbits`] (circular two-body constellation propagation and look angles),
//! [`mod@array`] / [`channel`] (planar-array responses and LOS link
//! budgets),
//! and [`metrics`] (RSS degradation, Jain's fairness index, INR summaries).

pub mod array;
pub mod channel;
pub mod error;
pub mod metrics;
pub mod nulling;
pub mod numerics;
pub mod orbits;
pub mod power;
pub mod scenario;
pub(crate) mod vec3;

pub use error::{Error, Result};

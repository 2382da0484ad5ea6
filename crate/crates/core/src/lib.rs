//! Strong stabilization and stable H-infinity controller synthesis for
//! MIMO linear time-invariant systems.
//!
//! The library designs feedback controllers that are themselves stable
//! systems. A zero-constant-term algebraic Riccati equation fixes the
//! state-feedback half of the controller; a pair of linear matrix
//! inequalities certifies a stable observer-like completion with an
//! H-infinity norm bound; and the stable H-infinity design strongly
//! stabilizes the central controller of a generalized plant, giving a
//! stable closed-loop controller of twice the plant order. Every
//! synthesis result carries independently recomputed certificates.

pub mod bench;
pub mod cli;
pub mod hinfsynth;
pub mod lmi;
pub mod numerics;
pub mod riccati;
pub mod strongstab;
pub mod sysmodel;

pub use hinfsynth::{central_controller, min_gamma_central, min_gamma_stable, stable_hinf};
pub use strongstab::{
    parameterize, strong_stabilize, strong_stabilize_stability_only, structured_baseline,
    StrongStabResult,
};
pub use sysmodel::{GeneralizedPlant, StateSpace, TransferMatrix};

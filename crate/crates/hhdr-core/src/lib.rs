//! Coupled two-spin Bloch dynamics near the Hartmann-Hahn double resonance.
//!
//! A weakly driven ancilla spin ('b') is dipolar-coupled to an undriven spin
//! ('a'). The back reaction of the ancilla on the undriven spin shifts its
//! complex resonance frequency; for blue-detuned driving near the
//! Hartmann-Hahn matching condition the effective transverse damping of
//! spin 'a' can turn negative and the pair undergoes a Hopf bifurcation into
//! self-excited oscillation.
//!
//! The crate provides:
//!
//! - the mean-field equations of motion and their analytic Jacobian blocks
//!   ([`model`]),
//! - rotating-frame single-spin steady states and coupled fixed points
//!   ([`steady`]),
//! - the ancilla susceptibility, back-action frequency shift and damping
//!   coefficient, Hartmann-Hahn geometry, full eigenvalue analysis, 2-D
//!   stability sweeps and level-set extraction ([`stability`], [`sweep`],
//!   [`contour`]),
//! - adaptive time-domain integration and self-excited-oscillation
//!   detection ([`dynamics`]),
//! - stability analysis of linear master equations over SU(d) generator
//!   bases ([`lme`]),
//! - cooperativity / dipolar-coupling / critical-temperature estimates with
//!   an NV-/P1 defect-pair preset ([`feasibility`]).
//!
//! All operations are pure functions of immutable inputs and are safe to
//! call from concurrent workers.

pub mod contour;
pub mod dynamics;
pub mod error;
pub mod feasibility;
pub mod linalg;
pub mod lme;
pub mod model;
pub mod ode;
pub mod params;
pub mod stability;
pub mod state;
pub mod steady;
pub mod sweep;

pub use error::{Error, Result};
pub use params::{DriveParams, SpinParams, SystemParams, UnitsMode};
pub use state::BlochState;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

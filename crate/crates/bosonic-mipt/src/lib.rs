//! Exact simulator and analysis toolkit for monitored multimode bosonic
//! circuits at fixed total photon number.
//!
//! The crate models a register of `L` bosonic modes restricted to the sector
//! with exactly `Q` photons, optionally entangled with a two-level reference
//! ancilla. Circuits are brickwork layers of number-conserving beam-splitter
//! gates (fixed or random phases), optional on-site Hubbard phase gates, and
//! probabilistic mid-circuit projective measurements of parity, photon number
//! mod n, or full photon number. On top of the trajectory engine sit the
//! standard monitored-dynamics probes:
//!
//! - ancilla purification curves `S_R(p, t)` over Born-sampled trajectories
//!   ([`protocols::purification_ensemble`]),
//! - a learnability decoder that replays measurement records from two
//!   candidate initial states ([`protocols::run_learnability`]),
//! - bipartite entanglement entropy across a mode cut ([`entropy`]),
//! - a mixed-state noise layer with Kraus channels for cavity decay, thermal
//!   excitation, dephasing, and readout misassignment ([`noise`]),
//! - closed-form hardware readout/timing models ([`hardware`]),
//! - crossing estimation and scaling-collapse transforms ([`analysis`]).
//!
//! Ensembles are embarrassingly parallel and deterministic: trajectory `k`
//! derives its RNG seed from the base seed via a fixed 64-bit mix, so results
//! are bit-identical for any worker count.
//!
//! See the crate examples for one runnable program per capability, or the
//! `bmipt` binary for the batch CLI.

pub mod analysis;
pub mod basis;
pub mod cli;
pub mod entropy;
pub mod error;
pub mod gates;
pub mod hardware;
pub mod io;
mod linalg;
pub mod measurement;
pub mod noise;
pub mod protocols;
pub mod state;

pub use basis::{OccupationVector, SectorBasis};
pub use error::Error;
pub use state::PureState;

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;

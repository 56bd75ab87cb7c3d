//! Exact amplitude-level simulation of single-photon two-way signaling.
//!
//! A photon enters the root of a perfect binary tree of Mach-Zehnder
//! interferometers. At level `k` Alice and Bob each phase-encode one bit on
//! their own arm, and the parity `x_k ^ y_k` decides which child interferometer
//! receives the photon. After `n` levels it lands on one of `2^n` detectors
//! split between the two agents. The agent whose detector clicks learns the
//! other's whole string; the silent agent still learns something from the
//! absence of a click.
//!
//! Modules, bottom-up:
//!
//! - [`optics`]: two-port amplitude algebra (beam splitter, phase, loss, one MZ stage)
//! - [`bits`]: input strings and parity strings
//! - [`circuit`]: the interferometer tree, exact propagation, time-multiplexing delays
//! - [`protocol`]: detector assignments, game runs, decoding, win check
//! - [`info`]: entropies, enumerated and closed-form information gains
//! - [`noise`]: source/loss/detector success rate and its Monte Carlo check
//! - [`timing`]: time windows and the classical baseline
//! - [`cli`]: command implementations behind the `gsd` binary

pub mod bits;
pub mod circuit;
pub mod cli;
pub mod info;
pub mod noise;
pub mod optics;
pub mod protocol;
pub mod timing;

pub use bits::BitString;
pub use circuit::{DelaySchedule, LeafDistribution, MzTree};
pub use optics::{StageNoise, TwoPortState};
pub use protocol::{Agent, DetectorAssignment, GameOutcome, Knowledge};

//! Exact simulation of Jante's law processes on convex bodies.
//!
//! A Jante's law process keeps a configuration of `M` distinct points in a
//! convex body. At every step a new point is drawn uniformly from the set of
//! locations that would join the configuration (the *Keep* set), and the point
//! farthest from the augmented center of mass is thrown out. The moment of
//! inertia strictly decreases and the configuration collapses onto a random
//! limit point.
//!
//! The crate is `no_std` (it needs `alloc`). Randomness is always supplied by
//! the caller as an [`rand::Rng`], so every sampler is deterministic given the
//! generator state.
#![no_std]
#![warn(rust_2018_idioms, unused_qualifications)]

extern crate alloc;

pub mod analysis;
pub mod configuration;
mod error;
pub mod geometry;
pub mod keepset;
mod math;
pub mod process;

pub use configuration::{Configuration, Functionals};
pub use error::{Error, Result};
pub use geometry::{ConvexBody, Point, UniformGeometryData};
pub use keepset::{KeepBalls, KeepSet, RemovalChoice, RemovalOutcome};
pub use process::{
    removal_sequence, run_original, run_original_observed, run_trajectory, run_trajectory_observed, ChainState,
    OriginalRun, OriginalState, OriginalStep, RemovalSequence, RunParams, StepRecord, StopReason, StopRule,
    TrajectoryRecord,
};

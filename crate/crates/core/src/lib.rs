//! Core library for a planar multi-robot navigation RL suite.
//!
//! Everything in this crate is deterministic and allocation-friendly:
//! physics, robot actuation models, navigation tasks, domain randomization,
//! the vectorized environment manager, a PPO trainer, and the evaluation
//! metrics. IO, file formats, and the command-line interface live in the
//! companion `navforge` crate.
//!
//! The crate builds without `std` (with `alloc`); the optional `parallel`
//! feature adds rayon-backed batch stepping.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod envman;
pub mod error;
pub(crate) mod math;
pub mod metrics;
pub mod planar;
pub mod ppo;
pub mod randomization;
pub mod rng;
pub mod robots;
pub mod tasks;

pub use error::{Error, Result};

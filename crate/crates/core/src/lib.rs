//! Ensemble deterministic-policy-gradient tracking control for a 3-DOF
//! underactuated AUV.
//!
//! The crate is organized bottom-up:
//! - [`dynamics`]: vehicle model, saturation, explicit Euler integration
//! - [`env`]: the tracking MDP (state assembly, reward, episodes)
//! - [`neural`]: plain MLPs with backprop and Adam
//! - [`agent`]: the multi-pessimistic ensemble learner and a DDPG baseline
//! - [`harness`]: configuration, training runs, checkpoints, stats, plots

pub mod agent;
pub mod dynamics;
pub mod env;
pub mod error;
pub mod harness;
pub mod neural;

pub use error::{Error, Result};

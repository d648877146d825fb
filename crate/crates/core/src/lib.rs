//! Goal-distance reinforcement learning testbed.
//!
//! A learned distance critic D(s, g) estimates the minimum number of
//! environment transitions from a state to a goal and replaces reward:
//! the actor is improved by descending the distance of the model-predicted
//! next state, and a bridge-point planner splits hard tasks through
//! intermediate states the distance function certifies as shortcuts.
//! Baselines (DDPG, HER, random), four navigation environments, and a
//! seeded experiment harness round out the workspace.

pub mod error;
pub mod numerics;

pub use error::{Error, Result};

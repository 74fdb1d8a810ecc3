//! Tactical decision making for an autonomous truck on a multi-lane highway.
//!
//! The crate contains a small deterministic traffic simulator, the truck's
//! low-level controllers, an RL environment with two action architectures,
//! cost-of-operation rewards, three discrete-action learners (DQN, A2C,
//! PPO), and the training and evaluation drivers around them.

pub mod agent;
pub mod config;
pub mod control;
pub mod env;
pub mod error;
pub mod eval;
pub mod replay;
pub mod reward;
pub mod sim;
pub mod traffic;
pub mod train;

pub use config::RunConfig;

pub use error::{Error, Result};

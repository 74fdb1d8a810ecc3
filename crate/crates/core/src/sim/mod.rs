//! Deterministic multi-lane highway world stepped at a fixed substep.
//!
//! Lane `0` is the rightmost lane; lane centers sit at `lane * lane_width`
//! and a positive lateral offset points left. A vehicle's `x` is its front
//! bumper, so it occupies `[x - length, x]`.

mod config;
mod sensor;
pub mod trace;
mod world;

pub use config::SimConfig;
pub use sensor::SensedVehicle;
pub use world::{SimState, VehicleState, PendingChange};

use serde::{Deserialize, Serialize};

/// Events detected on the ego vehicle. Within an RL step the flags are ORed
/// over substeps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventFlags {
    pub collision: bool,
    pub near_collision: bool,
    pub off_road: bool,
    pub target_reached: bool,
    pub lane_change_started: bool,
}

impl EventFlags {
    pub fn merge(&mut self, other: EventFlags) {
        self.collision |= other.collision;
        self.near_collision |= other.near_collision;
        self.off_road |= other.off_road;
        self.target_reached |= other.target_reached;
        self.lane_change_started |= other.lane_change_started;
    }

    pub fn is_terminal(&self) -> bool {
        self.collision || self.off_road || self.target_reached
    }

    pub fn is_hazard(&self) -> bool {
        self.collision || self.off_road
    }
}

//! Reward functions and the cost-of-operation physics.
//!
//! All functions are pure maps from a [`StepSummary`] to a scalar. Costs are
//! in euros; energy in kWh; the driver wage is billed per elapsed second.

use serde::{Deserialize, Serialize};

use crate::env::StepSummary;
use crate::error::{Error, Result};

const JOULES_PER_KWH: f64 = 3.6e6;
const SECONDS_PER_HOUR: f64 = 3600.0;

/// Reference trip used to price the delivery revenue.
pub const IDEAL_SPEED: f64 = 22.0;
pub const IDEAL_DISTANCE: f64 = 2200.0;
pub const PROFIT_MARGIN: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasicRewardParams {
    #[serde(rename = "P_l")]
    pub lane_change: f64,
    #[serde(rename = "P_c")]
    pub collision: f64,
    #[serde(rename = "P_nc")]
    pub near_collision: f64,
    #[serde(rename = "P_o")]
    pub off_road: f64,
    #[serde(rename = "R_tar")]
    pub target: f64,
    pub max_v: f64,
}

impl Default for BasicRewardParams {
    fn default() -> Self {
        Self {
            lane_change: 1.0,
            collision: 10.0,
            near_collision: 10.0,
            off_road: 10.0,
            target: 100.0,
            max_v: 25.0,
        }
    }
}

/// Prices and vehicle physics of the cost-of-operation rewards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TcopParams {
    #[serde(rename = "P_l")]
    pub lane_change: f64,
    #[serde(rename = "P_c")]
    pub collision: f64,
    #[serde(rename = "P_nc")]
    pub near_collision: f64,
    #[serde(rename = "P_o")]
    pub off_road: f64,
    /// Delivery revenue, €.
    #[serde(rename = "R_tar")]
    pub revenue: f64,
    /// Electricity price, €/kWh.
    #[serde(rename = "C_el")]
    pub electricity_price: f64,
    /// Driver wage, €/h.
    #[serde(rename = "C_dr")]
    pub driver_wage: f64,
    /// Vehicle mass, kg.
    #[serde(rename = "m")]
    pub mass: f64,
    #[serde(rename = "C_d")]
    pub drag_coefficient: f64,
    /// Frontal area, m².
    #[serde(rename = "A_f")]
    pub frontal_area: f64,
    #[serde(rename = "rho_air")]
    pub air_density: f64,
    #[serde(rename = "g")]
    pub gravity: f64,
    #[serde(rename = "C_r")]
    pub rolling_resistance: f64,
    /// Road grade in percent.
    pub slope: f64,
}

impl Default for TcopParams {
    fn default() -> Self {
        Self {
            lane_change: 0.1,
            collision: 1000.0,
            near_collision: 1000.0,
            off_road: 1000.0,
            revenue: 2.78,
            electricity_price: 0.5,
            driver_wage: 50.0,
            mass: 40000.0,
            drag_coefficient: 0.36,
            frontal_area: 10.0,
            air_density: 1.225,
            gravity: 9.81,
            rolling_resistance: 0.005,
            slope: 0.0,
        }
    }
}

/// Traction force in newtons at speed `v` and acceleration `a`.
pub fn traction_force(v: f64, a: f64, p: &TcopParams) -> f64 {
    let drag = 0.5 * p.drag_coefficient * p.frontal_area * p.air_density * v * v;
    let rolling = p.mass * p.gravity * p.rolling_resistance;
    let grade = p.mass * p.gravity * (p.slope / 100.0).atan().sin();
    p.mass * a + drag + rolling + grade
}

/// Electrical energy in kWh drawn over `dt` seconds. Braking does not
/// regenerate: negative traction power counts as zero.
pub fn energy_step(v: f64, a: f64, dt: f64, p: &TcopParams) -> f64 {
    (traction_force(v, a, p) * v * dt).max(0.0) / JOULES_PER_KWH
}

/// Energy of a decision step, from its mean speed and acceleration.
pub fn step_energy(s: &StepSummary, p: &TcopParams) -> f64 {
    energy_step(s.mean_v, s.mean_a, s.dt, p)
}

pub fn energy_cost(s: &StepSummary, p: &TcopParams) -> f64 {
    p.electricity_price * step_energy(s, p)
}

pub fn driver_cost(s: &StepSummary, p: &TcopParams) -> f64 {
    p.driver_wage * s.dt / SECONDS_PER_HOUR
}

fn ind(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn hazard_penalty(s: &StepSummary, collision: f64, near: f64, off_road: f64) -> f64 {
    ind(s.events.collision) * collision + ind(s.events.near_collision) * near + ind(s.events.off_road) * off_road
}

/// Speed incentive, hazard penalties, and a target bonus divided by the
/// episode duration.
pub fn basic_reward(s: &StepSummary, p: &BasicRewardParams) -> f64 {
    let target = match (s.events.target_reached, s.total_time) {
        (true, Some(t)) if t > 0.0 => p.target / t,
        _ => 0.0,
    };
    s.v_t / p.max_v - ind(s.events.lane_change_started) * p.lane_change
        - hazard_penalty(s, p.collision, p.near_collision, p.off_road)
        + target
}

/// Cost-of-operation reward with a weighted delivery revenue.
pub fn tcop_reward(s: &StepSummary, p: &TcopParams, w_tar: f64) -> f64 {
    -energy_cost(s, p) - driver_cost(s, p) - ind(s.events.lane_change_started) * p.lane_change
        - hazard_penalty(s, p.collision, p.near_collision, p.off_road)
        + ind(s.events.target_reached) * p.revenue * w_tar
}

/// Cost-of-operation reward holding only real costs and revenue: no lane
/// change penalty and unit revenue weight.
pub fn tcop_reward_plain(s: &StepSummary, p: &TcopParams) -> f64 {
    -energy_cost(s, p) - driver_cost(s, p) - hazard_penalty(s, p.collision, p.near_collision, p.off_road)
        + ind(s.events.target_reached) * p.revenue
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CurriculumStage {
    /// Safety and driver cost.
    Stage1,
    /// Adds energy cost.
    Stage2,
    /// Adds delivery revenue.
    Stage3,
}

impl CurriculumStage {
    pub fn index(self) -> u8 {
        match self {
            CurriculumStage::Stage1 => 1,
            CurriculumStage::Stage2 => 2,
            CurriculumStage::Stage3 => 3,
        }
    }

    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            1 => Some(CurriculumStage::Stage1),
            2 => Some(CurriculumStage::Stage2),
            3 => Some(CurriculumStage::Stage3),
            _ => None,
        }
    }
}

/// Staged cost-of-operation reward. With `normalized`, the driver and energy
/// costs are divided by the step's distance (floored at `distance_floor`).
pub fn curriculum_reward(
    stage: CurriculumStage,
    normalized: bool,
    s: &StepSummary,
    p: &TcopParams,
    distance_floor: f64,
) -> f64 {
    let per = if normalized { s.distance.max(distance_floor) } else { 1.0 };
    let r1 = -hazard_penalty(s, p.collision, p.near_collision, p.off_road) - driver_cost(s, p) / per;
    if stage == CurriculumStage::Stage1 {
        return r1;
    }
    let r2 = r1 - energy_cost(s, p) / per;
    if stage == CurriculumStage::Stage2 {
        return r2;
    }
    r2 + ind(s.events.target_reached) * p.revenue
}

/// Energy cost and driver cost, in euros, of the reference trip at constant speed.
pub fn ideal_trip_cost(p: &TcopParams) -> (f64, f64) {
    let duration = IDEAL_DISTANCE / IDEAL_SPEED;
    let energy = p.electricity_price * energy_step(IDEAL_SPEED, 0.0, duration, p);
    let driver = p.driver_wage * duration / SECONDS_PER_HOUR;
    (energy, driver)
}

/// Revenue of the reference trip: its cost plus `margin` profit.
pub fn ideal_revenue(p: &TcopParams, margin: f64) -> f64 {
    let (energy, driver) = ideal_trip_cost(p);
    (energy + driver) * (1.0 + margin)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardKind {
    Basic,
    TcopWeighted,
    TcopPlain,
    Curriculum,
    CurriculumNormalized,
}

/// The `reward` section of a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    pub kind: RewardKind,
    /// Stage used by the curriculum kinds when no schedule drives them.
    pub stage: u8,
    #[serde(rename = "W_tar")]
    pub w_tar: f64,
    /// Smallest per-step distance used by the normalised rewards, m.
    pub distance_floor: f64,
    pub basic: BasicRewardParams,
    pub tcop: TcopParams,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            kind: RewardKind::Basic,
            stage: 3,
            w_tar: 1.0,
            distance_floor: 0.1,
            basic: BasicRewardParams::default(),
            tcop: TcopParams::default(),
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        if CurriculumStage::from_index(self.stage).is_none() {
            return Err(Error::config("reward.stage", "must be 1, 2 or 3"));
        }
        if !(self.distance_floor > 0.0) {
            return Err(Error::config("reward.distance_floor", "must be positive"));
        }
        if !(self.basic.max_v > 0.0) {
            return Err(Error::config("reward.basic.max_v", "must be positive"));
        }
        let t = &self.tcop;
        if [t.mass, t.drag_coefficient, t.frontal_area, t.air_density, t.gravity, t.rolling_resistance]
            .iter()
            .any(|&x| !(x > 0.0))
        {
            return Err(Error::config("reward.tcop", "physical constants must be positive"));
        }
        Ok(())
    }

    pub fn function(&self) -> RewardFunction {
        let stage = CurriculumStage::from_index(self.stage).unwrap_or(CurriculumStage::Stage3);
        match self.kind {
            RewardKind::Basic => RewardFunction::Basic(self.basic.clone()),
            RewardKind::TcopWeighted => RewardFunction::TcopWeighted {
                params: self.tcop.clone(),
                w_tar: self.w_tar,
            },
            RewardKind::TcopPlain => RewardFunction::TcopPlain(self.tcop.clone()),
            RewardKind::Curriculum | RewardKind::CurriculumNormalized => RewardFunction::Curriculum {
                stage,
                normalized: self.kind == RewardKind::CurriculumNormalized,
                params: self.tcop.clone(),
                distance_floor: self.distance_floor,
            },
        }
    }
}

/// A fully parameterised reward, ready to score step summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RewardFunction {
    Basic(BasicRewardParams),
    TcopWeighted { params: TcopParams, w_tar: f64 },
    TcopPlain(TcopParams),
    Curriculum {
        stage: CurriculumStage,
        normalized: bool,
        params: TcopParams,
        distance_floor: f64,
    },
}

impl RewardFunction {
    pub fn evaluate(&self, s: &StepSummary) -> f64 {
        match self {
            RewardFunction::Basic(p) => basic_reward(s, p),
            RewardFunction::TcopWeighted { params, w_tar } => tcop_reward(s, params, *w_tar),
            RewardFunction::TcopPlain(p) => tcop_reward_plain(s, p),
            RewardFunction::Curriculum {
                stage,
                normalized,
                params,
                distance_floor,
            } => curriculum_reward(*stage, *normalized, s, params, *distance_floor),
        }
    }

    pub fn stage(&self) -> Option<CurriculumStage> {
        match self {
            RewardFunction::Curriculum { stage, .. } => Some(*stage),
            _ => None,
        }
    }

    pub fn with_stage(&self, new_stage: CurriculumStage) -> Self {
        match self {
            RewardFunction::Curriculum {
                normalized,
                params,
                distance_floor,
                ..
            } => RewardFunction::Curriculum {
                stage: new_stage,
                normalized: *normalized,
                params: params.clone(),
                distance_floor: *distance_floor,
            },
            other => other.clone(),
        }
    }

    /// Named additive terms whose sum is the reward (up to rounding).
    pub fn breakdown(&self, s: &StepSummary) -> Vec<(&'static str, f64)> {
        let mut out = Vec::new();
        let hazards = |out: &mut Vec<(&'static str, f64)>, c: f64, nc: f64, o: f64| {
            out.push(("collision", -ind(s.events.collision) * c));
            out.push(("near_collision", -ind(s.events.near_collision) * nc));
            out.push(("off_road", -ind(s.events.off_road) * o));
        };
        match self {
            RewardFunction::Basic(p) => {
                out.push(("speed", s.v_t / p.max_v));
                out.push(("lane_change", -ind(s.events.lane_change_started) * p.lane_change));
                hazards(&mut out, p.collision, p.near_collision, p.off_road);
                let target = match (s.events.target_reached, s.total_time) {
                    (true, Some(t)) if t > 0.0 => p.target / t,
                    _ => 0.0,
                };
                out.push(("target", target));
            }
            RewardFunction::TcopWeighted { params: p, w_tar } => {
                out.push(("energy", -energy_cost(s, p)));
                out.push(("driver", -driver_cost(s, p)));
                out.push(("lane_change", -ind(s.events.lane_change_started) * p.lane_change));
                hazards(&mut out, p.collision, p.near_collision, p.off_road);
                out.push(("target", ind(s.events.target_reached) * p.revenue * w_tar));
            }
            RewardFunction::TcopPlain(p) => {
                out.push(("energy", -energy_cost(s, p)));
                out.push(("driver", -driver_cost(s, p)));
                hazards(&mut out, p.collision, p.near_collision, p.off_road);
                out.push(("target", ind(s.events.target_reached) * p.revenue));
            }
            RewardFunction::Curriculum {
                stage,
                normalized,
                params: p,
                distance_floor,
            } => {
                let per = if *normalized { s.distance.max(*distance_floor) } else { 1.0 };
                hazards(&mut out, p.collision, p.near_collision, p.off_road);
                out.push(("driver", -driver_cost(s, p) / per));
                if *stage != CurriculumStage::Stage1 {
                    out.push(("energy", -energy_cost(s, p) / per));
                }
                if *stage == CurriculumStage::Stage3 {
                    out.push(("target", ind(s.events.target_reached) * p.revenue));
                }
            }
        }
        out
    }
}

//! An ego truck driven by the same rules as the surrounding traffic: Krauss
//! car following plus the incentive-based lane-change heuristic, with
//! gradual lateral motion. Used as a non-learning cost reference.

use serde::{Deserialize, Serialize};

use super::{EpisodeAccumulator, EpisodeRecord, MetricsTable};
use crate::config::RunConfig;
use crate::control::LaneChangePlan;
use crate::env::SummaryBuilder;
use crate::error::{Error, Result};
use crate::sim::SimState;
use crate::traffic::{krauss_next_speed, lane_change_decision, KraussParams, LaneChangeParams, LaneDecision};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RuleBasedConfig {
    pub desired_speed: f64,
    /// Car-following parameters of the truck (gentler than the cars').
    pub krauss: KraussParams,
    pub lane_change: LaneChangeParams,
    pub lateral_rate: f64,
    pub lane_change_substeps: u32,
}

impl Default for RuleBasedConfig {
    fn default() -> Self {
        Self {
            desired_speed: 25.0,
            krauss: KraussParams {
                accel: 1.3,
                decel: 4.0,
                tau: 1.0,
                sigma: 0.5,
            },
            lane_change: LaneChangeParams::default(),
            lateral_rate: 0.8,
            lane_change_substeps: 40,
        }
    }
}

impl RuleBasedConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.desired_speed > 0.0) {
            return Err(Error::config("eval.rule_based.desired_speed", "must be positive"));
        }
        let k = &self.krauss;
        if !(k.accel > 0.0 && k.decel > 0.0 && k.tau > 0.0 && (0.0..=1.0).contains(&k.sigma)) {
            return Err(Error::config(
                "eval.rule_based.krauss",
                "accel, decel and tau must be positive and sigma in [0, 1]",
            ));
        }
        if !(self.lateral_rate > 0.0) || self.lane_change_substeps == 0 {
            return Err(Error::config("eval.rule_based", "lane changes need a positive rate and duration"));
        }
        Ok(())
    }
}

/// One episode with the rule-based ego, accounted in one-second steps like
/// the learning agents.
pub fn rule_based_episode(config: &RunConfig, seed: u64) -> Result<EpisodeRecord> {
    let rb = &config.eval.rule_based;
    let mut state = SimState::init_episode(&config.env.sim, &config.traffic, seed)?;
    let desired = rb.desired_speed.min(state.config.ego_max_speed);
    state.ego_mut().desired_speed = desired;
    let dt = state.config.substep_dt;
    let window = (1.0 / dt).round().max(1.0) as u32;
    let reward = config.reward.function();
    let mut plan: Option<LaneChangePlan> = None;
    let mut acc = EpisodeAccumulator::new(seed);

    for _ in 0..state.config.max_rl_steps {
        state.begin_decision();
        let mut builder = SummaryBuilder::start(&state);
        if plan.is_none() {
            let ctx = state.lane_change_context(0);
            if let LaneDecision::Change(side) = lane_change_decision(&ctx, &rb.krauss, &rb.lane_change) {
                plan = Some(LaneChangePlan::new(side, rb.lane_change_substeps, rb.lateral_rate));
                state.set_ego_indicator(Some(side));
                builder.mark_lane_change();
            }
        }
        for _ in 0..window {
            let (gap, v_leader) = state.ego_leader().unwrap_or((f64::INFINITY, 0.0));
            let noise = state.uniform();
            let v = state.ego().v;
            let v_next = krauss_next_speed(v, v_leader, gap, desired, &rb.krauss, dt, noise);
            let lat = plan.as_mut().and_then(LaneChangePlan::advance).unwrap_or(0.0);
            let flags = state.substep((v_next - v) / dt, lat)?;
            builder.record(flags);
            if plan.is_some_and(|p| p.is_complete()) {
                plan = None;
                state.set_ego_indicator(None);
                state.snap_ego_to_lane();
            }
            if flags.is_terminal() {
                break;
            }
        }
        let summary = builder.finish(&state);
        acc.add(&summary, reward.evaluate(&summary), &config.reward.tcop);
        if summary.events.is_terminal() {
            break;
        }
    }
    Ok(acc.finish())
}

/// Metrics of `n_episodes` rule-based episodes on the first evaluation round's seeds.
pub fn run_rule_based_ego(config: &RunConfig, n_episodes: usize) -> Result<MetricsTable> {
    if n_episodes == 0 {
        return Err(Error::config("eval.episodes", "must be at least 1"));
    }
    let records = config
        .eval
        .seeds(0, n_episodes)
        .into_iter()
        .map(|seed| rule_based_episode(config, seed))
        .collect::<Result<Vec<_>>>()?;
    MetricsTable::from_records(&records, config.eval.per_meter)
}

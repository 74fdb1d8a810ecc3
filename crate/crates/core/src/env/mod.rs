//! The decision-step environment on top of the substep simulator.
//!
//! One call to [`Env::step`] is one agent decision: one second of simulated
//! time, or four seconds for a lane change in the hierarchical architecture.

mod action;
mod observation;
mod summary;

pub use action::{
    decode, decode_baseline, decode_hierarchical, encode_baseline, encode_hierarchical, Architecture, Command,
    BASELINE_SPEED_DELTAS,
};
pub use observation::{build_observation, Observation, EGO_FEATURES, N_SLOTS, OBSERVATION_LEN, VEHICLE_FEATURES};
pub use summary::{StepSummary, SummaryBuilder};

use serde::{Deserialize, Serialize};

use crate::control::{acc_track, baseline_actuate, AccState, ControllerConfig, LaneChangePlan, LeadInfo, Side};
use crate::error::{Error, Result};
use crate::reward::{CurriculumStage, RewardFunction};
use crate::sim::trace::{Trace, TraceRow};
use crate::sim::{EventFlags, SimConfig, SimState};
use crate::traffic::TrafficConfig;

/// The `env` section of a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub architecture: Architecture,
    /// Feed the gap to the same-lane leader to the agent.
    pub include_d_lead: bool,
    pub sim: SimConfig,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            architecture: Architecture::Hierarchical,
            include_d_lead: true,
            sim: SimConfig::default(),
        }
    }
}

/// Result of one decision step.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub observation: Observation,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
    pub summary: StepSummary,
}

impl Transition {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Env {
    config: EnvConfig,
    traffic: TrafficConfig,
    controller: ControllerConfig,
    reward: RewardFunction,
    state: Option<SimState>,
    acc: AccState,
    lateral: Option<LaneChangePlan>,
    seed: u64,
    done: bool,
    #[serde(skip)]
    recorder: Option<Trace>,
}

impl Env {
    pub fn new(
        config: EnvConfig,
        traffic: TrafficConfig,
        controller: ControllerConfig,
        reward: RewardFunction,
    ) -> Result<Self> {
        config.sim.validate()?;
        traffic.validate()?;
        controller.validate()?;
        let acc = controller.initial_acc_state();
        Ok(Self {
            config,
            traffic,
            controller,
            reward,
            state: None,
            acc,
            lateral: None,
            seed: 0,
            done: true,
            recorder: None,
        })
    }

    pub fn architecture(&self) -> Architecture {
        self.config.architecture
    }

    pub fn n_actions(&self) -> usize {
        self.config.architecture.n_actions()
    }

    pub fn observation_len(&self) -> usize {
        OBSERVATION_LEN
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn state(&self) -> Option<&SimState> {
        self.state.as_ref()
    }

    pub fn acc_state(&self) -> AccState {
        self.acc
    }

    pub fn lateral_plan(&self) -> Option<LaneChangePlan> {
        self.lateral
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn reward_function(&self) -> &RewardFunction {
        &self.reward
    }

    pub fn set_reward_function(&mut self, reward: RewardFunction) {
        self.reward = reward;
    }

    /// Switches the curriculum stage; a no-op for non-curriculum rewards.
    pub fn set_stage(&mut self, stage: CurriculumStage) {
        self.reward = self.reward.with_stage(stage);
    }

    /// Starts recording a per-substep trace from the next `reset`.
    pub fn enable_trace(&mut self, config_hash: impl Into<String>) {
        self.recorder = Some(Trace {
            config_hash: config_hash.into(),
            architecture: self.config.architecture.name().to_string(),
            ..Trace::default()
        });
    }

    pub fn take_trace(&mut self) -> Option<Trace> {
        self.recorder.take()
    }

    pub fn reset(&mut self, seed: u64) -> Result<Observation> {
        let state = SimState::init_episode(&self.config.sim, &self.traffic, seed)?;
        self.acc = self.controller.initial_acc_state();
        self.lateral = None;
        self.seed = seed;
        self.done = false;
        if let Some(t) = self.recorder.as_mut() {
            t.seed = seed;
            t.actions.clear();
            t.rows = vec![TraceRow::capture(&state, 0, 0, EventFlags::default())];
        }
        let obs = build_observation(&state, self.config.include_d_lead);
        self.state = Some(state);
        Ok(obs)
    }

    pub fn observe(&self) -> Result<Observation> {
        let state = self.state.as_ref().ok_or_else(|| Error::contract("observe before reset"))?;
        Ok(build_observation(state, self.config.include_d_lead))
    }

    fn decision_substeps(&self) -> u32 {
        (1.0 / self.config.sim.substep_dt).round().max(1.0) as u32
    }

    pub fn step(&mut self, action: usize) -> Result<Transition> {
        if self.done {
            return Err(Error::contract("step on a finished episode; call reset"));
        }
        let arch = self.config.architecture;
        let cmd = decode(arch, action)?;
        let n_window = self.decision_substeps();
        let max_speed = self.config.sim.ego_max_speed;
        let mut state = self.state.take().ok_or_else(|| Error::contract("step before reset"))?;
        state.begin_decision();
        let decision = state.rl_steps();
        let mut builder = SummaryBuilder::start(&state);
        if let Some(t) = self.recorder.as_mut() {
            t.actions.push(action);
        }

        let outcome = match cmd {
            Command::Baseline { speed_delta, lateral } => {
                self.start_baseline_lateral(&mut state, lateral, &mut builder);
                let accels = baseline_actuate(speed_delta, state.ego().v, state.config.substep_dt, n_window, max_speed);
                self.run_substeps(&mut state, &mut builder, decision, action, n_window, |_, i| Ok(accels[i]))
            }
            cmd => {
                let mut n = n_window;
                match cmd {
                    Command::SetTimeGap(g) => self.acc.set_time_gap(g),
                    Command::IncreaseSpeed => self.acc.adjust_speed(1.0, max_speed),
                    Command::DecreaseSpeed => self.acc.adjust_speed(-1.0, max_speed),
                    Command::ChangeLane(side)
                        if self.controller.check_lane_change_safety && !state.lane_change_is_safe(0, side) => {}
                    Command::ChangeLane(side) => {
                        self.lateral = Some(self.controller.plan(side));
                        state.set_ego_indicator(Some(side));
                        builder.mark_lane_change();
                        n = self.controller.lane_change_substeps;
                    }
                    _ => {}
                }
                let acc = self.acc;
                let controller = self.controller.clone();
                self.run_substeps(&mut state, &mut builder, decision, action, n, |s, _| {
                    let lead = s.ego_leader().map(|(gap, v)| LeadInfo { gap, v });
                    acc_track(s.ego().v, &acc, lead, &controller)
                })
            }
        };
        if let Err(e) = outcome {
            self.state = Some(state);
            self.done = true;
            return Err(e);
        }
        if arch == Architecture::Hierarchical && self.lateral.is_some() {
            self.finish_lateral(&mut state);
        }

        let summary = builder.finish(&state);
        let reward = self.reward.evaluate(&summary);
        let terminated = summary.events.is_terminal();
        let truncated = !terminated && state.rl_steps() >= state.config.max_rl_steps;
        self.done = terminated || truncated;
        let observation = build_observation(&state, self.config.include_d_lead);
        self.state = Some(state);
        Ok(Transition {
            observation,
            reward,
            terminated,
            truncated,
            summary,
        })
    }

    fn start_baseline_lateral(&mut self, state: &mut SimState, lateral: Option<Side>, builder: &mut SummaryBuilder) {
        let Some(side) = lateral else { return };
        match self.lateral {
            Some(p) if p.direction == side => {}
            Some(p) => {
                let back = p.reversed();
                state.set_ego_indicator(Some(back.direction));
                builder.mark_lane_change();
                if back.is_complete() {
                    self.finish_lateral(state);
                } else {
                    self.lateral = Some(back);
                }
            }
            None => {
                self.lateral = Some(self.controller.plan(side));
                state.set_ego_indicator(Some(side));
                builder.mark_lane_change();
            }
        }
    }

    fn finish_lateral(&mut self, state: &mut SimState) {
        self.lateral = None;
        state.set_ego_indicator(None);
        state.snap_ego_to_lane();
    }

    /// Runs up to `n` substeps, stopping early on a terminal event. The
    /// active lateral plan, if any, drives the lateral rate.
    fn run_substeps<F>(
        &mut self,
        state: &mut SimState,
        builder: &mut SummaryBuilder,
        decision: u32,
        action: usize,
        n: u32,
        mut accel: F,
    ) -> Result<()>
    where
        F: FnMut(&SimState, usize) -> Result<f64>,
    {
        for i in 0..n as usize {
            let a = accel(state, i)?;
            let lat = match self.lateral.as_mut() {
                Some(plan) => plan.advance().unwrap_or(0.0),
                None => 0.0,
            };
            let flags = state.substep(a, lat)?;
            builder.record(flags);
            if let Some(t) = self.recorder.as_mut() {
                t.rows.push(TraceRow::capture(state, decision, action, flags));
            }
            if self.config.architecture == Architecture::Baseline && self.lateral.is_some_and(|p| p.is_complete()) {
                self.finish_lateral(state);
            }
            if flags.is_terminal() {
                break;
            }
        }
        Ok(())
    }

    /// Re-runs `actions` from `seed` with tracing on and returns the trace.
    pub fn record_episode(&mut self, config_hash: &str, seed: u64, actions: &[usize]) -> Result<Trace> {
        self.enable_trace(config_hash);
        self.reset(seed)?;
        for &a in actions {
            if self.done {
                break;
            }
            self.step(a)?;
        }
        self.take_trace().ok_or_else(|| Error::contract("trace recorder vanished"))
    }
}

use serde::{Deserialize, Serialize};

use crate::sim::{EventFlags, SimState};

/// What happened during one decision step; the input of every reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSummary {
    /// Ego speed when the step began, m/s.
    pub v_start: f64,
    /// Ego speed at the decision boundary that ends the step, m/s.
    pub v_t: f64,
    /// Mean speed over the step (distance / elapsed time), m/s.
    pub mean_v: f64,
    /// Mean acceleration over the step (speed change / elapsed time), m/s².
    pub mean_a: f64,
    /// Elapsed time, s.
    pub dt: f64,
    /// Distance covered, m.
    pub distance: f64,
    pub events: EventFlags,
    /// Episode duration, set on the step that reaches the target, s.
    pub total_time: Option<f64>,
}

/// Accumulates a [`StepSummary`] while the world is stepped substep by substep.
#[derive(Debug, Clone)]
pub struct SummaryBuilder {
    v_start: f64,
    distance_start: f64,
    substeps_start: u64,
    events: EventFlags,
}

impl SummaryBuilder {
    pub fn start(state: &SimState) -> Self {
        Self {
            v_start: state.ego().v,
            distance_start: state.distance(),
            substeps_start: state.substeps(),
            events: EventFlags::default(),
        }
    }

    pub fn record(&mut self, events: EventFlags) {
        self.events.merge(events);
    }

    pub fn mark_lane_change(&mut self) {
        self.events.lane_change_started = true;
    }

    pub fn finish(self, state: &SimState) -> StepSummary {
        let n = state.substeps() - self.substeps_start;
        let dt = n as f64 * state.config.substep_dt;
        let distance = state.distance() - self.distance_start;
        let v_t = state.ego().v;
        let (mean_v, mean_a) = if dt > 0.0 {
            (distance / dt, (v_t - self.v_start) / dt)
        } else {
            (v_t, 0.0)
        };
        StepSummary {
            v_start: self.v_start,
            v_t,
            mean_v,
            mean_a,
            dt,
            distance,
            events: self.events,
            total_time: self.events.target_reached.then(|| state.time()),
        }
    }
}

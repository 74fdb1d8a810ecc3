use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Intelligent Driver Model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdmParams {
    /// Desired velocity, m/s.
    pub v0: f64,
    /// Minimum standstill spacing, m.
    pub s0: f64,
    /// Desired time gap, s.
    pub time_gap: f64,
    /// Maximum acceleration, m/s².
    pub a: f64,
    /// Comfortable braking deceleration, m/s².
    pub b: f64,
    pub delta: f64,
}

impl IdmParams {
    /// Heavy-truck defaults with the given set-points.
    pub fn truck(v0: f64, time_gap: f64) -> Self {
        Self {
            v0,
            s0: 2.0,
            time_gap,
            a: 1.0,
            b: 2.0,
            delta: 4.0,
        }
    }
}

/// Desired dynamic gap `s*`, floored at zero.
pub fn desired_gap(v: f64, delta_v: f64, p: &IdmParams) -> f64 {
    let s = p.s0 + v * p.time_gap + v * delta_v / (2.0 * (p.a * p.b).sqrt());
    s.max(0.0)
}

/// IDM acceleration for speed `v`, approach rate `delta_v = v - v_leader`
/// and net gap `s` (use `f64::INFINITY` with `delta_v = 0` for a free road).
///
/// A non-positive gap means the vehicles already overlap; the model is
/// undefined there and `-emergency_decel` is returned instead.
pub fn idm_accel(v: f64, delta_v: f64, s: f64, p: &IdmParams, emergency_decel: f64) -> Result<f64> {
    if !v.is_finite() || !delta_v.is_finite() || s.is_nan() {
        return Err(Error::Numeric("idm_accel input"));
    }
    if s <= 0.0 {
        return Ok(-emergency_decel);
    }
    if p.v0 <= 0.0 {
        // zero set-point: come to a halt at comfortable deceleration
        return Ok(if v > 0.0 { -p.b } else { 0.0 });
    }
    let free = (v / p.v0).powf(p.delta);
    let interaction = if s.is_infinite() {
        0.0
    } else {
        let r = desired_gap(v, delta_v, p) / s;
        r * r
    };
    let acc = p.a * (1.0 - free - interaction);
    if acc.is_nan() {
        return Err(Error::Numeric("idm_accel output"));
    }
    Ok(acc)
}

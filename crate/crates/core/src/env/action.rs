use serde::{Deserialize, Serialize};

use crate::control::{Side, TIME_GAPS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    /// The agent picks speed changes and lane changes directly.
    Baseline,
    /// The agent sets cruise-control set-points and requests lane changes.
    Hierarchical,
}

impl Architecture {
    pub fn n_actions(self) -> usize {
        match self {
            Architecture::Baseline => BASELINE_SPEED_DELTAS.len() * 3,
            Architecture::Hierarchical => 8,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Architecture::Baseline => "baseline",
            Architecture::Hierarchical => "hierarchical",
        }
    }
}

/// Speed changes of the baseline action space, m/s per decision.
pub const BASELINE_SPEED_DELTAS: [f64; 4] = [0.0, 1.0, -1.0, -4.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Command {
    SetTimeGap(f64),
    IncreaseSpeed,
    DecreaseSpeed,
    Hold,
    ChangeLane(Side),
    /// Baseline action: a speed change plus an optional lateral request.
    Baseline { speed_delta: f64, lateral: Option<Side> },
}

pub fn decode_hierarchical(index: usize) -> Result<Command> {
    Ok(match index {
        0..=2 => Command::SetTimeGap(TIME_GAPS[index]),
        3 => Command::IncreaseSpeed,
        4 => Command::DecreaseSpeed,
        5 => Command::Hold,
        6 => Command::ChangeLane(Side::Left),
        7 => Command::ChangeLane(Side::Right),
        _ => return Err(Error::contract(format!("hierarchical action {index} out of range 0..8"))),
    })
}

pub fn encode_hierarchical(cmd: Command) -> Result<usize> {
    Ok(match cmd {
        Command::SetTimeGap(g) => TIME_GAPS
            .iter()
            .position(|&t| t == g)
            .ok_or_else(|| Error::contract(format!("time gap {g} is not selectable")))?,
        Command::IncreaseSpeed => 3,
        Command::DecreaseSpeed => 4,
        Command::Hold => 5,
        Command::ChangeLane(Side::Left) => 6,
        Command::ChangeLane(Side::Right) => 7,
        Command::Baseline { .. } => return Err(Error::contract("baseline command in hierarchical table")),
    })
}

/// `index = 3 * longitudinal + lateral`, lateral in {stay, left, right}.
pub fn decode_baseline(index: usize) -> Result<Command> {
    if index >= Architecture::Baseline.n_actions() {
        return Err(Error::contract(format!("baseline action {index} out of range 0..12")));
    }
    let lateral = match index % 3 {
        0 => None,
        1 => Some(Side::Left),
        _ => Some(Side::Right),
    };
    Ok(Command::Baseline {
        speed_delta: BASELINE_SPEED_DELTAS[index / 3],
        lateral,
    })
}

pub fn encode_baseline(cmd: Command) -> Result<usize> {
    let Command::Baseline { speed_delta, lateral } = cmd else {
        return Err(Error::contract("high-level command in baseline table"));
    };
    let long = BASELINE_SPEED_DELTAS
        .iter()
        .position(|&d| d == speed_delta)
        .ok_or_else(|| Error::contract(format!("speed change {speed_delta} is not selectable")))?;
    let lat = match lateral {
        None => 0,
        Some(Side::Left) => 1,
        Some(Side::Right) => 2,
    };
    Ok(3 * long + lat)
}

pub fn decode(arch: Architecture, index: usize) -> Result<Command> {
    match arch {
        Architecture::Baseline => decode_baseline(index),
        Architecture::Hierarchical => decode_hierarchical(index),
    }
}

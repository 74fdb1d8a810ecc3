//! Per-substep episode traces in CSV form.
//!
//! The file starts with `#`-prefixed metadata lines (config hash, seed,
//! architecture, action sequence) followed by a header row and one row per
//! substep. Floats are written in shortest round-trip form, so a parsed
//! trace compares bit-for-bit against a fresh simulation.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::{EventFlags, SimState};
use crate::error::{Error, Result};

const MAGIC: &str = "# truck-tactics trace v1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleSample {
    pub x: f64,
    pub y: f64,
    pub v: f64,
    pub lane: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub substep: u64,
    pub time: f64,
    pub decision: u32,
    pub action: usize,
    pub flags: EventFlags,
    pub vehicles: Vec<VehicleSample>,
}

impl TraceRow {
    pub fn capture(state: &SimState, decision: u32, action: usize, flags: EventFlags) -> Self {
        Self {
            substep: state.substeps(),
            time: state.time(),
            decision,
            action,
            flags,
            vehicles: state
                .vehicles
                .iter()
                .map(|v| VehicleSample {
                    x: v.x,
                    y: v.y,
                    v: v.v,
                    lane: v.lane,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub config_hash: String,
    pub seed: u64,
    pub architecture: String,
    pub actions: Vec<usize>,
    pub rows: Vec<TraceRow>,
}

fn flag(b: bool) -> u8 {
    u8::from(b)
}

impl Trace {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{MAGIC}")?;
        writeln!(w, "# config_hash={}", self.config_hash)?;
        writeln!(w, "# seed={}", self.seed)?;
        writeln!(w, "# architecture={}", self.architecture)?;
        let actions: Vec<String> = self.actions.iter().map(|a| a.to_string()).collect();
        writeln!(w, "# actions={}", actions.join(","))?;

        let n = self.rows.first().map_or(0, |r| r.vehicles.len());
        let mut header = String::from(
            "substep,time,decision,action,collision,near_collision,off_road,target_reached,lane_change_started",
        );
        for i in 0..n {
            let _ = write!(header, ",v{i}_x,v{i}_y,v{i}_v,v{i}_lane");
        }
        writeln!(w, "{header}")?;

        for r in &self.rows {
            let mut line = format!(
                "{},{},{},{},{},{},{},{},{}",
                r.substep,
                r.time,
                r.decision,
                r.action,
                flag(r.flags.collision),
                flag(r.flags.near_collision),
                flag(r.flags.off_road),
                flag(r.flags.target_reached),
                flag(r.flags.lane_change_started)
            );
            for v in &r.vehicles {
                let _ = write!(line, ",{},{},{},{}", v.x, v.y, v.v, v.lane);
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let bad = |msg: &str| Error::Trace(msg.to_string());
        let mut lines = r.lines();
        let mut next = || -> Result<Option<String>> {
            lines
                .next()
                .transpose()
                .map_err(|e| Error::Trace(e.to_string()))
        };
        if next()?.as_deref() != Some(MAGIC) {
            return Err(bad("missing trace header"));
        }
        let mut trace = Trace::default();
        let mut meta = |key: &str| -> Result<String> {
            let line = next()?.ok_or_else(|| bad("truncated metadata"))?;
            line.strip_prefix(&format!("# {key}="))
                .map(str::to_string)
                .ok_or_else(|| Error::Trace(format!("expected `{key}` metadata")))
        };
        trace.config_hash = meta("config_hash")?;
        trace.seed = meta("seed")?.parse().map_err(|_| bad("seed"))?;
        trace.architecture = meta("architecture")?;
        let actions = meta("actions")?;
        trace.actions = if actions.is_empty() {
            Vec::new()
        } else {
            actions
                .split(',')
                .map(|a| a.parse().map_err(|_| bad("action list")))
                .collect::<Result<_>>()?
        };
        let _header = next()?.ok_or_else(|| bad("missing column header"))?;

        while let Some(line) = next()? {
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() < 9 || (f.len() - 9) % 4 != 0 {
                return Err(bad("wrong column count"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| Error::Trace(format!("bad number `{s}`")));
            let int = |s: &str| s.parse::<u64>().map_err(|_| Error::Trace(format!("bad integer `{s}`")));
            let b = |s: &str| int(s).map(|x| x != 0);
            let vehicles = f[9..]
                .chunks(4)
                .map(|c| {
                    Ok(VehicleSample {
                        x: num(c[0])?,
                        y: num(c[1])?,
                        v: num(c[2])?,
                        lane: int(c[3])? as usize,
                    })
                })
                .collect::<Result<_>>()?;
            trace.rows.push(TraceRow {
                substep: int(f[0])?,
                time: num(f[1])?,
                decision: int(f[2])? as u32,
                action: int(f[3])? as usize,
                flags: EventFlags {
                    collision: b(f[4])?,
                    near_collision: b(f[5])?,
                    off_road: b(f[6])?,
                    target_reached: b(f[7])?,
                    lane_change_started: b(f[8])?,
                },
                vehicles,
            });
        }
        Ok(trace)
    }

    /// Index of the first substep where the two traces differ.
    pub fn first_divergence(&self, other: &Trace) -> Option<u64> {
        for (a, b) in self.rows.iter().zip(&other.rows) {
            if a != b {
                return Some(a.substep);
            }
        }
        match self.rows.len().cmp(&other.rows.len()) {
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Less => Some(other.rows[self.rows.len()].substep),
            std::cmp::Ordering::Greater => Some(self.rows[other.rows.len()].substep),
        }
    }
}

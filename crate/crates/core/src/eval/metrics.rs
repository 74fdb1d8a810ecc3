use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{EpisodeRecord, Outcome};
use crate::error::{Error, Result};

/// Costs divided by the total distance of the evaluated episodes, €/m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerMeter {
    pub energy_cost: f64,
    pub driver_cost: f64,
    pub tcop: f64,
}

/// Evaluation summary over a set of episodes; every episode counts,
/// including those ended by a hazard.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub episodes: usize,
    pub reached_pct: f64,
    pub hazard_pct: f64,
    pub not_reached_pct: f64,
    /// Mean over episodes of distance / time, m/s.
    pub avg_speed: f64,
    pub avg_distance: f64,
    pub avg_steps: f64,
    pub avg_energy_cost: f64,
    pub avg_driver_cost: f64,
    pub avg_tcop: f64,
    pub per_meter: Option<PerMeter>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

impl MetricsTable {
    pub fn from_records(records: &[EpisodeRecord], per_meter: bool) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::contract("metrics over zero episodes"));
        }
        let n = records.len() as f64;
        let pct = |o: Outcome| 100.0 * records.iter().filter(|r| r.outcome == o).count() as f64 / n;
        let total_distance: f64 = records.iter().map(|r| r.distance).sum();
        let per_m = |total: f64| if total_distance > 0.0 { total / total_distance } else { 0.0 };
        Ok(Self {
            episodes: records.len(),
            reached_pct: pct(Outcome::ReachedTarget),
            hazard_pct: pct(Outcome::Hazard),
            not_reached_pct: pct(Outcome::NotReached),
            avg_speed: mean(records.iter().map(EpisodeRecord::average_speed)),
            avg_distance: mean(records.iter().map(|r| r.distance)),
            avg_steps: mean(records.iter().map(|r| f64::from(r.steps))),
            avg_energy_cost: mean(records.iter().map(|r| r.energy_cost)),
            avg_driver_cost: mean(records.iter().map(|r| r.driver_cost)),
            avg_tcop: mean(records.iter().map(EpisodeRecord::tcop)),
            per_meter: per_meter.then(|| PerMeter {
                energy_cost: per_m(records.iter().map(|r| r.energy_cost).sum()),
                driver_cost: per_m(records.iter().map(|r| r.driver_cost).sum()),
                tcop: per_m(records.iter().map(EpisodeRecord::tcop).sum()),
            }),
        })
    }

    /// `(label, value)` rows in display order.
    pub fn rows(&self) -> Vec<(&'static str, f64)> {
        let mut rows = vec![
            ("Reached target successfully (%)", self.reached_pct),
            ("Terminated by collision or off-road (%)", self.hazard_pct),
            ("Not reached within max steps (%)", self.not_reached_pct),
            ("Average speed (m/s)", self.avg_speed),
            ("Average distance (m)", self.avg_distance),
            ("Average executed steps", self.avg_steps),
            ("Average energy cost (EUR)", self.avg_energy_cost),
            ("Average driver cost (EUR)", self.avg_driver_cost),
            ("Average tcop (EUR)", self.avg_tcop),
        ];
        if let Some(p) = &self.per_meter {
            rows.push(("Average energy cost per meter (EUR/m)", p.energy_cost));
            rows.push(("Average driver cost per meter (EUR/m)", p.driver_cost));
            rows.push(("Average tcop per meter (EUR/m)", p.tcop));
        }
        rows
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,value\n");
        for (label, v) in self.rows() {
            let _ = writeln!(out, "\"{label}\",{v}");
        }
        out
    }

    pub fn to_text(&self) -> String {
        let rows = self.rows();
        let width = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (label, v) in rows {
            let _ = writeln!(out, "{label:<width$}  {v:>12.4}");
        }
        out
    }
}

/// Unweighted mean of each field.
pub fn aggregate(tables: &[MetricsTable]) -> Result<MetricsTable> {
    let first = tables.first().ok_or_else(|| Error::contract("aggregate of no tables"))?;
    if tables.iter().any(|t| t.per_meter.is_some() != first.per_meter.is_some()) {
        return Err(Error::contract("tables disagree on per-meter rows"));
    }
    let m = |f: &dyn Fn(&MetricsTable) -> f64| mean(tables.iter().map(f));
    Ok(MetricsTable {
        episodes: tables.iter().map(|t| t.episodes).sum(),
        reached_pct: m(&|t| t.reached_pct),
        hazard_pct: m(&|t| t.hazard_pct),
        not_reached_pct: m(&|t| t.not_reached_pct),
        avg_speed: m(&|t| t.avg_speed),
        avg_distance: m(&|t| t.avg_distance),
        avg_steps: m(&|t| t.avg_steps),
        avg_energy_cost: m(&|t| t.avg_energy_cost),
        avg_driver_cost: m(&|t| t.avg_driver_cost),
        avg_tcop: m(&|t| t.avg_tcop),
        per_meter: first.per_meter.map(|_| PerMeter {
            energy_cost: m(&|t| t.per_meter.map_or(0.0, |p| p.energy_cost)),
            driver_cost: m(&|t| t.per_meter.map_or(0.0, |p| p.driver_cost)),
            tcop: m(&|t| t.per_meter.map_or(0.0, |p| p.tcop)),
        }),
    })
}

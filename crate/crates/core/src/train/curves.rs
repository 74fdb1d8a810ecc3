use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::env::StepSummary;

/// One finished training episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    /// Environment steps taken when the episode ended.
    pub step: u64,
    pub episode_return: f64,
    pub episode_length: u64,
    /// Curriculum stage (1-3), or 0 outside curriculum runs.
    pub stage: u8,
}

/// One training step, kept for reward audits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepLogRow {
    /// Zero-based index of the step.
    pub step: u64,
    pub stage: u8,
    pub action: usize,
    pub reward: f64,
    pub summary: StepSummary,
}

pub fn write_curve_csv<W: Write>(rows: &[CurveRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "step,episode_return,episode_length,stage")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.step, r.episode_return, r.episode_length, r.stage)?;
    }
    Ok(())
}

pub fn write_step_log_csv<W: Write>(rows: &[StepLogRow], mut w: W) -> std::io::Result<()> {
    writeln!(
        w,
        "step,stage,action,reward,v_start,v_t,mean_v,mean_a,dt,distance,collision,near_collision,off_road,target_reached,lane_change_started,total_time"
    )?;
    for r in rows {
        let s = &r.summary;
        let e = &s.events;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.step,
            r.stage,
            r.action,
            r.reward,
            s.v_start,
            s.v_t,
            s.mean_v,
            s.mean_a,
            s.dt,
            s.distance,
            u8::from(e.collision),
            u8::from(e.near_collision),
            u8::from(e.off_road),
            u8::from(e.target_reached),
            u8::from(e.lane_change_started),
            s.total_time.map_or(String::new(), |t| t.to_string())
        )?;
    }
    Ok(())
}

/// Trailing mean of episode returns over `window` episodes.
pub fn smooth(rows: &[CurveRow], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut out = Vec::with_capacity(rows.len());
    let mut sum = 0.0;
    for (i, r) in rows.iter().enumerate() {
        sum += r.episode_return;
        if i >= window {
            sum -= rows[i - window].episode_return;
        }
        out.push(sum / (i + 1).min(window) as f64);
    }
    out
}

/// Mean episode return per step bin `(k·bin, (k+1)·bin]` across runs:
/// each run contributes the mean of its episodes ending in the bin, and
/// runs without episodes there are skipped. Returns `(bin end, mean)`.
pub fn aggregate_curves(runs: &[Vec<CurveRow>], bin: u64, total_steps: u64) -> Vec<(u64, f64)> {
    let bin = bin.max(1);
    let n_bins = total_steps.div_ceil(bin);
    (0..n_bins)
        .filter_map(|k| {
            let (lo, hi) = (k * bin, (k + 1) * bin);
            let means: Vec<f64> = runs
                .iter()
                .filter_map(|rows| {
                    let in_bin: Vec<f64> = rows
                        .iter()
                        .filter(|r| r.step > lo && r.step <= hi)
                        .map(|r| r.episode_return)
                        .collect();
                    (!in_bin.is_empty()).then(|| in_bin.iter().sum::<f64>() / in_bin.len() as f64)
                })
                .collect();
            (!means.is_empty()).then(|| (hi, means.iter().sum::<f64>() / means.len() as f64))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(step: u64, ret: f64) -> CurveRow {
        CurveRow {
            step,
            episode_return: ret,
            episode_length: 1,
            stage: 0,
        }
    }

    #[test]
    fn trailing_mean() {
        let rows = [row(1, 1.0), row(2, 3.0), row(3, 5.0)];
        assert_eq!(smooth(&rows, 2), vec![1.0, 2.0, 4.0]);
    }

    #[test]
    fn bins_average_runs() {
        let a = vec![row(5, 1.0), row(15, 2.0)];
        let b = vec![row(8, 3.0)];
        assert_eq!(aggregate_curves(&[a, b], 10, 20), vec![(10, 2.0), (20, 2.0)]);
    }
}

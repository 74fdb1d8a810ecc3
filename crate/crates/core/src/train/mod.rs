//! Training loop, curriculum schedule, learning curves and checkpoints.

mod checkpoint;
mod curves;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, CheckpointHeader};
pub use curves::{aggregate_curves, smooth, write_curve_csv, write_step_log_csv, CurveRow, StepLogRow};

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::{Agent, Experience, Mode};
use crate::config::RunConfig;
use crate::control::ControllerConfig;
use crate::env::{Env, EnvConfig};
use crate::error::{Error, Result};
use crate::reward::{CurriculumStage, RewardConfig};
use crate::traffic::TrafficConfig;

/// The `training` section of a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    /// Environment decision steps (before scaling).
    pub total_steps: u64,
    /// Drive the curriculum reward stage from `stage_boundaries`.
    pub curriculum: bool,
    /// Step at which stages 1, 2 and 3 end (before scaling).
    pub stage_boundaries: [u64; 3],
    /// Multiplies all step budgets; use e.g. 0.1 for quick runs.
    pub scale: f64,
    /// Number of seeds in multi-seed mode (`seed`, `seed + 1`, ...).
    pub seeds: u64,
    /// Keep every step's summary and reward for offline audits.
    pub log_steps: bool,
    /// Trailing window for smoothed curves, in episodes.
    pub smoothing_window: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            total_steps: 1_700_000,
            curriculum: false,
            stage_boundaries: [700_000, 1_200_000, 1_700_000],
            scale: 1.0,
            seeds: 1,
            log_steps: false,
            smoothing_window: 100,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let b = self.stage_boundaries;
        if !(b[0] < b[1] && b[1] < b[2]) {
            return Err(Error::config("training.stage_boundaries", "must be strictly increasing"));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::config("training.scale", "must be positive"));
        }
        if self.seeds == 0 {
            return Err(Error::config("training.seeds", "must be at least 1"));
        }
        Ok(())
    }

    fn scaled(&self, steps: u64) -> u64 {
        (steps as f64 * self.scale).round() as u64
    }

    pub fn scaled_total_steps(&self) -> u64 {
        self.scaled(self.total_steps)
    }

    pub fn schedule(&self) -> Option<CurriculumSchedule> {
        self.curriculum.then(|| CurriculumSchedule {
            boundaries: self.stage_boundaries.map(|b| self.scaled(b)),
        })
    }
}

/// Maps an environment step index to its curriculum stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurriculumSchedule {
    pub boundaries: [u64; 3],
}

impl Default for CurriculumSchedule {
    fn default() -> Self {
        Self {
            boundaries: [700_000, 1_200_000, 1_700_000],
        }
    }
}

impl CurriculumSchedule {
    /// Stage of the step with zero-based index `step`; the last stage
    /// persists past the final boundary.
    pub fn stage(&self, step: u64) -> CurriculumStage {
        if step < self.boundaries[0] {
            CurriculumStage::Stage1
        } else if step < self.boundaries[1] {
            CurriculumStage::Stage2
        } else {
            CurriculumStage::Stage3
        }
    }
}

/// Deterministic per-episode seed stream; `stream` separates training and
/// evaluation episodes of the same run seed.
pub fn episode_seed(run_seed: u64, stream: u64, episode: u64) -> u64 {
    // splitmix64 finaliser over the packed inputs
    let mut z = run_seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_mul(0xD1B5_4A32_D192_ED03))
        .wrapping_add(episode);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const TRAIN_STREAM: u64 = 0;

pub fn build_env(env: &EnvConfig, traffic: &TrafficConfig, controller: &ControllerConfig, reward: &RewardConfig) -> Result<Env> {
    Env::new(env.clone(), traffic.clone(), controller.clone(), reward.function())
}

/// Complete, serializable state of a training run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trainer {
    config: RunConfig,
    config_hash: String,
    seed: u64,
    pub env: Env,
    pub agent: Agent,
    step: u64,
    total_steps: u64,
    schedule: Option<CurriculumSchedule>,
    episode: u64,
    obs: Vec<f64>,
    ep_return: f64,
    ep_len: u64,
    curve: Vec<CurveRow>,
    step_log: Vec<StepLogRow>,
}

impl Trainer {
    pub fn new(config: &RunConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut env = build_env(&config.env, &config.traffic, &config.controller, &config.reward)?;
        let total_steps = config.training.scaled_total_steps();
        let agent = Agent::new(
            &config.agent,
            env.observation_len(),
            env.n_actions(),
            total_steps,
            episode_seed(seed, u64::MAX, 0),
        )?;
        let schedule = config.training.schedule();
        if let Some(s) = schedule {
            env.set_stage(s.stage(0));
        }
        let obs = env.reset(episode_seed(seed, TRAIN_STREAM, 0))?.0;
        Ok(Self {
            config: config.clone(),
            config_hash: config.hash(),
            seed,
            env,
            agent,
            step: 0,
            total_steps,
            schedule,
            episode: 0,
            obs,
            ep_return: 0.0,
            ep_len: 0,
            curve: Vec::new(),
            step_log: Vec::new(),
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn config_hash(&self) -> &str {
        &self.config_hash
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn total_steps(&self) -> u64 {
        self.total_steps
    }

    pub fn schedule(&self) -> Option<CurriculumSchedule> {
        self.schedule
    }

    pub fn curve(&self) -> &[CurveRow] {
        &self.curve
    }

    pub fn step_log(&self) -> &[StepLogRow] {
        &self.step_log
    }

    pub fn is_finished(&self) -> bool {
        self.step >= self.total_steps
    }

    fn stage_index(&self) -> u8 {
        self.env.reward_function().stage().map_or(0, CurriculumStage::index)
    }

    /// Takes one environment step and feeds it to the learner.
    pub fn step_once(&mut self) -> Result<()> {
        if let Some(s) = self.schedule {
            let stage = s.stage(self.step);
            if self.env.reward_function().stage() != Some(stage) {
                self.env.set_stage(stage);
            }
        }
        let action = self.agent.act(&self.obs, Mode::Train)?;
        let tr = self.env.step(action)?;
        let obs = std::mem::take(&mut self.obs);
        let next_obs = tr.observation.0.clone();
        self.agent.observe(Experience {
            obs,
            action,
            reward: tr.reward,
            next_obs,
            terminated: tr.terminated,
            truncated: tr.truncated,
        })?;
        if self.config.training.log_steps {
            self.step_log.push(StepLogRow {
                step: self.step,
                stage: self.stage_index(),
                action,
                reward: tr.reward,
                summary: tr.summary,
            });
        }
        self.step += 1;
        self.ep_return += tr.reward;
        self.ep_len += 1;
        if tr.done() {
            self.curve.push(CurveRow {
                step: self.step,
                episode_return: self.ep_return,
                episode_length: self.ep_len,
                stage: self.stage_index(),
            });
            self.episode += 1;
            self.ep_return = 0.0;
            self.ep_len = 0;
            self.obs = self.env.reset(episode_seed(self.seed, TRAIN_STREAM, self.episode))?.0;
        } else {
            self.obs = tr.observation.0;
        }
        Ok(())
    }

    /// Steps until `step` (capped at the run's total).
    pub fn run_until(&mut self, step: u64) -> Result<()> {
        let stop = step.min(self.total_steps);
        while self.step < stop {
            self.step_once()?;
        }
        Ok(())
    }

    /// Steps at which checkpoints are written, with their names.
    pub fn checkpoint_plan(&self) -> Vec<(String, u64)> {
        let mut plan: Vec<(String, u64)> = Vec::new();
        if let Some(s) = self.schedule {
            for (k, &b) in s.boundaries.iter().enumerate() {
                if b <= self.total_steps && b > 0 {
                    plan.push((format!("stage{}", k + 1), b));
                }
            }
        }
        if plan.last().is_none_or(|(_, s)| *s != self.total_steps) {
            plan.push(("final".into(), self.total_steps));
        }
        plan
    }
}

/// Checkpoint written during a run.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointRecord {
    pub name: String,
    pub step: u64,
    pub path: Option<PathBuf>,
}

/// What a training run leaves behind.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub run_id: String,
    pub seed: u64,
    pub config_hash: String,
    pub dir: Option<PathBuf>,
    pub curve: Vec<CurveRow>,
    pub step_log: Vec<StepLogRow>,
    pub checkpoints: Vec<CheckpointRecord>,
    /// Final trainer state, including the trained agent.
    pub trainer: Trainer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub run_id: String,
    pub config_hash: String,
    pub seed: u64,
    pub revision: String,
    pub total_steps: u64,
    pub episodes: usize,
}

pub fn revision() -> String {
    format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))
}

/// `run-<unix seconds>-<first 8 hex digits of the config hash>`.
pub fn run_id(config_hash: &str) -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    format!("run-{secs}-{}", &config_hash[..8.min(config_hash.len())])
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Drives `trainer` to its end, writing checkpoints (and, with `dir`, curve
/// files and metadata) along the way.
pub fn continue_training(mut trainer: Trainer, run_id: &str, dir: Option<&Path>) -> Result<RunArtifacts> {
    if let Some(d) = dir {
        std::fs::create_dir_all(d.join("checkpoints")).map_err(|e| Error::io(d, e))?;
        write_file(&d.join("config.toml"), trainer.config.to_toml()?.as_bytes())?;
    }
    let mut checkpoints = Vec::new();
    for (name, at) in trainer.checkpoint_plan() {
        if at < trainer.step {
            continue;
        }
        trainer.run_until(at)?;
        let path = match dir {
            Some(d) => {
                let p = d.join("checkpoints").join(format!("{name}.ckpt"));
                save_checkpoint(&trainer, &p)?;
                Some(p)
            }
            None => None,
        };
        checkpoints.push(CheckpointRecord { name, step: at, path });
    }

    if let Some(d) = dir {
        let mut buf = Vec::new();
        write_curve_csv(&trainer.curve, &mut buf).map_err(|e| Error::io(d, e))?;
        write_file(&d.join("curve.csv"), &buf)?;
        if trainer.config.training.log_steps {
            let mut buf = Vec::new();
            write_step_log_csv(&trainer.step_log, &mut buf).map_err(|e| Error::io(d, e))?;
            write_file(&d.join("steps.csv"), &buf)?;
        }
        let meta = RunMetadata {
            run_id: run_id.to_string(),
            config_hash: trainer.config_hash.clone(),
            seed: trainer.seed,
            revision: revision(),
            total_steps: trainer.total_steps,
            episodes: trainer.curve.len(),
        };
        let json = serde_json::to_string_pretty(&meta).map_err(|e| Error::Codec(e.to_string()))?;
        write_file(&d.join("metadata.json"), json.as_bytes())?;
    }
    Ok(RunArtifacts {
        run_id: run_id.to_string(),
        seed: trainer.seed,
        config_hash: trainer.config_hash.clone(),
        dir: dir.map(Path::to_path_buf),
        curve: trainer.curve.clone(),
        step_log: trainer.step_log.clone(),
        checkpoints,
        trainer,
    })
}

/// Trains one seed. With `dir`, artifacts are written there.
pub fn run_training(config: &RunConfig, seed: u64, dir: Option<&Path>) -> Result<RunArtifacts> {
    let trainer = Trainer::new(config, seed)?;
    let id = run_id(trainer.config_hash());
    continue_training(trainer, &id, dir)
}

/// Trains `training.seeds` seeds starting at `config.seed`, each in
/// `<root>/<run id>/seed-<n>` when `root` is given.
pub fn run_training_seeds(config: &RunConfig, root: Option<&Path>) -> Result<Vec<RunArtifacts>> {
    let id = run_id(&config.hash());
    (0..config.training.seeds)
        .map(|k| {
            let seed = config.seed + k;
            let dir = root.map(|r| r.join(&id).join(format!("seed-{seed}")));
            let trainer = Trainer::new(config, seed)?;
            continue_training(trainer, &id, dir.as_deref())
        })
        .collect()
}

/// Loads a mid-run checkpoint and verifies it belongs to `config`.
pub fn resume(config: &RunConfig, path: &Path) -> Result<Trainer> {
    let trainer = load_checkpoint(path)?;
    let expected = config.hash();
    if trainer.config_hash != expected {
        return Err(Error::ConfigMismatch {
            expected,
            found: trainer.config_hash,
        });
    }
    Ok(trainer)
}

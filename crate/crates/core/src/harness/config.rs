//! Run configuration: built-in defaults, a flat `key = value` config file,
//! and CLI overrides layered on top.

use crate::agent::{ActionBounds, AgentConfig};
use crate::dynamics::{RUDDER_BOUND, THRUST_BOUND};
use crate::env::{EpisodeConfig, NormalizationBounds, ReferenceTrajectory};
use crate::error::{Error, Result};
use nalgebra::Matrix2;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    MpqDpg,
    Ddpg,
}

impl Algorithm {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mpq-dpg" => Ok(Algorithm::MpqDpg),
            "ddpg" => Ok(Algorithm::Ddpg),
            other => Err(Error::Config(format!(
                "unknown algorithm '{other}' (expected mpq-dpg or ddpg)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::MpqDpg => "mpq-dpg",
            Algorithm::Ddpg => "ddpg",
        }
    }
}

pub fn parse_trajectory(s: &str) -> Result<ReferenceTrajectory> {
    match s {
        "rt1" => Ok(ReferenceTrajectory::Rt1),
        "rt2" => Ok(ReferenceTrajectory::Rt2),
        other => Err(Error::Config(format!(
            "unknown trajectory '{other}' (expected rt1 or rt2)"
        ))),
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub trajectory: ReferenceTrajectory,
    pub n_actors: usize,
    pub m_critics: usize,
    pub episodes: usize,
    pub steps_per_episode: usize,
    pub seed: u64,
    pub lr_actor: f64,
    pub lr_critic: f64,
    pub l2: f64,
    pub gamma: f64,
    pub buffer_capacity: usize,
    pub minibatch: usize,
    pub hidden: (usize, usize),
    pub ou_theta: f64,
    pub ou_sigma: f64,
    pub tau_soft: f64,
    pub ts: f64,
    /// Scalar h for the reward weight H = h * I.
    pub h_weight: f64,
    pub norm_position: f64,
    pub norm_linear_velocity: f64,
    pub norm_yaw_rate: f64,
    pub thrust_bound: f64,
    pub rudder_bound: f64,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::MpqDpg,
            trajectory: ReferenceTrajectory::Rt1,
            n_actors: 2,
            m_critics: 2,
            episodes: 1500,
            steps_per_episode: 1000,
            seed: 0,
            lr_actor: 1e-4,
            lr_critic: 1e-3,
            l2: 1e-2,
            gamma: 0.99,
            buffer_capacity: 10_000,
            minibatch: 64,
            hidden: (400, 300),
            ou_theta: 0.15,
            ou_sigma: 0.32,
            tau_soft: 0.001,
            ts: 0.1,
            h_weight: 0.001,
            norm_position: 60.0,
            norm_linear_velocity: 3.0,
            norm_yaw_rate: 2.0,
            thrust_bound: THRUST_BOUND,
            rudder_bound: RUDDER_BOUND,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.algorithm == Algorithm::MpqDpg && self.m_critics < 2 {
            return Err(Error::Config(
                "mpq-dpg requires at least 2 critics".into(),
            ));
        }
        if self.n_actors == 0 {
            return Err(Error::Config("n_actors must be positive".into()));
        }
        if self.m_critics == 0 {
            return Err(Error::Config("m_critics must be positive".into()));
        }
        if self.steps_per_episode == 0 {
            return Err(Error::Config("steps_per_episode must be positive".into()));
        }
        if self.minibatch == 0 || self.buffer_capacity == 0 {
            return Err(Error::Config(
                "minibatch and buffer_capacity must be positive".into(),
            ));
        }
        if !(self.ts > 0.0) {
            return Err(Error::Config("ts must be positive".into()));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::Config("gamma must lie in (0, 1]".into()));
        }
        if self.h_weight <= 0.0 {
            return Err(Error::Config("h_weight must be positive".into()));
        }
        Ok(())
    }

    /// Parses a flat `key = value` file and applies it over `self`.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "{}:{}: expected 'key = value'",
                    path.display(),
                    lineno + 1
                ))
            })?;
            self.set(key.trim(), value.trim()).map_err(|e| {
                Error::Config(format!("{}:{}: {e}", path.display(), lineno + 1))
            })?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("invalid value '{value}' for {key}")))
        }
        match key {
            "algorithm" => self.algorithm = Algorithm::parse(value)?,
            "trajectory" => self.trajectory = parse_trajectory(value)?,
            "n_actors" => self.n_actors = num(key, value)?,
            "m_critics" => self.m_critics = num(key, value)?,
            "episodes" => self.episodes = num(key, value)?,
            "steps_per_episode" => self.steps_per_episode = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "lr_actor" => self.lr_actor = num(key, value)?,
            "lr_critic" => self.lr_critic = num(key, value)?,
            "l2" => self.l2 = num(key, value)?,
            "gamma" => self.gamma = num(key, value)?,
            "buffer_capacity" => self.buffer_capacity = num(key, value)?,
            "minibatch" => self.minibatch = num(key, value)?,
            "hidden1" => self.hidden.0 = num(key, value)?,
            "hidden2" => self.hidden.1 = num(key, value)?,
            "ou_theta" => self.ou_theta = num(key, value)?,
            "ou_sigma" => self.ou_sigma = num(key, value)?,
            "tau_soft" => self.tau_soft = num(key, value)?,
            "ts" => self.ts = num(key, value)?,
            "h_weight" => self.h_weight = num(key, value)?,
            "norm_position" => self.norm_position = num(key, value)?,
            "norm_linear_velocity" => self.norm_linear_velocity = num(key, value)?,
            "norm_yaw_rate" => self.norm_yaw_rate = num(key, value)?,
            "thrust_bound" => self.thrust_bound = num(key, value)?,
            "rudder_bound" => self.rudder_bound = num(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn episode_config(&self) -> EpisodeConfig {
        EpisodeConfig {
            ts: self.ts,
            steps_per_episode: self.steps_per_episode,
            h: Matrix2::identity() * self.h_weight,
            gamma: self.gamma,
            bounds: NormalizationBounds {
                position: self.norm_position,
                linear_velocity: self.norm_linear_velocity,
                yaw_rate: self.norm_yaw_rate,
            },
            thrust_bound: self.thrust_bound,
            rudder_bound: self.rudder_bound,
        }
    }

    pub fn agent_config(&self) -> AgentConfig {
        AgentConfig {
            gamma: self.gamma,
            minibatch: self.minibatch,
            buffer_capacity: self.buffer_capacity,
            hidden: self.hidden,
            lr_actor: self.lr_actor,
            lr_critic: self.lr_critic,
            l2: self.l2,
            ou_theta: self.ou_theta,
            ou_sigma: self.ou_sigma,
            bounds: ActionBounds {
                thrust: self.thrust_bound,
                rudder: self.rudder_bound,
            },
            tau_soft: self.tau_soft,
        }
    }
}

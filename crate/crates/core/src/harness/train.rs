//! Training, evaluation, and open-loop simulation runs with CSV outputs.

use crate::agent::{average_policy, DdpgAgent, EnsembleAgent};
use crate::dynamics::{ControlInput, DynamicsModel, VehicleState};
use crate::env::{Environment, ReferenceTrajectory};
use crate::error::{Error, Result};
use crate::harness::checkpoint;
use crate::harness::config::{Algorithm, RunConfig};
use crate::neural::{Activation, MlpNetwork};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::path::{Path, PathBuf};

/// One row of the training log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub total_reward: f64,
    pub steps: usize,
    /// Simulated episode duration, steps * ts.
    pub seconds: f64,
}

pub const TRAINING_HEADER: &str = "episode,total_reward,steps,seconds";
pub const ROLLOUT_HEADER: &str = "step,t,x,y,x_d,y_d,err_norm,thrust,rudder,reward";

enum Learner {
    Mpq(EnsembleAgent),
    Ddpg(DdpgAgent),
}

impl Learner {
    fn reset_noise(&mut self) {
        match self {
            Learner::Mpq(a) => a.noise.reset(),
            Learner::Ddpg(a) => a.noise.reset(),
        }
    }

    fn train_step(&mut self, env: &mut Environment, rng: &mut ChaCha8Rng) -> Result<(f64, Option<f64>)> {
        match self {
            Learner::Mpq(a) => a.train_step(env, rng, None),
            Learner::Ddpg(a) => a.train_step(env, rng),
        }
    }

    /// Networks in checkpoint order: all actors, then all critics.
    fn networks(&self) -> Vec<&MlpNetwork> {
        match self {
            Learner::Mpq(a) => a.actors.iter().chain(a.critics.iter()).collect(),
            Learner::Ddpg(a) => vec![&a.actor, &a.critic],
        }
    }
}

/// Runs the configured training loop. Writes `training.csv` (flushed after
/// every episode) and `checkpoint.bin` into the output directory and returns
/// the per-episode records.
pub fn train(config: &RunConfig) -> Result<Vec<EpisodeRecord>> {
    config.validate()?;
    std::fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut env = Environment::new(
        DynamicsModel::remus(),
        config.trajectory,
        config.episode_config(),
    );
    let mut learner = match config.algorithm {
        Algorithm::MpqDpg => Learner::Mpq(EnsembleAgent::new(
            config.n_actors,
            config.m_critics,
            config.agent_config(),
            &mut rng,
        )?),
        Algorithm::Ddpg => Learner::Ddpg(DdpgAgent::new(config.agent_config(), &mut rng)),
    };

    let csv_path = config.out_dir.join("training.csv");
    let mut csv = std::fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    writeln!(csv, "{TRAINING_HEADER}").map_err(|e| Error::io(&csv_path, e))?;

    let mut records = Vec::with_capacity(config.episodes);
    for episode in 0..config.episodes {
        env.reset(&mut rng);
        learner.reset_noise();
        let mut total_reward = 0.0;
        for _ in 0..config.steps_per_episode {
            let (r, _) = learner.train_step(&mut env, &mut rng)?;
            total_reward += r;
        }
        let record = EpisodeRecord {
            episode,
            total_reward,
            steps: config.steps_per_episode,
            seconds: config.steps_per_episode as f64 * config.ts,
        };
        writeln!(
            csv,
            "{},{},{},{}",
            record.episode, record.total_reward, record.steps, record.seconds
        )
        .map_err(|e| Error::io(&csv_path, e))?;
        csv.flush().map_err(|e| Error::io(&csv_path, e))?;
        records.push(record);
    }

    let ckpt_path = config.out_dir.join("checkpoint.bin");
    checkpoint::save(&ckpt_path, &learner.networks())?;
    Ok(records)
}

/// Summary of a closed-loop evaluation rollout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalSummary {
    pub total_reward: f64,
    /// Root-mean-square tracking error sqrt(mean ||e_k||^2).
    pub rms_error: f64,
    pub steps: usize,
}

/// Loads a checkpoint, takes every tanh-output network as an actor, and rolls
/// out the noise-free average policy on `trajectory`, writing a rollout CSV.
pub fn evaluate(
    checkpoint_path: &Path,
    trajectory: ReferenceTrajectory,
    config: &RunConfig,
    out_csv: &Path,
) -> Result<EvalSummary> {
    let networks = checkpoint::load(checkpoint_path)?;
    let actors: Vec<MlpNetwork> = networks
        .into_iter()
        .filter(|n| {
            n.layers()
                .last()
                .map(|l| l.spec.activation == Activation::Tanh)
                .unwrap_or(false)
        })
        .collect();
    if actors.is_empty() {
        return Err(Error::Checkpoint(
            "checkpoint holds no actor networks".into(),
        ));
    }
    let bounds = config.agent_config().bounds;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut env = Environment::new(DynamicsModel::remus(), trajectory, config.episode_config());
    env.reset(&mut rng);

    let mut csv = std::fs::File::create(out_csv).map_err(|e| Error::io(out_csv, e))?;
    writeln!(csv, "{ROLLOUT_HEADER}").map_err(|e| Error::io(out_csv, e))?;
    let mut total_reward = 0.0;
    let mut sq_err = 0.0;
    for step in 0..config.steps_per_episode {
        let s = *env.state();
        let a_norm = average_policy(&actors, &s.normalized);
        let action = bounds.clamp(bounds.scale(a_norm));
        let (_, r, _) = env.env_step(action)?;
        total_reward += r;
        let e = s.tracking_error();
        sq_err += e.dot(&e);
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{}",
            step,
            step as f64 * config.ts,
            s.raw[0],
            s.raw[1],
            s.raw[6],
            s.raw[7],
            e.norm(),
            action[0],
            action[1],
            r
        )
        .map_err(|e| Error::io(out_csv, e))?;
    }
    Ok(EvalSummary {
        total_reward,
        rms_error: (sq_err / config.steps_per_episode as f64).sqrt(),
        steps: config.steps_per_episode,
    })
}

/// Open-loop run: constant saturated thrust and rudder from rest at the
/// origin, against a zero reference. Writes a rollout-format CSV.
pub fn simulate(
    thrust: f64,
    rudder: f64,
    duration: f64,
    config: &RunConfig,
    out_csv: &Path,
) -> Result<()> {
    if !(duration > 0.0) {
        return Err(Error::Config("duration must be positive".into()));
    }
    let model = DynamicsModel::remus();
    let tau = ControlInput {
        thrust: crate::dynamics::saturate(thrust, config.thrust_bound)?,
        rudder: crate::dynamics::saturate(rudder, config.rudder_bound)?,
    };
    let h = config.episode_config().h;
    let a = nalgebra::Vector2::new(tau.thrust, tau.rudder);
    let effort = a.dot(&(h * a));
    let steps = (duration / config.ts).round() as usize;
    let mut state = VehicleState::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    let mut csv = std::fs::File::create(out_csv).map_err(|e| Error::io(out_csv, e))?;
    writeln!(csv, "{ROLLOUT_HEADER}").map_err(|e| Error::io(out_csv, e))?;
    for step in 0..steps {
        let err_norm = (state.x * state.x + state.y * state.y).sqrt();
        let reward = -(err_norm * err_norm + effort);
        writeln!(
            csv,
            "{},{},{},{},0,0,{},{},{},{}",
            step,
            step as f64 * config.ts,
            state.x,
            state.y,
            err_norm,
            tau.thrust,
            tau.rudder,
            reward
        )
        .map_err(|e| Error::io(out_csv, e))?;
        state = model.step(&state, &tau, config.ts)?;
    }
    Ok(())
}

/// Reads the `total_reward` column of a training CSV.
pub fn read_training_rewards(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::CsvParse {
        path: path.to_path_buf(),
        row: 1,
        msg: "empty file, expected a header row".into(),
    })?;
    let col = header
        .split(',')
        .position(|c| c.trim() == "total_reward")
        .ok_or_else(|| Error::CsvParse {
            path: path.to_path_buf(),
            row: 1,
            msg: "missing column 'total_reward'".into(),
        })?;
    let mut rewards = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let value = line
            .split(',')
            .nth(col)
            .and_then(|f| f.trim().parse().ok())
            .ok_or_else(|| Error::CsvParse {
                path: path.to_path_buf(),
                row: idx + 1,
                msg: "bad numeric field in column 'total_reward'".into(),
            })?;
        rewards.push(value);
    }
    Ok(rewards)
}

/// A compact training configuration for harness tests.
pub fn tiny_config(out_dir: PathBuf) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.episodes = 3;
    cfg.steps_per_episode = 30;
    cfg.minibatch = 8;
    cfg.buffer_capacity = 200;
    cfg.hidden = (8, 8);
    cfg.out_dir = out_dir;
    cfg
}

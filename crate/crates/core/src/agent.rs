//! The ensemble actor-critic learner and the DDPG baseline.
//!
//! One training step follows the fixed order: act, environment step, store,
//! sample a minibatch, score every critic by its sampled expected absolute
//! Bellman error (EABE), update the worst critic against targets averaged
//! over the remaining critics (the excluded-critic "MPQ" target, with the
//! next action picked sub-greedily from the actors' proposals), then
//! resample an actor uniformly and update it along the deterministic policy
//! gradient. The order is observable through [`TrainEvent`] traces.

use crate::env::{Environment, ACTION_DIM, STATE_DIM};
use crate::error::{Error, Result};
use crate::neural::{actor_network, critic_network, MlpNetwork, NetGradients};
use rand::Rng;
use rand_distr::StandardNormal;
use std::collections::VecDeque;

/// One stored interaction. States are normalized; the action is in physical
/// units, post-saturation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub s: [f64; STATE_DIM],
    pub a: [f64; ACTION_DIM],
    pub r: f64,
    pub s_next: [f64; STATE_DIM],
}

/// Bounded FIFO store with uniform sampling (with replacement).
pub struct ReplayBuffer {
    data: VecDeque<Transition>,
    capacity: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0);
        Self {
            data: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    pub fn store(&mut self, t: Transition) {
        if self.data.len() == self.capacity {
            self.data.pop_front();
        }
        self.data.push_back(t);
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn sample(&self, n: usize, rng: &mut impl Rng) -> Result<Vec<Transition>> {
        if self.data.is_empty() {
            return Err(Error::Usage("sampling from an empty replay buffer".into()));
        }
        Ok((0..n)
            .map(|_| self.data[rng.gen_range(0..self.data.len())])
            .collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.data.iter()
    }
}

/// Ornstein-Uhlenbeck exploration noise in normalized action space.
#[derive(Debug, Clone)]
pub struct OuNoise {
    pub state: [f64; ACTION_DIM],
    pub theta: f64,
    pub sigma: f64,
    pub mean: f64,
    pub dt: f64,
}

impl OuNoise {
    pub fn new(theta: f64, sigma: f64) -> Self {
        Self {
            state: [0.0; ACTION_DIM],
            theta,
            sigma,
            mean: 0.0,
            dt: 1.0,
        }
    }

    pub fn reset(&mut self) {
        self.state = [0.0; ACTION_DIM];
    }

    pub fn sample(&mut self, rng: &mut impl Rng) -> [f64; ACTION_DIM] {
        let sqrt_dt = self.dt.sqrt();
        for x in &mut self.state {
            let z: f64 = rng.sample(StandardNormal);
            *x += self.theta * (self.mean - *x) * self.dt + self.sigma * sqrt_dt * z;
        }
        self.state
    }
}

/// Saturation boundaries, also the affine scale from normalized [-1, 1]
/// actions to physical units.
#[derive(Debug, Clone, Copy)]
pub struct ActionBounds {
    pub thrust: f64,
    pub rudder: f64,
}

impl ActionBounds {
    pub fn scale(&self, normalized: [f64; ACTION_DIM]) -> [f64; ACTION_DIM] {
        [normalized[0] * self.thrust, normalized[1] * self.rudder]
    }

    pub fn clamp(&self, physical: [f64; ACTION_DIM]) -> [f64; ACTION_DIM] {
        [
            physical[0].clamp(-self.thrust, self.thrust),
            physical[1].clamp(-self.rudder, self.rudder),
        ]
    }
}

/// Arithmetic mean of the actors' normalized outputs.
pub fn average_policy(actors: &[MlpNetwork], s: &[f64]) -> [f64; ACTION_DIM] {
    let mut out = [0.0; ACTION_DIM];
    for actor in actors {
        let a = actor.output(s).expect("state width matches actor input");
        out[0] += a[0];
        out[1] += a[1];
    }
    out[0] /= actors.len() as f64;
    out[1] /= actors.len() as f64;
    out
}

fn critic_input(s: &[f64; STATE_DIM], a: &[f64; ACTION_DIM]) -> [f64; STATE_DIM + ACTION_DIM] {
    let mut input = [0.0; STATE_DIM + ACTION_DIM];
    input[..STATE_DIM].copy_from_slice(s);
    input[STATE_DIM..].copy_from_slice(a);
    input
}

fn q_value(critic: &MlpNetwork, s: &[f64; STATE_DIM], a: &[f64; ACTION_DIM]) -> f64 {
    critic
        .output(&critic_input(s, a))
        .expect("critic input width")[0]
}

/// Sampled expected absolute Bellman error of every critic over a minibatch.
/// `next_policy` is the actor updated in the last time step; its proposals
/// are scaled to physical units before entering the critics.
pub fn eabe(
    critics: &[MlpNetwork],
    minibatch: &[Transition],
    next_policy: &MlpNetwork,
    bounds: &ActionBounds,
    gamma: f64,
) -> Result<Vec<f64>> {
    if minibatch.is_empty() {
        return Err(Error::Usage("EABE over an empty minibatch".into()));
    }
    let next_actions: Vec<[f64; ACTION_DIM]> = minibatch
        .iter()
        .map(|t| {
            let a = next_policy.output(&t.s_next)?;
            Ok(bounds.scale([a[0], a[1]]))
        })
        .collect::<Result<_>>()?;
    let n = minibatch.len() as f64;
    Ok(critics
        .iter()
        .map(|critic| {
            minibatch
                .iter()
                .zip(&next_actions)
                .map(|(t, na)| {
                    (q_value(critic, &t.s, &t.a) - t.r - gamma * q_value(critic, &t.s_next, na))
                        .abs()
                })
                .sum::<f64>()
                / n
        })
        .collect())
}

/// Index of the maximum EABE; ties break toward the lowest index.
pub fn select_worst_critic(eabe_values: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in eabe_values.iter().enumerate().skip(1) {
        if v > eabe_values[best] {
            best = j;
        }
    }
    best
}

/// Evaluates every actor's (scaled) proposal under `critic` and returns the
/// argmax candidate; ties break toward the lowest actor index.
pub fn sub_greedy(
    critic: &MlpNetwork,
    actors: &[MlpNetwork],
    s_next: &[f64; STATE_DIM],
    bounds: &ActionBounds,
) -> [f64; ACTION_DIM] {
    let mut best_action = [0.0; ACTION_DIM];
    let mut best_q = f64::NEG_INFINITY;
    for actor in actors {
        let a = actor.output(s_next).expect("actor input width");
        let candidate = bounds.scale([a[0], a[1]]);
        let q = q_value(critic, s_next, &candidate);
        if q > best_q {
            best_q = q;
            best_action = candidate;
        }
    }
    best_action
}

/// Bootstrap target excluding the critic under update:
/// Y = r + gamma/(m-1) * sum_{j != c} Q_j(s', a').
pub fn mpq_target(
    critics: &[MlpNetwork],
    c: usize,
    r: f64,
    s_next: &[f64; STATE_DIM],
    next_action: &[f64; ACTION_DIM],
    gamma: f64,
) -> Result<f64> {
    let m = critics.len();
    if m < 2 {
        return Err(Error::Config(
            "MPQ targets need at least 2 critics".into(),
        ));
    }
    let sum: f64 = critics
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != c)
        .map(|(_, critic)| q_value(critic, s_next, next_action))
        .sum();
    Ok(r + gamma / (m - 1) as f64 * sum)
}

/// Mean squared error of a critic against fixed targets over a minibatch.
pub fn critic_loss(critic: &MlpNetwork, minibatch: &[Transition], targets: &[f64]) -> f64 {
    minibatch
        .iter()
        .zip(targets)
        .map(|(t, y)| {
            let d = q_value(critic, &t.s, &t.a) - y;
            d * d
        })
        .sum::<f64>()
        / minibatch.len() as f64
}

/// One Adam step on the critic against constant targets. Returns the loss
/// value before the step.
pub fn update_critic(
    critic: &mut MlpNetwork,
    minibatch: &[Transition],
    targets: &[f64],
) -> Result<f64> {
    let n = minibatch.len() as f64;
    let mut grads = NetGradients::zeros_like(critic);
    let mut loss = 0.0;
    for (t, y) in minibatch.iter().zip(targets) {
        let (out, cache) = critic.forward(&critic_input(&t.s, &t.a))?;
        let d = out[0] - y;
        loss += d * d;
        let g = critic.backward_params(&cache, &[2.0 * d / n])?;
        grads.add_scaled(&g, 1.0);
    }
    loss /= n;
    critic.adam_step(&grads);
    Ok(loss)
}

/// One Adam ascent step on the actor along the sampled deterministic policy
/// gradient under `critic`. The normalized-to-physical action scaling is
/// part of the policy, so its diagonal Jacobian sits between dQ/da and
/// dmu/dtheta.
pub fn update_actor(
    actor: &mut MlpNetwork,
    critic: &MlpNetwork,
    minibatch: &[Transition],
    bounds: &ActionBounds,
) -> Result<()> {
    let n = minibatch.len() as f64;
    let mut grads = NetGradients::zeros_like(actor);
    for t in minibatch {
        let (a_norm, actor_cache) = actor.forward(&t.s)?;
        let a_phys = bounds.scale([a_norm[0], a_norm[1]]);
        let (_, critic_cache) = critic.forward(&critic_input(&t.s, &a_phys))?;
        let dq_dinput = critic.backward_input(&critic_cache, &[1.0])?;
        let upstream = [
            dq_dinput[STATE_DIM] * bounds.thrust,
            dq_dinput[STATE_DIM + 1] * bounds.rudder,
        ];
        let g = actor.backward_params(&actor_cache, &upstream)?;
        grads.add_scaled(&g, 1.0);
    }
    // ascend: Adam minimizes, so feed the negated gradient
    grads.scale(-1.0 / n);
    actor.adam_step(&grads);
    Ok(())
}

/// Observable milestones of one training step, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainEvent {
    Act,
    EnvStep,
    Store,
    Sample,
    Eabe,
    SelectCritic(usize),
    NextActions,
    Targets,
    CriticUpdate(usize),
    ResampleActor(usize),
    ActorUpdate(usize),
}

/// Shared learner knobs.
#[derive(Debug, Clone, Copy)]
pub struct AgentConfig {
    pub gamma: f64,
    pub minibatch: usize,
    pub buffer_capacity: usize,
    pub hidden: (usize, usize),
    pub lr_actor: f64,
    pub lr_critic: f64,
    pub l2: f64,
    pub ou_theta: f64,
    pub ou_sigma: f64,
    pub bounds: ActionBounds,
    /// DDPG target tracking rate; unused by the ensemble learner.
    pub tau_soft: f64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            minibatch: 64,
            buffer_capacity: 10_000,
            hidden: (400, 300),
            lr_actor: 1e-4,
            lr_critic: 1e-3,
            l2: 1e-2,
            ou_theta: 0.15,
            ou_sigma: 0.32,
            bounds: ActionBounds {
                thrust: crate::dynamics::THRUST_BOUND,
                rudder: crate::dynamics::RUDDER_BOUND,
            },
            tau_soft: 0.001,
        }
    }
}

/// The ensemble learner: n actors, m critics, no target networks.
pub struct EnsembleAgent {
    pub actors: Vec<MlpNetwork>,
    pub critics: Vec<MlpNetwork>,
    pub buffer: ReplayBuffer,
    pub noise: OuNoise,
    /// Index of the actor updated most recently (feeds the EABE bootstrap).
    pub last_actor: usize,
    pub config: AgentConfig,
}

impl EnsembleAgent {
    pub fn new(n_actors: usize, m_critics: usize, config: AgentConfig, rng: &mut impl Rng) -> Result<Self> {
        if n_actors < 1 {
            return Err(Error::Config("need at least one actor".into()));
        }
        if m_critics < 2 {
            return Err(Error::Config(
                "the ensemble learner needs at least 2 critics".into(),
            ));
        }
        let actors = (0..n_actors)
            .map(|_| actor_network(STATE_DIM, ACTION_DIM, config.hidden, config.lr_actor, rng))
            .collect();
        let critics = (0..m_critics)
            .map(|_| {
                critic_network(
                    STATE_DIM,
                    ACTION_DIM,
                    config.hidden,
                    config.lr_critic,
                    config.l2,
                    rng,
                )
            })
            .collect();
        let last_actor = rng.gen_range(0..n_actors);
        Ok(Self {
            actors,
            critics,
            buffer: ReplayBuffer::new(config.buffer_capacity),
            noise: OuNoise::new(config.ou_theta, config.ou_sigma),
            last_actor,
            config,
        })
    }

    /// Average policy, optional OU noise, scaling to physical units, then
    /// saturation.
    pub fn act(&mut self, s: &[f64; STATE_DIM], explore: bool, rng: &mut impl Rng) -> [f64; ACTION_DIM] {
        let mut a = average_policy(&self.actors, s);
        if explore {
            let noise = self.noise.sample(rng);
            a[0] += noise[0];
            a[1] += noise[1];
        }
        self.config.bounds.clamp(self.config.bounds.scale(a))
    }

    /// One Algorithm-1 iteration. Returns the reward of the executed
    /// transition and the critic loss if an update ran.
    pub fn train_step(
        &mut self,
        env: &mut Environment,
        rng: &mut impl Rng,
        mut trace: Option<&mut Vec<TrainEvent>>,
    ) -> Result<(f64, Option<f64>)> {
        let mut record = |e: TrainEvent| {
            if let Some(t) = trace.as_deref_mut() {
                t.push(e);
            }
        };
        let s = *env.state();
        let action = self.act(&s.normalized, true, rng);
        record(TrainEvent::Act);
        let (s_next, r, _) = env.env_step(action)?;
        record(TrainEvent::EnvStep);
        self.buffer.store(Transition {
            s: s.normalized,
            a: action,
            r,
            s_next: s_next.normalized,
        });
        record(TrainEvent::Store);

        // warm-up: no updates until one full minibatch is available
        if self.buffer.len() < self.config.minibatch {
            return Ok((r, None));
        }

        let batch = self.buffer.sample(self.config.minibatch, rng)?;
        record(TrainEvent::Sample);
        let errors = eabe(
            &self.critics,
            &batch,
            &self.actors[self.last_actor],
            &self.config.bounds,
            self.config.gamma,
        )?;
        record(TrainEvent::Eabe);
        let c = select_worst_critic(&errors);
        record(TrainEvent::SelectCritic(c));
        let next_actions: Vec<[f64; ACTION_DIM]> = batch
            .iter()
            .map(|t| sub_greedy(&self.critics[c], &self.actors, &t.s_next, &self.config.bounds))
            .collect();
        record(TrainEvent::NextActions);
        let targets: Vec<f64> = batch
            .iter()
            .zip(&next_actions)
            .map(|(t, na)| {
                mpq_target(&self.critics, c, t.r, &t.s_next, na, self.config.gamma)
            })
            .collect::<Result<_>>()?;
        record(TrainEvent::Targets);
        let loss = update_critic(&mut self.critics[c], &batch, &targets)?;
        record(TrainEvent::CriticUpdate(c));
        if !loss.is_finite() {
            return Err(Error::Numeric(format!("critic loss is {loss}")));
        }
        self.last_actor = rng.gen_range(0..self.actors.len());
        record(TrainEvent::ResampleActor(self.last_actor));
        update_actor(
            &mut self.actors[self.last_actor],
            &self.critics[c],
            &batch,
            &self.config.bounds,
        )?;
        record(TrainEvent::ActorUpdate(self.last_actor));
        Ok((r, Some(loss)))
    }
}

/// Single actor-critic baseline with slowly tracking target copies.
pub struct DdpgAgent {
    pub actor: MlpNetwork,
    pub critic: MlpNetwork,
    pub target_actor: MlpNetwork,
    pub target_critic: MlpNetwork,
    pub buffer: ReplayBuffer,
    pub noise: OuNoise,
    pub config: AgentConfig,
}

impl DdpgAgent {
    pub fn new(config: AgentConfig, rng: &mut impl Rng) -> Self {
        let actor = actor_network(STATE_DIM, ACTION_DIM, config.hidden, config.lr_actor, rng);
        let critic = critic_network(
            STATE_DIM,
            ACTION_DIM,
            config.hidden,
            config.lr_critic,
            config.l2,
            rng,
        );
        let target_actor = actor.clone();
        let target_critic = critic.clone();
        Self {
            actor,
            critic,
            target_actor,
            target_critic,
            buffer: ReplayBuffer::new(config.buffer_capacity),
            noise: OuNoise::new(config.ou_theta, config.ou_sigma),
            config,
        }
    }

    pub fn act(&mut self, s: &[f64; STATE_DIM], explore: bool, rng: &mut impl Rng) -> [f64; ACTION_DIM] {
        let out = self.actor.output(s).expect("state width matches");
        let mut a = [out[0], out[1]];
        if explore {
            let noise = self.noise.sample(rng);
            a[0] += noise[0];
            a[1] += noise[1];
        }
        self.config.bounds.clamp(self.config.bounds.scale(a))
    }

    /// One minibatch update: target-network bootstrap, critic step, actor
    /// step, soft updates.
    pub fn ddpg_update(&mut self, minibatch: &[Transition]) -> Result<f64> {
        let targets: Vec<f64> = minibatch
            .iter()
            .map(|t| {
                let a_norm = self.target_actor.output(&t.s_next)?;
                let a_phys = self.config.bounds.scale([a_norm[0], a_norm[1]]);
                Ok(t.r + self.config.gamma * q_value(&self.target_critic, &t.s_next, &a_phys))
            })
            .collect::<Result<_>>()?;
        let loss = update_critic(&mut self.critic, minibatch, &targets)?;
        update_actor(&mut self.actor, &self.critic, minibatch, &self.config.bounds)?;
        self.target_critic
            .soft_update_from(&self.critic, self.config.tau_soft);
        self.target_actor
            .soft_update_from(&self.actor, self.config.tau_soft);
        Ok(loss)
    }

    pub fn train_step(&mut self, env: &mut Environment, rng: &mut impl Rng) -> Result<(f64, Option<f64>)> {
        let s = *env.state();
        let action = self.act(&s.normalized, true, rng);
        let (s_next, r, _) = env.env_step(action)?;
        self.buffer.store(Transition {
            s: s.normalized,
            a: action,
            r,
            s_next: s_next.normalized,
        });
        if self.buffer.len() < self.config.minibatch {
            return Ok((r, None));
        }
        let batch = self.buffer.sample(self.config.minibatch, rng)?;
        let loss = self.ddpg_update(&batch)?;
        if !loss.is_finite() {
            return Err(Error::Numeric(format!("critic loss is {loss}")));
        }
        Ok((r, Some(loss)))
    }
}

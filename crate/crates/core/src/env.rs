//! The tracking task as a finite-horizon MDP around the dynamics model.
//!
//! The MDP state is the 10-vector [eta, phi, d_k, d_{k+1}] normalized into
//! [-1, 1]; actions arrive in physical units and are saturated here, in
//! exactly one place. Reward is the negated quadratic tracking/effort cost
//! evaluated at the pre-step position.

use crate::dynamics::{
    saturate, ControlInput, DynamicsModel, VehicleState, RUDDER_BOUND, THRUST_BOUND,
};
use crate::error::{Error, Result};
use nalgebra::{Matrix2, Vector2};
use rand::Rng;
use std::f64::consts::PI;

pub const STATE_DIM: usize = 10;
pub const ACTION_DIM: usize = 2;

/// Closed-form reference trajectories from the tracking experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceTrajectory {
    /// Asymptotic helical curve.
    Rt1,
    /// Sine curve.
    Rt2,
}

impl ReferenceTrajectory {
    pub fn name(&self) -> &'static str {
        match self {
            ReferenceTrajectory::Rt1 => "rt1",
            ReferenceTrajectory::Rt2 => "rt2",
        }
    }
}

/// Desired position d(t) = (x^d, y^d) at time t.
pub fn reference_point(traj: ReferenceTrajectory, t: f64) -> (f64, f64) {
    match traj {
        ReferenceTrajectory::Rt1 => {
            let radius = 15.0 - 0.1 * t;
            let angle = PI / 20.0 * t;
            (radius * angle.cos(), radius * angle.sin())
        }
        ReferenceTrajectory::Rt2 => (0.8 * t - 40.0, 10.0 * (PI / 25.0 * t).sin()),
    }
}

/// Per-dimension ranges used to map the raw 10-vector into [-1, 1].
#[derive(Debug, Clone, Copy)]
pub struct NormalizationBounds {
    /// Applies to x, y and both reference slots (m).
    pub position: f64,
    /// Applies to u and v (m/s).
    pub linear_velocity: f64,
    /// Applies to r (rad/s).
    pub yaw_rate: f64,
}

impl Default for NormalizationBounds {
    fn default() -> Self {
        Self {
            position: 60.0,
            linear_velocity: 3.0,
            yaw_rate: 2.0,
        }
    }
}

impl NormalizationBounds {
    /// Symmetric half-widths for each of the 10 raw dimensions.
    pub fn half_widths(&self) -> [f64; STATE_DIM] {
        [
            self.position,
            self.position,
            PI,
            self.linear_velocity,
            self.linear_velocity,
            self.yaw_rate,
            self.position,
            self.position,
            self.position,
            self.position,
        ]
    }
}

/// Componentwise affine map into [-1, 1] with clipping.
pub fn normalize(raw: &[f64; STATE_DIM], bounds: &NormalizationBounds) -> [f64; STATE_DIM] {
    let hw = bounds.half_widths();
    let mut out = [0.0; STATE_DIM];
    for i in 0..STATE_DIM {
        out[i] = (raw[i] / hw[i]).clamp(-1.0, 1.0);
    }
    out
}

/// One MDP state, both in physical units and normalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdpState {
    pub raw: [f64; STATE_DIM],
    pub normalized: [f64; STATE_DIM],
}

impl MdpState {
    fn build(
        vehicle: &VehicleState,
        d_k: (f64, f64),
        d_k1: (f64, f64),
        bounds: &NormalizationBounds,
    ) -> Self {
        let raw = [
            vehicle.x, vehicle.y, vehicle.psi, vehicle.u, vehicle.v, vehicle.r, d_k.0, d_k.1,
            d_k1.0, d_k1.1,
        ];
        MdpState {
            raw,
            normalized: normalize(&raw, bounds),
        }
    }

    /// Tracking error e_k = (x - x^d_k, y - y^d_k).
    pub fn tracking_error(&self) -> Vector2<f64> {
        Vector2::new(self.raw[0] - self.raw[6], self.raw[1] - self.raw[7])
    }
}

/// Episode shape and reward weights.
#[derive(Debug, Clone, Copy)]
pub struct EpisodeConfig {
    pub ts: f64,
    pub steps_per_episode: usize,
    /// Control-effort weight in the reward.
    pub h: Matrix2<f64>,
    pub gamma: f64,
    pub bounds: NormalizationBounds,
    pub thrust_bound: f64,
    pub rudder_bound: f64,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            ts: 0.1,
            steps_per_episode: 1000,
            h: Matrix2::identity() * 0.001,
            gamma: 0.99,
            bounds: NormalizationBounds::default(),
            thrust_bound: THRUST_BOUND,
            rudder_bound: RUDDER_BOUND,
        }
    }
}

/// Reward r_{k+1} = -(e_k^T e_k + a_k^T H a_k); always <= 0 for PSD H.
pub fn reward(state: &MdpState, action: &ControlInput, h: &Matrix2<f64>) -> f64 {
    let e = state.tracking_error();
    let a = Vector2::new(action.thrust, action.rudder);
    -(e.dot(&e) + a.dot(&(h * a)))
}

/// A single-owner mutable episode of the tracking MDP.
pub struct Environment {
    model: DynamicsModel,
    traj: ReferenceTrajectory,
    config: EpisodeConfig,
    vehicle: VehicleState,
    state: MdpState,
    step_index: usize,
}

impl Environment {
    pub fn new(model: DynamicsModel, traj: ReferenceTrajectory, config: EpisodeConfig) -> Self {
        let vehicle = VehicleState::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let state = MdpState::build(
            &vehicle,
            reference_point(traj, 0.0),
            reference_point(traj, config.ts),
            &config.bounds,
        );
        Self {
            model,
            traj,
            config,
            vehicle,
            state,
            step_index: 0,
        }
    }

    pub fn config(&self) -> &EpisodeConfig {
        &self.config
    }

    pub fn trajectory(&self) -> ReferenceTrajectory {
        self.traj
    }

    pub fn state(&self) -> &MdpState {
        &self.state
    }

    pub fn vehicle(&self) -> &VehicleState {
        &self.vehicle
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    /// Samples the randomized initial condition and starts a new episode.
    pub fn reset(&mut self, rng: &mut impl Rng) -> MdpState {
        let (x0, y0) = match self.traj {
            ReferenceTrajectory::Rt1 => (rng.gen_range(14.0..=16.0), rng.gen_range(-1.0..=1.0)),
            ReferenceTrajectory::Rt2 => (rng.gen_range(-41.0..=-39.0), rng.gen_range(-1.0..=1.0)),
        };
        let psi0 = rng.gen_range(PI / 4.0..=3.0 * PI / 4.0);
        let u0 = rng.gen_range(1.0..=1.5);
        let v0 = rng.gen_range(-0.3..=0.3);
        let r0 = rng.gen_range(-0.2..=0.2);
        self.vehicle = VehicleState::new(x0, y0, psi0, u0, v0, r0);
        self.step_index = 0;
        self.state = MdpState::build(
            &self.vehicle,
            reference_point(self.traj, 0.0),
            reference_point(self.traj, self.config.ts),
            &self.config.bounds,
        );
        self.state
    }

    /// Saturates the physical-unit action, advances one step and returns the
    /// next state, the reward for the executed transition, and the index of
    /// the completed step.
    pub fn env_step(&mut self, action: [f64; ACTION_DIM]) -> Result<(MdpState, f64, usize)> {
        if self.step_index >= self.config.steps_per_episode {
            return Err(Error::Usage(format!(
                "episode exhausted after {} steps",
                self.config.steps_per_episode
            )));
        }
        let tau = ControlInput {
            thrust: saturate(action[0], self.config.thrust_bound)?,
            rudder: saturate(action[1], self.config.rudder_bound)?,
        };
        let r = reward(&self.state, &tau, &self.config.h);
        self.vehicle = self.model.step(&self.vehicle, &tau, self.config.ts)?;
        // keep body velocities inside the operating envelope: the coefficient
        // fits are only valid there, and beyond it the explicit Euler step at
        // Ts is numerically unstable (the sway term turns anti-damped in
        // sustained reverse motion)
        let vb = self.config.bounds.linear_velocity;
        let rb = self.config.bounds.yaw_rate;
        self.vehicle.u = self.vehicle.u.clamp(-vb, vb);
        self.vehicle.v = self.vehicle.v.clamp(-vb, vb);
        self.vehicle.r = self.vehicle.r.clamp(-rb, rb);
        let k = self.step_index;
        self.step_index += 1;
        // times computed from the step index, not accumulated, so the
        // reference slots match k * ts exactly
        let t_next = self.step_index as f64 * self.config.ts;
        let t_next1 = (self.step_index + 1) as f64 * self.config.ts;
        self.state = MdpState::build(
            &self.vehicle,
            reference_point(self.traj, t_next),
            reference_point(self.traj, t_next1),
            &self.config.bounds,
        );
        Ok((self.state, r, k))
    }

    /// The action actually executed for a raw physical-unit command.
    pub fn saturate_action(&self, action: [f64; ACTION_DIM]) -> Result<ControlInput> {
        Ok(ControlInput {
            thrust: saturate(action[0], self.config.thrust_bound)?,
            rudder: saturate(action[1], self.config.rudder_bound)?,
        })
    }
}

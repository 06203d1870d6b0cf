//! 3-DOF lateral dynamics of the REMUS vehicle.
//!
//! Continuous model:
//!
//!   eta_dot = J(psi) * phi
//!   M * phi_dot + C(phi) * phi + D(phi) * phi = G(phi) * tau
//!
//! with eta = [x, y, psi]^T (earth frame) and phi = [u, v, r]^T (body frame).
//! The discrete step is the explicit first-order Euler update with sampling
//! time Ts. All operations here are pure; saturation of tau is the caller's
//! responsibility.

use crate::error::{Error, Result};
use nalgebra::{Matrix3, Matrix3x2, Vector2, Vector3};
use std::f64::consts::PI;

/// Pose and body-frame velocities of the vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    /// Yaw angle, kept wrapped in [-pi, pi].
    pub psi: f64,
    pub u: f64,
    pub v: f64,
    pub r: f64,
}

impl VehicleState {
    pub fn new(x: f64, y: f64, psi: f64, u: f64, v: f64, r: f64) -> Self {
        Self { x, y, psi, u, v, r }
    }

    pub fn velocities(&self) -> Vector3<f64> {
        Vector3::new(self.u, self.v, self.r)
    }

    pub fn is_finite(&self) -> bool {
        [self.x, self.y, self.psi, self.u, self.v, self.r]
            .iter()
            .all(|c| c.is_finite())
    }
}

/// Saturated thrust/rudder pair; the MDP action in physical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlInput {
    /// Propeller force in N.
    pub thrust: f64,
    /// Rudder angle in rad.
    pub rudder: f64,
}

/// Default thrust saturation boundary (N).
pub const THRUST_BOUND: f64 = 86.0;
/// Default rudder saturation boundary (rad).
pub const RUDDER_BOUND: f64 = 13.6 * PI / 180.0;

/// Mass properties and hydrodynamic coefficients of the vehicle.
#[derive(Debug, Clone, Copy)]
#[allow(non_snake_case)]
pub struct ModelCoefficients {
    pub m: f64,
    pub x_g: f64,
    pub I_zz: f64,
    pub X_u: f64,
    pub X_uu: f64,
    pub X_udot: f64,
    pub Y_v: f64,
    pub Y_r: f64,
    pub Y_vv: f64,
    pub Y_rr: f64,
    pub Y_uv: f64,
    pub Y_vdot: f64,
    pub Y_rdot: f64,
    pub Y_ur: f64,
    pub Y_uud: f64,
    pub N_v: f64,
    pub N_r: f64,
    pub N_vv: f64,
    pub N_rr: f64,
    pub N_uv: f64,
    pub N_vdot: f64,
    pub N_rdot: f64,
    pub N_ur: f64,
    pub N_uud: f64,
}

impl ModelCoefficients {
    /// Coefficient set of the REMUS vehicle.
    pub fn remus() -> Self {
        Self {
            m: 30.48,
            x_g: 0.0,
            I_zz: 3.45,
            X_u: 0.0,
            X_uu: -1.62,
            X_udot: -0.93,
            Y_v: 0.0,
            Y_r: 0.0,
            Y_vv: -1.31e3,
            Y_rr: 0.632,
            Y_uv: -28.6,
            Y_vdot: -35.5,
            Y_rdot: 1.93,
            Y_ur: 6.15,
            Y_uud: 9.64,
            N_v: 0.0,
            N_r: 0.0,
            N_vv: -3.18,
            N_rr: -94.0,
            N_uv: 10.62,
            N_vdot: 1.93,
            N_rdot: -4.88,
            N_ur: -3.93,
            N_uud: -6.15,
        }
    }

    fn is_finite(&self) -> bool {
        [
            self.m,
            self.x_g,
            self.I_zz,
            self.X_u,
            self.X_uu,
            self.X_udot,
            self.Y_v,
            self.Y_r,
            self.Y_vv,
            self.Y_rr,
            self.Y_uv,
            self.Y_vdot,
            self.Y_rdot,
            self.Y_ur,
            self.Y_uud,
            self.N_v,
            self.N_r,
            self.N_vv,
            self.N_rr,
            self.N_uv,
            self.N_vdot,
            self.N_rdot,
            self.N_ur,
            self.N_uud,
        ]
        .iter()
        .all(|c| c.is_finite())
    }
}

/// The model matrices evaluated at a body velocity phi.
#[derive(Debug, Clone)]
pub struct ModelMatrices {
    /// System inertia including added mass; velocity-independent.
    pub m: Matrix3<f64>,
    /// Coriolis-centripetal matrix C(phi); skew-symmetric.
    pub c: Matrix3<f64>,
    /// Damping matrix D(phi).
    pub d: Matrix3<f64>,
    /// Input matrix G(phi); first column is (1, 0, 0)^T.
    pub g: Matrix3x2<f64>,
}

/// Clamps `value` into [-bound, bound].
pub fn saturate(value: f64, bound: f64) -> Result<f64> {
    debug_assert!(bound > 0.0);
    if !value.is_finite() {
        return Err(Error::NonFinite("saturate input"));
    }
    Ok(value.clamp(-bound, bound))
}

/// Wraps an angle into [-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    // angles already in range pass through exactly
    if (-PI..=PI).contains(&a) {
        return a;
    }
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    // rem_euclid maps pi to -pi; keep both endpoints admissible.
    if w == -PI && a > 0.0 {
        PI
    } else {
        w
    }
}

/// Body-to-earth rotation J(psi).
pub fn transform(psi: f64) -> Matrix3<f64> {
    let (s, c) = psi.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Builds M, C(phi), D(phi), G(phi) from the coefficient set.
#[allow(non_snake_case)]
pub fn build_matrices(coeffs: &ModelCoefficients, phi: &Vector3<f64>) -> Result<ModelMatrices> {
    if !coeffs.is_finite() {
        return Err(Error::NonFinite("model coefficients"));
    }
    let (u, v, r) = (phi.x, phi.y, phi.z);

    let m1 = coeffs.m - coeffs.X_udot;
    let m2 = coeffs.m - coeffs.Y_vdot;
    let m3 = coeffs.m * coeffs.x_g - coeffs.Y_rdot;
    let m4 = coeffs.m * coeffs.x_g - coeffs.N_vdot;
    let m5 = coeffs.I_zz - coeffs.N_rdot;
    let M = Matrix3::new(m1, 0.0, 0.0, 0.0, m2, m3, 0.0, m4, m5);
    if M.determinant().abs() < 1e-9 {
        return Err(Error::SingularInertia(M.determinant()));
    }

    let c1 = -coeffs.m * v - coeffs.m * coeffs.x_g * r + coeffs.Y_vdot * v + coeffs.Y_rdot * r;
    let c2 = coeffs.m * u - coeffs.X_udot * u;
    let C = Matrix3::new(0.0, 0.0, c1, 0.0, 0.0, c2, -c1, -c2, 0.0);

    let d1 = -coeffs.X_u - coeffs.X_uu * u.abs();
    let d2 = -coeffs.Y_v - coeffs.Y_uv * u - coeffs.Y_vv * v.abs();
    let d3 = -coeffs.Y_r - coeffs.Y_ur * u - coeffs.Y_rr * r.abs();
    let d4 = -coeffs.N_v - coeffs.N_uv * u - coeffs.N_vv * v.abs();
    let d5 = -coeffs.N_r - coeffs.N_ur * u - coeffs.N_rr * r.abs();
    let D = Matrix3::new(d1, 0.0, 0.0, 0.0, d2, d3, 0.0, d4, d5);

    let G = Matrix3x2::new(
        1.0,
        0.0,
        0.0,
        coeffs.Y_uud * u * u,
        0.0,
        coeffs.N_uud * u * u,
    );

    Ok(ModelMatrices { m: M, c: C, d: D, g: G })
}

/// A coefficient set with the (velocity-independent) inertia matrix and its
/// inverse precomputed.
#[derive(Debug, Clone)]
pub struct DynamicsModel {
    coeffs: ModelCoefficients,
    m_inv: Matrix3<f64>,
}

impl DynamicsModel {
    pub fn new(coeffs: ModelCoefficients) -> Result<Self> {
        let mats = build_matrices(&coeffs, &Vector3::zeros())?;
        let m_inv = mats
            .m
            .try_inverse()
            .ok_or(Error::SingularInertia(mats.m.determinant()))?;
        Ok(Self { coeffs, m_inv })
    }

    pub fn remus() -> Self {
        Self::new(ModelCoefficients::remus()).expect("REMUS inertia matrix is invertible")
    }

    pub fn coefficients(&self) -> &ModelCoefficients {
        &self.coeffs
    }

    /// Time derivatives (eta_dot, phi_dot) of the continuous model.
    /// `tau` must already be saturated.
    pub fn derivative(&self, state: &VehicleState, tau: &ControlInput) -> Result<[f64; 6]> {
        if !state.is_finite() || !tau.thrust.is_finite() || !tau.rudder.is_finite() {
            return Err(Error::NonFinite("derivative input"));
        }
        let phi = state.velocities();
        let mats = build_matrices(&self.coeffs, &phi)?;
        let eta_dot = transform(state.psi) * phi;
        let forcing =
            mats.g * Vector2::new(tau.thrust, tau.rudder) - mats.c * phi - mats.d * phi;
        let phi_dot = self.m_inv * forcing;
        Ok([
            eta_dot.x, eta_dot.y, eta_dot.z, phi_dot.x, phi_dot.y, phi_dot.z,
        ])
    }

    /// One explicit Euler step of length `ts`; yaw is re-wrapped afterwards.
    pub fn step(&self, state: &VehicleState, tau: &ControlInput, ts: f64) -> Result<VehicleState> {
        debug_assert!(ts > 0.0);
        let d = self.derivative(state, tau)?;
        Ok(VehicleState {
            x: state.x + ts * d[0],
            y: state.y + ts * d[1],
            psi: wrap_angle(state.psi + ts * d[2]),
            u: state.u + ts * d[3],
            v: state.v + ts * d[4],
            r: state.r + ts * d[5],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: phi_dot by explicit Gaussian elimination on
    /// M phi_dot = G tau - C phi - D phi, never touching DynamicsModel.
    fn derivative_oracle(coeffs: &ModelCoefficients, state: &VehicleState, tau: &ControlInput) -> [f64; 6] {
        let m1 = coeffs.m - coeffs.X_udot;
        let m2 = coeffs.m - coeffs.Y_vdot;
        let m3 = coeffs.m * coeffs.x_g - coeffs.Y_rdot;
        let m4 = coeffs.m * coeffs.x_g - coeffs.N_vdot;
        let m5 = coeffs.I_zz - coeffs.N_rdot;
        let mut a = [
            [m1, 0.0, 0.0],
            [0.0, m2, m3],
            [0.0, m4, m5],
        ];
        let (u, v, r) = (state.u, state.v, state.r);
        let c1 = -coeffs.m * v - coeffs.m * coeffs.x_g * r + coeffs.Y_vdot * v + coeffs.Y_rdot * r;
        let c2 = coeffs.m * u - coeffs.X_udot * u;
        let d1 = -coeffs.X_u - coeffs.X_uu * u.abs();
        let d2 = -coeffs.Y_v - coeffs.Y_uv * u - coeffs.Y_vv * v.abs();
        let d3 = -coeffs.Y_r - coeffs.Y_ur * u - coeffs.Y_rr * r.abs();
        let d4 = -coeffs.N_v - coeffs.N_uv * u - coeffs.N_vv * v.abs();
        let d5 = -coeffs.N_r - coeffs.N_ur * u - coeffs.N_rr * r.abs();
        // rhs = G tau - C phi - D phi
        let mut b = [
            tau.thrust - (c1 * r) - (d1 * u),
            coeffs.Y_uud * u * u * tau.rudder - (c2 * r) - (d2 * v + d3 * r),
            coeffs.N_uud * u * u * tau.rudder - (-c1 * u - c2 * v) - (d4 * v + d5 * r),
        ];
        // Gaussian elimination with partial pivoting.
        for col in 0..3 {
            let mut piv = col;
            for row in col + 1..3 {
                if a[row][col].abs() > a[piv][col].abs() {
                    piv = row;
                }
            }
            a.swap(col, piv);
            b.swap(col, piv);
            for row in col + 1..3 {
                let f = a[row][col] / a[col][col];
                for k in col..3 {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
        let mut phi_dot = [0.0; 3];
        for row in (0..3).rev() {
            let mut s = b[row];
            for k in row + 1..3 {
                s -= a[row][k] * phi_dot[k];
            }
            phi_dot[row] = s / a[row][row];
        }
        let (sp, cp) = state.psi.sin_cos();
        [
            cp * u - sp * v,
            sp * u + cp * v,
            r,
            phi_dot[0],
            phi_dot[1],
            phi_dot[2],
        ]
    }

    fn random_state(rng: &mut impl Rng) -> VehicleState {
        VehicleState::new(
            rng.gen_range(-50.0..50.0),
            rng.gen_range(-50.0..50.0),
            rng.gen_range(-PI..PI),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-2.0..2.0),
        )
    }

    #[test]
    fn saturate_branches() {
        assert_eq!(saturate(100.0, 86.0).unwrap(), 86.0);
        assert_eq!(saturate(-0.1, 0.2374).unwrap(), -0.1);
        assert_eq!(saturate(-200.0, 86.0).unwrap(), -86.0);
    }

    #[test]
    fn saturate_rejects_non_finite() {
        assert!(saturate(f64::NAN, 1.0).is_err());
        assert!(saturate(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn saturate_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let v = rng.gen_range(-200.0..200.0);
            let s = saturate(v, 86.0).unwrap();
            assert_eq!(saturate(s, 86.0).unwrap(), s);
        }
    }

    #[test]
    fn transform_identity_at_zero() {
        assert_eq!(transform(0.0), Matrix3::identity());
    }

    #[test]
    fn transform_quarter_turn() {
        let out = transform(PI / 2.0) * Vector3::new(1.0, 0.0, 0.0);
        assert!((out - Vector3::new(0.0, 1.0, 0.0)).amax() < 1e-15);
    }

    #[test]
    fn transform_forty_five_degrees() {
        let j = transform(PI / 4.0);
        let h = 0.5f64.sqrt();
        assert!((j[(0, 0)] - h).abs() < 1e-15);
        assert!((j[(0, 1)] + h).abs() < 1e-15);
    }

    #[test]
    fn transform_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let j = transform(rng.gen_range(-PI..PI));
            let eye = j.transpose() * j - Matrix3::identity();
            assert!(eye.amax() < 1e-12);
            assert!((j.determinant() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn inertia_entry_and_determinant() {
        let mats = build_matrices(&ModelCoefficients::remus(), &Vector3::zeros()).unwrap();
        assert!((mats.m[(0, 0)] - 31.41).abs() < 1e-12);
        assert!(mats.m.determinant().abs() > 100.0);
    }

    #[test]
    fn matrices_vanish_at_rest() {
        let mats = build_matrices(&ModelCoefficients::remus(), &Vector3::zeros()).unwrap();
        assert_eq!(mats.c.amax(), 0.0);
        assert_eq!(mats.d.amax(), 0.0);
    }

    #[test]
    fn input_matrix_first_row() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let phi = Vector3::new(
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-2.0..2.0),
            );
            let mats = build_matrices(&ModelCoefficients::remus(), &phi).unwrap();
            assert_eq!(mats.g[(0, 0)], 1.0);
            assert_eq!(mats.g[(0, 1)], 0.0);
        }
    }

    #[test]
    fn coriolis_is_skew_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            let phi = Vector3::new(
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-2.0..2.0),
            );
            let mats = build_matrices(&ModelCoefficients::remus(), &phi).unwrap();
            assert!((mats.c + mats.c.transpose()).amax() < 1e-12);
        }
    }

    #[test]
    fn derivative_zero_at_equilibrium() {
        let model = DynamicsModel::remus();
        let rest = VehicleState::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let d = model
            .derivative(&rest, &ControlInput { thrust: 0.0, rudder: 0.0 })
            .unwrap();
        assert!(d.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn pure_surge_drag() {
        let model = DynamicsModel::remus();
        let s = VehicleState::new(0.0, 0.0, 0.0, 1.0, 0.0, 0.0);
        let d = model
            .derivative(&s, &ControlInput { thrust: 0.0, rudder: 0.0 })
            .unwrap();
        assert!((d[3] - (-1.62 / 31.41)).abs() < 1e-12);
    }

    #[test]
    fn derivative_matches_oracle() {
        let model = DynamicsModel::remus();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let s = random_state(&mut rng);
            let tau = ControlInput {
                thrust: rng.gen_range(-THRUST_BOUND..THRUST_BOUND),
                rudder: rng.gen_range(-RUDDER_BOUND..RUDDER_BOUND),
            };
            let got = model.derivative(&s, &tau).unwrap();
            let want = derivative_oracle(model.coefficients(), &s, &tau);
            for i in 0..6 {
                assert!(
                    (got[i] - want[i]).abs() < 1e-12,
                    "component {i}: {} vs {}",
                    got[i],
                    want[i]
                );
            }
        }
    }

    #[test]
    fn step_fixed_point_at_rest() {
        let model = DynamicsModel::remus();
        let rest = VehicleState::new(1.0, -2.0, 0.3, 0.0, 0.0, 0.0);
        let next = model
            .step(&rest, &ControlInput { thrust: 0.0, rudder: 0.0 }, 0.25)
            .unwrap();
        assert_eq!(next, rest);
    }

    #[test]
    fn step_surge_example() {
        let model = DynamicsModel::remus();
        let s = VehicleState::new(0.0, 0.0, 0.0, 1.0, 0.0, 0.0);
        let next = model
            .step(&s, &ControlInput { thrust: 0.0, rudder: 0.0 }, 0.1)
            .unwrap();
        assert!((next.x - 0.1).abs() < 1e-15);
        assert!((next.u - (1.0 + 0.1 * (-1.62 / 31.41))).abs() < 1e-12);
    }

    #[test]
    fn step_wraps_yaw() {
        let model = DynamicsModel::remus();
        let s = VehicleState::new(0.0, 0.0, PI - 1e-3, 0.0, 0.0, 1.5);
        let next = model
            .step(&s, &ControlInput { thrust: 0.0, rudder: 0.0 }, 0.1)
            .unwrap();
        assert!(next.psi >= -PI && next.psi <= PI);
        assert!(next.psi < 0.0, "expected wrap past pi, got {}", next.psi);
    }

    #[test]
    fn euler_error_halves_with_step() {
        // Integrate 1 s under a smooth input; global Euler error is O(Ts),
        // so halving Ts should roughly halve the error vs a fine reference.
        let model = DynamicsModel::remus();
        let start = VehicleState::new(0.0, 0.0, 0.2, 1.2, 0.1, -0.1);
        let tau = ControlInput { thrust: 40.0, rudder: 0.1 };
        let integrate = |ts: f64| {
            let n = (1.0 / ts).round() as usize;
            let mut s = start;
            for _ in 0..n {
                s = model.step(&s, &tau, ts).unwrap();
            }
            s
        };
        let reference = integrate(1.0 / 12800.0);
        let err = |s: &VehicleState| {
            let d = [
                s.x - reference.x,
                s.y - reference.y,
                s.psi - reference.psi,
                s.u - reference.u,
                s.v - reference.v,
                s.r - reference.r,
            ];
            d.iter().map(|x| x.abs()).fold(0.0, f64::max)
        };
        let e1 = err(&integrate(0.1));
        let e2 = err(&integrate(0.05));
        let ratio = e1 / e2;
        assert!(
            (ratio - 2.0).abs() / 2.0 < 0.2,
            "error ratio {ratio} not within 20% of 2"
        );
    }

    #[test]
    fn wrap_angle_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..1000 {
            let a = rng.gen_range(-30.0..30.0);
            let w = wrap_angle(a);
            assert!((-PI..=PI).contains(&w), "{a} wrapped to {w}");
            // Same direction modulo 2*pi.
            assert!(((a - w) / (2.0 * PI)).round() * 2.0 * PI - (a - w) < 1e-9);
        }
    }
}

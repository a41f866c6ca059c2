//! Six degree-of-freedom rigid-body model of the vehicle.
//!
//! ```text
//! M ν̇ + C(ν)ν + D(ν)ν + g(η) = τ
//! η̇ = J(η) ν
//! ```
//!
//! Frames follow the usual marine convention: body axes forward/starboard/down
//! and a north-east-down earth frame, so positive heave points down and the
//! net buoyancy of a positively buoyant vehicle shows up as a negative heave
//! force. `M` is the rigid-body mass matrix (with the centre of gravity offset
//! `z_g` below the body origin) plus diagonal added mass. The Coriolis matrix
//! is built from `M` in skew-symmetric form, damping is diagonal quadratic,
//! and the centre of buoyancy sits at the body origin.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Closest approach to `|θ| = π/2` accepted by the Euler-angle kinematics.
pub const PITCH_SINGULARITY_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("pitch angle {theta} rad is within {PITCH_SINGULARITY_TOL} rad of ±π/2")]
    PitchSingularity { theta: f64 },
    #[error("invalid vehicle parameters: {0}")]
    InvalidParams(String),
    #[error("cannot read vehicle parameter file: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse vehicle parameter file: {0}")]
    Parse(#[from] toml::de::Error),
}

/// Physical constants of the vehicle.
///
/// Serialized field names are the conventional hydrodynamic symbols, so a
/// parameter file reads like a data sheet (`X_du = -2.042`, `rho = 1025`).
/// Added-mass coefficients carry their usual negative sign; drag
/// coefficients are positive magnitudes. Missing keys keep their defaults.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleParams {
    /// Weight (N).
    #[serde(rename = "W")]
    pub weight: f64,
    /// Buoyancy (N).
    #[serde(rename = "B")]
    pub buoyancy: f64,
    /// Rigid-body mass (kg).
    #[serde(rename = "m")]
    pub mass: f64,
    #[serde(rename = "I_xx")]
    pub i_xx: f64,
    #[serde(rename = "I_yy")]
    pub i_yy: f64,
    #[serde(rename = "I_zz")]
    pub i_zz: f64,
    /// Centre of gravity below the body origin (m).
    pub z_g: f64,
    /// Vertical thruster arm about the pitch axis (m).
    pub l_1: f64,
    /// Horizontal thruster arm about the yaw axis (m).
    pub l_2: f64,
    /// Thruster radius (m).
    #[serde(rename = "R")]
    pub radius: f64,
    pub X_du: f64,
    pub Y_dv: f64,
    pub Z_dw: f64,
    pub K_dp: f64,
    pub M_dq: f64,
    pub N_dr: f64,
    pub X_uu: f64,
    pub Y_vv: f64,
    pub Z_ww: f64,
    pub K_pp: f64,
    pub M_qq: f64,
    pub N_rr: f64,
    /// Water density (kg/m³).
    pub rho: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            weight: 200.116,
            buoyancy: 201.586,
            mass: 20.42,
            i_xx: 0.1205,
            i_yy: 0.9431,
            i_zz: 1.0061,
            z_g: 0.0018,
            l_1: 0.1694,
            l_2: 0.2794,
            radius: 0.025,
            X_du: -2.042,
            Y_dv: -32.2013,
            Z_dw: -32.2013,
            K_dp: -0.0805,
            M_dq: -2.6834,
            N_dr: -2.6834,
            X_uu: 48.17,
            Y_vv: 4.11,
            Z_ww: 4.11,
            K_pp: 48.17,
            M_qq: 4.11,
            N_rr: 4.11,
            rho: 1025.0,
        }
    }
}

impl VehicleParams {
    /// Thruster power conversion ratio `C_p = sqrt(1/(2πρ)) / R` (W/N^1.5).
    pub fn power_ratio(&self) -> f64 {
        (1.0 / (2.0 * PI * self.rho)).sqrt() / self.radius
    }

    /// Net upward hydrostatic force `B − W` (N).
    pub fn net_buoyancy(&self) -> f64 {
        self.buoyancy - self.weight
    }

    /// Surge inertia including added mass, `m − X_du`.
    pub fn surge_inertia(&self) -> f64 {
        self.mass - self.X_du
    }

    pub fn added_mass(&self) -> [f64; 6] {
        [self.X_du, self.Y_dv, self.Z_dw, self.K_dp, self.M_dq, self.N_dr]
    }

    pub fn drag(&self) -> [f64; 6] {
        [self.X_uu, self.Y_vv, self.Z_ww, self.K_pp, self.M_qq, self.N_rr]
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |msg: String| Err(DynamicsError::InvalidParams(msg));
        if !(self.weight > 0.0) {
            return bad(format!("weight must be positive, got {}", self.weight));
        }
        if !(self.buoyancy > self.weight) {
            return bad(format!(
                "vehicle must be positively buoyant (B = {} N, W = {} N)",
                self.buoyancy, self.weight
            ));
        }
        let positive = [
            ("m", self.mass),
            ("I_xx", self.i_xx),
            ("I_yy", self.i_yy),
            ("I_zz", self.i_zz),
            ("l_1", self.l_1),
            ("l_2", self.l_2),
            ("R", self.radius),
            ("rho", self.rho),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return bad(format!("{name} must be positive and finite, got {value}"));
            }
        }
        let names = ["X_du", "Y_dv", "Z_dw", "K_dp", "M_dq", "N_dr"];
        for (name, value) in names.iter().zip(self.added_mass()) {
            if !(value < 0.0) {
                return bad(format!("added-mass coefficient {name} must be negative, got {value}"));
            }
        }
        let names = ["X_uu", "Y_vv", "Z_ww", "K_pp", "M_qq", "N_rr"];
        for (name, value) in names.iter().zip(self.drag()) {
            if !(value > 0.0) {
                return bad(format!("drag coefficient {name} must be positive, got {value}"));
            }
        }
        Ok(())
    }

    /// Parses a flat `key = value` parameter listing. Unknown keys are rejected.
    pub fn from_kv_str(text: &str) -> Result<Self, DynamicsError> {
        let params: Self = toml::from_str(text)?;
        params.validate()?;
        Ok(params)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DynamicsError> {
        Self::from_kv_str(&std::fs::read_to_string(path)?)
    }
}

/// Body velocities `ν = (u, v, w, p, q, r)` and earth-frame pose
/// `η = (x, y, z, φ, θ, ψ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VehicleState {
    pub nu: Vector6<f64>,
    pub eta: Vector6<f64>,
}

impl VehicleState {
    pub fn at_rest() -> Self {
        Self::default()
    }

    /// Level attitude at `(x, 0, 0)` moving forward at `u`.
    pub fn surging(x: f64, u: f64) -> Self {
        let mut s = Self::default();
        s.eta[0] = x;
        s.nu[0] = u;
        s
    }

    pub fn x(&self) -> f64 {
        self.eta[0]
    }
    pub fn u(&self) -> f64 {
        self.nu[0]
    }

    fn to_vector(self) -> nalgebra::SVector<f64, 12> {
        let mut v = nalgebra::SVector::<f64, 12>::zeros();
        v.fixed_rows_mut::<6>(0).copy_from(&self.nu);
        v.fixed_rows_mut::<6>(6).copy_from(&self.eta);
        v
    }

    fn from_vector(v: &nalgebra::SVector<f64, 12>) -> Self {
        Self {
            nu: v.fixed_rows::<6>(0).into_owned(),
            eta: v.fixed_rows::<6>(6).into_owned(),
        }
    }

    fn wrapped(mut self) -> Self {
        for i in 3..6 {
            self.eta[i] = wrap_angle(self.eta[i]);
        }
        self
    }
}

/// Forces of the two horizontal (`t1`, `t2`) and two vertical (`t3`, `t4`)
/// thrusters, in newtons.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThrusterForces {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
}

impl ThrusterForces {
    pub fn new(t1: f64, t2: f64, t3: f64, t4: f64) -> Self {
        Self { t1, t2, t3, t4 }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.t1, self.t2, self.t3, self.t4]
    }

    pub fn total_horizontal(&self) -> f64 {
        self.t1 + self.t2
    }
}

/// Generalized body-frame control force `τ = (X, Y, Z, K, M, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GeneralizedForce {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub k: f64,
    pub m: f64,
    pub n: f64,
}

impl GeneralizedForce {
    pub fn to_vector(&self) -> Vector6<f64> {
        Vector6::new(self.x, self.y, self.z, self.k, self.m, self.n)
    }

    pub fn surge(x: f64) -> Self {
        Self { x, ..Self::default() }
    }
}

/// Maps thruster forces onto the generalized force vector.
pub fn thruster_allocation(t: &ThrusterForces, params: &VehicleParams) -> GeneralizedForce {
    GeneralizedForce {
        x: t.t1 + t.t2,
        y: 0.0,
        z: t.t3 + t.t4,
        k: 0.0,
        m: params.l_1 * (t.t3 - t.t4),
        n: params.l_2 * (t.t1 - t.t2),
    }
}

/// Momentum-theory power draw of one thruster producing `thrust` newtons.
/// Reverse thrust costs the same as forward thrust.
pub fn thruster_power(thrust: f64, params: &VehicleParams) -> f64 {
    params.power_ratio() * thrust.abs().powf(1.5)
}

/// Quadratic hydrodynamic drag, as a force acting on the vehicle
/// (`−d_i |ν_i| ν_i`, so it always opposes motion).
pub fn damping_force(nu: &Vector6<f64>, params: &VehicleParams) -> Vector6<f64> {
    let d = params.drag();
    Vector6::from_fn(|i, _| -d[i] * nu[i].abs() * nu[i])
}

/// Wraps an angle onto `(−π, π]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let w = angle.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Body-to-earth rotation for ZYX Euler angles.
pub fn rotation_matrix(phi: f64, theta: f64, psi: f64) -> Matrix3<f64> {
    let (sphi, cphi) = phi.sin_cos();
    let (sth, cth) = theta.sin_cos();
    let (spsi, cpsi) = psi.sin_cos();
    Matrix3::new(
        cpsi * cth,
        -spsi * cphi + cpsi * sth * sphi,
        spsi * sphi + cpsi * cphi * sth,
        spsi * cth,
        cpsi * cphi + sphi * sth * spsi,
        -cpsi * sphi + sth * spsi * cphi,
        -sth,
        cth * sphi,
        cth * cphi,
    )
}

/// Full kinematic transform `J(η)`: rotation for the linear block and the
/// Euler-rate transform for the angular block.
pub fn kinematic_transform(eta: &Vector6<f64>) -> Result<Matrix6<f64>, DynamicsError> {
    let (phi, theta, psi) = (eta[3], eta[4], eta[5]);
    if (theta.abs() - PI / 2.0).abs() < PITCH_SINGULARITY_TOL || theta.abs() >= PI / 2.0 {
        return Err(DynamicsError::PitchSingularity { theta });
    }
    let (sphi, cphi) = phi.sin_cos();
    let (sth, cth) = theta.sin_cos();
    let tth = sth / cth;
    let euler_rates = Matrix3::new(
        1.0,
        sphi * tth,
        cphi * tth,
        0.0,
        cphi,
        -sphi,
        0.0,
        sphi / cth,
        cphi / cth,
    );
    let mut j = Matrix6::zeros();
    j.fixed_view_mut::<3, 3>(0, 0).copy_from(&rotation_matrix(phi, theta, psi));
    j.fixed_view_mut::<3, 3>(3, 3).copy_from(&euler_rates);
    Ok(j)
}

/// Time derivative of a [`VehicleState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    pub nu_dot: Vector6<f64>,
    pub eta_dot: Vector6<f64>,
}

/// The plant: parameters plus the precomputed mass matrix and its inverse.
#[derive(Debug, Clone)]
pub struct AuvModel {
    params: VehicleParams,
    mass: Matrix6<f64>,
    mass_inv: Matrix6<f64>,
}

impl AuvModel {
    pub fn new(params: VehicleParams) -> Result<Self, DynamicsError> {
        params.validate()?;
        let m = params.mass;
        let zg = params.z_g;
        let mut mass = Matrix6::zeros();
        for i in 0..3 {
            mass[(i, i)] = m;
        }
        mass[(3, 3)] = params.i_xx;
        mass[(4, 4)] = params.i_yy;
        mass[(5, 5)] = params.i_zz;
        // −m S(r_g) and its transpose for r_g = (0, 0, z_g).
        mass[(0, 4)] = m * zg;
        mass[(4, 0)] = m * zg;
        mass[(1, 3)] = -m * zg;
        mass[(3, 1)] = -m * zg;
        for (i, a) in params.added_mass().iter().enumerate() {
            mass[(i, i)] -= a;
        }
        let mass_inv = mass
            .try_inverse()
            .ok_or_else(|| DynamicsError::InvalidParams("mass matrix is singular".into()))?;
        Ok(Self { params, mass, mass_inv })
    }

    pub fn params(&self) -> &VehicleParams {
        &self.params
    }

    pub fn mass_matrix(&self) -> &Matrix6<f64> {
        &self.mass
    }

    /// Coriolis and centripetal force `C(ν)ν` for rigid body plus added mass.
    pub fn coriolis_force(&self, nu: &Vector6<f64>) -> Vector6<f64> {
        let m = &self.mass;
        let lin = Vector3::new(nu[0], nu[1], nu[2]);
        let ang = Vector3::new(nu[3], nu[4], nu[5]);
        let a1 = m.fixed_view::<3, 3>(0, 0) * lin + m.fixed_view::<3, 3>(0, 3) * ang;
        let a2 = m.fixed_view::<3, 3>(3, 0) * lin + m.fixed_view::<3, 3>(3, 3) * ang;
        let f = ang.cross(&a1);
        let t = lin.cross(&a1) + ang.cross(&a2);
        Vector6::new(f[0], f[1], f[2], t[0], t[1], t[2])
    }

    /// Hydrostatic restoring force `g(η)`, buoyancy acting at the body origin.
    pub fn restoring_force(&self, eta: &Vector6<f64>) -> Vector6<f64> {
        let p = &self.params;
        let (w, b) = (p.weight, p.buoyancy);
        let (sphi, cphi) = eta[3].sin_cos();
        let (sth, cth) = eta[4].sin_cos();
        Vector6::new(
            (w - b) * sth,
            -(w - b) * cth * sphi,
            -(w - b) * cth * cphi,
            p.z_g * w * cth * sphi,
            p.z_g * w * sth,
            0.0,
        )
    }

    pub fn state_derivative(
        &self,
        state: &VehicleState,
        tau: &GeneralizedForce,
    ) -> Result<StateDerivative, DynamicsError> {
        let j = kinematic_transform(&state.eta)?;
        let nu = &state.nu;
        let net = tau.to_vector() + damping_force(nu, &self.params)
            - self.coriolis_force(nu)
            - self.restoring_force(&state.eta);
        Ok(StateDerivative { nu_dot: self.mass_inv * net, eta_dot: j * nu })
    }

    /// One classical Runge–Kutta step with `tau` held constant.
    pub fn integrate_step(
        &self,
        state: &VehicleState,
        tau: &GeneralizedForce,
        dt: f64,
    ) -> Result<VehicleState, DynamicsError> {
        assert!(dt > 0.0, "integration step must be positive");
        let f = |v: &nalgebra::SVector<f64, 12>| -> Result<nalgebra::SVector<f64, 12>, DynamicsError> {
            let d = self.state_derivative(&VehicleState::from_vector(v), tau)?;
            let mut out = nalgebra::SVector::<f64, 12>::zeros();
            out.fixed_rows_mut::<6>(0).copy_from(&d.nu_dot);
            out.fixed_rows_mut::<6>(6).copy_from(&d.eta_dot);
            Ok(out)
        };
        let y = state.to_vector();
        let k1 = f(&y)?;
        let k2 = f(&(y + k1 * (dt / 2.0)))?;
        let k3 = f(&(y + k2 * (dt / 2.0)))?;
        let k4 = f(&(y + k3 * dt))?;
        let next = y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        Ok(VehicleState::from_vector(&next).wrapped())
    }
}

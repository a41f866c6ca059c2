//! Depth, pitch and yaw autopilots and the thruster mixer.

use log::debug;
use serde::{Deserialize, Serialize};

use crate::dynamics::{ThrusterForces, VehicleParams, VehicleState};

/// Gains and limits of one loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Symmetric output saturation.
    pub output_limit: f64,
    /// Symmetric clamp on the integral contribution `ki ∫e`.
    pub integral_limit: f64,
}

impl PidGains {
    /// Places all three closed-loop poles of `inertia · s²` at `−ω`.
    pub fn triple_pole(inertia: f64, omega: f64, output_limit: f64, integral_limit: f64) -> Self {
        Self {
            kp: 3.0 * inertia * omega * omega,
            ki: inertia * omega.powi(3),
            kd: 3.0 * inertia * omega,
            output_limit,
            integral_limit,
        }
    }
}

/// PID with derivative on measurement, clamped integrator and saturated output.
#[derive(Debug, Clone, PartialEq)]
pub struct Pid {
    pub gains: PidGains,
    integral: f64,
    last_measurement: Option<f64>,
}

impl Pid {
    pub fn new(gains: PidGains) -> Self {
        Self { gains, integral: 0.0, last_measurement: None }
    }

    pub fn reset(&mut self) {
        self.integral = 0.0;
        self.last_measurement = None;
    }

    pub fn step(&mut self, setpoint: f64, measurement: f64, dt: f64) -> f64 {
        assert!(dt > 0.0, "PID sample time must be positive");
        let g = &self.gains;
        let error = setpoint - measurement;
        let rate = self.last_measurement.map_or(0.0, |prev| (measurement - prev) / dt);
        let out = g.kp * error + self.integral - g.kd * rate;
        self.integral = (self.integral + g.ki * error * dt).clamp(-g.integral_limit, g.integral_limit);
        self.last_measurement = Some(measurement);
        out.clamp(-g.output_limit, g.output_limit)
    }
}

/// Gains for the three attitude/depth loops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutopilotGains {
    pub depth: PidGains,
    pub pitch: PidGains,
    pub yaw: PidGains,
}

impl AutopilotGains {
    /// Triple-pole designs on the heave, pitch and yaw inertias including
    /// added mass: 1 rad/s for depth, 2 rad/s for the two rotations.
    pub fn tuned(params: &VehicleParams, per_thruster_limit: f64) -> Self {
        let heave = params.mass - params.Z_dw;
        let pitch = params.i_yy - params.M_dq;
        let yaw = params.i_zz - params.N_dr;
        let pair = 2.0 * per_thruster_limit;
        Self {
            depth: PidGains::triple_pole(heave, 1.0, pair, 0.5 * pair),
            pitch: PidGains::triple_pole(pitch, 2.0, pair * params.l_1, 0.5 * pair * params.l_1),
            yaw: PidGains::triple_pole(yaw, 2.0, pair * params.l_2, 0.5 * pair * params.l_2),
        }
    }
}

impl Default for AutopilotGains {
    fn default() -> Self {
        Self::tuned(&VehicleParams::default(), 7.86)
    }
}

/// Heave force and pitch/yaw moment demands.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AttitudeDemand {
    pub heave: f64,
    pub pitch: f64,
    pub yaw: f64,
}

/// Holds depth, zero pitch and heading with independent loops. The depth
/// loop feeds forward the force that cancels net buoyancy.
#[derive(Debug, Clone)]
pub struct Autopilot {
    depth: Pid,
    pitch: Pid,
    yaw: Pid,
    hover_force: f64,
    pub depth_setpoint: f64,
    pub heading_setpoint: f64,
}

impl Autopilot {
    pub fn new(gains: AutopilotGains, params: &VehicleParams) -> Self {
        Self {
            depth: Pid::new(gains.depth),
            pitch: Pid::new(gains.pitch),
            yaw: Pid::new(gains.yaw),
            hover_force: params.net_buoyancy(),
            depth_setpoint: 0.0,
            heading_setpoint: 0.0,
        }
    }

    pub fn step(&mut self, state: &VehicleState, dt: f64) -> AttitudeDemand {
        let eta = &state.eta;
        AttitudeDemand {
            heave: self.hover_force + self.depth.step(self.depth_setpoint, eta[2], dt),
            pitch: self.pitch.step(0.0, eta[4], dt),
            yaw: self.yaw.step(self.heading_setpoint, eta[5], dt),
        }
    }
}

/// Thruster forces from the mixer plus whether any demand was cut back.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixOutput {
    pub forces: ThrusterForces,
    pub saturated: bool,
}

/// Splits a symmetric and a differential demand over a thruster pair. The
/// symmetric part wins when the pair saturates.
fn mix_pair(common: f64, differential: f64, limit: f64) -> (f64, f64, bool) {
    let c = common.clamp(-limit, limit);
    let room = limit - c.abs();
    let d = differential.clamp(-room, room);
    (c + d, c - d, c != common || d != differential)
}

/// Inverts the thruster allocation for the demanded surge thrust, heave
/// force, pitch moment and yaw moment, saturating each thruster at
/// `per_thruster_limit`.
pub fn mix(
    total_thrust: f64,
    pitch_moment: f64,
    yaw_moment: f64,
    heave_force: f64,
    params: &VehicleParams,
    per_thruster_limit: f64,
) -> MixOutput {
    let (t1, t2, sat_h) = mix_pair(total_thrust / 2.0, yaw_moment / (2.0 * params.l_2), per_thruster_limit);
    let (t3, t4, sat_v) = mix_pair(heave_force / 2.0, pitch_moment / (2.0 * params.l_1), per_thruster_limit);
    let saturated = sat_h || sat_v;
    if saturated {
        debug!("thruster saturation: demand T={total_thrust} Z={heave_force} M={pitch_moment} N={yaw_moment}");
    }
    MixOutput { forces: ThrusterForces::new(t1, t2, t3, t4), saturated }
}

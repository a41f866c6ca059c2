//! Scenario definition and its `key = value` file format.
//!
//! ```toml
//! [scenario]
//! x0 = 0.0
//! xf = 10.0
//! u0 = 0.0
//!
//! [controller]
//! kind = "rteo"      # "tmpc" | "eompc" | "rteo"
//! horizon = 15
//!
//! [pid.depth]
//! kp = 160.0
//! ki = 52.6
//! kd = 160.0
//! output_limit = 15.72
//! integral_limit = 7.86
//!
//! [vehicle]
//! X_uu = 48.17
//! ```
//!
//! Every section and key is optional; unknown keys are errors.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{DynamicsError, VehicleParams};
use crate::mpc::{MpcConfig, SolverSettings, SwitchConfig};
use crate::pid::{AutopilotGains, PidGains};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario file: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse scenario file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Vehicle(#[from] DynamicsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ControllerKind {
    #[serde(rename = "tmpc")]
    Tracking,
    #[serde(rename = "eompc")]
    EnergyOptimal,
    #[serde(rename = "rteo")]
    Rteo,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 3] = [Self::Tracking, Self::EnergyOptimal, Self::Rteo];

    pub fn label(&self) -> &'static str {
        match self {
            Self::Tracking => "T-MPC",
            Self::EnergyOptimal => "EO-MPC",
            Self::Rteo => "RTEO-MPC",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub vehicle: VehicleParams,
    pub controller: ControllerKind,
    /// Horizon, bounds and solver settings. `destination` and `dt` are
    /// overwritten from the scenario when a controller is built.
    pub mpc: MpcConfig,
    /// `None` derives the thresholds from the static optimum.
    pub switch: Option<SwitchConfig>,
    pub pid: AutopilotGains,
    pub x0: f64,
    pub xf: f64,
    pub u0: f64,
    pub dt: f64,
    /// Arrival is declared once `x >= xf − stop_tolerance`.
    pub stop_tolerance: f64,
    pub max_time: f64,
    /// Force limit of each individual thruster (N).
    pub thruster_limit: f64,
    /// Segment count of the collocation reference.
    pub oracle_segments: usize,
}

impl Default for Scenario {
    fn default() -> Self {
        let vehicle = VehicleParams::default();
        let thruster_limit = 7.86;
        Self {
            vehicle,
            controller: ControllerKind::Rteo,
            mpc: MpcConfig::default(),
            switch: None,
            pid: AutopilotGains::tuned(&vehicle, thruster_limit),
            x0: 0.0,
            xf: 10.0,
            u0: 0.0,
            dt: 0.1,
            stop_tolerance: 0.01,
            max_time: 300.0,
            thruster_limit,
            oracle_segments: 300,
        }
    }
}

impl Scenario {
    pub fn with_controller(&self, controller: ControllerKind) -> Self {
        Self { controller, ..self.clone() }
    }

    /// MPC configuration with the scenario's destination and sampling time.
    pub fn mpc_config(&self) -> MpcConfig {
        MpcConfig { destination: self.xf, dt: self.dt, ..self.mpc.clone() }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::Invalid(m));
        if !(self.xf >= self.x0) {
            return bad(format!("xf = {} lies behind x0 = {}", self.xf, self.x0));
        }
        if !(self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.u0 >= 0.0) {
            return bad(format!("u0 must be non-negative, got {}", self.u0));
        }
        if !(self.stop_tolerance >= 0.0) || !(self.max_time > 0.0) {
            return bad("stop_tolerance must be non-negative and max_time positive".into());
        }
        if !(self.thruster_limit > 0.0) {
            return bad("thruster_limit must be positive".into());
        }
        if self.mpc.thrust_max > 2.0 * self.thruster_limit + 1e-9 || self.mpc.thrust_min < -2.0 * self.thruster_limit - 1e-9 {
            return bad("MPC thrust bounds exceed what the horizontal thruster pair can deliver".into());
        }
        self.vehicle.validate()?;
        self.mpc_config().validate().map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let file: ScenarioFile = toml::from_str(text)?;
        let sc = file.into_scenario();
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default)]
    vehicle: Option<VehicleParams>,
    #[serde(default)]
    controller: ControllerSection,
    #[serde(default)]
    pid: PidSection,
    #[serde(default)]
    scenario: ScenarioSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ControllerSection {
    kind: Option<ControllerKind>,
    horizon: Option<usize>,
    thrust_min: Option<f64>,
    thrust_max: Option<f64>,
    u_floor: Option<f64>,
    max_iterations: Option<usize>,
    tolerance: Option<f64>,
    warm_start: Option<bool>,
    u_switch_low: Option<f64>,
    u_switch_high: Option<f64>,
    x_switch: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PidSection {
    depth: Option<PidGains>,
    pitch: Option<PidGains>,
    yaw: Option<PidGains>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioSection {
    x0: Option<f64>,
    xf: Option<f64>,
    u0: Option<f64>,
    dt: Option<f64>,
    stop_tolerance: Option<f64>,
    max_time: Option<f64>,
    thruster_limit: Option<f64>,
    oracle_segments: Option<usize>,
}

impl ScenarioFile {
    fn into_scenario(self) -> Scenario {
        let mut sc = Scenario::default();
        if let Some(v) = self.vehicle {
            sc.vehicle = v;
        }
        let s = self.scenario;
        sc.x0 = s.x0.unwrap_or(sc.x0);
        sc.xf = s.xf.unwrap_or(sc.xf);
        sc.u0 = s.u0.unwrap_or(sc.u0);
        sc.dt = s.dt.unwrap_or(sc.dt);
        sc.stop_tolerance = s.stop_tolerance.unwrap_or(sc.stop_tolerance);
        sc.max_time = s.max_time.unwrap_or(sc.max_time);
        sc.thruster_limit = s.thruster_limit.unwrap_or(sc.thruster_limit);
        sc.oracle_segments = s.oracle_segments.unwrap_or(sc.oracle_segments);

        let c = self.controller;
        sc.controller = c.kind.unwrap_or(sc.controller);
        let defaults = MpcConfig::default();
        sc.mpc = MpcConfig {
            horizon: c.horizon.unwrap_or(defaults.horizon),
            thrust_min: c.thrust_min.unwrap_or(-2.0 * sc.thruster_limit),
            thrust_max: c.thrust_max.unwrap_or(2.0 * sc.thruster_limit),
            u_floor: c.u_floor.unwrap_or(defaults.u_floor),
            solver: SolverSettings {
                max_iterations: c.max_iterations.unwrap_or(defaults.solver.max_iterations),
                tolerance: c.tolerance.unwrap_or(defaults.solver.tolerance),
            },
            warm_start: c.warm_start.unwrap_or(defaults.warm_start),
            ..defaults
        };
        if c.u_switch_low.is_some() || c.u_switch_high.is_some() || c.x_switch.is_some() {
            let derived = crate::energy::static_optimal_velocity(&sc.vehicle)
                .map(|u| SwitchConfig::around(u, sc.xf, &sc.vehicle))
                .unwrap_or(SwitchConfig { u_low: 0.0, u_high: 0.0, x_switch: sc.xf });
            sc.switch = Some(SwitchConfig {
                u_low: c.u_switch_low.unwrap_or(derived.u_low),
                u_high: c.u_switch_high.unwrap_or(derived.u_high),
                x_switch: c.x_switch.unwrap_or(derived.x_switch),
            });
        }

        let tuned = AutopilotGains::tuned(&sc.vehicle, sc.thruster_limit);
        sc.pid = AutopilotGains {
            depth: self.pid.depth.unwrap_or(tuned.depth),
            pitch: self.pid.pitch.unwrap_or(tuned.pitch),
            yaw: self.pid.yaw.unwrap_or(tuned.yaw),
        };
        sc
    }
}

//! Surge controllers: setpoint-tracking MPC, energy-optimal MPC, and the
//! switching real-time variant that only re-optimizes during transients.

pub mod cost;
pub mod solver;

use std::time::Instant;

use thiserror::Error;

use crate::dynamics::{VehicleParams, VehicleState};
use crate::energy::{static_optimal_velocity, EnergyError};
use crate::surge::{FrozenContext, SurgeModel, SurgeState};

pub use cost::{eompc_cost, stage_cost, terminal_cost, tmpc_cost, EnergyTerms, HorizonProblem, Objective};
pub use solver::{minimize_box, BoxObjective, BoxSolution, SolveStatus, SolverSettings};

#[derive(Debug, Error, PartialEq)]
pub enum MpcError {
    #[error("invalid MPC configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Energy(#[from] EnergyError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpcConfig {
    pub horizon: usize,
    /// Controller sampling time (s).
    pub dt: f64,
    pub thrust_min: f64,
    pub thrust_max: f64,
    /// Destination `x_f` (m).
    pub destination: f64,
    /// Lower bound on the terminal speed divisor of the cost-to-go (m/s).
    pub u_floor: f64,
    pub solver: SolverSettings,
    pub warm_start: bool,
}

impl Default for MpcConfig {
    fn default() -> Self {
        Self {
            horizon: 15,
            dt: 0.1,
            thrust_min: -15.72,
            thrust_max: 15.72,
            destination: 10.0,
            u_floor: 1e-3,
            solver: SolverSettings::default(),
            warm_start: true,
        }
    }
}

impl MpcConfig {
    pub fn validate(&self) -> Result<(), MpcError> {
        let bad = |m: &str| Err(MpcError::InvalidConfig(m.to_string()));
        if self.horizon < 1 {
            return bad("horizon must be at least one step");
        }
        if !(self.dt > 0.0) {
            return bad("sampling time must be positive");
        }
        if !(self.thrust_min < self.thrust_max) {
            return bad("thrust_min must be below thrust_max");
        }
        if !(self.u_floor > 0.0) {
            return bad("u_floor must be positive");
        }
        Ok(())
    }
}

/// Thresholds of the switching strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchConfig {
    pub u_low: f64,
    pub u_high: f64,
    /// Position after which the controller always re-optimizes (m).
    pub x_switch: f64,
}

impl SwitchConfig {
    /// ±5 % speed band around `u_star`, and a switching point one
    /// deceleration margin short of `destination`.
    pub fn around(u_star: f64, destination: f64, params: &VehicleParams) -> Self {
        Self {
            u_low: 0.95 * u_star,
            u_high: 1.05 * u_star,
            x_switch: destination - deceleration_margin(u_star, params),
        }
    }

    pub fn validate(&self, u_star: f64, destination: f64) -> Result<(), MpcError> {
        if !(self.u_low < u_star && u_star < self.u_high) {
            return Err(MpcError::InvalidConfig(format!(
                "switching band [{}, {}] must straddle u* = {u_star}",
                self.u_low, self.u_high
            )));
        }
        if !(self.x_switch < destination) {
            return Err(MpcError::InvalidConfig(format!(
                "x_switch = {} must be short of the destination {destination}",
                self.x_switch
            )));
        }
        Ok(())
    }
}

/// Distance covered in 1.5× the time an unpowered vehicle needs to coast
/// from `u_star` down to a quarter of it, at speed `u_star`.
///
/// Coasting obeys `u(t) = u* / (1 + X_uu u* t / (m − X_du))`.
pub fn deceleration_margin(u_star: f64, params: &VehicleParams) -> f64 {
    let braking_time = 3.0 * params.surge_inertia() / (params.X_uu * u_star);
    1.5 * u_star * braking_time
}

/// What a surge controller commanded at one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlDecision {
    /// Total horizontal thrust (N).
    pub thrust: f64,
    pub solver_invoked: bool,
    /// Optimal horizon cost when the solver ran.
    pub predicted_cost: Option<f64>,
    /// Wall-clock time spent in the solver (s).
    pub solve_time: f64,
    pub iterations: usize,
}

/// Result of one finite-horizon solve.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizonSolution {
    pub inputs: Vec<f64>,
    pub cost: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

/// Minimizes a horizon problem from the best of three seeds: all-zero
/// thrust, the warm start, and constant thrust balancing drag at
/// `cruise_speed`. The result never costs more than any seed.
pub fn solve_horizon(
    problem: &HorizonProblem<'_>,
    warm_start: Option<&[f64]>,
    cruise_speed: f64,
) -> HorizonSolution {
    let n = problem.horizon();
    let cfg = problem.config;
    let clamp = |t: f64| t.clamp(cfg.thrust_min, cfg.thrust_max);
    let cruise = clamp(problem.model.drag * cruise_speed * cruise_speed);
    let mut seeds = vec![vec![clamp(0.0); n], vec![cruise; n]];
    if let Some(w) = warm_start.filter(|w| w.len() == n) {
        seeds.push(w.iter().map(|&t| clamp(t)).collect());
    }
    let (seed, seed_cost) = seeds
        .into_iter()
        .map(|s| {
            let c = problem.cost(&s);
            (s, c)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least two seeds");
    let sol = minimize_box(problem, &seed, &cfg.solver);
    if sol.value <= seed_cost {
        HorizonSolution { inputs: sol.x, cost: sol.value, iterations: sol.iterations, status: sol.status }
    } else {
        HorizonSolution { inputs: seed, cost: seed_cost, iterations: sol.iterations, status: sol.status }
    }
}

/// A controller producing total horizontal thrust from full state feedback.
pub trait SurgeController: Send {
    fn name(&self) -> &'static str;
    fn decide(&mut self, state: &VehicleState) -> ControlDecision;
}

#[derive(Debug, Clone)]
struct RecedingHorizon {
    config: MpcConfig,
    model: SurgeModel,
    previous: Option<Vec<f64>>,
}

impl RecedingHorizon {
    fn solve(&mut self, state: &VehicleState, objective: Objective, cruise_speed: f64) -> ControlDecision {
        let ctx = FrozenContext::from_state(state);
        let start = SurgeState::new(state.x(), state.u().max(0.0));
        let problem = HorizonProblem::new(&self.model, &self.config, start, &ctx, objective);
        let warm: Option<Vec<f64>> = if self.config.warm_start {
            self.previous.as_ref().map(|p| {
                let mut shifted = p[1..].to_vec();
                shifted.push(*p.last().expect("non-empty horizon"));
                shifted
            })
        } else {
            None
        };
        let clock = Instant::now();
        let sol = solve_horizon(&problem, warm.as_deref(), cruise_speed);
        let solve_time = clock.elapsed().as_secs_f64();
        let thrust = sol.inputs[0];
        self.previous = Some(sol.inputs);
        ControlDecision {
            thrust,
            solver_invoked: true,
            predicted_cost: Some(sol.cost),
            solve_time,
            iterations: sol.iterations,
        }
    }
}

/// Tracks the static optimal speed with a squared-error objective.
#[derive(Debug, Clone)]
pub struct TrackingMpc {
    inner: RecedingHorizon,
    reference: f64,
}

impl TrackingMpc {
    pub fn new(config: MpcConfig, params: &VehicleParams) -> Result<Self, MpcError> {
        config.validate()?;
        let reference = static_optimal_velocity(params)?;
        Ok(Self::with_reference(config, params, reference))
    }

    pub fn with_reference(config: MpcConfig, params: &VehicleParams, reference: f64) -> Self {
        Self { inner: RecedingHorizon { config, model: SurgeModel::new(params), previous: None }, reference }
    }

    pub fn reference(&self) -> f64 {
        self.reference
    }
}

impl SurgeController for TrackingMpc {
    fn name(&self) -> &'static str {
        "T-MPC"
    }

    fn decide(&mut self, state: &VehicleState) -> ControlDecision {
        let reference = self.reference;
        self.inner.solve(state, Objective::Tracking { reference }, reference)
    }
}

/// Minimizes horizon energy plus the remaining-distance cost-to-go.
#[derive(Debug, Clone)]
pub struct EnergyOptimalMpc {
    inner: RecedingHorizon,
    terms: EnergyTerms,
    u_star: f64,
}

impl EnergyOptimalMpc {
    pub fn new(config: MpcConfig, params: &VehicleParams) -> Result<Self, MpcError> {
        config.validate()?;
        Ok(Self {
            inner: RecedingHorizon { config, model: SurgeModel::new(params), previous: None },
            terms: EnergyTerms::new(params)?,
            u_star: static_optimal_velocity(params)?,
        })
    }

    pub fn u_star(&self) -> f64 {
        self.u_star
    }

    pub fn config(&self) -> &MpcConfig {
        &self.inner.config
    }

    fn solve(&mut self, state: &VehicleState) -> ControlDecision {
        self.inner.solve(state, Objective::EnergyOptimal(self.terms), self.u_star)
    }

    /// Replaces the warm start with a constant sequence.
    fn reset_warm_start(&mut self, thrust: f64) {
        self.inner.previous = Some(vec![thrust; self.inner.config.horizon]);
    }
}

impl SurgeController for EnergyOptimalMpc {
    fn name(&self) -> &'static str {
        "EO-MPC"
    }

    fn decide(&mut self, state: &VehicleState) -> ControlDecision {
        self.solve(state)
    }
}

/// Speed and thrust of the previous two samples.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SwitchHistory {
    pub prev_speed: Option<f64>,
    pub prev_thrust: Option<f64>,
    pub prev_prev_thrust: Option<f64>,
}

impl SwitchHistory {
    pub fn push(&mut self, speed: f64, thrust: f64) {
        self.prev_speed = Some(speed);
        self.prev_prev_thrust = self.prev_thrust;
        self.prev_thrust = Some(thrust);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SwitchAction {
    Solve,
    Hold(f64),
}

/// Switching rule: re-optimize while accelerating toward `u_star` from below
/// (or while thrust is still rising after starting above it) and whenever
/// past `x_switch`; otherwise repeat the previous thrust.
pub fn switch_action(
    x: f64,
    u: f64,
    initial_speed: f64,
    u_star: f64,
    history: &SwitchHistory,
    sw: &SwitchConfig,
) -> SwitchAction {
    if x >= sw.x_switch {
        return SwitchAction::Solve;
    }
    let Some(held) = history.prev_thrust else {
        return SwitchAction::Solve;
    };
    let solve = if initial_speed < u_star {
        let accelerating = history.prev_speed.is_none_or(|prev| prev < u);
        u < sw.u_low || accelerating
    } else {
        let thrust_rising = history.prev_prev_thrust.is_none_or(|pp| pp < held);
        u > sw.u_high || thrust_rising
    };
    if solve {
        SwitchAction::Solve
    } else {
        SwitchAction::Hold(held)
    }
}

/// Energy-optimal MPC that holds the last thrust through the cruise phase.
#[derive(Debug, Clone)]
pub struct RteoMpc {
    eo: EnergyOptimalMpc,
    switch: SwitchConfig,
    initial_speed: Option<f64>,
    history: SwitchHistory,
}

impl RteoMpc {
    pub fn new(config: MpcConfig, params: &VehicleParams, switch: Option<SwitchConfig>) -> Result<Self, MpcError> {
        let eo = EnergyOptimalMpc::new(config, params)?;
        let switch = switch.unwrap_or_else(|| SwitchConfig::around(eo.u_star, eo.config().destination, params));
        switch.validate(eo.u_star, eo.config().destination)?;
        Ok(Self { eo, switch, initial_speed: None, history: SwitchHistory::default() })
    }

    pub fn switch_config(&self) -> &SwitchConfig {
        &self.switch
    }

    pub fn history(&self) -> &SwitchHistory {
        &self.history
    }

    /// One control step of the switching strategy.
    pub fn rteo_step(&mut self, state: &VehicleState) -> ControlDecision {
        let (x, u) = (state.x(), state.u());
        let initial = *self.initial_speed.get_or_insert(u);
        let decision = match switch_action(x, u, initial, self.eo.u_star, &self.history, &self.switch) {
            SwitchAction::Solve => self.eo.solve(state),
            SwitchAction::Hold(thrust) => {
                self.eo.reset_warm_start(thrust);
                ControlDecision { thrust, solver_invoked: false, predicted_cost: None, solve_time: 0.0, iterations: 0 }
            }
        };
        self.history.push(u, decision.thrust);
        decision
    }
}

impl SurgeController for RteoMpc {
    fn name(&self) -> &'static str {
        "RTEO-MPC"
    }

    fn decide(&mut self, state: &VehicleState) -> ControlDecision {
        self.rteo_step(state)
    }
}

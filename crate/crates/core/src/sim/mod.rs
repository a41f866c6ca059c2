//! Closed-loop simulation: the 6-DOF plant driven by a surge MPC and the
//! depth/pitch/yaw autopilots through the thruster mixer.

pub mod experiments;
pub mod scenario;

use std::fmt::Write as _;

use thiserror::Error;

use crate::dynamics::{thruster_allocation, AuvModel, DynamicsError, ThrusterForces, VehicleState};
use crate::energy::EnergyLedger;
use crate::mpc::{ControlDecision, EnergyOptimalMpc, MpcError, RteoMpc, SurgeController, TrackingMpc};
use crate::pid::{mix, Autopilot};

pub use scenario::{ControllerKind, Scenario, ScenarioError};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Controller(#[from] MpcError),
    #[error("plant integration failed at t = {t:.2} s: {source}")]
    Plant { t: f64, source: DynamicsError },
}

/// One control sample: the state it was computed from and what was applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub state: VehicleState,
    pub forces: ThrusterForces,
    pub decision: ControlDecision,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimLog {
    pub controller: ControllerKind,
    pub records: Vec<StepRecord>,
    pub final_state: VehicleState,
    pub ledger: EnergyLedger,
    /// Time at which the arrival condition was met (or the time limit).
    pub travel_time: f64,
    pub reached: bool,
    pub saturation_events: usize,
}

impl SimLog {
    pub const TRACE_HEADER: &'static str =
        "t,x,y,z,phi,theta,psi,u,v,w,p,q,r,T1,T2,T3,T4,T_total,solver_invoked,solve_time_s";
    pub const DECISION_HEADER: &'static str = "t,T_total,solver_invoked,solve_time_s,predicted_cost_J";
    pub const SUMMARY_HEADER: &'static str =
        "controller,surge_J,heave_J,pitch_J,yaw_J,total_J,travel_time_s,avg_solve_s,total_solve_s";

    pub fn total_solve_time(&self) -> f64 {
        self.records.iter().map(|r| r.decision.solve_time).sum()
    }

    /// Solver time averaged over every control sample.
    pub fn average_solve_time(&self) -> f64 {
        if self.records.is_empty() {
            0.0
        } else {
            self.total_solve_time() / self.records.len() as f64
        }
    }

    pub fn max_solve_time(&self) -> f64 {
        self.records.iter().map(|r| r.decision.solve_time).fold(0.0, f64::max)
    }

    pub fn solver_invocations(&self) -> usize {
        self.records.iter().filter(|r| r.decision.solver_invoked).count()
    }

    pub fn solver_fraction(&self) -> f64 {
        if self.records.is_empty() {
            0.0
        } else {
            self.solver_invocations() as f64 / self.records.len() as f64
        }
    }

    pub fn applied_forces(&self) -> Vec<ThrusterForces> {
        self.records.iter().map(|r| r.forces).collect()
    }

    pub fn trace_csv(&self) -> String {
        let mut out = String::from(Self::TRACE_HEADER);
        out.push('\n');
        for r in &self.records {
            let (eta, nu, f) = (&r.state.eta, &r.state.nu, &r.forces);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.t,
                eta[0],
                eta[1],
                eta[2],
                eta[3],
                eta[4],
                eta[5],
                nu[0],
                nu[1],
                nu[2],
                nu[3],
                nu[4],
                nu[5],
                f.t1,
                f.t2,
                f.t3,
                f.t4,
                r.decision.thrust,
                r.decision.solver_invoked as u8,
                r.decision.solve_time
            );
        }
        out
    }

    pub fn decisions_csv(&self) -> String {
        let mut out = String::from(Self::DECISION_HEADER);
        out.push('\n');
        for r in &self.records {
            let cost = r.decision.predicted_cost.map_or(String::new(), |c| c.to_string());
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.t, r.decision.thrust, r.decision.solver_invoked as u8, r.decision.solve_time, cost
            );
        }
        out
    }

    pub fn summary_row(&self) -> String {
        let l = &self.ledger;
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.controller.label(),
            l.surge,
            l.heave,
            l.pitch,
            l.yaw,
            l.total,
            self.travel_time,
            self.average_solve_time(),
            self.total_solve_time()
        )
    }
}

/// Bounds every logged step must respect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintEnvelope {
    pub thrust: f64,
    pub y: f64,
    pub z: f64,
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
}

impl Default for ConstraintEnvelope {
    fn default() -> Self {
        Self { thrust: 15.72, y: 0.01, z: 0.005, phi: 0.2, theta: 0.01, psi: 0.01 }
    }
}

impl ConstraintEnvelope {
    /// Describes the first violated bound at each offending step.
    pub fn audit(&self, log: &SimLog) -> Vec<String> {
        let mut issues = Vec::new();
        let states = log.records.iter().map(|r| (r.t, r.state)).chain(std::iter::once((log.travel_time, log.final_state)));
        for (t, s) in states {
            let checks = [
                ("y", s.eta[1], self.y),
                ("z", s.eta[2], self.z),
                ("phi", s.eta[3], self.phi),
                ("theta", s.eta[4], self.theta),
                ("psi", s.eta[5], self.psi),
            ];
            if let Some((name, value, bound)) = checks.iter().find(|(_, v, b)| v.abs() > *b) {
                issues.push(format!("t = {t:.1} s: |{name}| = {:.3e} > {bound}", value.abs()));
            }
        }
        for r in &log.records {
            let applied = r.forces.total_horizontal();
            if r.decision.thrust.abs() > self.thrust || applied.abs() > self.thrust + 1e-9 {
                issues.push(format!("t = {:.1} s: |T_total| = {} > {}", r.t, r.decision.thrust.abs(), self.thrust));
            }
        }
        issues
    }
}

pub fn build_controller(sc: &Scenario) -> Result<Box<dyn SurgeController>, SimError> {
    let cfg = sc.mpc_config();
    Ok(match sc.controller {
        ControllerKind::Tracking => Box::new(TrackingMpc::new(cfg, &sc.vehicle)?),
        ControllerKind::EnergyOptimal => Box::new(EnergyOptimalMpc::new(cfg, &sc.vehicle)?),
        ControllerKind::Rteo => Box::new(RteoMpc::new(cfg, &sc.vehicle, sc.switch)?),
    })
}

/// Runs one closed-loop trip until arrival or the time limit.
pub fn run_scenario(sc: &Scenario) -> Result<SimLog, SimError> {
    sc.validate()?;
    let model = AuvModel::new(sc.vehicle).map_err(ScenarioError::from)?;
    let mut controller = build_controller(sc)?;
    let mut autopilot = Autopilot::new(sc.pid, &sc.vehicle);

    let mut state = VehicleState::surging(sc.x0, sc.u0);
    let goal = sc.xf - sc.stop_tolerance;
    let max_steps = (sc.max_time / sc.dt).ceil() as usize;
    let mut records = Vec::new();
    let mut ledger = EnergyLedger::default();
    let mut saturation_events = 0;
    let mut steps = 0usize;

    while state.x() < goal && sc.xf > sc.x0 && steps < max_steps {
        let t = steps as f64 * sc.dt;
        let decision = controller.decide(&state);
        let demand = autopilot.step(&state, sc.dt);
        let mixed = mix(decision.thrust, demand.pitch, demand.yaw, demand.heave, &sc.vehicle, sc.thruster_limit);
        saturation_events += mixed.saturated as usize;
        records.push(StepRecord { t, state, forces: mixed.forces, decision });
        ledger.record(&mixed.forces, sc.dt, &sc.vehicle);
        let tau = thruster_allocation(&mixed.forces, &sc.vehicle);
        state = model.integrate_step(&state, &tau, sc.dt).map_err(|source| SimError::Plant { t, source })?;
        steps += 1;
    }
    let reached = state.x() >= goal || sc.xf <= sc.x0;
    if !reached {
        log::warn!("{}: time limit of {} s reached at x = {:.3} m", sc.controller.label(), sc.max_time, state.x());
    }
    Ok(SimLog {
        controller: sc.controller,
        records,
        final_state: state,
        ledger,
        travel_time: steps as f64 * sc.dt,
        reached,
        saturation_events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::trip_energy;

    #[test]
    fn zero_distance_terminates_immediately() {
        let sc = Scenario { xf: 0.0, ..Scenario::default() };
        let log = run_scenario(&sc).unwrap();
        assert!(log.records.is_empty());
        assert!(log.reached);
        assert_eq!(log.ledger.total, 0.0);
    }

    #[test]
    fn short_trip_reaches_goal_with_consistent_ledger() {
        let sc = Scenario { xf: 1.0, ..Scenario::default() };
        let log = run_scenario(&sc).unwrap();
        assert!(log.reached);
        assert!(log.final_state.x() >= 0.99);
        let direct = trip_energy(&log.applied_forces(), sc.dt, &sc.vehicle);
        assert!((direct.total - log.ledger.total).abs() <= 1e-9 * direct.total);
        assert!(ConstraintEnvelope::default().audit(&log).is_empty());
        for w in log.records.windows(2) {
            assert!(w[1].t > w[0].t);
        }
        assert_eq!(log.trace_csv().lines().count(), log.records.len() + 1);
        assert_eq!(log.summary_row().split(',').count(), SimLog::SUMMARY_HEADER.split(',').count());
    }

    #[test]
    fn time_limit_is_flagged() {
        let sc = Scenario { max_time: 1.0, ..Scenario::default() };
        let log = run_scenario(&sc).unwrap();
        assert!(!log.reached);
        assert_eq!(log.records.len(), 10);
    }
}

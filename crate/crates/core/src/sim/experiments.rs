//! Experiment drivers: controller comparison, horizon sweep and the
//! initial-condition robustness grid.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use super::{run_scenario, ControllerKind, Scenario, SimError, SimLog};
use crate::collocation::{resample_oracle, solve_dc, CollocationProblem, CollocationSolution};

/// Collocation problem matching a scenario's trip and thrust bounds.
pub fn oracle_problem(sc: &Scenario) -> CollocationProblem {
    CollocationProblem {
        segments: sc.oracle_segments,
        x0: sc.x0,
        xf: sc.xf,
        u0: sc.u0,
        thrust_min: sc.mpc.thrust_min,
        thrust_max: sc.mpc.thrust_max,
        ..CollocationProblem::default()
    }
}

#[derive(Debug, Clone)]
pub struct OracleRun {
    pub solution: CollocationSolution,
    pub solve_time: f64,
}

pub fn run_oracle(sc: &Scenario) -> Result<OracleRun, SimError> {
    sc.validate()?;
    let start = Instant::now();
    let solution = solve_dc(&oracle_problem(sc), &sc.vehicle)
        .map_err(|e| super::ScenarioError::Invalid(format!("collocation oracle failed: {e}")))?;
    Ok(OracleRun { solution, solve_time: start.elapsed().as_secs_f64() })
}

fn loss_pct(energy: f64, reference: f64) -> f64 {
    100.0 * (energy - reference) / reference
}

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub oracle: OracleRun,
    /// One log per controller, in `ControllerKind::ALL` order.
    pub runs: Vec<SimLog>,
}

impl ComparisonReport {
    pub fn run(&self, kind: ControllerKind) -> Option<&SimLog> {
        self.runs.iter().find(|r| r.controller == kind)
    }

    pub fn loss_pct(&self, kind: ControllerKind) -> Option<f64> {
        self.run(kind).map(|r| loss_pct(r.ledger.total, self.oracle.solution.energy))
    }

    pub fn summary_csv(&self) -> String {
        let mut out = format!("{}\n", SimLog::SUMMARY_HEADER);
        let o = &self.oracle;
        let _ = writeln!(
            out,
            "DC,,,,,{},{},,{}",
            o.solution.energy, o.solution.travel_time, o.solve_time
        );
        for r in &self.runs {
            let _ = writeln!(out, "{}", r.summary_row());
        }
        out
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<10} {:>16} {:>12} {:>10} {:>20} {:>16} {:>14}",
            "Method", "Travel time (s)", "Energy (J)", "Loss (%)", "Avg CPU / step (s)", "Total CPU (s)", "Solver steps"
        );
        let o = &self.oracle;
        let _ = writeln!(
            out,
            "{:<10} {:>16.2} {:>12.2} {:>10} {:>20} {:>16.4} {:>14}",
            "DC", o.solution.travel_time, o.solution.energy, "-", "-", o.solve_time, "-"
        );
        for r in &self.runs {
            let _ = writeln!(
                out,
                "{:<10} {:>16.2} {:>12.2} {:>10.2} {:>20.6} {:>16.4} {:>14}",
                r.controller.label(),
                r.travel_time,
                r.ledger.total,
                loss_pct(r.ledger.total, o.solution.energy),
                r.average_solve_time(),
                r.total_solve_time(),
                format!("{}/{}", r.solver_invocations(), r.records.len())
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<10} {:>10} {:>10} {:>10} {:>10} {:>10}",
            "Method", "surge (J)", "heave (J)", "pitch (J)", "yaw (J)", "total (J)"
        );
        for r in &self.runs {
            let l = &r.ledger;
            let _ = writeln!(
                out,
                "{:<10} {:>10.3} {:>10.3} {:>10.4} {:>10.4} {:>10.3}",
                r.controller.label(),
                l.surge,
                l.heave,
                l.pitch,
                l.yaw,
                l.total
            );
        }
        out
    }
}

/// Runs the collocation oracle and every controller on the same scenario.
/// Controllers run one after another so their timings are comparable.
pub fn compare_controllers(sc: &Scenario) -> Result<ComparisonReport, SimError> {
    let oracle = run_oracle(sc)?;
    let runs = ControllerKind::ALL
        .iter()
        .map(|&kind| run_scenario(&sc.with_controller(kind)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ComparisonReport { oracle, runs })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HorizonPoint {
    pub horizon: usize,
    pub energy: f64,
    pub travel_time: f64,
    /// Per-step solve time, averaged over steps and repeats.
    pub average_solve_time: f64,
    /// Largest per-step solve time, averaged over repeats.
    pub max_solve_time: f64,
    pub reached: bool,
}

#[derive(Debug, Clone)]
pub struct HorizonSweep {
    pub points: Vec<Result<HorizonPoint, String>>,
    pub oracle_energy: Option<f64>,
}

impl HorizonSweep {
    pub const CSV_HEADER: &'static str = "horizon,total_J,travel_time_s,avg_solve_s,max_solve_s,reached,error";

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for p in &self.points {
            let _ = match p {
                Ok(p) => writeln!(
                    out,
                    "{},{},{},{},{},{},",
                    p.horizon, p.energy, p.travel_time, p.average_solve_time, p.max_solve_time, p.reached
                ),
                Err(e) => writeln!(out, ",,,,,,{}", e.replace(',', ";")),
            };
        }
        out
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>8} {:>12} {:>16} {:>20} {:>18} {:>10}",
            "N", "Energy (J)", "Travel time (s)", "Avg CPU / step (s)", "Max CPU / step (s)", "Loss (%)"
        );
        for p in &self.points {
            match p {
                Ok(p) => {
                    let loss = self.oracle_energy.map_or("-".to_string(), |o| format!("{:.2}", loss_pct(p.energy, o)));
                    let _ = writeln!(
                        out,
                        "{:>8} {:>12.3} {:>16.2} {:>20.6} {:>18.6} {:>10}",
                        p.horizon, p.energy, p.travel_time, p.average_solve_time, p.max_solve_time, loss
                    );
                }
                Err(e) => {
                    let _ = writeln!(out, "{:>8} failed: {e}", "-");
                }
            }
        }
        if let Some(o) = self.oracle_energy {
            let _ = writeln!(out, "\noracle energy: {o:.3} J");
        }
        out
    }
}

/// One energy-optimal run per horizon, each repeated `repeats` times for
/// timing. Runs are sequential so timings do not compete for cores.
pub fn sweep_horizon(base: &Scenario, horizons: &[usize], repeats: usize, with_oracle: bool) -> Result<HorizonSweep, SimError> {
    if horizons.is_empty() {
        return Err(super::ScenarioError::Invalid("horizon list is empty".into()).into());
    }
    let repeats = repeats.max(1);
    let points = horizons
        .iter()
        .map(|&horizon| {
            let mut sc = base.with_controller(ControllerKind::EnergyOptimal);
            sc.mpc.horizon = horizon;
            let mut first: Option<SimLog> = None;
            let (mut avg, mut max) = (0.0, 0.0);
            for _ in 0..repeats {
                let log = run_scenario(&sc).map_err(|e| format!("N = {horizon}: {e}"))?;
                avg += log.average_solve_time();
                max += log.max_solve_time();
                first.get_or_insert(log);
            }
            let log = first.expect("at least one repeat");
            Ok(HorizonPoint {
                horizon,
                energy: log.ledger.total,
                travel_time: log.travel_time,
                average_solve_time: avg / repeats as f64,
                max_solve_time: max / repeats as f64,
                reached: log.reached,
            })
        })
        .collect();
    let oracle_energy = if with_oracle { Some(run_oracle(base)?.solution.energy) } else { None };
    Ok(HorizonSweep { points, oracle_energy })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcCell {
    pub x0: f64,
    pub u0: f64,
    pub oracle: Result<f64, String>,
    pub rteo: Result<f64, String>,
    pub tracking: Result<f64, String>,
}

impl IcCell {
    fn gap(&self, energy: &Result<f64, String>) -> Option<f64> {
        match (&self.oracle, energy) {
            (Ok(o), Ok(e)) if *o > 0.0 => Some((e - o) / o),
            _ => None,
        }
    }

    /// Relative gap of RTEO-MPC over the oracle.
    pub fn rteo_gap(&self) -> Option<f64> {
        self.gap(&self.rteo)
    }

    pub fn tracking_gap(&self) -> Option<f64> {
        self.gap(&self.tracking)
    }
}

#[derive(Debug, Clone)]
pub struct IcSweep {
    pub xf: f64,
    pub cells: Vec<IcCell>,
}

impl IcSweep {
    pub const CSV_HEADER: &'static str = "x0,u0,oracle_J,rteo_J,tmpc_J,rteo_gap,tmpc_gap,error";

    pub fn to_csv(&self) -> String {
        let fmt = |r: &Result<f64, String>| r.as_ref().map_or(String::new(), |v| v.to_string());
        let fmt_gap = |g: Option<f64>| g.map_or(String::new(), |v| v.to_string());
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for c in &self.cells {
            let errors: Vec<&str> = [&c.oracle, &c.rteo, &c.tracking]
                .iter()
                .filter_map(|r| r.as_ref().err().map(String::as_str))
                .collect();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                c.x0,
                c.u0,
                fmt(&c.oracle),
                fmt(&c.rteo),
                fmt(&c.tracking),
                fmt_gap(c.rteo_gap()),
                fmt_gap(c.tracking_gap()),
                errors.join(" | ").replace(',', ";")
            );
        }
        out
    }

    pub fn worst_gap(&self, kind: ControllerKind, min_distance: f64) -> Option<f64> {
        self.cells
            .iter()
            .filter(|c| self.xf - c.x0 > min_distance)
            .filter_map(|c| match kind {
                ControllerKind::Tracking => c.tracking_gap(),
                _ => c.rteo_gap(),
            })
            .fold(None, |acc: Option<f64>, g| Some(acc.map_or(g, |a| a.max(g))))
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>8} {:>8} {:>12} {:>12} {:>12} {:>12} {:>12}",
            "x0 (m)", "u0 (m/s)", "oracle (J)", "RTEO (J)", "T-MPC (J)", "RTEO gap %", "T-MPC gap %"
        );
        let num = |r: &Result<f64, String>| r.as_ref().map_or("failed".to_string(), |v| format!("{v:.3}"));
        let pct = |g: Option<f64>| g.map_or("-".to_string(), |v| format!("{:.2}", 100.0 * v));
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{:>8.2} {:>8.3} {:>12} {:>12} {:>12} {:>12} {:>12}",
                c.x0,
                c.u0,
                num(&c.oracle),
                num(&c.rteo),
                num(&c.tracking),
                pct(c.rteo_gap()),
                pct(c.tracking_gap())
            );
        }
        out
    }
}

/// Evenly spaced grid over `[lo, hi]` with `n` points.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// RTEO-MPC and T-MPC from every `(x0, u0)` pair, each against the oracle
/// for the remaining distance. Cells run in parallel; order is row-major
/// in `x0` then `u0`.
pub fn sweep_initial_conditions(base: &Scenario, x0s: &[f64], u0s: &[f64]) -> Result<IcSweep, SimError> {
    base.validate()?;
    if let Some(x0) = x0s.iter().find(|&&x| !(x <= base.xf)) {
        return Err(super::ScenarioError::Invalid(format!("x0 = {x0} lies beyond xf = {}", base.xf)).into());
    }
    if let Some(u0) = u0s.iter().find(|&&u| !(u >= 0.0)) {
        return Err(super::ScenarioError::Invalid(format!("u0 = {u0} is negative")).into());
    }
    let grid: Vec<(f64, f64)> = x0s.iter().flat_map(|&x| u0s.iter().map(move |&u| (x, u))).collect();
    let cells = grid
        .par_iter()
        .map(|&(x0, u0)| {
            let sc = Scenario { x0, u0, ..base.clone() };
            let energy = |kind| {
                run_scenario(&sc.with_controller(kind)).map_err(|e| e.to_string()).and_then(|log| {
                    if log.reached {
                        Ok(log.ledger.total)
                    } else {
                        Err(format!("{} did not arrive within {} s", kind.label(), sc.max_time))
                    }
                })
            };
            IcCell {
                x0,
                u0,
                oracle: resample_oracle(base.xf - x0, u0, &base.vehicle).map_err(|e| e.to_string()),
                rteo: energy(ControllerKind::Rteo),
                tracking: energy(ControllerKind::Tracking),
            }
        })
        .collect();
    Ok(IcSweep { xf: base.xf, cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(0.0, 10.0, 6), vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        assert_eq!(linspace(1.0, 2.0, 1), vec![1.0]);
        assert!(linspace(0.0, 1.0, 0).is_empty());
    }

    #[test]
    fn empty_horizon_list_is_rejected() {
        assert!(sweep_horizon(&Scenario::default(), &[], 1, false).is_err());
    }

    #[test]
    fn ic_sweep_rejects_start_beyond_goal() {
        assert!(sweep_initial_conditions(&Scenario::default(), &[11.0], &[0.0]).is_err());
    }

    #[test]
    fn ic_cell_gap_needs_positive_oracle() {
        let cell = IcCell { x0: 10.0, u0: 0.0, oracle: Ok(0.0), rteo: Ok(0.0), tracking: Ok(0.0) };
        assert_eq!(cell.rteo_gap(), None);
        let cell = IcCell { x0: 0.0, u0: 0.0, oracle: Ok(50.0), rteo: Ok(51.0), tracking: Err("x".into()) };
        assert!((cell.rteo_gap().unwrap() - 0.02).abs() < 1e-12);
        assert_eq!(cell.tracking_gap(), None);
    }
}

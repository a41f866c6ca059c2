use auv_energy::energy::trip_energy;
use auv_energy::sim::experiments::{compare_controllers, run_oracle, sweep_horizon};
use auv_energy::sim::{run_scenario, ConstraintEnvelope, ControllerKind, Scenario, SimLog};
use proptest::prelude::*;

fn without_timing(log: &SimLog) -> SimLog {
    let mut log = log.clone();
    for r in &mut log.records {
        r.decision.solve_time = 0.0;
    }
    log
}

#[test]
fn runs_are_deterministic() {
    for kind in ControllerKind::ALL {
        let sc = Scenario { xf: 3.0, ..Scenario::default() }.with_controller(kind);
        let a = run_scenario(&sc).unwrap();
        let b = run_scenario(&sc).unwrap();
        assert_eq!(without_timing(&a), without_timing(&b), "{}", kind.label());
    }
}

#[test]
fn reference_trip_respects_envelope_and_ledger() {
    let sc = Scenario::default();
    let report = compare_controllers(&sc).unwrap();
    let oracle = report.oracle.solution.energy;
    for log in &report.runs {
        let label = log.controller.label();
        assert!(log.reached, "{label} did not arrive");
        let issues = ConstraintEnvelope::default().audit(log);
        assert!(issues.is_empty(), "{label}: {issues:?}");
        let direct = trip_energy(&log.applied_forces(), sc.dt, &sc.vehicle);
        assert!((direct.total - log.ledger.total).abs() <= 1e-9 * direct.total);
        assert!((log.ledger.component_sum() - log.ledger.total).abs() <= 1e-9 * log.ledger.total);
        assert!(log.ledger.total >= oracle * (1.0 - 0.005), "{label}: {} below oracle {oracle}", log.ledger.total);
        assert!(log.max_solve_time() < sc.dt, "{label}: slowest solve {} s", log.max_solve_time());
        for w in log.records.windows(2) {
            assert!((w[1].t - w[0].t - sc.dt).abs() < 1e-9);
        }
    }
    let rteo = report.run(ControllerKind::Rteo).unwrap();
    assert!(rteo.solver_fraction() < 0.5, "solver on {:.1}% of steps", 100.0 * rteo.solver_fraction());
    let eo = report.run(ControllerKind::EnergyOptimal).unwrap();
    assert_eq!(eo.solver_invocations(), eo.records.len());
}

#[test]
fn one_step_horizon_is_materially_worse() {
    let sweep = sweep_horizon(&Scenario::default(), &[1, 15], 1, false).unwrap();
    let energy: Vec<f64> = sweep.points.iter().map(|p| p.as_ref().unwrap().energy).collect();
    assert!(energy[0] > energy[1] * 1.01, "{energy:?}");
}

#[test]
fn oracle_matches_scenario_bounds() {
    let sc = Scenario { xf: 5.0, u0: 0.2, ..Scenario::default() };
    let run = run_oracle(&sc).unwrap();
    assert_eq!(run.solution.u[0], 0.2);
    assert!((run.solution.x.last().unwrap() - 5.0).abs() < 1e-9);
    assert!(run.solution.thrust.iter().all(|t| t.abs() <= 15.72));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn every_controller_stays_in_envelope(
        x0 in 0.0..9.0f64,
        u0 in 0.0..0.5f64,
        kind in prop::sample::select(ControllerKind::ALL.to_vec()),
    ) {
        let sc = Scenario { x0, u0, ..Scenario::default() }.with_controller(kind);
        let log = run_scenario(&sc).unwrap();
        prop_assert!(log.reached);
        let issues = ConstraintEnvelope::default().audit(&log);
        prop_assert!(issues.is_empty(), "{:?}", issues);
    }
}

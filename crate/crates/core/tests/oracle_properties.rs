use auv_energy::collocation::{resample_oracle, solve_dc, CollocationProblem};
use auv_energy::dynamics::{thruster_power, VehicleParams};
use auv_energy::energy::{epd, hover_power, static_optimal_velocity};
use auv_energy::mpc::{terminal_cost, EnergyTerms};
use auv_energy::surge::SurgeState;

fn params() -> VehicleParams {
    VehicleParams::default()
}

#[test]
fn long_trip_from_static_optimum_cruises_at_it() {
    let p = params();
    let u_star = static_optimal_velocity(&p).unwrap();
    let sol = solve_dc(&CollocationProblem::trip(50.0, u_star), &p).unwrap();
    let near = sol.u.iter().filter(|u| (*u - u_star).abs() <= 0.02 * u_star).count();
    assert!(near as f64 >= 0.9 * sol.u.len() as f64, "{near} of {} nodes near u*", sol.u.len());
    let steady = 50.0 * epd(u_star, &p).unwrap();
    assert!((sol.energy - steady).abs() <= 0.01 * steady, "{} vs {steady}", sol.energy);
}

#[test]
fn reported_energy_is_trapezoidal_sum_of_thruster_power() {
    let p = params();
    let sol = solve_dc(&CollocationProblem::trip(10.0, 0.0), &p).unwrap();
    let n = sol.thrust.len() - 1;
    let h = sol.travel_time / n as f64;
    let heave = hover_power(&p).unwrap();
    let energy: f64 = sol
        .thrust
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            w * h * 2.0 * thruster_power(0.5 * t, &p)
        })
        .sum::<f64>()
        + heave * sol.travel_time;
    assert!((energy - sol.energy).abs() <= 1e-9 * energy);
    assert!(sol.defect_residual <= 1e-6);
    assert!(sol.kkt_residual <= 1e-6);
    assert!((sol.x[n] - 10.0).abs() <= 1e-9);
    assert_eq!(sol.u[0], 0.0);
    for w in sol.times.windows(2) {
        assert!(w[1] > w[0]);
    }
}

#[test]
fn transcription_converges_under_refinement() {
    let p = params();
    for (distance, u0) in [(10.0, 0.0), (4.0, 0.4)] {
        let energy = |n| solve_dc(&CollocationProblem { segments: n, ..CollocationProblem::trip(distance, u0) }, &p).unwrap().energy;
        let (coarse, fine) = (energy(150), energy(300));
        assert!((coarse - fine).abs() <= 1e-3 * fine, "{distance} m from {u0}: {coarse} vs {fine}");
    }
}

#[test]
fn oracle_energy_grows_with_distance() {
    let p = params();
    for u0 in [0.0, 0.14, 0.5] {
        let energies: Vec<f64> = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0]
            .iter()
            .map(|&d| resample_oracle(d, u0, &p).unwrap())
            .collect();
        assert_eq!(energies[0], 0.0);
        for w in energies.windows(2) {
            assert!(w[1] >= w[0], "u0 = {u0}: {energies:?}");
        }
    }
}

#[test]
fn cost_to_go_estimate_is_accurate_only_near_static_optimum() {
    let p = params();
    let terms = EnergyTerms::new(&p).unwrap();
    let u_star = static_optimal_velocity(&p).unwrap();
    let estimate = |u: f64| terminal_cost(&SurgeState::new(0.0, u), 10.0, 1e-3, &terms);

    let near = estimate(u_star) - resample_oracle(10.0, u_star, &p).unwrap();
    assert!(near.abs() <= 1.0, "gap at u* = {near}");

    let far = estimate(0.4) - resample_oracle(10.0, 0.4, &p).unwrap();
    assert!(far > 0.0, "gap at 0.4 m/s = {far}");
}

#[test]
fn negative_remaining_distance_is_rejected() {
    assert!(resample_oracle(-1.0, 0.0, &params()).is_err());
}

use auv_energy::dynamics::{AuvModel, GeneralizedForce, VehicleParams, VehicleState};
use auv_energy::energy::{cruise_thrust, static_optimal_velocity};
use auv_energy::surge::{FrozenContext, SurgeModel, SurgeState};
use proptest::prelude::*;

const DT: f64 = 0.1;
const STEPS: usize = 15;

fn plant_trace(params: &VehicleParams, u0: f64, inputs: &[f64]) -> Vec<(f64, f64)> {
    let plant = AuvModel::new(*params).unwrap();
    let mut s = VehicleState::surging(0.0, u0);
    let mut out = vec![(s.x(), s.u())];
    for &t in inputs {
        let tau = GeneralizedForce { x: t, z: params.net_buoyancy(), ..GeneralizedForce::default() };
        s = plant.integrate_step(&s, &tau, DT).unwrap();
        out.push((s.x(), s.u()));
    }
    out
}

/// The surge equation itself, integrated with the plant's fourth-order scheme.
fn surge_rk4_trace(model: &SurgeModel, u0: f64, inputs: &[f64]) -> Vec<(f64, f64)> {
    let ctx = FrozenContext::default();
    let f = |s: SurgeState, t: f64| model.derivative(&s, &ctx, t);
    let mut s = SurgeState::new(0.0, u0);
    let mut out = vec![(s.x, s.u)];
    for &t in inputs {
        let k1 = f(s, t);
        let k2 = f(SurgeState::new(s.x + 0.5 * DT * k1.0, s.u + 0.5 * DT * k1.1), t);
        let k3 = f(SurgeState::new(s.x + 0.5 * DT * k2.0, s.u + 0.5 * DT * k2.1), t);
        let k4 = f(SurgeState::new(s.x + DT * k3.0, s.u + DT * k3.1), t);
        s = SurgeState::new(
            s.x + DT / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            s.u + DT / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        );
        out.push((s.x, s.u));
    }
    out
}

fn within_one_percent(a: &[(f64, f64)], b: &[(f64, f64)]) -> Result<(), String> {
    for (k, (p, q)) in a.iter().zip(b).enumerate().skip(1) {
        let ex = (p.0 - q.0).abs();
        let eu = (p.1 - q.1).abs();
        if ex > 0.01 * p.0.abs().max(1e-6) || eu > 0.01 * p.1.abs().max(1e-6) {
            return Err(format!("step {k}: plant {p:?} vs surge {q:?}"));
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn surge_equation_matches_full_plant(
        u0 in 0.0..0.5f64,
        inputs in prop::collection::vec(0.0..15.72f64, STEPS),
    ) {
        let p = VehicleParams::default();
        let plant = plant_trace(&p, u0, &inputs);
        let surge = surge_rk4_trace(&SurgeModel::new(&p), u0, &inputs);
        prop_assert!(within_one_percent(&plant, &surge).is_ok(), "{:?}", within_one_percent(&plant, &surge));
    }

    #[test]
    fn euler_prediction_tracks_plant_near_cruise(
        du in -0.03..0.03f64,
        offsets in prop::collection::vec(-1.0..1.0f64, STEPS),
    ) {
        let p = VehicleParams::default();
        let u_star = static_optimal_velocity(&p).unwrap();
        let u0 = u_star + du;
        let inputs: Vec<f64> = offsets.iter().map(|o| cruise_thrust(u_star, &p) + o).collect();
        let plant = plant_trace(&p, u0, &inputs);
        let model = SurgeModel::new(&p);
        let euler: Vec<(f64, f64)> = model
            .rollout(&SurgeState::new(0.0, u0), &FrozenContext::default(), &inputs, DT)
            .iter()
            .map(|s| (s.x, s.u))
            .collect();
        for (k, (a, b)) in plant.iter().zip(&euler).enumerate() {
            prop_assert!((a.1 - b.1).abs() <= 0.01 * a.1, "speed at step {}: {:?} vs {:?}", k, a, b);
        }
        let (end_plant, end_euler) = (plant[STEPS], euler[STEPS]);
        prop_assert!((end_plant.0 - end_euler.0).abs() <= 0.01 * end_plant.0, "{:?} vs {:?}", end_plant, end_euler);
    }
}

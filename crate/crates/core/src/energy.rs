//! Thruster energy bookkeeping and the steady-cruise energy trade-off.
//!
//! A positively buoyant vehicle pays a constant hover power to stay at depth,
//! so slow transits waste energy on heave while fast ones waste it on drag.
//! The energy per distance travelled at constant speed `u` is
//!
//! ```text
//! EPD(u) = a u² + P_hover / u,   a = (√2/2) C_p X_uu^1.5
//! ```
//!
//! whose minimizer is the static optimal cruise speed `u* = (P_hover / 2a)^(1/3)`.

use std::f64::consts::FRAC_1_SQRT_2;

use thiserror::Error;

use crate::dynamics::{thruster_power, ThrusterForces, VehicleParams};

#[derive(Debug, Error, PartialEq)]
pub enum EnergyError {
    #[error("speed must be positive, got {0} m/s")]
    NonPositiveSpeed(f64),
    #[error("hover power needs B >= W (B − W = {0} N)")]
    NegativeBuoyancy(f64),
    #[error("static optimum needs B > W (B − W = {0} N)")]
    NoStaticOptimum(f64),
    #[error("distance must be non-negative, got {0} m")]
    NegativeDistance(f64),
}

/// Cumulative thruster energy split by degree of freedom.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnergyLedger {
    pub surge: f64,
    pub heave: f64,
    pub pitch: f64,
    pub yaw: f64,
    pub total: f64,
    pub travel_time: f64,
}

impl EnergyLedger {
    pub const CSV_HEADER: &'static str = "surge_J,heave_J,pitch_J,yaw_J,total_J,t_travel_s";

    /// Adds one sample of thruster forces held for `dt` seconds.
    ///
    /// Each thruster pair's actual power is split between its common-mode
    /// (surge or heave) and differential (yaw or pitch) components in
    /// proportion to the power each component would draw on its own.
    pub fn record(&mut self, forces: &ThrusterForces, dt: f64, params: &VehicleParams) {
        let (surge, yaw) = split_pair(forces.t1, forces.t2, params);
        let (heave, pitch) = split_pair(forces.t3, forces.t4, params);
        self.surge += surge * dt;
        self.yaw += yaw * dt;
        self.heave += heave * dt;
        self.pitch += pitch * dt;
        let total: f64 = forces.as_array().iter().map(|&t| thruster_power(t, params)).sum();
        self.total += total * dt;
        self.travel_time += dt;
    }

    /// Appends the energy and time of a later trip segment.
    pub fn merge(&mut self, other: &EnergyLedger) {
        self.surge += other.surge;
        self.heave += other.heave;
        self.pitch += other.pitch;
        self.yaw += other.yaw;
        self.total += other.total;
        self.travel_time += other.travel_time;
    }

    pub fn component_sum(&self) -> f64 {
        self.surge + self.heave + self.pitch + self.yaw
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.surge, self.heave, self.pitch, self.yaw, self.total, self.travel_time
        )
    }
}

fn split_pair(a: f64, b: f64, params: &VehicleParams) -> (f64, f64) {
    let actual = thruster_power(a, params) + thruster_power(b, params);
    let common = 2.0 * thruster_power(0.5 * (a + b), params);
    let differential = 2.0 * thruster_power(0.5 * (a - b), params);
    let sum = common + differential;
    if differential == 0.0 {
        return (actual, 0.0);
    }
    if common == 0.0 {
        return (0.0, actual);
    }
    let common_share = actual * common / sum;
    (common_share, actual - common_share)
}

/// Energy drawn by a sequence of thruster commands, each held for `dt`.
pub fn trip_energy(inputs: &[ThrusterForces], dt: f64, params: &VehicleParams) -> EnergyLedger {
    assert!(dt > 0.0, "sample time must be positive");
    let mut ledger = EnergyLedger::default();
    for f in inputs {
        ledger.record(f, dt, params);
    }
    ledger
}

/// Power the vertical thruster pair spends cancelling net buoyancy.
pub fn hover_power(params: &VehicleParams) -> Result<f64, EnergyError> {
    let net = params.net_buoyancy();
    if net < 0.0 {
        return Err(EnergyError::NegativeBuoyancy(net));
    }
    Ok(FRAC_1_SQRT_2 * params.power_ratio() * net.powf(1.5))
}

/// Coefficient `a` of the steady surge power `a u³` drawn by the horizontal pair.
pub fn drag_power_coefficient(params: &VehicleParams) -> f64 {
    FRAC_1_SQRT_2 * params.power_ratio() * params.X_uu.powf(1.5)
}

/// Horizontal thrust that balances drag at speed `u`.
pub fn cruise_thrust(u: f64, params: &VehicleParams) -> f64 {
    params.X_uu * u.abs() * u
}

/// Energy per metre at steady speed `u` (J/m).
pub fn epd(u: f64, params: &VehicleParams) -> Result<f64, EnergyError> {
    if !(u > 0.0) {
        return Err(EnergyError::NonPositiveSpeed(u));
    }
    Ok(drag_power_coefficient(params) * u * u + hover_power(params)? / u)
}

/// Speed minimizing [`epd`].
pub fn static_optimal_velocity(params: &VehicleParams) -> Result<f64, EnergyError> {
    let net = params.net_buoyancy();
    if !(net > 0.0) {
        return Err(EnergyError::NoStaticOptimum(net));
    }
    let a = drag_power_coefficient(params);
    Ok((hover_power(params)? / (2.0 * a)).cbrt())
}

/// Steady-cruise energy for `distance` metres at `speed`.
pub fn static_trip_cost(distance: f64, speed: f64, params: &VehicleParams) -> Result<f64, EnergyError> {
    if distance < 0.0 {
        return Err(EnergyError::NegativeDistance(distance));
    }
    if distance == 0.0 {
        return Ok(0.0);
    }
    Ok(distance * epd(speed, params)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p() -> VehicleParams {
        VehicleParams::default()
    }

    #[test]
    fn trip_energy_examples() {
        let p = p();
        let zeros = vec![ThrusterForces::default(); 50];
        assert_eq!(trip_energy(&zeros, 0.1, &p).total, 0.0);
        let ones = vec![ThrusterForces::new(1.0, 1.0, 1.0, 1.0); 100];
        let ledger = trip_energy(&ones, 0.1, &p);
        assert_relative_eq!(ledger.total, 19.94, epsilon = 5e-3);
        assert_relative_eq!(ledger.travel_time, 10.0, epsilon = 1e-12);
        assert_relative_eq!(ledger.surge, ledger.total / 2.0, epsilon = 1e-9);
        assert_eq!(ledger.yaw, 0.0);
    }

    #[test]
    fn differential_thrust_is_attributed_to_yaw_and_pitch() {
        let p = p();
        let ledger = trip_energy(&[ThrusterForces::new(1.0, -1.0, 0.5, -0.5)], 1.0, &p);
        assert_eq!(ledger.surge, 0.0);
        assert_eq!(ledger.heave, 0.0);
        assert!(ledger.yaw > 0.0 && ledger.pitch > 0.0);
        assert_relative_eq!(ledger.component_sum(), ledger.total, max_relative = 1e-12);
    }

    #[test]
    fn hover_power_examples() {
        let mut p = p();
        assert_relative_eq!(hover_power(&p).unwrap(), 0.628, max_relative = 1e-3);
        // Heave energy over travel time reported for the optimal trip.
        assert_relative_eq!(hover_power(&p).unwrap(), 46.28 / 74.04, max_relative = 0.01);
        p.buoyancy = p.weight;
        assert_eq!(hover_power(&p).unwrap(), 0.0);
        p.buoyancy = p.weight - 1.0;
        assert!(hover_power(&p).is_err());
    }

    #[test]
    fn hover_power_is_two_half_loads() {
        let p = p();
        let half = thruster_power(p.net_buoyancy() / 2.0, &p);
        assert_relative_eq!(hover_power(&p).unwrap(), 2.0 * half, max_relative = 1e-14);
    }

    #[test]
    fn epd_examples() {
        let p = p();
        assert_relative_eq!(epd(0.1387, &p).unwrap(), 6.80, epsilon = 0.01);
        assert!(epd(0.0, &p).is_err());
        assert!(epd(-1.0, &p).is_err());
        let u = 2.0;
        let a = drag_power_coefficient(&p);
        assert!(epd(2.0 * u, &p).unwrap() > 4.0 * a * u * u);
    }

    #[test]
    fn static_optimum_examples() {
        let mut p = p();
        let u_star = static_optimal_velocity(&p).unwrap();
        assert_relative_eq!(u_star, 0.1387, epsilon = 1e-4);
        // Second derivative of EPD at the optimum is positive.
        let h = 1e-4;
        let curvature = (epd(u_star + h, &p).unwrap() - 2.0 * epd(u_star, &p).unwrap()
            + epd(u_star - h, &p).unwrap())
            / (h * h);
        assert!(curvature > 0.0);
        let base = u_star;
        p.X_uu *= 2.0;
        assert_relative_eq!(static_optimal_velocity(&p).unwrap(), base / 2f64.sqrt(), max_relative = 1e-9);
        p.buoyancy = p.weight;
        assert!(static_optimal_velocity(&p).is_err());
    }

    #[test]
    fn static_optimum_matches_grid_search() {
        let p = p();
        let (mut best_u, mut best) = (0.0, f64::INFINITY);
        let mut u = 1e-5;
        while u <= 1.0 {
            let e = epd(u, &p).unwrap();
            if e < best {
                best = e;
                best_u = u;
            }
            u += 1e-5;
        }
        assert!((best_u - static_optimal_velocity(&p).unwrap()).abs() < 1e-4);
    }

    #[test]
    fn static_trip_cost_examples() {
        let p = p();
        let u_star = static_optimal_velocity(&p).unwrap();
        assert_eq!(static_trip_cost(0.0, u_star, &p).unwrap(), 0.0);
        assert_relative_eq!(static_trip_cost(10.0, u_star, &p).unwrap(), 68.0, epsilon = 0.1);
        assert!(static_trip_cost(10.0, 0.5, &p).unwrap() > static_trip_cost(10.0, u_star, &p).unwrap());
        assert!(static_trip_cost(-1.0, u_star, &p).is_err());
    }

    #[test]
    fn csv_row_has_six_fields() {
        let ledger = trip_energy(&[ThrusterForces::new(1.0, 1.0, 1.0, 1.0)], 0.5, &p());
        assert_eq!(ledger.to_csv_row().split(',').count(), 6);
        assert_eq!(EnergyLedger::CSV_HEADER.split(',').count(), 6);
    }

    fn forces() -> impl Strategy<Value = ThrusterForces> {
        (-8.0..8.0f64, -8.0..8.0f64, -8.0..8.0f64, -8.0..8.0f64)
            .prop_map(|(a, b, c, d)| ThrusterForces::new(a, b, c, d))
    }

    proptest! {
        #[test]
        fn ledger_is_additive_and_consistent(
            first in prop::collection::vec(forces(), 0..40),
            second in prop::collection::vec(forces(), 0..40),
        ) {
            let p = p();
            let mut joined = first.clone();
            joined.extend_from_slice(&second);
            let whole = trip_energy(&joined, 0.1, &p);
            let mut parts = trip_energy(&first, 0.1, &p);
            parts.merge(&trip_energy(&second, 0.1, &p));
            let scale = whole.total.max(1e-12);
            prop_assert!((whole.total - parts.total).abs() / scale < 1e-12);
            prop_assert!((whole.component_sum() - whole.total).abs() / scale < 1e-9);
            prop_assert!(whole.surge >= 0.0 && whole.heave >= 0.0 && whole.pitch >= 0.0 && whole.yaw >= 0.0);
            let direct: f64 = joined.iter()
                .flat_map(|f| f.as_array())
                .map(|t| thruster_power(t, &p) * 0.1)
                .sum();
            prop_assert!((whole.total - direct).abs() / scale < 1e-9);
        }

        #[test]
        fn epd_is_convex(u in 0.01..2.0f64, du in 1e-3..0.05f64) {
            let p = p();
            let mid = epd(u, &p).unwrap();
            let lo = epd(u - du * 0.1 * u, &p).unwrap();
            let hi = epd(u + du * 0.1 * u, &p).unwrap();
            prop_assert!(lo + hi - 2.0 * mid > 0.0);
        }
    }
}

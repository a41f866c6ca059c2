//! Decoupled surge model used for MPC prediction.
//!
//! Only position `x` and surge speed `u` evolve; the other velocities and the
//! attitude are frozen at their values when the prediction starts.

use crate::dynamics::{VehicleParams, VehicleState};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SurgeState {
    pub x: f64,
    pub u: f64,
}

impl SurgeState {
    pub fn new(x: f64, u: f64) -> Self {
        Self { x, u }
    }
}

/// Non-surge velocities and attitude, held constant over a prediction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrozenContext {
    pub v: f64,
    pub w: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
}

impl FrozenContext {
    pub fn from_state(state: &VehicleState) -> Self {
        let (nu, eta) = (&state.nu, &state.eta);
        Self {
            v: nu[1],
            w: nu[2],
            p: nu[3],
            q: nu[4],
            r: nu[5],
            phi: eta[3],
            theta: eta[4],
            psi: eta[5],
        }
    }
}

/// Constants of the surge equation
/// `(m − X_du) u̇ = −X_uu |u| u + T − m(wq − vr + z_g p r) − (W − B) sin θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurgeModel {
    pub inertia: f64,
    pub mass: f64,
    pub z_g: f64,
    pub drag: f64,
    pub weight_minus_buoyancy: f64,
}

/// Terms of the surge model that only depend on the frozen context.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizedContext {
    /// Force subtracted from thrust (Coriolis plus hydrostatic pitch term).
    pub disturbance: f64,
    /// Earth-frame `ẋ` per unit surge speed.
    pub speed_gain: f64,
    /// Earth-frame `ẋ` contributed by sway and heave.
    pub drift: f64,
}

impl SurgeModel {
    pub fn new(params: &VehicleParams) -> Self {
        Self {
            inertia: params.surge_inertia(),
            mass: params.mass,
            z_g: params.z_g,
            drag: params.X_uu,
            weight_minus_buoyancy: params.weight - params.buoyancy,
        }
    }

    pub fn linearize(&self, ctx: &FrozenContext) -> LinearizedContext {
        let (sphi, cphi) = ctx.phi.sin_cos();
        let (sth, cth) = ctx.theta.sin_cos();
        let (spsi, cpsi) = ctx.psi.sin_cos();
        let coriolis = self.mass * (ctx.w * ctx.q - ctx.v * ctx.r + self.z_g * ctx.p * ctx.r);
        LinearizedContext {
            disturbance: coriolis + self.weight_minus_buoyancy * sth,
            speed_gain: cpsi * cth,
            drift: (cpsi * sth * sphi - spsi * cphi) * ctx.v + (spsi * sphi + cpsi * sth * cphi) * ctx.w,
        }
    }

    /// `(ẋ, u̇)` under total horizontal thrust `thrust`.
    pub fn derivative(&self, s: &SurgeState, ctx: &FrozenContext, thrust: f64) -> (f64, f64) {
        self.derivative_linearized(s, &self.linearize(ctx), thrust)
    }

    pub fn derivative_linearized(&self, s: &SurgeState, lin: &LinearizedContext, thrust: f64) -> (f64, f64) {
        let x_dot = lin.speed_gain * s.u + lin.drift;
        let u_dot = (thrust - self.drag * s.u.abs() * s.u - lin.disturbance) / self.inertia;
        (x_dot, u_dot)
    }

    /// One forward-Euler step; speed is kept non-negative.
    pub fn euler_step(&self, s: &SurgeState, lin: &LinearizedContext, thrust: f64, dt: f64) -> SurgeState {
        let (x_dot, u_dot) = self.derivative_linearized(s, lin, thrust);
        SurgeState { x: s.x + dt * x_dot, u: (s.u + dt * u_dot).max(0.0) }
    }

    /// States `s0, s1, …, sN` under the thrust sequence `inputs`.
    pub fn rollout(&self, s0: &SurgeState, ctx: &FrozenContext, inputs: &[f64], dt: f64) -> Vec<SurgeState> {
        assert!(dt > 0.0, "prediction step must be positive");
        let lin = self.linearize(ctx);
        let mut states = Vec::with_capacity(inputs.len() + 1);
        let mut s = *s0;
        states.push(s);
        for &t in inputs {
            s = self.euler_step(&s, &lin, t, dt);
            states.push(s);
        }
        states
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{cruise_thrust, static_optimal_velocity};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn model() -> SurgeModel {
        SurgeModel::new(&VehicleParams::default())
    }

    #[test]
    fn derivative_examples() {
        let m = model();
        let ctx = FrozenContext::default();
        let (xd, ud) = m.derivative(&SurgeState::default(), &ctx, 15.72);
        assert_eq!(xd, 0.0);
        assert_relative_eq!(ud, 0.6998, epsilon = 1e-4);

        let p = VehicleParams::default();
        let u_star = static_optimal_velocity(&p).unwrap();
        let (xd, ud) = m.derivative(&SurgeState::new(0.0, u_star), &ctx, cruise_thrust(u_star, &p));
        assert_relative_eq!(xd, u_star);
        assert!(ud.abs() < 1e-15);
        assert_eq!(m.linearize(&ctx).disturbance, 0.0);
    }

    #[test]
    fn pitch_and_coriolis_terms() {
        let m = model();
        let ctx = FrozenContext { w: 0.1, q: 0.2, theta: 0.01, ..Default::default() };
        let lin = m.linearize(&ctx);
        let expected = m.mass * 0.02 + m.weight_minus_buoyancy * 0.01f64.sin();
        assert_relative_eq!(lin.disturbance, expected, epsilon = 1e-15);
        // A nose-down pitch with heave adds to the forward position rate.
        assert!(lin.drift > 0.0);
    }

    #[test]
    fn rollout_examples() {
        let m = model();
        let ctx = FrozenContext::default();
        let s0 = SurgeState::default();
        let states = m.rollout(&s0, &ctx, &[0.0; 15], 0.1);
        assert_eq!(states.len(), 16);
        assert!(states.iter().all(|s| *s == s0));

        let p = VehicleParams::default();
        let u_star = static_optimal_velocity(&p).unwrap();
        let t = cruise_thrust(u_star, &p);
        let states = m.rollout(&SurgeState::new(0.0, u_star), &ctx, &[t; 15], 0.1);
        assert!(states.iter().all(|s| (s.u - u_star).abs() < 1e-6));
    }

    #[test]
    fn rollout_clamps_speed_at_zero() {
        let m = model();
        let states = m.rollout(&SurgeState::new(0.0, 0.05), &FrozenContext::default(), &[-15.0; 5], 0.1);
        assert!(states.iter().all(|s| s.u >= 0.0));
        assert_eq!(states.last().unwrap().u, 0.0);
    }

    #[test]
    fn rollout_distance_within_euler_bound_on_linear_reference() {
        // With negligible drag and constant thrust the speed is linear in time,
        // so the exact distance is the trapezoid sum of speeds and forward Euler
        // (a left Riemann sum) falls short by exactly dt/2 (u_N − u_0).
        let mut m = model();
        m.drag = 0.0;
        let dt = 0.1;
        let states = m.rollout(&SurgeState::new(0.0, 0.05), &FrozenContext::default(), &[2.0; 15], dt);
        let mid_sum: f64 = states.windows(2).map(|w| 0.5 * (w[0].u + w[1].u)).sum::<f64>() * dt;
        let last = states.last().unwrap();
        let bound = 0.5 * dt * (last.u - states[0].u);
        assert_relative_eq!(mid_sum - last.x, bound, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn larger_inputs_give_larger_speeds(
            base in prop::collection::vec(-15.72..15.72f64, 15),
            bump in prop::collection::vec(0.0..5.0f64, 15),
            u0 in 0.0..0.5f64,
        ) {
            let m = model();
            let ctx = FrozenContext::default();
            let high: Vec<f64> = base.iter().zip(&bump).map(|(b, d)| (b + d).min(15.72)).collect();
            let lo = m.rollout(&SurgeState::new(0.0, u0), &ctx, &base, 0.1);
            let hi = m.rollout(&SurgeState::new(0.0, u0), &ctx, &high, 0.1);
            for (a, b) in lo.iter().zip(&hi) {
                prop_assert!(b.u >= a.u - 1e-12);
            }
        }
    }
}

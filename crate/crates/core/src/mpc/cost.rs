//! Horizon objectives for the tracking and energy-optimal controllers.
//!
//! Both objectives are evaluated on a forward-Euler surge rollout and come
//! with exact reverse-mode gradients so the inner solver can use them.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::dynamics::VehicleParams;
use crate::energy::{drag_power_coefficient, hover_power, EnergyError};
use crate::surge::{FrozenContext, LinearizedContext, SurgeModel, SurgeState};

use super::solver::BoxObjective;
use super::MpcConfig;

/// Power constants shared by the energy objectives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyTerms {
    pub power_ratio: f64,
    pub hover_power: f64,
    pub drag_power: f64,
}

impl EnergyTerms {
    pub fn new(params: &VehicleParams) -> Result<Self, EnergyError> {
        Ok(Self {
            power_ratio: params.power_ratio(),
            hover_power: hover_power(params)?,
            drag_power: drag_power_coefficient(params),
        })
    }

    /// Power of the horizontal pair sharing `total` evenly: `2 P(T/2)`.
    pub fn pair_power(&self, total: f64) -> f64 {
        // 2 C_p |T/2|^1.5 = C_p |T|^1.5 / √2
        FRAC_1_SQRT_2 * self.power_ratio * total.abs().powf(1.5)
    }

    pub fn pair_power_derivative(&self, total: f64) -> f64 {
        1.5 * FRAC_1_SQRT_2 * self.power_ratio * total.abs().sqrt() * total.signum()
    }
}

/// Energy of the horizon: thrust power plus hover power at every step.
pub fn stage_cost(inputs: &[f64], dt: f64, terms: &EnergyTerms) -> f64 {
    inputs.iter().map(|&t| (terms.pair_power(t) + terms.hover_power) * dt).sum()
}

/// Cost-to-go estimate: remaining distance times the energy per metre at the
/// terminal speed. Distance is clamped at zero past the destination and the
/// speed divisor is floored at `u_floor`.
pub fn terminal_cost(end: &SurgeState, destination: f64, u_floor: f64, terms: &EnergyTerms) -> f64 {
    terminal_cost_with_gradient(end, destination, u_floor, terms).0
}

/// Terminal cost and its partials with respect to `(x_N, u_N)`.
pub fn terminal_cost_with_gradient(
    end: &SurgeState,
    destination: f64,
    u_floor: f64,
    terms: &EnergyTerms,
) -> (f64, f64, f64) {
    let remaining = destination - end.x;
    if remaining <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let u = end.u.max(0.0);
    let den = u.max(u_floor);
    let num = terms.hover_power + terms.drag_power * u * u * u;
    let value = remaining * num / den;
    let d_x = -num / den;
    let mut d_u = remaining * 3.0 * terms.drag_power * u * u / den;
    if u > u_floor {
        d_u -= remaining * num / (den * den);
    }
    (value, d_x, d_u)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    /// Squared speed error to `reference` summed over predicted steps.
    Tracking { reference: f64 },
    /// Stage energy plus cost-to-go.
    EnergyOptimal(EnergyTerms),
}

/// One finite-horizon problem: the objective evaluated from a measured state.
#[derive(Debug, Clone)]
pub struct HorizonProblem<'a> {
    pub model: &'a SurgeModel,
    pub config: &'a MpcConfig,
    pub start: SurgeState,
    pub objective: Objective,
    lin: LinearizedContext,
}

impl<'a> HorizonProblem<'a> {
    pub fn new(
        model: &'a SurgeModel,
        config: &'a MpcConfig,
        start: SurgeState,
        ctx: &FrozenContext,
        objective: Objective,
    ) -> Self {
        Self { model, config, start, objective, lin: model.linearize(ctx) }
    }

    pub fn horizon(&self) -> usize {
        self.config.horizon
    }

    pub fn rollout(&self, inputs: &[f64]) -> Vec<SurgeState> {
        let mut out = Vec::with_capacity(inputs.len() + 1);
        let mut s = self.start;
        out.push(s);
        for &t in inputs {
            s = self.model.euler_step(&s, &self.lin, t, self.config.dt);
            out.push(s);
        }
        out
    }

    pub fn cost(&self, inputs: &[f64]) -> f64 {
        let states = self.rollout(inputs);
        self.cost_of_rollout(inputs, &states)
    }

    fn cost_of_rollout(&self, inputs: &[f64], states: &[SurgeState]) -> f64 {
        match self.objective {
            Objective::Tracking { reference } => {
                states[1..].iter().map(|s| (reference - s.u).powi(2)).sum()
            }
            Objective::EnergyOptimal(terms) => {
                let end = states.last().expect("rollout is never empty");
                stage_cost(inputs, self.config.dt, &terms)
                    + terminal_cost(end, self.config.destination, self.config.u_floor, &terms)
            }
        }
    }

    /// Cost and its gradient with respect to every input, by reverse sweep
    /// through the Euler rollout.
    pub fn cost_and_gradient(&self, inputs: &[f64], grad: &mut [f64]) -> f64 {
        let n = inputs.len();
        let dt = self.config.dt;
        let m = self.model;
        let states = self.rollout(inputs);
        let value = self.cost_of_rollout(inputs, &states);

        let (adj_x, mut adj_u) = match self.objective {
            Objective::Tracking { reference } => (0.0, -2.0 * (reference - states[n].u)),
            Objective::EnergyOptimal(terms) => {
                let (_, dx, du) =
                    terminal_cost_with_gradient(&states[n], self.config.destination, self.config.u_floor, &terms);
                (dx, du)
            }
        };
        for k in (0..n).rev() {
            let s = &states[k];
            let pre = s.u + dt * (inputs[k] - m.drag * s.u.abs() * s.u - self.lin.disturbance) / m.inertia;
            let (du_du, du_dt) = if pre > 0.0 {
                (1.0 - dt * 2.0 * m.drag * s.u.abs() / m.inertia, dt / m.inertia)
            } else {
                (0.0, 0.0)
            };
            grad[k] = adj_u * du_dt;
            if let Objective::EnergyOptimal(terms) = self.objective {
                grad[k] += terms.pair_power_derivative(inputs[k]) * dt;
            }
            adj_u = adj_u * du_du + adj_x * dt * self.lin.speed_gain;
            if k > 0 {
                if let Objective::Tracking { reference } = self.objective {
                    adj_u += -2.0 * (reference - s.u);
                }
            }
        }
        value
    }
}

impl BoxObjective for HorizonProblem<'_> {
    fn dim(&self) -> usize {
        self.config.horizon
    }

    fn bounds(&self) -> (f64, f64) {
        (self.config.thrust_min, self.config.thrust_max)
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.cost(x)
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.cost_and_gradient(x, grad)
    }
}

/// Tracking objective for a given input sequence.
pub fn tmpc_cost(
    reference: f64,
    start: SurgeState,
    ctx: &FrozenContext,
    inputs: &[f64],
    model: &SurgeModel,
    config: &MpcConfig,
) -> f64 {
    HorizonProblem::new(model, config, start, ctx, Objective::Tracking { reference }).cost(inputs)
}

/// Energy-optimal objective (stage energy plus cost-to-go).
pub fn eompc_cost(
    start: SurgeState,
    ctx: &FrozenContext,
    inputs: &[f64],
    model: &SurgeModel,
    config: &MpcConfig,
    terms: &EnergyTerms,
) -> f64 {
    HorizonProblem::new(model, config, start, ctx, Objective::EnergyOptimal(*terms)).cost(inputs)
}

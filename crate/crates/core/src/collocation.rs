//! Direct-collocation reference solution of the surge energy problem.
//!
//! The trip is split into `n` equal segments of free length `h = t_travel / n`.
//! Nodes carry position `x_k`, speed `u_k` and total horizontal thrust `T_k`,
//! linked by trapezoidal defects
//!
//! ```text
//! x_{k+1} = x_k + h/2 (u_k + u_{k+1})
//! u_{k+1} = u_k + h/2 (f(u_k, T_k) + f(u_{k+1}, T_{k+1})),  f = (T − X_uu |u| u) / (m − X_du)
//! ```
//!
//! and the objective is the trapezoidal quadrature of `2 P(T/2) + P_hover`.
//! The speed defect is quadratic in `u_{k+1}` and is solved in closed form,
//! so states are eliminated exactly and the nonlinear program is over
//! `(T_0 … T_n, h)` with the single constraint `x_n = x_f`. It is solved by a
//! feasible-path Newton method: each step solves the equality-constrained
//! KKT system (exact objective Hessian, finite-differenced constraint
//! Hessian, log barrier on the thrust bounds) and then restores `x_n = x_f`
//! by adjusting `h`.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::dynamics::VehicleParams;
use crate::energy::{cruise_thrust, static_optimal_velocity, EnergyError};
use crate::mpc::EnergyTerms;

#[derive(Debug, Error, PartialEq)]
pub enum CollocationError {
    #[error("invalid collocation problem: {0}")]
    InvalidProblem(String),
    #[error("cannot reach x_f = {xf} m with the current thrust profile")]
    Infeasible { xf: f64 },
    #[error("solver stopped after {iterations} iterations with KKT residual {kkt_residual:.3e}")]
    NotConverged { iterations: usize, kkt_residual: f64 },
    #[error(transparent)]
    Energy(#[from] EnergyError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollocationProblem {
    pub segments: usize,
    pub x0: f64,
    pub xf: f64,
    pub u0: f64,
    pub thrust_min: f64,
    pub thrust_max: f64,
    /// Stationarity tolerance, relative to the objective gradient scale.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for CollocationProblem {
    fn default() -> Self {
        Self {
            segments: 300,
            x0: 0.0,
            xf: 10.0,
            u0: 0.0,
            thrust_min: -15.72,
            thrust_max: 15.72,
            tolerance: 1e-9,
            max_iterations: 200,
        }
    }
}

impl CollocationProblem {
    pub fn trip(distance: f64, u0: f64) -> Self {
        Self { xf: distance, u0, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollocationSolution {
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub thrust: Vec<f64>,
    /// Trip energy (J).
    pub energy: f64,
    pub travel_time: f64,
    /// Largest violation of the trapezoidal defects.
    pub defect_residual: f64,
    /// Infinity norm of the Lagrangian gradient at the returned point,
    /// relative to `1 + |∇E|∞`.
    pub kkt_residual: f64,
    pub iterations: usize,
}

impl CollocationSolution {
    pub const CSV_HEADER: &'static str = "k,t,x,u,T_total";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for k in 0..self.x.len() {
            let _ = writeln!(out, "{},{},{},{},{}", k, self.times[k], self.x[k], self.u[k], self.thrust[k]);
        }
        out
    }
}

/// Solves the reduced energy problem from `(x0, u0)` to `xf`.
pub fn solve_dc(problem: &CollocationProblem, params: &VehicleParams) -> Result<CollocationSolution, CollocationError> {
    let n = problem.segments;
    if n < 2 {
        return Err(CollocationError::InvalidProblem("need at least two segments".into()));
    }
    if !(problem.xf >= problem.x0) {
        return Err(CollocationError::InvalidProblem("destination lies behind the start".into()));
    }
    if !(problem.u0 >= 0.0) {
        return Err(CollocationError::InvalidProblem("initial speed must be non-negative".into()));
    }
    let terms = EnergyTerms::new(params)?;
    let u_star = static_optimal_velocity(params)?;
    let seed = cruise_thrust(u_star, params);
    if !(problem.thrust_min < seed && seed < problem.thrust_max) {
        return Err(CollocationError::InvalidProblem("thrust bounds must contain the cruise thrust".into()));
    }
    if problem.xf == problem.x0 {
        return Ok(CollocationSolution {
            times: vec![0.0; n + 1],
            x: vec![problem.x0; n + 1],
            u: vec![problem.u0; n + 1],
            thrust: vec![0.0; n + 1],
            energy: 0.0,
            travel_time: 0.0,
            defect_residual: 0.0,
            kkt_residual: 0.0,
            iterations: 0,
        });
    }
    let tr = Transcription {
        n,
        inertia: params.surge_inertia(),
        drag: params.X_uu,
        terms,
        x0: problem.x0,
        u0: problem.u0,
        xf: problem.xf,
        lo: problem.thrust_min,
        hi: problem.thrust_max,
        eps: 0.0,
    };
    let mut thrust = vec![seed; n + 1];
    let guess = (problem.xf - problem.x0) / u_star.max(problem.u0) / n as f64;
    let mut h = tr.restore(&thrust, guess).ok_or(CollocationError::Infeasible { xf: problem.xf })?;

    let mut iterations = 0;
    let mut tr = tr;
    for (mu, eps) in [(1e-4, 1e-1), (1e-6, 1e-2), (1e-8, 1e-3), (1e-10, 1e-4), (1e-12, 1e-6)] {
        tr.eps = eps;
        loop {
            let (kkt, lambda, scale, g, a) = tr.stationarity(&thrust, h, mu);
            let target = if mu > 1e-12 { (10.0 * mu).max(problem.tolerance) } else { problem.tolerance };
            if kkt <= target * scale {
                break;
            }
            if iterations >= problem.max_iterations {
                return Err(CollocationError::NotConverged { iterations, kkt_residual: kkt });
            }
            iterations += 1;
            match tr.newton_step(&thrust, h, mu, lambda, &g, &a) {
                Some((t_new, h_new)) => {
                    thrust = t_new;
                    h = h_new;
                }
                // No decrease is representable in floating point any more.
                None if kkt <= 1e3 * problem.tolerance * scale => break,
                None => return Err(CollocationError::NotConverged { iterations, kkt_residual: kkt }),
            }
        }
    }

    tr.eps = 0.0;
    let (kkt, _, scale, _, _) = tr.stationarity(&thrust, h, 0.0);
    let (x, u) = tr.forward(&thrust, h);
    let defect_residual = defect_residual(&x, &u, &thrust, h, tr.inertia, tr.drag);
    Ok(CollocationSolution {
        times: (0..=n).map(|k| k as f64 * h).collect(),
        energy: tr.energy(&thrust, h),
        travel_time: h * n as f64,
        x,
        u,
        thrust,
        defect_residual,
        kkt_residual: kkt / scale,
        iterations,
    })
}

/// Optimal energy for covering `x_remaining` metres starting at `u_start`.
pub fn resample_oracle(x_remaining: f64, u_start: f64, params: &VehicleParams) -> Result<f64, CollocationError> {
    if x_remaining < 0.0 {
        return Err(CollocationError::InvalidProblem("remaining distance must be non-negative".into()));
    }
    Ok(solve_dc(&CollocationProblem::trip(x_remaining, u_start), params)?.energy)
}

/// Largest absolute trapezoidal defect of a state/control trajectory.
pub fn defect_residual(x: &[f64], u: &[f64], thrust: &[f64], h: f64, inertia: f64, drag: f64) -> f64 {
    let f = |u: f64, t: f64| (t - drag * u.abs() * u) / inertia;
    (0..x.len() - 1)
        .map(|k| {
            let dx = x[k + 1] - x[k] - 0.5 * h * (u[k] + u[k + 1]);
            let du = u[k + 1] - u[k] - 0.5 * h * (f(u[k], thrust[k]) + f(u[k + 1], thrust[k + 1]));
            dx.abs().max(du.abs())
        })
        .fold(0.0, f64::max)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Transcription {
    n: usize,
    inertia: f64,
    drag: f64,
    terms: EnergyTerms,
    x0: f64,
    u0: f64,
    xf: f64,
    lo: f64,
    hi: f64,
    /// Smoothing of `|T|^1.5` at zero thrust; zero gives the exact power.
    eps: f64,
}

impl Transcription {
    fn pair_coefficient(&self) -> f64 {
        self.terms.power_ratio * std::f64::consts::FRAC_1_SQRT_2
    }

    fn pair_power(&self, t: f64) -> f64 {
        let e2 = self.eps * self.eps;
        self.pair_coefficient() * ((t * t + e2).powf(0.75) - e2.powf(0.75))
    }

    fn pair_power_derivative(&self, t: f64) -> f64 {
        let q = t * t + self.eps * self.eps;
        if q == 0.0 {
            return 0.0;
        }
        1.5 * self.pair_coefficient() * t * q.powf(-0.25)
    }

    fn pair_power_curvature(&self, t: f64) -> f64 {
        let e2 = self.eps * self.eps;
        let q = (t * t + e2).max(1e-18);
        1.5 * self.pair_coefficient() * q.powf(-1.25) * (0.5 * t * t + e2)
    }

    /// Stationarity residual with the least-squares multiplier, plus the
    /// multiplier, gradient scale and both gradients.
    fn stationarity(&self, thrust: &[f64], h: f64, mu: f64) -> (f64, f64, f64, Vec<f64>, Vec<f64>) {
        let (g, a) = self.gradients(thrust, h, mu);
        let lambda = -dot(&a, &g) / dot(&a, &a);
        let kkt = g.iter().zip(&a).map(|(gi, ai)| (gi + lambda * ai).abs()).fold(0.0, f64::max);
        let scale = 1.0 + g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        (kkt, lambda, scale, g, a)
    }

    fn weight(&self, k: usize) -> f64 {
        if k == 0 || k == self.n {
            0.5
        } else {
            1.0
        }
    }

    fn energy(&self, thrust: &[f64], h: f64) -> f64 {
        let work: f64 = thrust.iter().enumerate().map(|(k, &t)| self.weight(k) * self.pair_power(t)).sum();
        h * (work + self.n as f64 * self.terms.hover_power)
    }

    fn barrier_objective(&self, thrust: &[f64], h: f64, mu: f64) -> f64 {
        let barrier: f64 = thrust.iter().map(|&t| (self.hi - t).ln() + (t - self.lo).ln()).sum();
        self.energy(thrust, h) - mu * barrier
    }

    fn speed_step(&self, u: f64, t: f64, t_next: f64, h: f64) -> f64 {
        let r = u + 0.5 * h * (t - self.drag * u.abs() * u) / self.inertia + 0.5 * h * t_next / self.inertia;
        let c = 0.5 * h * self.drag / self.inertia;
        let mag = 2.0 * r.abs() / (1.0 + (1.0 + 4.0 * c * r.abs()).sqrt());
        mag.copysign(r)
    }

    fn forward(&self, thrust: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
        let mut x = Vec::with_capacity(self.n + 1);
        let mut u = Vec::with_capacity(self.n + 1);
        x.push(self.x0);
        u.push(self.u0);
        for k in 0..self.n {
            let next = self.speed_step(u[k], thrust[k], thrust[k + 1], h);
            x.push(x[k] + 0.5 * h * (u[k] + next));
            u.push(next);
        }
        (x, u)
    }

    fn end_position(&self, thrust: &[f64], h: f64) -> f64 {
        *self.forward(thrust, h).0.last().expect("at least one node")
    }

    /// Gradient of `x_n` with respect to `(T_0 … T_n, h)`, by reverse sweep.
    fn end_position_gradient(&self, thrust: &[f64], h: f64) -> Vec<f64> {
        let n = self.n;
        let (_, u) = self.forward(thrust, h);
        let m = self.inertia;
        let x_drag = self.drag;
        let c = 0.5 * h * x_drag / m;
        let mut grad = vec![0.0; n + 2];
        let mut adj_u = 0.0;
        for k in (0..n).rev() {
            // x_{k+1} = x_k + h/2 (u_k + u_{k+1}); the position adjoint is 1 throughout.
            let adj_next = adj_u + 0.5 * h;
            grad[n + 1] += 0.5 * (u[k] + u[k + 1]);
            // u_{k+1} solves v + c|v|v = r.
            let v = u[k + 1];
            let s = 1.0 / (1.0 + 2.0 * c * v.abs());
            let dr_du = 1.0 - h * x_drag * u[k].abs() / m;
            let dr_dt = 0.5 * h / m;
            let dr_dh = 0.5 * (thrust[k] - x_drag * u[k].abs() * u[k]) / m + 0.5 * thrust[k + 1] / m;
            let dv_dc = -v.abs() * v * s;
            grad[k] += adj_next * s * dr_dt;
            grad[k + 1] += adj_next * s * dr_dt;
            grad[n + 1] += adj_next * (s * dr_dh + dv_dc * 0.5 * x_drag / m);
            adj_u = 0.5 * h + adj_next * s * dr_du;
        }
        grad
    }

    /// Gradients of the barrier objective and of the constraint.
    fn gradients(&self, thrust: &[f64], h: f64, mu: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let mut g = vec![0.0; n + 2];
        let mut work = 0.0;
        for (k, &t) in thrust.iter().enumerate() {
            let w = self.weight(k);
            g[k] = h * w * self.pair_power_derivative(t) + mu / (self.hi - t) - mu / (t - self.lo);
            work += w * self.pair_power(t);
        }
        g[n + 1] = work + n as f64 * self.terms.hover_power;
        (g, self.end_position_gradient(thrust, h))
    }

    fn lagrangian_hessian(&self, thrust: &[f64], h: f64, mu: f64, lambda: f64) -> DMatrix<f64> {
        let n = self.n;
        let dim = n + 2;
        let mut hess = DMatrix::zeros(dim, dim);
        for (k, &t) in thrust.iter().enumerate() {
            let w = self.weight(k);
            hess[(k, k)] = h * w * self.pair_power_curvature(t)
                + mu / (self.hi - t).powi(2)
                + mu / (t - self.lo).powi(2);
            let cross = w * self.pair_power_derivative(t);
            hess[(k, n + 1)] = cross;
            hess[(n + 1, k)] = cross;
        }
        // Central differences of the constraint gradient.
        let mut z: Vec<f64> = thrust.to_vec();
        z.push(h);
        for j in 0..dim {
            let step = 1e-6 * z[j].abs().max(if j == n + 1 { h } else { 1.0 });
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[j] += step;
            zm[j] -= step;
            let gp = self.end_position_gradient(&zp[..=n], zp[n + 1]);
            let gm = self.end_position_gradient(&zm[..=n], zm[n + 1]);
            for i in 0..dim {
                let d = lambda * (gp[i] - gm[i]) / (2.0 * step);
                hess[(i, j)] += 0.5 * d;
                hess[(j, i)] += 0.5 * d;
            }
        }
        hess
    }

    /// Finds `h` with `x_n = x_f` for fixed thrust.
    fn restore(&self, thrust: &[f64], guess: f64) -> Option<f64> {
        let target = self.xf;
        let residual = |h: f64| self.end_position(thrust, h) - target;
        let (mut lo, mut hi) = (0.0, guess.max(1e-12));
        let mut r_hi = residual(hi);
        let mut expansions = 0;
        while r_hi < 0.0 {
            lo = hi;
            hi *= 2.0;
            r_hi = residual(hi);
            expansions += 1;
            if expansions > 60 || !r_hi.is_finite() {
                return None;
            }
        }
        let tol = 1e-13 * target.abs().max(1.0);
        let mut h = hi;
        let mut r = r_hi;
        for _ in 0..200 {
            if r.abs() <= tol {
                return Some(h);
            }
            if r > 0.0 {
                hi = h;
            } else {
                lo = h;
            }
            let slope = self.end_position_gradient(thrust, h)[self.n + 1];
            let newton = h - r / slope;
            h = if slope > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            r = residual(h);
            if hi - lo <= 1e-16 * hi {
                break;
            }
        }
        (r.abs() <= 1e3 * tol).then_some(h)
    }

    fn newton_step(
        &self,
        thrust: &[f64],
        h: f64,
        mu: f64,
        lambda: f64,
        g: &[f64],
        a: &[f64],
    ) -> Option<(Vec<f64>, f64)> {
        let n = self.n;
        let dim = n + 2;
        let hess = self.lagrangian_hessian(thrust, h, mu, lambda);
        let gv = DVector::from_column_slice(g);
        // Null-space step with h as the dependent variable: moving the
        // thrusts by d_T shifts h by -a_Tᵀ d_T / a_h to first order.
        let a_h = a[n + 1];
        if !(a_h > 0.0) {
            return None;
        }
        let z = DVector::from_iterator(n + 1, a[..=n].iter().map(|&ai| -ai / a_h));
        let h_tt = hess.view((0, 0), (n + 1, n + 1));
        let h_th = hess.view((0, n + 1), (n + 1, 1)).column(0).into_owned();
        let h_hh = hess[(n + 1, n + 1)];
        let mut reduced = h_tt.into_owned() + &h_th * z.transpose() + &z * h_th.transpose() + &z * z.transpose() * h_hh;
        let reduced_g = gv.rows(0, n + 1).into_owned() + &z * g[n + 1];
        let diag_scale = (0..=n).map(|i| reduced[(i, i)].abs()).fold(1e-12, f64::max);
        let mut shift = 0.0;
        let chol = loop {
            if let Some(c) = reduced.clone().cholesky() {
                break c;
            }
            let bump = if shift == 0.0 { 1e-8 * diag_scale } else { 9.0 * shift };
            for i in 0..=n {
                reduced[(i, i)] += bump;
            }
            shift += bump;
            if shift > 1e6 * diag_scale {
                return None;
            }
        };
        let d_t = -chol.solve(&reduced_g);
        let mut d = DVector::zeros(dim);
        d.rows_mut(0, n + 1).copy_from(&d_t);
        d[n + 1] = z.dot(&d_t);

        // Fraction-to-boundary on thrust bounds and h > 0.
        let mut alpha: f64 = 1.0;
        for k in 0..=n {
            if d[k] > 0.0 {
                alpha = alpha.min(0.995 * (self.hi - thrust[k]) / d[k]);
            } else if d[k] < 0.0 {
                alpha = alpha.min(0.995 * (self.lo - thrust[k]) / d[k]);
            }
        }
        if d[n + 1] < 0.0 {
            alpha = alpha.min(0.9 * h / -d[n + 1]);
        }
        let phi = self.barrier_objective(thrust, h, mu);
        let slope = gv.dot(&d);
        if slope >= 0.0 {
            return None;
        }
        let mut trial = vec![0.0; n + 1];
        for _ in 0..40 {
            for k in 0..=n {
                trial[k] = thrust[k] + alpha * d[k];
            }
            if let Some(h_new) = self.restore(&trial, h + alpha * d[n + 1]) {
                let phi_new = self.barrier_objective(&trial, h_new, mu);
                if phi_new <= phi + 0.25 * alpha * slope {
                    return Some((trial, h_new));
                }
            }
            alpha *= 0.5;
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> VehicleParams {
        VehicleParams::default()
    }

    fn transcription(n: usize, u0: f64) -> Transcription {
        let p = params();
        Transcription {
            n,
            inertia: p.surge_inertia(),
            drag: p.X_uu,
            terms: EnergyTerms::new(&p).unwrap(),
            x0: 0.0,
            u0,
            xf: 10.0,
            lo: -15.72,
            hi: 15.72,
            eps: 0.0,
        }
    }

    #[test]
    fn speed_step_satisfies_defect() {
        let tr = transcription(10, 0.0);
        for (u, t0, t1, h) in [(0.0, 1.0, 2.0, 0.3), (0.4, -3.0, -5.0, 0.5), (0.1, 0.0, 0.0, 2.0)] {
            let v = tr.speed_step(u, t0, t1, h);
            let f = |u: f64, t: f64| (t - tr.drag * u.abs() * u) / tr.inertia;
            let defect = v - u - 0.5 * h * (f(u, t0) + f(v, t1));
            assert!(defect.abs() < 1e-15, "defect {defect}");
        }
    }

    #[test]
    fn end_position_gradient_matches_finite_differences() {
        let tr = transcription(12, 0.05);
        let thrust: Vec<f64> = (0..13).map(|k| 0.5 + 0.3 * (k as f64).sin()).collect();
        let h = 0.7;
        let g = tr.end_position_gradient(&thrust, h);
        for j in 0..14 {
            let eps = 1e-6;
            let mut tp = thrust.clone();
            let mut tm = thrust.clone();
            let (mut hp, mut hm) = (h, h);
            if j < 13 {
                tp[j] += eps;
                tm[j] -= eps;
            } else {
                hp += eps;
                hm -= eps;
            }
            let fd = (tr.end_position(&tp, hp) - tr.end_position(&tm, hm)) / (2.0 * eps);
            assert_relative_eq!(g[j], fd, max_relative = 1e-6, epsilon = 1e-10);
        }
    }

    #[test]
    fn degenerate_trip_is_trivial() {
        let sol = solve_dc(&CollocationProblem::trip(0.0, 0.0), &params()).unwrap();
        assert_eq!(sol.energy, 0.0);
        assert_eq!(sol.travel_time, 0.0);
        assert_eq!(resample_oracle(0.0, 0.2, &params()).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_problems() {
        let p = params();
        let bad = CollocationProblem { segments: 1, ..Default::default() };
        assert!(solve_dc(&bad, &p).is_err());
        let bad = CollocationProblem { xf: -1.0, ..Default::default() };
        assert!(solve_dc(&bad, &p).is_err());
        let bad = CollocationProblem { thrust_max: 0.1, ..Default::default() };
        assert!(solve_dc(&bad, &p).is_err());
        assert!(resample_oracle(-1.0, 0.0, &p).is_err());
    }

    #[test]
    fn short_trip_solution_is_consistent() {
        let p = params();
        let problem = CollocationProblem { segments: 60, ..CollocationProblem::trip(2.0, 0.0) };
        let sol = solve_dc(&problem, &p).unwrap();
        assert!(sol.defect_residual < 1e-9);
        assert!((sol.x.last().unwrap() - 2.0).abs() < 1e-9);
        assert!(sol.thrust.iter().all(|t| (-15.72..=15.72).contains(t)));
        let csv = sol.to_csv();
        assert_eq!(csv.lines().count(), 62);
        assert!(csv.starts_with(CollocationSolution::CSV_HEADER));
    }
    #[test]
    fn lagrangian_hessian_matches_finite_differences() {
        let mut tr = transcription(40, 0.0);
        tr.xf = 2.0;
        tr.eps = 1e-2;
        let thrust: Vec<f64> = (0..=40).map(|k| 2.0 * (1.0 - k as f64 / 20.0)).collect();
        let (h, mu) = (0.4, 1e-6);
        let (_, lambda, _, _, _) = tr.stationarity(&thrust, h, mu);
        let hess = tr.lagrangian_hessian(&thrust, h, mu, lambda);
        let lag = |t: &[f64], h: f64| {
            let (g, a) = tr.gradients(t, h, mu);
            g.iter().zip(&a).map(|(g, a)| g + lambda * a).collect::<Vec<_>>()
        };
        let e = 1e-6;
        for j in 0..42 {
            let (mut tp, mut tm) = (thrust.clone(), thrust.clone());
            let (mut hp, mut hm) = (h, h);
            if j <= 40 {
                tp[j] += e;
                tm[j] -= e;
            } else {
                hp += e;
                hm -= e;
            }
            let (gp, gm) = (lag(&tp, hp), lag(&tm, hm));
            for i in 0..42 {
                let fd = (gp[i] - gm[i]) / (2.0 * e);
                assert!((fd - hess[(i, j)]).abs() <= 1e-5 * (1.0 + fd.abs()), "({i},{j}): {fd} vs {}", hess[(i, j)]);
            }
        }
    }

    #[test]
    fn smoothed_power_reduces_to_exact_power() {
        let mut tr = transcription(4, 0.0);
        for t in [-3.0, -0.2, 0.0, 0.7, 5.0] {
            assert_relative_eq!(tr.pair_power(t), tr.terms.pair_power(t), epsilon = 1e-15);
            assert_relative_eq!(tr.pair_power_derivative(t), tr.terms.pair_power_derivative(t), epsilon = 1e-12);
        }
        tr.eps = 1e-2;
        for t in [-0.5, 0.0, 0.3] {
            let e = 1e-6;
            let fd = (tr.pair_power(t + e) - tr.pair_power(t - e)) / (2.0 * e);
            assert_relative_eq!(tr.pair_power_derivative(t), fd, epsilon = 1e-8);
            let fd2 = (tr.pair_power_derivative(t + e) - tr.pair_power_derivative(t - e)) / (2.0 * e);
            assert_relative_eq!(tr.pair_power_curvature(t), fd2, max_relative = 1e-5);
        }
    }
}

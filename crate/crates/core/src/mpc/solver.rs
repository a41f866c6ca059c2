//! Bound-constrained minimizer for the horizon problems.
//!
//! Spectral projected gradient (Barzilai–Borwein steps with a non-monotone
//! Armijo search along the projected direction). If it runs out of
//! iterations or the line search stalls, a coordinate pattern search polishes
//! the best point found. Everything is deterministic.

/// A smooth objective over the box `lower <= x_i <= upper`.
pub trait BoxObjective {
    fn dim(&self) -> usize;
    fn bounds(&self) -> (f64, f64);
    fn value(&self, x: &[f64]) -> f64;
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub max_iterations: usize,
    /// Stop once the projected-gradient infinity norm drops below this.
    pub tolerance: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { max_iterations: 300, tolerance: 1e-7 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    /// Iteration limit hit; the best point found is returned.
    IterationLimit,
    /// Line search could not make progress; the best point found is returned.
    Stalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxSolution {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub status: SolveStatus,
}

const MEMORY: usize = 8;
const ARMIJO: f64 = 1e-4;
const STEP_MIN: f64 = 1e-10;
const STEP_MAX: f64 = 1e10;

fn project(x: &mut [f64], lo: f64, hi: f64) {
    for v in x.iter_mut() {
        *v = v.clamp(lo, hi);
    }
}

fn projected_gradient_norm(x: &[f64], g: &[f64], lo: f64, hi: f64) -> f64 {
    x.iter()
        .zip(g)
        .map(|(&xi, &gi)| ((xi - gi).clamp(lo, hi) - xi).abs())
        .fold(0.0, f64::max)
}

pub fn minimize_box<O: BoxObjective + ?Sized>(obj: &O, start: &[f64], settings: &SolverSettings) -> BoxSolution {
    let n = obj.dim();
    assert_eq!(start.len(), n, "start point has wrong dimension");
    let (lo, hi) = obj.bounds();
    let mut x = start.to_vec();
    project(&mut x, lo, hi);
    let mut g = vec![0.0; n];
    let mut f = obj.value_and_gradient(&x, &mut g);
    let mut evaluations = 1;
    let mut history = std::collections::VecDeque::with_capacity(MEMORY);
    history.push_back(f);

    let mut best_x = x.clone();
    let mut best_f = f;

    let pg = projected_gradient_norm(&x, &g, lo, hi);
    let mut step = if pg > 0.0 { (1.0 / pg).clamp(STEP_MIN, STEP_MAX) } else { 1.0 };

    let mut d = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut g_trial = vec![0.0; n];
    let mut status = SolveStatus::IterationLimit;
    let mut iterations = 0;

    while iterations < settings.max_iterations {
        if projected_gradient_norm(&x, &g, lo, hi) <= settings.tolerance {
            status = SolveStatus::Converged;
            break;
        }
        iterations += 1;
        for i in 0..n {
            d[i] = (x[i] - step * g[i]).clamp(lo, hi) - x[i];
        }
        let slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            status = SolveStatus::Stalled;
            break;
        }
        let f_ref = history.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut lambda = 1.0;
        let accepted = loop {
            for i in 0..n {
                trial[i] = x[i] + lambda * d[i];
            }
            let f_trial = obj.value(&trial);
            evaluations += 1;
            if f_trial <= f_ref + ARMIJO * lambda * slope {
                break Some(f_trial);
            }
            // Safeguarded quadratic interpolation.
            let denom = 2.0 * (f_trial - f - lambda * slope);
            let candidate = if denom > 0.0 { -slope * lambda * lambda / denom } else { 0.5 * lambda };
            lambda = candidate.clamp(0.1 * lambda, 0.5 * lambda);
            if lambda < 1e-14 {
                break None;
            }
        };
        let Some(_) = accepted else {
            status = SolveStatus::Stalled;
            break;
        };
        let f_new = obj.value_and_gradient(&trial, &mut g_trial);
        evaluations += 1;
        let mut ss = 0.0;
        let mut sy = 0.0;
        for i in 0..n {
            let s = trial[i] - x[i];
            let y = g_trial[i] - g[i];
            ss += s * s;
            sy += s * y;
        }
        step = if sy > 0.0 { (ss / sy).clamp(STEP_MIN, STEP_MAX) } else { STEP_MAX };
        x.copy_from_slice(&trial);
        g.copy_from_slice(&g_trial);
        f = f_new;
        if history.len() == MEMORY {
            history.pop_front();
        }
        history.push_back(f);
        if f < best_f {
            best_f = f;
            best_x.copy_from_slice(&x);
        }
    }

    if status != SolveStatus::Converged {
        let polished = pattern_search(obj, &best_x, best_f, lo, hi, 40 * n.max(1));
        evaluations += polished.2;
        best_x = polished.0;
        best_f = polished.1;
    } else if f < best_f {
        best_f = f;
        best_x = x;
    }

    BoxSolution { x: best_x, value: best_f, iterations, evaluations, status }
}

/// Coordinate pattern search with halving steps; returns (x, f, evaluations).
fn pattern_search<O: BoxObjective + ?Sized>(
    obj: &O,
    start: &[f64],
    f_start: f64,
    lo: f64,
    hi: f64,
    budget: usize,
) -> (Vec<f64>, f64, usize) {
    let mut x = start.to_vec();
    let mut f = f_start;
    let mut delta = (hi - lo) / 64.0;
    let mut evals = 0;
    while delta > 1e-7 && evals < budget {
        let mut improved = false;
        for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                let old = x[i];
                let moved = (old + dir * delta).clamp(lo, hi);
                if moved == old {
                    continue;
                }
                x[i] = moved;
                let ft = obj.value(&x);
                evals += 1;
                if ft < f {
                    f = ft;
                    improved = true;
                    break;
                }
                x[i] = old;
            }
        }
        if !improved {
            delta *= 0.5;
        }
    }
    (x, f, evals)
}

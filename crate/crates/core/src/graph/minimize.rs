//! Descent on the discrete graph area: L-BFGS directions with an Armijo
//! backtracking line search; the band never moves, the area never increases
//! along accepted steps.

use super::{area, area_gradient, sup_norm, GraphError, GraphField};
use ndarray::Array2;
use std::collections::VecDeque;

#[derive(Debug, Clone)]
pub struct MinimizeConfig {
    /// Terminate when the gradient sup-norm drops below this.
    pub grad_tol: f64,
    pub max_iterations: usize,
    /// L-BFGS memory; 0 disables the quasi-Newton acceleration.
    pub memory: usize,
    pub armijo_c1: f64,
    pub max_backtracks: usize,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        Self { grad_tol: 1e-10, max_iterations: 4000, memory: 8, armijo_c1: 1e-4, max_backtracks: 60 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IterationRecord {
    pub iteration: usize,
    pub area: f64,
    pub grad_norm: f64,
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct MinimizerState {
    pub field: GraphField,
    pub area: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<IterationRecord>,
}

fn dot(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Minimize the discrete area from `start`, keeping its band fixed.
pub fn minimize(start: &GraphField, config: &MinimizeConfig) -> Result<MinimizerState, GraphError> {
    let mut field = start.clone();
    let mut value = area(&field);
    let mut grad = area_gradient(&field);
    let mut history = Vec::new();
    let mut pairs: VecDeque<(Array2<f64>, Array2<f64>, f64)> = VecDeque::new();

    for iter in 0..config.max_iterations {
        let gnorm = sup_norm(&grad);
        if gnorm <= config.grad_tol {
            return Ok(MinimizerState {
                field,
                area: value,
                grad_norm: gnorm,
                iterations: iter,
                converged: true,
                history,
            });
        }
        // two-loop recursion
        let mut dir = grad.clone();
        let mut alphas = Vec::with_capacity(pairs.len());
        for (s, y, rho) in pairs.iter().rev() {
            let a = rho * dot(s, &dir);
            dir -= &(y * a);
            alphas.push(a);
        }
        if let Some((s, y, _)) = pairs.back() {
            let scale = dot(s, y) / dot(y, y);
            dir *= scale;
        }
        for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &dir);
            dir += &(s * (a - b));
        }
        dir.mapv_inplace(|x| -x);
        let mut slope = dot(&grad, &dir);
        if slope >= 0.0 {
            // fall back to steepest descent
            dir = grad.clone();
            dir.mapv_inplace(|x| -x);
            slope = -dot(&grad, &grad);
            pairs.clear();
        }

        // backtracking Armijo on the cancellation-free area difference
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..config.max_backtracks {
            let delta = super::area_delta(&field, &dir, step);
            if delta <= config.armijo_c1 * step * slope {
                let mut trial = field.clone();
                trial.u += &(dir.clone() * step);
                accepted = Some((trial, value + delta));
                break;
            }
            step *= 0.5;
        }
        let Some((next, next_value)) = accepted else {
            return Err(GraphError::LineSearch { iter, grad_norm: gnorm });
        };
        let next_grad = area_gradient(&next);
        let s = dir * step;
        let y = &next_grad - &grad;
        let sy = dot(&s, &y);
        if config.memory > 0 && sy > 1e-14 * dot(&y, &y).max(1e-300) {
            pairs.push_back((s, y, 1.0 / sy));
            if pairs.len() > config.memory {
                pairs.pop_front();
            }
        }
        history.push(IterationRecord { iteration: iter, area: next_value, grad_norm: gnorm, step });
        field = next;
        value = next_value;
        grad = next_grad;
    }
    let gnorm = sup_norm(&grad);
    Ok(MinimizerState {
        field,
        area: value,
        grad_norm: gnorm,
        iterations: config.max_iterations,
        converged: gnorm <= config.grad_tol,
        history,
    })
}

use nalgebra::DMatrix;

use super::graph::{Assignment, FactorGraph};
use super::information::normal_equations;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    pub initial_damping: f64,
    pub damping_factor: f64,
    pub max_damping: f64,
    pub step_tolerance: f64,
    pub cost_tolerance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            initial_damping: 1e-4,
            damping_factor: 10.0,
            max_damping: 1e8,
            step_tolerance: 1e-8,
            cost_tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub assignment: Assignment,
    pub converged: bool,
    pub iterations: usize,
    pub cost: f64,
}

pub fn map_solve(graph: &FactorGraph, initial: Option<&Assignment>) -> Result<SolveReport> {
    map_solve_with(graph, initial, &SolverOptions::default())
}

/// Gauss–Newton on the negative log posterior. A step that fails to reduce
/// the cost (or whose normal equations are not positive definite) is retried
/// with Levenberg–Marquardt damping `H + λI`, λ growing by `damping_factor`
/// from `initial_damping` up to `max_damping`.
pub fn map_solve_with(
    graph: &FactorGraph,
    initial: Option<&Assignment>,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    graph.check_connected()?;
    let ordering = graph.ordering();
    let mut x = match initial {
        Some(a) => {
            let mut a = a.clone();
            // Missing entries fall back to the dead-reckoned guess.
            let guess = graph.initial_guess()?;
            for (k, v) in guess.poses {
                a.poses.entry(k).or_insert(v);
            }
            for (k, v) in guess.landmarks {
                a.landmarks.entry(k).or_insert(v);
            }
            a.poses.retain(|k, _| graph.has_pose(*k));
            a.landmarks.retain(|k, _| graph.has_landmark(*k));
            a
        }
        None => graph.initial_guess()?,
    };
    let mut cost = graph.cost(&x)?;
    let mut iterations = 0;
    let mut converged = false;
    let n = ordering.dim();

    while iterations < opts.max_iterations {
        iterations += 1;
        let (h, g) = normal_equations(graph, &x, &ordering)?;
        let mut lambda = 0.0;
        let mut accepted = None;
        loop {
            let system = if lambda > 0.0 {
                &h + DMatrix::identity(n, n) * lambda
            } else {
                h.clone()
            };
            match system.cholesky() {
                Some(chol) => {
                    let step = chol.solve(&(-&g));
                    let candidate = x.retract(&ordering, &step);
                    let new_cost = graph.cost(&candidate)?;
                    let step_norm = step.norm();
                    if new_cost <= cost || step_norm < opts.step_tolerance {
                        accepted = Some((candidate, new_cost, step_norm));
                        break;
                    }
                }
                None if lambda >= opts.max_damping => return Err(Error::SingularSystem),
                None => {}
            }
            lambda = if lambda == 0.0 {
                opts.initial_damping
            } else {
                lambda * opts.damping_factor
            };
            if lambda > opts.max_damping {
                break;
            }
        }
        let Some((candidate, new_cost, step_norm)) = accepted else {
            break;
        };
        let relative = if cost > 0.0 {
            (cost - new_cost).abs() / cost
        } else {
            0.0
        };
        x = candidate;
        cost = new_cost;
        if step_norm < opts.step_tolerance || relative < opts.cost_tolerance {
            converged = true;
            break;
        }
    }
    Ok(SolveReport {
        assignment: x,
        converged,
        iterations,
        cost,
    })
}

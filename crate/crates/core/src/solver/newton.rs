//! Damped Newton iteration on a [`ResidualSystem`].

use crate::error::{Error, Result};

use super::config::{JacobianMode, SolverConfig};
use super::linear::{LinearSolver, Triplets};
use super::system::{ResidualSystem, StepContext};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub max_halvings: usize,
    pub jacobian_mode: JacobianMode,
}

impl From<&SolverConfig> for NewtonOptions {
    fn from(c: &SolverConfig) -> Self {
        NewtonOptions {
            tol: c.tol,
            max_iters: c.max_newton_iters,
            max_halvings: c.max_halvings,
            jacobian_mode: c.jacobian_mode,
        }
    }
}

/// Outcome of a converged solve.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport {
    pub iterations: usize,
    /// ‖r‖∞ before each iteration and after the last one.
    pub history: Vec<f64>,
    /// Total step halvings over all iterations.
    pub halvings: usize,
}

impl NewtonReport {
    pub fn residual(&self) -> f64 {
        *self.history.last().expect("history holds the initial residual")
    }
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter()
        .fold(0.0, |m, x| if x.abs() > m || x.is_nan() { x.abs() } else { m })
}

/// The `count` largest residual entries with their equation labels.
pub fn worst_equations(system: &ResidualSystem, r: &[f64], count: usize) -> String {
    let mut idx: Vec<usize> = (0..r.len()).collect();
    idx.sort_by(|&a, &b| r[b].abs().total_cmp(&r[a].abs()));
    idx.iter()
        .take(count)
        .map(|&i| format!("{} = {:.3e}", system.layout.equation_label(system.net, i), r[i]))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Newton driver holding the linear solver so that its symbolic analysis is
/// reused across iterations and time steps.
#[derive(Default)]
pub struct Newton {
    linear: LinearSolver,
    jac: Triplets,
}

impl Newton {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn symbolic_factorizations(&self) -> usize {
        self.linear.symbolic_count()
    }

    fn jacobian(
        &mut self,
        system: &ResidualSystem,
        x: &[f64],
        ctx: &StepContext,
        mode: JacobianMode,
    ) -> Result<Vec<f64>> {
        match mode {
            JacobianMode::AnalyticSparse => system.residual_and_jacobian(x, ctx, &mut self.jac),
            JacobianMode::FiniteDifference => {
                let dense = system.finite_difference_jacobian(x, ctx)?;
                self.jac.clear();
                for (i, row) in dense.iter().enumerate() {
                    for (j, &v) in row.iter().enumerate() {
                        if v != 0.0 {
                            self.jac.push(i, j, v);
                        }
                    }
                }
                system.residual(x, ctx)
            }
        }
    }

    /// Solves `system = 0` starting from `x`, which holds the solution on
    /// success.
    pub fn solve(
        &mut self,
        system: &ResidualSystem,
        ctx: &StepContext,
        x: &mut Vec<f64>,
        opts: &NewtonOptions,
    ) -> Result<NewtonReport> {
        let n = system.n();
        let mut r = self.jacobian(system, x, ctx, opts.jacobian_mode)?;
        let mut norm = inf_norm(&r);
        let mut history = vec![norm];
        let mut halvings = 0;
        let mut iterations = 0;
        while !(norm <= opts.tol) {
            if iterations == opts.max_iters {
                return Err(Error::NewtonFailed {
                    iterations,
                    residual: norm,
                    worst: worst_equations(system, &r, 5),
                });
            }
            iterations += 1;
            let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
            let delta = self.linear.solve(n, &self.jac, &rhs)?;
            let mut lambda = 1.0;
            let mut accepted = None;
            for h in 0..=opts.max_halvings {
                let trial: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a + lambda * d).collect();
                if let Ok(rt) = system.residual(&trial, ctx) {
                    let nt = inf_norm(&rt);
                    if nt < norm {
                        halvings += h;
                        accepted = Some(trial);
                        break;
                    }
                }
                lambda *= 0.5;
            }
            let Some(trial) = accepted else {
                return Err(Error::NewtonFailed {
                    iterations,
                    residual: norm,
                    worst: format!(
                        "no decrease after {} step halvings; {}",
                        opts.max_halvings,
                        worst_equations(system, &r, 5)
                    ),
                });
            };
            *x = trial;
            r = self.jacobian(system, x, ctx, opts.jacobian_mode)?;
            norm = inf_norm(&r);
            history.push(norm);
            log::debug!("newton iteration={iterations} residual={norm:.3e} lambda={lambda}");
        }
        Ok(NewtonReport {
            iterations,
            history,
            halvings,
        })
    }
}

//! Small dense Levenberg–Marquardt engine for the Gaussian fits.
//!
//! Damping follows the classic Marquardt schedule: start at 1e-3, multiply by
//! 10 when a step raises the cost, divide by 10 when it lowers it.

use crate::error::{Error, Result};

pub(crate) struct LmOptions {
    pub max_iterations: usize,
    /// Relative cost-change convergence threshold.
    pub cost_tol: f64,
    pub lambda_init: f64,
    pub lambda_up: f64,
    pub lambda_down: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            cost_tol: 1e-10,
            lambda_init: 1e-3,
            lambda_up: 10.0,
            lambda_down: 0.1,
        }
    }
}

pub(crate) struct LmOutcome {
    pub params: Vec<f64>,
    pub cost: f64,
    pub iterations: usize,
    /// Covariance of the parameters at the optimum, scaled by the reduced
    /// chi-square; `None` when the normal equations are singular there.
    pub covariance: Option<Vec<Vec<f64>>>,
}

/// A least-squares model: residuals r_i = y_i - f(x_i; θ) and the model
/// jacobian J_ij = ∂f(x_i)/∂θ_j.
pub(crate) trait LeastSquares {
    fn dims(&self) -> (usize, usize); // (n_points, n_params)
    fn residuals(&self, params: &[f64], out: &mut [f64]);
    fn jacobian(&self, params: &[f64], out: &mut [Vec<f64>]);
    /// Reject parameter vectors outside the model's domain (e.g. σ ≤ 0).
    fn in_domain(&self, params: &[f64]) -> bool;
}

fn cost_of(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Solves A x = b for a small symmetric positive-ish system by Gaussian
/// elimination with partial pivoting. Returns None when singular.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let mut piv = col;
        let mut max = a[col][col].abs();
        for row in col + 1..n {
            if a[row][col].abs() > max {
                max = a[row][col].abs();
                piv = row;
            }
        }
        if !(max > 0.0) || !max.is_finite() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for j in col..n {
                a[row][j] -= factor * a[col][j];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = b[i];
        for j in i + 1..n {
            sum -= a[i][j] * x[j];
        }
        x[i] = sum / a[i][i];
        if !x[i].is_finite() {
            return None;
        }
    }
    Some(x)
}

fn invert(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut inv = vec![vec![0.0; n]; n];
    for (k, col) in inv.iter_mut().enumerate().take(n) {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        let x = solve(a.to_vec(), e)?;
        *col = x;
    }
    // columns of inv currently hold solutions for unit vectors: transpose
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            out[i][j] = inv[j][i];
        }
    }
    Some(out)
}

fn normal_matrix(jac: &[Vec<f64>], n_params: usize) -> Vec<Vec<f64>> {
    let mut jtj = vec![vec![0.0; n_params]; n_params];
    for row in jac {
        for i in 0..n_params {
            for j in i..n_params {
                jtj[i][j] += row[i] * row[j];
            }
        }
    }
    for i in 0..n_params {
        for j in 0..i {
            jtj[i][j] = jtj[j][i];
        }
    }
    jtj
}

pub(crate) fn minimize(problem: &dyn LeastSquares, start: &[f64], opts: &LmOptions) -> Result<LmOutcome> {
    let (n_points, n_params) = problem.dims();
    if n_points < n_params {
        return Err(Error::Fit {
            message: format!("{n_points} points cannot constrain {n_params} parameters"),
            iterations: 0,
            cost: f64::NAN,
        });
    }
    if !problem.in_domain(start) {
        return Err(Error::Fit {
            message: "start parameters outside the model domain".into(),
            iterations: 0,
            cost: f64::NAN,
        });
    }

    let mut params = start.to_vec();
    let mut residuals = vec![0.0; n_points];
    let mut trial_residuals = vec![0.0; n_points];
    let mut jac = vec![vec![0.0; n_params]; n_points];
    problem.residuals(&params, &mut residuals);
    let mut cost = cost_of(&residuals);
    let mut lambda = opts.lambda_init;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        iterations += 1;
        problem.jacobian(&params, &mut jac);
        let jtj = normal_matrix(&jac, n_params);
        let mut grad = vec![0.0; n_params];
        for (row, r) in jac.iter().zip(&residuals) {
            for (g, v) in grad.iter_mut().zip(row) {
                *g += v * r;
            }
        }

        let mut stepped = false;
        // retry with increasing damping until a step improves the cost
        for _ in 0..40 {
            let mut damped = jtj.clone();
            for (i, row) in damped.iter_mut().enumerate() {
                row[i] *= 1.0 + lambda;
                if row[i] == 0.0 {
                    row[i] = lambda * 1e-12;
                }
            }
            let delta = match solve(damped, grad.clone()) {
                Some(d) => d,
                None => {
                    return Err(Error::Fit {
                        message: "singular normal equations".into(),
                        iterations,
                        cost,
                    })
                }
            };
            let trial: Vec<f64> = params.iter().zip(&delta).map(|(p, d)| p + d).collect();
            if problem.in_domain(&trial) {
                problem.residuals(&trial, &mut trial_residuals);
                let trial_cost = cost_of(&trial_residuals);
                if trial_cost.is_finite() && trial_cost <= cost {
                    let rel_change = (cost - trial_cost) / cost.max(f64::MIN_POSITIVE);
                    params = trial;
                    cost = trial_cost;
                    residuals.copy_from_slice(&trial_residuals);
                    lambda = (lambda * opts.lambda_down).max(1e-14);
                    stepped = true;
                    if rel_change < opts.cost_tol {
                        converged = true;
                    }
                    break;
                }
            }
            lambda *= opts.lambda_up;
            if lambda > 1e14 {
                break;
            }
        }
        if !stepped {
            // no downhill step found at any damping: stationary point
            converged = true;
        }
        if converged {
            break;
        }
    }

    if !converged {
        return Err(Error::Fit {
            message: format!(
                "no convergence after {} iterations (relative cost change above {:e})",
                opts.max_iterations, opts.cost_tol
            ),
            iterations,
            cost,
        });
    }

    problem.jacobian(&params, &mut jac);
    let jtj = normal_matrix(&jac, n_params);
    let covariance = invert(&jtj).map(|mut inv| {
        let dof = (n_points - n_params).max(1) as f64;
        let scale = cost / dof;
        for row in &mut inv {
            for v in row.iter_mut() {
                *v *= scale;
            }
        }
        inv
    });

    Ok(LmOutcome {
        params,
        cost,
        iterations,
        covariance,
    })
}

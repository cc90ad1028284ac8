//! Small dense Levenberg–Marquardt solver with a forward/central
//! finite-difference Jacobian. Meant for problems with a handful of
//! parameters.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub(crate) struct LmOutcome {
    pub params: Vec<f64>,
    /// ½ Σ r².
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// JᵀJ at the solution.
    pub jtj: DMatrix<f64>,
}

fn cost_of(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|v| v * v).sum::<f64>()
}

fn jacobian<R>(residuals: &R, x: &[f64], r0: &[f64]) -> DMatrix<f64>
where
    R: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let m = r0.len();
    let n = x.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut probe = x.to_vec();
    for j in 0..n {
        let h = 1e-6 * x[j].abs().max(1e-3);
        probe[j] = x[j] + h;
        let plus = residuals(&probe);
        probe[j] = x[j] - h;
        let minus = residuals(&probe);
        probe[j] = x[j];
        match (plus, minus) {
            (Some(p), Some(q)) => {
                for i in 0..m {
                    jac[(i, j)] = (p[i] - q[i]) / (2.0 * h);
                }
            }
            (Some(p), None) => {
                for i in 0..m {
                    jac[(i, j)] = (p[i] - r0[i]) / h;
                }
            }
            (None, Some(q)) => {
                for i in 0..m {
                    jac[(i, j)] = (r0[i] - q[i]) / h;
                }
            }
            (None, None) => {}
        }
    }
    jac
}

/// Minimizes ½‖r(x)‖². `residuals` returns `None` outside the feasible region,
/// which the solver treats as an infinitely bad step.
pub(crate) fn minimize<R>(residuals: R, x0: &[f64], max_iter: usize) -> Option<LmOutcome>
where
    R: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = residuals(&x)?;
    let mut cost = cost_of(&r);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    let mut jac = jacobian(&residuals, &x, &r);
    while iterations < max_iter {
        iterations += 1;
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * DVector::from_column_slice(&r);
        if grad.amax() <= 1e-15 * (1.0 + cost) || cost < 1e-30 {
            converged = true;
            break;
        }
        let mut accepted = false;
        while lambda <= 1e16 {
            let mut a = jtj.clone();
            for j in 0..n {
                a[(j, j)] += lambda * jtj[(j, j)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&(-&grad)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(xi, si)| xi + si).collect();
            match residuals(&trial) {
                Some(rt) if cost_of(&rt) < cost => {
                    let new_cost = cost_of(&rt);
                    let small_step = step.iter().zip(&x).all(|(s, xi)| s.abs() <= 1e-13 * (xi.abs() + 1e-13));
                    let small_gain = cost - new_cost <= 1e-15 * cost;
                    x = trial;
                    r = rt;
                    cost = new_cost;
                    lambda = (lambda * 0.3).max(1e-12);
                    accepted = true;
                    if small_step || small_gain {
                        converged = true;
                    }
                    break;
                }
                _ => lambda *= 4.0,
            }
        }
        if !accepted {
            // No descent direction left at machine precision.
            converged = true;
            break;
        }
        jac = jacobian(&residuals, &x, &r);
        if converged {
            break;
        }
    }
    let jtj = jac.transpose() * &jac;
    Some(LmOutcome { params: x, cost, iterations, converged, jtj })
}

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::chart::Problem;
use super::OracleError;
use crate::geom::Configuration;

pub const GRADIENT_STEP: f64 = 1e-6;
pub const GRADIENT_TOL: f64 = 1e-6;
pub const HESSIAN_STEP: f64 = 1e-4;
pub const HESSIAN_TOL: f64 = 1e-4;

/// Normwise relative errors of the analytic derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdReport {
    pub gradient_error: f64,
    pub hessian_error: f64,
    pub jacobian_error: f64,
}

/// One analytic entry that disagrees with its finite difference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdMismatch {
    pub quantity: String,
    pub row: usize,
    pub col: usize,
    pub analytic: f64,
    pub numeric: f64,
}

fn rel_error(a: &DMatrix<f64>, b: &DMatrix<f64>, floor: f64) -> f64 {
    (a - b).amax() / a.amax().max(floor)
}

fn mismatches(name: &str, a: &DMatrix<f64>, b: &DMatrix<f64>, limit: f64) -> Vec<FdMismatch> {
    let mut out = Vec::new();
    for r in 0..a.nrows() {
        for c in 0..a.ncols() {
            if (a[(r, c)] - b[(r, c)]).abs() > limit {
                out.push(FdMismatch {
                    quantity: name.into(),
                    row: r,
                    col: c,
                    analytic: a[(r, c)],
                    numeric: b[(r, c)],
                });
            }
        }
    }
    out
}

/// Compares the analytic gradient, Hessian and constraint Jacobian with
/// central differences at a configuration.
pub fn fd_check(problem: &Problem, c: &Configuration) -> Result<FdReport, OracleError> {
    let x = problem.chart.coordinates(c)?;
    let grad = problem.objective.gradient(&problem.chart, &x);
    check_with_gradient(problem, &x, &grad)
}

/// Same as [`fd_check`] at chart coordinates, with the analytic gradient
/// supplied by the caller.
pub fn check_with_gradient(problem: &Problem, x: &DVector<f64>, grad: &DVector<f64>) -> Result<FdReport, OracleError> {
    let chart = &problem.chart;
    let f = |y: &DVector<f64>| problem.objective.value(chart, y);
    let n = x.len();
    let floor = 1e-8 * problem.scale().powi(2);

    let unit = |i: usize, h: f64| {
        let mut e = DVector::zeros(n);
        e[i] = h;
        e
    };
    let fd_grad = DVector::from_fn(n, |i, _| {
        let h = unit(i, GRADIENT_STEP);
        (f(&(x + &h)) - f(&(x - &h))) / (2.0 * GRADIENT_STEP)
    });
    let hs = HESSIAN_STEP;
    let fd_hess = DMatrix::from_fn(n, n, |i, j| {
        let (a, b) = (unit(i, hs), unit(j, hs));
        (f(&(x + &a + &b)) - f(&(x + &a - &b)) - f(&(x - &a + &b)) + f(&(x - &a - &b))) / (4.0 * hs * hs)
    });
    let m = chart.constraint_count();
    let fd_jac = DMatrix::from_fn(m, n, |r, i| {
        let h = unit(i, GRADIENT_STEP);
        (chart.constraints(&(x + &h))[r] - chart.constraints(&(x - &h))[r]) / (2.0 * GRADIENT_STEP)
    });

    let grad_m = DMatrix::from_column_slice(n, 1, grad.as_slice());
    let fd_grad_m = DMatrix::from_column_slice(n, 1, fd_grad.as_slice());
    let hess = problem.objective.hessian(chart, x);
    let jac = chart.constraint_jacobian(x);
    let report = FdReport {
        gradient_error: rel_error(&grad_m, &fd_grad_m, floor),
        hessian_error: rel_error(&hess, &fd_hess, floor),
        jacobian_error: if m == 0 { 0.0 } else { rel_error(&jac, &fd_jac, 1e-8 * problem.scale()) },
    };
    let mut bad = Vec::new();
    if report.gradient_error > GRADIENT_TOL {
        bad.extend(mismatches("gradient", &grad_m, &fd_grad_m, GRADIENT_TOL * grad_m.amax().max(floor)));
    }
    if report.hessian_error > HESSIAN_TOL {
        bad.extend(mismatches("hessian", &hess, &fd_hess, HESSIAN_TOL * hess.amax().max(floor)));
    }
    if report.jacobian_error > GRADIENT_TOL {
        bad.extend(mismatches("jacobian", &jac, &fd_jac, GRADIENT_TOL * jac.amax()));
    }
    if bad.is_empty() {
        Ok(report)
    } else {
        Err(OracleError::CheckFailed(bad))
    }
}

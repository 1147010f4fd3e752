//! Levenberg-Marquardt for small dense problems.

use nalgebra::{DMatrix, DVector};

use crate::error::FitError;

/// A least-squares problem: residuals `r(p)` whose sum of squares is minimised.
pub trait Problem {
    fn n_params(&self) -> usize;
    fn n_residuals(&self) -> usize;
    fn residuals(&self, p: &[f64], out: &mut [f64]);

    /// Jacobian `d r_i / d p_j`. Central differences unless overridden.
    fn jacobian(&self, p: &[f64], jac: &mut DMatrix<f64>) {
        let m = self.n_residuals();
        let mut plus = vec![0.0; m];
        let mut minus = vec![0.0; m];
        let mut q = p.to_vec();
        for j in 0..p.len() {
            let h = 1e-6 * p[j].abs().max(1e-3);
            q[j] = p[j] + h;
            self.residuals(&q, &mut plus);
            q[j] = p[j] - h;
            self.residuals(&q, &mut minus);
            q[j] = p[j];
            for i in 0..m {
                jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Converged when `|dp| <= step_tolerance * (|p| + step_tolerance)`.
    pub step_tolerance: f64,
    pub initial_lambda: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iterations: 200, step_tolerance: 1e-10, initial_lambda: 1e-3 }
    }
}

#[derive(Debug, Clone)]
pub struct LmSolution {
    pub params: Vec<f64>,
    /// `s^2 (J^T J)^-1` with `s^2 = SSR / (m - n)`; `None` when `J^T J` is singular.
    pub covariance: Option<DMatrix<f64>>,
    pub residual_rms: f64,
    pub iterations: usize,
}

impl LmSolution {
    /// Standard errors, `NaN` where the covariance is unavailable.
    pub fn std_errors(&self) -> Vec<f64> {
        match &self.covariance {
            Some(c) => (0..self.params.len()).map(|i| c[(i, i)].max(0.0).sqrt()).collect(),
            None => vec![f64::NAN; self.params.len()],
        }
    }
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

/// Minimise `|r(p)|^2` from `p0`.
///
/// Damping follows Marquardt: `(J^T J + lambda diag(J^T J)) dp = -J^T r`,
/// `lambda` divided by 10 after an accepted step and multiplied by 10 after a
/// rejected one. When no step can lower the cost any more (`lambda > 1e15`)
/// the current point is a minimum to working precision and is returned.
pub fn levenberg_marquardt<P: Problem + ?Sized>(problem: &P, p0: &[f64], opts: &LmOptions) -> Result<LmSolution, FitError> {
    let n = problem.n_params();
    let m = problem.n_residuals();
    if n == 0 {
        return Err(FitError::UnderDetermined);
    }
    if m < n {
        return Err(FitError::TooFewPoints { need: n, got: m });
    }
    let mut p = p0.to_vec();
    let mut r = vec![0.0; m];
    problem.residuals(&p, &mut r);
    if r.iter().any(|x| !x.is_finite()) {
        return Err(FitError::Invalid("non-finite residual at the initial point".into()));
    }
    let mut cost = sum_sq(&r);
    let mut jac = DMatrix::zeros(m, n);
    let mut trial = vec![0.0; m];
    let mut lambda = opts.initial_lambda;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        iterations += 1;
        problem.jacobian(&p, &mut jac);
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * DVector::from_column_slice(&r);
        if cost == 0.0 || grad.amax() == 0.0 {
            converged = true;
            break;
        }
        let diag_max = (0..n).map(|i| jtj[(i, i)]).fold(0.0f64, f64::max);
        let floor = diag_max * 1e-12;
        let mut accepted = false;
        while lambda <= 1e15 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += lambda * jtj[(i, i)].max(floor);
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let cand: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            problem.residuals(&cand, &mut trial);
            let c = sum_sq(&trial);
            if c.is_finite() && c < cost {
                let small = step.norm() <= opts.step_tolerance * (DVector::from_column_slice(&p).norm() + opts.step_tolerance);
                p = cand;
                std::mem::swap(&mut r, &mut trial);
                cost = c;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if small {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            converged = true;
        }
        if converged {
            break;
        }
    }
    if !converged {
        return Err(FitError::NotConverged { iterations, last: p });
    }
    problem.jacobian(&p, &mut jac);
    let covariance = covariance(&jac, cost, m, n);
    Ok(LmSolution { params: p, covariance, residual_rms: (cost / m as f64).sqrt(), iterations })
}

/// `s^2 (J^T J)^-1`, computed on column-scaled `J` to keep the inversion well conditioned.
fn covariance(jac: &DMatrix<f64>, cost: f64, m: usize, n: usize) -> Option<DMatrix<f64>> {
    let norms: Vec<f64> = (0..n).map(|j| jac.column(j).norm()).collect();
    if norms.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return None;
    }
    let mut scaled = jac.clone();
    for (j, s) in norms.iter().enumerate() {
        scaled.column_mut(j).unscale_mut(*s);
    }
    let jtj = scaled.transpose() * scaled;
    let svd = jtj.clone().svd(false, false);
    let (smax, smin) = svd.singular_values.iter().fold((0.0f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
    if !(smin > smax * 1e-14) {
        return None;
    }
    let inv = jtj.cholesky()?.inverse();
    let s2 = if m > n { cost / (m - n) as f64 } else { 0.0 };
    let mut cov = inv * s2;
    for i in 0..n {
        for j in 0..n {
            cov[(i, j)] /= norms[i] * norms[j];
        }
    }
    Some(cov)
}

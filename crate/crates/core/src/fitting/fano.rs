//! Fano lineshape fits and linewidth statistics.

use serde::{Deserialize, Serialize};

use super::lm::{levenberg_marquardt, LmOptions, Problem};
use super::peaks::Peak;
use crate::error::FitError;

/// `F(f) = amplitude (q gamma/2 + f - f0)^2 / ((gamma/2)^2 + (f - f0)^2) + offset`.
///
/// `gamma` is the full width. Large `q` tends to a Lorentzian peak of height
/// `amplitude q^2` above `offset`; `q = 0` is a symmetric dip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FanoParams {
    pub f0: f64,
    pub gamma: f64,
    pub q_fano: f64,
    pub amplitude: f64,
    pub offset: f64,
}

impl FanoParams {
    pub fn eval(&self, f: f64) -> f64 {
        let h = 0.5 * self.gamma;
        let d = f - self.f0;
        let num = self.q_fano * h + d;
        self.amplitude * num * num / (h * h + d * d) + self.offset
    }

    /// Seed from a detected peak: `q = 3`, amplitude and offset matched to the
    /// peak height and the trace minimum.
    pub fn seed(peak: &Peak<f64>, trace: &[(f64, f64)]) -> Self {
        let base = trace.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let q = 3.0;
        let amplitude = ((peak.height - base) / (q * q - 1.0)).max(f64::MIN_POSITIVE);
        Self { f0: peak.freq, gamma: peak.width.max(f64::MIN_POSITIVE), q_fano: q, amplitude, offset: base - amplitude }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FanoFit {
    pub params: FanoParams,
    /// One-sigma uncertainties from the covariance matrix.
    pub uncertainty: FanoParams,
    pub residual_rms: f64,
    pub iterations: usize,
}

/// Parameters in units of the initial width and trace scale, so all are O(1).
struct Scaled<'a> {
    trace: &'a [(f64, f64)],
    f_ref: f64,
    w_ref: f64,
    y_ref: f64,
}

impl Scaled<'_> {
    fn unpack(&self, u: &[f64]) -> FanoParams {
        FanoParams {
            f0: self.f_ref + u[0] * self.w_ref,
            gamma: u[1] * self.w_ref,
            q_fano: u[2],
            amplitude: u[3] * self.y_ref,
            offset: u[4] * self.y_ref,
        }
    }

    fn pack(&self, p: &FanoParams) -> Vec<f64> {
        vec![(p.f0 - self.f_ref) / self.w_ref, p.gamma / self.w_ref, p.q_fano, p.amplitude / self.y_ref, p.offset / self.y_ref]
    }
}

impl Problem for Scaled<'_> {
    fn n_params(&self) -> usize {
        5
    }

    fn n_residuals(&self) -> usize {
        self.trace.len()
    }

    fn residuals(&self, u: &[f64], out: &mut [f64]) {
        // evaluated on detuning in width units to avoid cancellation at GHz scale
        let (x0, h, q, a, c) = (u[0], 0.5 * u[1], u[2], u[3], u[4]);
        for (o, &(f, y)) in out.iter_mut().zip(self.trace) {
            let d = (f - self.f_ref) / self.w_ref - x0;
            let num = q * h + d;
            *o = a * num * num / (h * h + d * d) + c - y / self.y_ref;
        }
    }
}

/// Least-squares Fano fit of `trace` (sorted by frequency) starting at `init`.
pub fn fit_fano(trace: &[(f64, f64)], init: &FanoParams) -> Result<FanoFit, FitError> {
    fit_fano_with(trace, init, &LmOptions::default())
}

pub fn fit_fano_with(trace: &[(f64, f64)], init: &FanoParams, opts: &LmOptions) -> Result<FanoFit, FitError> {
    if trace.len() < 6 {
        return Err(FitError::TooFewPoints { need: 6, got: trace.len() });
    }
    if trace.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(FitError::Unsorted);
    }
    if !(init.gamma > 0.0) || !init.f0.is_finite() {
        return Err(FitError::Invalid(format!("initial width must be positive, got {}", init.gamma)));
    }
    let y_ref = trace.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    let problem = Scaled { trace, f_ref: init.f0, w_ref: init.gamma, y_ref: if y_ref > 0.0 { y_ref } else { 1.0 } };
    let sol = levenberg_marquardt(&problem, &problem.pack(init), opts).map_err(|e| match e {
        FitError::NotConverged { iterations, last } => {
            let p = problem.unpack(&last);
            FitError::NotConverged { iterations, last: vec![p.f0, p.gamma, p.q_fano, p.amplitude, p.offset] }
        }
        other => other,
    })?;
    let cov_err = sol.std_errors();
    if cov_err.iter().any(|e| e.is_nan()) {
        return Err(FitError::SingularJacobian);
    }
    let mut params = problem.unpack(&sol.params);
    // (gamma, q) and (-gamma, -q) give the same curve
    if params.gamma < 0.0 {
        params.gamma = -params.gamma;
        params.q_fano = -params.q_fano;
    }
    let uncertainty = FanoParams {
        f0: cov_err[0] * problem.w_ref,
        gamma: cov_err[1] * problem.w_ref,
        q_fano: cov_err[2],
        amplitude: cov_err[3] * problem.y_ref,
        offset: cov_err[4] * problem.y_ref,
    };
    Ok(FanoFit { params, uncertainty, residual_rms: sol.residual_rms * problem.y_ref, iterations: sol.iterations })
}

/// Sample mean and sample standard deviation of the fitted widths.
pub fn linewidth_stats(fits: &[FanoParams]) -> Result<(f64, f64), FitError> {
    if fits.len() < 2 {
        return Err(FitError::TooFewPoints { need: 2, got: fits.len() });
    }
    let n = fits.len() as f64;
    let mean = fits.iter().map(|p| p.gamma).sum::<f64>() / n;
    let var = fits.iter().map(|p| (p.gamma - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, var.sqrt()))
}

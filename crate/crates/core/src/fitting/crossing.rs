//! Two-oscillator fits of avoided-crossing branches.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::lm::{levenberg_marquardt, LmOptions, Problem};
use crate::coupled::two_mode_branches;
use crate::error::FitError;

/// Which points enter the fit, relative to the crossing field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Fields above the crossing (magnon above the photon).
    #[default]
    Right,
    Left,
    Both,
}

impl std::str::FromStr for Side {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "right" => Ok(Side::Right),
            "left" => Ok(Side::Left),
            "both" => Ok(Side::Both),
            _ => Err(format!("unknown side `{s}` (expected right, left or both)")),
        }
    }
}

/// Magnon dispersion parameters held fixed during the fit.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CrossingFixed {
    pub slope: Option<f64>,
    pub offset: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingFit {
    pub omega_c: f64,
    /// Coupling, `g/2pi` in Hz.
    pub g: f64,
    pub slope: f64,
    pub offset: f64,
    pub residual_rms: f64,
    pub side: Side,
    /// One-sigma uncertainties of `(omega_c, g, slope, offset)`; zero for fixed
    /// parameters, `NaN` when the covariance is singular.
    pub uncertainty: [f64; 4],
    /// Points used after the side filter.
    pub points_used: usize,
}

impl CrossingFit {
    pub fn crossing_field(&self) -> f64 {
        (self.omega_c - self.offset) / self.slope
    }

    /// Branch frequency at `b` on the branch nearest `f`.
    pub fn predict(&self, b: f64, f: f64) -> f64 {
        branch(self.omega_c, self.slope * b + self.offset, self.g, f)
    }
}

fn branch(omega_c: f64, omega_m: f64, g: f64, f: f64) -> f64 {
    let (upper, lower) = two_mode_branches(omega_c, omega_m, g);
    if f >= 0.5 * (omega_c + omega_m) {
        upper
    } else {
        lower
    }
}

/// Residuals of points already divided by the frequency and field scales.
/// The full parameter vector is `(omega_c, g, slope, offset)`.
struct CrossingProblem<'a> {
    points: &'a [(f64, f64)],
    /// `Some(value)` for fixed entries of the scaled vector.
    fixed: [Option<f64>; 4],
}

impl CrossingProblem<'_> {
    fn full(&self, u: &[f64]) -> [f64; 4] {
        let mut out = [0.0; 4];
        let mut k = 0;
        for (i, fx) in self.fixed.iter().enumerate() {
            out[i] = match fx {
                Some(v) => *v,
                None => {
                    k += 1;
                    u[k - 1]
                }
            };
        }
        out
    }
}

impl Problem for CrossingProblem<'_> {
    fn n_params(&self) -> usize {
        self.fixed.iter().filter(|f| f.is_none()).count()
    }

    fn n_residuals(&self) -> usize {
        self.points.len()
    }

    fn residuals(&self, u: &[f64], out: &mut [f64]) {
        let [wc, g, s, o] = self.full(u);
        for (r, &(b, f)) in out.iter_mut().zip(self.points) {
            *r = branch(wc, s * b + o, g, f) - f;
        }
    }
}

/// Algebraic seed from `(f - omega_c)(f - omega_m(B)) = g^2`, which is linear in
/// `(slope, omega_c + offset, omega_c slope, omega_c offset - g^2)`.
/// Returns `(omega_c, g, slope, offset)`; inputs already scaled.
fn linear_seed(points: &[(f64, f64)], fixed: &CrossingFixed) -> Option<[f64; 4]> {
    let n = points.len();
    match (fixed.slope, fixed.offset) {
        (Some(s), Some(o)) => {
            // f^2 - f wm = omega_c (f - wm) + g^2
            let a = DMatrix::from_fn(n, 2, |i, j| {
                let (b, f) = points[i];
                if j == 0 {
                    f - (s * b + o)
                } else {
                    1.0
                }
            });
            let y = DVector::from_fn(n, |i, _| {
                let (b, f) = points[i];
                f * f - f * (s * b + o)
            });
            let x = a.svd(true, true).solve(&y, 1e-14).ok()?;
            Some([x[0], x[1].max(0.0).sqrt(), s, o])
        }
        _ => {
            // f^2 = a fB + b f - c B - d
            let a = DMatrix::from_fn(n, 4, |i, j| {
                let (b, f) = points[i];
                [f * b, f, -b, -1.0][j]
            });
            let y = DVector::from_fn(n, |i, _| points[i].1 * points[i].1);
            let x = a.svd(true, true).solve(&y, 1e-14).ok()?;
            let slope = fixed.slope.unwrap_or(x[0]);
            if slope == 0.0 {
                return None;
            }
            let omega_c = x[2] / slope;
            let offset = fixed.offset.unwrap_or(x[1] - omega_c);
            let g2 = omega_c * offset - x[3];
            Some([omega_c, g2.max(0.0).sqrt(), slope, offset])
        }
    }
}

/// Fit `two_mode_branches` to `(B, f)` points. Each point is compared with
/// whichever branch lies on its side of the mean frequency.
///
/// With `side` other than [`Side::Both`], points are first restricted to fields
/// above (right) or below (left) a crossing-field estimate from an algebraic
/// seed fit of all points.
pub fn fit_avoided_crossing(points: &[(f64, f64)], side: Side, fixed: CrossingFixed) -> Result<CrossingFit, FitError> {
    fit_avoided_crossing_with(points, side, fixed, &LmOptions::default())
}

pub fn fit_avoided_crossing_with(
    points: &[(f64, f64)],
    side: Side,
    fixed: CrossingFixed,
    opts: &LmOptions,
) -> Result<CrossingFit, FitError> {
    const MIN_POINTS: usize = 5;
    if points.len() < MIN_POINTS {
        return Err(FitError::TooFewPoints { need: MIN_POINTS, got: points.len() });
    }
    if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(FitError::Invalid("non-finite point".into()));
    }
    let f_scale = points.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    let b_scale = points.iter().map(|p| p.0.abs()).fold(0.0, f64::max);
    if !(f_scale > 0.0) || !(b_scale > 0.0) {
        return Err(FitError::Invalid("points must span nonzero field and frequency".into()));
    }
    let scaled_fixed = CrossingFixed {
        slope: fixed.slope.map(|s| s * b_scale / f_scale),
        offset: fixed.offset.map(|o| o / f_scale),
    };
    let scaled: Vec<(f64, f64)> = points.iter().map(|&(b, f)| (b / b_scale, f / f_scale)).collect();
    let seed_all = linear_seed(&scaled, &scaled_fixed).ok_or(FitError::SingularJacobian)?;
    let used: Vec<(f64, f64)> = match side {
        Side::Both => scaled,
        _ => {
            let b_cross = (seed_all[0] - seed_all[3]) / seed_all[2];
            scaled.into_iter().filter(|&(b, _)| if side == Side::Right { b > b_cross } else { b < b_cross }).collect()
        }
    };
    let fixed_mask = [None, None, scaled_fixed.slope, scaled_fixed.offset];
    let n_free = fixed_mask.iter().filter(|f| f.is_none()).count();
    if used.len() < MIN_POINTS.max(n_free + 1) {
        return Err(FitError::TooFewPoints { need: MIN_POINTS.max(n_free + 1), got: used.len() });
    }
    let seed = linear_seed(&used, &scaled_fixed).unwrap_or(seed_all);
    let problem = CrossingProblem { points: &used, fixed: fixed_mask };
    let u0: Vec<f64> = (0..4).filter(|&i| fixed_mask[i].is_none()).map(|i| seed[i]).collect();
    let sol = levenberg_marquardt(&problem, &u0, opts)?;
    let [wc, g, s, o] = problem.full(&sol.params);
    let errs = sol.std_errors();
    let mut uncertainty = [0.0; 4];
    let mut k = 0;
    for (i, fx) in fixed_mask.iter().enumerate() {
        if fx.is_none() {
            uncertainty[i] = errs[k];
            k += 1;
        }
    }
    let units = [f_scale, f_scale, f_scale / b_scale, f_scale];
    for (u, unit) in uncertainty.iter_mut().zip(units) {
        *u *= unit;
    }
    Ok(CrossingFit {
        omega_c: wc * f_scale,
        g: g.abs() * f_scale,
        slope: s * f_scale / b_scale,
        offset: o * f_scale,
        residual_rms: sol.residual_rms * f_scale,
        side,
        uncertainty,
        points_used: used.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn branches(wc: f64, g: f64, s: f64, o: f64, bs: &[f64]) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for &b in bs {
            let (u, l) = two_mode_branches(wc, s * b + o, g);
            out.push((b, u));
            out.push((b, l));
        }
        out
    }

    #[test]
    fn round_trip_all_free() {
        let bs: Vec<f64> = (0..60).map(|i| 0.3 + i as f64 * 0.01).collect();
        let pts = branches(15.506e9, 3.555e9, 24.49e9, 0.0, &bs);
        let fit = fit_avoided_crossing(&pts, Side::Both, CrossingFixed::default()).unwrap();
        assert!((fit.omega_c / 15.506e9 - 1.0).abs() < 1e-8);
        assert!((fit.g / 3.555e9 - 1.0).abs() < 1e-8);
        assert!((fit.slope / 24.49e9 - 1.0).abs() < 1e-8);
        assert!(fit.offset.abs() < 1e2);
    }

    #[test]
    fn side_filter_keeps_right_points() {
        let bs: Vec<f64> = (0..60).map(|i| 0.3 + i as f64 * 0.01).collect();
        let pts = branches(15.506e9, 3.555e9, 24.49e9, 0.0, &bs);
        let fit = fit_avoided_crossing(&pts, Side::Right, CrossingFixed::default()).unwrap();
        let b_cross = 15.506e9 / 24.49e9;
        assert_eq!(fit.points_used, pts.iter().filter(|p| p.0 > b_cross).count());
    }

    #[test]
    fn under_determined() {
        let pts = vec![(0.1, 1.0), (0.2, 1.0), (0.3, 1.0), (0.4, 1.0)];
        assert!(matches!(fit_avoided_crossing(&pts, Side::Both, CrossingFixed::default()), Err(FitError::TooFewPoints { .. })));
    }
}

//! Map to per-mode coupling reports: ridges, crossing fits, mode matching.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::crossing::{fit_avoided_crossing, CrossingFit, CrossingFixed, Side};
use super::ridges::{extract_ridges, Ridge, RidgeOptions};
use crate::coupled::TransmissionMap;
use crate::error::FitError;
use crate::model::{DerivedModeReport, MagnonBranch, PhotonMode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    pub ridge: RidgeOptions<f64>,
    pub side: Side,
    /// Hold slope and offset at the supplied magnon branch.
    pub fix_magnon: bool,
    /// Ridges shorter than this are not fitted.
    pub min_ridge_points: usize,
    /// Fits with `g` below this many frequency bins count as uncoupled.
    pub min_g_bins: f64,
    /// Fits whose relative one-sigma uncertainty on `g` exceeds this are not
    /// matched; the mode is reported unmatched instead of with a poor value.
    pub max_g_rel_uncertainty: f64,
    /// Largest `|omega_c(fit) - omega_c(mode)|` accepted as a match. Defaults to
    /// half the smallest spacing between the supplied modes.
    pub match_tolerance_hz: Option<f64>,
    /// Points further than this many robust standard deviations from the fit
    /// are dropped before refitting.
    pub trim_sigma: f64,
    pub trim_rounds: usize,
    /// Standard deviation of the magnon half linewidth, for cooperativity errors.
    pub gamma_mag_sd: Option<f64>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            ridge: RidgeOptions { refine: true, ..RidgeOptions::default() },
            side: Side::Right,
            fix_magnon: true,
            min_ridge_points: 10,
            min_g_bins: 2.0,
            max_g_rel_uncertainty: 0.01,
            match_tolerance_hz: None,
            trim_sigma: 4.0,
            trim_rounds: 3,
            gamma_mag_sd: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeFit {
    pub label: String,
    pub crossing: CrossingFit,
    pub report: DerivedModeReport<f64>,
    /// Ridge points before side filtering and trimming.
    pub ridge_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeFailure {
    pub label: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub fits: Vec<ModeFit>,
    pub failures: Vec<ModeFailure>,
    /// Modes with no matching crossing in the map.
    pub unmatched: Vec<String>,
    pub ridges_found: usize,
}

/// Fit one ridge, dropping outliers over `opts.trim_rounds` refits.
pub fn fit_ridge(ridge: &Ridge<f64>, fixed: CrossingFixed, opts: &PipelineOptions) -> Result<CrossingFit, FitError> {
    let mut points = ridge.points.clone();
    let mut fit = fit_avoided_crossing(&points, opts.side, fixed)?;
    for _ in 0..opts.trim_rounds {
        let b_cross = fit.crossing_field();
        points.retain(|&(b, _)| match opts.side {
            Side::Right => b > b_cross,
            Side::Left => b < b_cross,
            Side::Both => true,
        });
        let residuals: Vec<f64> = points.iter().map(|&(b, f)| f - fit.predict(b, f)).collect();
        let sigma = 1.4826 * median_abs_deviation(&residuals);
        let limit = opts.trim_sigma * sigma.max(fit.residual_rms * 1e-3).max(f64::MIN_POSITIVE);
        let before = points.len();
        let kept: Vec<(f64, f64)> = points.iter().zip(&residuals).filter(|(_, r)| r.abs() <= limit).map(|(p, _)| *p).collect();
        if kept.len() == before {
            break;
        }
        points = kept;
        fit = fit_avoided_crossing(&points, opts.side, fixed)?;
    }
    Ok(fit)
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = v.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn median_abs_deviation(r: &[f64]) -> f64 {
    let mut v = r.to_vec();
    let m = median(&mut v);
    let mut d: Vec<f64> = r.iter().map(|x| (x - m).abs()).collect();
    median(&mut d)
}

/// Extract ridges from `map`, fit each, and match fits to `photons` by their
/// fitted asymptotic frequency. `filling` holds optional filling factors
/// aligned with `photons` (it may be shorter).
pub fn fit_map(
    map: &TransmissionMap<f64>,
    photons: &[PhotonMode<f64>],
    magnon: &MagnonBranch<f64>,
    filling: &[Option<f64>],
    opts: &PipelineOptions,
) -> PipelineReport {
    let ridges = extract_ridges(map, &opts.ridge);
    let f_axis = map.f_axis();
    let bin = (f_axis[f_axis.len() - 1] - f_axis[0]) / (f_axis.len() - 1) as f64;
    let fixed = if opts.fix_magnon {
        CrossingFixed { slope: Some(magnon.slope), offset: Some(magnon.offset) }
    } else {
        CrossingFixed::default()
    };
    let candidates: Vec<(usize, CrossingFit)> = ridges
        .par_iter()
        .enumerate()
        .filter(|(_, r)| r.len() >= opts.min_ridge_points)
        .filter_map(|(i, r)| fit_ridge(r, fixed, opts).ok().map(|f| (i, f)))
        .filter(|(_, f)| f.g >= opts.min_g_bins * bin && f.points_used >= opts.min_ridge_points)
        .collect();

    let tolerance = opts.match_tolerance_hz.unwrap_or_else(|| {
        let mut omegas: Vec<f64> = photons.iter().map(|p| p.omega).collect();
        omegas.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let spacing = omegas.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let cap = 0.05 * omegas.first().copied().unwrap_or(0.0);
        (0.5 * spacing).min(cap)
    });
    // Best-determined coupling first. Short noise fragments and branches
    // contaminated by a neighbouring crossing give loose `g`.
    let mut pairs: Vec<(f64, f64, usize, usize)> = Vec::new();
    for (ci, (_, fit)) in candidates.iter().enumerate() {
        for (pi, p) in photons.iter().enumerate() {
            let d = (fit.omega_c - p.omega).abs();
            let score = fit.uncertainty[1] / fit.g;
            if d <= tolerance && score <= opts.max_g_rel_uncertainty {
                pairs.push((score, d, pi, ci));
            }
        }
    }
    pairs.sort_by(|a, b| {
        a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)).then(a.3.cmp(&b.3))
    });
    let mut photon_match: Vec<Option<usize>> = vec![None; photons.len()];
    let mut cand_used = vec![false; candidates.len()];
    for (_, _, pi, ci) in pairs {
        if photon_match[pi].is_none() && !cand_used[ci] {
            photon_match[pi] = Some(ci);
            cand_used[ci] = true;
        }
    }

    let mut report = PipelineReport { ridges_found: ridges.len(), ..Default::default() };
    for (pi, photon) in photons.iter().enumerate() {
        let Some(ci) = photon_match[pi] else {
            report.unmatched.push(photon.label.clone());
            continue;
        };
        let (ri, fit) = &candidates[ci];
        let xi = filling.get(pi).copied().flatten();
        match DerivedModeReport::compute(photon, fit.g, magnon.gamma_half, opts.gamma_mag_sd, xi) {
            Ok(derived) => report.fits.push(ModeFit {
                label: photon.label.clone(),
                crossing: fit.clone(),
                report: derived,
                ridge_points: ridges[*ri].len(),
            }),
            Err(e) => report.failures.push(ModeFailure { label: photon.label.clone(), message: e.to_string() }),
        }
    }
    report
}

use std::path::{Path, PathBuf};
use std::time::Instant;

use magnon_core::coupled::{linspace, transmission_map, Noise};
use magnon_core::fitting::{find_peaks, fit_fano, fit_map, linewidth_stats, FanoParams, PipelineReport};
use magnon_core::map_io;
use magnon_core::sphere::{extract_permittivity, modes_csv, solve_modes, PermittivityOptions, SphereMode};
use magnon_core::DerivedModeReport;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{is_binary_path, parse_traces, read_map, write_atomic};

/// Command-line values that override the configuration.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub seed: Option<u64>,
    pub f_meas_hz: Option<f64>,
}

fn output_path(cfg: &RunConfig, ov: &Overrides, default: &str) -> PathBuf {
    ov.out
        .clone()
        .or_else(|| cfg.io.as_ref().and_then(|io| io.output.clone()))
        .unwrap_or_else(|| PathBuf::from(default))
}

fn input_path(cfg: &RunConfig, ov: &Overrides) -> Result<PathBuf, CliError> {
    ov.input
        .clone()
        .or_else(|| cfg.io.as_ref().and_then(|io| io.input.clone()))
        .ok_or_else(|| CliError::Validation("no input file (set --input or io.input)".into()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(std::io::Error::other)?;
        writeln!(w)
    })
}

pub fn simulate(cfg: &RunConfig, ov: &Overrides) -> Result<String, CliError> {
    let sys = cfg.system()?.build()?;
    let sweep = cfg.sweep()?;
    let b = linspace(sweep.b_min_tesla, sweep.b_max_tesla, sweep.b_steps);
    let f = linspace(sweep.f_min_hz, sweep.f_max_hz, sweep.f_steps);
    let seed = ov.seed.unwrap_or(sweep.seed);
    if !(sweep.noise_amplitude >= 0.0) {
        return Err(CliError::Validation(format!("sweep.noise_amplitude: must be >= 0, got {}", sweep.noise_amplitude)));
    }
    let noise = (sweep.noise_amplitude > 0.0).then_some(Noise { amplitude: sweep.noise_amplitude, seed });
    let start = Instant::now();
    let map = transmission_map(&sys, &b, &f, noise).map_err(|e| CliError::Validation(format!("sweep: {e}")))?;
    let out = output_path(cfg, ov, "map.csv");
    if is_binary_path(&out) {
        write_atomic(&out, |w| map_io::write_binary(&map, w))?;
    } else {
        write_atomic(&out, |w| map_io::write_csv(&map, w))?;
    }
    let (nb, nf) = map.shape();
    Ok(format!(
        "grid {nb} x {nf} ({} points), wall time {:.3} s, wrote {}",
        nb * nf,
        start.elapsed().as_secs_f64(),
        out.display()
    ))
}

pub fn fit(cfg: &RunConfig, ov: &Overrides) -> Result<String, CliError> {
    let system = cfg.system()?;
    let fit_cfg = cfg.fit()?;
    let photons = system.photon_modes()?;
    let magnons = system.magnon_branches()?;
    let k = fit_cfg.magnon_index;
    let magnon = magnons
        .get(k)
        .ok_or_else(|| CliError::Validation(format!("fit.magnon_index: no magnon branch {k}")))?;
    let opts = fit_cfg.pipeline_options(system.magnon_gamma_sd(k)?)?;
    let map = read_map(&input_path(cfg, ov)?)?;
    let report = fit_map(&map, &photons, magnon, &system.filling_factors(), &opts);
    let out = output_path(cfg, ov, "fit.json");
    write_json(&out, &report)?;
    Ok(format!(
        "{} ridges, fitted {} of {} modes ({} failed, {} unmatched), wrote {}",
        report.ridges_found,
        report.fits.len(),
        photons.len(),
        report.failures.len(),
        report.unmatched.len(),
        out.display()
    ))
}

pub fn read_fit_report(path: &Path) -> Result<PipelineReport, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

pub fn modes(cfg: &RunConfig, ov: &Overrides) -> Result<String, CliError> {
    let s = cfg.sphere()?;
    let report = solve_modes(s.eps_r, s.radius_m, (s.f_min_hz, s.f_max_hz), s.ell_max, &s.families()?, &s.scan_options())?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let out = output_path(cfg, ov, "modes.csv");
    let text = modes_csv(&report.modes);
    write_atomic(&out, |w| w.write_all(text.as_bytes()))?;
    Ok(format!("{} modes, wrote {}", report.modes.len(), out.display()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonReport {
    pub f_meas_hz: f64,
    pub radius_m: f64,
    pub epsilon: f64,
    pub uncertainty: f64,
    pub mode: SphereMode,
    /// `(epsilon, f_sim - f_meas)` samples, Hz.
    pub delta_f_curve: Vec<(f64, f64)>,
}

pub fn epsilon(cfg: &RunConfig, ov: &Overrides) -> Result<String, CliError> {
    let s = cfg.sphere()?;
    let f_meas = ov
        .f_meas_hz
        .or(s.f_meas_hz)
        .ok_or_else(|| CliError::Validation("no measured frequency (set --f-meas-hz or sphere.f_meas_hz)".into()))?;
    let opts = PermittivityOptions { radius_tolerance_m: s.radius_tolerance_m, scan: s.scan_options(), ..Default::default() };
    let fit = extract_permittivity(f_meas, s.target()?, s.radius_m, (s.eps_min, s.eps_max), &opts)?;
    let report = EpsilonReport {
        f_meas_hz: f_meas,
        radius_m: s.radius_m,
        epsilon: fit.epsilon,
        uncertainty: fit.uncertainty,
        mode: fit.mode,
        delta_f_curve: fit.delta_f_curve,
    };
    let out = output_path(cfg, ov, "epsilon.json");
    write_json(&out, &report)?;
    Ok(format!("epsilon = {:.6} +/- {:.2e}, wrote {}", report.epsilon, report.uncertainty, out.display()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFit {
    pub trace: String,
    pub params: FanoParams,
    pub uncertainty: FanoParams,
    pub residual_rms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFailure {
    pub trace: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FanoReport {
    pub fits: Vec<TraceFit>,
    pub failures: Vec<TraceFailure>,
    /// Sample mean and standard deviation of the full widths, Hz.
    pub linewidth_mean_hz: Option<f64>,
    pub linewidth_sd_hz: Option<f64>,
}

/// Fits the most prominent peak of every trace.
pub fn fano(cfg: &RunConfig, ov: &Overrides) -> Result<String, CliError> {
    let path = input_path(cfg, ov)?;
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let traces = parse_traces(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let min_prominence = cfg.fit.as_ref().and_then(|f| f.fano_min_prominence).unwrap_or(0.0);
    let results: Vec<Result<TraceFit, TraceFailure>> = traces
        .par_iter()
        .map(|(name, trace)| {
            let fail = |e: &dyn std::fmt::Display| TraceFailure { trace: name.clone(), message: e.to_string() };
            let peaks = find_peaks(trace, min_prominence).map_err(|e| fail(&e))?;
            let peak = peaks
                .iter()
                .max_by(|a, b| a.prominence.total_cmp(&b.prominence))
                .ok_or_else(|| fail(&"no peak"))?;
            let fit = fit_fano(trace, &FanoParams::seed(peak, trace)).map_err(|e| fail(&e))?;
            Ok(TraceFit { trace: name.clone(), params: fit.params, uncertainty: fit.uncertainty, residual_rms: fit.residual_rms })
        })
        .collect();
    let mut report = FanoReport { fits: Vec::new(), failures: Vec::new(), linewidth_mean_hz: None, linewidth_sd_hz: None };
    for r in results {
        match r {
            Ok(f) => report.fits.push(f),
            Err(f) => report.failures.push(f),
        }
    }
    let params: Vec<FanoParams> = report.fits.iter().map(|f| f.params).collect();
    if let Ok((mean, sd)) = linewidth_stats(&params) {
        report.linewidth_mean_hz = Some(mean);
        report.linewidth_sd_hz = Some(sd);
    }
    let out = output_path(cfg, ov, "fano.json");
    write_json(&out, &report)?;
    let stats = match (report.linewidth_mean_hz, report.linewidth_sd_hz) {
        (Some(m), Some(s)) => format!(", linewidth {:.4} +/- {:.4} MHz", m / 1e6, s / 1e6),
        _ => String::new(),
    };
    Ok(format!("fitted {} of {} traces{stats}, wrote {}", report.fits.len(), traces.len(), out.display()))
}

pub const REPORT_HEADER: &str =
    "label,omega_hz,g_hz,cooperativity,cooperativity_sigma,coupling_ratio,chi_eff,filling_factor";

/// One row of the derived-quantity table.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub omega_hz: f64,
    pub report: DerivedModeReport,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut s = format!("{REPORT_HEADER}\n");
    for r in rows {
        let d = &r.report;
        s.push_str(&format!(
            "{},{:?},{:?},{:?},{},{:?},{},{}\n",
            d.label,
            r.omega_hz,
            d.g_half_split,
            d.cooperativity,
            opt(d.cooperativity_sigma),
            d.coupling_ratio,
            opt(d.chi_eff),
            opt(d.filling_factor)
        ));
    }
    s
}

pub fn parse_report_csv(text: &str) -> Result<Vec<ReportRow>, CliError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == REPORT_HEADER => {}
        _ => return Err(CliError::Validation(format!("line 1: expected header `{REPORT_HEADER}`"))),
    }
    let mut rows = Vec::new();
    for (n, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = || CliError::Validation(format!("line {}: malformed report row", n + 1));
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 8 {
            return Err(bad());
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
        let maybe = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
        rows.push(ReportRow {
            omega_hz: num(cols[1])?,
            report: DerivedModeReport {
                label: cols[0].to_string(),
                g_half_split: num(cols[2])?,
                cooperativity: num(cols[3])?,
                cooperativity_sigma: maybe(cols[4])?,
                coupling_ratio: num(cols[5])?,
                chi_eff: maybe(cols[6])?,
                filling_factor: maybe(cols[7])?,
            },
        });
    }
    Ok(rows)
}

/// Derived quantities, either from a fit report (`--input`) or from the
/// configured couplings. Without a fit report each photon mode is paired
/// with the magnon branch it couples to most strongly.
pub fn report(cfg: &RunConfig, ov: &Overrides) -> Result<String, CliError> {
    let system = cfg.system()?;
    let photons = system.photon_modes()?;
    let magnons = system.magnon_branches()?;
    let input = ov.input.clone().or_else(|| cfg.io.as_ref().and_then(|io| io.input.clone()));
    let mut rows = Vec::new();
    match input {
        Some(path) => {
            let fits = read_fit_report(&path)?;
            for f in fits.fits {
                let omega_hz = photons.iter().find(|p| p.label == f.label).map_or(f.crossing.omega_c, |p| p.omega);
                rows.push(ReportRow { omega_hz, report: f.report });
            }
        }
        None => {
            let g = system.coupling_matrix()?;
            let filling = system.filling_factors();
            for (j, p) in photons.iter().enumerate() {
                let (k, &gj) = g[j]
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .ok_or_else(|| CliError::Validation("system.magnons: empty".into()))?;
                if gj <= 0.0 {
                    continue;
                }
                let sd = system.magnon_gamma_sd(k)?;
                let report = DerivedModeReport::compute(p, gj, magnons[k].gamma_half, sd, filling[j])
                    .map_err(|e| CliError::Validation(format!("system.photons[{j}]: {e}")))?;
                rows.push(ReportRow { omega_hz: p.omega, report });
            }
        }
    }
    let out = output_path(cfg, ov, "report.csv");
    let text = report_csv(&rows);
    write_atomic(&out, |w| w.write_all(text.as_bytes()))?;
    Ok(format!("{} modes, wrote {}", rows.len(), out.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_csv_round_trip() {
        let rows = vec![
            ReportRow {
                omega_hz: 15.732e9,
                report: DerivedModeReport {
                    label: "1".into(),
                    g_half_split: 3.075e9,
                    cooperativity: 1.0 / 3.0,
                    cooperativity_sigma: None,
                    coupling_ratio: 0.1955,
                    chi_eff: Some(0.0525),
                    filling_factor: Some(0.728),
                },
            },
            ReportRow {
                omega_hz: 1.0,
                report: DerivedModeReport {
                    label: "x".into(),
                    g_half_split: 2.0,
                    cooperativity: 3.0,
                    cooperativity_sigma: Some(0.1),
                    coupling_ratio: 0.5,
                    chi_eff: None,
                    filling_factor: None,
                },
            },
        ];
        assert_eq!(parse_report_csv(&report_csv(&rows)).unwrap(), rows);
    }
}

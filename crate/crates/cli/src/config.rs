//! Run configuration.
//!
//! TOML with five optional sections: `system`, `sweep`, `sphere`, `fit`, `io`.
//! Unknown keys are rejected. Every dimensional key names its unit. Rates
//! can be given either as `*_half_hz` (half width, `g/2pi` convention) or as
//! `*_over_pi_hz` (the tabulated `Gamma/pi`, `g/pi` values, which are halved
//! on ingest); giving both is an error.

use std::path::{Path, PathBuf};

use magnon_core::fitting::{PipelineOptions, RidgeOptions, Side};
use magnon_core::model::from_over_pi;
use magnon_core::sphere::{Family, ScanOptions};
use magnon_core::{CoupledSystem, MagnonBranch, PhotonMode};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: Option<SystemConfig>,
    pub sweep: Option<SweepConfig>,
    pub sphere: Option<SphereConfig>,
    pub fit: Option<FitConfig>,
    pub io: Option<IoConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// Default port rate of each photon mode as a fraction of its half width.
    #[serde(default = "half")]
    pub port_fraction: f64,
    pub photons: Vec<PhotonConfig>,
    pub magnons: Vec<MagnonConfig>,
    /// Photon-by-magnon coupling matrix. Absent means uncoupled.
    pub coupling: Option<CouplingConfig>,
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhotonConfig {
    pub label: String,
    pub omega_hz: f64,
    pub gamma_half_hz: Option<f64>,
    pub gamma_over_pi_hz: Option<f64>,
    pub filling_factor: Option<f64>,
    pub port_in_hz: Option<f64>,
    pub port_out_hz: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MagnonConfig {
    pub slope_hz_per_tesla: f64,
    #[serde(default)]
    pub offset_hz: f64,
    pub gamma_half_hz: Option<f64>,
    pub gamma_over_pi_hz: Option<f64>,
    pub gamma_sd_half_hz: Option<f64>,
    pub gamma_sd_over_pi_hz: Option<f64>,
    pub mu0_msat_tesla: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    pub g_hz: Option<Vec<Vec<f64>>>,
    pub g_over_pi_hz: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub b_min_tesla: f64,
    pub b_max_tesla: f64,
    pub b_steps: usize,
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    pub f_steps: usize,
    /// Standard deviation of the complex noise added to `S21`.
    #[serde(default)]
    pub noise_amplitude: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereConfig {
    pub eps_r: f64,
    pub radius_m: f64,
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    #[serde(default = "default_ell_max")]
    pub ell_max: u32,
    #[serde(default = "default_families")]
    pub families: Vec<String>,
    pub q_min: Option<f64>,
    /// Measured frequency for `epsilon`.
    pub f_meas_hz: Option<f64>,
    #[serde(default = "default_target_family")]
    pub target_family: String,
    #[serde(default = "one")]
    pub target_ell: u32,
    #[serde(default = "one")]
    pub target_q: u32,
    #[serde(default = "default_eps_min")]
    pub eps_min: f64,
    #[serde(default = "default_eps_max")]
    pub eps_max: f64,
    #[serde(default)]
    pub radius_tolerance_m: f64,
}

fn default_ell_max() -> u32 {
    3
}
fn default_families() -> Vec<String> {
    vec!["te".into(), "tm".into()]
}
fn default_target_family() -> String {
    "te".into()
}
fn one() -> u32 {
    1
}
fn default_eps_min() -> f64 {
    10.0
}
fn default_eps_max() -> f64 {
    20.0
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub side: Option<String>,
    pub prominence_db: Option<f64>,
    pub max_jump_bins: Option<f64>,
    pub max_gap: Option<usize>,
    pub min_ridge_points: Option<usize>,
    pub min_g_bins: Option<f64>,
    pub max_g_rel_uncertainty: Option<f64>,
    pub match_tolerance_hz: Option<f64>,
    pub fix_magnon: Option<bool>,
    pub refine: Option<bool>,
    pub trim_sigma: Option<f64>,
    /// Magnon branch used by the crossing fits.
    #[serde(default)]
    pub magnon_index: usize,
    /// Minimum peak prominence for `fano`, in trace units.
    pub fano_min_prominence: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(e.to_string().trim_end().replace('\n', " | ")))
    }

    pub fn system(&self) -> Result<&SystemConfig, CliError> {
        self.system.as_ref().ok_or_else(|| missing("system"))
    }

    pub fn sweep(&self) -> Result<&SweepConfig, CliError> {
        self.sweep.as_ref().ok_or_else(|| missing("sweep"))
    }

    pub fn sphere(&self) -> Result<&SphereConfig, CliError> {
        self.sphere.as_ref().ok_or_else(|| missing("sphere"))
    }

    pub fn fit(&self) -> Result<&FitConfig, CliError> {
        self.fit.as_ref().ok_or_else(|| missing("fit"))
    }
}

fn missing(section: &str) -> CliError {
    CliError::Validation(format!("missing [{section}] section"))
}

fn invalid(key: impl std::fmt::Display, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{key}: {msg}"))
}

/// Exactly one of a half-width value or a tabulated `/pi` value.
fn rate(key: &str, half: Option<f64>, over_pi: Option<f64>) -> Result<Option<f64>, CliError> {
    match (half, over_pi) {
        (Some(_), Some(_)) => Err(invalid(key, "give either the _half_hz or the _over_pi_hz form, not both")),
        (Some(h), None) => Ok(Some(h)),
        (None, Some(p)) => Ok(Some(from_over_pi(p))),
        (None, None) => Ok(None),
    }
}

fn required_rate(key: &str, half: Option<f64>, over_pi: Option<f64>) -> Result<f64, CliError> {
    rate(key, half, over_pi)?.ok_or_else(|| invalid(key, "missing (set _half_hz or _over_pi_hz)"))
}

impl SystemConfig {
    pub fn photon_modes(&self) -> Result<Vec<PhotonMode>, CliError> {
        self.photons
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let key = format!("system.photons[{i}]");
                let gamma = required_rate(&format!("{key}.gamma"), p.gamma_half_hz, p.gamma_over_pi_hz)?;
                PhotonMode::new(p.label.clone(), p.omega_hz, gamma).map_err(|e| invalid(&key, e))
            })
            .collect()
    }

    pub fn magnon_branches(&self) -> Result<Vec<MagnonBranch>, CliError> {
        self.magnons
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let key = format!("system.magnons[{i}]");
                let gamma = required_rate(&format!("{key}.gamma"), m.gamma_half_hz, m.gamma_over_pi_hz)?;
                let mut b = MagnonBranch::new(m.slope_hz_per_tesla, m.offset_hz, gamma).map_err(|e| invalid(&key, e))?;
                if let Some(ms) = m.mu0_msat_tesla {
                    b = b.with_msat(ms);
                }
                Ok(b)
            })
            .collect()
    }

    /// Standard deviation of each magnon half width, if given.
    pub fn magnon_gamma_sd(&self, index: usize) -> Result<Option<f64>, CliError> {
        let m = &self.magnons[index];
        rate(&format!("system.magnons[{index}].gamma_sd"), m.gamma_sd_half_hz, m.gamma_sd_over_pi_hz)
    }

    pub fn filling_factors(&self) -> Vec<Option<f64>> {
        self.photons.iter().map(|p| p.filling_factor).collect()
    }

    /// Coupling matrix in `g/2pi` Hz; zeros when absent.
    pub fn coupling_matrix(&self) -> Result<Vec<Vec<f64>>, CliError> {
        let (n, m) = (self.photons.len(), self.magnons.len());
        let g = match &self.coupling {
            None => return Ok(vec![vec![0.0; m]; n]),
            Some(c) => match (&c.g_hz, &c.g_over_pi_hz) {
                (Some(_), Some(_)) => {
                    return Err(invalid("system.coupling", "give either g_hz or g_over_pi_hz, not both"));
                }
                (Some(g), None) => g.clone(),
                (None, Some(g)) => g.iter().map(|row| row.iter().map(|&v| from_over_pi(v)).collect()).collect(),
                (None, None) => vec![vec![0.0; m]; n],
            },
        };
        if g.len() != n || g.iter().any(|row| row.len() != m) {
            return Err(invalid("system.coupling", format!("matrix must have {n} rows of {m} entries")));
        }
        Ok(g)
    }

    pub fn build(&self) -> Result<CoupledSystem, CliError> {
        let photons = self.photon_modes()?;
        let magnons = self.magnon_branches()?;
        let g = self.coupling_matrix()?;
        let mut port_in = Vec::with_capacity(photons.len());
        let mut port_out = Vec::with_capacity(photons.len());
        for (p, c) in photons.iter().zip(&self.photons) {
            port_in.push(c.port_in_hz.unwrap_or(self.port_fraction * p.gamma_half));
            port_out.push(c.port_out_hz.unwrap_or(self.port_fraction * p.gamma_half));
        }
        CoupledSystem::new(photons, magnons, g, port_in, port_out).map_err(|e| invalid("system", e))
    }
}

impl SphereConfig {
    pub fn families(&self) -> Result<Vec<Family>, CliError> {
        self.families
            .iter()
            .map(|s| s.parse::<Family>().map_err(|e| invalid("sphere.families", e)))
            .collect()
    }

    pub fn target(&self) -> Result<(Family, u32, u32), CliError> {
        let family = self.target_family.parse::<Family>().map_err(|e| invalid("sphere.target_family", e))?;
        Ok((family, self.target_ell, self.target_q))
    }

    pub fn scan_options(&self) -> ScanOptions {
        let mut opts = ScanOptions::default();
        if let Some(q) = self.q_min {
            opts.q_min = q;
        }
        opts
    }
}

impl FitConfig {
    pub fn side(&self) -> Result<Side, CliError> {
        match &self.side {
            None => Ok(Side::default()),
            Some(s) => s.parse().map_err(|e| invalid("fit.side", e)),
        }
    }

    pub fn pipeline_options(&self, gamma_mag_sd: Option<f64>) -> Result<PipelineOptions, CliError> {
        let d = PipelineOptions::default();
        let r: RidgeOptions<f64> = d.ridge;
        Ok(PipelineOptions {
            ridge: RidgeOptions {
                min_prominence: self.prominence_db.unwrap_or(r.min_prominence),
                max_jump_bins: self.max_jump_bins.unwrap_or(r.max_jump_bins),
                max_gap: self.max_gap.unwrap_or(r.max_gap),
                refine: self.refine.unwrap_or(r.refine),
                ..r
            },
            side: self.side()?,
            fix_magnon: self.fix_magnon.unwrap_or(d.fix_magnon),
            min_ridge_points: self.min_ridge_points.unwrap_or(d.min_ridge_points),
            min_g_bins: self.min_g_bins.unwrap_or(d.min_g_bins),
            max_g_rel_uncertainty: self.max_g_rel_uncertainty.unwrap_or(d.max_g_rel_uncertainty),
            match_tolerance_hz: self.match_tolerance_hz.or(d.match_tolerance_hz),
            trim_sigma: self.trim_sigma.unwrap_or(d.trim_sigma),
            gamma_mag_sd,
            ..d
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[system]
[[system.photons]]
label = "a"
omega_hz = 12e9
gamma_over_pi_hz = 2e6

[[system.magnons]]
slope_hz_per_tesla = 28e9
gamma_half_hz = 1e6

[system.coupling]
g_over_pi_hz = [[1e9]]
"#;

    #[test]
    fn over_pi_rates_are_halved() {
        let cfg = RunConfig::parse(MINIMAL).unwrap();
        let sys = cfg.system().unwrap();
        assert_eq!(sys.photon_modes().unwrap()[0].gamma_half, 1e6);
        assert_eq!(sys.coupling_matrix().unwrap(), vec![vec![0.5e9]]);
        assert!(sys.build().is_ok());
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let text = MINIMAL.replace("omega_hz = 12e9", "omega_ghz = 12");
        let err = RunConfig::parse(&text).unwrap_err().to_string();
        assert!(err.contains("omega_ghz") && err.contains("line"), "{err}");
    }

    #[test]
    fn both_rate_forms_is_an_error() {
        let text = MINIMAL.replace("gamma_half_hz = 1e6", "gamma_half_hz = 1e6\ngamma_over_pi_hz = 2e6");
        let cfg = RunConfig::parse(&text).unwrap();
        assert!(matches!(cfg.system().unwrap().magnon_branches(), Err(CliError::Validation(_))));
    }

    #[test]
    fn coupling_shape_checked() {
        let text = MINIMAL.replace("[[1e9]]", "[[1e9, 2e9]]");
        let cfg = RunConfig::parse(&text).unwrap();
        assert!(cfg.system().unwrap().coupling_matrix().is_err());
    }

    #[test]
    fn missing_sections_are_validation_errors() {
        let cfg = RunConfig::parse("").unwrap();
        assert!(matches!(cfg.sweep(), Err(CliError::Validation(_))));
    }
}

//! Measured mode data for a 5 mm diameter YIG sphere at millikelvin
//! temperatures, used as golden values by tests, examples and the CLI.
//!
//! Rates are kept in the form they were tabulated (`g/pi`, `Gamma/pi`);
//! convert with [`crate::model::from_over_pi`].

use crate::coupled::CoupledSystem;
use crate::error::ModelError;
use crate::model::{from_over_pi, MagnonBranch, PhotonMode};

/// One photon mode of the sphere with its fitted coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeRow {
    pub label: &'static str,
    /// High-field asymptotic frequency, Hz.
    pub omega_hz: f64,
    /// Full linewidth `Gamma/pi`, Hz.
    pub gamma_over_pi_hz: f64,
    /// Full splitting `g/pi`, Hz.
    pub g_over_pi_hz: f64,
    pub cooperativity: f64,
    /// Tabulated +/- on the cooperativity.
    pub cooperativity_spread: f64,
    pub g_over_omega_pct: f64,
    /// Total magnetic filling factor.
    pub filling_factor: f64,
    pub chi_eff: f64,
}

pub const MODE_TABLE: [ModeRow; 6] = [
    ModeRow {
        label: "x",
        omega_hz: 12.779e9,
        gamma_over_pi_hz: 11.84e6,
        g_over_pi_hz: 4.79e9,
        cooperativity: 5.97e5,
        cooperativity_spread: 1.85e5,
        g_over_omega_pct: 18.7,
        filling_factor: 0.221,
        chi_eff: 0.159,
    },
    ModeRow {
        label: "i",
        omega_hz: 15.506e9,
        gamma_over_pi_hz: 1.029e6,
        g_over_pi_hz: 7.11e9,
        cooperativity: 151e5,
        cooperativity_spread: 47.0e5,
        g_over_omega_pct: 22.9,
        filling_factor: 0.594,
        chi_eff: 0.0885,
    },
    ModeRow {
        label: "ii",
        omega_hz: 15.563e9,
        gamma_over_pi_hz: 1.197e6,
        g_over_pi_hz: 4.19e9,
        cooperativity: 45.2e5,
        cooperativity_spread: 14.0e5,
        g_over_omega_pct: 13.5,
        filling_factor: 0.594,
        chi_eff: 0.0305,
    },
    ModeRow {
        label: "1",
        omega_hz: 15.732e9,
        gamma_over_pi_hz: 5.355e6,
        g_over_pi_hz: 6.15e9,
        cooperativity: 21.8e5,
        cooperativity_spread: 6.76e5,
        g_over_omega_pct: 19.5,
        filling_factor: 0.728,
        chi_eff: 0.0525,
    },
    ModeRow {
        label: "2",
        omega_hz: 15.893e9,
        gamma_over_pi_hz: 2.965e6,
        g_over_pi_hz: 3.04e9,
        cooperativity: 9.60e5,
        cooperativity_spread: 2.98e5,
        g_over_omega_pct: 9.56,
        filling_factor: 0.493,
        chi_eff: 0.0185,
    },
    ModeRow {
        label: "3",
        omega_hz: 15.950e9,
        gamma_over_pi_hz: 2.965e6,
        g_over_pi_hz: 0.78e9,
        cooperativity: 0.632e5,
        cooperativity_spread: 0.196e5,
        g_over_omega_pct: 2.45,
        filling_factor: 0.493,
        chi_eff: 0.00121,
    },
];

/// Mean magnon linewidth `Gamma_mag/pi` over the dispersive-regime peaks, Hz.
pub const GAMMA_MAG_OVER_PI_HZ: f64 = 3.247e6;
/// Standard deviation of the magnon linewidths, Hz.
pub const GAMMA_MAG_SD_OVER_PI_HZ: f64 = 0.493e6;

/// Field at which the magnon line meets mode `1`, tesla.
pub const MODE1_RESONANCE_FIELD_T: f64 = 0.6425;
/// Splitting of mode `1` observed at [`MODE1_RESONANCE_FIELD_T`], Hz.
pub const MODE1_SPLITTING_HZ: f64 = 6.2e9;
/// Magnon slope that puts the Kittel line on mode `1` at the resonance field, Hz/T.
pub const FITTED_MAGNON_SLOPE: f64 = 24.49e9;
/// Nominal gradient of the magnon lines, Hz/T.
pub const NOMINAL_MAGNON_SLOPE: f64 = 28e9;

/// Sphere radius, metres.
pub const SPHERE_RADIUS_M: f64 = 2.5e-3;
/// Extracted relative permittivity of the sphere and its uncertainty.
pub const PERMITTIVITY: (f64, f64) = (15.96, 0.02);
/// Room temperature saturation magnetisation `mu0 M`, tesla.
pub const MU0_MSAT_T: f64 = 0.178;

/// Measured and finite-element frequencies with the mode pattern counts
/// `(theta maxima, phi maxima)`. Doublets are averaged.
pub const FEM_COMPARISON: [(&str, f64, f64, (u32, u32)); 4] = [
    ("x", 12.779e9, 12.785e9, (0, 0)),
    ("i & ii", 15.534e9, 15.286e9, (1, 1)),
    ("1", 15.732e9, 15.736e9, (1, 0)),
    ("2 & 3", 15.922e9, 15.921e9, (1, 1)),
];

pub fn mode(label: &str) -> Option<&'static ModeRow> {
    MODE_TABLE.iter().find(|r| r.label == label)
}

/// The six tabulated modes as a coupled system: photon `j` couples only to
/// its own magnon branch (slope `slope`, zero offset, the mean magnon
/// linewidth), so every crossing is an isolated two-oscillator problem.
/// Ports take `port_fraction` of each photon half linewidth on both sides.
pub fn table_system(slope: f64, port_fraction: f64) -> Result<CoupledSystem<f64>, ModelError> {
    let photons = MODE_TABLE
        .iter()
        .map(|r| PhotonMode::from_table(r.label, r.omega_hz, r.gamma_over_pi_hz))
        .collect::<Result<Vec<_>, _>>()?;
    let magnon = MagnonBranch::new(slope, 0.0, from_over_pi(GAMMA_MAG_OVER_PI_HZ))?.with_msat(MU0_MSAT_T);
    let n = MODE_TABLE.len();
    let g = (0..n)
        .map(|i| (0..n).map(|j| if i == j { from_over_pi(MODE_TABLE[i].g_over_pi_hz) } else { 0.0 }).collect())
        .collect();
    CoupledSystem::with_symmetric_ports(photons, vec![magnon; n], g, port_fraction)
}

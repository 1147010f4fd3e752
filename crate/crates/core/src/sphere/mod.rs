//! Analytic eigenmodes of a homogeneous dielectric sphere in free space.
//!
//! Modes are labelled by family (TE: no radial electric field, TM: no
//! radial magnetic field), angular index `ell >= 1`, radial index `q >= 1`
//! and the azimuthal member `(m, parity)`. Frequencies and radiation Q are
//! independent of the member, so every `(family, ell, q)` root carries a
//! `2 ell + 1` fold degeneracy.
//!
//! Pattern labels `(n, m)` quoted from field-maximum counts of the measured
//! 5 mm sphere do not map one-to-one onto `(family, ell)`. For
//! `eps_r = 15.96`, `a = 2.5 mm` the free sphere has TE `ell = 1` at
//! 14.4 GHz, TM `ell = 1` at 20.1 GHz and TE `ell = 2` at 20.9 GHz, so the
//! measured cluster compares as follows:
//!
//! | measured mode     | pattern `(n, m)` | analytic counterpart                          |
//! |-------------------|------------------|-----------------------------------------------|
//! | `1`               | (1, 0)           | TE, ell = 1, q = 1, m = 0                     |
//! | `i`/`ii`, `2`/`3` | (1, 1)           | TE, ell = 1, q = 1, m = 1 (cos/sin), split by the support |
//! | `x`               | (0, 0)           | none: every free-sphere mode has `ell >= 1`   |
//!
//! The enclosure raises the measured frequencies by roughly 9% over the
//! free-space values.

mod bessel;
mod fields;
mod filling;
mod legendre;
mod permittivity;
mod solver;

pub use bessel::{series_j, spherical_h1, spherical_j, Riccati};
pub use fields::{field_at, field_map_csv, FieldComponent, FieldSample, Spherical};
pub use filling::{filling_factor, filling_factor_of, gauss_legendre, FillingOptions};
pub use legendre::{legendre, LegendreValue};
pub use permittivity::{extract_permittivity, mode_at, PermittivityFit, PermittivityOptions};
pub use solver::{
    characteristic_derivative, characteristic_value, solve_modes, winding_number, ScanOptions, SolveReport,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    TE,
    TM,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::TE => "TE",
            Family::TM => "TM",
        })
    }
}

impl std::str::FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "TE" => Ok(Family::TE),
            "TM" => Ok(Family::TM),
            other => Err(format!("unknown mode family `{other}` (expected TE or TM)")),
        }
    }
}

/// Azimuthal branch: `cos(m phi)` or `sin(m phi)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parity {
    Cos,
    Sin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SphereModeId {
    pub family: Family,
    pub ell: u32,
    pub q: u32,
    pub m: u32,
    pub parity: Parity,
}

impl SphereModeId {
    pub fn new(family: Family, ell: u32, q: u32, m: u32, parity: Parity) -> Result<Self, crate::error::SphereError> {
        use crate::error::SphereError;
        if ell == 0 {
            return Err(SphereError::ZeroEll);
        }
        if q == 0 || m > ell {
            return Err(SphereError::Invalid(format!("need q >= 1 and m <= ell, got q={q} m={m} ell={ell}")));
        }
        if m == 0 && parity == Parity::Sin {
            return Err(SphereError::Invalid("m = 0 has no sin(m phi) member".into()));
        }
        Ok(Self { family, ell, q, m, parity })
    }

    /// All `2 ell + 1` azimuthal members of this `(family, ell, q)`.
    pub fn members(&self) -> Vec<SphereModeId> {
        let mut out = vec![SphereModeId { m: 0, parity: Parity::Cos, ..*self }];
        for m in 1..=self.ell {
            out.push(SphereModeId { m, parity: Parity::Cos, ..*self });
            out.push(SphereModeId { m, parity: Parity::Sin, ..*self });
        }
        out
    }
}

impl std::fmt::Display for SphereModeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}(ell={}, q={}, m={}, {:?})", self.family, self.ell, self.q, self.m, self.parity)
    }
}

/// A solved resonance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereMode {
    pub id: SphereModeId,
    /// Real part of the complex resonance frequency, Hz.
    pub freq: f64,
    /// Radiation quality factor `Re(ka) / (2 |Im(ka)|)`.
    pub q_rad: f64,
    /// Complex root `k0 a` of the matching condition.
    pub ka: Complex64,
    /// Relative permittivity the mode was solved for.
    pub eps_r: f64,
}

impl SphereMode {
    pub fn from_root(id: SphereModeId, ka: Complex64, eps_r: f64, radius_m: f64) -> Self {
        Self { id, freq: ka.re * SPEED_OF_LIGHT / (2.0 * std::f64::consts::PI * radius_m), q_rad: ka.re / (2.0 * ka.im.abs()), ka, eps_r }
    }

    /// Same root, other azimuthal member.
    pub fn member(&self, m: u32, parity: Parity) -> Result<Self, crate::error::SphereError> {
        let id = SphereModeId::new(self.id.family, self.id.ell, self.id.q, m, parity)?;
        Ok(Self { id, ..*self })
    }

    /// Radius implied by `freq` and `ka`.
    pub fn radius(&self) -> f64 {
        self.ka.re * SPEED_OF_LIGHT / (2.0 * std::f64::consts::PI * self.freq)
    }
}

/// CSV `family,ell,q,freq_hz,q_rad`.
pub fn modes_csv(modes: &[SphereMode]) -> String {
    let mut s = String::from("family,ell,q,freq_hz,q_rad\n");
    for m in modes {
        s.push_str(&format!("{},{},{},{:?},{:?}\n", m.id.family, m.id.ell, m.id.q, m.freq, m.q_rad));
    }
    s
}

/// Parses the output of [`modes_csv`] into `(family, ell, q, freq_hz, q_rad)` rows.
pub fn parse_modes_csv(text: &str) -> Result<Vec<(Family, u32, u32, f64, f64)>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == "family,ell,q,freq_hz,q_rad" => {}
        other => return Err(format!("bad header {other:?}")),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            let p: Vec<&str> = l.split(',').collect();
            if p.len() != 5 {
                return Err(format!("line {}: expected 5 columns", i + 2));
            }
            let bad = |e: &dyn std::fmt::Display| format!("line {}: {e}", i + 2);
            Ok((
                p[0].parse().map_err(|e: String| bad(&e))?,
                p[1].parse().map_err(|e| bad(&e))?,
                p[2].parse().map_err(|e| bad(&e))?,
                p[3].parse().map_err(|e| bad(&e))?,
                p[4].parse().map_err(|e| bad(&e))?,
            ))
        })
        .collect()
}

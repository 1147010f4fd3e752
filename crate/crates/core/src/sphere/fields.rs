//! Electric and magnetic fields of a solved mode.
//!
//! Amplitudes are normalised to a unit interior radial function; `E` and `H`
//! each carry their own overall constant, so only ratios within one field
//! are meaningful. Components are spherical `(r, theta, phi)`.

use num_complex::Complex64;

use super::bessel::{spherical_h1, spherical_j};
use super::legendre::legendre;
use super::{Family, Parity, SphereMode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spherical {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl Spherical {
    pub fn new(r: f64, theta: f64, phi: f64) -> Self {
        Self { r, theta, phi }
    }

    pub fn from_cartesian(x: f64, y: f64, z: f64) -> Self {
        let r = (x * x + y * y + z * z).sqrt();
        let theta = if r == 0.0 { 0.0 } else { (z / r).clamp(-1.0, 1.0).acos() };
        Self { r, theta, phi: y.atan2(x) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub e: [Complex64; 3],
    pub h: [Complex64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldComponent {
    Er,
    Etheta,
    Ephi,
    Hr,
    Htheta,
    Hphi,
}

impl FieldComponent {
    pub const ALL: [FieldComponent; 6] = [Self::Er, Self::Etheta, Self::Ephi, Self::Hr, Self::Htheta, Self::Hphi];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Er => "E_r",
            Self::Etheta => "E_theta",
            Self::Ephi => "E_phi",
            Self::Hr => "H_r",
            Self::Htheta => "H_theta",
            Self::Hphi => "H_phi",
        }
    }

    fn pick(&self, s: &FieldSample) -> Complex64 {
        match self {
            Self::Er => s.e[0],
            Self::Etheta => s.e[1],
            Self::Ephi => s.e[2],
            Self::Hr => s.h[0],
            Self::Htheta => s.h[1],
            Self::Hphi => s.h[2],
        }
    }
}

/// Radial pieces of a mode: `z(rho)`, `zeta(rho)/rho^2` and `zeta'(rho)/rho`
/// with `zeta = rho z`, times the region amplitude.
struct Radial {
    z: Complex64,
    zeta_over_rho2: Complex64,
    dzeta_over_rho: Complex64,
}

fn radial(l: usize, rho: Complex64, inside: bool) -> Radial {
    let seq = if inside { spherical_j(l, rho) } else { spherical_h1(l, rho) };
    let z = seq[l];
    Radial { z, zeta_over_rho2: z / rho, dzeta_over_rho: seq[l - 1] - z * (l as f64) / rho }
}

/// `E` and `H` at `point` for a sphere of `radius_m`.
pub fn field_at(mode: &SphereMode, radius_m: f64, point: Spherical) -> FieldSample {
    let id = mode.id;
    let l = id.ell as usize;
    let lf = l as f64;
    let n = mode.eps_r.sqrt();
    let k0 = mode.ka / radius_m;
    // the origin is a removable singularity of the interior expressions
    let r = point.r.max(1e-9 * radius_m);
    let inside = r <= radius_m;
    let rho = if inside { k0 * n * r } else { k0 * r };

    // exterior amplitude from continuity of the tangential transverse field
    let x = mode.ka;
    let amp = if inside {
        Complex64::new(1.0, 0.0)
    } else {
        let jn = spherical_j(l, x * n)[l];
        let hn = spherical_h1(l, x)[l];
        jn / hn
    };
    let rad = radial(l, rho, inside);

    let leg = legendre(id.ell, id.m, point.theta);
    let mphi = id.m as f64 * point.phi;
    let (t, dt) = match id.parity {
        Parity::Cos => (mphi.cos(), -mphi.sin()),
        Parity::Sin => (mphi.sin(), mphi.cos()),
    };
    let y = leg.p * t;
    let dy_dtheta = leg.dp_dtheta * t;
    // (1/sin theta) dY/dphi
    let dy_dphi_over_sin = leg.p_over_sin * id.m as f64 * dt;

    // transverse "M" field and its curl "N" in the region
    let m_field = [
        Complex64::new(0.0, 0.0),
        amp * rad.z * dy_dphi_over_sin,
        -amp * rad.z * dy_dtheta,
    ];
    let n_field = [
        amp * rad.zeta_over_rho2 * (lf * (lf + 1.0) * y),
        amp * rad.dzeta_over_rho * dy_dtheta,
        amp * rad.dzeta_over_rho * dy_dphi_over_sin,
    ];
    match id.family {
        Family::TE => {
            let k = if inside { n } else { 1.0 };
            FieldSample { e: m_field, h: n_field.map(|c| c * k) }
        }
        Family::TM => {
            let k = if inside { 1.0 / n } else { 1.0 };
            FieldSample { e: n_field.map(|c| c * k), h: m_field }
        }
    }
}

/// One field component sampled on an `points x points` grid in the `x-z`
/// plane (`phi = 0` for `x >= 0`), covering `[-extent, extent]^2`.
/// Columns: `x_m,z_m,re,im`.
pub fn field_map_csv(mode: &SphereMode, radius_m: f64, component: FieldComponent, extent_m: f64, points: usize) -> String {
    let mut s = String::from("x_m,z_m,re,im\n");
    let axis: Vec<f64> = (0..points)
        .map(|i| -extent_m + 2.0 * extent_m * i as f64 / (points.max(2) - 1) as f64)
        .collect();
    for &zc in &axis {
        for &xc in &axis {
            let p = Spherical::from_cartesian(xc, 0.0, zc);
            let v = component.pick(&field_at(mode, radius_m, p));
            s.push_str(&format!("{xc:?},{zc:?},{:?},{:?}\n", v.re, v.im));
        }
    }
    s
}

//! Magnetic filling factor: the share of `|H|^2` inside the sphere.

use num_complex::Complex64;

use super::fields::{field_at, Spherical};
use super::SphereMode;
use crate::error::SphereError;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FillingOptions {
    /// Starting number of nodes in `r` (per region) and `cos theta`.
    pub initial_nodes: usize,
    /// Node count cap for the doubling sequence.
    pub max_nodes: usize,
    /// Accept once successive doublings agree to this relative level.
    pub tolerance: f64,
    /// Fail if the last doubling still disagrees by more than this.
    pub reject_above: f64,
    /// Trapezoid points in `phi`; exact for trigonometric polynomials of lower degree.
    pub phi_points: usize,
}

impl Default for FillingOptions {
    fn default() -> Self {
        Self { initial_nodes: 12, max_nodes: 384, tolerance: 1e-9, reject_above: 1e-4, phi_points: 16 }
    }
}

/// `(inside, total)` integrals of `|H|^2` with `n` nodes per dimension.
fn integrals<F: Fn(Spherical) -> [Complex64; 3]>(h: &F, a: f64, big_r: f64, n: usize, n_phi: usize) -> (f64, f64) {
    let (x, w) = gauss_legendre(n);
    let shell = |lo: f64, hi: f64| -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let mut sum = 0.0;
        for (xr, wr) in x.iter().zip(&w) {
            let r = lo + (hi - lo) * 0.5 * (xr + 1.0);
            let wr = wr * 0.5 * (hi - lo) * r * r;
            for (u, wu) in x.iter().zip(&w) {
                let theta = u.clamp(-1.0, 1.0).acos();
                let mut ring = 0.0;
                for k in 0..n_phi {
                    let phi = 2.0 * std::f64::consts::PI * k as f64 / n_phi as f64;
                    let v = h(Spherical::new(r, theta, phi));
                    ring += v.iter().map(|c| c.norm_sqr()).sum::<f64>();
                }
                sum += wr * wu * ring * 2.0 * std::f64::consts::PI / n_phi as f64;
            }
        }
        sum
    };
    let inner = shell(0.0, a);
    (inner, inner + shell(a, big_r))
}

/// Filling factor of an arbitrary magnetic field over a ball of `domain_radius`.
pub fn filling_factor_of<F: Fn(Spherical) -> [Complex64; 3]>(
    h: F,
    sphere_radius: f64,
    domain_radius: f64,
    opts: &FillingOptions,
) -> Result<f64, SphereError> {
    if !(sphere_radius > 0.0) || !(domain_radius >= sphere_radius) {
        return Err(SphereError::Invalid(format!(
            "need 0 < sphere radius <= domain radius, got {sphere_radius} and {domain_radius}"
        )));
    }
    let ratio = |n: usize| {
        let (inside, total) = integrals(&h, sphere_radius, domain_radius, n, opts.phi_points);
        inside / total
    };
    let mut n = opts.initial_nodes.max(2);
    let mut prev = ratio(n);
    let mut diff = f64::INFINITY;
    while 2 * n <= opts.max_nodes {
        n *= 2;
        let next = ratio(n);
        diff = ((next - prev) / next).abs();
        prev = next;
        if diff <= opts.tolerance {
            return Ok(prev);
        }
    }
    if diff > opts.reject_above || !prev.is_finite() {
        return Err(SphereError::Quadrature(diff));
    }
    Ok(prev)
}

/// Total magnetic filling factor of `mode`, integrating over a ball of
/// `domain_radius` around a sphere of `sphere_radius`.
pub fn filling_factor(mode: &SphereMode, sphere_radius: f64, domain_radius: f64) -> Result<f64, SphereError> {
    let opts = FillingOptions { phi_points: 2 * mode.id.m as usize + 4, ..FillingOptions::default() };
    filling_factor_of(|p| field_at(mode, sphere_radius, p).h, sphere_radius, domain_radius, &opts)
}

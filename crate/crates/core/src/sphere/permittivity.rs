//! Permittivity from a measured resonance: find `eps` such that the solved
//! frequency of a chosen mode equals the measurement.

use num_complex::Complex64;

use super::solver::{newton, roots_below, ScanOptions};
use super::{Family, Parity, SphereMode, SphereModeId, SPEED_OF_LIGHT};
use crate::error::SphereError;

/// The `q`-th root of `(family, ell)` at `eps_r` for a sphere of `radius_m`.
pub fn mode_at(family: Family, ell: u32, q: u32, eps_r: f64, radius_m: f64, opts: &ScanOptions) -> Result<SphereMode, SphereError> {
    let id = SphereModeId::new(family, ell, q, 0, Parity::Cos)?;
    let root = root_at(family, ell, q, eps_r, opts)?;
    Ok(SphereMode::from_root(id, root, eps_r, radius_m))
}

fn root_at(family: Family, ell: u32, q: u32, eps_r: f64, opts: &ScanOptions) -> Result<Complex64, SphereError> {
    if !(eps_r > 1.0) {
        return Err(SphereError::Permittivity(eps_r));
    }
    // interior roots sit near n x ~ (ell/2 + q) pi; widen until q of them are found
    let mut x_hi = ((ell as f64 / 2.0 + q as f64 + 1.0) * std::f64::consts::PI / eps_r.sqrt()).max(0.5);
    while x_hi < 200.0 {
        let (roots, _) = roots_below(family, ell, eps_r, x_hi, opts);
        if roots.len() >= q as usize {
            return Ok(roots[q as usize - 1]);
        }
        x_hi *= 1.5;
    }
    Err(SphereError::ModeNotFound(format!("{family} ell={ell} q={q}")))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermittivityOptions {
    /// Points on the sampled `(eps, f_sim - f_meas)` curve.
    pub samples: usize,
    /// Radius uncertainty propagated into the permittivity, metres.
    pub radius_tolerance_m: f64,
    pub scan: ScanOptions,
}

impl Default for PermittivityOptions {
    fn default() -> Self {
        Self { samples: 41, radius_tolerance_m: 0.0, scan: ScanOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermittivityFit {
    pub epsilon: f64,
    /// Half the spread of `epsilon` re-extracted at `radius -/+ tolerance`.
    pub uncertainty: f64,
    /// `(eps, f_sim - f_meas)` in Hz.
    pub delta_f_curve: Vec<(f64, f64)>,
    /// Mode solved at the extracted permittivity.
    pub mode: SphereMode,
}

impl PermittivityFit {
    /// CSV `epsilon,delta_f_hz`.
    pub fn curve_csv(&self) -> String {
        let mut s = String::from("epsilon,delta_f_hz\n");
        for (e, d) in &self.delta_f_curve {
            s.push_str(&format!("{e:?},{d:?}\n"));
        }
        s
    }
}

/// Root `Re(k0 a)` as a function of permittivity, followed by continuation.
struct Tracker {
    family: Family,
    ell: u32,
    samples: Vec<(f64, Complex64)>,
}

impl Tracker {
    fn new(family: Family, ell: u32, q: u32, lo: f64, hi: f64, n: usize, opts: &ScanOptions) -> Result<Self, SphereError> {
        let mut samples = Vec::with_capacity(n);
        let first = root_at(family, ell, q, lo, opts)?;
        samples.push((lo, first));
        let n = n.max(2);
        for i in 1..n {
            let eps = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let &(pe, px) = samples.last().expect("seeded");
            let root = Self::continue_from(family, ell, pe, px, eps)?;
            samples.push((eps, root));
        }
        Ok(Self { family, ell, samples })
    }

    fn continue_from(family: Family, ell: u32, eps_from: f64, x_from: Complex64, eps: f64) -> Result<Complex64, SphereError> {
        // roots scale roughly as 1/n; step in small increments so Newton cannot hop branches
        let steps = (((eps - eps_from).abs() / eps_from) / 0.01).ceil().max(1.0) as usize;
        let mut x = x_from;
        let mut e = eps_from;
        for k in 1..=steps {
            let next = eps_from + (eps - eps_from) * k as f64 / steps as f64;
            let guess = x * (e / next).sqrt();
            x = newton(family, ell, next.sqrt(), guess, 0.05 * x.norm()).ok_or_else(|| SphereError::Polish(format!("{guess}")))?;
            e = next;
        }
        Ok(x)
    }

    fn root(&self, eps: f64) -> Result<Complex64, SphereError> {
        let &(pe, px) = self
            .samples
            .iter()
            .min_by(|a, b| (a.0 - eps).abs().partial_cmp(&(b.0 - eps).abs()).unwrap_or(std::cmp::Ordering::Equal))
            .expect("non-empty");
        if pe == eps {
            return Ok(px);
        }
        Self::continue_from(self.family, self.ell, pe, px, eps)
    }
}

fn freq(root: Complex64, radius_m: f64) -> f64 {
    root.re * SPEED_OF_LIGHT / (2.0 * std::f64::consts::PI * radius_m)
}

/// Brent's method on a bracketing interval. `fa` and `fb` must differ in sign.
fn brent<F: FnMut(f64) -> Result<f64, SphereError>>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    ftol: f64,
) -> Result<f64, SphereError> {
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut bisected = true;
    for _ in 0..200 {
        if fb.abs() <= ftol || (b - a).abs() <= 4.0 * f64::EPSILON * b.abs() {
            return Ok(b);
        }
        let mut s = if fa != fc && fb != fc {
            a * fb * fc / ((fa - fb) * (fa - fc)) + b * fa * fc / ((fb - fa) * (fb - fc)) + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let bound = (3.0 * a + b) / 4.0;
        let outside = !((s > bound.min(b)) && (s < bound.max(b)));
        if outside
            || (bisected && (s - b).abs() >= (b - c).abs() / 2.0)
            || (!bisected && (s - b).abs() >= (c - d).abs() / 2.0)
        {
            s = 0.5 * (a + b);
            bisected = true;
        } else {
            bisected = false;
        }
        let fs = f(s)?;
        d = c;
        c = b;
        fc = fb;
        if fa * fs < 0.0 {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    Ok(b)
}

/// Permittivity at which mode `(family, ell, q)` of a sphere of `radius_m`
/// resonates at `f_meas`, searched over `eps_range`.
pub fn extract_permittivity(
    f_meas: f64,
    selector: (Family, u32, u32),
    radius_m: f64,
    eps_range: (f64, f64),
    opts: &PermittivityOptions,
) -> Result<PermittivityFit, SphereError> {
    let (family, ell, q) = selector;
    SphereModeId::new(family, ell, q, 0, Parity::Cos)?;
    let (lo, hi) = eps_range;
    if !(lo > 1.0 && hi > lo) {
        return Err(SphereError::Invalid(format!("permittivity range must satisfy 1 < lo < hi, got {eps_range:?}")));
    }
    if !(f_meas > 0.0 && radius_m > 0.0) {
        return Err(SphereError::Invalid("frequency and radius must be positive".into()));
    }
    let tracker = Tracker::new(family, ell, q, lo, hi, opts.samples, &opts.scan)?;
    let solve_for_radius = |a: f64| -> Result<(f64, Complex64), SphereError> {
        let df = |eps: f64| -> Result<f64, SphereError> { Ok(freq(tracker.root(eps)?, a) - f_meas) };
        let (flo, fhi) = (df(lo)?, df(hi)?);
        if flo.signum() == fhi.signum() {
            return Err(SphereError::Bracket { lo, hi, df_lo: flo, df_hi: fhi });
        }
        let eps = brent(df, lo, hi, flo, fhi, 1e-3)?;
        Ok((eps, tracker.root(eps)?))
    };
    let (epsilon, root) = solve_for_radius(radius_m)?;
    let uncertainty = if opts.radius_tolerance_m > 0.0 {
        let (e_small, _) = solve_for_radius(radius_m - opts.radius_tolerance_m)?;
        let (e_large, _) = solve_for_radius(radius_m + opts.radius_tolerance_m)?;
        0.5 * (e_small - e_large).abs()
    } else {
        0.0
    };
    let delta_f_curve = tracker.samples.iter().map(|&(e, x)| (e, freq(x, radius_m) - f_meas)).collect();
    let id = SphereModeId::new(family, ell, q, 0, Parity::Cos)?;
    Ok(PermittivityFit { epsilon, uncertainty, delta_f_curve, mode: SphereMode::from_root(id, root, epsilon, radius_m) })
}

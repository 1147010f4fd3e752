//! Complex roots of the sphere matching condition.
//!
//! With `psi_l(rho) = rho j_l(rho)`, `xi_l(x) = x h_l^(1)(x)`, `n = sqrt(eps_r)`
//! and `x = k0 a`, continuity of the tangential fields at the surface gives
//!
//! ```text
//! TE:  n psi_l'(n x) xi_l(x) -   psi_l(n x) xi_l'(x) = 0
//! TM:    psi_l'(n x) xi_l(x) - n psi_l(n x) xi_l'(x) = 0
//! ```
//!
//! Roots are located by argument-principle winding counts over a grid of
//! rectangles in the complex `x` plane and polished by Newton iteration with
//! the analytic derivative.

use num_complex::Complex64;
use rayon::prelude::*;

use super::bessel::Riccati;
use super::{Family, Parity, SphereMode, SphereModeId, SPEED_OF_LIGHT};
use crate::error::SphereError;

fn check(ell: u32, eps_r: f64, x: Complex64) -> Result<(), SphereError> {
    if ell == 0 {
        return Err(SphereError::ZeroEll);
    }
    if !(eps_r > 1.0) || !eps_r.is_finite() {
        return Err(SphereError::Permittivity(eps_r));
    }
    if x.norm() == 0.0 || !x.re.is_finite() || !x.im.is_finite() {
        return Err(SphereError::Invalid(format!("x must be finite and non-zero, got {x}")));
    }
    Ok(())
}

/// Residual, derivative and the magnitude scale of the two cancelling terms.
fn evaluate(family: Family, ell: u32, n: f64, x: Complex64) -> (Complex64, Complex64, f64) {
    let l = ell as usize;
    let p = Riccati::psi(l, x * n);
    let s = Riccati::xi(l, x);
    match family {
        Family::TE => {
            let a = p.d1 * s.value * n;
            let b = p.value * s.d1;
            (a - b, p.d2 * s.value * (n * n) - p.value * s.d2, a.norm() + b.norm())
        }
        Family::TM => {
            let a = p.d1 * s.value;
            let b = p.value * s.d1 * n;
            let d = p.d2 * s.value * n + p.d1 * s.d1 - p.d1 * s.d1 * (n * n) - p.value * s.d2 * n;
            (a - b, d, a.norm() + b.norm())
        }
    }
}

/// Residual of the matching condition at `x = k0 a`. Zero exactly at resonances.
pub fn characteristic_value(family: Family, ell: u32, eps_r: f64, x: Complex64) -> Result<Complex64, SphereError> {
    check(ell, eps_r, x)?;
    Ok(evaluate(family, ell, eps_r.sqrt(), x).0)
}

/// `d/dx` of [`characteristic_value`].
pub fn characteristic_derivative(family: Family, ell: u32, eps_r: f64, x: Complex64) -> Result<Complex64, SphereError> {
    check(ell, eps_r, x)?;
    Ok(evaluate(family, ell, eps_r.sqrt(), x).1)
}

/// Winding number of `f` around the rectangle `[re_lo, re_hi] x [im_lo, im_hi]`,
/// traversed counter-clockwise, as a real number (integral when no zero or
/// pole lies on the boundary).
pub fn winding_number<F: Fn(Complex64) -> Complex64>(f: F, re: (f64, f64), im: (f64, f64)) -> f64 {
    let corners = [
        Complex64::new(re.0, im.0),
        Complex64::new(re.1, im.0),
        Complex64::new(re.1, im.1),
        Complex64::new(re.0, im.1),
    ];
    let mut total = 0.0;
    for k in 0..4 {
        let (a, b) = (corners[k], corners[(k + 1) % 4]);
        let samples = 24;
        let mut prev_z = a;
        let mut prev_f = f(a);
        for i in 1..=samples {
            let z = a + (b - a) * (i as f64 / samples as f64);
            let fz = f(z);
            total += arg_change(&f, prev_z, prev_f, z, fz, 0);
            prev_z = z;
            prev_f = fz;
        }
    }
    total / (2.0 * std::f64::consts::PI)
}

fn arg_change<F: Fn(Complex64) -> Complex64>(f: &F, za: Complex64, fa: Complex64, zb: Complex64, fb: Complex64, depth: u32) -> f64 {
    let d = (fb / fa).arg();
    if d.abs() < std::f64::consts::FRAC_PI_4 || depth >= 24 {
        return d;
    }
    let zm = (za + zb) * 0.5;
    let fm = f(zm);
    arg_change(f, za, fa, zm, fm, depth + 1) + arg_change(f, zm, fm, zb, fb, depth + 1)
}

/// Scan parameters for [`solve_modes`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Roots with radiation Q below this are ignored. Sets the depth of the scan window.
    pub q_min: f64,
    /// Width of the scan cells along `Re(k0 a)`.
    pub cell_width: f64,
    /// Lowest `Re(k0 a)` scanned; radial indices count from here.
    pub x_start: f64,
    /// Maximum bisection depth when a cell holds several roots.
    pub max_depth: u32,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { q_min: 2.0, cell_width: 0.0493, x_start: 0.0217, max_depth: 12 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Modes in the band sorted by frequency, one per `(family, ell, q)` (member `m = 0`).
    pub modes: Vec<SphereMode>,
    /// Cells whose winding count exceeded the number of polished roots.
    pub warnings: Vec<String>,
}

#[derive(Clone, Copy)]
struct Rect {
    re: (f64, f64),
    im: (f64, f64),
}

impl Rect {
    fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.re.0 - slack && z.re <= self.re.1 + slack && z.im >= self.im.0 - slack && z.im <= self.im.1 + slack
    }
    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re.0 + self.re.1), 0.5 * (self.im.0 + self.im.1))
    }
    fn split(&self) -> [Rect; 2] {
        if self.re.1 - self.re.0 >= self.im.1 - self.im.0 {
            let m = 0.5 * (self.re.0 + self.re.1);
            [Rect { re: (self.re.0, m), ..*self }, Rect { re: (m, self.re.1), ..*self }]
        } else {
            let m = 0.5 * (self.im.0 + self.im.1);
            [Rect { im: (self.im.0, m), ..*self }, Rect { im: (m, self.im.1), ..*self }]
        }
    }
    fn size(&self) -> f64 {
        (self.re.1 - self.re.0).max(self.im.1 - self.im.0)
    }
}

/// Newton polish. Returns the root when the relative residual drops below `1e-10`.
pub(crate) fn newton(family: Family, ell: u32, n: f64, start: Complex64, max_step: f64) -> Option<Complex64> {
    let mut x = start;
    for _ in 0..80 {
        let (f, d, _) = evaluate(family, ell, n, x);
        if d.norm() == 0.0 || !d.re.is_finite() {
            return None;
        }
        let mut step = f / d;
        if step.norm() > max_step {
            step *= max_step / step.norm();
        }
        x -= step;
        if !x.re.is_finite() || !x.im.is_finite() || x.norm() == 0.0 {
            return None;
        }
        if step.norm() <= 1e-15 * x.norm() {
            break;
        }
    }
    let (f, _, scale) = evaluate(family, ell, n, x);
    (f.norm() <= 1e-10 * scale).then_some(x)
}

fn count(family: Family, ell: u32, n: f64, r: &Rect) -> (i64, bool) {
    let w = winding_number(|z| evaluate(family, ell, n, z).0, r.re, r.im);
    let k = w.round();
    (k as i64, (w - k).abs() < 0.1)
}

fn roots_in(family: Family, ell: u32, n: f64, r: Rect, expected: i64, depth: u32, max_depth: u32, warnings: &mut Vec<String>) -> Vec<Complex64> {
    if expected <= 0 {
        return Vec::new();
    }
    let slack = 1e-9 * r.size();
    if expected == 1 {
        let starts = [
            r.center(),
            Complex64::new(0.75 * r.re.0 + 0.25 * r.re.1, 0.5 * (r.im.0 + r.im.1)),
            Complex64::new(0.25 * r.re.0 + 0.75 * r.re.1, 0.5 * (r.im.0 + r.im.1)),
        ];
        for s in starts {
            if let Some(z) = newton(family, ell, n, s, r.size()) {
                if r.contains(z, slack) {
                    return vec![z];
                }
            }
        }
    }
    if depth >= max_depth {
        let mut found: Vec<Complex64> = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                let s = Complex64::new(
                    r.re.0 + (r.re.1 - r.re.0) * (i as f64 + 0.5) / 5.0,
                    r.im.0 + (r.im.1 - r.im.0) * (j as f64 + 0.5) / 5.0,
                );
                if let Some(z) = newton(family, ell, n, s, r.size()) {
                    if r.contains(z, slack) && found.iter().all(|w| (w - z).norm() > 1e-9 * z.norm()) {
                        found.push(z);
                    }
                }
            }
        }
        if (found.len() as i64) < expected {
            warnings.push(format!(
                "{family} ell={ell}: winding count {expected} but {} root(s) polished near x = {}",
                found.len(),
                r.center()
            ));
        }
        return found;
    }
    let mut out = Vec::new();
    for half in r.split() {
        let (k, clean) = count(family, ell, n, &half);
        if !clean {
            warnings.push(format!("{family} ell={ell}: root close to scan boundary near x = {}", half.center()));
        }
        out.extend(roots_in(family, ell, n, half, k, depth + 1, max_depth, warnings));
    }
    out
}

/// All roots of one `(family, ell)` with `Re(x) < x_hi` and Q of at least `q_min`,
/// sorted by real part.
pub(crate) fn roots_below(family: Family, ell: u32, eps_r: f64, x_hi: f64, opts: &ScanOptions) -> (Vec<Complex64>, Vec<String>) {
    let n = eps_r.sqrt();
    let im = (-x_hi / (2.0 * opts.q_min), 0.0311);
    let mut roots: Vec<Complex64> = Vec::new();
    let mut warnings = Vec::new();
    let mut k = 0usize;
    loop {
        let lo = opts.x_start + k as f64 * opts.cell_width;
        if lo >= x_hi {
            break;
        }
        let cell = Rect { re: (lo, lo + opts.cell_width), im };
        let (c, clean) = count(family, ell, n, &cell);
        if !clean {
            warnings.push(format!("{family} ell={ell}: root close to scan boundary near x = {}", cell.center()));
        }
        for z in roots_in(family, ell, n, cell, c, 0, opts.max_depth, &mut warnings) {
            if roots.iter().all(|w| (w - z).norm() > 1e-9 * z.norm()) {
                roots.push(z);
            }
        }
        k += 1;
    }
    roots.retain(|z| z.re > 0.0 && z.re / (2.0 * z.im.abs()) >= opts.q_min);
    roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap_or(std::cmp::Ordering::Equal));
    (roots, warnings)
}

/// All resonances of the sphere with frequency in `band`, for `ell = 1..=ell_max`.
///
/// Radial indices `q` count every root with Q above `opts.q_min` from
/// `opts.x_start` upward, so they do not depend on the band.
pub fn solve_modes(
    eps_r: f64,
    radius_m: f64,
    band: (f64, f64),
    ell_max: u32,
    families: &[Family],
    opts: &ScanOptions,
) -> Result<SolveReport, SphereError> {
    if !(eps_r > 1.0) || !eps_r.is_finite() {
        return Err(SphereError::Permittivity(eps_r));
    }
    if !(radius_m > 0.0) {
        return Err(SphereError::Invalid(format!("radius must be positive, got {radius_m}")));
    }
    if !(band.0 > 0.0 && band.1 > band.0) {
        return Err(SphereError::Invalid(format!("band must be positive and ordered, got {band:?}")));
    }
    if ell_max == 0 {
        return Err(SphereError::ZeroEll);
    }
    let to_x = |f: f64| 2.0 * std::f64::consts::PI * f * radius_m / SPEED_OF_LIGHT;
    let x_hi = to_x(band.1);
    let jobs: Vec<(Family, u32)> = families.iter().flat_map(|&fam| (1..=ell_max).map(move |l| (fam, l))).collect();
    let results: Vec<(Family, u32, Vec<Complex64>, Vec<String>)> = jobs
        .par_iter()
        .map(|&(fam, l)| {
            let (r, w) = roots_below(fam, l, eps_r, x_hi, opts);
            (fam, l, r, w)
        })
        .collect();
    let mut modes = Vec::new();
    let mut warnings = Vec::new();
    for (fam, l, roots, w) in results {
        warnings.extend(w);
        for (i, z) in roots.into_iter().enumerate() {
            let id = SphereModeId { family: fam, ell: l, q: i as u32 + 1, m: 0, parity: Parity::Cos };
            let mode = SphereMode::from_root(id, z, eps_r, radius_m);
            if mode.freq >= band.0 && mode.freq <= band.1 {
                modes.push(mode);
            }
        }
    }
    modes.sort_by(|a, b| a.freq.partial_cmp(&b.freq).unwrap_or(std::cmp::Ordering::Equal));
    Ok(SolveReport { modes, warnings })
}

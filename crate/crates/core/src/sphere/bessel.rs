//! Spherical Bessel and Hankel functions of complex argument.
//!
//! `j_l` comes from Miller's downward recurrence normalised against the
//! closed forms of `j_0` and `j_1`; `h_l^(1)` from upward recurrence, which
//! is stable for the outgoing solution.

use num_complex::Complex64;

/// `j_0 .. j_lmax` at `z`.
pub fn spherical_j(lmax: usize, z: Complex64) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    if z.norm() < 1e-300 {
        let mut out = vec![zero; lmax + 1];
        out[0] = Complex64::new(1.0, 0.0);
        return out;
    }
    if z.norm() < 1e-3 {
        return (0..=lmax).map(|l| series_j(l, z)).collect();
    }
    let start = lmax + z.norm().ceil() as usize + 32;
    let mut vals = vec![zero; start + 2];
    vals[start + 1] = zero;
    vals[start] = Complex64::new(1.0, 0.0);
    for l in (1..=start).rev() {
        let next = vals[l] * ((2 * l + 1) as f64) / z - vals[l + 1];
        vals[l - 1] = next;
        if next.norm() > 1e150 {
            for v in vals[l - 1..].iter_mut() {
                *v *= 1e-150;
            }
        }
    }
    let (s, c) = (z.sin(), z.cos());
    let j0 = s / z;
    let j1 = s / (z * z) - c / z;
    // least-squares normalisation on the two exact values
    let m = vals[0].norm().max(vals[1].norm());
    vals[0] /= m;
    vals[1] /= m;
    let denom = vals[0].norm_sqr() + vals[1].norm_sqr();
    let scale = (j0 * vals[0].conj() + j1 * vals[1].conj()) / denom;
    vals.truncate(lmax + 1);
    for (l, v) in vals.iter_mut().enumerate() {
        if l >= 2 {
            *v /= m;
        }
        *v *= scale;
    }
    vals
}

/// Power series `z^l / (2l+1)!! * sum_k (-z^2/2)^k / (k! (2l+3)(2l+5)...(2l+2k+1))`.
pub fn series_j(l: usize, z: Complex64) -> Complex64 {
    let mut lead = Complex64::new(1.0, 0.0);
    for k in 0..=l {
        if k < l {
            lead *= z;
        }
        lead /= (2 * k + 1) as f64;
    }
    let w = -z * z / 2.0;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..200 {
        term *= w / (k as f64 * (2 * l + 2 * k + 1) as f64);
        sum += term;
        if term.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    lead * sum
}

/// `h_0^(1) .. h_lmax^(1)` at `z` (outgoing for an `exp(-i w t)` time factor).
pub fn spherical_h1(lmax: usize, z: Complex64) -> Vec<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    let e = (i * z).exp();
    let mut out = Vec::with_capacity(lmax + 1);
    out.push(-i * e / z);
    if lmax >= 1 {
        out.push(-e * (z + i) / (z * z));
    }
    for l in 1..lmax {
        let next = out[l] * ((2 * l + 1) as f64) / z - out[l - 1];
        out.push(next);
    }
    out
}

/// Riccati-Bessel value, first and second derivative built from `z_{l-1}`, `z_l`.
///
/// For `u(rho) = rho z_l(rho)`: `u' = rho z_{l-1} - l z_l` and
/// `u'' = (l(l+1)/rho^2 - 1) u`.
#[derive(Debug, Clone, Copy)]
pub struct Riccati {
    pub value: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
}

impl Riccati {
    pub fn from_sequence(l: usize, rho: Complex64, seq: &[Complex64]) -> Self {
        assert!(l >= 1 && seq.len() > l);
        let lf = l as f64;
        let value = rho * seq[l];
        let d1 = rho * seq[l - 1] - seq[l] * lf;
        let d2 = (lf * (lf + 1.0) / (rho * rho) - 1.0) * value;
        Self { value, d1, d2 }
    }

    /// `psi_l(rho) = rho j_l(rho)`.
    pub fn psi(l: usize, rho: Complex64) -> Self {
        Self::from_sequence(l, rho, &spherical_j(l, rho))
    }

    /// `xi_l(x) = x h_l^(1)(x)`.
    pub fn xi(l: usize, x: Complex64) -> Self {
        Self::from_sequence(l, x, &spherical_h1(l, x))
    }
}

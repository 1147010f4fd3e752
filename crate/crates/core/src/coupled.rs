//! Coupled photon-magnon modes: hybridised eigenfrequencies and two-port
//! transmission.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::model::{MagnonBranch, PhotonMode};
use crate::scalar::Real;

/// Photon modes, magnon branches, their couplings and the port rates.
///
/// `g[j][m]` couples photon `j` to magnon `m` (`g/2pi`, Hz). Photon-photon and
/// magnon-magnon couplings are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledSystem<T> {
    photons: Vec<PhotonMode<T>>,
    magnons: Vec<MagnonBranch<T>>,
    g: Vec<Vec<T>>,
    port_in: Vec<T>,
    port_out: Vec<T>,
}

impl<T: Real> CoupledSystem<T> {
    pub fn new(
        photons: Vec<PhotonMode<T>>,
        magnons: Vec<MagnonBranch<T>>,
        g: Vec<Vec<T>>,
        port_in: Vec<T>,
        port_out: Vec<T>,
    ) -> Result<Self, ModelError> {
        if photons.is_empty() || magnons.is_empty() {
            return Err(ModelError::Shape("need at least one photon mode and one magnon branch".into()));
        }
        let n = photons.len();
        let m = magnons.len();
        if g.len() != n || g.iter().any(|row| row.len() != m) {
            return Err(ModelError::Shape(format!("coupling matrix must be {n} x {m}")));
        }
        if port_in.len() != n || port_out.len() != n {
            return Err(ModelError::Shape(format!("need {n} port rates per port")));
        }
        for (i, p) in photons.iter().enumerate() {
            if photons[..i].iter().any(|q| q.label == p.label) {
                return Err(ModelError::DuplicateLabel(p.label.clone()));
            }
        }
        for row in &g {
            for &v in row {
                if !(v >= T::zero()) || !v.is_finite() {
                    return Err(ModelError::Negative { name: "g", value: v.as_f64() });
                }
            }
        }
        for (j, p) in photons.iter().enumerate() {
            let (a, b) = (port_in[j], port_out[j]);
            if !(a >= T::zero()) || !(b >= T::zero()) {
                return Err(ModelError::Negative { name: "port rate", value: a.min(b).as_f64() });
            }
            let total = T::lit(2.0) * p.gamma_half;
            if a + b > total {
                return Err(ModelError::PortRates {
                    label: p.label.clone(),
                    ports: (a + b).as_f64(),
                    total: total.as_f64(),
                });
            }
        }
        Ok(Self { photons, magnons, g, port_in, port_out })
    }

    /// Each photon mode gets symmetric ports `port_fraction * gamma_half`.
    pub fn with_symmetric_ports(
        photons: Vec<PhotonMode<T>>,
        magnons: Vec<MagnonBranch<T>>,
        g: Vec<Vec<T>>,
        port_fraction: T,
    ) -> Result<Self, ModelError> {
        let ports: Vec<T> = photons.iter().map(|p| p.gamma_half * port_fraction).collect();
        Self::new(photons, magnons, g, ports.clone(), ports)
    }

    pub fn photons(&self) -> &[PhotonMode<T>] {
        &self.photons
    }

    pub fn magnons(&self) -> &[MagnonBranch<T>] {
        &self.magnons
    }

    pub fn coupling(&self, photon: usize, magnon: usize) -> T {
        self.g[photon][magnon]
    }

    pub fn couplings(&self) -> &[Vec<T>] {
        &self.g
    }

    pub fn ports(&self) -> (&[T], &[T]) {
        (&self.port_in, &self.port_out)
    }

    pub fn dim(&self) -> usize {
        self.photons.len() + self.magnons.len()
    }

    /// Complex symmetric mode matrix at field `b`: diagonal `omega - i gamma`,
    /// photon-magnon blocks `g`.
    pub fn mode_matrix(&self, b: T) -> Vec<Vec<Complex<T>>> {
        let n = self.photons.len();
        let d = self.dim();
        let zero = Complex::new(T::zero(), T::zero());
        let mut h = vec![vec![zero; d]; d];
        for (j, p) in self.photons.iter().enumerate() {
            h[j][j] = Complex::new(p.omega, -p.gamma_half);
        }
        for (m, mg) in self.magnons.iter().enumerate() {
            h[n + m][n + m] = Complex::new(mg.frequency(b), -mg.gamma_half);
        }
        for j in 0..n {
            for m in 0..self.magnons.len() {
                let g = Complex::new(self.g[j][m], T::zero());
                h[j][n + m] = g;
                h[n + m][j] = g;
            }
        }
        h
    }
}

/// Hybridised branches of one photon mode and one magnon mode:
/// `(upper, lower)`, split by `2 sqrt(((omega_c - omega_m)/2)^2 + g^2)`.
pub fn two_mode_branches<T: Real>(omega_c: T, omega_m: T, g: T) -> (T, T) {
    let two = T::lit(2.0);
    let mean = (omega_c + omega_m) / two;
    let half = (omega_c - omega_m) / two;
    let s = half.hypot(g);
    (mean + s, mean - s)
}

/// Eigenvalues of the mode matrix at field `b`, sorted by real part, highest first.
///
/// The eigensolve runs in `f64` regardless of `T`.
pub fn eigenfrequencies<T: Real>(sys: &CoupledSystem<T>, b: T) -> Vec<Complex<T>> {
    let h = sys.mode_matrix(b);
    let d = h.len();
    // Shift and scale so the Schur iteration works on O(1) numbers.
    let shift = h.iter().enumerate().map(|(i, r)| r[i].re.as_f64()).sum::<f64>() / d as f64;
    let scale = h
        .iter()
        .flat_map(|r| r.iter())
        .map(|z| Complex::new(z.re.as_f64(), z.im.as_f64()))
        .enumerate()
        .map(|(k, z)| if k % (d + 1) == 0 { (z - shift).norm() } else { z.norm() })
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let m = DMatrix::from_fn(d, d, |i, j| {
        let z = Complex::new(h[i][j].re.as_f64(), h[i][j].im.as_f64());
        let z = if i == j { z - shift } else { z };
        z / scale
    });
    let eig = m.eigenvalues().expect("complex Schur decomposition converges");
    let mut out: Vec<Complex<T>> = eig
        .iter()
        .map(|z| {
            let w = z * scale + shift;
            Complex::new(T::lit(w.re), T::lit(w.im))
        })
        .collect();
    out.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap_or(std::cmp::Ordering::Equal));
    out
}

/// Eigenfrequencies across a field sweep, with branches ordered by continuity
/// (each branch follows the nearest eigenvalue of the previous field point).
pub fn eigenfrequency_sweep<T: Real>(sys: &CoupledSystem<T>, b_axis: &[T]) -> Vec<Vec<Complex<T>>> {
    let mut out: Vec<Vec<Complex<T>>> = Vec::with_capacity(b_axis.len());
    for &b in b_axis {
        let eig = eigenfrequencies(sys, b);
        let Some(prev) = out.last() else {
            out.push(eig);
            continue;
        };
        let mut pairs: Vec<(T, usize, usize)> = Vec::with_capacity(eig.len() * eig.len());
        for (i, p) in prev.iter().enumerate() {
            for (k, e) in eig.iter().enumerate() {
                pairs.push(((*p - *e).norm(), i, k));
            }
        }
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        let mut next = vec![None; eig.len()];
        let mut used = vec![false; eig.len()];
        for (_, i, k) in pairs {
            if next[i].is_none() && !used[k] {
                next[i] = Some(eig[k]);
                used[k] = true;
            }
        }
        out.push(next.into_iter().map(|z| z.expect("square assignment")).collect());
    }
    out
}

/// Two-port transmission at field `b` and probe frequency `f`.
///
/// Each photon mode contributes `sqrt(k_in k_out) / (i(omega_j - f) + gamma_j + Sigma_j(f))`
/// where the self energy `Sigma_j` sums `g_jm^2 / (i(omega_m(b) - f) + gamma_m)`.
pub fn s21<T: Real>(sys: &CoupledSystem<T>, b: T, f: T) -> Complex<T> {
    let magnon_inv: Vec<Complex<T>> = sys
        .magnons
        .iter()
        .map(|m| Complex::new(m.gamma_half, m.frequency(b) - f).inv())
        .collect();
    s21_with(sys, f, &magnon_inv)
}

fn s21_with<T: Real>(sys: &CoupledSystem<T>, f: T, magnon_inv: &[Complex<T>]) -> Complex<T> {
    let mut total = Complex::new(T::zero(), T::zero());
    for (j, p) in sys.photons.iter().enumerate() {
        let mut denom = Complex::new(p.gamma_half, p.omega - f);
        for (m, inv) in magnon_inv.iter().enumerate() {
            let g = sys.g[j][m];
            if g > T::zero() {
                denom = denom + *inv * (g * g);
            }
        }
        let num = (sys.port_in[j] * sys.port_out[j]).sqrt();
        total = total + denom.inv() * num;
    }
    total
}

/// Grid values of a transmission map.
#[derive(Debug, Clone, PartialEq)]
pub enum MapData<T> {
    /// Complex `S21`.
    Complex(Vec<Complex<T>>),
    /// `20 log10 |S21|`.
    Db(Vec<T>),
}

/// Transmission over a `(B, f)` grid, stored row-major in `B` then `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionMap<T> {
    b_axis: Vec<T>,
    f_axis: Vec<T>,
    data: MapData<T>,
}

fn strictly_increasing<T: Real>(axis: &[T], min: usize) -> Result<(), ModelError> {
    if axis.len() < min || axis.iter().any(|v| !v.is_finite()) || axis.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(ModelError::Axis { min });
    }
    Ok(())
}

pub fn to_db<T: Real>(z: Complex<T>) -> T {
    T::lit(20.0) * z.norm().log10()
}

impl<T: Real> TransmissionMap<T> {
    pub fn new(b_axis: Vec<T>, f_axis: Vec<T>, data: MapData<T>) -> Result<Self, ModelError> {
        strictly_increasing(&b_axis, 1)?;
        strictly_increasing(&f_axis, 1)?;
        let len = match &data {
            MapData::Complex(v) => v.len(),
            MapData::Db(v) => v.len(),
        };
        if len != b_axis.len() * f_axis.len() {
            return Err(ModelError::Shape(format!(
                "grid has {len} values, axes need {} x {}",
                b_axis.len(),
                f_axis.len()
            )));
        }
        Ok(Self { b_axis, f_axis, data })
    }

    pub fn b_axis(&self) -> &[T] {
        &self.b_axis
    }

    pub fn f_axis(&self) -> &[T] {
        &self.f_axis
    }

    pub fn data(&self) -> &MapData<T> {
        &self.data
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.b_axis.len(), self.f_axis.len())
    }

    pub fn db(&self, ib: usize, jf: usize) -> T {
        let k = ib * self.f_axis.len() + jf;
        match &self.data {
            MapData::Complex(v) => to_db(v[k]),
            MapData::Db(v) => v[k],
        }
    }

    pub fn complex(&self, ib: usize, jf: usize) -> Option<Complex<T>> {
        match &self.data {
            MapData::Complex(v) => Some(v[ib * self.f_axis.len() + jf]),
            MapData::Db(_) => None,
        }
    }

    /// The dB trace at one field point.
    pub fn column_db(&self, ib: usize) -> Vec<T> {
        (0..self.f_axis.len()).map(|j| self.db(ib, j)).collect()
    }

    /// Same map with magnitudes in dB only.
    pub fn to_db_map(&self) -> Self {
        let (nb, nf) = self.shape();
        let v = (0..nb).flat_map(|i| (0..nf).map(move |j| (i, j))).map(|(i, j)| self.db(i, j)).collect();
        Self { b_axis: self.b_axis.clone(), f_axis: self.f_axis.clone(), data: MapData::Db(v) }
    }
}

/// Additive complex Gaussian noise with `E|n|^2 = amplitude^2`.
///
/// Samples are indexed by grid coordinates: column `i` draws from stream `i`
/// of a generator seeded with `seed`, so results do not depend on the order
/// in which columns are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Noise<T> {
    pub amplitude: T,
    pub seed: u64,
}

/// Evaluates `s21` over the grid. Columns are computed in parallel.
pub fn transmission_map<T: Real>(
    sys: &CoupledSystem<T>,
    b_axis: &[T],
    f_axis: &[T],
    noise: Option<Noise<T>>,
) -> Result<TransmissionMap<T>, ModelError>
where
    StandardNormal: Distribution<T>,
{
    strictly_increasing(b_axis, 2)?;
    strictly_increasing(f_axis, 2)?;
    let nf = f_axis.len();
    let columns: Vec<Vec<Complex<T>>> = b_axis
        .par_iter()
        .enumerate()
        .map(|(i, &b)| {
            let mut col: Vec<Complex<T>> = f_axis
                .iter()
                .map(|&f| {
                    let inv: Vec<Complex<T>> = sys
                        .magnons
                        .iter()
                        .map(|m| Complex::new(m.gamma_half, m.frequency(b) - f).inv())
                        .collect();
                    s21_with(sys, f, &inv)
                })
                .collect();
            if let Some(n) = noise.filter(|n| n.amplitude > T::zero()) {
                let mut rng = ChaCha8Rng::seed_from_u64(n.seed);
                rng.set_stream(i as u64);
                let sigma = n.amplitude * T::FRAC_1_SQRT_2();
                for z in col.iter_mut() {
                    let re: T = StandardNormal.sample(&mut rng);
                    let im: T = StandardNormal.sample(&mut rng);
                    *z = *z + Complex::new(re * sigma, im * sigma);
                }
            }
            col
        })
        .collect();
    let mut values = Vec::with_capacity(b_axis.len() * nf);
    for c in columns {
        values.extend(c);
    }
    TransmissionMap::new(b_axis.to_vec(), f_axis.to_vec(), MapData::Complex(values))
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / T::from_usize(n - 1).expect("grid size");
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + step * T::from_usize(i).expect("grid index") })
                .collect()
        }
    }
}

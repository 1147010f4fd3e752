//! Physical quantities and closed-form relations for photon-magnon coupling.
//!
//! All rates are ordinary frequencies in Hz. Tabulated values quoted as
//! `g/pi` or `Gamma/pi` are halved on ingest (see [`from_over_pi`]) so that
//! every stored rate is `g/2pi` or `Gamma/2pi`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::scalar::Real;
use crate::sphere::SphereModeId;

/// Converts a rate quoted as `x/pi` into the canonical `x/2pi`.
pub fn from_over_pi<T: Real>(value_over_pi: T) -> T {
    value_over_pi / T::lit(2.0)
}

fn positive<T: Real>(name: &'static str, value: T) -> Result<T, ModelError> {
    if value > T::zero() && value.is_finite() {
        Ok(value)
    } else {
        Err(ModelError::NonPositive { name, value: value.as_f64() })
    }
}

fn non_negative<T: Real>(name: &'static str, value: T) -> Result<T, ModelError> {
    if value >= T::zero() && value.is_finite() {
        Ok(value)
    } else {
        Err(ModelError::Negative { name, value: value.as_f64() })
    }
}

/// One cavity or dielectric resonance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonMode<T> {
    pub label: String,
    /// Center frequency, Hz.
    pub omega: T,
    /// Half linewidth, Hz.
    pub gamma_half: T,
    pub id: Option<SphereModeId>,
}

impl<T: Real> PhotonMode<T> {
    pub fn new(label: impl Into<String>, omega: T, gamma_half: T) -> Result<Self, ModelError> {
        Ok(Self {
            label: label.into(),
            omega: positive("omega", omega)?,
            gamma_half: positive("gamma_half", gamma_half)?,
            id: None,
        })
    }

    /// Builds a mode from a tabulated full linewidth `Gamma/pi`.
    pub fn from_table(label: impl Into<String>, omega: T, gamma_over_pi: T) -> Result<Self, ModelError> {
        Self::new(label, omega, from_over_pi(gamma_over_pi))
    }

    pub fn with_id(mut self, id: SphereModeId) -> Self {
        self.id = Some(id);
        self
    }
}

/// Affine field-to-frequency law of a magnon branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagnonBranch<T> {
    /// Hz per tesla.
    pub slope: T,
    /// Frequency at zero field, Hz.
    pub offset: T,
    /// Half linewidth, Hz.
    pub gamma_half: T,
    /// Saturation magnetisation `mu0 M` in tesla. Metadata only.
    pub msat: Option<T>,
}

impl<T: Real> MagnonBranch<T> {
    pub fn new(slope: T, offset: T, gamma_half: T) -> Result<Self, ModelError> {
        if !offset.is_finite() {
            return Err(ModelError::Shape("magnon offset must be finite".into()));
        }
        Ok(Self {
            slope: positive("slope", slope)?,
            offset,
            gamma_half: positive("gamma_half", gamma_half)?,
            msat: None,
        })
    }

    pub fn with_msat(mut self, msat: T) -> Self {
        self.msat = Some(msat);
        self
    }

    /// `slope * b + offset`. Not clamped.
    pub fn frequency(&self, b: T) -> T {
        magnon_frequency(self, b)
    }

    /// Field at which the branch reaches `freq`.
    pub fn field_at(&self, freq: T) -> T {
        (freq - self.offset) / self.slope
    }
}

pub fn magnon_frequency<T: Real>(branch: &MagnonBranch<T>, b: T) -> T {
    branch.slope * b + branch.offset
}

/// Cooperativity `g^2 / (gamma_mag * gamma_mode)`.
///
/// The expression is homogeneous of degree zero, so any consistent rate
/// convention gives the same number.
pub fn cooperativity<T: Real>(g: T, gamma_mag: T, gamma_mode: T) -> Result<T, ModelError> {
    let g = non_negative("g", g)?;
    let gm = positive("gamma_mag", gamma_mag)?;
    let gc = positive("gamma_mode", gamma_mode)?;
    Ok(g * g / (gm * gc))
}

/// First-order standard deviation of the cooperativity from a magnon
/// linewidth standard deviation: `C * sd / gamma_mag`.
pub fn cooperativity_sigma<T: Real>(
    g: T,
    gamma_mag: T,
    gamma_mag_sd: T,
    gamma_mode: T,
) -> Result<T, ModelError> {
    let c = cooperativity(g, gamma_mag, gamma_mode)?;
    Ok(c * non_negative("gamma_mag_sd", gamma_mag_sd)? / gamma_mag)
}

/// Width of the cooperativity interval obtained by evaluating at
/// `gamma_mag - sd` and `gamma_mag + sd`.
pub fn cooperativity_span<T: Real>(
    g: T,
    gamma_mag: T,
    gamma_mag_sd: T,
    gamma_mode: T,
) -> Result<T, ModelError> {
    let sd = non_negative("gamma_mag_sd", gamma_mag_sd)?;
    let hi = cooperativity(g, gamma_mag - sd, gamma_mode)?;
    let lo = cooperativity(g, gamma_mag + sd, gamma_mode)?;
    Ok(hi - lo)
}

/// `g / omega`; multiply by 100 for percent.
pub fn coupling_ratio<T: Real>(g_half_split: T, omega: T) -> Result<T, ModelError> {
    Ok(non_negative("g", g_half_split)? / positive("omega", omega)?)
}

/// Effective susceptibility from `g^2 = chi_eff * omega^2 * xi`.
pub fn chi_eff<T: Real>(g_half_split: T, omega: T, xi: T) -> Result<T, ModelError> {
    let g = non_negative("g", g_half_split)?;
    let w = positive("omega", omega)?;
    if !(xi > T::zero() && xi <= T::one()) {
        return Err(ModelError::FillingFactorRange(xi.as_f64()));
    }
    Ok(g * g / (w * w * xi))
}

/// Standing-wave susceptibility from the two travelling-wave values of a doublet.
pub fn unperturbed_susceptibility<T: Real>(chi_plus: T, chi_minus: T) -> T {
    (chi_plus + chi_minus) / T::lit(2.0)
}

/// Linewidth of a hybrid state on resonance: the mean of its constituents.
pub fn hybrid_linewidth<T: Real>(gamma_mode: T, gamma_mag: T) -> T {
    (gamma_mode + gamma_mag) / T::lit(2.0)
}

/// Gyrotropic permeability parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PermeabilityParams<T> {
    pub chi: T,
    pub kappa: T,
}

impl<T: Real> PermeabilityParams<T> {
    pub fn new(chi: T, kappa: T) -> Result<Self, ModelError> {
        let margin = T::one() + chi - kappa.abs();
        if !(margin > T::zero()) {
            return Err(ModelError::UnphysicalPermeability(margin.as_f64()));
        }
        Ok(Self { chi, kappa })
    }

    /// Relative permeability tensor for a bias field along z, in units of `mu0`.
    pub fn tensor(&self) -> [[Complex<T>; 3]; 3] {
        let z = Complex::new(T::zero(), T::zero());
        let d = Complex::new(T::one() + self.chi, T::zero());
        let k = Complex::new(T::zero(), self.kappa);
        [[d, -k, z], [k, d, z], [z, z, Complex::new(T::one(), T::zero())]]
    }

    /// `(mu_plus, mu_minus) = (1 + chi + kappa, 1 + chi - kappa)`.
    pub fn effective(&self) -> (T, T) {
        let base = T::one() + self.chi;
        (base + self.kappa, base - self.kappa)
    }

    /// Circular susceptibilities `chi_pm = chi pm kappa`.
    pub fn circular_susceptibilities(&self) -> (T, T) {
        (self.chi + self.kappa, self.chi - self.kappa)
    }
}

pub fn permeability_tensor<T: Real>(p: &PermeabilityParams<T>) -> [[Complex<T>; 3]; 3] {
    p.tensor()
}

pub fn effective_permeabilities<T: Real>(p: &PermeabilityParams<T>) -> (T, T) {
    p.effective()
}

/// Derived quantities for one photon mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedModeReport<T> {
    pub label: String,
    /// Half the on-resonance splitting, `g/2pi` in Hz.
    pub g_half_split: T,
    pub cooperativity: T,
    /// First-order cooperativity uncertainty, when a magnon linewidth sd is known.
    pub cooperativity_sigma: Option<T>,
    pub coupling_ratio: T,
    pub chi_eff: Option<T>,
    pub filling_factor: Option<T>,
}

impl<T: Real> DerivedModeReport<T> {
    /// `gamma_mag_sd` is the standard deviation of `magnon.gamma_half`.
    pub fn compute(
        mode: &PhotonMode<T>,
        g_half_split: T,
        magnon_gamma_half: T,
        gamma_mag_sd: Option<T>,
        filling_factor: Option<T>,
    ) -> Result<Self, ModelError> {
        let cooperativity = cooperativity(g_half_split, magnon_gamma_half, mode.gamma_half)?;
        let cooperativity_sigma = gamma_mag_sd
            .map(|sd| cooperativity_sigma(g_half_split, magnon_gamma_half, sd, mode.gamma_half))
            .transpose()?;
        let chi = filling_factor.map(|xi| chi_eff(g_half_split, mode.omega, xi)).transpose()?;
        Ok(Self {
            label: mode.label.clone(),
            g_half_split,
            cooperativity,
            cooperativity_sigma,
            coupling_ratio: coupling_ratio(g_half_split, mode.omega)?,
            chi_eff: chi,
            filling_factor,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{GAMMA_MAG_OVER_PI_HZ, GAMMA_MAG_SD_OVER_PI_HZ, MODE_TABLE};
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn magnon_dispersion() {
        let zero = MagnonBranch::new(28e9, 0.0, 1e6).unwrap();
        assert_eq!(zero.frequency(0.0), 0.0);
        assert!(rel(zero.frequency(0.25), 7.0e9) < 1e-15);
        let fitted = MagnonBranch::new(24.49e9, 0.0, 1e6).unwrap();
        assert!(rel(fitted.frequency(0.6425), 15.73e9) < 1e-3);
        assert!(MagnonBranch::new(-1.0, 0.0, 1e6).is_err());
        assert!(MagnonBranch::new(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn cooperativity_examples() {
        assert!(rel(cooperativity(7.11e9, 3.247e6, 1.029e6).unwrap(), 1.513e7) < 1e-3);
        assert!(rel(cooperativity(4.79e9, 3.247e6, 11.84e6).unwrap(), 5.97e5) < 2e-3);
        assert_eq!(cooperativity(0.0, 3.247e6, 1.029e6).unwrap(), 0.0);
        assert!(cooperativity(1.0, 0.0, 1.0).is_err());
        assert!(cooperativity(1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn cooperativity_uncertainty() {
        let g = 7.11e9;
        let s = cooperativity_sigma(g, 3.247e6, 0.493e6, 1.029e6).unwrap();
        let c = cooperativity(g, 3.247e6, 1.029e6).unwrap();
        assert!(rel(s / c, 0.493 / 3.247) < 1e-12);
        // The tabulated spread matches the +/- sd interval width.
        let span = cooperativity_span(g, 3.247e6, 0.493e6, 1.029e6).unwrap();
        assert!(rel(span, 47.0e5) < 0.01, "span {span}");
    }

    #[test]
    fn ratio_and_susceptibility_examples() {
        assert!((coupling_ratio(3.555e9_f64, 15.506e9).unwrap() - 0.2293).abs() < 1e-4);
        assert!((coupling_ratio(1.52e9_f64, 15.893e9).unwrap() - 0.0956).abs() < 1e-4);
        assert_eq!(coupling_ratio(0.0, 1.0).unwrap(), 0.0);
        assert!(rel(chi_eff(3.075e9, 15.732e9, 0.728).unwrap(), 0.0525) < 1e-2);
        assert!(rel(chi_eff(2.395e9, 12.779e9, 0.221).unwrap(), 0.159) < 1e-2);
        assert!(rel(chi_eff(0.39e9, 15.950e9, 0.493).unwrap(), 0.00121) < 1e-2);
        assert!(chi_eff(1.0, 1.0, 0.0).is_err());
        assert!(chi_eff(1.0, 1.0, 1.5).is_err());
        assert!(chi_eff(1.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn doublet_average() {
        assert!((unperturbed_susceptibility(0.0885_f64, 0.0305) - 0.0595).abs() < 1e-12);
        assert!((unperturbed_susceptibility(0.0185_f64, 0.00121) - 0.00986).abs() < 1e-5);
        assert_eq!(unperturbed_susceptibility(0.3, 0.3), 0.3);
    }

    #[test]
    fn hybrid_linewidth_examples() {
        assert!((hybrid_linewidth(5.355e6_f64, 3.247e6) - 4.301e6).abs() < 1.0);
        assert_eq!(hybrid_linewidth(2.0, 2.0), 2.0);
        assert!((hybrid_linewidth(2.0_f64, 1e-300) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn permeability() {
        let vac = PermeabilityParams::new(0.0, 0.0).unwrap();
        let t = vac.tensor();
        for (i, row) in t.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_eq!(*v, Complex::new(want, 0.0));
            }
        }
        assert_eq!(vac.effective(), (1.0, 1.0));

        let p = PermeabilityParams::new(0.0595_f64, 0.029).unwrap();
        let (mp, mm) = p.effective();
        assert!((mp - 1.0885).abs() < 1e-12 && (mm - 1.0305).abs() < 1e-12);
        let t = p.tensor();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(t[i][j], t[j][i].conj());
            }
        }
        assert!(PermeabilityParams::new(-0.5, 0.6).is_err());
    }

    #[test]
    fn circular_basis_diagonalises_transverse_block() {
        let p = PermeabilityParams::new(0.0595_f64, 0.029).unwrap();
        let t = p.tensor();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (mp, mm) = p.effective();
        // (1, i)/sqrt2 and (1, -i)/sqrt2 are eigenvectors with mu_plus, mu_minus.
        for (v, mu) in [
            ([Complex::new(s, 0.0), Complex::new(0.0, s)], mp),
            ([Complex::new(s, 0.0), Complex::new(0.0, -s)], mm),
        ] {
            for i in 0..2 {
                let lhs = t[i][0] * v[0] + t[i][1] * v[1];
                assert!((lhs - v[i] * mu).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn table_reproduction_within_one_percent() {
        for row in MODE_TABLE {
            let g = from_over_pi(row.g_over_pi_hz);
            let c = cooperativity(g, from_over_pi(GAMMA_MAG_OVER_PI_HZ), from_over_pi(row.gamma_over_pi_hz))
                .unwrap();
            assert!(rel(c, row.cooperativity) < 0.01, "{}: {c}", row.label);
            let pct = 100.0 * coupling_ratio(g, row.omega_hz).unwrap();
            assert!((pct - row.g_over_omega_pct).abs() < 0.1, "{}: {pct}", row.label);
            let span = cooperativity_span(
                g,
                from_over_pi(GAMMA_MAG_OVER_PI_HZ),
                from_over_pi(GAMMA_MAG_SD_OVER_PI_HZ),
                from_over_pi(row.gamma_over_pi_hz),
            )
            .unwrap();
            assert!(rel(span, row.cooperativity_spread) < 0.02, "{}: {span}", row.label);
        }
    }

    #[test]
    fn report_in_f32() {
        let mode = PhotonMode::<f32>::from_table("1", 15.732e9, 5.355e6).unwrap();
        let r = DerivedModeReport::compute(&mode, 3.075e9, 1.6235e6, Some(0.2465e6), Some(0.728)).unwrap();
        assert!((r.chi_eff.unwrap() - 0.0525).abs() < 1e-3);
        assert!((r.coupling_ratio - 0.1955).abs() < 1e-3);
        assert!(r.cooperativity_sigma.unwrap() > 0.0);
    }

    proptest! {
        #[test]
        fn cooperativity_is_scale_free(g in 1e3f64..1e10, a in 1e3f64..1e8, b in 1e3f64..1e8, s in 1e-3f64..1e3) {
            let c0 = cooperativity(g, a, b).unwrap();
            let c1 = cooperativity(g * s, a * s, b * s).unwrap();
            prop_assert!(rel(c1, c0) < 1e-12);
        }

        #[test]
        fn chi_eff_round_trip(g in 0.0f64..1e10, w in 1e8f64..1e11, xi in 1e-3f64..1.0) {
            let chi = chi_eff(g, w, xi).unwrap();
            let back = chi * w * w * xi;
            prop_assert!((back - g * g).abs() <= 1e-12 * (g * g).max(1e-300));
        }

        #[test]
        fn doublet_average_symmetric(a in 0.0f64..1.0, b in 0.0f64..1.0) {
            prop_assert_eq!(unperturbed_susceptibility(a, b), unperturbed_susceptibility(b, a));
        }
    }
}

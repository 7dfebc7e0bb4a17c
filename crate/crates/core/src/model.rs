//! Physical parameters, SI conversions and the Hamiltonian variants.
//!
//! Internally ħ = 1. Parameters either carry SI angular frequencies (rad/s)
//! or are normalized so that the total loss of the Kerr resonator is 1.

use std::sync::Arc;

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{mode_operator, ComplexOperator, FockBasis, LadderKind, Mode};

/// CODATA 2018 reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// CODATA 2018 vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum UnitSystem {
    Si,
    #[default]
    Normalized,
}

/// Rates and drive settings of the Kerr/linear resonator pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    /// Bare resonance frequency; 0 in the rotating frame.
    #[serde(default)]
    pub omega_c: f64,
    /// Drive detuning ω_c − ω_l.
    #[serde(default)]
    pub delta: f64,
    /// Kerr shift.
    pub chi: f64,
    /// Inter-resonator coupling.
    #[serde(alias = "J")]
    pub j: f64,
    /// Intrinsic loss of the Kerr resonator.
    pub gamma_1: f64,
    /// Fiber-coupling loss of the Kerr resonator.
    pub gamma_ex: f64,
    /// Intrinsic loss of the linear resonator.
    pub gamma_2: f64,
    /// Extra loss on the linear resonator from the absorbing tip.
    #[serde(default)]
    pub gamma_tip: f64,
    /// Drive amplitude Ω.
    pub omega_drive: f64,
    /// Phase of the drive, Ω(e^{iφ} a₁† + e^{−iφ} a₁).
    #[serde(default)]
    pub drive_phase: f64,
    #[serde(default)]
    pub unit_system: UnitSystem,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivedRates {
    pub gamma1_prime: f64,
    pub gamma2_prime: f64,
    /// Mean loss (γ₁′ + γ₂′)/4.
    pub total_loss: f64,
    /// Loss contrast (γ₂′ − γ₁′)/4.
    pub loss_contrast: f64,
}

impl SystemParams {
    pub fn gamma1_prime(&self) -> f64 {
        self.gamma_1 + self.gamma_ex
    }

    pub fn gamma2_prime(&self) -> f64 {
        self.gamma_2 + self.gamma_tip
    }

    pub fn with_gamma_tip(&self, gamma_tip: f64) -> Self {
        SystemParams {
            gamma_tip,
            ..self.clone()
        }
    }

    pub fn with_delta(&self, delta: f64) -> Self {
        SystemParams {
            delta,
            ..self.clone()
        }
    }

    /// Checks sign constraints on all rates.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("gamma_1", self.gamma_1),
            ("gamma_ex", self.gamma_ex),
            ("gamma_2", self.gamma_2),
            ("gamma_tip", self.gamma_tip),
            ("j", self.j),
            ("omega_drive", self.omega_drive),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidArgument(format!("{name} must be >= 0, got {v}")));
            }
        }
        for (name, v) in [
            ("omega_c", self.omega_c),
            ("delta", self.delta),
            ("chi", self.chi),
            ("drive_phase", self.drive_phase),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    /// Stricter check for steady-state solves: both total losses positive.
    pub fn validate_dissipative(&self) -> Result<()> {
        self.validate()?;
        if self.gamma1_prime() <= 0.0 || self.gamma2_prime() <= 0.0 {
            return Err(Error::InvalidArgument(
                "total losses must be strictly positive for a steady state".into(),
            ));
        }
        Ok(())
    }

    /// Same physics with every rate divided by γ₁′.
    pub fn normalized(&self) -> Result<Self> {
        let g = self.gamma1_prime();
        if g <= 0.0 {
            return Err(Error::InvalidArgument("cannot normalize with zero gamma1'".into()));
        }
        Ok(SystemParams {
            omega_c: self.omega_c / g,
            delta: self.delta / g,
            chi: self.chi / g,
            j: self.j / g,
            gamma_1: self.gamma_1 / g,
            gamma_ex: self.gamma_ex / g,
            gamma_2: self.gamma_2 / g,
            gamma_tip: self.gamma_tip / g,
            omega_drive: self.omega_drive / g,
            drive_phase: self.drive_phase,
            unit_system: UnitSystem::Normalized,
        })
    }

    /// Applies a `key=value` override.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let slot = match key {
            "omega_c" => &mut self.omega_c,
            "delta" => &mut self.delta,
            "chi" => &mut self.chi,
            "j" | "J" => &mut self.j,
            "gamma_1" => &mut self.gamma_1,
            "gamma_ex" => &mut self.gamma_ex,
            "gamma_2" => &mut self.gamma_2,
            "gamma_tip" => &mut self.gamma_tip,
            "omega_drive" | "omega" => &mut self.omega_drive,
            "drive_phase" => &mut self.drive_phase,
            _ => return Err(Error::Config(format!("unknown parameter '{key}'"))),
        };
        *slot = value;
        Ok(())
    }

    /// Characteristic rate used to scale absolute tolerances.
    pub fn rate_scale(&self) -> f64 {
        [
            self.delta.abs(),
            self.chi.abs(),
            self.j,
            self.gamma1_prime(),
            self.gamma2_prime(),
            self.omega_c.abs(),
        ]
        .into_iter()
        .fold(f64::MIN_POSITIVE, f64::max)
    }

    pub fn as_key_values(&self) -> Vec<(&'static str, String)> {
        vec![
            ("unit_system", format!("{:?}", self.unit_system).to_lowercase()),
            ("omega_c", self.omega_c.to_string()),
            ("delta", self.delta.to_string()),
            ("chi", self.chi.to_string()),
            ("j", self.j.to_string()),
            ("gamma_1", self.gamma_1.to_string()),
            ("gamma_ex", self.gamma_ex.to_string()),
            ("gamma_2", self.gamma_2.to_string()),
            ("gamma_tip", self.gamma_tip.to_string()),
            ("omega_drive", self.omega_drive.to_string()),
            ("drive_phase", self.drive_phase.to_string()),
        ]
    }
}

pub fn derived_rates(p: &SystemParams) -> DerivedRates {
    let g1 = p.gamma1_prime();
    let g2 = p.gamma2_prime();
    DerivedRates {
        gamma1_prime: g1,
        gamma2_prime: g2,
        total_loss: (g1 + g2) / 4.0,
        loss_contrast: (g2 - g1) / 4.0,
    }
}

pub fn angular_frequency(wavelength: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / wavelength
}

/// Kerr shift χ = 3ħω²(χ⁽³⁾/ε_r²)/(4ε₀V_eff) in rad/s.
///
/// `wavelength` in m, `chi3_over_eps_r2` in m²/V², `v_eff` in m³.
pub fn kerr_coefficient(wavelength: f64, chi3_over_eps_r2: f64, v_eff: f64) -> Result<f64> {
    if !(wavelength > 0.0) || !(v_eff > 0.0) || !(chi3_over_eps_r2 >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "kerr_coefficient needs wavelength > 0, V_eff > 0, chi3 >= 0 \
             (got {wavelength}, {v_eff}, {chi3_over_eps_r2})"
        )));
    }
    let w = angular_frequency(wavelength);
    Ok(3.0 * HBAR * w * w * chi3_over_eps_r2 / (4.0 * EPSILON_0 * v_eff))
}

/// Drive amplitude Ω = sqrt(γ_ex P_in / (ħ ω_l)) in rad/s.
pub fn drive_amplitude(p_in: f64, gamma_ex: f64, drive_wavelength: f64) -> Result<f64> {
    if !(p_in >= 0.0) || !(gamma_ex >= 0.0) || !(drive_wavelength > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "drive_amplitude needs P_in >= 0, gamma_ex >= 0, wavelength > 0 \
             (got {p_in}, {gamma_ex}, {drive_wavelength})"
        )));
    }
    let w = angular_frequency(drive_wavelength);
    Ok((gamma_ex * p_in / (HBAR * w)).sqrt())
}

/// Device-level inputs for building SI parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiInputs {
    /// Resonance (and drive) wavelength, m.
    pub wavelength: f64,
    /// Loaded quality factor, γ₁′ = ω_c / Q.
    pub q_factor: f64,
    /// Mode volume, m³.
    pub v_eff: f64,
    /// χ⁽³⁾/ε_r², m²/V².
    pub chi3_over_eps_r2: f64,
    /// Input power, W.
    pub p_in: f64,
    /// Coupling J in units of γ₁′.
    #[serde(default = "default_j_ratio")]
    pub j_over_gamma1p: f64,
    /// Intrinsic loss of the linear resonator in units of γ₁′.
    #[serde(default = "default_gamma2_ratio")]
    pub gamma2_over_gamma1p: f64,
    /// Fraction of γ₁′ attributed to fiber coupling.
    #[serde(default = "default_ex_fraction")]
    pub gamma_ex_fraction: f64,
    /// Multiplier applied to the Kerr formula (1 = formula as written).
    #[serde(default = "default_kerr_scale")]
    pub kerr_scale: f64,
}

fn default_j_ratio() -> f64 {
    2.0
}
fn default_gamma2_ratio() -> f64 {
    0.1
}
fn default_ex_fraction() -> f64 {
    0.5
}
fn default_kerr_scale() -> f64 {
    1.0
}

impl SiInputs {
    /// Device values quoted for the silica resonator pair at 1550 nm.
    pub fn reference_device() -> Self {
        SiInputs {
            wavelength: 1550e-9,
            q_factor: 2e9,
            v_eff: 100e-18,
            chi3_over_eps_r2: 2e-17,
            p_in: 4e-15,
            j_over_gamma1p: default_j_ratio(),
            gamma2_over_gamma1p: default_gamma2_ratio(),
            gamma_ex_fraction: default_ex_fraction(),
            kerr_scale: default_kerr_scale(),
        }
    }

    /// Rotating-frame parameters in rad/s.
    pub fn to_params(&self) -> Result<SystemParams> {
        if !(self.q_factor > 0.0) || !(0.0..=1.0).contains(&self.gamma_ex_fraction) {
            return Err(Error::InvalidArgument(
                "q_factor must be > 0 and gamma_ex_fraction in [0, 1]".into(),
            ));
        }
        let w = angular_frequency(self.wavelength);
        let g1p = w / self.q_factor;
        let gamma_ex = self.gamma_ex_fraction * g1p;
        Ok(SystemParams {
            omega_c: 0.0,
            delta: 0.0,
            chi: self.kerr_scale * kerr_coefficient(self.wavelength, self.chi3_over_eps_r2, self.v_eff)?,
            j: self.j_over_gamma1p * g1p,
            gamma_1: g1p - gamma_ex,
            gamma_ex,
            gamma_2: self.gamma2_over_gamma1p * g1p,
            gamma_tip: 0.0,
            omega_drive: drive_amplitude(self.p_in, gamma_ex, self.wavelength)?,
            drive_phase: 0.0,
            unit_system: UnitSystem::Si,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HamiltonianVariant {
    /// Undriven lab-frame Hamiltonian with ω_c.
    Isolated,
    /// Rotating frame at the drive frequency, Δ replaces ω_c, plus drive.
    RotatingDriven,
    /// Rotating driven Hamiltonian with −i γ′/2 loss terms.
    EffectiveNonHermitian,
    /// Undriven lab-frame Hamiltonian with −i γ′/2 loss terms.
    ExcitationConservingNonHermitian,
}

pub fn build_hamiltonian(
    p: &SystemParams,
    basis: &Arc<FockBasis>,
    variant: HamiltonianVariant,
) -> Result<ComplexOperator> {
    p.validate()?;
    use HamiltonianVariant::*;
    let (photon_energy, driven, lossy) = match variant {
        Isolated => (p.omega_c, false, false),
        RotatingDriven => (p.delta, true, false),
        EffectiveNonHermitian => (p.delta, true, true),
        ExcitationConservingNonHermitian => (p.omega_c, false, true),
    };
    let (g1, g2) = (p.gamma1_prime(), p.gamma2_prime());
    let d = basis.dim();
    let mut h = Mat::<c64>::zeros(d, d);
    for (i, &(m, n)) in basis.states().iter().enumerate() {
        let (mf, nf) = (m as f64, n as f64);
        let mut diag = c64::new(photon_energy * (mf + nf) + p.chi * mf * (mf - 1.0), 0.0);
        if lossy {
            diag -= c64::new(0.0, 0.5 * (g1 * mf + g2 * nf));
        }
        h[(i, i)] = diag;
    }

    let a1 = mode_operator(basis, Mode::One, LadderKind::Annihilate);
    let a2 = mode_operator(basis, Mode::Two, LadderKind::Annihilate);
    let hop = a1.dagger().matmul(&a2)?;
    let drive = c64::from_polar(p.omega_drive, p.drive_phase);
    for j in 0..d {
        for i in 0..d {
            let mut v = p.j * (hop.get(i, j) + hop.get(j, i).conj());
            if driven {
                // Ω e^{iφ} a₁† + Ω e^{−iφ} a₁, with a₁†_{ij} = conj(a₁_{ji})
                v += drive * a1.get(j, i).conj() + drive.conj() * a1.get(i, j);
            }
            h[(i, j)] += v;
        }
    }
    ComplexOperator::new(basis.clone(), h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::Truncation;

    fn params() -> SystemParams {
        SystemParams {
            omega_c: 0.7,
            delta: -0.4,
            chi: 2.3,
            j: 1.1,
            gamma_1: 0.5,
            gamma_ex: 0.5,
            gamma_2: 0.1,
            gamma_tip: 3.0,
            omega_drive: 0.3,
            drive_phase: 0.0,
            unit_system: UnitSystem::Normalized,
        }
    }

    #[test]
    fn kerr_reference_value() {
        // direct SI evaluation: 3ħω²χ3/(4ε₀V) with ω = 2πc/1550nm
        let chi = kerr_coefficient(1550e-9, 2e-17, 100e-18).unwrap();
        assert!((chi / 2.638_495_976_265_322e6 - 1.0).abs() < 1e-12, "{chi}");
        assert_eq!(kerr_coefficient(1550e-9, 0.0, 100e-18).unwrap(), 0.0);
        let half = kerr_coefficient(1550e-9, 2e-17, 200e-18).unwrap();
        assert!((half * 2.0 / chi - 1.0).abs() < 1e-14);
        assert!(kerr_coefficient(0.0, 2e-17, 1e-16).is_err());
        assert!(kerr_coefficient(1550e-9, 2e-17, -1e-16).is_err());
    }

    #[test]
    fn drive_amplitude_scaling() {
        assert_eq!(drive_amplitude(0.0, 1e5, 1550e-9).unwrap(), 0.0);
        let a = drive_amplitude(1e-15, 3e5, 1550e-9).unwrap();
        let b = drive_amplitude(4e-15, 3e5, 1550e-9).unwrap();
        assert!((b / a - 2.0).abs() < 1e-14);
        assert!(drive_amplitude(-1.0, 1.0, 1550e-9).is_err());
    }

    #[test]
    fn reference_device_is_weakly_driven() {
        let p = SiInputs::reference_device().to_params().unwrap();
        let g1p = p.gamma1_prime();
        // ω/Q at 1550 nm
        assert!((g1p / 607_629.537_841_565_6 - 1.0).abs() < 1e-12);
        let ratio = p.omega_drive / g1p;
        assert!((ratio / 0.160_259_226_455_819_2 - 1.0).abs() < 1e-10, "{ratio}");
        assert!(ratio < 0.2);
        assert!((p.chi / g1p - 4.342_277_344_906_311).abs() < 1e-10);
    }

    #[test]
    fn derived_rate_examples() {
        let mut p = params();
        p.gamma_tip = 8.9;
        let r = derived_rates(&p);
        assert!((r.gamma2_prime - 9.0).abs() < 1e-14);
        assert!((r.total_loss - 2.5).abs() < 1e-14);
        assert!((r.loss_contrast - 2.0).abs() < 1e-14);

        p.gamma_2 = 1.0;
        p.gamma_tip = 0.0;
        let r = derived_rates(&p);
        assert_eq!(r.loss_contrast, 0.0);
        assert_eq!(r.total_loss, 0.5);
        assert!(r.total_loss >= r.loss_contrast.abs());
    }

    #[test]
    fn bare_rotating_hamiltonian_is_diagonal_detuning() {
        let mut p = params();
        p.omega_drive = 0.0;
        p.chi = 0.0;
        p.j = 0.0;
        let b = FockBasis::shared(Truncation::PerMode(3, 3));
        let h = build_hamiltonian(&p, &b, HamiltonianVariant::RotatingDriven).unwrap();
        for i in 0..b.dim() {
            for j in 0..b.dim() {
                let (m, n) = b.states()[i];
                let expect = if i == j { p.delta * (m + n) as f64 } else { 0.0 };
                assert!((h.get(i, j) - c64::new(expect, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn isolated_conserves_excitations() {
        let p = params();
        let b = FockBasis::shared(Truncation::Total(4));
        let h = build_hamiltonian(&p, &b, HamiltonianVariant::Isolated).unwrap();
        let n = mode_operator(&b, Mode::One, LadderKind::Number)
            .add(&mode_operator(&b, Mode::Two, LadderKind::Number))
            .unwrap();
        assert!(h.commutator(&n).unwrap().max_abs() < 1e-12 * h.max_abs());
    }

    #[test]
    fn effective_minus_rotating_is_loss() {
        let p = params();
        let b = FockBasis::shared(Truncation::PerMode(3, 2));
        let hr = build_hamiltonian(&p, &b, HamiltonianVariant::RotatingDriven).unwrap();
        let he = build_hamiltonian(&p, &b, HamiltonianVariant::EffectiveNonHermitian).unwrap();
        let diff = he.sub(&hr).unwrap();
        for (i, &(m, n)) in b.states().iter().enumerate() {
            for j in 0..b.dim() {
                let expect = if i == j {
                    c64::new(0.0, -0.5 * (p.gamma1_prime() * m as f64 + p.gamma2_prime() * n as f64))
                } else {
                    c64::new(0.0, 0.0)
                };
                assert!((diff.get(i, j) - expect).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn rotating_is_hermitian_even_with_phase() {
        let mut p = params();
        p.drive_phase = 0.9;
        let b = FockBasis::shared(Truncation::PerMode(4, 3));
        let h = build_hamiltonian(&p, &b, HamiltonianVariant::RotatingDriven).unwrap();
        assert!(h.hermiticity_defect() < 1e-15);
    }

    #[test]
    fn kerr_diagonal_only() {
        let mut p = params();
        p.delta = 0.0;
        p.j = 0.0;
        p.omega_drive = 0.0;
        let b = FockBasis::shared(Truncation::PerMode(4, 2));
        let h = build_hamiltonian(&p, &b, HamiltonianVariant::RotatingDriven).unwrap();
        for (i, &(m, _)) in b.states().iter().enumerate() {
            assert_eq!(h.get(i, i).re, p.chi * (m * m.saturating_sub(1)) as f64);
        }
        assert_eq!(h.max_abs(), p.chi * 12.0);
    }

    #[test]
    fn excitation_conserving_is_block_diagonal() {
        let p = params();
        let b = FockBasis::shared(Truncation::Total(3));
        let h = build_hamiltonian(&p, &b, HamiltonianVariant::ExcitationConservingNonHermitian)
            .unwrap();
        for (i, &(m, n)) in b.states().iter().enumerate() {
            for (j, &(k, l)) in b.states().iter().enumerate() {
                if m + n != k + l {
                    assert_eq!(h.get(i, j).norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn negative_rates_rejected() {
        let mut p = params();
        p.gamma_tip = -1.0;
        let b = FockBasis::shared(Truncation::Total(1));
        assert!(build_hamiltonian(&p, &b, HamiltonianVariant::Isolated).is_err());
    }

    #[test]
    fn normalization_divides_rates() {
        let p = SiInputs::reference_device().to_params().unwrap();
        let n = p.normalized().unwrap();
        assert!((n.gamma1_prime() - 1.0).abs() < 1e-15);
        assert!((n.j - 2.0).abs() < 1e-14);
        assert!((n.gamma_2 - 0.1).abs() < 1e-14);
    }
}

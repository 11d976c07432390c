//! Model parameters.
//!
//! [`PhysicalInputs`] holds laboratory-style couplings (detunings, Rabi
//! frequencies, atom number). [`reduce_parameters`] maps them onto the five
//! frequencies of the two-mode spin-boson model, [`ReducedParams`], which is
//! what every other module consumes. Units have ħ = 1.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// |δ_C| / ω_R below which the fast-photon coarse-graining window closes.
pub const LARGE_DETUNING_RATIO: f64 = 10.0;

/// Laboratory parameters of the driven atom-cavity system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalInputs {
    /// Δ_A = ω − ω_A, must be negative (red detuning).
    pub atom_pump_detuning: f64,
    /// Δ_C = ω − ω_C.
    pub cavity_pump_detuning: f64,
    /// g_0, single-photon Rabi frequency at a cavity antinode.
    pub single_photon_rabi: f64,
    /// Ω, Rabi frequency of the transverse pump.
    pub pump_rabi: f64,
    pub atom_number: u64,
    /// ω_R given directly. May be combined with `mass`/`wavenumber`, in which
    /// case the two must agree.
    #[serde(default)]
    pub recoil_frequency: Option<f64>,
    #[serde(default)]
    pub mass: Option<f64>,
    #[serde(default)]
    pub wavenumber: Option<f64>,
    /// κ; the photon loss rate is 2κ.
    #[serde(default)]
    pub photon_loss: f64,
}

impl PhysicalInputs {
    /// Resolves ω_R from the direct value and/or ħk²/2m.
    pub fn recoil(&self) -> Result<f64> {
        let from_kinematics = match (self.mass, self.wavenumber) {
            (Some(m), Some(k)) => {
                if !(m > 0.0) {
                    return Err(Error::Config(format!("mass must be positive, got {m}")));
                }
                Some(k * k / (2.0 * m))
            }
            (None, None) => None,
            _ => {
                return Err(Error::Config(
                    "mass and wavenumber must be given together".into(),
                ))
            }
        };
        match (self.recoil_frequency, from_kinematics) {
            (Some(direct), Some(derived)) => {
                if (direct - derived).abs() > 1e-9 * direct.abs().max(derived.abs()) {
                    return Err(Error::Config(format!(
                        "recoil frequency {direct} disagrees with k²/2m = {derived}"
                    )));
                }
                Ok(direct)
            }
            (Some(w), None) | (None, Some(w)) => Ok(w),
            (None, None) => Err(Error::Config(
                "recoil frequency or (mass, wavenumber) required".into(),
            )),
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.atom_pump_detuning < 0.0) {
            return Err(Error::Regime(format!(
                "Δ_A must be negative (red detuning), got {}",
                self.atom_pump_detuning
            )));
        }
        if self.atom_number == 0 {
            return Err(Error::Config("atom number must be at least 1".into()));
        }
        if !(self.photon_loss >= 0.0) {
            return Err(Error::Config(format!(
                "κ must be non-negative, got {}",
                self.photon_loss
            )));
        }
        Ok(())
    }
}

/// Frequencies of the two-mode spin-boson model.
///
/// Every field except `atom_number` is an angular frequency. The atom number
/// is only read by the exact-diagonalization oracle; the mean-field and
/// fluctuation modules work in the thermodynamic limit at fixed `u`, `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    /// ω_R, recoil frequency.
    pub omega_r: f64,
    /// δ_C = Δ_C − 2u, effective cavity detuning.
    pub delta_c: f64,
    /// u = N·U_0/4, collective light shift.
    pub u: f64,
    /// y = √(2N)·η_t, collective pump coupling.
    pub y: f64,
    /// κ, cavity field decay rate.
    pub kappa: f64,
    pub atom_number: Option<u64>,
}

impl ReducedParams {
    /// Builds and validates a parameter set without an atom number.
    pub fn new(omega_r: f64, delta_c: f64, u: f64, y: f64, kappa: f64) -> Result<Self> {
        let r = Self {
            omega_r,
            delta_c,
            u,
            y,
            kappa,
            atom_number: None,
        };
        r.validate()?;
        Ok(r)
    }

    /// The parameters of both figures in recoil units: δ_C = −100, u = −0.1,
    /// κ = 1.
    pub fn figure_defaults(y: f64) -> Self {
        Self {
            omega_r: 1.0,
            delta_c: -100.0,
            u: -0.1,
            y,
            kappa: 1.0,
            atom_number: None,
        }
    }

    /// Checks the hard invariants: δ_C < 0, |u| < |δ_C|, ω_R > 0, y ≥ 0, κ ≥ 0.
    pub fn validate(&self) -> Result<()> {
        let all = [self.omega_r, self.delta_c, self.u, self.y, self.kappa];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Regime("all frequencies must be finite".into()));
        }
        if !(self.delta_c < 0.0) {
            return Err(Error::Regime(format!(
                "δ_C must be negative, got {}",
                self.delta_c
            )));
        }
        if !(self.u.abs() < self.delta_c.abs()) {
            return Err(Error::Regime(format!(
                "|u| < |δ_C| required, got |u| = {} and |δ_C| = {}",
                self.u.abs(),
                self.delta_c.abs()
            )));
        }
        if !(self.omega_r > 0.0) {
            return Err(Error::Regime(format!(
                "ω_R must be positive, got {}",
                self.omega_r
            )));
        }
        if !(self.y >= 0.0) {
            return Err(Error::Regime(format!("y must be non-negative, got {}", self.y)));
        }
        if !(self.kappa >= 0.0) {
            return Err(Error::Regime(format!(
                "κ must be non-negative, got {}",
                self.kappa
            )));
        }
        if self.atom_number == Some(0) {
            return Err(Error::Regime("atom number must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_y(self, y: f64) -> Self {
        Self { y, ..self }
    }

    pub fn with_kappa(self, kappa: f64) -> Self {
        Self { kappa, ..self }
    }

    pub fn with_atom_number(self, n: u64) -> Self {
        Self {
            atom_number: Some(n),
            ..self
        }
    }

    /// Rescales every frequency so that ω_R = 1.
    pub fn in_recoil_units(self) -> Self {
        let s = 1.0 / self.omega_r;
        Self {
            omega_r: 1.0,
            delta_c: self.delta_c * s,
            u: self.u * s,
            y: self.y * s,
            kappa: self.kappa * s,
            atom_number: self.atom_number,
        }
    }

    /// Multiplies every frequency by `c`.
    pub fn scaled(self, c: f64) -> Self {
        Self {
            omega_r: self.omega_r * c,
            delta_c: self.delta_c * c,
            u: self.u * c,
            y: self.y * c,
            kappa: self.kappa * c,
            atom_number: self.atom_number,
        }
    }
}

/// Maps laboratory inputs onto the reduced spin-boson frequencies.
///
/// U_0 = g_0²/Δ_A, η_t = Ω·g_0/Δ_A, u = N·U_0/4, y = √(2N)·|η_t| and
/// δ_C = Δ_C − 2u. The sign of η_t is dropped because it can be absorbed into
/// the photon operator (a → −a).
pub fn reduce_parameters(p: &PhysicalInputs) -> Result<ReducedParams> {
    p.check()?;
    let omega_r = p.recoil()?;
    let n = p.atom_number as f64;
    let light_shift = p.single_photon_rabi * p.single_photon_rabi / p.atom_pump_detuning;
    let pump = p.pump_rabi * p.single_photon_rabi / p.atom_pump_detuning;
    let u = n * light_shift / 4.0;
    let y = (2.0 * n).sqrt() * pump.abs();
    let r = ReducedParams {
        omega_r,
        delta_c: p.cavity_pump_detuning - 2.0 * u,
        u,
        y,
        kappa: p.photon_loss,
        atom_number: Some(p.atom_number),
    };
    r.validate()?;
    Ok(r)
}

/// Soft validity conditions that do not stop a computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegimeWarning {
    /// |u| ≥ |δ_C|: the next atomic Fourier mode cannot be neglected.
    TwoModeTruncation { u: f64, delta_c: f64 },
    /// |δ_C| is not much larger than ω_R, so the coarse-graining window
    /// |δ_C|⁻¹ ≪ δt ≪ ω_R⁻¹ does not exist.
    DetuningNotLarge { ratio: f64 },
    /// κ ≥ |δ_C|: adiabatic elimination of the photon is questionable.
    LossExceedsDetuning { kappa: f64, delta_c: f64 },
}

impl fmt::Display for RegimeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegimeWarning::TwoModeTruncation { u, delta_c } => write!(
                f,
                "|u| = {} ≥ |δ_C| = {}: two-mode truncation invalid",
                u.abs(),
                delta_c.abs()
            ),
            RegimeWarning::DetuningNotLarge { ratio } => write!(
                f,
                "|δ_C|/ω_R = {ratio}: |δ_C| not ≫ ω_R, coarse-grained diffusion unreliable"
            ),
            RegimeWarning::LossExceedsDetuning { kappa, delta_c } => write!(
                f,
                "κ = {kappa} ≥ |δ_C| = {}: adiabatic elimination questionable",
                delta_c.abs()
            ),
        }
    }
}

/// Lists the soft regime conditions violated by `r`.
pub fn validate_regime(r: &ReducedParams) -> Vec<RegimeWarning> {
    let mut warnings = Vec::new();
    if r.u.abs() >= r.delta_c.abs() {
        warnings.push(RegimeWarning::TwoModeTruncation {
            u: r.u,
            delta_c: r.delta_c,
        });
    }
    let ratio = r.delta_c.abs() / r.omega_r;
    if ratio < LARGE_DETUNING_RATIO {
        warnings.push(RegimeWarning::DetuningNotLarge { ratio });
    }
    if r.kappa >= r.delta_c.abs() {
        warnings.push(RegimeWarning::LossExceedsDetuning {
            kappa: r.kappa,
            delta_c: r.delta_c,
        });
    }
    warnings
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inputs() -> PhysicalInputs {
        PhysicalInputs {
            atom_pump_detuning: -1.0e4,
            cavity_pump_detuning: -100.0,
            single_photon_rabi: 0.0,
            pump_rabi: 0.0,
            atom_number: 1000,
            recoil_frequency: Some(1.0),
            mass: None,
            wavenumber: None,
            photon_loss: 1.0,
        }
    }

    #[test]
    fn uncoupled_limit() {
        let r = reduce_parameters(&inputs()).unwrap();
        assert_eq!(r.u, 0.0);
        assert_eq!(r.y, 0.0);
        assert_eq!(r.delta_c, -100.0);
        assert_eq!(r.atom_number, Some(1000));
    }

    #[test]
    fn figure_couplings_from_lab_inputs() {
        // N·U_0/4 = −0.1 and √(2N)·η_t = 6 with N = 10⁶ and Δ_A = −10⁴:
        // g_0² = 4·(−0.1)/N·Δ_A and Ω = η_t·Δ_A/g_0.
        let n: f64 = 1.0e6;
        let delta_a: f64 = -1.0e4;
        let g0 = (4.0 * -0.1 / n * delta_a).sqrt();
        let eta = 6.0 / (2.0 * n).sqrt();
        let p = PhysicalInputs {
            atom_pump_detuning: delta_a,
            cavity_pump_detuning: -100.0,
            single_photon_rabi: g0,
            pump_rabi: eta * delta_a / g0,
            atom_number: 1_000_000,
            ..inputs()
        };
        let r = reduce_parameters(&p).unwrap();
        assert!((r.u + 0.1).abs() < 1e-12);
        assert!((r.y - 6.0).abs() < 1e-12);
        assert!((r.delta_c - (-100.0 + 0.2)).abs() < 1e-12);
    }

    #[test]
    fn positive_detuning_rejected() {
        let p = PhysicalInputs {
            cavity_pump_detuning: 1.0,
            ..inputs()
        };
        let err = reduce_parameters(&p).unwrap_err();
        assert!(err.to_string().contains("δ_C must be negative"), "{err}");
    }

    #[test]
    fn large_light_shift_rejected() {
        // u = N g0²/(4Δ_A) = −150
        let p = PhysicalInputs {
            single_photon_rabi: (150.0 * 4.0 * 1.0e4 / 1000.0f64).sqrt(),
            cavity_pump_detuning: -400.0,
            ..inputs()
        };
        let err = reduce_parameters(&p).unwrap_err();
        assert!(err.to_string().contains("|u| < |δ_C|"), "{err}");
    }

    #[test]
    fn blue_atom_detuning_rejected() {
        let p = PhysicalInputs {
            atom_pump_detuning: 5.0,
            ..inputs()
        };
        assert!(matches!(reduce_parameters(&p), Err(Error::Regime(_))));
    }

    #[test]
    fn recoil_from_kinematics() {
        let p = PhysicalInputs {
            recoil_frequency: Some(2.0),
            mass: Some(0.25),
            wavenumber: Some(1.0),
            ..inputs()
        };
        assert_eq!(p.recoil().unwrap(), 2.0);
        let bad = PhysicalInputs {
            recoil_frequency: Some(3.0),
            ..p
        };
        assert!(bad.recoil().is_err());
        let half = PhysicalInputs {
            wavenumber: None,
            ..p
        };
        assert!(half.recoil().is_err());
    }

    #[test]
    fn regime_warnings() {
        let ok = ReducedParams::figure_defaults(0.0);
        assert!(validate_regime(&ok).is_empty());

        let near = ReducedParams {
            delta_c: -2.0,
            ..ok
        };
        assert!(matches!(
            validate_regime(&near)[..],
            [RegimeWarning::DetuningNotLarge { .. }]
        ));

        let big_u = ReducedParams { u: -150.0, ..ok };
        let w = validate_regime(&big_u);
        assert!(w
            .iter()
            .any(|w| matches!(w, RegimeWarning::TwoModeTruncation { .. })));
        assert!(big_u.validate().is_err());

        let lossy = ReducedParams { kappa: 200.0, ..ok };
        assert!(validate_regime(&lossy)
            .iter()
            .any(|w| matches!(w, RegimeWarning::LossExceedsDetuning { .. })));
    }

    #[test]
    fn recoil_units() {
        let r = ReducedParams::new(2.0, -50.0, -0.2, 10.0, 1.0).unwrap();
        let s = r.in_recoil_units();
        assert_eq!(s.omega_r, 1.0);
        assert_eq!(s.delta_c, -25.0);
        assert_eq!(s.y, 5.0);
        assert_eq!(s.kappa, 0.5);
    }

    proptest! {
        #[test]
        fn reduction_is_scale_covariant(
            c in 0.01f64..100.0,
            g0 in 0.0f64..5.0,
            omega in 0.0f64..50.0,
            n in 1u64..100_000,
        ) {
            let base = PhysicalInputs {
                atom_pump_detuning: -1.0e5,
                cavity_pump_detuning: -100.0,
                single_photon_rabi: g0,
                pump_rabi: omega,
                atom_number: n,
                recoil_frequency: Some(1.0),
                mass: None,
                wavenumber: None,
                photon_loss: 0.5,
            };
            let scaled = PhysicalInputs {
                atom_pump_detuning: base.atom_pump_detuning * c,
                cavity_pump_detuning: base.cavity_pump_detuning * c,
                single_photon_rabi: g0 * c,
                pump_rabi: omega * c,
                recoil_frequency: Some(c),
                photon_loss: 0.5 * c,
                ..base
            };
            let (Ok(a), Ok(b)) = (reduce_parameters(&base), reduce_parameters(&scaled)) else {
                return Ok(());
            };
            let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * (1.0 + x.abs().max(y.abs()));
            prop_assert!(close(a.omega_r * c, b.omega_r));
            prop_assert!(close(a.delta_c * c, b.delta_c));
            prop_assert!(close(a.u * c, b.u));
            prop_assert!(close(a.y * c, b.y));
            prop_assert!(close(a.kappa * c, b.kappa));
        }

        #[test]
        fn pump_coupling_round_trip(
            g0 in 0.0f64..5.0,
            omega in 0.0f64..50.0,
            n in 1u64..1_000_000,
            delta_a in -1.0e6f64..-1.0,
        ) {
            let p = PhysicalInputs {
                atom_pump_detuning: delta_a,
                cavity_pump_detuning: -1.0e9,
                single_photon_rabi: g0,
                pump_rabi: omega,
                atom_number: n,
                recoil_frequency: Some(1.0),
                mass: None,
                wavenumber: None,
                photon_loss: 0.0,
            };
            let Ok(r) = reduce_parameters(&p) else { return Ok(()); };
            let expected = 2.0 * n as f64 * omega * omega * g0 * g0 / (delta_a * delta_a);
            prop_assert!((r.y * r.y - expected).abs() <= 1e-13 * expected.max(f64::MIN_POSITIVE));
        }
    }
}

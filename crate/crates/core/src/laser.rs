//! Steady state of the nondegenerate three-level cascade laser.
//!
//! All rates are in kHz. The atoms enter the cavity with population
//! inversion `η`: `ρ_uu = (1 − η)/2`, `ρ_ll = (1 + η)/2`,
//! `ρ_ul = √(1 − η²)/2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::TwoModeCovariance;

/// Linear gain `A`, common cavity decay `κ` and population inversion `η`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaserParams {
    gain: f64,
    kappa: f64,
    eta: f64,
}

impl LaserParams {
    /// Validates `A ≥ 0`, `κ ≥ 0` and `0 ≤ η ≤ 1`.
    ///
    /// Parameters with `κ + Aη = 0` are accepted here; operations that need a
    /// stationary state reject them with [`Error::NoStationaryState`].
    pub fn new(gain: f64, kappa: f64, eta: f64) -> Result<Self> {
        check_rates(gain, kappa)?;
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidParameter(format!(
                "population inversion eta = {eta} outside [0, 1]"
            )));
        }
        Ok(LaserParams { gain, kappa, eta })
    }

    /// Like [`LaserParams::new`] but admits the full definitional range
    /// `−1 ≤ η ≤ 1`. Only the moment dynamics accept such parameters.
    pub fn with_any_inversion(gain: f64, kappa: f64, eta: f64) -> Result<Self> {
        check_rates(gain, kappa)?;
        if !(-1.0..=1.0).contains(&eta) {
            return Err(Error::InvalidParameter(format!(
                "population inversion eta = {eta} outside [-1, 1]"
            )));
        }
        Ok(LaserParams { gain, kappa, eta })
    }

    pub fn from_atoms(atoms: &AtomCavityParams, kappa: f64, eta: f64) -> Result<Self> {
        Self::new(derive_gain(atoms)?, kappa, eta)
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `κ + Aη`, the rate that must be positive for a stationary state.
    pub fn stationarity_margin(&self) -> f64 {
        self.kappa + self.gain * self.eta
    }

    pub fn has_stationary_state(&self) -> bool {
        self.stationarity_margin() > 0.0
    }

    fn require_stationary(&self) -> Result<()> {
        if self.has_stationary_state() && self.eta >= 0.0 {
            Ok(())
        } else if self.eta < 0.0 {
            Err(Error::InvalidParameter(format!(
                "steady state requires eta >= 0, got {}",
                self.eta
            )))
        } else {
            Err(Error::NoStationaryState {
                gain: self.gain,
                kappa: self.kappa,
                eta: self.eta,
            })
        }
    }
}

fn check_rates(gain: f64, kappa: f64) -> Result<()> {
    if !(gain.is_finite() && gain >= 0.0) {
        return Err(Error::InvalidParameter(format!("gain A = {gain} must be finite and >= 0")));
    }
    if !(kappa.is_finite() && kappa >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "cavity decay kappa = {kappa} must be finite and >= 0"
        )));
    }
    Ok(())
}

/// Raw atomic parameters from which the linear gain is derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomCavityParams {
    /// Atom injection rate ρ.
    pub injection_rate: f64,
    /// Atom-field coupling ε.
    pub coupling: f64,
    /// Atomic decay γ.
    pub atomic_decay: f64,
}

impl AtomCavityParams {
    pub fn new(injection_rate: f64, coupling: f64, atomic_decay: f64) -> Result<Self> {
        for (name, v) in [
            ("injection rate rho", injection_rate),
            ("coupling epsilon", coupling),
            ("atomic decay gamma", atomic_decay),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be > 0")));
            }
        }
        Ok(AtomCavityParams {
            injection_rate,
            coupling,
            atomic_decay,
        })
    }

    /// Warning text when the good-cavity assumption `γ ≫ κ` looks doubtful
    /// (`γ < 10κ`).
    pub fn good_cavity_warning(&self, kappa: f64) -> Option<String> {
        if self.atomic_decay < 10.0 * kappa {
            Some(format!(
                "good-cavity limit questionable: gamma = {} kHz is not >> kappa = {} kHz",
                self.atomic_decay, kappa
            ))
        } else {
            None
        }
    }
}

/// Linear gain coefficient `A = 2ρε²/γ²`.
pub fn derive_gain(atoms: &AtomCavityParams) -> Result<f64> {
    let AtomCavityParams {
        injection_rate: rho,
        coupling: eps,
        atomic_decay: gamma,
    } = *atoms;
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("atomic decay gamma = {gamma} must be > 0")));
    }
    if !(rho.is_finite() && rho >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "injection rate rho = {rho} and coupling epsilon = {eps} must be finite, rho >= 0"
        )));
    }
    Ok(2.0 * rho * eps * eps / (gamma * gamma))
}

/// Initial single-atom density matrix elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Populations {
    pub upper: f64,
    pub lower: f64,
    pub coherence: f64,
}

pub fn populations(eta: f64) -> Result<Populations> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!(
            "population inversion eta = {eta} outside [0, 1]"
        )));
    }
    Ok(populations_unchecked(eta))
}

pub(crate) fn populations_unchecked(eta: f64) -> Populations {
    Populations {
        upper: 0.5 * (1.0 - eta),
        lower: 0.5 * (1.0 + eta),
        coherence: 0.5 * ((1.0 - eta) * (1.0 + eta)).max(0.0).sqrt(),
    }
}

/// `(Γ₁, Γ₂) = (κ − Aρ_uu, κ + Aρ_ll)`. `Γ₁` is negative above threshold.
pub fn decay_rates(params: &LaserParams) -> (f64, f64) {
    let p = populations_unchecked(params.eta);
    (
        params.kappa - params.gain * p.upper,
        params.kappa + params.gain * p.lower,
    )
}

/// Nonvanishing stationary second moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateMoments {
    /// ⟨c₁†c₁⟩
    pub n1: f64,
    /// ⟨c₂†c₂⟩
    pub n2: f64,
    /// ⟨c₁c₂⟩ (real)
    pub m: f64,
}

impl SteadyStateMoments {
    pub fn covariance(&self) -> TwoModeCovariance {
        TwoModeCovariance::new(2.0 * self.n1 + 1.0, 2.0 * self.n2 + 1.0, 2.0 * self.m)
    }
}

/// Closed-form stationary moments.
///
/// The textbook expressions carry `1/η` poles that cancel; these are the
/// cancelled rational forms, finite down to `η = 0`.
pub fn steady_moments(params: &LaserParams) -> Result<SteadyStateMoments> {
    params.require_stationary()?;
    let LaserParams { gain: a, kappa: k, eta } = *params;
    let denom = 4.0 * (k + a * eta) * (2.0 * k + a * eta);
    let one_minus = 1.0 - eta;
    let one_plus = 1.0 + eta;
    Ok(SteadyStateMoments {
        n1: a * one_minus * (a + 4.0 * k + 3.0 * a * eta) / denom,
        n2: a * a * one_minus * one_plus / denom,
        m: a * (one_minus * one_plus).sqrt() * (a + 2.0 * k + a * eta) / denom,
    })
}

pub fn covariance(params: &LaserParams) -> Result<TwoModeCovariance> {
    Ok(steady_moments(params)?.covariance())
}

/// `⟨c₁†c₁⟩ − ⟨c₂†c₂⟩ = A(1 − η) / (2(κ + Aη))`.
pub fn photon_difference(params: &LaserParams) -> Result<f64> {
    params.require_stationary()?;
    let LaserParams { gain: a, kappa: k, eta } = *params;
    Ok(a * (1.0 - eta) / (2.0 * (k + a * eta)))
}

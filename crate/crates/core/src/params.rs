use serde::{Deserialize, Serialize};

use crate::error::{KhoError, Result};

/// Sign of the kick exponent.
///
/// `Negative` applies `exp(-i K cos(Q + φ) / ħ)`, `Positive` its conjugate.
/// Magnitude-level quantities (fidelities, purities, Wigner shapes up to
/// reflection) are insensitive to the choice.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KickSign {
    #[default]
    Negative,
    Positive,
}

impl KickSign {
    pub fn factor(self) -> f64 {
        match self {
            KickSign::Negative => -1.0,
            KickSign::Positive => 1.0,
        }
    }
}

/// The numbers that define one Floquet step `R_α V_K`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KhoParams {
    pub kick_strength: f64,
    pub rotation_angle: f64,
    pub kick_phase: f64,
    pub hbar_eff: f64,
    #[serde(default)]
    pub kick_sign: KickSign,
}

impl KhoParams {
    pub fn new(kick_strength: f64, rotation_angle: f64, kick_phase: f64, hbar_eff: f64) -> Result<Self> {
        let p = KhoParams {
            kick_strength,
            rotation_angle,
            kick_phase,
            hbar_eff,
            kick_sign: KickSign::Negative,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_kick_sign(mut self, sign: KickSign) -> Self {
        self.kick_sign = sign;
        self
    }

    pub fn with_kick_strength(mut self, k: f64) -> Self {
        self.kick_strength = k;
        self
    }

    pub fn with_hbar(mut self, hbar: f64) -> Self {
        self.hbar_eff = hbar;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kick_strength.is_finite() && self.kick_strength >= 0.0) {
            return Err(KhoError::invalid(
                "kick_strength",
                format!("{} must be finite and >= 0", self.kick_strength),
            ));
        }
        if !(self.hbar_eff.is_finite() && self.hbar_eff > 0.0) {
            return Err(KhoError::invalid(
                "hbar_eff",
                format!("{} must be finite and > 0", self.hbar_eff),
            ));
        }
        if !self.rotation_angle.is_finite() {
            return Err(KhoError::invalid("rotation_angle", "not finite"));
        }
        if !self.kick_phase.is_finite() {
            return Err(KhoError::invalid("kick_phase", "not finite"));
        }
        Ok(())
    }
}

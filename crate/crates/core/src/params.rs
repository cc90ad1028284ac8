//! Model parameters. All rates are in units of the single-atom decay rate Γ
//! and all times in units of 1/Γ.

use crate::error::{Error, Result};

/// Parameters of the driven collective spin.
///
/// `n_atoms` is the number of atoms coupled to the collective mode. When
/// modelling an extended cloud it is the effective number Ñ = Nμ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub n_atoms: usize,
    /// Rabi frequency Ω.
    pub rabi: f64,
    /// Laser detuning Δ. Resonant (0) by default.
    pub detuning: f64,
    /// Single-atom decay rate; fixed to 1 (the unit of frequency).
    pub gamma: f64,
}

impl ModelParams {
    pub fn new(n_atoms: usize, rabi: f64) -> Result<Self> {
        let params = Self { n_atoms, rabi, detuning: 0.0, gamma: 1.0 };
        params.validate()?;
        Ok(params)
    }

    /// Parameters at fixed drive-to-dissipation ratio β = 2Ω/(NΓ).
    pub fn from_beta(n_atoms: usize, beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::InvalidParams(format!("beta must be finite and >= 0, got {beta}")));
        }
        Self::new(n_atoms, beta * n_atoms as f64 / 2.0)
    }

    /// Adds a rotating-frame detuning. This goes beyond the resonant model and
    /// is meant for sanity checks.
    pub fn with_detuning(mut self, detuning: f64) -> Result<Self> {
        self.detuning = detuning;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_atoms == 0 {
            return Err(Error::InvalidParams("n_atoms must be >= 1".into()));
        }
        if !self.rabi.is_finite() || self.rabi < 0.0 {
            return Err(Error::InvalidParams(format!("rabi must be finite and >= 0, got {}", self.rabi)));
        }
        if !self.detuning.is_finite() {
            return Err(Error::InvalidParams("detuning must be finite".into()));
        }
        if self.gamma != 1.0 {
            return Err(Error::InvalidParams("gamma is the unit of frequency and must equal 1".into()));
        }
        Ok(())
    }

    /// β = 2Ω/(NΓ).
    pub fn beta(&self) -> f64 {
        2.0 * self.rabi / (self.n_atoms as f64 * self.gamma)
    }

    /// Number of Dicke states N + 1.
    pub fn n_levels(&self) -> usize {
        self.n_atoms + 1
    }
}

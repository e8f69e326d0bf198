//! Transmission and flight energy, residual-energy bookkeeping and charging.

use crate::config::SimConfig;
use crate::error::{Error, Result};

/// Radio and airframe constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParams {
    pub eps_elec: f64,
    pub eps_fs: f64,
    pub eps_mp: f64,
    pub r0: f64,
    pub eps_payload: f64,
    pub payload_kg: f64,
    pub eps_hover: f64,
    pub eps_density: f64,
    pub fly_scale: f64,
}

impl EnergyParams {
    pub fn from_config(cfg: &SimConfig) -> Self {
        Self {
            eps_elec: cfg.eps_elec_j_per_bit,
            eps_fs: cfg.eps_amp_fs_j_per_bit_m2,
            eps_mp: cfg.eps_amp_mp_j_per_bit_m4,
            r0: cfg.crossover_distance_m,
            eps_payload: cfg.eps_payload,
            payload_kg: cfg.payload_kg,
            eps_hover: cfg.eps_hover,
            eps_density: cfg.eps_density,
            fly_scale: cfg.fly_energy_scale,
        }
    }

    /// Energy to send `bits` over `r` meters.
    pub fn tx(&self, bits: f64, r: f64) -> f64 {
        tx_energy(bits, r, self)
    }

    /// Flight energy in joules for `tau` seconds aloft.
    pub fn flight(&self, tau: f64) -> Result<f64> {
        Ok(self.fly_scale * fly_energy(self.payload_kg, tau, self)?)
    }
}

/// First-order radio model with free-space and multi-path branches.
pub fn tx_energy(bits: f64, r: f64, p: &EnergyParams) -> f64 {
    if r <= p.r0 {
        p.eps_elec * bits + p.eps_fs * bits * r * r
    } else {
        p.eps_elec * bits + p.eps_mp * bits * r.powi(4)
    }
}

/// Flight expression `(eps_payload w + eps_hover tau) / (1 - (eps_payload/eps_density) tau)`,
/// unscaled.
pub fn fly_energy(w: f64, tau: f64, p: &EnergyParams) -> Result<f64> {
    let denom = 1.0 - (p.eps_payload / p.eps_density) * tau;
    if denom <= 0.0 {
        return Err(Error::domain(
            "fly_energy",
            format!("flight of {tau} s exceeds what the energy density supports"),
        ));
    }
    Ok((p.eps_payload * w + p.eps_hover * tau) / denom)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyState {
    pub full: f64,
    pub residual: f64,
    /// Charge-needed threshold.
    pub threshold: f64,
    pub charging: bool,
    pub charge_remaining: f64,
}

impl EnergyState {
    pub fn fresh(full: f64, threshold: f64) -> Self {
        Self { full, residual: full, threshold, charging: false, charge_remaining: 0.0 }
    }

    pub fn from_config(cfg: &SimConfig) -> Self {
        Self::fresh(cfg.energy_full_j, cfg.energy_threshold_j)
    }

    pub fn needs_charge(&self) -> bool {
        self.residual < self.threshold
    }

    pub fn start_charge(&mut self, duration: f64) {
        self.charging = true;
        self.charge_remaining = duration;
    }
}

/// Subtracts the spend, flooring at zero. Returns the joules actually removed.
pub fn update_residual(state: &mut EnergyState, e_tx: f64, e_fly: f64) -> f64 {
    debug_assert!(e_tx >= 0.0 && e_fly >= 0.0);
    let before = state.residual;
    state.residual = (state.residual - (e_tx + e_fly)).max(0.0);
    before - state.residual
}

/// Advances charging by `dt` seconds; returns true when charging completed in this call.
pub fn tick_charge(state: &mut EnergyState, dt: f64) -> bool {
    if !state.charging {
        return false;
    }
    state.charge_remaining -= dt;
    if state.charge_remaining <= 1e-9 {
        state.charge_remaining = 0.0;
        state.charging = false;
        state.residual = state.full;
        return true;
    }
    false
}

//! Experiment configuration.
//!
//! A configuration file is a flat TOML document: one `key = value` per line,
//! scalar values only. Unknown keys are rejected. Only `uav_count` and
//! `episodes` are required; every other key defaults to the reference
//! parameter set (see `docs/config.md`).

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{NormalizationBounds, Position};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Iqmr,
    Greedy,
    VanillaQ,
}

impl Policy {
    pub fn name(&self) -> &'static str {
        match self {
            Policy::Iqmr => "iqmr",
            Policy::Greedy => "greedy",
            Policy::VanillaQ => "vanilla_q",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "iqmr" => Ok(Policy::Iqmr),
            "greedy" => Ok(Policy::Greedy),
            "vanilla_q" | "vanilla-q" => Ok(Policy::VanillaQ),
            other => Err(Error::config(
                "policy",
                format!("unknown policy `{other}` (expected iqmr | greedy | vanilla_q)"),
            )),
        }
    }
}

/// Which form of the collision-probability expression to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollisionVariant {
    /// `1 - exp(-r^2 / (2 xi_x xi_y))`, increasing with separation.
    Literal,
    /// `exp(-r^2 / (2 xi_x xi_y))`, decreasing with separation.
    Complement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearningRateVariant {
    /// `beta' = 1 / (1 + exp(-p_cov))`
    Literal,
    /// `beta' = 1 / (1 + exp(p_cov))`
    Inverted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NakagamiMapping {
    /// `m = 2(K+1)/(2K+1)`
    Printed,
    /// `m = (K+1)^2/(2K+1)`
    Standard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterferenceModel {
    /// Only nodes transmitting in the same slot interfere.
    Active,
    /// Every other node in the network interferes.
    All,
}

/// Which acknowledgements feed the packet-reception counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AckFeedback {
    Both,
    /// Hop ACKs only; end-to-end ACKs are never sent.
    L2Only,
    /// End-to-end ACKs only; hop ACKs still move the packet but are not counted.
    L3Only,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    None,
    EnergyDepletion,
    Fragmentation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Uniformly random subset.
    Random,
    /// Nodes with the highest max outgoing Q-value.
    TopQ,
    /// Nodes with the lowest max outgoing Q-value.
    BottomQ,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rejoin {
    AllAtOnce,
    Staggered,
}

macro_rules! defaults {
    ($($name:ident: $ty:ty = $val:expr;)*) => {
        mod default {
            #[allow(unused_imports)]
            use super::*;
            $(pub fn $name() -> $ty { $val })*
        }
    };
}

defaults! {
    network_radius_m: f64 = 1000.0;
    network_height_m: f64 = 300.0;
    altitude_min_m: f64 = 100.0;
    altitude_max_m: f64 = 300.0;
    tx_radius_m: f64 = 250.0;
    zero: f64 = 0.0;
    speed_min_mps: f64 = 10.0;
    speed_max_mps: f64 = 20.0;
    direction_min_rad: f64 = -FRAC_PI_2;
    direction_max_rad: f64 = FRAC_PI_2;
    pitch_min_rad: f64 = -0.1;
    pitch_max_rad: f64 = 0.1;
    pause_min_s: f64 = 1.0;
    pause_max_s: f64 = 20.0;
    gmm_alpha: f64 = 0.75;
    move_leg_s: f64 = 30.0;
    path_loss_exponent: f64 = 3.0;
    rician_k: f64 = 1.0;
    nakagami_mapping: NakagamiMapping = NakagamiMapping::Printed;
    sir_threshold: f64 = 1.0;
    mc_samples: u32 = 2000;
    interference: InterferenceModel = InterferenceModel::Active;
    coverage_min: f64 = 0.5;
    ideal_hellos: bool = false;
    energy_full_j: f64 = 207_792.0;
    energy_threshold_j: f64 = 1000.0;
    eps_elec: f64 = 50e-9;
    eps_amp_fs: f64 = 41e-6;
    eps_amp_mp: f64 = 100e-12;
    crossover_distance_m: f64 = 100.0;
    eps_payload: f64 = 0.217;
    payload_kg: f64 = 5.0;
    eps_hover: f64 = 0.185;
    eps_density: f64 = 650.0;
    one: f64 = 1.0;
    charge_time_s: f64 = 60.0;
    charge_points: String = "0,0".to_string();
    collision_variant: CollisionVariant = CollisionVariant::Complement;
    xi_m: f64 = 3.0;
    collision_threshold: f64 = 0.3;
    r_min_m: f64 = 10.0;
    hello_expiry_ms: f64 = 300.0;
    hello_payload_bytes: u32 = 64;
    policy: Policy = Policy::Iqmr;
    w1: f64 = 0.40;
    w2: f64 = 0.25;
    w3: f64 = 0.15;
    w4: f64 = 0.12;
    w5: f64 = 0.08;
    beta_min: f64 = 0.01;
    beta_max: f64 = 1.0;
    gamma_min: f64 = 0.1;
    gamma_max: f64 = 0.9;
    lambda: f64 = 0.8;
    learning_rate_variant: LearningRateVariant = LearningRateVariant::Inverted;
    vanilla_beta: f64 = 0.5;
    vanilla_gamma: f64 = 0.9;
    gcs_q_value: f64 = 1.0;
    ack_feedback: AckFeedback = AckFeedback::Both;
    cbr_rate_bps: f64 = 2.0e6;
    packet_size_bytes: u32 = 150;
    slot_ms: f64 = 10.0;
    max_tx_per_slot: u32 = 16;
    scenario: ScenarioKind = ScenarioKind::None;
    selection: Selection = Selection::Random;
    scenario_fraction: f64 = 0.2;
    scenario_duration_ms: f64 = 400.0;
    rejoin: Rejoin = Rejoin::AllAtOnce;
    rejoin_window_ms: f64 = 10.0;
    rejoin_batches: u32 = 4;
    depletion_level_j: f64 = 99.0;
}

/// Full parameterization of one simulation run.
///
/// Field names are the configuration keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    // -- network --
    /// Number of UAVs (M).
    pub uav_count: u32,
    #[serde(default = "default::network_radius_m")]
    pub network_radius_m: f64,
    #[serde(default = "default::network_height_m")]
    pub network_height_m: f64,
    #[serde(default = "default::altitude_min_m")]
    pub altitude_min_m: f64,
    #[serde(default = "default::altitude_max_m")]
    pub altitude_max_m: f64,
    #[serde(default = "default::tx_radius_m")]
    pub tx_radius_m: f64,
    #[serde(default = "default::zero")]
    pub gcs_x_m: f64,
    #[serde(default = "default::zero")]
    pub gcs_y_m: f64,
    #[serde(default = "default::zero")]
    pub gcs_h_m: f64,

    // -- mobility --
    #[serde(default = "default::speed_min_mps")]
    pub speed_min_mps: f64,
    #[serde(default = "default::speed_max_mps")]
    pub speed_max_mps: f64,
    #[serde(default = "default::direction_min_rad")]
    pub direction_min_rad: f64,
    #[serde(default = "default::direction_max_rad")]
    pub direction_max_rad: f64,
    #[serde(default = "default::pitch_min_rad")]
    pub pitch_min_rad: f64,
    #[serde(default = "default::pitch_max_rad")]
    pub pitch_max_rad: f64,
    #[serde(default = "default::pause_min_s")]
    pub pause_min_s: f64,
    #[serde(default = "default::pause_max_s")]
    pub pause_max_s: f64,
    #[serde(default = "default::gmm_alpha")]
    pub gmm_alpha: f64,
    /// Flight time between two pauses.
    #[serde(default = "default::move_leg_s")]
    pub move_leg_s: f64,

    // -- channel --
    #[serde(default = "default::path_loss_exponent")]
    pub path_loss_exponent: f64,
    #[serde(default = "default::rician_k")]
    pub rician_k: f64,
    #[serde(default = "default::nakagami_mapping")]
    pub nakagami_mapping: NakagamiMapping,
    /// Linear SIR threshold (1.0 = 0 dB).
    #[serde(default = "default::sir_threshold")]
    pub sir_threshold: f64,
    #[serde(default = "default::mc_samples")]
    pub mc_samples: u32,
    #[serde(default = "default::interference")]
    pub interference: InterferenceModel,
    /// Minimum coverage probability for a link to be a feasible next hop.
    #[serde(default = "default::coverage_min")]
    pub coverage_min: f64,
    #[serde(default = "default::ideal_hellos")]
    pub ideal_hellos: bool,

    // -- energy --
    #[serde(default = "default::energy_full_j")]
    pub energy_full_j: f64,
    /// Charge threshold (delta_th).
    #[serde(default = "default::energy_threshold_j")]
    pub energy_threshold_j: f64,
    #[serde(default = "default::eps_elec")]
    pub eps_elec_j_per_bit: f64,
    #[serde(default = "default::eps_amp_fs")]
    pub eps_amp_fs_j_per_bit_m2: f64,
    #[serde(default = "default::eps_amp_mp")]
    pub eps_amp_mp_j_per_bit_m4: f64,
    #[serde(default = "default::crossover_distance_m")]
    pub crossover_distance_m: f64,
    #[serde(default = "default::eps_payload")]
    pub eps_payload: f64,
    #[serde(default = "default::payload_kg")]
    pub payload_kg: f64,
    #[serde(default = "default::eps_hover")]
    pub eps_hover: f64,
    #[serde(default = "default::eps_density")]
    pub eps_density: f64,
    /// Joules per unit of the raw flight-energy expression.
    #[serde(default = "default::one")]
    pub fly_energy_scale: f64,
    #[serde(default = "default::charge_time_s")]
    pub charge_time_s: f64,
    /// Ground charge points as `x,y;x,y;...` in meters.
    #[serde(default = "default::charge_points")]
    pub charge_points: String,

    // -- link metrics --
    #[serde(default = "default::collision_variant")]
    pub collision_variant: CollisionVariant,
    #[serde(default = "default::xi_m")]
    pub xi_x_m: f64,
    #[serde(default = "default::xi_m")]
    pub xi_y_m: f64,
    /// phi_th
    #[serde(default = "default::collision_threshold")]
    pub collision_threshold: f64,
    /// Recorded for completeness; not used by any formula.
    #[serde(default = "default::r_min_m")]
    pub r_min_m: f64,

    // -- neighbor discovery --
    #[serde(default = "default::hello_expiry_ms")]
    pub hello_expiry_ms: f64,
    #[serde(default = "default::hello_payload_bytes")]
    pub hello_payload_bytes: u32,

    // -- routing --
    #[serde(default = "default::policy")]
    pub policy: Policy,
    #[serde(default = "default::w1")]
    pub w1: f64,
    #[serde(default = "default::w2")]
    pub w2: f64,
    #[serde(default = "default::w3")]
    pub w3: f64,
    #[serde(default = "default::w4")]
    pub w4: f64,
    #[serde(default = "default::w5")]
    pub w5: f64,
    #[serde(default = "default::beta_min")]
    pub beta_min: f64,
    #[serde(default = "default::beta_max")]
    pub beta_max: f64,
    #[serde(default = "default::gamma_min")]
    pub gamma_min: f64,
    #[serde(default = "default::gamma_max")]
    pub gamma_max: f64,
    /// Trace decay.
    #[serde(default = "default::lambda")]
    pub lambda: f64,
    #[serde(default = "default::learning_rate_variant")]
    pub learning_rate_variant: LearningRateVariant,
    /// When set, replaces the coverage-driven learning rate.
    #[serde(default)]
    pub fixed_beta: Option<f64>,
    /// When set, replaces the neighbor-count-driven discount.
    #[serde(default)]
    pub fixed_gamma: Option<f64>,
    /// Exploration probability; 0 keeps selection purely greedy.
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default = "default::vanilla_beta")]
    pub vanilla_beta: f64,
    #[serde(default = "default::vanilla_gamma")]
    pub vanilla_gamma: f64,
    /// Value of the ground station as a next-state estimate.
    #[serde(default = "default::gcs_q_value")]
    pub gcs_q_value: f64,
    #[serde(default = "default::ack_feedback")]
    pub ack_feedback: AckFeedback,

    // -- traffic --
    #[serde(default = "default::cbr_rate_bps")]
    pub cbr_rate_bps: f64,
    #[serde(default = "default::packet_size_bytes")]
    pub packet_size_bytes: u32,
    #[serde(default = "default::slot_ms")]
    pub slot_ms: f64,
    #[serde(default = "default::max_tx_per_slot")]
    pub max_tx_per_slot: u32,
    /// Transmission attempts before a packet is dropped; defaults to `2 * uav_count`.
    #[serde(default)]
    pub hop_cap: Option<u32>,

    // -- run --
    /// Number of episodes (N).
    pub episodes: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub trace: bool,

    // -- scenario --
    #[serde(default = "default::scenario")]
    pub scenario: ScenarioKind,
    #[serde(default = "default::selection")]
    pub selection: Selection,
    #[serde(default = "default::scenario_fraction")]
    pub scenario_fraction: f64,
    #[serde(default)]
    pub scenario_start_ms: f64,
    #[serde(default = "default::scenario_duration_ms")]
    pub scenario_duration_ms: f64,
    #[serde(default = "default::rejoin")]
    pub rejoin: Rejoin,
    #[serde(default = "default::rejoin_window_ms")]
    pub rejoin_window_ms: f64,
    #[serde(default = "default::rejoin_batches")]
    pub rejoin_batches: u32,
    /// Residual energy forced onto nodes hit by an energy-depletion event.
    #[serde(default = "default::depletion_level_j")]
    pub depletion_level_j: f64,
    /// Key swept by `run`; empty for a single run.
    #[serde(default)]
    pub sweep_param: String,
    /// Comma-separated values for `sweep_param`.
    #[serde(default)]
    pub sweep_values: String,
}

impl SimConfig {
    /// Reference parameter set with the given network size and run length.
    pub fn reference(uav_count: u32, episodes: u32) -> Self {
        let mut table = toml::Table::new();
        table.insert("uav_count".into(), toml::Value::Integer(uav_count as i64));
        table.insert("episodes".into(), toml::Value::Integer(episodes as i64));
        Self::from_table(table).expect("reference configuration is valid")
    }

    /// Parses a configuration document, applies `key=value` overrides and validates.
    pub fn parse_with_overrides(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        for (k, v) in overrides {
            table.insert(k.clone(), parse_override_value(v));
        }
        Self::from_table(table)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_overrides(text, &[])
    }

    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_with_overrides(&text, overrides)
    }

    pub fn from_table(table: toml::Table) -> Result<Self> {
        for (key, value) in &table {
            if matches!(value, toml::Value::Table(_) | toml::Value::Array(_)) {
                return Err(Error::config(key, "only scalar values are allowed"));
            }
        }
        let cfg: SimConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::ConfigParse(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Returns a copy with one key replaced, re-validated.
    pub fn with_override(&self, key: &str, value: &str) -> Result<Self> {
        let mut table = self.to_table();
        table.insert(key.to_string(), parse_override_value(value));
        Self::from_table(table)
    }

    pub fn to_table(&self) -> toml::Table {
        match toml::Value::try_from(self).expect("config serializes") {
            toml::Value::Table(t) => t,
            _ => unreachable!(),
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks every cross-field rule. Errors name the offending key.
    pub fn validate(&self) -> Result<()> {
        fn band(lo_key: &str, lo: f64, hi: f64) -> Result<()> {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(Error::config(lo_key, format!("empty band [{lo}, {hi}]")));
            }
            Ok(())
        }
        fn positive(key: &str, v: f64) -> Result<()> {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(key, format!("must be > 0, got {v}")));
            }
            Ok(())
        }
        fn nonneg(key: &str, v: f64) -> Result<()> {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(key, format!("must be >= 0, got {v}")));
            }
            Ok(())
        }

        if self.uav_count == 0 {
            return Err(Error::config("uav_count", "need at least one UAV"));
        }
        positive("network_radius_m", self.network_radius_m)?;
        positive("network_height_m", self.network_height_m)?;
        band("altitude_min_m", self.altitude_min_m, self.altitude_max_m)?;
        nonneg("altitude_min_m", self.altitude_min_m)?;
        if self.altitude_max_m > self.network_height_m {
            return Err(Error::config("altitude_max_m", "exceeds network_height_m"));
        }
        positive("tx_radius_m", self.tx_radius_m)?;
        nonneg("gcs_h_m", self.gcs_h_m)?;

        band("speed_min_mps", self.speed_min_mps, self.speed_max_mps)?;
        nonneg("speed_min_mps", self.speed_min_mps)?;
        band("direction_min_rad", self.direction_min_rad, self.direction_max_rad)?;
        band("pitch_min_rad", self.pitch_min_rad, self.pitch_max_rad)?;
        band("pause_min_s", self.pause_min_s, self.pause_max_s)?;
        nonneg("pause_min_s", self.pause_min_s)?;
        if !(self.gmm_alpha > 0.0 && self.gmm_alpha < 1.0) {
            return Err(Error::config("gmm_alpha", "must lie in (0, 1)"));
        }
        positive("move_leg_s", self.move_leg_s)?;

        positive("path_loss_exponent", self.path_loss_exponent)?;
        nonneg("rician_k", self.rician_k)?;
        positive("sir_threshold", self.sir_threshold)?;
        if self.mc_samples == 0 {
            return Err(Error::config("mc_samples", "need at least one sample"));
        }
        if !(0.0..=1.0).contains(&self.coverage_min) {
            return Err(Error::config("coverage_min", "must lie in [0, 1]"));
        }

        positive("energy_full_j", self.energy_full_j)?;
        nonneg("energy_threshold_j", self.energy_threshold_j)?;
        if self.energy_threshold_j >= self.energy_full_j {
            return Err(Error::config("energy_threshold_j", "must be below energy_full_j"));
        }
        nonneg("eps_elec_j_per_bit", self.eps_elec_j_per_bit)?;
        nonneg("eps_amp_fs_j_per_bit_m2", self.eps_amp_fs_j_per_bit_m2)?;
        nonneg("eps_amp_mp_j_per_bit_m4", self.eps_amp_mp_j_per_bit_m4)?;
        nonneg("crossover_distance_m", self.crossover_distance_m)?;
        nonneg("eps_payload", self.eps_payload)?;
        nonneg("payload_kg", self.payload_kg)?;
        nonneg("eps_hover", self.eps_hover)?;
        positive("eps_density", self.eps_density)?;
        nonneg("fly_energy_scale", self.fly_energy_scale)?;
        nonneg("charge_time_s", self.charge_time_s)?;
        self.charge_point_list()?;

        positive("xi_x_m", self.xi_x_m)?;
        positive("xi_y_m", self.xi_y_m)?;
        if !(self.collision_threshold > 0.0 && self.collision_threshold <= 1.0) {
            return Err(Error::config("collision_threshold", "must lie in (0, 1]"));
        }

        positive("hello_expiry_ms", self.hello_expiry_ms)?;
        if self.hello_payload_bytes == 0 {
            return Err(Error::config("hello_payload_bytes", "must be > 0"));
        }

        self.validate_weights()?;
        if !(self.beta_min > 0.0 && self.beta_min < self.beta_max && self.beta_max <= 1.0) {
            return Err(Error::config("beta_min", "need 0 < beta_min < beta_max <= 1"));
        }
        if !(self.gamma_min >= 0.0 && self.gamma_min < self.gamma_max && self.gamma_max < 1.0) {
            return Err(Error::config("gamma_min", "need 0 <= gamma_min < gamma_max < 1"));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::config("lambda", "must lie in [0, 1]"));
        }
        if let Some(b) = self.fixed_beta {
            if !(b > 0.0 && b <= 1.0) {
                return Err(Error::config("fixed_beta", "must lie in (0, 1]"));
            }
        }
        if let Some(g) = self.fixed_gamma {
            if !(0.0..1.0).contains(&g) {
                return Err(Error::config("fixed_gamma", "must lie in [0, 1)"));
            }
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::config("epsilon", "must lie in [0, 1]"));
        }
        if !(self.vanilla_beta > 0.0 && self.vanilla_beta <= 1.0) {
            return Err(Error::config("vanilla_beta", "must lie in (0, 1]"));
        }
        if !(0.0..1.0).contains(&self.vanilla_gamma) {
            return Err(Error::config("vanilla_gamma", "must lie in [0, 1)"));
        }
        nonneg("gcs_q_value", self.gcs_q_value)?;

        nonneg("cbr_rate_bps", self.cbr_rate_bps)?;
        if self.packet_size_bytes == 0 {
            return Err(Error::config("packet_size_bytes", "must be > 0"));
        }
        positive("slot_ms", self.slot_ms)?;
        if self.max_tx_per_slot == 0 {
            return Err(Error::config("max_tx_per_slot", "must be > 0"));
        }
        if self.hop_cap == Some(0) {
            return Err(Error::config("hop_cap", "must be > 0"));
        }

        if self.scenario != ScenarioKind::None {
            if !(self.scenario_fraction > 0.0 && self.scenario_fraction <= 1.0) {
                return Err(Error::config("scenario_fraction", "must lie in (0, 1]"));
            }
            nonneg("scenario_start_ms", self.scenario_start_ms)?;
            positive("scenario_duration_ms", self.scenario_duration_ms)?;
            nonneg("rejoin_window_ms", self.rejoin_window_ms)?;
            if self.rejoin_batches == 0 {
                return Err(Error::config("rejoin_batches", "must be > 0"));
            }
            nonneg("depletion_level_j", self.depletion_level_j)?;
        }
        if self.sweep_param.is_empty() != self.sweep_values.is_empty() {
            return Err(Error::config(
                "sweep_param",
                "sweep_param and sweep_values must be given together",
            ));
        }
        if !self.sweep_param.is_empty() {
            if self.sweep_param.starts_with("sweep_") {
                return Err(Error::config("sweep_param", "cannot sweep a sweep key"));
            }
            let known = self.to_table();
            if !known.contains_key(&self.sweep_param) && !OPTIONAL_KEYS.contains(&self.sweep_param.as_str()) {
                return Err(Error::config(
                    "sweep_param",
                    format!("unknown key `{}`", self.sweep_param),
                ));
            }
        }
        Ok(())
    }

    fn validate_weights(&self) -> Result<()> {
        let w = self.weights();
        if w.iter().any(|x| !x.is_finite() || *x <= 0.0) {
            return Err(Error::config("w5", "every reward weight must be > 0"));
        }
        for i in 0..4 {
            if w[i] <= w[i + 1] {
                return Err(Error::config(
                    format!("w{}", i + 1),
                    format!("weights must be strictly decreasing, got w{} = {} <= w{} = {}", i + 1, w[i], i + 2, w[i + 1]),
                ));
            }
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::config("w1", format!("weights must sum to 1, got {sum}")));
        }
        Ok(())
    }

    pub fn weights(&self) -> [f64; 5] {
        [self.w1, self.w2, self.w3, self.w4, self.w5]
    }

    pub fn gcs_position(&self) -> Position {
        Position::new(self.gcs_x_m, self.gcs_y_m, self.gcs_h_m)
    }

    pub fn slot_s(&self) -> f64 {
        self.slot_ms / 1000.0
    }

    /// Converts a duration in milliseconds to a whole number of slots (rounded up).
    pub fn ms_to_slots(&self, ms: f64) -> u64 {
        (ms / self.slot_ms - 1e-9).ceil().max(0.0) as u64
    }

    pub fn hop_cap(&self) -> u32 {
        self.hop_cap.unwrap_or(2 * self.uav_count)
    }

    pub fn energy_bounds(&self) -> NormalizationBounds {
        NormalizationBounds::new(0.0, self.energy_full_j).expect("validated")
    }

    pub fn charge_point_list(&self) -> Result<Vec<Position>> {
        let mut out = Vec::new();
        for part in self.charge_points.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let coords: Vec<&str> = part.split(',').map(str::trim).collect();
            let parsed: Option<Vec<f64>> = coords.iter().map(|c| c.parse().ok()).collect();
            match parsed.as_deref() {
                Some([x, y]) => out.push(Position::new(*x, *y, 0.0)),
                _ => {
                    return Err(Error::config(
                        "charge_points",
                        format!("expected `x,y` pairs separated by `;`, got `{part}`"),
                    ))
                }
            }
        }
        if out.is_empty() {
            return Err(Error::config("charge_points", "need at least one charge point"));
        }
        Ok(out)
    }

    /// Parsed `sweep_values`; empty when no sweep is configured.
    pub fn sweep_value_list(&self) -> Vec<String> {
        self.sweep_values
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect()
    }
}

/// Keys whose default is "absent" and therefore do not appear in a serialized table.
const OPTIONAL_KEYS: &[&str] = &["fixed_beta", "fixed_gamma", "hop_cap"];

/// Interprets a command-line override as a TOML scalar, falling back to a string.
pub fn parse_override_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match toml::from_str::<toml::Table>(&doc) {
        Ok(mut t) => match t.remove("v") {
            Some(v @ (toml::Value::Table(_) | toml::Value::Array(_))) => {
                toml::Value::String(v.to_string())
            }
            Some(v) => v,
            None => toml::Value::String(raw.to_string()),
        },
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Splits `key=value`.
pub fn parse_assignment(s: &str) -> Result<(String, String)> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(Error::ConfigParse(format!("expected key=value, got `{s}`"))),
    }
}

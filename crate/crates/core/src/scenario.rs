//! Scenario files: a nested key/value (TOML) document holding every
//! parameter, with powers in dBm and distances in meters. Missing keys take
//! the reference defaults; unknown keys are rejected.

use serde::Deserialize;

use crate::channel::{config_from_topology, ChannelError, SystemConfig, Topology};
use crate::markov::{BatteryModel, MarkovError};
use crate::sampling::RngStream;
use crate::sim::{BatteryMode, Fidelity, SimConfig};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read scenario file: {0}")]
    Io(#[from] std::io::Error),
    #[error("scenario parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Markov(#[from] MarkovError),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub system: SystemSection,
    pub topology: TopologySection,
    pub battery: BatterySection,
    pub sim: SimSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemSection {
    pub source_power_dbm: f64,
    /// Common interferer power; one interferer per `topology.d_ir` entry.
    pub interferer_power_dbm: f64,
    pub efficiency: f64,
    pub nakagami_m: u32,
    pub relay_antennas: usize,
    pub noise_relay_dbm: f64,
    pub noise_dest_dbm: f64,
    pub rate: f64,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self {
            source_power_dbm: 30.0,
            interferer_power_dbm: 20.0,
            efficiency: 0.5,
            nakagami_m: 2,
            relay_antennas: 4,
            noise_relay_dbm: -80.0,
            noise_dest_dbm: -80.0,
            rate: 1.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TopologySection {
    pub d_sd: f64,
    pub d_sr: f64,
    pub d_ir: Vec<f64>,
    pub alpha: f64,
}

impl Default for TopologySection {
    fn default() -> Self {
        Self {
            d_sd: 20.0,
            d_sr: 6.0,
            d_ir: vec![12.0, 13.0, 14.0],
            alpha: 2.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BatterySection {
    pub capacity: f64,
    pub levels: usize,
}

impl Default for BatterySection {
    fn default() -> Self {
        Self { capacity: 0.5, levels: 90 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub blocks: u64,
    pub seed: u64,
    pub fidelity: FidelityKey,
    pub battery_mode: BatteryModeKey,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            blocks: 1_000_000,
            seed: 1,
            fidelity: FidelityKey::Scalar,
            battery_mode: BatteryModeKey::Discrete,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FidelityKey {
    Vector,
    Scalar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BatteryModeKey {
    Discrete,
    Continuous,
}

impl From<FidelityKey> for Fidelity {
    fn from(k: FidelityKey) -> Self {
        match k {
            FidelityKey::Vector => Fidelity::Vector,
            FidelityKey::Scalar => Fidelity::Scalar,
        }
    }
}

impl From<BatteryModeKey> for BatteryMode {
    fn from(k: BatteryModeKey) -> Self {
        match k {
            BatteryModeKey::Discrete => BatteryMode::Discrete,
            BatteryModeKey::Continuous => BatteryMode::Continuous,
        }
    }
}

impl Scenario {
    pub fn from_str(text: &str) -> Result<Self, ScenarioError> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self, ScenarioError> {
        Self::from_str(&std::fs::read_to_string(path)?)
    }

    pub fn topology(&self) -> Topology {
        Topology {
            d_source_relay: self.topology.d_sr,
            d_source_dest: self.topology.d_sd,
            d_interferer_relay: self.topology.d_ir.clone(),
            pathloss_exponent: self.topology.alpha,
        }
    }

    pub fn system_config(&self) -> Result<SystemConfig, ScenarioError> {
        let s = &self.system;
        let l = self.topology.d_ir.len();
        let base = SystemConfig {
            source_power: dbm_to_watts(s.source_power_dbm),
            interferer_powers: vec![dbm_to_watts(s.interferer_power_dbm); l],
            efficiency: s.efficiency,
            nakagami_shape: s.nakagami_m,
            relay_antennas: s.relay_antennas,
            // placeholders, replaced from the topology below
            gain_source_relay: 1.0,
            gain_interferer_relay: vec![1.0; l],
            gain_relay_dest: 1.0,
            noise_relay: dbm_to_watts(s.noise_relay_dbm),
            noise_dest: dbm_to_watts(s.noise_dest_dbm),
            rate: s.rate,
        };
        Ok(config_from_topology(&base, &self.topology())?)
    }

    pub fn battery_model(&self) -> Result<BatteryModel<f64>, ScenarioError> {
        Ok(BatteryModel::new(self.battery.capacity, self.battery.levels)?)
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            num_blocks: self.sim.blocks,
            stream: RngStream::new(self.sim.seed, 0),
            fidelity: self.sim.fidelity.into(),
            battery_mode: self.sim.battery_mode.into(),
        }
    }
}

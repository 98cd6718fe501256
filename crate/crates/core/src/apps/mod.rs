//! Builders that compile three application models into integrated
//! instances: component reliability, multi-location inventory, and queue
//! design. Each builder is a pure function of its configuration; each
//! configuration can also be read from JSON (tagged by `kind`) and the
//! resulting instance written in the canonical schema.

pub mod inventory;
pub mod queue;
pub mod reliability;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use inventory::{build_inventory_instance, InventoryConfig};
pub use queue::{build_queue_instance, QueueConfig};
pub use reliability::{build_reliability_instance, ReliabilityConfig};

use crate::design::DesignMdpInstance;
use crate::error::{Error, Result};

/// Default cap on the product state space of a builder.
pub const DEFAULT_STATE_CAP: usize = 1 << 10;

/// Default cap on dense kernel entries (`|S|^2 * |A|`); the kernel, not the
/// state count, is what exhausts memory first.
pub const DEFAULT_KERNEL_CAP: usize = 4_000_000;

/// Any application configuration, tagged by `kind` in JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AppConfig {
    Reliability(ReliabilityConfig),
    Inventory(InventoryConfig),
    Queue(QueueConfig),
}

impl AppConfig {
    pub fn build(&self) -> Result<DesignMdpInstance> {
        match self {
            AppConfig::Reliability(c) => build_reliability_instance(c),
            AppConfig::Inventory(c) => build_inventory_instance(c),
            AppConfig::Queue(c) => build_queue_instance(c),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            AppConfig::Reliability(_) => "reliability",
            AppConfig::Inventory(_) => "inventory",
            AppConfig::Queue(_) => "queue",
        }
    }
}

/// Read a tagged application config from a JSON file.
pub fn read_app_config(path: &Path) -> Result<AppConfig> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Build an instance from a config file and write it in the canonical
/// schema.
pub fn build_instance_file(config_path: &Path, out_path: &Path) -> Result<DesignMdpInstance> {
    let config = read_app_config(config_path)?;
    let instance = config.build()?;
    crate::io::write_instance(&instance, out_path)?;
    Ok(instance)
}

/// Mixed-radix indexing for product state/action spaces. Component 0 is the
/// most significant digit.
#[derive(Debug, Clone)]
pub(crate) struct MixedRadix {
    radices: Vec<usize>,
    pub total: usize,
}

impl MixedRadix {
    pub fn new(radices: Vec<usize>) -> Result<Self> {
        let mut total: usize = 1;
        for &r in &radices {
            if r == 0 {
                return Err(Error::InvalidModel("zero-size component".into()));
            }
            total = total
                .checked_mul(r)
                .ok_or_else(|| Error::ModelTooLarge("product space overflows usize".into()))?;
        }
        Ok(MixedRadix { radices, total })
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.radices.len()];
        for i in (0..self.radices.len()).rev() {
            digits[i] = index % self.radices[i];
            index /= self.radices[i];
        }
        digits
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        let mut index = 0;
        for (d, r) in digits.iter().zip(&self.radices) {
            debug_assert!(d < r);
            index = index * r + d;
        }
        index
    }
}

pub(crate) fn check_caps(
    num_states: usize,
    num_actions: usize,
    state_cap: usize,
    kernel_cap: usize,
) -> Result<()> {
    if num_states > state_cap {
        return Err(Error::ModelTooLarge(format!(
            "{num_states} states exceed the configured cap of {state_cap}"
        )));
    }
    let entries = num_states
        .checked_mul(num_states)
        .and_then(|x| x.checked_mul(num_actions))
        .unwrap_or(usize::MAX);
    if entries > kernel_cap {
        return Err(Error::ModelTooLarge(format!(
            "dense kernel needs {entries} entries ({num_states} states^2 x {num_actions} actions), cap is {kernel_cap}"
        )));
    }
    Ok(())
}

/// Scenario weights must arrive normalized; this validates.
pub(crate) fn check_scenario_probabilities(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidModel("at least one scenario required".into()));
    }
    let sum: f64 = probs.iter().sum();
    if probs.iter().any(|&q| q <= 0.0) || (sum - 1.0).abs() > crate::mdp::PROB_TOL {
        return Err(Error::InvalidModel(format!(
            "scenario probabilities must be positive and sum to 1 (sum = {sum})"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_radix_round_trip() {
        let mr = MixedRadix::new(vec![3, 2, 4]).unwrap();
        assert_eq!(mr.total, 24);
        for i in 0..24 {
            assert_eq!(mr.encode(&mr.decode(i)), i);
        }
        assert_eq!(mr.decode(0), vec![0, 0, 0]);
        assert_eq!(mr.decode(23), vec![2, 1, 3]);
    }

    #[test]
    fn caps_reject_oversized_models() {
        assert!(check_caps(2000, 2, 1024, 4_000_000).is_err());
        assert!(check_caps(100, 500, 1024, 4_000_000).is_err());
        assert!(check_caps(64, 64, 1024, 4_000_000).is_ok());
    }
}

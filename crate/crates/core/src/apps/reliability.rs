//! Reliability design: pick one component option per slot under a budget,
//! then operate the system with repairs.
//!
//! The design selects exactly one option per slot (binary variable per
//! option) subject to a purchase budget. The operational MDP tracks a
//! working/failed status bit for every option and an action repairs any
//! subset of options. Statuses evolve for all options regardless of
//! selection; unselected options simply carry zero cost, which keeps every
//! immediate cost affine in the selection variables. Per period a selected
//! option pays its operating cost, plus a downtime cost while failed, plus
//! a repair cost when repaired.

use serde::{Deserialize, Serialize};

use super::{check_caps, check_scenario_probabilities, DEFAULT_KERNEL_CAP, DEFAULT_STATE_CAP};
use crate::design::{DesignMdpInstance, DesignSpace};
use crate::error::{Error, Result};
use crate::lp::{LinRow, Relation, VarKind};
use crate::mdp::{AffineCost, ScenarioMdp};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentOption {
    pub name: String,
    pub purchase_cost: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlotConfig {
    pub name: String,
    /// Candidate components for this slot; exactly one will be selected.
    pub options: Vec<ComponentOption>,
}

/// Per-scenario reliability data, indexed by flattened option (slot order,
/// then option order within the slot).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReliabilityScenario {
    pub probability: f64,
    pub discount: f64,
    /// Probability a working, un-repaired option fails this period.
    pub fail_prob: Vec<f64>,
    /// Probability a repair restores a failed option within the period.
    pub repair_success: Vec<f64>,
    /// Cost of repairing the option (charged when selected and repaired).
    pub repair_cost: Vec<f64>,
    /// Per-period cost of operating the option (charged while selected).
    pub operating_cost: Vec<f64>,
    /// Per-period cost while the option is failed (charged when selected).
    pub downtime_cost: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReliabilityConfig {
    pub budget: f64,
    pub slots: Vec<SlotConfig>,
    pub scenarios: Vec<ReliabilityScenario>,
    #[serde(default = "default_state_cap")]
    pub state_cap: usize,
    #[serde(default = "default_kernel_cap")]
    pub kernel_cap: usize,
}

fn default_state_cap() -> usize {
    DEFAULT_STATE_CAP
}

fn default_kernel_cap() -> usize {
    DEFAULT_KERNEL_CAP
}

/// Compile a reliability configuration into an integrated instance.
///
/// States and actions are bitmasks over the flattened options: bit `i` of a
/// state marks option `i` failed, bit `i` of an action repairs option `i`.
/// The initial state is all-working.
pub fn build_reliability_instance(config: &ReliabilityConfig) -> Result<DesignMdpInstance> {
    let num_options: usize = config.slots.iter().map(|s| s.options.len()).sum();
    if num_options == 0 {
        return Err(Error::InvalidModel("no component options".into()));
    }
    if num_options >= usize::BITS as usize - 1 {
        return Err(Error::ModelTooLarge(format!(
            "{num_options} options cannot be tracked in a bitmask state"
        )));
    }
    let num_states = 1usize << num_options;
    let num_actions = 1usize << num_options;
    check_caps(num_states, num_actions, config.state_cap, config.kernel_cap)?;
    check_scenario_probabilities(
        &config
            .scenarios
            .iter()
            .map(|s| s.probability)
            .collect::<Vec<_>>(),
    )?;
    for (k, scen) in config.scenarios.iter().enumerate() {
        for (field, v) in [
            ("fail_prob", &scen.fail_prob),
            ("repair_success", &scen.repair_success),
            ("repair_cost", &scen.repair_cost),
            ("operating_cost", &scen.operating_cost),
            ("downtime_cost", &scen.downtime_cost),
        ] {
            if v.len() != num_options {
                return Err(Error::InvalidModel(format!(
                    "scenario {k}: {field} must have one entry per option ({num_options})"
                )));
            }
        }
        if scen
            .fail_prob
            .iter()
            .chain(&scen.repair_success)
            .any(|p| !(0.0..=1.0).contains(p))
        {
            return Err(Error::InvalidModel(format!(
                "scenario {k}: probabilities must lie in [0, 1]"
            )));
        }
    }

    // design: one binary per option, exactly one option per slot, budget row
    let mut names = Vec::with_capacity(num_options);
    let mut purchase = Vec::with_capacity(num_options);
    for slot in &config.slots {
        for opt in &slot.options {
            names.push(format!("{}:{}", slot.name, opt.name));
            purchase.push(opt.purchase_cost);
        }
    }
    let mut constraints = vec![LinRow::new(purchase.clone(), Relation::Le, config.budget)];
    let mut offset = 0;
    for slot in &config.slots {
        let mut coeffs = vec![0.0; num_options];
        for j in 0..slot.options.len() {
            coeffs[offset + j] = 1.0;
        }
        constraints.push(LinRow::new(coeffs, Relation::Eq, 1.0));
        offset += slot.options.len();
    }
    let design = DesignSpace {
        bounds: vec![(0.0, 1.0); num_options],
        integrality: vec![VarKind::Binary; num_options],
        constraints,
        var_names: Some(names),
    };

    let scenarios = config
        .scenarios
        .iter()
        .map(|scen| {
            let mut transition = Vec::with_capacity(num_states);
            let mut cost = Vec::with_capacity(num_states);
            for state in 0..num_states {
                let mut per_a = Vec::with_capacity(num_actions);
                let mut per_c = Vec::with_capacity(num_actions);
                for action in 0..num_actions {
                    per_a.push(transition_row(scen, num_options, state, action));
                    // affine cost: operating while selected, downtime while
                    // failed, repair when repaired; all scale with x_i
                    let mut f = vec![0.0; num_options];
                    for i in 0..num_options {
                        f[i] += scen.operating_cost[i];
                        if state & (1 << i) != 0 {
                            f[i] += scen.downtime_cost[i];
                        }
                        if action & (1 << i) != 0 {
                            f[i] += scen.repair_cost[i];
                        }
                    }
                    per_c.push(AffineCost::new(f, 0.0));
                }
                transition.push(per_a);
                cost.push(per_c);
            }
            let mut initial = vec![0.0; num_states];
            initial[0] = 1.0;
            ScenarioMdp::new(scen.discount, transition, cost, initial, scen.probability)
        })
        .collect::<Result<Vec<_>>>()?;

    DesignMdpInstance::new(design, purchase, scenarios)
}

/// Distribution over next status masks: options evolve independently.
fn transition_row(
    scen: &ReliabilityScenario,
    num_options: usize,
    state: usize,
    action: usize,
) -> Vec<f64> {
    let num_states = 1usize << num_options;
    let mut row = vec![0.0; num_states];
    for next in 0..num_states {
        let mut p = 1.0;
        for i in 0..num_options {
            let failed = state & (1 << i) != 0;
            let repaired = action & (1 << i) != 0;
            let next_failed = next & (1 << i) != 0;
            let p_fail_next = match (failed, repaired) {
                (true, true) => 1.0 - scen.repair_success[i],
                (true, false) => 1.0,
                (false, _) if repaired => 0.0,
                (false, _) => scen.fail_prob[i],
            };
            p *= if next_failed { p_fail_next } else { 1.0 - p_fail_next };
            if p == 0.0 {
                break;
            }
        }
        row[next] = p;
    }
    row
}

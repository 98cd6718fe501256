//! Inventory design: choose `r` of `R` candidate locations, then manage
//! inventory at the opened locations under Markov-modulated demand.
//!
//! The joint MDP tracks (inventory level, demand level) per location;
//! actions order an integer quantity per location. Selection enters every
//! cost affinely: ordering at an open location costs the order rate, at a
//! closed one the order penalty (the binary identity
//! `o*a*x + M*a*(1-x) = (o*a - M*a) x + M*a`), and stock held at a closed
//! location is penalized per unit the same way. Demand that cannot be
//! served from stock is lost at the shortage rate, sales earn revenue, and
//! open locations pay a fixed per-period cost. Optionally, continuous
//! initial-inventory variables with coupling rows `0 <= u_i <= m_i x_i`
//! join the design; they price one-time stock and rule enumeration out
//! (the MIP route still applies).

use serde::{Deserialize, Serialize};

use super::{
    check_caps, check_scenario_probabilities, MixedRadix, DEFAULT_KERNEL_CAP, DEFAULT_STATE_CAP,
};
use crate::design::{DesignMdpInstance, DesignSpace};
use crate::error::{Error, Result};
use crate::lp::{LinRow, Relation, VarKind};
use crate::mdp::{AffineCost, ScenarioMdp};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocationConfig {
    pub name: String,
    /// Inventory capacity; stock and orders live in `0..=capacity`.
    pub capacity: usize,
    pub startup_cost: f64,
}

/// A finite Markov chain of demand levels for one location in one scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DemandChain {
    /// Demand per level, in whole units.
    pub levels: Vec<u32>,
    /// Row-stochastic transition matrix over levels.
    pub transition: Vec<Vec<f64>>,
    /// Level occupied at time zero.
    pub initial_level: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InventoryScenario {
    pub probability: f64,
    pub discount: f64,
    /// Per-location, per-period cost of being open.
    pub fixed_cost: Vec<f64>,
    /// Per unit ordered at an open location.
    pub order_cost: Vec<f64>,
    /// Per unit of post-order stock at an open location.
    pub holding_cost: Vec<f64>,
    /// Per unit of unmet demand at an open location.
    pub shortage_cost: Vec<f64>,
    /// Per unit sold at an open location.
    pub revenue: Vec<f64>,
    /// One demand chain per location.
    pub demand: Vec<DemandChain>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InitialInventoryConfig {
    /// Per-location unit cost of initial stock.
    pub unit_costs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InventoryConfig {
    /// Number of locations to open (`1' x = r`).
    pub select_count: usize,
    pub locations: Vec<LocationConfig>,
    pub scenarios: Vec<InventoryScenario>,
    /// Optional continuous initial-inventory design variables.
    #[serde(default)]
    pub initial_inventory: Option<InitialInventoryConfig>,
    /// Penalty per unit ordered at a closed location.
    #[serde(default = "default_penalty")]
    pub order_penalty: f64,
    /// Penalty per unit of stock sitting at a closed location.
    #[serde(default = "default_penalty")]
    pub stock_penalty: f64,
    #[serde(default = "default_state_cap")]
    pub state_cap: usize,
    #[serde(default = "default_kernel_cap")]
    pub kernel_cap: usize,
}

// large enough to dominate any plausible per-unit profit over the horizon,
// small enough to keep the reformulated MIP well conditioned
fn default_penalty() -> f64 {
    1e4
}

fn default_state_cap() -> usize {
    DEFAULT_STATE_CAP
}

fn default_kernel_cap() -> usize {
    DEFAULT_KERNEL_CAP
}

struct Layout {
    /// Interleaved (inventory, demand level) per location.
    state_radix: MixedRadix,
    action_radix: MixedRadix,
    num_locations: usize,
}

fn layout(config: &InventoryConfig, scen: &InventoryScenario) -> Result<Layout> {
    let r = config.locations.len();
    let mut state_parts = Vec::with_capacity(2 * r);
    let mut action_parts = Vec::with_capacity(r);
    for (i, loc) in config.locations.iter().enumerate() {
        let chain = &scen.demand[i];
        state_parts.push(loc.capacity + 1);
        state_parts.push(chain.levels.len());
        action_parts.push(loc.capacity + 1);
    }
    Ok(Layout {
        state_radix: MixedRadix::new(state_parts)?,
        action_radix: MixedRadix::new(action_parts)?,
        num_locations: r,
    })
}

fn validate(config: &InventoryConfig) -> Result<()> {
    let r = config.locations.len();
    if r == 0 {
        return Err(Error::InvalidModel("no locations".into()));
    }
    if config.select_count == 0 || config.select_count > r {
        return Err(Error::InvalidModel(format!(
            "select_count must lie in 1..={r}"
        )));
    }
    check_scenario_probabilities(
        &config
            .scenarios
            .iter()
            .map(|s| s.probability)
            .collect::<Vec<_>>(),
    )?;
    if let Some(init) = &config.initial_inventory {
        if init.unit_costs.len() != r {
            return Err(Error::InvalidModel(
                "initial_inventory.unit_costs must have one entry per location".into(),
            ));
        }
    }
    for (k, scen) in config.scenarios.iter().enumerate() {
        for (field, len) in [
            ("fixed_cost", scen.fixed_cost.len()),
            ("order_cost", scen.order_cost.len()),
            ("holding_cost", scen.holding_cost.len()),
            ("shortage_cost", scen.shortage_cost.len()),
            ("revenue", scen.revenue.len()),
            ("demand", scen.demand.len()),
        ] {
            if len != r {
                return Err(Error::InvalidModel(format!(
                    "scenario {k}: {field} must have one entry per location ({r})"
                )));
            }
        }
        for (i, chain) in scen.demand.iter().enumerate() {
            let l = chain.levels.len();
            if l == 0 || chain.initial_level >= l || chain.transition.len() != l {
                return Err(Error::InvalidModel(format!(
                    "scenario {k}: demand chain {i} is malformed"
                )));
            }
            for row in &chain.transition {
                if row.len() != l {
                    return Err(Error::InvalidModel(format!(
                        "scenario {k}: demand chain {i} has a ragged transition row"
                    )));
                }
                let sum: f64 = row.iter().sum();
                if row.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > crate::mdp::PROB_TOL {
                    return Err(Error::InvalidModel(format!(
                        "scenario {k}: demand chain {i} transition rows must be stochastic"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Compile an inventory configuration into an integrated instance.
pub fn build_inventory_instance(config: &InventoryConfig) -> Result<DesignMdpInstance> {
    validate(config)?;
    let r = config.locations.len();
    let has_u = config.initial_inventory.is_some();
    let n = if has_u { 2 * r } else { r };

    // design space: binaries x_0..x_{r-1}, then optional continuous
    // u_0..u_{r-1} with coupling rows u_i <= m_i x_i
    let mut bounds = vec![(0.0, 1.0); r];
    let mut integrality = vec![VarKind::Binary; r];
    let mut names: Vec<String> = config
        .locations
        .iter()
        .map(|l| format!("open:{}", l.name))
        .collect();
    let mut design_cost: Vec<f64> = config.locations.iter().map(|l| l.startup_cost).collect();
    let mut select_row = vec![0.0; n];
    select_row[..r].iter_mut().for_each(|v| *v = 1.0);
    let mut constraints = vec![LinRow::new(
        select_row,
        Relation::Eq,
        config.select_count as f64,
    )];
    if let Some(init) = &config.initial_inventory {
        for (i, loc) in config.locations.iter().enumerate() {
            bounds.push((0.0, loc.capacity as f64));
            integrality.push(VarKind::Continuous);
            names.push(format!("stock:{}", loc.name));
            design_cost.push(init.unit_costs[i]);
            let mut coeffs = vec![0.0; n];
            coeffs[r + i] = 1.0;
            coeffs[i] = -(loc.capacity as f64);
            constraints.push(LinRow::new(coeffs, Relation::Le, 0.0));
        }
    }
    let design = DesignSpace {
        bounds,
        integrality,
        constraints,
        var_names: Some(names),
    };

    let scenarios = config
        .scenarios
        .iter()
        .map(|scen| build_scenario(config, scen, n))
        .collect::<Result<Vec<_>>>()?;

    DesignMdpInstance::new(design, design_cost, scenarios)
}

fn build_scenario(
    config: &InventoryConfig,
    scen: &InventoryScenario,
    n: usize,
) -> Result<ScenarioMdp> {
    let lay = layout(config, scen)?;
    let ns = lay.state_radix.total;
    let na = lay.action_radix.total;
    check_caps(ns, na, config.state_cap, config.kernel_cap)?;
    let r = lay.num_locations;

    let mut transition = Vec::with_capacity(ns);
    let mut cost = Vec::with_capacity(ns);
    for state in 0..ns {
        let digits = lay.state_radix.decode(state);
        let mut per_a = Vec::with_capacity(na);
        let mut per_c = Vec::with_capacity(na);
        for action in 0..na {
            let orders = lay.action_radix.decode(action);
            // per-location deterministic flow at this (state, action)
            let mut post_order = vec![0usize; r];
            let mut sales = vec![0u32; r];
            let mut shortage = vec![0u32; r];
            let mut end_stock = vec![0usize; r];
            for i in 0..r {
                let stock = digits[2 * i];
                let demand = scen.demand[i].levels[digits[2 * i + 1]];
                let cap = config.locations[i].capacity;
                let filled = (stock + orders[i]).min(cap);
                post_order[i] = filled;
                let sold = (filled as u32).min(demand);
                sales[i] = sold;
                shortage[i] = demand - sold;
                end_stock[i] = filled - sold as usize;
            }

            // next-state distribution: deterministic stock, stochastic
            // demand levels, independent across locations
            let mut row = vec![0.0; ns];
            let mut stack: Vec<(usize, f64, Vec<usize>)> = vec![(0, 1.0, Vec::new())];
            while let Some((i, p, mut levels)) = stack.pop() {
                if i == r {
                    let mut next_digits = Vec::with_capacity(2 * r);
                    for (j, &lvl) in levels.iter().enumerate() {
                        next_digits.push(end_stock[j]);
                        next_digits.push(lvl);
                    }
                    row[lay.state_radix.encode(&next_digits)] += p;
                    continue;
                }
                let current_level = digits[2 * i + 1];
                for (next_level, &tp) in scen.demand[i].transition[current_level].iter().enumerate()
                {
                    if tp == 0.0 {
                        continue;
                    }
                    levels.push(next_level);
                    stack.push((i + 1, p * tp, levels.clone()));
                    levels.pop();
                }
            }
            per_a.push(row);

            // affine cost
            let mut f = vec![0.0; n];
            let mut g = 0.0;
            for i in 0..r {
                let stock = digits[2 * i] as f64;
                let a = orders[i] as f64;
                f[i] += scen.fixed_cost[i];
                // ordering: o*a if open, penalty*a if closed
                f[i] += (scen.order_cost[i] - config.order_penalty) * a;
                g += config.order_penalty * a;
                // stock sitting at a closed location
                f[i] -= config.stock_penalty * stock;
                g += config.stock_penalty * stock;
                f[i] += scen.holding_cost[i] * post_order[i] as f64;
                f[i] += scen.shortage_cost[i] * shortage[i] as f64;
                f[i] -= scen.revenue[i] * sales[i] as f64;
            }
            per_c.push(AffineCost::new(f, g));
        }
        transition.push(per_a);
        cost.push(per_c);
    }

    // start empty, at each chain's initial level
    let mut initial = vec![0.0; ns];
    let mut init_digits = Vec::with_capacity(2 * r);
    for i in 0..r {
        init_digits.push(0);
        init_digits.push(scen.demand[i].initial_level);
    }
    initial[lay.state_radix.encode(&init_digits)] = 1.0;

    ScenarioMdp::new(scen.discount, transition, cost, initial, scen.probability)
}

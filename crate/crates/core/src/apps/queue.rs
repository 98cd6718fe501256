//! Queue design: buy servers of several types, then assign queued
//! customers to servers period by period.
//!
//! Server counts are binarized into per-unit purchase variables ordered by
//! monotonicity rows (`unit u+1` may only be bought after `unit u`), which
//! makes the count expressible while keeping every cost affine: an action
//! that would use more units of a type than were purchased pays the
//! prohibitive masking cost per missing unit, exactly the positive part
//! `(used - owned)+` on monotone designs. The aggregate per-type and total
//! count rows are kept alongside. States are per-customer-type queue
//! occupancies with finite caps; arrivals follow per-type categorical
//! distributions, customers turned away at capacity incur the rejection
//! penalty, served customers leave and earn the expected service reward.

use serde::{Deserialize, Serialize};

use super::{check_caps, check_scenario_probabilities, MixedRadix, DEFAULT_KERNEL_CAP, DEFAULT_STATE_CAP};
use crate::design::{DesignMdpInstance, DesignSpace};
use crate::error::{Error, Result};
use crate::lp::{LinRow, Relation, VarKind};
use crate::mdp::{AffineCost, ScenarioMdp, PROHIBITIVE_COST};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ServerTypeConfig {
    pub name: String,
    /// Maximum number of servers of this type (`x <= r`).
    pub max_servers: usize,
    /// One-time recruitment and training cost per server.
    pub recruit_cost: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CustomerTypeConfig {
    pub name: String,
    /// Queue capacity for this customer type.
    pub queue_cap: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QueueScenario {
    pub probability: f64,
    pub discount: f64,
    /// `success_prob[i][j]`: a type-`i` server resolves a type-`j` customer.
    pub success_prob: Vec<Vec<f64>>,
    /// `reward[i][j]`: earned on successful service.
    pub reward: Vec<Vec<f64>>,
    /// Per-period operating cost per owned server of each type.
    pub operating_cost: Vec<f64>,
    /// `arrival_dist[j][w]`: probability of `w` arrivals of type `j`.
    pub arrival_dist: Vec<Vec<f64>>,
    /// Penalty per customer turned away at capacity.
    pub rejection_penalty: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QueueConfig {
    pub server_types: Vec<ServerTypeConfig>,
    /// Cap on the total number of servers (`1' x <= t`).
    pub total_server_cap: usize,
    pub customer_types: Vec<CustomerTypeConfig>,
    pub scenarios: Vec<QueueScenario>,
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

/// One action: `assign[i][j]` type-`j` customers sent to type-`i` servers.
type Assignment = Vec<Vec<usize>>;

/// All assignment matrices with per-type row sums within `max_servers` and
/// entries within the queue caps, in a fixed deterministic order with the
/// all-zero assignment first.
fn enumerate_assignments(config: &QueueConfig) -> Vec<Assignment> {
    let caps: Vec<usize> = config.customer_types.iter().map(|c| c.queue_cap).collect();
    let mut per_type: Vec<Vec<Vec<usize>>> = Vec::new();
    for st in &config.server_types {
        let mut rows: Vec<Vec<usize>> = Vec::new();
        let mut current = vec![0usize; caps.len()];
        loop {
            if current.iter().sum::<usize>() <= st.max_servers {
                rows.push(current.clone());
            }
            // odometer over per-customer-type counts
            let mut j = caps.len();
            loop {
                if j == 0 {
                    break;
                }
                j -= 1;
                if current[j] < caps[j].min(st.max_servers) {
                    current[j] += 1;
                    current[j + 1..].iter_mut().for_each(|v| *v = 0);
                    break;
                }
                if j == 0 {
                    current = Vec::new();
                    break;
                }
            }
            if current.is_empty() {
                break;
            }
        }
        per_type.push(rows);
    }
    // cartesian product across server types
    let mut actions: Vec<Assignment> = vec![Vec::new()];
    for rows in per_type {
        let mut next = Vec::with_capacity(actions.len() * rows.len());
        for partial in &actions {
            for row in &rows {
                let mut a = partial.clone();
                a.push(row.clone());
                next.push(a);
            }
        }
        actions = next;
    }
    actions
}

fn validate(config: &QueueConfig) -> Result<()> {
    if config.server_types.is_empty() || config.customer_types.is_empty() {
        return Err(Error::InvalidModel(
            "at least one server type and one customer type required".into(),
        ));
    }
    check_scenario_probabilities(
        &config
            .scenarios
            .iter()
            .map(|s| s.probability)
            .collect::<Vec<_>>(),
    )?;
    let n_srv = config.server_types.len();
    let n_cust = config.customer_types.len();
    for (k, scen) in config.scenarios.iter().enumerate() {
        if scen.success_prob.len() != n_srv
            || scen.reward.len() != n_srv
            || scen.operating_cost.len() != n_srv
        {
            return Err(Error::InvalidModel(format!(
                "scenario {k}: per-server-type fields must have {n_srv} entries"
            )));
        }
        for (i, row) in scen.success_prob.iter().enumerate() {
            if row.len() != n_cust || scen.reward[i].len() != n_cust {
                return Err(Error::InvalidModel(format!(
                    "scenario {k}: success_prob and reward must be {n_srv} x {n_cust}"
                )));
            }
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::InvalidModel(format!(
                    "scenario {k}: success probabilities must lie in [0, 1]"
                )));
            }
        }
        if scen.arrival_dist.len() != n_cust {
            return Err(Error::InvalidModel(format!(
                "scenario {k}: arrival_dist must have one row per customer type"
            )));
        }
        for (j, dist) in scen.arrival_dist.iter().enumerate() {
            let sum: f64 = dist.iter().sum();
            if dist.is_empty() || dist.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > crate::mdp::PROB_TOL
            {
                return Err(Error::InvalidModel(format!(
                    "scenario {k}: arrival distribution {j} must be a probability vector"
                )));
            }
        }
    }
    Ok(())
}

/// Compile a queue configuration into an integrated instance.
pub fn build_queue_instance(config: &QueueConfig) -> Result<DesignMdpInstance> {
    validate(config)?;
    let caps: Vec<usize> = config.customer_types.iter().map(|c| c.queue_cap).collect();
    let state_radix = MixedRadix::new(caps.iter().map(|&c| c + 1).collect())?;
    let actions = enumerate_assignments(config);
    check_caps(
        state_radix.total,
        actions.len(),
        config.state_cap,
        config.kernel_cap,
    )?;

    // design: per-unit binaries with monotone ordering, plus the aggregate
    // per-type and total rows
    let num_units: usize = config.server_types.iter().map(|s| s.max_servers).sum();
    let mut unit_offset = Vec::with_capacity(config.server_types.len());
    let mut names = Vec::with_capacity(num_units);
    let mut design_cost = Vec::with_capacity(num_units);
    {
        let mut off = 0;
        for st in &config.server_types {
            unit_offset.push(off);
            for u in 0..st.max_servers {
                names.push(format!("server:{}:{}", st.name, u));
                design_cost.push(st.recruit_cost);
            }
            off += st.max_servers;
        }
    }
    let mut constraints = Vec::new();
    for (i, st) in config.server_types.iter().enumerate() {
        for u in 1..st.max_servers {
            let mut coeffs = vec![0.0; num_units];
            coeffs[unit_offset[i] + u] = 1.0;
            coeffs[unit_offset[i] + u - 1] = -1.0;
            constraints.push(LinRow::new(coeffs, Relation::Le, 0.0));
        }
        let mut coeffs = vec![0.0; num_units];
        for u in 0..st.max_servers {
            coeffs[unit_offset[i] + u] = 1.0;
        }
        constraints.push(LinRow::new(coeffs, Relation::Le, st.max_servers as f64));
    }
    constraints.push(LinRow::new(
        vec![1.0; num_units],
        Relation::Le,
        config.total_server_cap as f64,
    ));
    let design = DesignSpace {
        bounds: vec![(0.0, 1.0); num_units],
        integrality: vec![VarKind::Binary; num_units],
        constraints,
        var_names: Some(names),
    };

    let scenarios = config
        .scenarios
        .iter()
        .map(|scen| build_scenario(config, scen, &state_radix, &actions, &unit_offset, num_units))
        .collect::<Result<Vec<_>>>()?;

    DesignMdpInstance::new(design, design_cost, scenarios)
}

fn build_scenario(
    config: &QueueConfig,
    scen: &QueueScenario,
    state_radix: &MixedRadix,
    actions: &[Assignment],
    unit_offset: &[usize],
    num_units: usize,
) -> Result<ScenarioMdp> {
    let ns = state_radix.total;
    let n_cust = config.customer_types.len();
    let n_srv = config.server_types.len();

    let mut transition = Vec::with_capacity(ns);
    let mut cost = Vec::with_capacity(ns);
    for state in 0..ns {
        let queue = state_radix.decode(state);
        let mut per_a = Vec::with_capacity(actions.len());
        let mut per_c = Vec::with_capacity(actions.len());
        for assign in actions {
            // serve in server-type order, truncating at the queue contents;
            // assignments beyond the queue are masked below
            let mut served = vec![vec![0usize; n_cust]; n_srv];
            let mut remaining = queue.clone();
            let mut overserve = 0usize;
            for i in 0..n_srv {
                for j in 0..n_cust {
                    let take = assign[i][j].min(remaining[j]);
                    served[i][j] = take;
                    overserve += assign[i][j] - take;
                    remaining[j] -= take;
                }
            }

            // per-type next-occupancy distributions after arrivals
            let mut per_type_dist: Vec<Vec<f64>> = Vec::with_capacity(n_cust);
            let mut expected_rejections = 0.0;
            for j in 0..n_cust {
                let cap = config.customer_types[j].queue_cap;
                let mut dist = vec![0.0; cap + 1];
                for (w, &pw) in scen.arrival_dist[j].iter().enumerate() {
                    if pw == 0.0 {
                        continue;
                    }
                    let raw = remaining[j] + w;
                    let landed = raw.min(cap);
                    dist[landed] += pw;
                    expected_rejections += pw * (raw - landed) as f64;
                }
                per_type_dist.push(dist);
            }
            let mut row = vec![0.0; ns];
            let mut stack: Vec<(usize, f64, Vec<usize>)> = vec![(0, 1.0, Vec::new())];
            while let Some((j, p, mut digits)) = stack.pop() {
                if j == n_cust {
                    row[state_radix.encode(&digits)] += p;
                    continue;
                }
                for (q, &pq) in per_type_dist[j].iter().enumerate() {
                    if pq == 0.0 {
                        continue;
                    }
                    digits.push(q);
                    stack.push((j + 1, p * pq, digits.clone()));
                    digits.pop();
                }
            }
            per_a.push(row);

            // affine cost over the unit binaries
            let mut f = vec![0.0; num_units];
            let mut g = 0.0;
            for i in 0..n_srv {
                let used: usize = assign[i].iter().sum();
                for u in 0..config.server_types[i].max_servers {
                    f[unit_offset[i] + u] += scen.operating_cost[i];
                    // ownership mask: (used - owned)+ on monotone designs
                    if u < used {
                        f[unit_offset[i] + u] -= PROHIBITIVE_COST;
                    }
                }
                g += PROHIBITIVE_COST * used as f64;
                for j in 0..n_cust {
                    g -= served[i][j] as f64 * scen.success_prob[i][j] * scen.reward[i][j];
                }
            }
            g += PROHIBITIVE_COST * overserve as f64;
            g += scen.rejection_penalty * expected_rejections;
            per_c.push(AffineCost::new(f, g));
        }
        transition.push(per_a);
        cost.push(per_c);
    }

    // system starts empty
    let mut initial = vec![0.0; ns];
    initial[0] = 1.0;

    ScenarioMdp::new(scen.discount, transition, cost, initial, scen.probability)
}

//! Integrated design-and-operations optimization.
//!
//! A one-time mixed-integer design decision fixes the cost structure of a
//! family of infinite-horizon discounted-cost MDPs, one per uncertainty
//! scenario; the goal is a design minimizing design cost plus expected
//! optimal operational cost. Because every scenario's optimal value is a
//! piecewise linear concave function of the design, the whole problem
//! collapses into a single mixed-integer program through LP duality and
//! big-M complementarity coupling, which this crate builds and solves with
//! its own simplex and branch-and-bound. A brute-force design enumerator
//! provides an independent check on small instances.
//!
//! # Quick tour
//!
//! ```
//! use mdp_design::design::{DesignMdpInstance, DesignSpace};
//! use mdp_design::lp::{LinRow, Relation, VarKind};
//! use mdp_design::mdp::{AffineCost, ScenarioMdp};
//! use mdp_design::oracle::brute_force_solve;
//! use mdp_design::reform::{solve_integrated, BigMKind, IntegratedConfig};
//!
//! // two-state machine: action 0 = run (may break), action 1 = repair
//! let scenario = ScenarioMdp::new(
//!     0.9,
//!     vec![
//!         vec![vec![0.8, 0.2], vec![0.8, 0.2]],
//!         vec![vec![0.0, 1.0], vec![1.0, 0.0]],
//!     ],
//!     vec![
//!         vec![AffineCost::new(vec![-2.0], 3.0), AffineCost::new(vec![0.0], 6.0)],
//!         vec![AffineCost::new(vec![0.0], 10.0), AffineCost::new(vec![-1.0], 8.0)],
//!     ],
//!     vec![1.0, 0.0],
//!     1.0,
//! )
//! .unwrap();
//! // one binary design choice: buy the upgrade or not
//! let design = DesignSpace {
//!     bounds: vec![(0.0, 1.0)],
//!     integrality: vec![VarKind::Binary],
//!     constraints: vec![LinRow::new(vec![1.0], Relation::Le, 1.0)],
//!     var_names: None,
//! };
//! let instance = DesignMdpInstance::new(design, vec![12.0], vec![scenario]).unwrap();
//!
//! let exact = solve_integrated(&instance, BigMKind::Uniform, &IntegratedConfig::default()).unwrap();
//! let oracle = brute_force_solve(&instance).unwrap();
//! assert!((exact.objective - oracle.objective).abs() < 1e-6);
//! ```

pub mod apps;
pub mod design;
pub mod error;
pub mod gen;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod mdp;
pub mod oracle;
pub mod reform;
pub mod rng;
mod util;

pub use design::{DesignMdpInstance, DesignSpace, IntegratedSolution};
pub use error::{Error, Result};
pub use mdp::{AffineCost, DecisionRule, ScenarioMdp, ValueFunction};

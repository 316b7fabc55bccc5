//! An explanation-aware constraint engine for over-constrained problems.
//!
//! Propagation records, for every removed value, the sets of constraints
//! that justify the removal. Several such explanations are kept per value,
//! bounded by k-relevance: an explanation is retained while fewer than `k`
//! of its constraints are relaxed. On top of that store the crate offers
//!
//! - enumeration of several conflicts from one empty domain,
//! - propagation-free what-if queries (relax, reactivate, membership),
//! - projection of explanations onto a user's level of understanding,
//! - a deterministic JSON-lines session protocol and a small CLI.
//!
//! ```
//! use coins::engine::{SolveOutcome, SEARCH_LIMIT};
//! use coins::{Engine, Scenario, conflict};
//!
//! let scenario = Scenario::conference();
//! let mut engine = Engine::new(scenario.problem.clone());
//! engine.propagate().unwrap();
//! // arc consistent; search proves there is no solution
//! assert!(!engine.is_contradictory());
//! let outcome = engine.check_feasibility(SEARCH_LIMIT).unwrap();
//! assert!(matches!(outcome, SolveOutcome::Infeasible(_)));
//! let v = engine.status().contradiction_variable().unwrap();
//! let set = conflict::enumerate_conflicts(&engine, v, conflict::DEFAULT_CAP).unwrap();
//! assert!(!set.conflicts.is_empty());
//! ```

pub mod conflict;
pub mod engine;
pub mod hierarchy;
pub mod host;
pub mod model;
pub mod oracle;
pub mod scenario;
pub mod session;
pub mod whatif;
pub mod xstore;

pub use conflict::{Conflict, ConflictSet};
pub use engine::{Engine, EngineError, Status};
pub use hierarchy::{Hierarchy, HierarchyNode, NodeId, UserView};
pub use model::{ConstraintId, ConstraintKind, ConstraintSpec, ModelError, Problem, Relation, VariableId};
pub use scenario::{Scenario, ScenarioError};
pub use session::{Command, Reply, Session};
pub use xstore::{Explanation, RemovalKey, Store};

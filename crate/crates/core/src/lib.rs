//! Hill-valley niching evolutionary algorithm and the 20-problem multimodal
//! benchmark suite, with peak-ratio, success-rate, F1 and dynamic-F1 scoring.
//!
//! ```
//! use hillvallea::{make_problem, run, scoring::count_distinct_global, AccuracyLevel, RunConfig};
//!
//! let problem = make_problem(2, None).unwrap().with_budget(5_000);
//! let outcome = run(&problem, &RunConfig::default(), 1);
//! let eps = AccuracyLevel::new(1e-4).unwrap();
//! let found = count_distinct_global(&outcome.trace.solutions(), &problem, eps);
//! assert!(found > 0);
//! ```

pub mod amalgam;
pub mod error;
pub mod harness;
pub mod hillvalley;
pub mod orchestrator;
pub mod problems;
pub mod sampling;
pub mod scoring;
pub mod solution;
mod spatial;

pub use error::{Error, EvalError, Result};
pub use orchestrator::{run, RestartParams, RunConfig, RunOutcome, RunTrace, XiScaling};
pub use problems::{make_problem, Bounds, Evaluator, GlobalOptimum, Problem};
pub use scoring::{AccuracyLevel, Scenario, ScoreReport};
pub use solution::Solution;

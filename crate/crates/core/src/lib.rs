//! Outcome adaptive elastic net (OAENet) variable selection for causal inference.
//!
//! The crate is organised around the two-step selection pipeline:
//!
//! 1. an ordinary least squares outcome model supplies per-covariate adaptive
//!    weights `w_j = |beta_j|^-gamma`;
//! 2. an adaptively weighted elastic-net logistic treatment model, tuned by
//!    k-fold cross-validation, picks the covariates that enter the propensity
//!    score model.
//!
//! Around that core sit propensity score fitting and 1:1 nearest-neighbour
//! matching ([`matching`]), scenario generators with oracle variable roles
//! ([`simulation`]), and a Monte Carlo harness with CSV/JSON reporting
//! ([`harness`]).
//!
//! ```no_run
//! use oaenet::simulation::{builtin_scenario, generate};
//! use oaenet::oaenet::{select_variables, GridConfig};
//!
//! let spec = builtin_scenario("2A").unwrap();
//! let data = generate(&spec, 7).unwrap();
//! let result = select_variables(&data, 3.0, 5, &GridConfig::default(), 7).unwrap();
//! println!("selected: {:?}", result.selected);
//! ```

pub mod error;
pub mod harness;
pub mod matching;
pub mod oaenet;
pub mod penalized_glm;
pub mod rng;
pub mod simulation;

pub use crate::error::{Error, Result};
pub use crate::oaenet::{Dataset, SelectionResult};
pub use crate::penalized_glm::DesignMatrix;

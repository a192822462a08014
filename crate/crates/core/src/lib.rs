//! Max-min fair base-station association and power allocation for downlink
//! cellular networks.
//!
//! The fixed-association power solver lives in [`power`], sum-power bounds
//! and the uplink association algorithm in [`sumpower`], the two-stage
//! heuristics in [`twostage`], one-to-one association in [`matching`], exact
//! and gadget oracles in [`oracle`], random HetNets in [`scenario`] and the
//! Monte-Carlo driver in [`harness`].

pub mod error;
pub mod harness;
pub mod matching;
pub mod model;
pub mod oracle;
pub mod power;
pub mod scenario;
pub mod sumpower;
pub mod twostage;

pub use error::{Error, Result};
pub use harness::{Algorithm, ExperimentSpec, Outcome, Status};
pub use model::{Association, Network, PowerVector, SolveResult};
pub use power::FixedPointOptions;
pub use scenario::{ScenarioConfig, UserDist};

//! Long-term utility regions and stationary power-control policies for the
//! generalized forwarder's dilemma with partial channel-state information.
//!
//! Two source nodes each pick an own-packet power and a relay power per
//! block. Given the law of the channel state, what each node observes about
//! it, and a shared lottery, the crate maximizes weighted sums of the two
//! long-term expected utilities over stationary decision functions using
//! sequential best response, and traces the resulting Pareto frontier.

pub mod baselines;
pub mod config;
pub mod error;
pub mod experiments;
pub mod game;
pub mod instance;
pub mod model;
pub mod network;
pub mod optimizer;
pub mod policy;
pub mod seed;
pub mod verify;

pub use error::{Error, Result};
pub use game::{Action, ChannelState, EfficiencyFunction, GainGrid, Game, Node, PowerGrid, StateSpace, UtilityParams};
pub use instance::Instance;
pub use model::{GainLaw, Lottery, ObservationStructure, SignalSpace, StateDistribution};
pub use optimizer::{Evaluator, SolveResult};
pub use policy::{DecisionPolicy, StochasticPolicy};

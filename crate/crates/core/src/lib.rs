pub mod abrb;
pub mod baselines;
pub mod error;
pub mod graph_b;
pub mod net_model;
pub mod opt_a;
pub mod opt_b;
pub mod partition;
pub mod rng;
pub mod scalar;
pub mod scheduler;
pub mod sim;
pub mod simplex;
pub mod utility;

pub use error::{Error, Result};
pub use scalar::Real;
pub use sim::{run_simulation, Algorithm, MetricsReport, ScenarioConfig};

/// Double-precision aliases of the generic types.
pub type Network = net_model::Network<f64>;
pub type SynchronousAbrbPmf = abrb::SynchronousAbrbPmf<f64>;
pub type ProfilePmf = abrb::ProfilePmf<f64>;
pub type RateTracker = scheduler::RateTracker<f64>;
pub type Utility = utility::Utility<f64>;
pub type EstimateSetA = opt_a::EstimateSetA<f64>;
pub type B2Result = opt_b::B2Result<f64>;
pub type Partition = partition::Partition<f64>;

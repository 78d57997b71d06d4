//! The two-timescale control loop, its messages, and run metrics.

pub mod bs;
pub mod config;
pub mod control;
pub mod engine;
pub mod harness;
pub mod metrics;

pub use bs::{run_superframe, BsContext, ProposedPlan};
pub use config::{BaselineConfig, ScenarioConfig, SimulationConfig};
pub use control::{LongTermControl, Rrms, RrmsRecord, StatisticsReport};
pub use harness::{run_on_network, run_proposed, run_simulation, run_simulation_traced, SimulationOutput};
pub use metrics::{compute_metrics, Algorithm, FinalMetrics, MetricsReport, SuperframeRecord, SCHEMA};

//! Network geometry, large-scale fading, cell selection and topology.

pub mod channel;
pub mod config;
pub mod fixture;
pub mod geometry;
pub mod topology;

pub use channel::{mean_channel, sample_small_scale, ChannelSample};
pub use config::{Loading, NetworkConfig, PathLoss};
pub use fixture::{parse_fixture, write_fixture, Fixture, FIG2, FIG4};
pub use geometry::{generate_topology, LargeScaleState};
pub use topology::{
    build_topology_graph, cell_selection, select_cells, Category, RadioParams, TopologyGraph,
    UserClass, UserType,
};

use crate::error::Result;
use crate::scalar::Real;

/// Everything the schedulers and optimizers need to know about a network.
#[derive(Clone, Debug)]
pub struct Network<T: Real = f64> {
    pub state: LargeScaleState<T>,
    pub graph: TopologyGraph,
    pub radio: RadioParams<T>,
}

impl<T: Real> Network<T> {
    /// Layout, cell selection and topology extraction in one step.
    pub fn generate(config: &NetworkConfig, seed: u64) -> Result<Self> {
        let state = generate_topology(config, seed)?;
        let serving = cell_selection(&state, config);
        let graph = build_topology_graph(&state, &serving, config)?;
        let radio = RadioParams::from_config(config, state.n_bs());
        Ok(Self {
            state,
            graph,
            radio,
        })
    }

    /// Interference-free spectral efficiency of a user's serving link at
    /// its mean channel.
    pub fn isolated_mi(&self, user: usize) -> T {
        let b = self.graph.serving(user);
        let snr = self.radio.received(&self.state, user, b) / self.radio.noise;
        (T::one() + snr).log2()
    }
}

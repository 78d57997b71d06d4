use rand_distr::{Distribution, Exp1};

use super::geometry::LargeScaleState;
use super::topology::TopologyGraph;
use crate::rng::{stream, Purpose};
use crate::scalar::Real;

/// Small-scale power gains `|h|^2` of one subband in one subframe.
/// Row-major `users x bs`; entries off the topology edges are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSample<T: Real = f64> {
    n_bs: usize,
    gain_sq: Vec<T>,
}

impl<T: Real> ChannelSample<T> {
    pub fn from_dense(n_bs: usize, gain_sq: Vec<T>) -> Self {
        Self { n_bs, gain_sq }
    }

    #[inline]
    pub fn gain(&self, user: usize, bs: usize) -> T {
        self.gain_sq[user * self.n_bs + bs]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.gain_sq
    }
}

/// Rayleigh block fading on every edge, keyed by `(seed, subframe, subband)`.
pub fn sample_small_scale<T: Real>(
    state: &LargeScaleState<T>,
    graph: &TopologyGraph,
    seed: u64,
    subframe: u64,
    subband: u64,
) -> ChannelSample<T> {
    let n_bs = state.n_bs();
    let mut rng = stream(seed, Purpose::Channel, subframe, subband);
    let mut gain_sq = vec![T::zero(); state.n_users() * n_bs];
    for k in 0..graph.n_users() {
        for &n in graph.links(k) {
            let x: f64 = Exp1.sample(&mut rng);
            gain_sq[k * n_bs + n] = state.gain(k, n) * T::lit(x);
        }
    }
    ChannelSample { n_bs, gain_sq }
}

/// The deterministic channel `|h|^2 = sigma^2` on every edge.
pub fn mean_channel<T: Real>(state: &LargeScaleState<T>, graph: &TopologyGraph) -> ChannelSample<T> {
    let n_bs = state.n_bs();
    let mut gain_sq = vec![T::zero(); state.n_users() * n_bs];
    for k in 0..graph.n_users() {
        for &n in graph.links(k) {
            gain_sq[k * n_bs + n] = state.gain(k, n);
        }
    }
    ChannelSample { n_bs, gain_sq }
}

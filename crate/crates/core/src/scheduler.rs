//! Per-subframe eligibility, mutual information, weighted-argmax scheduling
//! and the online statistics that feed the long-timescale optimizers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::abrb::AbrbPattern;
use crate::net_model::{Category, ChannelSample, Network, TopologyGraph, UserType};
use crate::scalar::Real;

/// Rate floor applied before taking utility derivatives.
pub const RATE_FLOOR: f64 = 1e-6;

/// Which subband group a resource block belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SubbandType {
    A,
    B,
}

/// Whether `user` may be scheduled by its serving BS on a subband of type
/// `kind` under `pattern`.
pub fn is_eligible(graph: &TopologyGraph, user: usize, kind: SubbandType, pattern: &AbrbPattern) -> bool {
    let b = graph.serving(user);
    match (kind, graph.category(user)) {
        (SubbandType::A, Category::MacroI) => false,
        (SubbandType::A, Category::MacroN) => pattern.transmits(b),
        (SubbandType::A, Category::PicoN) => true,
        (SubbandType::A, Category::PicoI) => graph.macro_neighbors(user).iter().all(|&n| !pattern.transmits(n)),
        (SubbandType::B, Category::MacroI) => pattern.transmits(b),
        (SubbandType::B, _) => false,
    }
}

pub fn eligible_users(
    bs: usize,
    kind: SubbandType,
    pattern: &AbrbPattern,
    graph: &TopologyGraph,
) -> Vec<usize> {
    graph
        .served(bs)
        .iter()
        .copied()
        .filter(|&k| is_eligible(graph, k, kind, pattern))
        .collect()
}

/// Spectral efficiency of a user's serving link treating interference from
/// its neighbor set as noise. Pico interference only counts on Type A
/// subbands because picos are silent on Type B.
pub fn mutual_information<T: Real>(
    net: &Network<T>,
    user: usize,
    pattern: &AbrbPattern,
    sample: &ChannelSample<T>,
    kind: SubbandType,
) -> T {
    let g = &net.graph;
    let p = &net.radio.power;
    let b = g.serving(user);
    let mut omega = net.radio.noise;
    for &n in g.macro_neighbors(user) {
        if pattern.transmits(n) {
            omega = omega + sample.gain(user, n) * p[n];
        }
    }
    if kind == SubbandType::A {
        for &n in g.pico_neighbors(user) {
            omega = omega + sample.gain(user, n) * p[n];
        }
    }
    (T::one() + sample.gain(user, b) * p[b] / omega).log2()
}

/// Eligible user maximizing `weight * MI` at BS `bs`, with its MI.
/// Lowest user id wins ties.
pub fn schedule<T: Real>(
    net: &Network<T>,
    bs: usize,
    pattern: &AbrbPattern,
    sample: &ChannelSample<T>,
    kind: SubbandType,
    weights: &[T],
) -> Option<(usize, T)> {
    schedule_with(net, bs, pattern, sample, kind, weights, |k| {
        is_eligible(&net.graph, k, kind, pattern)
    })
}

/// [`schedule`] with a caller-supplied eligibility rule.
pub fn schedule_with<T: Real>(
    net: &Network<T>,
    bs: usize,
    pattern: &AbrbPattern,
    sample: &ChannelSample<T>,
    kind: SubbandType,
    weights: &[T],
    eligible: impl Fn(usize) -> bool,
) -> Option<(usize, T)> {
    let mut best: Option<(usize, T, T)> = None;
    for &k in net.graph.served(bs) {
        if !eligible(k) {
            continue;
        }
        let mi = mutual_information(net, k, pattern, sample, kind);
        let score = weights[k] * mi;
        match best {
            Some((_, s, _)) if score <= s => {}
            _ => best = Some((k, score, mi)),
        }
    }
    best.map(|(k, _, mi)| (k, mi))
}

/// Scheduled user (if any) of every BS on one subband.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchedulingDecision {
    pub per_bs: Vec<Option<usize>>,
}

impl SchedulingDecision {
    /// Every scheduled user is served by that BS and eligible.
    pub fn is_legal(&self, graph: &TopologyGraph, kind: SubbandType, pattern: &AbrbPattern) -> bool {
        self.per_bs.iter().enumerate().all(|(n, choice)| match choice {
            None => true,
            Some(k) => graph.serving(*k) == n && is_eligible(graph, *k, kind, pattern),
        })
    }
}

pub fn schedule_all<T: Real>(
    net: &Network<T>,
    pattern: &AbrbPattern,
    sample: &ChannelSample<T>,
    kind: SubbandType,
    weights: &[T],
) -> (SchedulingDecision, Vec<T>) {
    let n_bs = net.graph.n_bs();
    let mut per_bs = Vec::with_capacity(n_bs);
    let mut mi = vec![T::zero(); n_bs];
    for n in 0..n_bs {
        let choice = schedule(net, n, pattern, sample, kind, weights);
        if let Some((_, v)) = choice {
            mi[n] = v;
        }
        per_bs.push(choice.map(|c| c.0));
    }
    (SchedulingDecision { per_bs }, mi)
}

/// Running sum and count.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MeanAcc<T: Real = f64> {
    pub sum: T,
    pub count: u64,
}

impl<T: Real> MeanAcc<T> {
    pub fn push(&mut self, v: T) {
        self.sum = self.sum + v;
        self.count += 1;
    }

    pub fn mean(&self) -> Option<T> {
        (self.count > 0).then(|| self.sum / T::from_u64(self.count).expect("count fits"))
    }
}

/// Moving-average rates and conditional mutual-information statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct RateTracker<T: Real = f64> {
    pub rates: Vec<T>,
    /// Per user: mean scheduled MI while the pattern is favourable for the
    /// serving BS.
    pub favourable: Vec<MeanAcc<T>>,
    /// Per user: mean scheduled MI while it is not.
    pub unfavourable: Vec<MeanAcc<T>>,
    /// Per Type B pattern, per user: mean scheduled MI.
    pub per_pattern: BTreeMap<AbrbPattern, Vec<MeanAcc<T>>>,
}

impl<T: Real> RateTracker<T> {
    pub fn new(n_users: usize) -> Self {
        Self {
            rates: vec![T::lit(RATE_FLOOR); n_users],
            favourable: vec![MeanAcc::default(); n_users],
            unfavourable: vec![MeanAcc::default(); n_users],
            per_pattern: BTreeMap::new(),
        }
    }

    /// Clears the conditional statistics and keeps the rates.
    pub fn reset_statistics(&mut self) {
        let n = self.rates.len();
        self.favourable = vec![MeanAcc::default(); n];
        self.unfavourable = vec![MeanAcc::default(); n];
        self.per_pattern.clear();
    }

    /// Moving-average update for the subframe `offset` positions into the
    /// super-frame, given the rate each user received in the previous one.
    pub fn update_rates(&mut self, offset: usize, delivered: &[T]) {
        let keep = T::from_usize_lossy(offset + 1) / T::from_usize_lossy(offset + 2);
        let take = T::one() / T::from_usize_lossy(offset + 2);
        for (r, &d) in self.rates.iter_mut().zip(delivered) {
            *r = keep * *r + take * d;
        }
    }

    pub fn observe_a(&mut self, user: usize, favourable: bool, mi: T) {
        if favourable {
            self.favourable[user].push(mi);
        } else {
            self.unfavourable[user].push(mi);
        }
    }

    pub fn observe_b(&mut self, user: usize, pattern: &AbrbPattern, mi: T) {
        let n = self.rates.len();
        self.per_pattern
            .entry(pattern.clone())
            .or_insert_with(|| vec![MeanAcc::default(); n])[user]
            .push(mi);
    }

    /// Mean scheduled MI of `user` under `pattern` on Type B subbands.
    pub fn pattern_estimate(&self, user: usize, pattern: &AbrbPattern) -> Option<T> {
        self.per_pattern.get(pattern).and_then(|v| v[user].mean())
    }
}

/// Feasible MI: the MI if the user is eligible, else zero.
pub fn feasible_mi<T: Real>(
    net: &Network<T>,
    user: usize,
    pattern: &AbrbPattern,
    sample: &ChannelSample<T>,
) -> T {
    let kind = match net.graph.user_type(user) {
        UserType::A => SubbandType::A,
        UserType::B => SubbandType::B,
    };
    if is_eligible(&net.graph, user, kind, pattern) {
        mutual_information(net, user, pattern, sample, kind)
    } else {
        T::zero()
    }
}

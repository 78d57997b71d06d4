//! Comparison schemes: static synchronized blanking with fractional
//! frequency reuse, and synchronized blanking at one network-wide rate
//! picked by pilot runs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abrb::AbrbPattern;
use crate::error::Result;
use crate::net_model::geometry::reuse_color;
use crate::net_model::Network;
use crate::scheduler::{RateTracker, SubbandType};
use crate::sim::bs::{delivered_by_user, pf_weights};
use crate::sim::config::ScenarioConfig;
use crate::sim::engine::{simulate_subframe, trace_rows, SubbandPlan};
use crate::sim::metrics::{
    compute_metrics, group_utility, Algorithm, Header, MetricsReport, SuperframeRecord, SCHEMA,
};
use crate::utility::Utility;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKind {
    StaticAbsFfr,
    DynamicSyncAbs,
}

/// Fractional frequency reuse: subbands `common` are open to every macro;
/// each macro also owns the group of its reuse color, and its outer-zone
/// users are confined to that group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FfrPlan {
    pub common: Vec<usize>,
    pub groups: [Vec<usize>; 3],
    pub macro_color: Vec<usize>,
    pub outer: Vec<bool>,
    pub outer_fraction: f64,
}

impl FfrPlan {
    /// Splits `subbands` and marks each macro's lowest-SNR users. Returns
    /// `None` when there are too few subbands for three nonempty groups and
    /// a common part.
    pub fn build(net: &Network, subbands: usize, outer_subband_fraction: f64, outer_fraction: f64) -> Option<Self> {
        let max_outer = (subbands.saturating_sub(1) / 3) * 3;
        let outer_bands = (((outer_subband_fraction * subbands as f64) / 3.0).round() as usize * 3).min(max_outer);
        if outer_bands < 3 {
            return None;
        }
        let per_group = outer_bands / 3;
        let n_common = subbands - outer_bands;
        let groups = [0, 1, 2].map(|c| (n_common + c * per_group..n_common + (c + 1) * per_group).collect());
        let g = &net.graph;
        let macro_color = net.state.macro_cells.iter().map(|&c| reuse_color(c)).collect();
        let mut outer = vec![false; g.n_users()];
        for b in 0..g.n_macro() {
            let mut served: Vec<(f64, usize)> = g
                .served(b)
                .iter()
                .map(|&k| (net.radio.received(&net.state, k, b) / net.radio.noise, k))
                .collect();
            served.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            let count = (outer_fraction * served.len() as f64).round() as usize;
            for &(_, k) in served.iter().take(count) {
                outer[k] = true;
            }
        }
        Some(Self {
            common: (0..n_common).collect(),
            groups,
            macro_color,
            outer,
            outer_fraction,
        })
    }

    pub fn macro_allowed(&self, bs: usize, subband: usize) -> bool {
        subband < self.common.len() || self.groups[self.macro_color[bs]].contains(&subband)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselinePolicy {
    pub kind: BaselineKind,
    /// Blank subframes per `rate_steps` subframes.
    pub blank_steps: usize,
    pub rate_steps: usize,
    pub ffr: Option<FfrPlan>,
}

impl BaselinePolicy {
    pub fn blanking_rate(&self) -> f64 {
        self.blank_steps as f64 / self.rate_steps as f64
    }

    /// All macros blank subframe `t` together; blanks are spread evenly.
    pub fn blanks(&self, t: u64) -> bool {
        let (i, s) = (self.blank_steps as u64, self.rate_steps as u64);
        (t + 1) * i / s > t * i / s
    }

    fn header_params(&self) -> serde_json::Value {
        let mut v = serde_json::json!({
            "kind": self.kind,
            "blanking_rate": self.blanking_rate(),
        });
        if let Some(f) = &self.ffr {
            v["ffr"] = serde_json::json!({
                "common_subbands": f.common,
                "outer_groups": f.groups,
                "outer_fraction": f.outer_fraction,
                "outer_users": f.outer.iter().filter(|&&o| o).count(),
            });
        }
        v
    }

    /// Macros carrying data on `subband` in subframe `t`.
    pub fn pattern(&self, n_macro: usize, t: u64, subband: usize) -> AbrbPattern {
        if self.blanks(t) {
            return AbrbPattern::all_blank(n_macro);
        }
        match &self.ffr {
            Some(f) => AbrbPattern::with_active(n_macro, (0..n_macro).filter(|&n| f.macro_allowed(n, subband))),
            None => AbrbPattern::all_on(n_macro),
        }
    }

    /// Picos serve anyone; macro users need their macro on and, in the
    /// outer zone, a subband of the macro's own group.
    pub fn eligible(&self, net: &Network, user: usize, subband: usize, pattern: &AbrbPattern) -> bool {
        let b = net.graph.serving(user);
        if !net.graph.is_macro(b) {
            return true;
        }
        if !pattern.transmits(b) {
            return false;
        }
        match &self.ffr {
            Some(f) if f.outer[user] => f.groups[f.macro_color[b]].contains(&subband),
            _ => true,
        }
    }
}

/// A policy bound to a network's macro count.
struct BoundPolicy<'a> {
    policy: &'a BaselinePolicy,
    n_macro: usize,
}

impl SubbandPlan for BoundPolicy<'_> {
    fn configure(&self, subframe: u64, subband: usize) -> (SubbandType, AbrbPattern, Option<usize>) {
        (SubbandType::A, self.policy.pattern(self.n_macro, subframe, subband), None)
    }

    fn eligible(&self, net: &Network, user: usize, subband: usize, _kind: SubbandType, pattern: &AbrbPattern) -> bool {
        self.policy.eligible(net, user, subband, pattern)
    }

    fn bs_active(&self, net: &Network, bs: usize, _kind: SubbandType, pattern: &AbrbPattern) -> bool {
        !net.graph.is_macro(bs) || pattern.transmits(bs)
    }
}

/// Per super-frame mean MI per subframe of every user under a fixed policy,
/// for `subframes` subframes starting at 0.
pub fn run_policy(
    config: &ScenarioConfig,
    net: &Network,
    policy: &BaselinePolicy,
    seed: u64,
    subframes: usize,
    mut trace: Option<&mut String>,
) -> Vec<Vec<f64>> {
    let len = config.superframe_len();
    let subbands = config.network.subbands;
    let n = net.graph.n_users();
    let utility = Utility::<f64>::ProportionalFair;
    let weights = vec![1.0; n];
    let plan = BoundPolicy {
        policy,
        n_macro: net.graph.n_macro(),
    };
    let mut tracker = RateTracker::new(n);
    let mut history = Vec::new();
    let mut block = vec![0.0; n];
    let mut in_block = 0usize;
    for t in 0..subframes {
        let offset = t % len;
        let mu = pf_weights(&utility, &weights, &tracker.rates);
        let outcomes = simulate_subframe(net, seed, t as u64, subbands, &mu, &plan, config.simulation.parallel);
        let now = delivered_by_user(n, &outcomes);
        if let Some(out) = trace.as_deref_mut() {
            trace_rows(t as u64, &outcomes, out);
        }
        tracker.update_rates(offset, &now);
        for (acc, d) in block.iter_mut().zip(&now) {
            *acc += d;
        }
        in_block += 1;
        if in_block == len || t + 1 == subframes {
            history.push(block.iter().map(|d| d / in_block as f64).collect());
            block.iter_mut().for_each(|d| *d = 0.0);
            in_block = 0;
        }
    }
    history
}

fn mean_rates(history: &[Vec<f64>]) -> Vec<f64> {
    let n = history.first().map_or(0, Vec::len);
    (0..n)
        .map(|k| history.iter().map(|row| row[k]).sum::<f64>() / history.len() as f64)
        .collect()
}

fn report(
    config: &ScenarioConfig,
    net: &Network,
    algorithm: Algorithm,
    policy: &BaselinePolicy,
    history: &[Vec<f64>],
    extra: serde_json::Value,
) -> Result<MetricsReport> {
    let g = &net.graph;
    let utility = config.simulation.utility.normalized();
    let (type_a, type_b) = (g.type_a_users(), g.type_b_users());
    let superframes = history
        .iter()
        .enumerate()
        .map(|(s, rates)| {
            let u_a = group_utility(&utility, &type_a, rates);
            let u_b = group_utility(&utility, &type_b, rates);
            SuperframeRecord {
                superframe: s,
                u_a,
                u_b,
                total: u_a + u_b,
                q_s: 1.0,
                m_a: config.network.subbands,
                blanking_rate: Some(policy.blanking_rate()),
                ..Default::default()
            }
        })
        .collect();
    let (summary, per_user) = compute_metrics(history, g, config.network.subband_hz())?;
    let mut params = policy.header_params();
    if let (Some(obj), serde_json::Value::Object(more)) = (params.as_object_mut(), extra) {
        obj.extend(more);
    }
    Ok(MetricsReport {
        header: Header {
            schema: SCHEMA.into(),
            algorithm,
            seed: config.network.seed,
            config: config.clone(),
            baseline: Some(params),
        },
        superframes,
        profiles: vec![],
        summary,
        per_user,
    })
}

pub fn baseline1_policy(config: &ScenarioConfig, net: &Network) -> BaselinePolicy {
    let b = &config.baselines;
    BaselinePolicy {
        kind: BaselineKind::StaticAbsFfr,
        blank_steps: 1,
        rate_steps: b.abs_period,
        ffr: FfrPlan::build(net, config.network.subbands, b.outer_subband_fraction, b.outer_fraction),
    }
}

/// Static synchronized blanking of one subframe in `abs_period` plus FFR.
pub fn run_baseline1(
    config: &ScenarioConfig,
    net: &Network,
    trace: Option<&mut String>,
) -> Result<MetricsReport> {
    let policy = baseline1_policy(config, net);
    if policy.ffr.is_none() {
        log::warn!("too few subbands for three reuse groups; running without FFR");
    }
    let horizon = config.simulation.superframes * config.superframe_len();
    let history = run_policy(config, net, &policy, config.network.seed, horizon, trace);
    report(config, net, Algorithm::Baseline1, &policy, &history, serde_json::json!({}))
}

/// Pilot PF utility of every grid rate and the index of the best one (the
/// lowest rate wins ties).
pub fn select_blanking_rate(config: &ScenarioConfig, net: &Network) -> (usize, Vec<f64>) {
    let steps = config.baselines.rate_steps;
    let pilot = config.pilot_len();
    let utility = Utility::<f64>::ProportionalFair;
    let scores: Vec<f64> = (0..steps)
        .into_par_iter()
        .map(|i| {
            let policy = BaselinePolicy {
                kind: BaselineKind::DynamicSyncAbs,
                blank_steps: i,
                rate_steps: steps,
                ffr: None,
            };
            let history = run_policy(config, net, &policy, config.network.seed, pilot, None);
            mean_rates(&history).iter().map(|&r| utility.value(r)).sum()
        })
        .collect();
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    (best, scores)
}

/// Synchronized blanking at the network-wide grid rate with the best pilot
/// PF utility.
pub fn run_baseline2(
    config: &ScenarioConfig,
    net: &Network,
    trace: Option<&mut String>,
) -> Result<MetricsReport> {
    let (best, scores) = select_blanking_rate(config, net);
    let policy = BaselinePolicy {
        kind: BaselineKind::DynamicSyncAbs,
        blank_steps: best,
        rate_steps: config.baselines.rate_steps,
        ffr: None,
    };
    let horizon = config.simulation.superframes * config.superframe_len();
    let history = run_policy(config, net, &policy, config.network.seed, horizon, trace);
    let extra = serde_json::json!({ "pilot_subframes": config.pilot_len(), "pilot_utilities": scores });
    report(config, net, Algorithm::Baseline2, &policy, &history, extra)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net_model::{parse_fixture, Fixture};

    fn policy(i: usize) -> BaselinePolicy {
        BaselinePolicy {
            kind: BaselineKind::DynamicSyncAbs,
            blank_steps: i,
            rate_steps: 8,
            ffr: None,
        }
    }

    #[test]
    fn blanking_cycle_hits_the_rate_exactly() {
        for i in 0..8 {
            let p = policy(i);
            for cycle in 0..4u64 {
                let blanks = (cycle * 8..cycle * 8 + 8).filter(|&t| p.blanks(t)).count();
                assert_eq!(blanks, i);
            }
        }
        let p = policy(1);
        assert!((0..64u64).filter(|&t| p.blanks(t)).all(|t| t % 8 == 7));
    }

    fn three_macro_net() -> Network {
        let text = "bs 1 macro\nbs 2 macro\nbs 3 macro\n\
                    user 1 serving 1\nuser 2 serving 1\nuser 3 serving 2\nuser 4 serving 3\n\
                    snr 1 1 5\nsnr 1 2 25\n";
        let f: Fixture = parse_fixture(text).unwrap();
        f.network
    }

    #[test]
    fn ffr_groups_are_disjoint_and_neighbors_differ_in_color() {
        let net = three_macro_net();
        let plan = FfrPlan::build(&net, 10, 0.6, 0.5).unwrap();
        assert_eq!(plan.common, vec![0, 1, 2, 3]);
        assert_eq!(plan.groups, [vec![4, 5], vec![6, 7], vec![8, 9]]);
        let colors = &plan.macro_color;
        assert!(colors[0] != colors[1] && colors[1] != colors[2] && colors[0] != colors[2]);
        // The lower-SNR user of macro 1 is the outer one.
        assert!(plan.outer[0] && !plan.outer[1]);
        assert!(FfrPlan::build(&net, 3, 0.6, 0.3).is_none());
    }

    #[test]
    fn outer_users_only_use_their_group() {
        let net = three_macro_net();
        let plan = FfrPlan::build(&net, 10, 0.6, 0.5).unwrap();
        let color = plan.macro_color[0];
        let p = BaselinePolicy {
            kind: BaselineKind::StaticAbsFfr,
            blank_steps: 1,
            rate_steps: 8,
            ffr: Some(plan.clone()),
        };
        for m in 0..10 {
            let pattern = p.pattern(3, 0, m);
            let ok = p.eligible(&net, 0, m, &pattern);
            assert_eq!(ok, plan.groups[color].contains(&m), "subband {m}");
        }
        let blank = p.pattern(3, 7, 0);
        assert!(!p.eligible(&net, 1, 0, &blank));
    }

    #[test]
    fn no_interference_means_no_blanking() {
        let text = "bs 1 macro\nbs 2 macro\nuser 1 serving 1\nuser 2 serving 2\n";
        let f: Fixture = parse_fixture(text).unwrap();
        let mut config = ScenarioConfig::default();
        config.network.superframe_len = 40;
        let (best, scores) = select_blanking_rate(&config, &f.network);
        assert_eq!(best, 0);
        assert!(scores.windows(2).all(|w| w[0] > w[1]));
    }
}

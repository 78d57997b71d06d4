//! BS side of the control loop: one super-frame of per-subframe
//! scheduling driven only by the last received [`LongTermControl`].

use crate::abrb::{in_pattern_set, AbrbPattern};
use crate::error::Result;
use crate::net_model::Network;
use crate::rng::{stream, Purpose};
use crate::scheduler::{is_eligible, RateTracker, SubbandType};
use crate::utility::Utility;

use super::control::{LongTermControl, StatisticsReport};
use super::engine::{simulate_subframe, trace_rows, SubbandOutcome, SubbandPlan};

/// Pattern sampling and eligibility of the proposed scheme.
pub struct ProposedPlan<'a> {
    pub control: &'a LongTermControl,
    pub seed: u64,
}

impl SubbandPlan for ProposedPlan<'_> {
    fn configure(&self, subframe: u64, subband: usize) -> (SubbandType, AbrbPattern, Option<usize>) {
        let c = self.control;
        if subband < c.m_a {
            let mut rng = stream(self.seed, Purpose::PatternA, subframe, subband as u64);
            (SubbandType::A, c.pmf_a.sample(&mut rng).clone(), None)
        } else {
            let mut rng = stream(self.seed, Purpose::PatternB, subframe, subband as u64);
            let slot = c.q_b.sample(&mut rng);
            (SubbandType::B, c.profile.patterns()[slot].clone(), Some(slot))
        }
    }

    fn eligible(&self, net: &Network, user: usize, _subband: usize, kind: SubbandType, pattern: &AbrbPattern) -> bool {
        is_eligible(&net.graph, user, kind, pattern)
    }
}

/// Everything needed to run one super-frame at the BSs.
pub struct BsContext<'a> {
    pub net: &'a Network,
    pub seed: u64,
    pub superframe_len: usize,
    pub subbands: usize,
    pub utility: Utility,
    pub weights: &'a [f64],
    pub parallel: bool,
}

pub struct SuperframeOutcome {
    pub report: StatisticsReport,
    /// Per user: MI summed over the super-frame's subframes and subbands.
    pub delivered: Vec<f64>,
}

/// PF scheduling weights `w_k u'(R_k)`.
pub fn pf_weights(utility: &Utility, weights: &[f64], rates: &[f64]) -> Vec<f64> {
    weights.iter().zip(rates).map(|(&w, &r)| w * utility.derivative(r)).collect()
}

/// Per user: MI it received across `outcomes`.
pub(crate) fn delivered_by_user(n_users: usize, outcomes: &[SubbandOutcome]) -> Vec<f64> {
    let mut d = vec![0.0; n_users];
    for o in outcomes {
        for &(k, mi) in o.chosen.iter().flatten() {
            d[k] += mi;
        }
    }
    d
}

/// Runs super-frame `index` and returns the statistics report. The tracker
/// carries the moving-average rates across super-frames.
pub fn run_superframe(
    ctx: &BsContext,
    control: &LongTermControl,
    tracker: &mut RateTracker,
    index: usize,
    mut trace: Option<&mut String>,
) -> Result<SuperframeOutcome> {
    let g = &ctx.net.graph;
    let n = g.n_users();
    let type_a = g.type_a_users();
    let type_b = g.type_b_users();
    let plan = ProposedPlan {
        control,
        seed: ctx.seed,
    };
    tracker.reset_statistics();
    let mut delivered = vec![0.0; n];
    let (mut a_slots, mut b_slots) = (0u64, 0u64);
    for offset in 0..ctx.superframe_len {
        let t = (index * ctx.superframe_len + offset) as u64;
        let mu = pf_weights(&ctx.utility, ctx.weights, &tracker.rates);
        let outcomes = simulate_subframe(ctx.net, ctx.seed, t, ctx.subbands, &mu, &plan, ctx.parallel);
        let now = delivered_by_user(n, &outcomes);
        for o in &outcomes {
            let mut got = vec![None; n];
            for &(k, mi) in o.chosen.iter().flatten() {
                got[k] = Some(mi);
            }
            match o.kind {
                SubbandType::A => {
                    a_slots += 1;
                    for &k in &type_a {
                        let fav = in_pattern_set(&o.pattern, g.serving(k), g)?;
                        tracker.observe_a(k, fav, got[k].unwrap_or(0.0));
                    }
                }
                SubbandType::B => {
                    b_slots += 1;
                    for &k in &type_b {
                        tracker.observe_b(k, &o.pattern, got[k].unwrap_or(0.0));
                    }
                }
            }
        }
        if let Some(out) = trace.as_deref_mut() {
            trace_rows(t, &outcomes, out);
        }
        for (acc, d) in delivered.iter_mut().zip(&now) {
            *acc += d;
        }
        tracker.update_rates(offset, &now);
    }
    Ok(SuperframeOutcome {
        report: StatisticsReport::from_tracker(index, tracker, a_slots, b_slots),
        delivered,
    })
}

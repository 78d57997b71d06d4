//! One subframe across all subbands: channel draws and per-BS scheduling.
//! Subbands are independent given the PF weights, so they may be evaluated
//! on the rayon pool; results come back in subband order.

use rayon::prelude::*;

use crate::abrb::AbrbPattern;
use crate::net_model::{sample_small_scale, Network};
use crate::scheduler::{schedule_with, SubbandType};

/// What happened on one subband in one subframe.
#[derive(Clone, Debug, PartialEq)]
pub struct SubbandOutcome {
    pub kind: SubbandType,
    pub pattern: AbrbPattern,
    /// Profile position of `pattern` on Type B subbands.
    pub slot: Option<usize>,
    /// Per BS: scheduled user and its MI.
    pub chosen: Vec<Option<(usize, f64)>>,
}

/// How a subband is configured and who may be scheduled on it.
pub trait SubbandPlan: Sync {
    fn configure(&self, subframe: u64, subband: usize) -> (SubbandType, AbrbPattern, Option<usize>);

    fn eligible(&self, net: &Network, user: usize, subband: usize, kind: SubbandType, pattern: &AbrbPattern) -> bool;

    /// BSs that carry data on this subband.
    fn bs_active(&self, net: &Network, bs: usize, kind: SubbandType, pattern: &AbrbPattern) -> bool {
        if net.graph.is_macro(bs) {
            pattern.transmits(bs)
        } else {
            kind == SubbandType::A
        }
    }
}

pub fn simulate_subframe<P: SubbandPlan>(
    net: &Network,
    seed: u64,
    subframe: u64,
    subbands: usize,
    pf_weights: &[f64],
    plan: &P,
    parallel: bool,
) -> Vec<SubbandOutcome> {
    let one = |m: usize| {
        let (kind, pattern, slot) = plan.configure(subframe, m);
        let sample = sample_small_scale(&net.state, &net.graph, seed, subframe, m as u64);
        let chosen = (0..net.graph.n_bs())
            .map(|b| {
                if !plan.bs_active(net, b, kind, &pattern) {
                    return None;
                }
                schedule_with(net, b, &pattern, &sample, kind, pf_weights, |k| {
                    plan.eligible(net, k, m, kind, &pattern)
                })
            })
            .collect();
        SubbandOutcome {
            kind,
            pattern,
            slot,
            chosen,
        }
    };
    if parallel {
        (0..subbands).into_par_iter().map(one).collect()
    } else {
        (0..subbands).map(one).collect()
    }
}

/// One row of the optional scheduling trace.
pub fn trace_rows(subframe: u64, outcomes: &[SubbandOutcome], out: &mut String) {
    use std::fmt::Write;
    for (m, o) in outcomes.iter().enumerate() {
        let kind = match o.kind {
            SubbandType::A => 'A',
            SubbandType::B => 'B',
        };
        for (b, c) in o.chosen.iter().enumerate() {
            if let Some((k, mi)) = c {
                let _ = writeln!(out, "{subframe}\t{m}\t{kind}\t{}\t{b}\t{k}\t{mi:.6}", o.pattern);
            }
        }
    }
}

pub const TRACE_HEADER: &str = "subframe\tsubband\ttype\tpattern\tbs\tuser\tmi\n";

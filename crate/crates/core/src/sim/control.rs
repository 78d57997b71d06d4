//! The messages crossing the RRMS/BS boundary and the RRMS itself.
//!
//! BSs only ever see a [`LongTermControl`]; the RRMS only ever sees
//! [`StatisticsReport`]s. Both are plain serializable values.

use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::abrb::{synchronous_pmf, AbrbPattern, AbrbProfile, ProfilePmf, SynchronousAbrbPmf};
use crate::error::{invariant, Error, Result};
use crate::graph_b::{build_interference_graph, InterferenceGraph};
use crate::net_model::{Network, UserType};
use crate::opt_a::{objective_a, solve_qa, EstimateSetA};
use crate::opt_b::{algorithm_b2, solve_qb, B2Result};
use crate::partition::{solve_qs, SplitInputs};
use crate::scheduler::RateTracker;
use crate::utility::Utility;

use super::config::SimulationConfig;

/// RRMS to BS: everything a BS needs for one super-frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LongTermControl {
    /// Super-frame this control was computed for.
    pub superframe: usize,
    pub q_s: f64,
    pub m_a: usize,
    pub m_b: usize,
    pub q_a: Vec<f64>,
    pub pmf_a: SynchronousAbrbPmf,
    pub profile: AbrbProfile,
    pub q_b: ProfilePmf,
}

impl LongTermControl {
    pub fn check(&self, subbands: usize, type_b_users: usize) -> Result<()> {
        if self.m_a + self.m_b != subbands {
            return Err(invariant(
                "subband split",
                format!("{} + {} != {subbands}", self.m_a, self.m_b),
            ));
        }
        if !self.pmf_a.is_nested() {
            return Err(invariant("nested synchronous support", ""));
        }
        for (n, &q) in self.q_a.iter().enumerate() {
            let got = self.pmf_a.marginal_blank(n);
            if (got - q).abs() > 1e-9 {
                return Err(invariant(
                    "marginal consistency",
                    format!("macro {n}: pmf gives {got}, q_A is {q}"),
                ));
            }
        }
        if self.m_b > 0 && !self.q_b.is_simplex(1e-9) {
            return Err(invariant("profile pmf on simplex", format!("{:?}", self.q_b.q)));
        }
        if self.q_b.q.len() != self.profile.len() {
            return Err(invariant("profile pmf length", ""));
        }
        if self.profile.len() > type_b_users.max(1) {
            return Err(invariant(
                "profile size",
                format!("{} patterns for {type_b_users} users", self.profile.len()),
            ));
        }
        Ok(())
    }
}

/// Mean MI of every user under one profile pattern.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternEstimates {
    pub pattern: AbrbPattern,
    pub estimates: Vec<Option<f64>>,
    pub visits: Vec<u64>,
}

/// BS to RRMS: one super-frame of measurements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatisticsReport {
    pub superframe: usize,
    pub favourable: Vec<Option<f64>>,
    pub unfavourable: Vec<Option<f64>>,
    pub favourable_visits: Vec<u64>,
    pub unfavourable_visits: Vec<u64>,
    pub patterns: Vec<PatternEstimates>,
    /// Moving-average rates at the end of the super-frame.
    pub rates: Vec<f64>,
    /// Subframe-subband slots of each type seen.
    pub type_a_slots: u64,
    pub type_b_slots: u64,
}

impl StatisticsReport {
    pub fn from_tracker(superframe: usize, tracker: &RateTracker, type_a_slots: u64, type_b_slots: u64) -> Self {
        Self {
            superframe,
            favourable: tracker.favourable.iter().map(|a| a.mean()).collect(),
            unfavourable: tracker.unfavourable.iter().map(|a| a.mean()).collect(),
            favourable_visits: tracker.favourable.iter().map(|a| a.count).collect(),
            unfavourable_visits: tracker.unfavourable.iter().map(|a| a.count).collect(),
            patterns: tracker
                .per_pattern
                .iter()
                .map(|(p, accs)| PatternEstimates {
                    pattern: p.clone(),
                    estimates: accs.iter().map(|a| a.mean()).collect(),
                    visits: accs.iter().map(|a| a.count).collect(),
                })
                .collect(),
            rates: tracker.rates.clone(),
            type_a_slots,
            type_b_slots,
        }
    }

    pub fn check(&self, net: &Network) -> Result<()> {
        let g = &net.graph;
        for k in 0..g.n_users() {
            let slots = match g.user_type(k) {
                UserType::A => {
                    let seen = self.favourable_visits[k] + self.unfavourable_visits[k];
                    (seen, self.type_a_slots)
                }
                UserType::B => {
                    let seen: u64 = self.patterns.iter().map(|p| p.visits[k]).sum();
                    (seen, self.type_b_slots)
                }
            };
            if slots.0 != slots.1 {
                return Err(invariant(
                    "visit counts",
                    format!("user {k}: {} observations in {} slots", slots.0, slots.1),
                ));
            }
        }
        let values = self
            .favourable
            .iter()
            .chain(&self.unfavourable)
            .chain(self.patterns.iter().flat_map(|p| &p.estimates))
            .flatten()
            .chain(&self.rates);
        for v in values {
            if !v.is_finite() {
                return Err(invariant("finite estimates", format!("{v}")));
            }
        }
        Ok(())
    }
}

/// Diagnostics from one RRMS update.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RrmsRecord {
    /// Type A objective per Type A subband at the new `q_A`.
    pub u_a_model: Option<f64>,
    /// Type B objective per Type B subband at the new `q_B`.
    pub u_b_model: Option<f64>,
    pub qa_iterations: usize,
    pub qa_residual: f64,
    pub profile_recomputed: bool,
}

/// The central controller: keeps the latest estimate of every quantity and
/// turns reports into controls.
pub struct Rrms<'a> {
    net: &'a Network,
    ig: InterferenceGraph,
    config: SimulationConfig,
    utility: Utility,
    subbands: usize,
    weights: Vec<f64>,
    favourable: Vec<Option<f64>>,
    unfavourable: Vec<Option<f64>>,
    pattern_means: BTreeMap<AbrbPattern, Vec<Option<f64>>>,
    b2: Option<B2Result>,
}

impl<'a> Rrms<'a> {
    pub fn new(net: &'a Network, config: &SimulationConfig, subbands: usize) -> Self {
        let n = net.graph.n_users();
        Self {
            net,
            ig: build_interference_graph(&net.graph),
            config: config.clone(),
            utility: config.utility.normalized(),
            subbands,
            weights: vec![1.0; n],
            favourable: vec![None; n],
            unfavourable: vec![None; n],
            pattern_means: BTreeMap::new(),
            b2: None,
        }
    }

    pub fn interference_graph(&self) -> &InterferenceGraph {
        &self.ig
    }

    pub fn b2(&self) -> Option<&B2Result> {
        self.b2.as_ref()
    }

    fn run_b2(&mut self) -> Result<&B2Result> {
        let w: Vec<f64> = self.ig.users().iter().map(|&k| self.weights[k]).collect();
        let result = algorithm_b2(self.net, &self.ig, &w, &self.utility, self.config.b2_options())?;
        Ok(self.b2.insert(result))
    }

    fn group_weights(&self) -> (f64, f64) {
        let g = &self.net.graph;
        let w_a = g.type_a_users().iter().map(|&k| self.weights[k]).sum();
        let w_b = g.type_b_users().iter().map(|&k| self.weights[k]).sum();
        (w_a, w_b)
    }

    /// Control for the warm-up super-frame: every macro blanks half the time,
    /// profile patterns are equally likely and subbands are split by group
    /// weight.
    pub fn initial_control(&mut self) -> Result<LongTermControl> {
        let n_macro = self.net.graph.n_macro();
        let profile = self.run_b2()?.profile.clone();
        let q_a = vec![0.5; n_macro];
        let (w_a, w_b) = self.group_weights();
        if w_a + w_b <= 0.0 {
            return Err(Error::Config("network has no users".into()));
        }
        let m = self.subbands;
        let (q_s, m_a) = match (w_a > 0.0, w_b > 0.0) {
            (true, false) => (1.0, m),
            (false, true) => (0.0, 0),
            _ => {
                let q = w_a / (w_a + w_b);
                (q, ((q * m as f64).round() as usize).clamp(1, m - 1))
            }
        };
        Ok(LongTermControl {
            superframe: 0,
            q_s,
            m_a,
            m_b: m - m_a,
            pmf_a: synchronous_pmf(&q_a)?,
            q_a,
            q_b: ProfilePmf::uniform(profile.len()),
            profile,
        })
    }

    fn absorb(&mut self, report: &StatisticsReport) {
        for k in 0..report.favourable.len() {
            if report.favourable[k].is_some() {
                self.favourable[k] = report.favourable[k];
            }
            if report.unfavourable[k].is_some() {
                self.unfavourable[k] = report.unfavourable[k];
            }
        }
        for p in &report.patterns {
            let slot = self
                .pattern_means
                .entry(p.pattern.clone())
                .or_insert_with(|| vec![None; p.estimates.len()]);
            for (old, new) in slot.iter_mut().zip(&p.estimates) {
                if new.is_some() {
                    *old = *new;
                }
            }
        }
    }

    /// Columns of measured Type B rates, one per profile pattern, over the
    /// interference-graph vertices.
    fn pattern_columns(&self, profile: &AbrbProfile) -> Vec<Vec<f64>> {
        let mut missing = 0usize;
        let columns = profile
            .patterns()
            .iter()
            .map(|p| {
                self.ig
                    .users()
                    .iter()
                    .map(|&k| {
                        let v = self.pattern_means.get(p).and_then(|v| v[k]);
                        v.unwrap_or_else(|| {
                            missing += 1;
                            0.0
                        })
                    })
                    .collect()
            })
            .collect();
        if missing > 0 {
            warn!("{missing} Type B pattern estimates never observed; treated as zero");
        }
        columns
    }

    /// Consumes one report and produces the next control. `current` is the
    /// latest control issued and serves as the warm start.
    pub fn update(
        &mut self,
        report: &StatisticsReport,
        current: &LongTermControl,
    ) -> Result<(LongTermControl, RrmsRecord)> {
        self.absorb(report);
        let g = &self.net.graph;
        let next = report.superframe + 1;
        let mut record = RrmsRecord::default();

        let est = EstimateSetA::from_graph(g, &self.weights, &self.favourable, &self.unfavourable)?;
        let q_a = if est.users.is_empty() {
            current.q_a.clone()
        } else {
            let sol = solve_qa(&est, &self.utility, Some(&current.q_a), self.config.qa_options())?;
            record.qa_iterations = sol.iterations;
            record.qa_residual = sol.residual;
            record.u_a_model = Some(sol.value);
            sol.q
        };

        let mut profile = current.profile.clone();
        let mut q_b = current.q_b.clone();
        let mut profile_changed = false;
        if next % self.config.profile_period == 0 {
            record.profile_recomputed = true;
            let b2 = self.run_b2()?;
            if b2.profile != profile {
                profile = b2.profile.clone();
                q_b = b2.profile_q.clone();
                profile_changed = true;
            }
        }
        if !self.ig.is_empty() {
            let columns = self.pattern_columns(&profile);
            let w: Vec<f64> = self.ig.users().iter().map(|&k| self.weights[k]).collect();
            if !profile_changed {
                match solve_qb(&columns, &w, &self.utility, Some(&q_b.q)) {
                    Ok((pmf, _)) => q_b = pmf,
                    Err(Error::Degenerate(msg)) => warn!("keeping previous profile pmf: {msg}"),
                    Err(e) => return Err(e),
                }
            }
            let rates: Vec<f64> = (0..w.len())
                .map(|v| columns.iter().zip(&q_b.q).map(|(c, &q)| q * c[v]).sum())
                .collect();
            record.u_b_model = Some(w.iter().zip(&rates).map(|(&wk, &r)| wk * self.utility.value(r)).sum());
        }

        let (w_a, w_b) = self.group_weights();
        let inputs = SplitInputs {
            u_a: (!est.users.is_empty()).then(|| objective_a(&q_a, &est, &self.utility)),
            u_b: record.u_b_model,
            w_a,
            w_b,
        };
        let split = solve_qs(&inputs, &self.utility, self.subbands)?;
        let control = LongTermControl {
            superframe: next,
            q_s: split.q_s(),
            m_a: split.m_a,
            m_b: split.m_b,
            pmf_a: synchronous_pmf(&q_a)?,
            q_a,
            profile,
            q_b,
        };
        Ok((control, record))
    }
}

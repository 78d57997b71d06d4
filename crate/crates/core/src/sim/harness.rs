//! Drives whole runs: the two-timescale loop for the proposed scheme and
//! the fixed-policy loops for the baselines.

use crate::baselines::{run_baseline1, run_baseline2};
use crate::error::Result;
use crate::net_model::Network;
use crate::scheduler::RateTracker;

use super::bs::{run_superframe, BsContext};
use super::config::ScenarioConfig;
use super::control::{LongTermControl, Rrms};
use super::engine::TRACE_HEADER;
use super::metrics::{
    compute_metrics, group_utility, Algorithm, Header, MetricsReport, ProfileRecord, SuperframeRecord, SCHEMA,
};

pub struct SimulationOutput {
    pub report: MetricsReport,
    /// Scheduling trace as TSV, when requested.
    pub trace: Option<String>,
}

pub fn run_simulation(config: &ScenarioConfig, algorithm: Algorithm) -> Result<MetricsReport> {
    Ok(run_simulation_traced(config, algorithm, false)?.report)
}

pub fn run_simulation_traced(config: &ScenarioConfig, algorithm: Algorithm, trace: bool) -> Result<SimulationOutput> {
    config.validate()?;
    let net = Network::generate(&config.network, config.network.seed)?;
    run_on_network(config, &net, algorithm, trace)
}

/// Runs `algorithm` on an already built network, e.g. a fixture.
pub fn run_on_network(
    config: &ScenarioConfig,
    net: &Network,
    algorithm: Algorithm,
    trace: bool,
) -> Result<SimulationOutput> {
    config.validate()?;
    let mut text = trace.then(|| String::from(TRACE_HEADER));
    let report = match algorithm {
        Algorithm::Proposed => run_proposed(config, net, text.as_mut())?,
        Algorithm::Baseline1 => run_baseline1(config, net, text.as_mut())?,
        Algorithm::Baseline2 => run_baseline2(config, net, text.as_mut())?,
    };
    Ok(SimulationOutput { report, trace: text })
}

fn profile_record(rrms: &Rrms, control: &LongTermControl, superframe: usize) -> Option<ProfileRecord> {
    let b2 = rrms.b2()?;
    let ig = rrms.interference_graph();
    let sets = b2
        .theta
        .iter()
        .zip(&b2.q)
        .filter(|(_, &q)| q > 0.0)
        .map(|(set, _)| set.iter().map(|&v| ig.user(v)).collect())
        .collect();
    Some(ProfileRecord {
        superframe,
        patterns: control.profile.patterns().to_vec(),
        sets,
        value: b2.value,
        exact: b2.exact,
    })
}

/// The proposed scheme. Super-frame `s` runs on the control broadcast
/// after super-frame `s - 1 - broadcast_delay` (the warm-up control before
/// that).
pub fn run_proposed(config: &ScenarioConfig, net: &Network, mut trace: Option<&mut String>) -> Result<MetricsReport> {
    let sim = &config.simulation;
    let g = &net.graph;
    let n = g.n_users();
    let subbands = config.network.subbands;
    let len = config.superframe_len();
    let utility = sim.utility.normalized();
    let weights = vec![1.0; n];
    let ctx = BsContext {
        net,
        seed: config.network.seed,
        superframe_len: len,
        subbands,
        utility,
        weights: &weights,
        parallel: sim.parallel,
    };
    let type_a = g.type_a_users();
    let type_b = g.type_b_users();

    let mut rrms = Rrms::new(net, sim, subbands);
    let mut broadcasts = vec![rrms.initial_control()?];
    let mut profiles: Vec<ProfileRecord> = profile_record(&rrms, &broadcasts[0], 0).into_iter().collect();
    let mut tracker = RateTracker::new(n);
    let mut history = Vec::with_capacity(sim.superframes);
    let mut records = Vec::with_capacity(sim.superframes);
    for s in 0..sim.superframes {
        let control = broadcasts[s.saturating_sub(sim.broadcast_delay)].clone();
        if cfg!(debug_assertions) {
            control.check(subbands, type_b.len())?;
        }
        let out = run_superframe(&ctx, &control, &mut tracker, s, trace.as_deref_mut())?;
        if cfg!(debug_assertions) {
            out.report.check(net)?;
        }
        let rates: Vec<f64> = out.delivered.iter().map(|d| d / len as f64).collect();
        let latest = broadcasts.last().expect("initial control");
        let (next, rec) = rrms.update(&out.report, latest)?;
        if next.profile != latest.profile {
            profiles.extend(profile_record(&rrms, &next, s + 1));
        }
        let u_a = group_utility(&utility, &type_a, &rates);
        let u_b = group_utility(&utility, &type_b, &rates);
        records.push(SuperframeRecord {
            superframe: s,
            u_a,
            u_b,
            total: u_a + u_b,
            u_a_model: rec.u_a_model,
            u_b_model: rec.u_b_model,
            q_s: control.q_s,
            m_a: control.m_a,
            m_b: control.m_b,
            q_a: control.q_a.clone(),
            q_b: control.q_b.q.clone(),
            blanking_rate: None,
        });
        history.push(rates);
        broadcasts.push(next);
    }
    let (summary, per_user) = compute_metrics(&history, g, config.network.subband_hz())?;
    Ok(MetricsReport {
        header: Header {
            schema: SCHEMA.into(),
            algorithm: Algorithm::Proposed,
            seed: config.network.seed,
            config: config.clone(),
            baseline: None,
        },
        superframes: records,
        profiles,
        summary,
        per_user,
    })
}

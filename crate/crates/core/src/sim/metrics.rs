//! Run summaries and their line-delimited JSON / TSV renderings.

use std::fmt::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::abrb::AbrbPattern;
use crate::error::{Error, Result};
use crate::net_model::{Category, TopologyGraph, UserType};
use crate::utility::Utility;

use super::config::ScenarioConfig;

pub const SCHEMA: &str = "hetnet-metrics/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Proposed,
    Baseline1,
    Baseline2,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Proposed, Algorithm::Baseline1, Algorithm::Baseline2];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Proposed => "proposed",
            Algorithm::Baseline1 => "baseline1",
            Algorithm::Baseline2 => "baseline2",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?} (proposed, baseline1, baseline2)")))
    }
}

/// Per super-frame: the control in force and the utilities it achieved.
/// Realized utilities use each user's mean MI per subframe (summed over
/// subbands) within the super-frame.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SuperframeRecord {
    pub superframe: usize,
    pub u_a: f64,
    pub u_b: f64,
    pub total: f64,
    /// RRMS prediction for the next super-frame, per Type A subband.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_a_model: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_b_model: Option<f64>,
    pub q_s: f64,
    pub m_a: usize,
    pub m_b: usize,
    pub q_a: Vec<f64>,
    pub q_b: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blanking_rate: Option<f64>,
}

/// A profile in force from `superframe` on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub superframe: usize,
    pub patterns: Vec<AbrbPattern>,
    /// Independent sets (user ids) behind the patterns.
    pub sets: Vec<Vec<usize>>,
    pub value: f64,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserRate {
    pub user: usize,
    pub serving: usize,
    pub category: Category,
    pub user_type: UserType,
    /// Mean spectral efficiency per subframe summed over subbands.
    pub bits_per_hz: f64,
    pub mbps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalMetrics {
    pub users: usize,
    /// Total throughput per macro cell area.
    pub cell_capacity_mbps: f64,
    pub mean_kbps: f64,
    pub worst10_kbps: f64,
    pub macro_i_kbps: Option<f64>,
    pub pico_i_kbps: Option<f64>,
    pub macro_n_kbps: Option<f64>,
    pub pico_n_kbps: Option<f64>,
    /// Sum of log mean rates in bits/s/Hz.
    pub pf_utility: f64,
    pub group_counts: GroupCounts,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupCounts {
    pub macro_n: usize,
    pub macro_i: usize,
    pub pico_n: usize,
    pub pico_i: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub schema: String,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub config: ScenarioConfig,
    /// Baseline parameterization, when the run is a baseline.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub header: Header,
    pub superframes: Vec<SuperframeRecord>,
    pub profiles: Vec<ProfileRecord>,
    pub summary: FinalMetrics,
    pub per_user: Vec<UserRate>,
}

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Line<'a> {
    Header(&'a Header),
    Superframe(&'a SuperframeRecord),
    Profile(&'a ProfileRecord),
    Final(&'a FinalMetrics),
}

impl MetricsReport {
    /// One JSON object per line: header, super-frames and profiles in time
    /// order, final summary last.
    pub fn to_jsonl(&self) -> String {
        let mut lines = vec![serde_json::to_string(&Line::Header(&self.header))];
        let mut profiles = self.profiles.iter().peekable();
        for sf in &self.superframes {
            while let Some(p) = profiles.next_if(|p| p.superframe <= sf.superframe) {
                lines.push(serde_json::to_string(&Line::Profile(p)));
            }
            lines.push(serde_json::to_string(&Line::Superframe(sf)));
        }
        for p in profiles {
            lines.push(serde_json::to_string(&Line::Profile(p)));
        }
        lines.push(serde_json::to_string(&Line::Final(&self.summary)));
        let mut out = String::new();
        for l in lines {
            out.push_str(&l.expect("metrics serialize"));
            out.push('\n');
        }
        out
    }

    pub fn users_tsv(&self) -> String {
        let mut out = String::from("user\tserving\tcategory\ttype\tbits_per_hz\tmbps\n");
        for u in &self.per_user {
            let _ = writeln!(
                out,
                "{}\t{}\t{:?}\t{:?}\t{:.6}\t{:.6}",
                u.user, u.serving, u.category, u.user_type, u.bits_per_hz, u.mbps
            );
        }
        out
    }
}

/// Utility of the per-user mean rates over one group.
pub fn group_utility(utility: &Utility, users: &[usize], rates: &[f64]) -> f64 {
    users.iter().map(|&k| utility.value(rates[k])).sum()
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values {
        sum += v;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

/// Summarizes a rate history. `history[s][k]` is user `k`'s mean MI per
/// subframe in super-frame `s`, summed over subbands.
pub fn compute_metrics(
    history: &[Vec<f64>],
    graph: &TopologyGraph,
    subband_hz: f64,
) -> Result<(FinalMetrics, Vec<UserRate>)> {
    if history.is_empty() {
        return Err(Error::Config("empty rate history".into()));
    }
    let n = graph.n_users();
    let mut bits = vec![0.0; n];
    for row in history {
        for (b, r) in bits.iter_mut().zip(row) {
            *b += r / history.len() as f64;
        }
    }
    let users: Vec<UserRate> = (0..n)
        .map(|k| UserRate {
            user: k,
            serving: graph.serving(k),
            category: graph.category(k),
            user_type: graph.user_type(k),
            bits_per_hz: bits[k],
            mbps: bits[k] * subband_hz / 1e6,
        })
        .collect();
    let kbps: Vec<f64> = users.iter().map(|u| u.mbps * 1e3).collect();
    let group = |c: Category| mean((0..n).filter(|&k| graph.category(k) == c).map(|k| kbps[k]));
    let mut sorted = kbps.clone();
    sorted.sort_by(f64::total_cmp);
    let bottom = n.div_ceil(10);
    let count = |c: Category| (0..n).filter(|&k| graph.category(k) == c).count();
    let summary = FinalMetrics {
        users: n,
        cell_capacity_mbps: users.iter().map(|u| u.mbps).sum::<f64>() / graph.n_macro().max(1) as f64,
        mean_kbps: mean(kbps.iter().copied()).unwrap_or(0.0),
        worst10_kbps: mean(sorted[..bottom].iter().copied()).unwrap_or(0.0),
        macro_i_kbps: group(Category::MacroI),
        pico_i_kbps: group(Category::PicoI),
        macro_n_kbps: group(Category::MacroN),
        pico_n_kbps: group(Category::PicoN),
        pf_utility: bits.iter().map(|&r| Utility::<f64>::ProportionalFair.value(r)).sum(),
        group_counts: GroupCounts {
            macro_n: count(Category::MacroN),
            macro_i: count(Category::MacroI),
            pico_n: count(Category::PicoN),
            pico_i: count(Category::PicoI),
        },
    };
    Ok((summary, users))
}

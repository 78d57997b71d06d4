//! Plain-text description of small hand-built networks.
//!
//! ```text
//! # comment
//! bs 1 macro
//! bs 3 pico
//! user 4 serving 3
//! edge 2 4          # bs, user
//! snr 2 4 12.5      # optional: P*sigma^2/noise in dB for that link
//! ```
//!
//! Labels are arbitrary integers. Macros are renumbered first, in order of
//! appearance, then picos; users keep their order of appearance. Links
//! without an `snr` line default to 20 dB (serving) or 10 dB (interfering).
//! Non-links get a negligible gain. Powers and noise are unit.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::geometry::LargeScaleState;
use super::topology::{RadioParams, TopologyGraph};
use super::Network;
use crate::error::{Error, Result};
use crate::scalar::Real;

const SERVING_SNR_DB: f64 = 20.0;
const INTERFERER_SNR_DB: f64 = 10.0;
const NON_EDGE_DB: f64 = -60.0;

/// A parsed fixture with the original labels retained.
#[derive(Clone, Debug)]
pub struct Fixture<T: Real = f64> {
    pub bs_labels: Vec<u64>,
    pub user_labels: Vec<u64>,
    pub network: Network<T>,
}

impl<T: Real> Fixture<T> {
    pub fn bs_index(&self, label: u64) -> Result<usize> {
        self.bs_labels
            .iter()
            .position(|&l| l == label)
            .ok_or(Error::UnknownBs(label as usize))
    }

    pub fn user_index(&self, label: u64) -> Result<usize> {
        self.user_labels
            .iter()
            .position(|&l| l == label)
            .ok_or(Error::UnknownUser(label as usize))
    }

    pub fn graph(&self) -> &TopologyGraph {
        &self.network.graph
    }
}

fn fail(line: usize, msg: impl Into<String>) -> Error {
    Error::Fixture {
        line,
        msg: msg.into(),
    }
}

pub fn parse_fixture<T: Real>(text: &str) -> Result<Fixture<T>> {
    let mut macros = Vec::new();
    let mut picos = Vec::new();
    let mut users: Vec<(u64, u64)> = Vec::new();
    let mut edges: Vec<(usize, u64, u64)> = Vec::new();
    let mut snrs: BTreeMap<(u64, u64), f64> = BTreeMap::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        let num = |w: &str| w.parse::<u64>().map_err(|_| fail(line_no, format!("bad id `{w}`")));
        match words.as_slice() {
            ["bs", id, "macro"] => macros.push(num(id)?),
            ["bs", id, "pico"] => picos.push(num(id)?),
            ["user", id, "serving", bs] => users.push((num(id)?, num(bs)?)),
            ["edge", bs, user] => edges.push((line_no, num(bs)?, num(user)?)),
            ["snr", bs, user, db] => {
                let v: f64 = db.parse().map_err(|_| fail(line_no, format!("bad snr `{db}`")))?;
                snrs.insert((num(bs)?, num(user)?), v);
            }
            _ => return Err(fail(line_no, format!("unrecognized line `{line}`"))),
        }
    }

    if macros.is_empty() {
        return Err(fail(0, "fixture declares no macro"));
    }
    let bs_labels: Vec<u64> = macros.iter().chain(&picos).copied().collect();
    let user_labels: Vec<u64> = users.iter().map(|u| u.0).collect();
    let bs_idx = |l: u64, line: usize| {
        bs_labels
            .iter()
            .position(|&x| x == l)
            .ok_or_else(|| fail(line, format!("unknown bs {l}")))
    };
    let user_idx = |l: u64, line: usize| {
        user_labels
            .iter()
            .position(|&x| x == l)
            .ok_or_else(|| fail(line, format!("unknown user {l}")))
    };

    let serving = users
        .iter()
        .map(|&(_, b)| bs_idx(b, 0))
        .collect::<Result<Vec<_>>>()?;
    let mut links = vec![Vec::new(); users.len()];
    for &(line, b, u) in &edges {
        links[user_idx(u, line)?].push(bs_idx(b, line)?);
    }
    let graph = TopologyGraph::from_links(macros.len(), bs_labels.len(), serving, links)?;

    let n_bs = bs_labels.len();
    let mut sigma_sq = Vec::with_capacity(users.len() * n_bs);
    for (k, &ul) in user_labels.iter().enumerate() {
        for (n, &bl) in bs_labels.iter().enumerate() {
            let db = match snrs.get(&(bl, ul)) {
                Some(&v) => v,
                None if graph.serving(k) == n => SERVING_SNR_DB,
                None if graph.has_edge(k, n) => INTERFERER_SNR_DB,
                None => NON_EDGE_DB,
            };
            sigma_sq.push(T::lit(10f64.powf(db / 10.0)));
        }
    }
    let state = LargeScaleState {
        n_macro: macros.len(),
        bs_positions: vec![[0.0, 0.0]; n_bs],
        user_positions: vec![[0.0, 0.0]; users.len()],
        macro_cells: super::geometry::hex_spiral(macros.len()),
        pico_area: vec![0; picos.len()],
        sigma_sq,
    };
    let radio = RadioParams {
        power: vec![T::one(); n_bs],
        noise: T::one(),
    };
    Ok(Fixture {
        bs_labels,
        user_labels,
        network: Network {
            state,
            graph,
            radio,
        },
    })
}

/// The two-macro, one-pico, five-user example network.
pub const FIG2: &str = "\
# two macros (1, 2), one pico (3), five users
bs 1 macro
bs 2 macro
bs 3 pico
user 1 serving 1
user 2 serving 2
user 3 serving 3
user 4 serving 3
user 5 serving 2
edge 1 1
edge 1 5
edge 2 2
edge 2 4
edge 2 5
edge 3 3
edge 3 4
";

/// Three macros and four macro I-users whose interference graph has
/// edges l1-l2, l2-l3, l2-l4, l3-l4.
pub const FIG4: &str = "\
bs 1 macro
bs 2 macro
bs 3 macro
user 1 serving 1
user 2 serving 2
user 3 serving 3
user 4 serving 3
edge 1 1
edge 2 1
edge 2 2
edge 1 2
edge 3 2
edge 3 3
edge 2 3
edge 3 4
edge 2 4
";

/// Renders a network back into the fixture format (labels are 1-based
/// indices).
pub fn write_fixture<T: Real>(network: &Network<T>) -> String {
    let g = &network.graph;
    let mut out = String::new();
    for n in 0..g.n_bs() {
        let tier = if g.is_macro(n) { "macro" } else { "pico" };
        let _ = writeln!(out, "bs {} {tier}", n + 1);
    }
    for k in 0..g.n_users() {
        let _ = writeln!(out, "user {} serving {}", k + 1, g.serving(k) + 1);
    }
    for k in 0..g.n_users() {
        for &n in g.links(k) {
            let _ = writeln!(out, "edge {} {}", n + 1, k + 1);
        }
    }
    for k in 0..g.n_users() {
        for &n in g.links(k) {
            let snr = network.radio.received(&network.state, k, n) / network.radio.noise;
            let _ = writeln!(out, "snr {} {} {}", n + 1, k + 1, 10.0 * snr.as_f64().log10());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_fixture::<f64>("bs 1 macro\nuser 1 serving 9\n").unwrap_err();
        assert!(matches!(err, Error::Fixture { .. }));
        let err = parse_fixture::<f64>("bs 1 macro\nfoo\n").unwrap_err();
        assert!(matches!(err, Error::Fixture { line: 2, .. }));
    }

    #[test]
    fn round_trip_preserves_graph() {
        let f: Fixture = parse_fixture(FIG2).unwrap();
        let again: Fixture = parse_fixture(&write_fixture(&f.network)).unwrap();
        assert_eq!(f.network.graph, again.network.graph);
        for (a, b) in f.network.state.sigma_sq.iter().zip(&again.network.state.sigma_sq) {
            if *a > 1e-5 {
                assert!((a - b).abs() / a < 1e-9);
            }
        }
    }
}

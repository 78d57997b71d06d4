//! Cell selection and the bipartite BS-user topology graph.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::config::{db_to_linear, NetworkConfig};
use super::geometry::LargeScaleState;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Transmit powers and noise in linear units (mW).
#[derive(Clone, Debug, PartialEq)]
pub struct RadioParams<T: Real = f64> {
    pub power: Vec<T>,
    pub noise: T,
}

impl<T: Real> RadioParams<T> {
    pub fn from_config(config: &NetworkConfig, n_bs: usize) -> Self {
        let power = (0..n_bs)
            .map(|n| {
                let dbm = if n < config.n_macro {
                    config.macro_power_dbm
                } else {
                    config.pico_power_dbm
                };
                T::lit(db_to_linear(dbm))
            })
            .collect();
        Self {
            power,
            noise: T::lit(db_to_linear(config.noise_dbm())),
        }
    }

    pub fn received(&self, state: &LargeScaleState<T>, user: usize, bs: usize) -> T {
        self.power[bs] * state.gain(user, bs)
    }
}

/// Whether a user sees exactly its serving BS or also interferers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UserClass {
    N,
    I,
}

/// Subband group a user is served on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UserType {
    A,
    B,
}

/// Tier and class combined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Category {
    MacroN,
    MacroI,
    PicoN,
    PicoI,
}

/// Biased cell selection: the strongest pico wins when its biased received
/// power is at least that of the strongest macro. Ties go to the lowest id.
pub fn select_cells<T: Real>(
    state: &LargeScaleState<T>,
    radio: &RadioParams<T>,
    bias_linear: T,
) -> Vec<usize> {
    let n_macro = state.n_macro;
    let n_bs = state.n_bs();
    (0..state.n_users())
        .map(|k| {
            let best = |range: std::ops::Range<usize>| {
                range
                    .map(|n| (n, radio.received(state, k, n)))
                    .fold(None, |acc: Option<(usize, T)>, (n, p)| match acc {
                        Some((_, q)) if p <= q => acc,
                        _ => Some((n, p)),
                    })
            };
            let macro_best = best(0..n_macro).expect("at least one macro");
            match best(n_macro..n_bs) {
                Some((pico, p)) if bias_linear * p >= macro_best.1 => pico,
                _ => macro_best.0,
            }
        })
        .collect()
}

pub fn cell_selection<T: Real>(state: &LargeScaleState<T>, config: &NetworkConfig) -> Vec<usize> {
    let radio = RadioParams::from_config(config, state.n_bs());
    select_cells(state, &radio, T::lit(db_to_linear(config.bias_db)))
}

/// Serving map, edges and the user classification derived from them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TopologyGraph {
    n_macro: usize,
    n_bs: usize,
    serving: Vec<usize>,
    /// Sorted BS list per user, serving BS included.
    links: Vec<Vec<usize>>,
    macro_neighbors: Vec<Vec<usize>>,
    pico_neighbors: Vec<Vec<usize>>,
    /// Neighbor-macro set of each pico (empty for macros).
    pico_macro_set: Vec<Vec<usize>>,
    served: Vec<Vec<usize>>,
    categories: Vec<Category>,
}

impl TopologyGraph {
    /// Builds the graph from per-user link lists (serving links are added
    /// if missing), classifies users and makes all I-users of a pico share
    /// one neighbor-macro set by taking the union and adding the edges.
    pub fn from_links(
        n_macro: usize,
        n_bs: usize,
        serving: Vec<usize>,
        links: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if n_macro == 0 || n_macro > n_bs {
            return Err(Error::Config("need at least one macro".into()));
        }
        if links.len() != serving.len() {
            return Err(Error::Config("links and serving map differ in length".into()));
        }
        let mut sets: Vec<BTreeSet<usize>> = Vec::with_capacity(serving.len());
        for (&b, l) in serving.iter().zip(&links) {
            if b >= n_bs {
                return Err(Error::UnknownBs(b));
            }
            let mut set: BTreeSet<usize> = l.iter().copied().collect();
            if let Some(&bad) = set.iter().find(|&&n| n >= n_bs) {
                return Err(Error::UnknownBs(bad));
            }
            set.insert(b);
            sets.push(set);
        }

        let mut pico_macro_set = vec![Vec::new(); n_bs];
        for pico in n_macro..n_bs {
            let members: Vec<usize> = (0..serving.len())
                .filter(|&k| serving[k] == pico && sets[k].len() > 1)
                .collect();
            let union: BTreeSet<usize> = members
                .iter()
                .flat_map(|&k| sets[k].iter().copied().filter(|&n| n < n_macro))
                .collect();
            for &k in &members {
                sets[k].extend(union.iter().copied());
            }
            pico_macro_set[pico] = union.into_iter().collect();
        }

        let mut served = vec![Vec::new(); n_bs];
        let mut macro_neighbors = Vec::with_capacity(serving.len());
        let mut pico_neighbors = Vec::with_capacity(serving.len());
        let mut categories = Vec::with_capacity(serving.len());
        for (k, set) in sets.iter().enumerate() {
            let b = serving[k];
            served[b].push(k);
            macro_neighbors.push(set.iter().copied().filter(|&n| n != b && n < n_macro).collect());
            pico_neighbors.push(set.iter().copied().filter(|&n| n != b && n >= n_macro).collect());
            let interfered = set.len() > 1;
            categories.push(match (b < n_macro, interfered) {
                (true, false) => Category::MacroN,
                (true, true) => Category::MacroI,
                (false, false) => Category::PicoN,
                (false, true) => Category::PicoI,
            });
        }

        Ok(Self {
            n_macro,
            n_bs,
            serving,
            links: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
            macro_neighbors,
            pico_neighbors,
            pico_macro_set,
            served,
            categories,
        })
    }

    pub fn n_macro(&self) -> usize {
        self.n_macro
    }

    pub fn n_bs(&self) -> usize {
        self.n_bs
    }

    pub fn n_users(&self) -> usize {
        self.serving.len()
    }

    pub fn is_macro(&self, bs: usize) -> bool {
        bs < self.n_macro
    }

    pub fn serving(&self, user: usize) -> usize {
        self.serving[user]
    }

    pub fn serving_map(&self) -> &[usize] {
        &self.serving
    }

    pub fn links(&self, user: usize) -> &[usize] {
        &self.links[user]
    }

    pub fn has_edge(&self, user: usize, bs: usize) -> bool {
        self.links[user].binary_search(&bs).is_ok()
    }

    /// Interfering macros of a user.
    pub fn macro_neighbors(&self, user: usize) -> &[usize] {
        &self.macro_neighbors[user]
    }

    /// Interfering picos of a user.
    pub fn pico_neighbors(&self, user: usize) -> &[usize] {
        &self.pico_neighbors[user]
    }

    /// Macros interfering with the I-users of `pico`; empty for macros.
    pub fn pico_macro_set(&self, bs: usize) -> &[usize] {
        &self.pico_macro_set[bs]
    }

    pub fn served(&self, bs: usize) -> &[usize] {
        &self.served[bs]
    }

    pub fn category(&self, user: usize) -> Category {
        self.categories[user]
    }

    pub fn class(&self, user: usize) -> UserClass {
        match self.categories[user] {
            Category::MacroN | Category::PicoN => UserClass::N,
            _ => UserClass::I,
        }
    }

    pub fn user_type(&self, user: usize) -> UserType {
        match self.categories[user] {
            Category::MacroI => UserType::B,
            _ => UserType::A,
        }
    }

    pub fn type_a_users(&self) -> Vec<usize> {
        (0..self.n_users()).filter(|&k| self.user_type(k) == UserType::A).collect()
    }

    pub fn type_b_users(&self) -> Vec<usize> {
        (0..self.n_users()).filter(|&k| self.user_type(k) == UserType::B).collect()
    }

    /// True when every I-user of each pico has the pico's neighbor-macro set.
    pub fn shared_pico_neighbors_hold(&self) -> bool {
        (self.n_macro..self.n_bs).all(|pico| {
            self.served[pico]
                .iter()
                .filter(|&&k| self.class(k) == UserClass::I)
                .all(|&k| self.macro_neighbors[k] == self.pico_macro_set[pico])
        })
    }

    pub fn edge_count(&self) -> usize {
        self.links.iter().map(Vec::len).sum()
    }
}

/// Keeps a non-serving link when its received power clears both the
/// interference-to-noise threshold and the margin below the serving link.
pub fn build_topology_graph<T: Real>(
    state: &LargeScaleState<T>,
    serving: &[usize],
    config: &NetworkConfig,
) -> Result<TopologyGraph> {
    let radio = RadioParams::from_config(config, state.n_bs());
    let inr = T::lit(db_to_linear(config.edge_threshold_db)) * radio.noise;
    let margin = T::lit(db_to_linear(-config.edge_margin_db));
    let links = (0..state.n_users())
        .map(|k| {
            let own = radio.received(state, k, serving[k]);
            (0..state.n_bs())
                .filter(|&n| {
                    let p = radio.received(state, k, n);
                    n == serving[k] || (p >= inr && p >= own * margin)
                })
                .collect()
        })
        .collect();
    TopologyGraph::from_links(state.n_macro, state.n_bs(), serving.to_vec(), links)
}

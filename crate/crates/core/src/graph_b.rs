//! Conflict graph over macro I-users and its independent sets.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::net_model::{Network, TopologyGraph};
use crate::scalar::Real;

/// Default vertex cap for exact enumeration.
pub const MIS_CAP: usize = 25;

/// Undirected conflict graph; vertex `v` is user `users[v]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterferenceGraph {
    users: Vec<usize>,
    serving: Vec<usize>,
    adjacency: Vec<Vec<bool>>,
}

impl InterferenceGraph {
    pub fn from_edges(users: Vec<usize>, serving: Vec<usize>, edges: &[(usize, usize)]) -> Result<Self> {
        let n = users.len();
        if serving.len() != n {
            return Err(Error::Config("serving list length differs from vertex count".into()));
        }
        let mut adjacency = vec![vec![false; n]; n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::Config(format!("edge ({a}, {b}) references a missing vertex")));
            }
            if a != b {
                adjacency[a][b] = true;
                adjacency[b][a] = true;
            }
        }
        Ok(Self {
            users,
            serving,
            adjacency,
        })
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn users(&self) -> &[usize] {
        &self.users
    }

    pub fn user(&self, vertex: usize) -> usize {
        self.users[vertex]
    }

    pub fn serving(&self, vertex: usize) -> usize {
        self.serving[vertex]
    }

    pub fn vertex_of(&self, user: usize) -> Option<usize> {
        self.users.iter().position(|&u| u == user)
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a][b]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].iter().filter(|&&x| x).count()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.len() {
            for b in a + 1..self.len() {
                if self.adjacency[a][b] {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn is_independent(&self, set: &[usize]) -> bool {
        set.iter()
            .enumerate()
            .all(|(i, &a)| set[i + 1..].iter().all(|&b| a != b && !self.adjacency[a][b]))
    }

    pub fn is_maximal_independent(&self, set: &[usize]) -> bool {
        self.is_independent(set)
            && (0..self.len()).all(|v| set.contains(&v) || set.iter().any(|&s| self.adjacency[v][s]))
    }

    /// Serving macros of the set's members, sorted and deduplicated.
    pub fn footprint(&self, set: &[usize]) -> Vec<usize> {
        let mut macros: Vec<usize> = set.iter().map(|&v| self.serving[v]).collect();
        macros.sort_unstable();
        macros.dedup();
        macros
    }

    /// Adds vertices (lowest index first) until the set is maximal.
    pub fn maximalize(&self, set: &[usize]) -> Vec<usize> {
        let mut out = set.to_vec();
        for v in 0..self.len() {
            if !out.contains(&v) && out.iter().all(|&s| !self.adjacency[v][s]) {
                out.push(v);
            }
        }
        out.sort_unstable();
        out
    }

    /// Adjacency-list text: `vertex <user> <serving>` then `edge <a> <b>`
    /// lines with vertex indices.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in 0..self.len() {
            let _ = writeln!(out, "vertex {} {}", self.users[v], self.serving[v]);
        }
        for (a, b) in self.edges() {
            let _ = writeln!(out, "edge {a} {b}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut users = Vec::new();
        let mut serving = Vec::new();
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let words: Vec<&str> = line.split_whitespace().collect();
            let num = |w: &str| {
                w.parse::<usize>().map_err(|_| Error::Fixture {
                    line: i + 1,
                    msg: format!("bad number `{w}`"),
                })
            };
            match words.as_slice() {
                ["vertex", u, b] => {
                    users.push(num(u)?);
                    serving.push(num(b)?);
                }
                ["edge", a, b] => edges.push((num(a)?, num(b)?)),
                _ => {
                    return Err(Error::Fixture {
                        line: i + 1,
                        msg: format!("unrecognized line `{line}`"),
                    })
                }
            }
        }
        Self::from_edges(users, serving, &edges)
    }
}

/// Two macro I-users conflict when either one has an edge to the other's
/// serving macro.
pub fn build_interference_graph(graph: &TopologyGraph) -> InterferenceGraph {
    let users = graph.type_b_users();
    let serving: Vec<usize> = users.iter().map(|&k| graph.serving(k)).collect();
    let n = users.len();
    let mut adjacency = vec![vec![false; n]; n];
    for a in 0..n {
        for b in a + 1..n {
            let (ka, kb) = (users[a], users[b]);
            if graph.has_edge(ka, serving[b]) || graph.has_edge(kb, serving[a]) {
                adjacency[a][b] = true;
                adjacency[b][a] = true;
            }
        }
    }
    InterferenceGraph {
        users,
        serving,
        adjacency,
    }
}

/// All maximal independent sets with their macro footprints, sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MisSet {
    pub sets: Vec<Vec<usize>>,
    pub footprints: Vec<Vec<usize>>,
}

fn bits_to_vec(mut bits: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(bits.count_ones() as usize);
    while bits != 0 {
        let v = bits.trailing_zeros() as usize;
        out.push(v);
        bits &= bits - 1;
    }
    out
}

/// Exact enumeration by Bron-Kerbosch with pivoting on the complement
/// graph. Fails above `cap` vertices.
pub fn enumerate_mis(ig: &InterferenceGraph, cap: usize) -> Result<MisSet> {
    let n = ig.len();
    if n > cap.min(63) {
        return Err(Error::TooManyVertices { vertices: n, cap });
    }
    if n == 0 {
        return Ok(MisSet {
            sets: vec![],
            footprints: vec![],
        });
    }
    let all = (1u64 << n) - 1;
    let complement: Vec<u64> = (0..n)
        .map(|v| {
            let adj = (0..n).filter(|&u| ig.adjacent(v, u)).fold(0u64, |m, u| m | (1 << u));
            all & !adj & !(1 << v)
        })
        .collect();

    let mut found: Vec<u64> = Vec::new();
    let mut stack = vec![(0u64, all, 0u64)];
    while let Some((r, p, x)) = stack.pop() {
        if p == 0 {
            if x == 0 {
                found.push(r);
            }
            continue;
        }
        let pivot = bits_to_vec(p | x)
            .into_iter()
            .max_by_key(|&u| ((p & complement[u]).count_ones(), std::cmp::Reverse(u)))
            .expect("nonempty");
        let mut p = p;
        let mut x = x;
        for v in bits_to_vec(p & !complement[pivot]) {
            let bit = 1u64 << v;
            stack.push((r | bit, p & complement[v], x & complement[v]));
            p &= !bit;
            x |= bit;
        }
    }
    let mut sets: Vec<Vec<usize>> = found.into_iter().map(bits_to_vec).collect();
    sets.sort();
    let footprints = sets.iter().map(|s| ig.footprint(s)).collect();
    Ok(MisSet { sets, footprints })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MwisResult<T: Real = f64> {
    /// Sorted vertex indices of a maximal independent set.
    pub set: Vec<usize>,
    pub weight: T,
    /// False when the greedy fallback was used.
    pub exact: bool,
}

/// Maximum-weight independent set, extended to a maximal one. Exact up to
/// `cap` vertices (lexicographically first among ties), greedy above.
pub fn max_weight_independent_set<T: Real>(ig: &InterferenceGraph, weights: &[T], cap: usize) -> Result<MwisResult<T>> {
    for (v, &w) in weights.iter().enumerate() {
        if !w.is_finite() {
            return Err(Error::NonFinite(format!("weight of vertex {v}")));
        }
        if w < T::zero() {
            return Err(Error::NegativeWeight {
                vertex: v,
                weight: w.as_f64(),
            });
        }
    }
    let total = |s: &[usize]| s.iter().map(|&v| weights[v]).sum::<T>();
    if ig.len() <= cap.min(63) {
        let mis = enumerate_mis(ig, cap)?;
        let mut best: Option<(Vec<usize>, T)> = None;
        for s in mis.sets {
            let w = total(&s);
            match &best {
                Some((_, bw)) if w <= *bw => {}
                _ => best = Some((s, w)),
            }
        }
        let (set, weight) = best.unwrap_or((Vec::new(), T::zero()));
        return Ok(MwisResult { set, weight, exact: true });
    }

    let mut remaining: Vec<bool> = vec![true; ig.len()];
    let mut chosen = Vec::new();
    loop {
        let pick = (0..ig.len())
            .filter(|&v| remaining[v])
            .map(|v| {
                let deg = (0..ig.len()).filter(|&u| remaining[u] && ig.adjacent(v, u)).count();
                (v, weights[v] / T::from_usize_lossy(deg + 1))
            })
            .fold(None, |acc: Option<(usize, T)>, (v, s)| match acc {
                Some((_, b)) if s <= b => acc,
                _ => Some((v, s)),
            });
        let Some((v, _)) = pick else { break };
        chosen.push(v);
        remaining[v] = false;
        for u in 0..ig.len() {
            if ig.adjacent(v, u) {
                remaining[u] = false;
            }
        }
    }
    let set = ig.maximalize(&chosen);
    let weight = total(&set);
    Ok(MwisResult { set, weight, exact: false })
}

/// Interference-free spectral efficiency at the mean channel of each
/// vertex in `set`, zero elsewhere. Indexed by vertex.
pub fn mi_vector_deterministic<T: Real>(set: &[usize], ig: &InterferenceGraph, net: &Network<T>) -> Result<Vec<T>> {
    if !ig.is_independent(set) {
        return Err(Error::NotIndependent);
    }
    let mut out = vec![T::zero(); ig.len()];
    for &v in set {
        out[v] = net.isolated_mi(ig.user(v));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> InterferenceGraph {
        InterferenceGraph::from_edges(vec![0, 1, 2], vec![0, 1, 2], &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn edgeless_graph_has_one_mis() {
        let ig = InterferenceGraph::from_edges(vec![0, 1], vec![0, 1], &[]).unwrap();
        assert_eq!(enumerate_mis(&ig, MIS_CAP).unwrap().sets, vec![vec![0, 1]]);
    }

    #[test]
    fn triangle_has_three_singletons() {
        let ig = InterferenceGraph::from_edges(vec![0, 1, 2], vec![0, 0, 0], &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let mis = enumerate_mis(&ig, MIS_CAP).unwrap();
        assert_eq!(mis.sets, vec![vec![0], vec![1], vec![2]]);
        assert_eq!(mis.footprints, vec![vec![0], vec![0], vec![0]]);
    }

    #[test]
    fn path_mwis_hand_cases() {
        let ig = path3();
        let r = max_weight_independent_set(&ig, &[1.0, 3.0, 1.0], MIS_CAP).unwrap();
        assert_eq!((r.set, r.weight, r.exact), (vec![1], 3.0, true));
        let r = max_weight_independent_set(&ig, &[2.0, 3.0, 2.0], MIS_CAP).unwrap();
        assert_eq!((r.set, r.weight), (vec![0, 2], 4.0));
        let single = InterferenceGraph::from_edges(vec![4], vec![0], &[]).unwrap();
        assert_eq!(max_weight_independent_set(&single, &[0.0], MIS_CAP).unwrap().set, vec![0]);
        assert!(matches!(
            max_weight_independent_set(&ig, &[1.0, -1.0, 0.0], MIS_CAP),
            Err(Error::NegativeWeight { vertex: 1, .. })
        ));
    }

    #[test]
    fn greedy_fallback_is_maximal_and_flagged() {
        let ig = path3();
        let r = max_weight_independent_set(&ig, &[2.0, 3.0, 2.0], 2).unwrap();
        assert!(!r.exact);
        assert!(ig.is_maximal_independent(&r.set));
        assert!(matches!(enumerate_mis(&ig, 2), Err(Error::TooManyVertices { vertices: 3, cap: 2 })));
    }

    #[test]
    fn text_round_trip() {
        let ig = path3();
        assert_eq!(InterferenceGraph::from_text(&ig.to_text()).unwrap(), ig);
    }
}

//! Type B subbands: profile search by column generation over maximal
//! independent sets, and the long-timescale profile pmf.

use crate::abrb::{profile_from_mis, AbrbProfile, ProfilePmf};
use crate::error::{Error, Result};
use crate::graph_b::{enumerate_mis, max_weight_independent_set, mi_vector_deterministic, InterferenceGraph, MIS_CAP};
use crate::net_model::Network;
use crate::scalar::Real;
use crate::simplex::{maximize_mixture, reduce_support, MixtureOptions, MixtureProblem};
use crate::utility::Utility;

/// Mixture weights over a list of independent sets and the objective.
#[derive(Clone, Debug, PartialEq)]
pub struct QcheckSolution<T: Real = f64> {
    pub q: Vec<T>,
    pub value: T,
    pub rates: Vec<T>,
}

/// Best time-sharing between the independent sets in `theta` at the mean
/// channel. At most `|U_B|` entries of the result are positive.
pub fn solve_qcheck<T: Real>(
    theta: &[Vec<usize>],
    ig: &InterferenceGraph,
    net: &Network<T>,
    weights: &[T],
    utility: &Utility<T>,
    warm: Option<&[T]>,
) -> Result<QcheckSolution<T>> {
    if theta.is_empty() {
        return Err(Error::Degenerate("no independent sets to mix".into()));
    }
    let columns = theta
        .iter()
        .map(|v| mi_vector_deterministic(v, ig, net))
        .collect::<Result<Vec<_>>>()?;
    solve_mixture(&columns, weights, utility, warm, ig.len())
}

fn solve_mixture<T: Real>(
    columns: &[Vec<T>],
    weights: &[T],
    utility: &Utility<T>,
    warm: Option<&[T]>,
    max_support: usize,
) -> Result<QcheckSolution<T>> {
    let problem = MixtureProblem {
        columns,
        weights,
        utility: *utility,
    };
    let sol = maximize_mixture(&problem, warm, MixtureOptions::default())?;
    let sol = if sol.mix.iter().filter(|&&v| v > T::zero()).count() > max_support {
        reduce_support(&problem, &sol, max_support)
    } else {
        sol
    };
    Ok(QcheckSolution {
        q: sol.mix,
        value: sol.value,
        rates: sol.rates,
    })
}

/// Profile pmf maximizing `sum_k w_k u(sum_j q_j I[j][k])` where `I[j][k]`
/// is the measured mean MI of Type B user `k` under profile pattern `j`.
pub fn solve_qb<T: Real>(
    estimates: &[Vec<T>],
    weights: &[T],
    utility: &Utility<T>,
    warm: Option<&[T]>,
) -> Result<(ProfilePmf<T>, T)> {
    let sol = solve_mixture(estimates, weights, utility, warm, weights.len().max(1))?;
    Ok((ProfilePmf { q: sol.q }, sol.value))
}

#[derive(Clone, Copy, Debug)]
pub struct B2Options {
    pub eps: f64,
    pub max_iter: usize,
    pub cap: usize,
}

impl Default for B2Options {
    fn default() -> Self {
        Self {
            eps: 1e-6,
            max_iter: 50,
            cap: MIS_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct B2Iteration<T: Real = f64> {
    pub theta: Vec<Vec<usize>>,
    pub q: Vec<T>,
    pub value: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct B2Result<T: Real = f64> {
    /// Positive-mass independent sets (vertex indices).
    pub theta: Vec<Vec<usize>>,
    pub q: Vec<T>,
    pub value: T,
    pub profile: AbrbProfile,
    /// `q` summed over sets that map to the same pattern.
    pub profile_q: ProfilePmf<T>,
    pub history: Vec<B2Iteration<T>>,
    /// False when any MWIS call used the greedy fallback.
    pub exact: bool,
}

/// Maximal independent sets covering every vertex, picked greedily by how
/// many uncovered vertices they add.
pub fn initial_cover(ig: &InterferenceGraph, cap: usize) -> Vec<Vec<usize>> {
    let n = ig.len();
    let mut covered = vec![false; n];
    let mut cover = Vec::new();
    if n <= cap {
        let all = enumerate_mis(ig, cap).expect("within cap").sets;
        while covered.iter().any(|c| !c) {
            let best = all
                .iter()
                .max_by_key(|s| (s.iter().filter(|&&v| !covered[v]).count(), std::cmp::Reverse(*s)))
                .expect("nonempty graph");
            for &v in best {
                covered[v] = true;
            }
            cover.push(best.clone());
        }
        return cover;
    }
    while let Some(start) = covered.iter().position(|c| !c) {
        let mut set = vec![start];
        for v in 0..n {
            if !covered[v] && !set.contains(&v) && set.iter().all(|&s| !ig.adjacent(v, s)) {
                set.push(v);
            }
        }
        let set = ig.maximalize(&set);
        for &v in &set {
            covered[v] = true;
        }
        cover.push(set);
    }
    cover
}

/// Column generation: mix the current sets, price a new set by a
/// maximum-weight independent set under the marginal utilities, repeat
/// until the objective stops improving.
pub fn algorithm_b2<T: Real>(
    net: &Network<T>,
    ig: &InterferenceGraph,
    weights: &[T],
    utility: &Utility<T>,
    options: B2Options,
) -> Result<B2Result<T>> {
    if ig.is_empty() {
        return Ok(B2Result {
            theta: vec![],
            q: vec![],
            value: T::zero(),
            profile: AbrbProfile::default(),
            profile_q: ProfilePmf { q: vec![] },
            history: vec![],
            exact: true,
        });
    }
    let isolated: Vec<T> = ig.users().iter().map(|&k| net.isolated_mi(k)).collect();
    let mut theta = initial_cover(ig, options.cap);
    let mut sol = solve_qcheck(&theta, ig, net, weights, utility, None)?;
    let mut history = vec![B2Iteration {
        theta: theta.clone(),
        q: sol.q.clone(),
        value: sol.value,
    }];
    let mut exact = true;
    for _ in 0..options.max_iter {
        let keep: Vec<usize> = (0..theta.len()).filter(|&j| sol.q[j] > T::zero()).collect();
        let mut next: Vec<Vec<usize>> = keep.iter().map(|&j| theta[j].clone()).collect();
        let mut warm: Vec<T> = keep.iter().map(|&j| sol.q[j]).collect();

        let vertex_weights: Vec<T> = (0..ig.len())
            .map(|v| weights[v] * utility.derivative(sol.rates[v]) * isolated[v])
            .collect();
        let mwis = max_weight_independent_set(ig, &vertex_weights, options.cap)?;
        exact &= mwis.exact;
        if !next.contains(&mwis.set) {
            next.push(mwis.set);
            warm.push(T::zero());
        }
        let candidate = solve_qcheck(&next, ig, net, weights, utility, Some(&warm))?;
        let improvement = candidate.value - sol.value;
        theta = next;
        sol = if candidate.value >= sol.value {
            candidate
        } else {
            QcheckSolution {
                q: warm.clone(),
                ..sol
            }
        };
        history.push(B2Iteration {
            theta: theta.clone(),
            q: sol.q.clone(),
            value: sol.value,
        });
        if improvement.abs() <= T::lit(options.eps) {
            break;
        }
    }

    let keep: Vec<usize> = (0..theta.len()).filter(|&j| sol.q[j] > T::zero()).collect();
    let theta_star: Vec<Vec<usize>> = keep.iter().map(|&j| theta[j].clone()).collect();
    let q_star: Vec<T> = keep.iter().map(|&j| sol.q[j]).collect();
    let as_users: Vec<Vec<usize>> = theta_star
        .iter()
        .map(|s| s.iter().map(|&v| ig.user(v)).collect())
        .collect();
    let profile = profile_from_mis(&as_users, &net.graph)?;
    let mut profile_q = vec![T::zero(); profile.len()];
    for (set, &mass) in theta_star.iter().zip(&q_star) {
        let pattern = crate::abrb::AbrbPattern::with_active(net.graph.n_macro(), ig.footprint(set));
        let j = profile.position(&pattern).expect("pattern in profile");
        profile_q[j] = profile_q[j] + mass;
    }
    Ok(B2Result {
        theta: theta_star,
        q: q_star,
        value: sol.value,
        profile,
        profile_q: ProfilePmf { q: profile_q },
        history,
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_b::build_interference_graph;
    use crate::net_model::{parse_fixture, Fixture};

    fn two_conflicting() -> Fixture {
        parse_fixture(
            "bs 1 macro\nbs 2 macro\nuser 1 serving 1\nuser 2 serving 2\nedge 2 1\nedge 1 2\n",
        )
        .unwrap()
    }

    #[test]
    fn conflicting_pair_time_shares_evenly() {
        let f = two_conflicting();
        let ig = build_interference_graph(f.graph());
        assert_eq!(ig.edges(), vec![(0, 1)]);
        let r = algorithm_b2(&f.network, &ig, &[1.0, 1.0], &Utility::ProportionalFair, B2Options::default()).unwrap();
        assert_eq!(r.theta, vec![vec![0], vec![1]]);
        assert!((r.q[0] - 0.5).abs() < 1e-6 && (r.q[1] - 0.5).abs() < 1e-6);
        assert_eq!(r.profile.len(), 2);
    }

    #[test]
    fn edgeless_graph_uses_all_on_pattern() {
        let f: Fixture = parse_fixture(
            "bs 1 macro\nbs 2 macro\nuser 1 serving 1\nuser 2 serving 2\nbs 3 pico\nedge 3 1\nedge 3 2\n",
        )
        .unwrap();
        let ig = build_interference_graph(f.graph());
        assert_eq!(ig.len(), 2);
        let r = algorithm_b2(&f.network, &ig, &[1.0, 1.0], &Utility::ProportionalFair, B2Options::default()).unwrap();
        assert_eq!(r.q, vec![1.0]);
        assert_eq!(r.profile.patterns()[0].to_string(), "11");
    }

    #[test]
    fn single_covering_set_gets_all_mass() {
        let f = two_conflicting();
        let ig = build_interference_graph(f.graph());
        let s = solve_qcheck(&[vec![0]], &ig, &f.network, &[1.0, 1.0], &Utility::ProportionalFair, None).unwrap();
        assert_eq!(s.q, vec![1.0]);
        assert!(matches!(
            solve_qcheck(&[vec![0, 1]], &ig, &f.network, &[1.0, 1.0], &Utility::ProportionalFair, None),
            Err(Error::NotIndependent)
        ));
    }

    #[test]
    fn qb_single_pattern_and_symmetric_split() {
        let (p, _) = solve_qb(&[vec![1.0, 2.0]], &[1.0, 1.0], &Utility::ProportionalFair, None).unwrap();
        assert_eq!(p.q, vec![1.0]);
        let est = vec![vec![2.0f64, 2.0, 0.0, 0.0], vec![0.0, 0.0, 2.0, 2.0]];
        let (p, _) = solve_qb(&est, &[1.0; 4], &Utility::ProportionalFair, None).unwrap();
        assert!((p.q[0] - 0.5).abs() < 1e-9);
    }
}

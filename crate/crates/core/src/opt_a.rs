//! Long-timescale optimization of the per-macro blanking probabilities.
//!
//! The average per-subband rate of a Type A user is affine in the
//! probability that its serving BS sees a favourable pattern: `1 - q_b` for
//! a macro, `min_{j in B_n} q_j` for a pico. The objective is therefore a
//! sum of concave functions of coordinates and of coordinate minima. When a
//! pico N-user does better on unfavourable patterns (its I-users are
//! ineligible there) the composition is no longer concave, so the solver is
//! a local feasible-direction method with a few deterministic restarts.

pub mod frozen;

use log::warn;

use crate::error::{Error, Result};
use crate::net_model::{Category, TopologyGraph};
use crate::scalar::{golden_section_max, Real};
use crate::utility::Utility;

/// Conditional rate statistics of one Type A user.
#[derive(Clone, Debug, PartialEq)]
pub struct UserEstimateA<T: Real = f64> {
    pub user: usize,
    pub category: Category,
    /// Macros whose blanking decides the pattern class: the serving macro
    /// for a macro N-user, the pico's neighbor-macro set otherwise.
    pub gate: Vec<usize>,
    /// Mean scheduled MI on favourable patterns.
    pub favourable: T,
    /// Mean scheduled MI on unfavourable patterns.
    pub unfavourable: T,
    pub weight: T,
}

/// Statistics of all Type A users.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateSetA<T: Real = f64> {
    pub n_macro: usize,
    pub users: Vec<UserEstimateA<T>>,
}

impl<T: Real> EstimateSetA<T> {
    /// Builds the set for every Type A user of `graph`. Missing statistics
    /// count as zero.
    pub fn from_graph(
        graph: &TopologyGraph,
        weights: &[T],
        favourable: &[Option<T>],
        unfavourable: &[Option<T>],
    ) -> Result<Self> {
        let mut users = Vec::new();
        let mut missing = 0usize;
        for k in graph.type_a_users() {
            let category = graph.category(k);
            let b = graph.serving(k);
            let gate = match category {
                Category::MacroN => vec![b],
                _ => graph.pico_macro_set(b).to_vec(),
            };
            let fav = favourable[k].unwrap_or_else(|| {
                missing += 1;
                T::zero()
            });
            let unfav = match category {
                Category::PicoN => unfavourable[k].unwrap_or_else(|| {
                    if !gate.is_empty() {
                        missing += 1;
                    }
                    T::zero()
                }),
                _ => unfavourable[k].unwrap_or(T::zero()),
            };
            for v in [fav, unfav, weights[k]] {
                if !v.is_finite() {
                    return Err(Error::NonFinite(format!("estimate of user {k}")));
                }
            }
            users.push(UserEstimateA {
                user: k,
                category,
                gate,
                favourable: fav,
                unfavourable: unfav,
                weight: weights[k],
            });
        }
        if missing > 0 {
            warn!("{missing} Type A statistics never observed; treated as zero");
        }
        Ok(Self {
            n_macro: graph.n_macro(),
            users,
        })
    }

    /// Users whose favourable-pattern rate falls short of the unfavourable
    /// one by more than `tol`, among the categories where the unfavourable
    /// rate is structurally zero.
    pub fn monotonicity_violations(&self, tol: T) -> Vec<usize> {
        self.users
            .iter()
            .filter(|u| matches!(u.category, Category::MacroN | Category::PicoI))
            .filter(|u| u.favourable + tol < u.unfavourable)
            .map(|u| u.user)
            .collect()
    }
}

fn favourable_prob<T: Real>(q: &[T], est: &UserEstimateA<T>) -> T {
    match est.category {
        Category::MacroN => T::one() - q[est.gate[0]],
        _ => est.gate.iter().map(|&j| q[j]).fold(T::one(), T::min),
    }
}

/// Average per-subband MI of one user under blanking marginals `q`.
pub fn ibar_a_closed_form<T: Real>(q: &[T], est: &UserEstimateA<T>) -> Result<T> {
    let s = favourable_prob(q, est);
    match est.category {
        Category::MacroN => Ok(s * est.favourable),
        Category::PicoN => Ok(s * (est.favourable - est.unfavourable) + est.unfavourable),
        Category::PicoI => Ok(s * est.favourable),
        Category::MacroI => Err(Error::Config(format!(
            "user {} is a macro I-user and has no Type A rate",
            est.user
        ))),
    }
}

fn ibar<T: Real>(q: &[T], est: &UserEstimateA<T>) -> T {
    ibar_a_closed_form(q, est).expect("Type A category")
}

/// `sum_k w_k u(Ibar_k(q))`.
pub fn objective_a<T: Real>(q: &[T], est: &EstimateSetA<T>, utility: &Utility<T>) -> T {
    est.users
        .iter()
        .map(|e| e.weight * utility.value(ibar(q, e)))
        .sum()
}

fn slope<T: Real>(est: &UserEstimateA<T>) -> T {
    match est.category {
        Category::MacroN => -est.favourable,
        Category::PicoN => est.favourable - est.unfavourable,
        _ => est.favourable,
    }
}

/// Tolerance under which two coordinates count as tied at a minimum.
const TIE: f64 = 1e-12;

fn active_set<T: Real>(q: &[T], gate: &[usize]) -> Vec<usize> {
    let m = gate.iter().map(|&j| q[j]).fold(T::infinity(), T::min);
    gate.iter().copied().filter(|&j| q[j] <= m + T::lit(TIE)).collect()
}

/// One-sided directional derivative of [`objective_a`] at `q` along `d`.
pub fn directional_derivative<T: Real>(q: &[T], d: &[T], est: &EstimateSetA<T>, utility: &Utility<T>) -> T {
    est.users
        .iter()
        .map(|e| {
            let rate_change = match e.category {
                Category::MacroN => -e.favourable * d[e.gate[0]],
                _ if e.gate.is_empty() => T::zero(),
                _ => {
                    let dmin = active_set(q, &e.gate).iter().map(|&j| d[j]).fold(T::infinity(), T::min);
                    slope(e) * dmin
                }
            };
            e.weight * utility.derivative(ibar(q, e)) * rate_change
        })
        .sum()
}

/// A supergradient (a gradient wherever every minimum is attained once):
/// each min-term is charged to its lowest-index minimizer.
pub fn supergradient<T: Real>(q: &[T], est: &EstimateSetA<T>, utility: &Utility<T>) -> Vec<T> {
    let mut g = vec![T::zero(); q.len()];
    for e in &est.users {
        if e.gate.is_empty() {
            continue;
        }
        let scale = e.weight * utility.derivative(ibar(q, e)) * slope(e);
        let j = match e.category {
            Category::MacroN => e.gate[0],
            _ => active_set(q, &e.gate)[0],
        };
        g[j] = g[j] + scale;
    }
    g
}

fn unit<T: Real>(n: usize, members: &[usize], sign: T) -> Vec<T> {
    let mut d = vec![T::zero(); n];
    for &j in members {
        d[j] = sign;
    }
    d
}

/// Candidate ascent directions at `q`: coordinate moves, joint moves of
/// tied coordinates and of each pico's active minimizers, and prefixes of
/// tied groups ordered by their own marginal value.
fn directions<T: Real>(q: &[T], est: &EstimateSetA<T>, utility: &Utility<T>) -> Vec<Vec<T>> {
    let n = q.len();
    let mut out: Vec<Vec<T>> = Vec::new();
    let push = |d: Vec<T>, out: &mut Vec<Vec<T>>| {
        if d.iter().any(|&v| v != T::zero()) && !out.contains(&d) {
            out.push(d);
        }
    };
    for j in 0..n {
        push(unit(n, &[j], T::one()), &mut out);
        push(unit(n, &[j], -T::one()), &mut out);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| q[a].partial_cmp(&q[b]).unwrap().then(a.cmp(&b)));
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &j in &order {
        match clusters.last_mut() {
            Some(c) if q[j] - q[*c.last().unwrap()] <= T::lit(TIE) => c.push(j),
            _ => clusters.push(vec![j]),
        }
    }

    // Marginal value of each coordinate from the terms it alone controls.
    let mut own = vec![T::zero(); n];
    for e in &est.users {
        if e.category == Category::MacroN {
            own[e.gate[0]] = own[e.gate[0]] + e.weight * utility.derivative(ibar(q, e)) * slope(e);
        }
    }

    for c in clusters.iter().filter(|c| c.len() > 1) {
        push(unit(n, c, T::one()), &mut out);
        push(unit(n, c, -T::one()), &mut out);
        let mut by_own = c.clone();
        by_own.sort_by(|&a, &b| own[a].partial_cmp(&own[b]).unwrap().then(a.cmp(&b)));
        for len in 2..c.len() {
            push(unit(n, &by_own[..len], -T::one()), &mut out);
        }
        by_own.reverse();
        for len in 2..c.len() {
            push(unit(n, &by_own[..len], T::one()), &mut out);
        }
    }
    for e in &est.users {
        if e.category != Category::MacroN && e.gate.len() > 1 {
            let act = active_set(q, &e.gate);
            if act.len() > 1 {
                push(unit(n, &act, T::one()), &mut out);
                push(unit(n, &act, -T::one()), &mut out);
            }
        }
    }
    out
}

fn max_step<T: Real>(q: &[T], d: &[T]) -> T {
    q.iter()
        .zip(d)
        .map(|(&x, &dx)| {
            if dx > T::zero() {
                (T::one() - x) / dx
            } else if dx < T::zero() {
                x / -dx
            } else {
                T::infinity()
            }
        })
        .fold(T::infinity(), T::min)
}

fn moved<T: Real>(q: &[T], d: &[T], t: T) -> Vec<T> {
    q.iter()
        .zip(d)
        .map(|(&x, &dx)| (x + t * dx).max(T::zero()).min(T::one()))
        .collect()
}

/// Largest one-sided directional derivative over the candidate directions
/// (all of unit max-norm); zero at a first-order stationary point.
pub fn first_order_residual<T: Real>(q: &[T], est: &EstimateSetA<T>, utility: &Utility<T>) -> T {
    directions(q, est, utility)
        .iter()
        .filter(|d| max_step(q, d) > T::zero())
        .map(|d| directional_derivative(q, d, est, utility))
        .fold(T::zero(), T::max)
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptionsA {
    /// Target first-order residual.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptionsA {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 5_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolutionA<T: Real = f64> {
    pub q: Vec<T>,
    pub value: T,
    pub iterations: usize,
    pub residual: T,
}

fn line_search<T: Real>(q: &[T], d: &[T], est: &EstimateSetA<T>, utility: &Utility<T>) -> (T, T) {
    let t_max = max_step(q, d).min(T::one());
    let f = |t: T| objective_a(&moved(q, d, t), est, utility);
    // Coarse scan first: the restriction to a line need not be unimodal.
    let samples = 16;
    let mut best = (T::zero(), f(T::zero()));
    for i in 1..=samples {
        let t = t_max * T::from_usize_lossy(i) / T::from_usize_lossy(samples);
        let v = f(t);
        if v > best.1 {
            best = (t, v);
        }
    }
    let h = t_max / T::from_usize_lossy(samples);
    let lo = (best.0 - h).max(T::zero());
    let hi = (best.0 + h).min(t_max);
    let tol = (t_max * T::lit(1e-13)).max(T::epsilon());
    let refined = golden_section_max(f, lo, hi, tol);
    if refined.1 > best.1 {
        refined
    } else {
        best
    }
}

fn local_ascent<T: Real>(
    start: Vec<T>,
    est: &EstimateSetA<T>,
    utility: &Utility<T>,
    options: SolverOptionsA,
) -> SolutionA<T> {
    let mut q = start;
    let mut value = objective_a(&q, est, utility);
    let internal_tol = T::lit(options.tol * 1e-3);
    let mut iterations = 0;
    while iterations < options.max_iter {
        iterations += 1;
        let mut scored: Vec<(T, Vec<T>)> = directions(&q, est, utility)
            .into_iter()
            .filter(|d| max_step(&q, d) > T::zero())
            .map(|d| (directional_derivative(&q, &d, est, utility), d))
            .filter(|(s, _)| *s > internal_tol)
            .collect();
        if scored.is_empty() {
            break;
        }
        scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let mut improved = false;
        for (_, d) in &scored {
            let (t, v) = line_search(&q, d, est, utility);
            if t > T::zero() && v > value {
                q = moved(&q, d, t);
                value = v;
                improved = true;
                break;
            }
        }
        if !improved {
            break;
        }
    }
    let residual = first_order_residual(&q, est, utility);
    SolutionA {
        q,
        value,
        iterations,
        residual,
    }
}

/// Maximizes [`objective_a`] over `[0, 1]^N0`, starting from `warm` (or the
/// all-half vector) plus the two box corners along the diagonal. The
/// returned value is never below the value at `warm`.
pub fn solve_qa<T: Real>(
    est: &EstimateSetA<T>,
    utility: &Utility<T>,
    warm: Option<&[T]>,
    options: SolverOptionsA,
) -> Result<SolutionA<T>> {
    let n = est.n_macro;
    for e in &est.users {
        if e.category == Category::MacroI {
            return Err(Error::Config(format!("user {} is not a Type A user", e.user)));
        }
        if !(e.favourable.is_finite() && e.unfavourable.is_finite() && e.weight.is_finite()) {
            return Err(Error::NonFinite(format!("estimate of user {}", e.user)));
        }
    }
    let half = vec![T::lit(0.5); n];
    let warm_start: Vec<T> = match warm {
        Some(w) if w.len() == n => w.iter().map(|&v| v.max(T::zero()).min(T::one())).collect(),
        _ => half.clone(),
    };
    let mut starts = vec![warm_start];
    for s in [half, vec![T::zero(); n], vec![T::one(); n]] {
        if !starts.contains(&s) {
            starts.push(s);
        }
    }
    let mut best: Option<SolutionA<T>> = None;
    for s in starts {
        let sol = local_ascent(s, est, utility, options);
        match &best {
            Some(b) if sol.value <= b.value => {}
            _ => best = Some(sol),
        }
    }
    Ok(best.expect("at least one start"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net_model::TopologyGraph;

    fn one_macro_one_pico(e_n: f64, e_i: f64) -> EstimateSetA {
        // macro 0, pico 1; user 0 macro N-user, user 1 pico I-user.
        let g = TopologyGraph::from_links(1, 2, vec![0, 1], vec![vec![], vec![0]]).unwrap();
        EstimateSetA::from_graph(&g, &[1.0, 1.0], &[Some(e_n), Some(e_i)], &[None, None]).unwrap()
    }

    #[test]
    fn closed_form_hand_values() {
        let macro_n: UserEstimateA<f64> = UserEstimateA {
            user: 0,
            category: Category::MacroN,
            gate: vec![0],
            favourable: 2.0,
            unfavourable: 0.0,
            weight: 1.0,
        };
        assert!((ibar_a_closed_form(&[0.3], &macro_n).unwrap() - 1.4f64).abs() < 1e-15);
        let pico_i = UserEstimateA {
            category: Category::PicoI,
            gate: vec![0, 1],
            ..macro_n.clone()
        };
        assert!((ibar_a_closed_form(&[0.7, 0.5], &pico_i).unwrap() - 1.0f64).abs() < 1e-15);
        assert_eq!(ibar_a_closed_form(&[0.0, 0.0], &pico_i).unwrap(), 0.0);
        assert_eq!(ibar_a_closed_form(&[0.0], &macro_n).unwrap(), 2.0);
        let bad = UserEstimateA {
            category: Category::MacroI,
            ..macro_n
        };
        assert!(ibar_a_closed_form(&[0.0], &bad).is_err());
    }

    #[test]
    fn balanced_cell_blanks_half_the_time() {
        for (e_n, e_i) in [(1.0, 1.0), (3.0, 0.2), (0.1, 7.0)] {
            let est = one_macro_one_pico(e_n, e_i);
            let s = solve_qa(&est, &Utility::ProportionalFair, None, SolverOptionsA::default()).unwrap();
            assert!((s.q[0] - 0.5).abs() < 1e-6, "{:?}", s.q);
            let grid = (0..=10_000)
                .map(|i| objective_a(&[i as f64 / 1e4], &est, &Utility::ProportionalFair))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(s.value >= grid - 1e-9);
        }
    }

    #[test]
    fn pure_groups_go_to_the_corners() {
        let g = TopologyGraph::from_links(2, 2, vec![0, 1], vec![vec![], vec![]]).unwrap();
        let est = EstimateSetA::from_graph(&g, &[1.0, 1.0], &[Some(1.0), Some(2.0)], &[None, None]).unwrap();
        let s = solve_qa(&est, &Utility::ProportionalFair, None, SolverOptionsA::default()).unwrap();
        assert_eq!(s.q, vec![0.0, 0.0]);
        assert_eq!(first_order_residual(&s.q, &est, &Utility::ProportionalFair), 0.0);

        let g = TopologyGraph::from_links(1, 2, vec![1], vec![vec![0]]).unwrap();
        let est = EstimateSetA::from_graph(&g, &[1.0], &[Some(1.0)], &[None]).unwrap();
        let s = solve_qa(&est, &Utility::ProportionalFair, None, SolverOptionsA::default()).unwrap();
        assert_eq!(s.q, vec![1.0]);
    }

    #[test]
    fn residual_detects_perturbation() {
        let est = one_macro_one_pico(1.0, 1.0);
        let pf = Utility::ProportionalFair;
        assert!(first_order_residual(&[0.5], &est, &pf) < 1e-12);
        assert!(first_order_residual(&[0.6], &est, &pf) > 0.1);
    }

    #[test]
    fn non_finite_estimates_rejected() {
        let mut est = one_macro_one_pico(1.0, 1.0);
        est.users[0].favourable = f64::NAN;
        assert!(matches!(
            solve_qa(&est, &Utility::ProportionalFair, None, SolverOptionsA::default()),
            Err(Error::NonFinite(_))
        ));
    }
}

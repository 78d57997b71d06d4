//! Alternating optimization of scheduling policy and blanking marginals on
//! a fixed set of channel samples, where every expectation is an exact
//! average and both steps share one deterministic objective.
//!
//! A policy is a mixture of max-weight schedulers. For a fixed `q` the
//! policy step is solved by fully corrective Frank-Wolfe over those
//! schedulers; the blanking step is [`solve_qa`] warm started at `q`.

use crate::abrb::AbrbPattern;
use crate::error::Result;
use crate::net_model::{sample_small_scale, Category, Network};
use crate::scalar::{golden_section_max, Real};
use crate::scheduler::{is_eligible, mutual_information, SubbandType};
use crate::simplex::{maximize_mixture, MixtureOptions, MixtureProblem};
use crate::utility::Utility;

use super::{first_order_residual, ibar_a_closed_form, objective_a, solve_qa, EstimateSetA, SolverOptionsA};

/// Per-BS, per-class, per-sample candidate lists `(user, MI)`.
#[derive(Clone, Debug)]
pub struct FrozenSamplesA<T: Real = f64> {
    n_samples: usize,
    /// `tables[bs][class][sample]`, class 0 favourable, 1 unfavourable.
    tables: Vec<[Vec<Vec<(usize, T)>>; 2]>,
    template: EstimateSetA<T>,
    /// Position of each user in `template.users`, if Type A.
    slot: Vec<Option<usize>>,
}

/// Conditional mean scheduled MI per Type A user, in template order.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyStats<T: Real = f64> {
    pub favourable: Vec<T>,
    pub unfavourable: Vec<T>,
}

impl<T: Real> PolicyStats<T> {
    fn combine(vertices: &[PolicyStats<T>], mix: &[T]) -> Self {
        let n = vertices[0].favourable.len();
        let mut out = PolicyStats {
            favourable: vec![T::zero(); n],
            unfavourable: vec![T::zero(); n],
        };
        for (v, &l) in vertices.iter().zip(mix) {
            for i in 0..n {
                out.favourable[i] = out.favourable[i] + l * v.favourable[i];
                out.unfavourable[i] = out.unfavourable[i] + l * v.unfavourable[i];
            }
        }
        out
    }
}

fn representative_patterns(net_n_macro: usize, bs: usize, is_macro: bool, gate: &[usize]) -> [Option<AbrbPattern>; 2] {
    let on = AbrbPattern::all_on(net_n_macro);
    if is_macro {
        let mut off = vec![true; net_n_macro];
        off[bs] = false;
        [Some(on), Some(AbrbPattern::new(off))]
    } else if gate.is_empty() {
        [Some(on), None]
    } else {
        let mut fav = vec![true; net_n_macro];
        for &j in gate {
            fav[j] = false;
        }
        [Some(AbrbPattern::new(fav)), Some(on)]
    }
}

impl<T: Real> FrozenSamplesA<T> {
    /// Draws `n_samples` independent subband channels and tabulates the
    /// MI of every eligible Type A user under each pattern class.
    pub fn draw(net: &Network<T>, weights: &[T], seed: u64, n_samples: usize) -> Result<Self> {
        let g = &net.graph;
        let n_users = g.n_users();
        let none = vec![None; n_users];
        let template = EstimateSetA::from_graph(g, weights, &vec![Some(T::zero()); n_users], &none)?;
        let mut slot = vec![None; n_users];
        for (i, u) in template.users.iter().enumerate() {
            slot[u.user] = Some(i);
        }
        let samples: Vec<_> = (0..n_samples)
            .map(|s| sample_small_scale(&net.state, g, seed, s as u64, 0))
            .collect();
        let mut tables = Vec::with_capacity(g.n_bs());
        for n in 0..g.n_bs() {
            let patterns = representative_patterns(g.n_macro(), n, g.is_macro(n), g.pico_macro_set(n));
            let mut per_class: [Vec<Vec<(usize, T)>>; 2] = [Vec::new(), Vec::new()];
            for (c, pattern) in patterns.iter().enumerate() {
                let Some(pattern) = pattern else {
                    per_class[c] = vec![Vec::new(); n_samples];
                    continue;
                };
                per_class[c] = samples
                    .iter()
                    .map(|sample| {
                        g.served(n)
                            .iter()
                            .copied()
                            .filter(|&k| slot[k].is_some() && is_eligible(g, k, SubbandType::A, pattern))
                            .map(|k| (k, mutual_information(net, k, pattern, sample, SubbandType::A)))
                            .collect()
                    })
                    .collect();
            }
            tables.push(per_class);
        }
        Ok(Self {
            n_samples,
            tables,
            template,
            slot,
        })
    }

    pub fn template(&self) -> &EstimateSetA<T> {
        &self.template
    }

    /// Statistics of the max-weight scheduler with per-class user weights.
    pub fn max_weight(&self, weight_fav: &[T], weight_unfav: &[T]) -> PolicyStats<T> {
        let n = self.template.users.len();
        let mut out = PolicyStats {
            favourable: vec![T::zero(); n],
            unfavourable: vec![T::zero(); n],
        };
        let scale = T::one() / T::from_usize_lossy(self.n_samples.max(1));
        for per_class in &self.tables {
            for (c, per_sample) in per_class.iter().enumerate() {
                let w = if c == 0 { weight_fav } else { weight_unfav };
                for candidates in per_sample {
                    let mut best: Option<(usize, T, T)> = None;
                    for &(k, mi) in candidates {
                        let i = self.slot[k].expect("Type A");
                        let score = w[i] * mi;
                        match best {
                            Some((_, s, _)) if score <= s => {}
                            _ => best = Some((i, score, mi)),
                        }
                    }
                    if let Some((i, _, mi)) = best {
                        let target = if c == 0 { &mut out.favourable } else { &mut out.unfavourable };
                        target[i] = target[i] + mi * scale;
                    }
                }
            }
        }
        out
    }

    pub fn estimates(&self, stats: &PolicyStats<T>) -> EstimateSetA<T> {
        let mut est = self.template.clone();
        for (i, u) in est.users.iter_mut().enumerate() {
            u.favourable = stats.favourable[i];
            u.unfavourable = stats.unfavourable[i];
        }
        est
    }

    /// Per-class weights `w u'(Ibar) dIbar/de` of the objective at `(q, stats)`.
    fn class_weights(&self, q: &[T], stats: &PolicyStats<T>, utility: &Utility<T>) -> (Vec<T>, Vec<T>) {
        let est = self.estimates(stats);
        let mut fav = Vec::with_capacity(est.users.len());
        let mut unfav = Vec::with_capacity(est.users.len());
        for u in &est.users {
            let marginal = u.weight * utility.derivative(ibar_a_closed_form(q, u).expect("Type A"));
            let s = match u.category {
                Category::MacroN => T::one() - q[u.gate[0]],
                _ => u.gate.iter().map(|&j| q[j]).fold(T::one(), T::min),
            };
            fav.push(marginal * s);
            unfav.push(if u.category == Category::PicoN { marginal * (T::one() - s) } else { T::zero() });
        }
        (fav, unfav)
    }

    fn rate_column(&self, q: &[T], stats: &PolicyStats<T>) -> Vec<T> {
        self.estimates(stats)
            .users
            .iter()
            .map(|u| ibar_a_closed_form(q, u).expect("Type A"))
            .collect()
    }
}

/// A policy as a mixture of max-weight schedulers.
#[derive(Clone, Debug)]
pub struct MixedPolicy<T: Real = f64> {
    pub vertices: Vec<PolicyStats<T>>,
    pub mix: Vec<T>,
}

impl<T: Real> MixedPolicy<T> {
    pub fn stats(&self) -> PolicyStats<T> {
        PolicyStats::combine(&self.vertices, &self.mix)
    }
}

#[derive(Clone, Debug)]
pub struct AoAOptions {
    pub max_outer: usize,
    pub tol: f64,
    pub policy_iter: usize,
    pub solver: SolverOptionsA,
}

impl Default for AoAOptions {
    fn default() -> Self {
        Self {
            max_outer: 100,
            tol: 1e-11,
            policy_iter: 200,
            solver: SolverOptionsA::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct AoAReport<T: Real = f64> {
    pub q: Vec<T>,
    pub policy: MixedPolicy<T>,
    /// Objective after the initial policy and after every half step.
    pub trace: Vec<T>,
    pub outer_iterations: usize,
    pub residual: T,
}

/// Best policy for fixed `q`, by fully corrective Frank-Wolfe.
pub fn optimize_policy<T: Real>(
    frozen: &FrozenSamplesA<T>,
    q: &[T],
    mut policy: MixedPolicy<T>,
    utility: &Utility<T>,
    max_iter: usize,
) -> Result<MixedPolicy<T>> {
    let weights: Vec<T> = frozen.template.users.iter().map(|u| u.weight).collect();
    for _ in 0..max_iter {
        let current = policy.stats();
        let (wf, wu) = frozen.class_weights(q, &current, utility);
        let candidate = frozen.max_weight(&wf, &wu);
        let gain: T = (0..wf.len())
            .map(|i| {
                wf[i] * (candidate.favourable[i] - current.favourable[i])
                    + wu[i] * (candidate.unfavourable[i] - current.unfavourable[i])
            })
            .sum();
        let value = objective_a(q, &frozen.estimates(&current), utility);
        if gain <= T::lit(1e-13) * (T::one() + value.abs()) || policy.vertices.contains(&candidate) {
            break;
        }
        policy.vertices.push(candidate);
        policy.mix.push(T::zero());
        let columns: Vec<Vec<T>> = policy.vertices.iter().map(|v| frozen.rate_column(q, v)).collect();
        let problem = MixtureProblem {
            columns: &columns,
            weights: &weights,
            utility: *utility,
        };
        let before = problem.value(&policy.mix);
        let sol = maximize_mixture(&problem, Some(&policy.mix), MixtureOptions::default())?;
        if sol.value < before {
            break;
        }
        let keep: Vec<usize> = (0..sol.mix.len()).filter(|&j| sol.mix[j] > T::zero()).collect();
        policy.vertices = keep.iter().map(|&j| policy.vertices[j].clone()).collect();
        policy.mix = keep.iter().map(|&j| sol.mix[j]).collect();
    }
    Ok(policy)
}

/// Runs alternating optimization from `q0`, starting with the max-weight
/// scheduler for the raw user weights.
pub fn run_ao_a<T: Real>(
    frozen: &FrozenSamplesA<T>,
    utility: &Utility<T>,
    q0: &[T],
    options: &AoAOptions,
) -> Result<AoAReport<T>> {
    let weights: Vec<T> = frozen.template.users.iter().map(|u| u.weight).collect();
    let mut policy = MixedPolicy {
        vertices: vec![frozen.max_weight(&weights, &weights)],
        mix: vec![T::one()],
    };
    let mut q = q0.to_vec();
    let value = |q: &[T], p: &MixedPolicy<T>| objective_a(q, &frozen.estimates(&p.stats()), utility);
    let mut trace = vec![value(&q, &policy)];
    let mut outer = 0;
    while outer < options.max_outer {
        outer += 1;
        let before = *trace.last().unwrap();
        let sol = solve_qa(&frozen.estimates(&policy.stats()), utility, Some(&q), options.solver)?;
        q = sol.q;
        trace.push(value(&q, &policy));
        policy = optimize_policy(frozen, &q, policy, utility, options.policy_iter)?;
        trace.push(value(&q, &policy));
        if *trace.last().unwrap() - before <= T::lit(options.tol) * (T::one() + before.abs()) {
            break;
        }
    }
    let residual = fixed_point_check_a(frozen, &q, &policy, utility);
    Ok(AoAReport {
        q,
        policy,
        trace,
        outer_iterations: outer,
        residual,
    })
}

/// First-order residual in `q` plus the improvement from one more
/// scheduling re-weight step (a line-searched Frank-Wolfe step).
pub fn fixed_point_check_a<T: Real>(
    frozen: &FrozenSamplesA<T>,
    q: &[T],
    policy: &MixedPolicy<T>,
    utility: &Utility<T>,
) -> T {
    let current = policy.stats();
    let est = frozen.estimates(&current);
    let q_residual = first_order_residual(q, &est, utility);
    let (wf, wu) = frozen.class_weights(q, &current, utility);
    let candidate = frozen.max_weight(&wf, &wu);
    let base = objective_a(q, &est, utility);
    let step = |gamma: T| {
        let mixed = PolicyStats::combine(&[current.clone(), candidate.clone()], &[T::one() - gamma, gamma]);
        objective_a(q, &frozen.estimates(&mixed), utility)
    };
    let (_, best) = golden_section_max(step, T::zero(), T::one(), T::lit(1e-12));
    q_residual + (best - base).max(T::zero())
}

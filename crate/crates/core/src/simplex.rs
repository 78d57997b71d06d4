//! Concave maximization of `sum_k w_k u(sum_j x_j A[k][j])` over the
//! probability simplex, plus support reduction of the maximizer.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::utility::Utility;

/// Column-major mixture problem: `columns[j][k]` is the rate of user `k`
/// under alternative `j`.
#[derive(Clone, Debug)]
pub struct MixtureProblem<'a, T: Real = f64> {
    pub columns: &'a [Vec<T>],
    pub weights: &'a [T],
    pub utility: Utility<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixtureSolution<T: Real = f64> {
    pub mix: Vec<T>,
    pub rates: Vec<T>,
    pub value: T,
    /// `max_j grad_j - <grad, mix>` at the returned point.
    pub gap: T,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct MixtureOptions {
    pub max_iter: usize,
    /// Stop once the duality gap falls below `gap_tol * (1 + |value|)`.
    pub gap_tol: f64,
}

impl Default for MixtureOptions {
    fn default() -> Self {
        Self {
            max_iter: 100_000,
            gap_tol: 1e-12,
        }
    }
}

impl<T: Real> MixtureProblem<'_, T> {
    pub fn rates(&self, mix: &[T]) -> Vec<T> {
        let n_users = self.weights.len();
        let mut r = vec![T::zero(); n_users];
        for (col, &x) in self.columns.iter().zip(mix) {
            if x == T::zero() {
                continue;
            }
            for (rk, &a) in r.iter_mut().zip(col) {
                *rk = *rk + x * a;
            }
        }
        r
    }

    pub fn value(&self, mix: &[T]) -> T {
        self.value_at_rates(&self.rates(mix))
    }

    fn value_at_rates(&self, rates: &[T]) -> T {
        rates
            .iter()
            .zip(self.weights)
            .map(|(&r, &w)| w * self.utility.value(r))
            .sum()
    }

    pub fn gradient(&self, rates: &[T]) -> Vec<T> {
        let marginal: Vec<T> = rates
            .iter()
            .zip(self.weights)
            .map(|(&r, &w)| w * self.utility.derivative(r))
            .collect();
        self.columns
            .iter()
            .map(|col| col.iter().zip(&marginal).map(|(&a, &m)| a * m).sum())
            .collect()
    }

    pub fn duality_gap(&self, mix: &[T], grad: &[T]) -> T {
        let inner: T = grad.iter().zip(mix).map(|(&g, &x)| g * x).sum();
        let best = grad.iter().copied().fold(T::neg_infinity(), T::max);
        (best - inner).max(T::zero())
    }
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex<T: Real>(v: &[T]) -> Vec<T> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumulative = T::zero();
    let mut theta = T::zero();
    for (i, &s) in sorted.iter().enumerate() {
        cumulative = cumulative + s;
        let candidate = (cumulative - T::one()) / T::from_usize_lossy(i + 1);
        if s - candidate > T::zero() {
            theta = candidate;
        }
    }
    v.iter().map(|&x| (x - theta).max(T::zero())).collect()
}

/// Projected gradient ascent with Barzilai-Borwein steps and Armijo
/// backtracking, optionally warm started.
pub fn maximize_mixture<T: Real>(
    problem: &MixtureProblem<'_, T>,
    warm: Option<&[T]>,
    options: MixtureOptions,
) -> Result<MixtureSolution<T>> {
    let n = problem.columns.len();
    if n == 0 {
        return Err(Error::Degenerate("no alternatives to mix".into()));
    }
    for col in problem.columns {
        if col.len() != problem.weights.len() {
            return Err(Error::Config("column length differs from user count".into()));
        }
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("mixture column".into()));
        }
        if col.iter().any(|&v| v < T::zero()) {
            return Err(Error::Config("mixture columns must be nonnegative".into()));
        }
    }
    let all_zero = problem.columns.iter().all(|c| c.iter().all(|&v| v == T::zero()));
    if all_zero && problem.utility != Utility::WeightedSum {
        return Err(Error::Degenerate("every alternative delivers zero rate".into()));
    }

    let mut x = match warm {
        Some(w) if w.len() == n && w.iter().all(|v| v.is_finite()) => project_simplex(w),
        _ => vec![T::one() / T::from_usize_lossy(n); n],
    };
    let mut rates = problem.rates(&x);
    let mut value = problem.value_at_rates(&rates);
    let mut grad = problem.gradient(&rates);
    let mut step = T::one();
    let mut iterations = 0;
    let tol = T::lit(options.gap_tol);
    let armijo = T::lit(1e-4);
    let mut stalls = 0;

    while iterations < options.max_iter {
        let gap = problem.duality_gap(&x, &grad);
        if gap <= tol * (T::one() + value.abs()) {
            break;
        }
        iterations += 1;
        let mut accepted = false;
        let mut trial_step = step;
        for _ in 0..60 {
            let target: Vec<T> = x.iter().zip(&grad).map(|(&xi, &g)| xi + trial_step * g).collect();
            let y = project_simplex(&target);
            let dir_dot: T = y.iter().zip(&x).zip(&grad).map(|((&yi, &xi), &g)| (yi - xi) * g).sum();
            let y_rates = problem.rates(&y);
            let y_value = problem.value_at_rates(&y_rates);
            if y_value >= value + armijo * dir_dot && dir_dot >= T::zero() {
                let y_grad = problem.gradient(&y_rates);
                let s: Vec<T> = y.iter().zip(&x).map(|(&a, &b)| a - b).collect();
                let g_diff: Vec<T> = y_grad.iter().zip(&grad).map(|(&a, &b)| a - b).collect();
                let ss: T = s.iter().map(|&v| v * v).sum();
                let sy: T = s.iter().zip(&g_diff).map(|(&a, &b)| a * b).sum();
                step = if sy < T::zero() {
                    (ss / -sy).min(T::lit(1e12)).max(T::lit(1e-12))
                } else {
                    (trial_step * T::lit(4.0)).min(T::lit(1e12))
                };
                if y_value - value <= T::epsilon() * (T::one() + value.abs()) {
                    stalls += 1;
                } else {
                    stalls = 0;
                }
                x = y;
                rates = y_rates;
                value = y_value;
                grad = y_grad;
                accepted = ss > T::zero() && stalls < 50;
                break;
            }
            trial_step = trial_step / T::lit(2.0);
        }
        if !accepted {
            break;
        }
    }

    let gap = problem.duality_gap(&x, &grad);
    Ok(MixtureSolution {
        mix: x,
        rates,
        value,
        gap,
        iterations,
    })
}

/// Shrinks the support of an optimal mixture to at most `max_support`
/// alternatives without lowering the objective by more than a relative
/// `1e-10`. Works in `f64` regardless of `T`.
pub fn reduce_support<T: Real>(
    problem: &MixtureProblem<'_, T>,
    solution: &MixtureSolution<T>,
    max_support: usize,
) -> MixtureSolution<T> {
    let mut mix: Vec<f64> = solution.mix.iter().map(|v| v.as_f64()).collect();
    let baseline = solution.value.as_f64();
    let allowed_loss = 1e-10 * (1.0 + baseline.abs());
    loop {
        let support: Vec<usize> = (0..mix.len()).filter(|&j| mix[j] > 0.0).collect();
        if support.len() <= max_support.max(1) {
            break;
        }
        let n_users = problem.weights.len();
        let s = support.len();
        let dim = s.max(n_users + 1);
        let mut m = DMatrix::<f64>::zeros(dim, s);
        for (c, &j) in support.iter().enumerate() {
            for k in 0..n_users {
                m[(k, c)] = problem.columns[j][k].as_f64();
            }
            m[(n_users, c)] = 1.0;
        }
        let svd = m.svd(false, true);
        let v_t = match svd.v_t {
            Some(v) => v,
            None => break,
        };
        let (idx, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        let z: Vec<f64> = v_t.row(idx).iter().copied().collect();
        let step = support
            .iter()
            .zip(&z)
            .filter(|(_, &zi)| zi < -1e-15)
            .map(|(&j, &zi)| mix[j] / -zi)
            .fold(f64::INFINITY, f64::min);
        if !step.is_finite() {
            break;
        }
        let mut trial = mix.clone();
        for (&j, &zi) in support.iter().zip(&z) {
            trial[j] = (trial[j] + step * zi).max(0.0);
            if trial[j] < 1e-15 {
                trial[j] = 0.0;
            }
        }
        let total: f64 = trial.iter().sum();
        trial.iter_mut().for_each(|v| *v /= total);
        let trial_t: Vec<T> = trial.iter().map(|&v| T::lit(v)).collect();
        if problem.value(&trial_t).as_f64() < baseline - allowed_loss {
            break;
        }
        mix = trial;
    }
    let mix_t: Vec<T> = mix.iter().map(|&v| T::lit(v)).collect();
    let rates = problem.rates(&mix_t);
    let value = problem.value(&mix_t);
    let grad = problem.gradient(&rates);
    MixtureSolution {
        gap: problem.duality_gap(&mix_t, &grad),
        mix: mix_t,
        rates,
        value,
        iterations: solution.iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn projection_lands_on_simplex() {
        let p = project_simplex(&[0.5, 2.0, -1.0]);
        assert_eq!(p, vec![0.0, 1.0, 0.0]);
        let p = project_simplex(&[0.2f64, 0.2]);
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn symmetric_singletons_split_evenly() {
        let columns = vec![vec![1.0f64, 0.0], vec![0.0, 1.0]];
        let problem = MixtureProblem {
            columns: &columns,
            weights: &[1.0, 1.0],
            utility: Utility::ProportionalFair,
        };
        let s = maximize_mixture(&problem, None, MixtureOptions::default()).unwrap();
        assert!((s.mix[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn dominant_column_takes_all_mass_under_weighted_sum() {
        let columns = vec![vec![1.0, 2.0], vec![2.0, 3.0]];
        let problem = MixtureProblem {
            columns: &columns,
            weights: &[1.0, 1.0],
            utility: Utility::WeightedSum,
        };
        let s = maximize_mixture(&problem, None, MixtureOptions::default()).unwrap();
        assert_eq!(s.mix, vec![0.0, 1.0]);
    }

    #[test]
    fn all_zero_columns_are_degenerate_for_log_utility() {
        let columns = vec![vec![0.0, 0.0]];
        let problem = MixtureProblem {
            columns: &columns,
            weights: &[1.0, 1.0],
            utility: Utility::ProportionalFair,
        };
        assert!(matches!(
            maximize_mixture(&problem, None, MixtureOptions::default()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn duplicate_columns_collapse_to_user_count() {
        let columns = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5], vec![1.0, 0.0]];
        let problem = MixtureProblem {
            columns: &columns,
            weights: &[1.0, 1.0],
            utility: Utility::ProportionalFair,
        };
        let s = maximize_mixture(&problem, Some(&[0.25, 0.25, 0.25, 0.25]), MixtureOptions::default()).unwrap();
        let r = reduce_support(&problem, &s, 2);
        assert!(r.mix.iter().filter(|&&v| v > 0.0).count() <= 2);
        assert!(r.value >= s.value - 1e-9);
    }

    proptest! {
        #[test]
        fn kkt_holds_on_random_problems(
            cols in proptest::collection::vec(proptest::collection::vec(0.0f64..5.0, 3), 1..5),
            w in proptest::collection::vec(0.1f64..2.0, 3),
        ) {
            prop_assume!(cols.iter().any(|c| c.iter().all(|&v| v > 1e-3)));
            let problem = MixtureProblem { columns: &cols, weights: &w, utility: Utility::ProportionalFair };
            let s = maximize_mixture(&problem, None, MixtureOptions::default()).unwrap();
            let total: f64 = s.mix.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(s.gap <= 1e-6 * (1.0 + s.value.abs()));
        }
    }
}

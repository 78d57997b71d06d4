//! Splitting the subbands between the Type A and Type B groups.

use crate::error::{Error, Result};
use crate::scalar::{golden_section_max, Real};
use crate::utility::Utility;

/// Result of the subband split.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Partition<T: Real = f64> {
    /// Maximizer of the continuous relaxation.
    pub q_continuous: T,
    pub m_a: usize,
    pub m_b: usize,
}

impl<T: Real> Partition<T> {
    /// Fraction of subbands given to Type A users.
    pub fn q_s(&self) -> T {
        T::from_usize_lossy(self.m_a) / T::from_usize_lossy(self.m_a + self.m_b)
    }
}

/// Inputs to the split: per-subband utilities `sum_k w_k u(I_k)` of each
/// group and the group weight sums. `None` marks an empty group.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitInputs<T: Real = f64> {
    pub u_a: Option<T>,
    pub u_b: Option<T>,
    pub w_a: T,
    pub w_b: T,
}

/// Network utility when a fraction `q` of `subbands` carries Type A users.
pub fn split_objective<T: Real>(inputs: &SplitInputs<T>, utility: &Utility<T>, subbands: usize, q: T) -> T {
    let m = T::from_usize_lossy(subbands);
    let mut total = T::zero();
    if let Some(u_a) = inputs.u_a {
        let (f, g) = utility.scaling_pair(m * q);
        total = total + f * u_a + g * inputs.w_a;
    }
    if let Some(u_b) = inputs.u_b {
        let (f, g) = utility.scaling_pair(m * (T::one() - q));
        total = total + f * u_b + g * inputs.w_b;
    }
    total
}

/// Maximizes [`split_objective`] over `[1/M, 1 - 1/M]` and picks the better
/// of the two neighbouring integer splits.
pub fn solve_qs<T: Real>(inputs: &SplitInputs<T>, utility: &Utility<T>, subbands: usize) -> Result<Partition<T>> {
    if subbands < 2 {
        return Err(Error::Config("need at least two subbands".into()));
    }
    match (inputs.u_a, inputs.u_b) {
        (None, None) => return Err(Error::Config("both user groups are empty".into())),
        (Some(_), None) => {
            return Ok(Partition {
                q_continuous: T::one(),
                m_a: subbands,
                m_b: 0,
            })
        }
        (None, Some(_)) => {
            return Ok(Partition {
                q_continuous: T::zero(),
                m_a: 0,
                m_b: subbands,
            })
        }
        _ => {}
    }
    let m = T::from_usize_lossy(subbands);
    let lo = T::one() / m;
    let hi = T::one() - lo;
    let (q_star, _) = golden_section_max(
        |q| split_objective(inputs, utility, subbands, q),
        lo,
        hi,
        T::lit(1e-10).max(T::epsilon() * T::lit(16.0)),
    );
    let scaled = (q_star * m).as_f64();
    let mut best: Option<(usize, T)> = None;
    for m_a in [scaled.floor() as usize, scaled.ceil() as usize] {
        let m_a = m_a.clamp(1, subbands - 1);
        let value = split_objective(inputs, utility, subbands, T::from_usize_lossy(m_a) / m);
        match best {
            Some((_, v)) if value <= v => {}
            _ => best = Some((m_a, value)),
        }
    }
    let (m_a, _) = best.expect("two candidates");
    Ok(Partition {
        q_continuous: q_star,
        m_a,
        m_b: subbands - m_a,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proportional_fair_split_follows_weight_ratio() {
        let inputs = SplitInputs {
            u_a: Some(3.0f64),
            u_b: Some(-1.0),
            w_a: 20.0,
            w_b: 10.0,
        };
        let p = solve_qs(&inputs, &Utility::ProportionalFair, 30).unwrap();
        assert!((p.q_continuous - 2.0 / 3.0).abs() < 1e-6);
        assert_eq!((p.m_a, p.m_b), (20, 10));
        let grid_best = (1..10_000)
            .map(|i| i as f64 / 10_000.0)
            .map(|q| (q, split_objective(&inputs, &Utility::ProportionalFair, 30, q)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert!((grid_best.0 - 2.0 / 3.0).abs() < 1e-4);
    }

    #[test]
    fn empty_groups_take_everything() {
        let only_a = SplitInputs {
            u_a: Some(1.0),
            u_b: None,
            w_a: 1.0,
            w_b: 0.0,
        };
        let p = solve_qs(&only_a, &Utility::ProportionalFair, 10).unwrap();
        assert_eq!((p.q_s(), p.m_a), (1.0, 10));
        let none = SplitInputs::<f64> {
            u_a: None,
            u_b: None,
            w_a: 0.0,
            w_b: 0.0,
        };
        assert!(solve_qs(&none, &Utility::ProportionalFair, 10).is_err());
    }

    #[test]
    fn weighted_sum_split_sits_on_the_boundary() {
        let inputs = SplitInputs {
            u_a: Some(2.0),
            u_b: Some(5.0),
            w_a: 3.0,
            w_b: 4.0,
        };
        let p = solve_qs(&inputs, &Utility::WeightedSum, 12).unwrap();
        assert_eq!(p.m_a, 1);
        let flipped = SplitInputs {
            u_a: Some(5.0),
            u_b: Some(2.0),
            ..inputs
        };
        assert_eq!(solve_qs(&flipped, &Utility::WeightedSum, 12).unwrap().m_a, 11);
    }
}

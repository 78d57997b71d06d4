//! Blanking patterns, the nested-blanking pmf over them, and profiles.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net_model::TopologyGraph;
use crate::scalar::Real;

/// One bit per macro: `true` transmits data, `false` blanks.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AbrbPattern(Vec<bool>);

impl AbrbPattern {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn all_on(n_macro: usize) -> Self {
        Self(vec![true; n_macro])
    }

    pub fn all_blank(n_macro: usize) -> Self {
        Self(vec![false; n_macro])
    }

    /// Pattern transmitting exactly on `active`.
    pub fn with_active(n_macro: usize, active: impl IntoIterator<Item = usize>) -> Self {
        let mut bits = vec![false; n_macro];
        for n in active {
            bits[n] = true;
        }
        Self(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn transmits(&self, macro_bs: usize) -> bool {
        self.0[macro_bs]
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn blank_set(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &b)| !b).map(|(i, _)| i)
    }
}

impl fmt::Display for AbrbPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for AbrbPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

impl FromStr for AbrbPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '1' => Ok(true),
                '0' => Ok(false),
                _ => Err(Error::Config(format!("bad pattern bit `{c}` in `{s}`"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl Serialize for AbrbPattern {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AbrbPattern {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Draws an index from a probability vector.
pub fn sample_index<T: Real, R: Rng + ?Sized>(probs: &[T], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p.as_f64();
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|p| *p > T::zero()).unwrap_or(0)
}

/// A pmf over patterns whose blank sets form a chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SynchronousAbrbPmf<T: Real = f64> {
    support: Vec<AbrbPattern>,
    probs: Vec<T>,
}

fn check_unit_interval<T: Real>(q: &[T], what: &str) -> Result<()> {
    for (i, &v) in q.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("{what}[{i}]")));
        }
        if v < T::zero() || v > T::one() {
            return Err(Error::Config(format!("{what}[{i}] = {v} is outside [0, 1]")));
        }
    }
    Ok(())
}

/// The nested-blanking pmf whose marginal blanking probabilities equal
/// `q_blank`. The pattern blanking the `i` largest entries gets the gap
/// between the `i`-th and `(i+1)`-th largest value; empty gaps are dropped.
pub fn synchronous_pmf<T: Real>(q_blank: &[T]) -> Result<SynchronousAbrbPmf<T>> {
    check_unit_interval(q_blank, "q_A")?;
    let n = q_blank.len();
    let mut ascending: Vec<usize> = (0..n).collect();
    ascending.sort_by(|&a, &b| q_blank[a].partial_cmp(&q_blank[b]).unwrap().then(a.cmp(&b)));
    let descending: Vec<usize> = ascending.into_iter().rev().collect();

    let mut support = Vec::with_capacity(n + 1);
    let mut probs = Vec::with_capacity(n + 1);
    let mut bits = vec![true; n];
    for i in 0..=n {
        let upper = if i == 0 { T::one() } else { q_blank[descending[i - 1]] };
        let lower = if i == n { T::zero() } else { q_blank[descending[i]] };
        if i > 0 {
            bits[descending[i - 1]] = false;
        }
        let p = upper - lower;
        if p > T::zero() {
            support.push(AbrbPattern(bits.clone()));
            probs.push(p);
        }
    }
    Ok(SynchronousAbrbPmf { support, probs })
}

impl<T: Real> SynchronousAbrbPmf<T> {
    pub fn support(&self) -> &[AbrbPattern] {
        &self.support
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AbrbPattern, T)> {
        self.support.iter().zip(self.probs.iter().copied())
    }

    pub fn prob_of(&self, pattern: &AbrbPattern) -> T {
        self.iter()
            .find(|(p, _)| *p == pattern)
            .map_or(T::zero(), |(_, v)| v)
    }

    /// Probability that macro `n` blanks.
    pub fn marginal_blank(&self, n: usize) -> T {
        self.iter()
            .filter(|(p, _)| !p.transmits(n))
            .map(|(_, v)| v)
            .sum()
    }

    /// Total mass on patterns in the favourable set of BS `bs`.
    pub fn mass_in_set(&self, bs: usize, graph: &TopologyGraph) -> Result<T> {
        let mut total = T::zero();
        for (p, v) in self.iter() {
            if in_pattern_set(p, bs, graph)? {
                total = total + v;
            }
        }
        Ok(total)
    }

    /// Blank sets form a chain under inclusion.
    pub fn is_nested(&self) -> bool {
        let mut sets: Vec<Vec<usize>> = self.support.iter().map(|p| p.blank_set().collect()).collect();
        sets.sort_by_key(Vec::len);
        sets.windows(2)
            .all(|w| w[0].iter().all(|x| w[1].contains(x)))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &AbrbPattern {
        &self.support[sample_index(&self.probs, rng)]
    }
}

/// Whether `pattern` is favourable for BS `bs`: a macro transmits, or every
/// macro interfering with a pico's I-users blanks.
pub fn in_pattern_set(pattern: &AbrbPattern, bs: usize, graph: &TopologyGraph) -> Result<bool> {
    if bs >= graph.n_bs() {
        return Err(Error::UnknownBs(bs));
    }
    if graph.is_macro(bs) {
        Ok(pattern.transmits(bs))
    } else {
        Ok(graph.pico_macro_set(bs).iter().all(|&n| !pattern.transmits(n)))
    }
}

/// Distinct patterns used on Type B subbands.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbrbProfile {
    patterns: Vec<AbrbPattern>,
}

impl AbrbProfile {
    /// Drops duplicates (first occurrence wins) and enforces the size bound.
    pub fn new(patterns: Vec<AbrbPattern>, max_len: usize) -> Result<Self> {
        let mut unique: Vec<AbrbPattern> = Vec::with_capacity(patterns.len());
        for p in patterns {
            if !unique.contains(&p) {
                unique.push(p);
            }
        }
        if unique.len() > max_len {
            return Err(Error::ProfileTooLarge {
                len: unique.len(),
                max: max_len,
            });
        }
        Ok(Self { patterns: unique })
    }

    pub fn patterns(&self) -> &[AbrbPattern] {
        &self.patterns
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn position(&self, pattern: &AbrbPattern) -> Option<usize> {
        self.patterns.iter().position(|p| p == pattern)
    }
}

/// Probabilities over the patterns of an [`AbrbProfile`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ProfilePmf<T: Real = f64> {
    pub q: Vec<T>,
}

impl<T: Real> ProfilePmf<T> {
    pub fn uniform(len: usize) -> Self {
        Self {
            q: vec![T::one() / T::from_usize_lossy(len.max(1)); len],
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(&self.q, rng)
    }

    pub fn is_simplex(&self, tol: T) -> bool {
        let sum: T = self.q.iter().copied().sum();
        self.q.iter().all(|&v| v >= -tol) && (sum - T::one()).abs() <= tol
    }
}

/// One pattern per independent set, transmitting exactly on the macros
/// that serve its members; duplicates removed.
pub fn profile_from_mis(mis_list: &[Vec<usize>], graph: &TopologyGraph) -> Result<AbrbProfile> {
    let n_macro = graph.n_macro();
    let type_b = graph.type_b_users();
    let mut patterns = Vec::with_capacity(mis_list.len());
    for set in mis_list {
        let mut active = Vec::with_capacity(set.len());
        for &k in set {
            if k >= graph.n_users() || !type_b.contains(&k) {
                return Err(Error::UnknownUser(k));
            }
            active.push(graph.serving(k));
        }
        patterns.push(AbrbPattern::with_active(n_macro, active));
    }
    AbrbProfile::new(patterns, type_b.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net_model::{parse_fixture, FIG2};
    use crate::rng::{stream, Purpose};

    fn pat(s: &str) -> AbrbPattern {
        s.parse().unwrap()
    }

    #[test]
    fn two_macro_pmf_has_three_patterns() {
        let pmf = synchronous_pmf(&[0.7, 0.5]).unwrap();
        let got: Vec<(String, f64)> = pmf.iter().map(|(p, v)| (p.to_string(), v)).collect();
        let want = [("11", 0.3), ("01", 0.2), ("00", 0.5)];
        assert_eq!(got.len(), 3);
        for ((gp, gv), (wp, wv)) in got.iter().zip(want) {
            assert_eq!(gp, wp);
            assert!((gv - wv).abs() < 1e-12);
        }
        assert!((pmf.marginal_blank(0) - 0.7).abs() < 1e-12);
        assert!((pmf.marginal_blank(1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tied_marginals_drop_empty_pattern() {
        let pmf = synchronous_pmf(&[0.2f64, 0.5, 0.5]).unwrap();
        assert_eq!(pmf.support(), &[pat("111"), pat("100"), pat("000")]);
        for (g, w) in pmf.probs().iter().zip([0.5f64, 0.3, 0.2]) {
            assert!((g - w).abs() < 1e-12);
        }
        for (n, q) in [0.2f64, 0.5, 0.5].into_iter().enumerate() {
            assert!((pmf.marginal_blank(n) - q).abs() < 1e-12);
        }
    }

    #[test]
    fn never_blank_is_single_pattern() {
        let pmf = synchronous_pmf(&[0.0f32, 0.0]).unwrap();
        assert_eq!(pmf.support(), &[pat("11")]);
        assert_eq!(pmf.probs(), &[1.0]);
    }

    #[test]
    fn invalid_marginals_rejected() {
        assert!(synchronous_pmf(&[1.5]).is_err());
        assert!(synchronous_pmf(&[f64::NAN]).is_err());
    }

    #[test]
    fn favourable_sets_on_two_macro_fixture() {
        let f: crate::net_model::Fixture = parse_fixture(FIG2).unwrap();
        let g = f.graph();
        let all = ["00", "01", "10", "11"].map(pat);
        let set = |bs: usize| -> Vec<String> {
            all.iter()
                .filter(|p| in_pattern_set(p, bs, g).unwrap())
                .map(|p| p.to_string())
                .collect()
        };
        assert_eq!(set(0), ["10", "11"]);
        assert_eq!(set(1), ["01", "11"]);
        assert_eq!(set(2), ["00", "10"]);
        assert!(in_pattern_set(&pat("00"), 7, g).is_err());
    }

    #[test]
    fn sampling_matches_marginals() {
        let pmf = synchronous_pmf(&[0.7, 0.5]).unwrap();
        let mut rng = stream(5, Purpose::PatternA, 0, 0);
        let draws = 100_000;
        let blanks = (0..draws).filter(|_| !pmf.sample(&mut rng).transmits(0)).count();
        assert!((blanks as f64 / draws as f64 - 0.7).abs() < 0.01);

        let single = synchronous_pmf(&[0.0]).unwrap();
        assert_eq!(single.sample(&mut rng), &pat("1"));
    }

    #[test]
    fn profile_dedupes_and_bounds() {
        let p = AbrbProfile::new(vec![pat("101"), pat("101"), pat("010")], 4).unwrap();
        assert_eq!(p.patterns(), &[pat("101"), pat("010")]);
        assert!(matches!(
            AbrbProfile::new(vec![pat("1"), pat("0")], 1),
            Err(Error::ProfileTooLarge { .. })
        ));
    }

    #[test]
    fn pattern_round_trips_as_bit_string() {
        let p = pat("0110");
        assert_eq!(p.to_string(), "0110");
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, "\"0110\"");
        assert_eq!(serde_json::from_str::<AbrbPattern>(&json).unwrap(), p);
        assert!("012".parse::<AbrbPattern>().is_err());
    }
}

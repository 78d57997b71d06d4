//! Scalar abstraction shared by the optimization code.
//!
//! Everything that is pure math (pmf construction, utilities, the long
//! timescale solvers, the rate model) is written against [`Real`] so it can
//! run in `f32` or `f64`. The simulator itself is concrete `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + serde::Serialize
    + for<'de> serde::Deserialize<'de>
    + 'static
{
    /// Converts an `f64` literal. Panics only for values the type cannot
    /// represent at all, which never happens for the constants used here.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Index of the maximum element, lowest index on ties. `None` for empty input.
pub fn argmax_lowest<T: Real>(values: impl IntoIterator<Item = T>) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
/// Returns `(argmax, max)`; the endpoints are always evaluated too, so a
/// monotone function yields the correct boundary.
pub fn golden_section_max<T: Real>(
    mut f: impl FnMut(T) -> T,
    lo: T,
    hi: T,
    tol: T,
) -> (T, T) {
    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut guard = 0;
    while (b - a) > tol && guard < 400 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        guard += 1;
    }
    let mid = (a + b) / T::lit(2.0);
    let mut best = (mid, f(mid));
    for x in [lo, hi] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_prefers_lowest_index_on_ties() {
        assert_eq!(argmax_lowest([1.0, 3.0, 3.0, 2.0]), Some(1));
        assert_eq!(argmax_lowest(Vec::<f64>::new()), None);
    }

    #[test]
    fn golden_section_finds_interior_and_boundary_maxima() {
        let (x, fx) = golden_section_max(|x: f64| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
        assert!(fx.abs() < 1e-12);
        let (x, _) = golden_section_max(|x: f32| x, 0.0, 2.0, 1e-6);
        assert_eq!(x, 2.0);
    }
}

#![allow(dead_code)]

use std::fmt::Write;

use hetnet_rrm::net_model::{parse_fixture, Fixture};
use hetnet_rrm::Network;
use rand::Rng;

/// Small random topology in fixture text. Users get a serving BS and, with
/// probability `edge_p`, an interfering edge to each other BS.
pub fn random_fixture_text<R: Rng>(rng: &mut R, n_macro: usize, n_pico: usize, n_users: usize, edge_p: f64) -> String {
    let mut s = String::new();
    let n_bs = n_macro + n_pico;
    for b in 1..=n_bs {
        let kind = if b <= n_macro { "macro" } else { "pico" };
        let _ = writeln!(s, "bs {b} {kind}");
    }
    for u in 1..=n_users {
        let serving = rng.random_range(1..=n_bs);
        let _ = writeln!(s, "user {u} serving {serving}");
        let _ = writeln!(s, "edge {serving} {u}");
        let _ = writeln!(s, "snr {serving} {u} {:.3}", rng.random_range(5.0..30.0));
        for b in 1..=n_bs {
            if b != serving && rng.random_bool(edge_p) {
                let _ = writeln!(s, "edge {b} {u}");
                let _ = writeln!(s, "snr {b} {u} {:.3}", rng.random_range(0.0..15.0));
            }
        }
    }
    s
}

pub fn random_network<R: Rng>(rng: &mut R, n_macro: usize, n_pico: usize, n_users: usize, edge_p: f64) -> Network {
    let text = random_fixture_text(rng, n_macro, n_pico, n_users, edge_p);
    let f: Fixture = parse_fixture(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
    f.network
}

/// Golden-section maximum of a unimodal function on `[lo, hi]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > tol {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = f(a);
        }
    }
    let mut best = ((lo + hi) / 2.0, f((lo + hi) / 2.0));
    for x in [lo, hi] {
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// Every maximal independent set of a graph on `n <= 20` vertices, by
/// checking all subsets.
pub fn brute_force_mis(n: usize, adjacent: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        let set: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        let independent = set.iter().all(|&a| set.iter().all(|&b| a == b || !adjacent(a, b)));
        if !independent {
            continue;
        }
        let maximal = (0..n).all(|v| set.contains(&v) || set.iter().any(|&s| adjacent(s, v)));
        if maximal {
            out.push(set);
        }
    }
    out.sort();
    out
}

mod common;

use hetnet_rrm::abrb::{in_pattern_set, synchronous_pmf, AbrbPattern};
use hetnet_rrm::graph_b::{enumerate_mis, max_weight_independent_set, InterferenceGraph, MIS_CAP};
use hetnet_rrm::net_model::{parse_fixture, sample_small_scale, write_fixture, Category, Fixture};
use hetnet_rrm::opt_a::{ibar_a_closed_form, UserEstimateA};
use hetnet_rrm::scheduler::{schedule_all, SubbandType};
use hetnet_rrm::simplex::project_simplex;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn graph_from_mask(n: usize, mask: u64) -> InterferenceGraph {
    let mut edges = Vec::new();
    let mut bit = 0;
    for a in 0..n {
        for b in a + 1..n {
            if mask >> bit & 1 == 1 {
                edges.push((a, b));
            }
            bit += 1;
        }
    }
    InterferenceGraph::from_edges((0..n).collect(), (0..n).collect(), &edges).unwrap()
}

proptest! {
    #[test]
    fn pmf_is_nested_and_consistent(q in prop::collection::vec(0.0f64..=1.0, 1..7)) {
        let pmf = synchronous_pmf(&q).unwrap();
        prop_assert!(pmf.support().len() <= q.len() + 1);
        prop_assert!(pmf.is_nested());
        prop_assert!(pmf.probs().iter().all(|&p| p > 0.0));
        prop_assert!((pmf.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        for (j, &qj) in q.iter().enumerate() {
            prop_assert!((pmf.marginal_blank(j) - qj).abs() <= 1e-12);
        }
    }

    #[test]
    fn favourable_rate_moves_the_right_way(
        q in prop::collection::vec(0.0f64..=1.0, 3),
        bump in 0.0f64..0.5,
        j in 0usize..3,
        fav in 0.0f64..5.0,
    ) {
        let mut raised = q.clone();
        raised[j] = (q[j] + bump).min(1.0);
        let macro_n = UserEstimateA { user: 0, category: Category::MacroN, gate: vec![j], favourable: fav, unfavourable: 0.0, weight: 1.0 };
        let pico_i = UserEstimateA { user: 1, category: Category::PicoI, gate: vec![0, 1, 2], favourable: fav, unfavourable: 0.0, weight: 1.0 };
        // More blanking never helps a macro N-user and never hurts a pico I-user.
        prop_assert!(ibar_a_closed_form(&raised, &macro_n).unwrap() <= ibar_a_closed_form(&q, &macro_n).unwrap());
        prop_assert!(ibar_a_closed_form(&raised, &pico_i).unwrap() >= ibar_a_closed_form(&q, &pico_i).unwrap());
    }

    #[test]
    fn mis_enumeration_matches_brute_force(n in 1usize..10, mask in any::<u64>()) {
        let ig = graph_from_mask(n, mask);
        let want = common::brute_force_mis(n, |a, b| ig.adjacent(a, b));
        prop_assert_eq!(enumerate_mis(&ig, MIS_CAP).unwrap().sets, want);
    }

    #[test]
    fn mwis_is_exact(n in 1usize..10, mask in any::<u64>(), w in prop::collection::vec(0.0f64..3.0, 10)) {
        let ig = graph_from_mask(n, mask);
        let weights = &w[..n];
        let got = max_weight_independent_set(&ig, weights, MIS_CAP).unwrap();
        let best = common::brute_force_mis(n, |a, b| ig.adjacent(a, b))
            .iter()
            .map(|s| s.iter().map(|&v| weights[v]).sum::<f64>())
            .fold(0.0, f64::max);
        prop_assert!(ig.is_maximal_independent(&got.set));
        prop_assert!(got.exact);
        prop_assert!((got.weight - best).abs() <= 1e-12);
    }

    #[test]
    fn projection_is_closest_point_on_simplex(v in prop::collection::vec(-3.0f64..3.0, 1..8)) {
        let p = project_simplex(&v);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        // Optimality: (v - p) . (y - p) <= 0 for every vertex y.
        let dot_p: f64 = v.iter().zip(&p).map(|(a, b)| (a - b) * b).sum();
        for i in 0..v.len() {
            prop_assert!((v[i] - p[i]) - dot_p <= 1e-12);
        }
    }

    #[test]
    fn fixtures_round_trip_and_schedules_stay_legal(seed in any::<u64>(), bits in any::<u8>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = common::random_network(&mut rng, 3, 2, 8, 0.4);
        let again: Fixture = parse_fixture(&write_fixture(&net)).unwrap();
        prop_assert_eq!(&again.network.graph, &net.graph);

        let g = &net.graph;
        let pattern = AbrbPattern::new((0..3).map(|j| bits >> j & 1 == 1).collect());
        let sample = sample_small_scale(&net.state, g, seed, 0, 0);
        let weights = vec![1.0; g.n_users()];
        for kind in [SubbandType::A, SubbandType::B] {
            let (decision, _) = schedule_all(&net, &pattern, &sample, kind, &weights);
            prop_assert!(decision.is_legal(g, kind, &pattern));
        }
        for bs in 0..g.n_bs() {
            prop_assert!(in_pattern_set(&pattern, bs, g).is_ok());
        }
    }
}

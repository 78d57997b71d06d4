use hetnet_rrm::baselines::{run_baseline1, run_baseline2, select_blanking_rate};
use hetnet_rrm::net_model::{parse_fixture, Fixture, FIG2};
use hetnet_rrm::scheduler::RateTracker;
use hetnet_rrm::sim::{
    run_on_network, run_simulation, run_simulation_traced, run_superframe, Algorithm, BsContext, Rrms,
    ScenarioConfig,
};
use hetnet_rrm::Network;

fn small_config(seed: u64, superframes: usize) -> ScenarioConfig {
    let mut c = ScenarioConfig::default();
    c.network.seed = seed;
    c.network.superframe_len = 50;
    c.simulation.superframes = superframes;
    c
}

fn fixture(text: &str) -> Network {
    let f: Fixture = parse_fixture(text).unwrap();
    f.network
}

fn rows_of_superframe(trace: &str, superframe: usize, len: usize) -> Vec<&str> {
    trace
        .lines()
        .skip(1)
        .filter(|l| {
            let t: usize = l.split('\t').next().unwrap().parse().unwrap();
            t / len == superframe
        })
        .collect()
}

#[test]
fn identical_inputs_give_identical_bytes_serial_or_parallel() {
    for algorithm in Algorithm::ALL {
        let mut c = small_config(4, 3);
        let a = run_simulation(&c, algorithm).unwrap().to_jsonl();
        let b = run_simulation(&c, algorithm).unwrap().to_jsonl();
        c.simulation.parallel = false;
        let serial = run_simulation(&c, algorithm).unwrap();
        assert_eq!(a, b, "{algorithm}");
        // The header records the parallel flag; everything after it must match.
        let tail = |s: &str| s.lines().skip(1).collect::<Vec<_>>().join("\n");
        assert_eq!(tail(&a), tail(&serial.to_jsonl()), "{algorithm}");
    }
}

#[test]
fn delayed_broadcast_leaves_bs_decisions_on_the_old_control() {
    let mut c = small_config(2, 2);
    c.simulation.broadcast_delay = 1;
    let delayed = run_simulation_traced(&c, Algorithm::Proposed, true).unwrap().trace.unwrap();
    c.simulation.broadcast_delay = 0;
    let prompt = run_simulation_traced(&c, Algorithm::Proposed, true).unwrap().trace.unwrap();

    // Rebuild super-frame 1 by hand from the warm-up control only.
    let net = Network::generate(&c.network, c.network.seed).unwrap();
    let weights = vec![1.0; net.graph.n_users()];
    let ctx = BsContext {
        net: &net,
        seed: c.network.seed,
        superframe_len: 50,
        subbands: c.network.subbands,
        utility: c.simulation.utility,
        weights: &weights,
        parallel: true,
    };
    let mut rrms = Rrms::new(&net, &c.simulation, c.network.subbands);
    let initial = rrms.initial_control().unwrap();
    let mut tracker = RateTracker::new(net.graph.n_users());
    run_superframe(&ctx, &initial, &mut tracker, 0, None).unwrap();
    let mut by_hand = String::from("header\n");
    run_superframe(&ctx, &initial, &mut tracker, 1, Some(&mut by_hand)).unwrap();

    assert_eq!(rows_of_superframe(&delayed, 0, 50), rows_of_superframe(&prompt, 0, 50));
    assert_eq!(rows_of_superframe(&delayed, 1, 50), rows_of_superframe(&by_hand, 1, 50));
    assert_ne!(rows_of_superframe(&delayed, 1, 50), rows_of_superframe(&prompt, 1, 50));
}

#[test]
fn all_n_user_single_macro_stops_blanking_and_matches_plain_pf() {
    let net = fixture("bs 1 macro\nuser 1 serving 1\nuser 2 serving 1\nuser 3 serving 1\nsnr 1 2 10\nsnr 1 3 0\n");
    let c = small_config(3, 20);
    let proposed = run_on_network(&c, &net, Algorithm::Proposed, false).unwrap().report;
    let last = proposed.superframes.last().unwrap();
    assert_eq!(last.q_a, vec![0.0]);
    assert_eq!(last.m_a, c.network.subbands);
    let plain = run_baseline2(&c, &net, None).unwrap();
    assert_eq!(plain.header.baseline.as_ref().unwrap()["blanking_rate"], 0.0);
    let (p, b) = (proposed.summary.pf_utility, plain.summary.pf_utility);
    assert!((p - b).abs() <= 0.01 * b.abs(), "proposed {p} vs no-blanking {b}");
}

#[test]
fn baseline1_loses_to_proposed_without_interference() {
    let net = fixture("bs 1 macro\nbs 2 macro\nuser 1 serving 1\nuser 2 serving 1\nuser 3 serving 2\nuser 4 serving 2\n");
    let c = small_config(5, 10);
    let proposed = run_on_network(&c, &net, Algorithm::Proposed, false).unwrap().report;
    let b1 = run_baseline1(&c, &net, None).unwrap();
    assert!(b1.summary.pf_utility <= proposed.summary.pf_utility);
}

#[test]
fn dominant_macro_over_pico_i_users_picks_the_top_rate() {
    // Every user sits in a pico's expanded range under one strong macro.
    let net = fixture(
        "bs 1 macro\nbs 2 pico\nuser 1 serving 2\nuser 2 serving 2\nuser 3 serving 2\n\
         edge 1 1\nedge 1 2\nedge 1 3\nsnr 1 1 25\nsnr 1 2 25\nsnr 1 3 25\n",
    );
    let c = small_config(1, 1);
    let (best, scores) = select_blanking_rate(&c, &net);
    assert_eq!(best, c.baselines.rate_steps - 1);
    assert!(scores.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn baseline2_rate_is_reproducible_and_b2_beats_b1_on_fig2() {
    let net = fixture(FIG2);
    let c = small_config(8, 4);
    let (r1, _) = select_blanking_rate(&c, &net);
    let (r2, _) = select_blanking_rate(&c, &net);
    assert_eq!(r1, r2);
    let b1 = run_baseline1(&c, &net, None).unwrap();
    let b2 = run_baseline2(&c, &net, None).unwrap();
    assert!(b2.summary.pf_utility >= b1.summary.pf_utility);
}

#[test]
fn report_shape_and_group_partition() {
    let c = small_config(6, 2);
    let r = run_simulation(&c, Algorithm::Proposed).unwrap();
    let text = r.to_jsonl();
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["schema"], "hetnet-metrics/1");
    assert_eq!(first["record"], "header");
    let last: serde_json::Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(last["record"], "final");
    let g = r.summary.group_counts;
    assert_eq!(g.macro_n + g.macro_i + g.pico_n + g.pico_i, r.summary.users);
    assert!(r.summary.worst10_kbps <= r.summary.mean_kbps);
    assert_eq!(r.users_tsv().lines().count(), r.summary.users + 1);
    for sf in &r.superframes {
        assert_eq!(sf.m_a + sf.m_b, c.network.subbands);
    }
}

#[test]
fn short_horizons_and_bad_configs_are_errors() {
    let mut c = small_config(1, 1);
    c.simulation.superframes = 0;
    assert!(run_simulation(&c, Algorithm::Proposed).is_err());
    let mut c = small_config(1, 1);
    c.network.subbands = 0;
    assert!(run_simulation(&c, Algorithm::Baseline1).is_err());
}

#[test]
fn fig2_trajectory_keeps_controls_feasible() {
    let net = fixture(FIG2);
    let c = small_config(2, 12);
    let r = run_on_network(&c, &net, Algorithm::Proposed, false).unwrap().report;
    assert_eq!(r.superframes.len(), 12);
    for sf in &r.superframes {
        assert_eq!(sf.m_a + sf.m_b, c.network.subbands);
        assert!(sf.m_a >= 1 && sf.m_b >= 1);
        assert!(sf.q_a.iter().all(|q| (0.0..=1.0).contains(q)));
        assert!((sf.q_b.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(sf.u_a.is_finite() && sf.u_b.is_finite());
    }
    // The lone macro I-user never shares its profile, so it always transmits.
    assert_eq!(r.profiles[0].patterns.len(), 1);
    assert_eq!(r.profiles[0].patterns[0].to_string(), "01");
}

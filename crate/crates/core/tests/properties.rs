use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gsd_core::bits::{BitString, ParityString};
use gsd_core::circuit::{self, MzTree};
use gsd_core::info;
use gsd_core::noise::{self, PhysicalParams};
use gsd_core::optics::{self, PhaseConvention, StageNoise, EVEN_PORT, ODD_PORT};
use gsd_core::protocol::{self, Agent, ClickResult, DetectorAssignment};
use gsd_core::timing::{self, Geometry};

/// `(n, x, y)` with `n` in `1..=max_n`.
fn inputs(max_n: u32) -> impl Strategy<Value = (u32, BitString, BitString)> {
    (1..=max_n).prop_flat_map(|n| {
        let top = 1u64 << n;
        (Just(n), 0..top, 0..top).prop_map(|(n, x, y)| {
            (n, BitString::new(x, n).unwrap(), BitString::new(y, n).unwrap())
        })
    })
}

fn assignment(max_n: u32) -> impl Strategy<Value = DetectorAssignment> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(prop::bool::ANY, 1usize << n).prop_map(move |bits| {
            let owners = bits.into_iter().map(|b| if b { Agent::Bob } else { Agent::Alice }).collect();
            DetectorAssignment::from_owners(n, owners).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn mz_is_unitary_without_loss(a in 0u8..2, b in 0u8..2, phi in -7.0f64..7.0) {
        let out = optics::mz_transfer(a, b, &StageNoise::ideal(), Some(phi)).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phase_conventions_agree(a in 0u8..2, b in 0u8..2, loss in 0.0f64..0.9) {
        let noise = StageNoise::lossy(loss).unwrap();
        let zero = optics::mz_transfer_with(PhaseConvention::PiOnZero, a, b, &noise, None).unwrap();
        let one = optics::mz_transfer_with(PhaseConvention::PiOnOne, a, b, &noise, None).unwrap();
        for port in [EVEN_PORT, ODD_PORT] {
            prop_assert!((zero.probability(port) - one.probability(port)).abs() < 1e-12);
        }
    }

    #[test]
    fn loss_composes(eps in 0.0f64..0.99, k in 0usize..40) {
        let mut s = optics::TwoPortState::single(optics::Port::Zero);
        s = optics::apply_beam_splitter(s);
        for _ in 0..k {
            s = optics::apply_loss(s, eps).unwrap();
        }
        prop_assert!((s.norm_sqr() - (1.0 - eps).powi(k as i32)).abs() < 1e-12);
    }

    #[test]
    fn leaf_indexing_is_a_bijection(n in 1u32..=10) {
        let tree = MzTree::new(n).unwrap();
        let mut seen = vec![false; tree.leaf_count() as usize];
        for p in BitString::all(n).unwrap() {
            let parity = ParityString::from_bits(p);
            let leaf = tree.leaf_of(&parity).unwrap();
            prop_assert!(!seen[(leaf - 1) as usize]);
            seen[(leaf - 1) as usize] = true;
            prop_assert_eq!(tree.parity_of_leaf(leaf).unwrap(), parity);
        }
        prop_assert!(seen.into_iter().all(|s| s));
    }

    #[test]
    fn norm_is_conserved_under_any_noise(
        (n, x, y) in inputs(7),
        eps in 0.0f64..0.5,
        halfwidth in 0.0f64..3.0,
        seed in any::<u64>(),
    ) {
        let tree = MzTree::new(n).unwrap();
        let noise = StageNoise::new(eps, halfwidth).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = circuit::propagate_with_jitter(&tree, &x, &y, &noise, &mut rng).unwrap();
        prop_assert!((d.click_total() + d.lost - 1.0).abs() < 1e-9);
        prop_assert!(d.probs.iter().all(|p| *p >= 0.0));
        // Loss acts uniformly, so even a jittered front keeps (1-eps)^n in total.
        prop_assert!((d.click_total() - (1.0 - eps).powi(n as i32)).abs() < 1e-9);
    }

    #[test]
    fn clicker_decode_round_trips((_, x, y) in inputs(12)) {
        let (_, leaf) = circuit::parity_route(&x, &y).unwrap();
        prop_assert_eq!(protocol::decode_clicker(leaf, &y).unwrap(), x);
        prop_assert_eq!(protocol::decode_clicker(leaf, &x).unwrap(), y);
    }

    #[test]
    fn silent_agent_never_excludes_the_truth(a in assignment(5), seed in any::<u64>()) {
        let n = a.levels();
        let top = 1u64 << n;
        let x = BitString::new(seed % top, n).unwrap();
        let y = BitString::new((seed >> 20) % top, n).unwrap();
        let out = protocol::run_game(&x, &y, &a, &StageNoise::ideal(), None).unwrap();
        let ClickResult::Click { owner, .. } = out.result else {
            return Err(TestCaseError::fail("ideal run lost the photon"));
        };
        prop_assert_eq!(out.view(owner.other()), protocol::View::Silence);
        let silent = owner.other();
        let (own, truth) = match silent {
            Agent::Alice => (x, y),
            Agent::Bob => (y, x),
        };
        let k = protocol::decode_silent(&a, &own, silent).unwrap();
        prop_assert!(k.contains(&truth));
        prop_assert!(k.bits_gained >= 0.0 && k.bits_gained <= f64::from(n));
    }

    #[test]
    fn level_parity_silence_is_one_bit((n, x, y) in inputs(6), k_seed in any::<u32>()) {
        let k = 1 + k_seed % n;
        let a = DetectorAssignment::level_parity(n, k).unwrap();
        let report = protocol::play(&x, &y, &a, &StageNoise::ideal(), None).unwrap();
        let (_, knowledge) = report.silent_knowledge.unwrap();
        prop_assert!((knowledge.bits_gained - 1.0).abs() < 1e-12);
        prop_assert!(report.win);
    }

    #[test]
    fn total_gain_is_symmetric_and_bounded(n in 1u32..=16, m_seed in any::<u64>()) {
        let leaves = 1u64 << n;
        let m = m_seed % (leaves + 1);
        let v = info::analytic_total(n, m).unwrap();
        prop_assert!((v - info::analytic_total(n, leaves - m).unwrap()).abs() < 1e-9);
        prop_assert!(v >= f64::from(n) - 1e-12 && v <= f64::from(n) + 1.0 + 1e-12);
    }

    #[test]
    fn success_rate_is_monotone(
        n in 1u32..60,
        eps in 0.001f64..0.5,
        p1 in 0.01f64..0.99,
        eta in 0.01f64..0.99,
    ) {
        let p = PhysicalParams::new(p1, eps, eta).unwrap();
        let r = noise::success_rate(n, &p);
        let lossier = PhysicalParams { eps_stage: eps * 1.01, ..p };
        let brighter = PhysicalParams { p1: p1 + 0.005, ..p };
        let keener = PhysicalParams { eta_d: eta + 0.005, ..p };
        prop_assert!(noise::success_rate(n + 1, &p) < r);
        prop_assert!(noise::success_rate(n, &lossier) < r);
        prop_assert!(noise::success_rate(n, &brighter) > r);
        prop_assert!(noise::success_rate(n, &keener) > r);
    }

    #[test]
    fn window_grows_with_every_input(n in 2u32..20, d in 1.0f64..1e6, delta in 1e-3f64..1e3) {
        let g = Geometry::new(d, delta, 3e8, 0.0).unwrap();
        let base = timing::quantum_window(n, &g).t_lo;
        prop_assert!(timing::quantum_window(n + 1, &g).t_lo > base);
        let farther = Geometry { d: d * 1.5, ..g };
        let longer = Geometry { delta: delta * 1.5, ..g };
        prop_assert!(timing::quantum_window(n, &farther).t_lo > base);
        prop_assert!(timing::quantum_window(n, &longer).t_lo > base);
    }
}

#[test]
fn ideal_runs_click_exactly_once() {
    for n in 1..=4 {
        for pattern_bits in 0..(1u64 << (1 << n)).min(64) {
            let owners = (0..1usize << n)
                .map(|i| if pattern_bits >> i & 1 == 1 { Agent::Bob } else { Agent::Alice })
                .collect();
            let a = DetectorAssignment::from_owners(n, owners).unwrap();
            for x in BitString::all(n).unwrap() {
                for y in BitString::all(n).unwrap() {
                    let out = protocol::run_game(&x, &y, &a, &StageNoise::ideal(), None).unwrap();
                    let clicks = [out.alice_view, out.bob_view]
                        .iter()
                        .filter(|v| matches!(v, protocol::View::Click { .. }))
                        .count();
                    assert_eq!(clicks, 1);
                }
            }
        }
    }
}

#[test]
fn observation_entropy_equals_mutual_information() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 1..=5u32 {
        for _ in 0..6 {
            let owners = (0..1usize << n)
                .map(|_| if rand::Rng::gen_bool(&mut rng, 0.5) { Agent::Bob } else { Agent::Alice })
                .collect();
            let a = DetectorAssignment::from_owners(n, owners).unwrap();
            let g = info::enumerate_gains(n, &a).unwrap();
            assert!((g.i_b - g.h_b).abs() < 1e-9, "{g:?}");
            assert!((g.i_a - g.h_a).abs() < 1e-9, "{g:?}");
            assert!((g.h_b - info::analytic_h_b(n, a.m()).unwrap()).abs() < 1e-9);
        }
    }
}

#[test]
fn single_detector_holder_gain_matches_closed_form() {
    // Alice holds one detector; when Bob clicks she can only exclude her own leaf.
    for n in 1..=6u32 {
        let want = f64::from(n) - ((1u64 << n) as f64 - 1.0).log2();
        for leaf in 1..=(1u64 << n) {
            let a = DetectorAssignment::single_alice(n, leaf).unwrap();
            let gain = info::conditional_silent_gain(&a, Agent::Alice).unwrap().unwrap();
            assert!((gain - want).abs() < 1e-9, "n={n} leaf={leaf}");
            let bob = info::conditional_silent_gain(&a, Agent::Bob).unwrap().unwrap();
            assert!((bob - f64::from(n)).abs() < 1e-9, "n={n} leaf={leaf}");
        }
    }
}

#[test]
fn circuit_loss_matches_middle_factor() {
    let p = PhysicalParams::REFERENCE;
    let noise = StageNoise::lossy(p.eps_stage).unwrap();
    for n in 1..=10u32 {
        let tree = MzTree::new(n).unwrap();
        let x = BitString::zeros(n).unwrap();
        let y = BitString::ones(n).unwrap();
        let d = circuit::propagate(&tree, &x, &y, &noise).unwrap();
        let middle = noise::success_rate(n, &p) / (p.p1 * p.eta_d);
        assert!((d.click_total() - middle).abs() < 1e-12);
    }
}

#[test]
fn classical_baseline_never_beats_the_window() {
    for n in 1..=10u32 {
        for d in [10.0, 300.0, 1e4, 1e6] {
            for delta in [1e-3, 0.1, 1.0, 5.0] {
                for slack_frac in [0.0, 0.3, 0.9] {
                    let hop = d / 3e8;
                    let g = Geometry::new(d, delta, 3e8, slack_frac * hop).unwrap();
                    if timing::validate_window(n, &g) {
                        let w = timing::quantum_window(n, &g);
                        let classical = timing::classical_bits_within(w.t_hi, &g);
                        assert!(classical <= u64::from(n), "n={n} d={d} delta={delta}");
                        let m = 1u64 << (n - 1);
                        let quantum = info::analytic_total(n, m).unwrap();
                        assert!((quantum - f64::from(n + 1)).abs() < 1e-9);
                    }
                }
            }
        }
    }
}

#[test]
fn monte_carlo_is_reproducible() {
    let p = PhysicalParams::REFERENCE;
    let a = noise::monte_carlo_rate(7, &p, 50_000, 99).unwrap();
    let b = noise::monte_carlo_rate(7, &p, 50_000, 99).unwrap();
    assert_eq!(a, b);
    let c = noise::monte_carlo_rate(7, &p, 50_000, 100).unwrap();
    assert_ne!(a.successes, c.successes);
}

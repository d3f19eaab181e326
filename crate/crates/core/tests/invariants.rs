mod common;

use common::{brute_expected, with_structure};
use fdpc::baselines::hub_nash;
use fdpc::config::CsiMode;
use fdpc::game::{Action, ChannelState, EfficiencyFunction, GainGrid, Game, Node, PowerGrid, UtilityParams};
use fdpc::optimizer::{
    exhaustive_cost, exhaustive_search, induced_joint, sequential_best_response, solve_multi_start, Evaluator,
    SweepOptions, EXHAUSTIVE_LIMIT,
};
use fdpc::verify::random_instance;
use fdpc::DecisionPolicy;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn efficiency_strategy() -> impl Strategy<Value = EfficiencyFunction> {
    prop_oneof![
        (0.1f64..6.0).prop_map(|r| EfficiencyFunction::from_spectral_efficiency(r).unwrap()),
        (1u32..64).prop_map(|l| EfficiencyFunction::packet_success(l).unwrap()),
    ]
}

fn random_pair(inst: &fdpc::Instance, seed: u64) -> (DecisionPolicy, DecisionPolicy) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (nv, m) = (inst.lottery.len(), inst.num_powers());
    (
        DecisionPolicy::random(Node::One, inst.num_signals(Node::One), nv, m, &mut rng),
        DecisionPolicy::random(Node::Two, inst.num_signals(Node::Two), nv, m, &mut rng),
    )
}

proptest! {
    #[test]
    fn efficiency_is_monotone_and_bounded(phi in efficiency_strategy(), a in 0.0f64..1e3, b in 0.0f64..1e3) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (flo, fhi) = (phi.eval(lo), phi.eval(hi));
        prop_assert!((0.0..=1.0).contains(&flo));
        prop_assert!((0.0..=1.0).contains(&fhi));
        prop_assert!(flo <= fhi);
    }

    #[test]
    fn utility_lies_between_energy_floor_and_one(
        phi in efficiency_strategy(),
        alpha in 0.0f64..1.0,
        idx in (0usize..3, 0usize..3, 0usize..3, 0usize..3, 0usize..4, 0usize..4, 0usize..4, 0usize..4),
    ) {
        let game = Game::symmetric(
            GainGrid::uniform(0.01, 10.0, 3).unwrap(),
            PowerGrid::uniform_db(-20.0, 20.0, 4).unwrap(),
            UtilityParams::new(alpha, 1.0, phi).unwrap(),
        );
        let x = ChannelState::new(idx.0, idx.1, idx.2, idx.3);
        let (a1, a2) = (Action::new(idx.4, idx.5), Action::new(idx.6, idx.7));
        let floor = -2.0 * alpha * game.powers.p_max();
        for node in Node::BOTH {
            let u = game.utility(node, &x, &a1, &a2);
            prop_assert!(u <= 1.0 && u >= floor - 1e-12);
        }
    }

    #[test]
    fn snr_is_symmetric_under_role_swap(
        idx in (0usize..3, 0usize..3, 0usize..3, 0usize..3, 0usize..4, 0usize..4, 0usize..4, 0usize..4),
    ) {
        let game = Game::symmetric(
            GainGrid::uniform(0.01, 10.0, 3).unwrap(),
            PowerGrid::uniform_db(-20.0, 20.0, 4).unwrap(),
            UtilityParams::new(0.1, 1.0, EfficiencyFunction::from_spectral_efficiency(1.0).unwrap()).unwrap(),
        );
        let x = ChannelState::new(idx.0, idx.1, idx.2, idx.3);
        let (a1, a2) = (Action::new(idx.4, idx.5), Action::new(idx.6, idx.7));
        let s1 = game.snr(Node::One, &x, &a1, &a2);
        let s2 = game.snr(Node::Two, &x.swapped(), &a2, &a1);
        prop_assert_eq!(s1, s2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn induced_law_is_normalized(seed in any::<u64>(), index in 0usize..30, pair_seed in any::<u64>()) {
        let (inst, _) = random_instance(seed, index, 3, 3).unwrap();
        let (f1, f2) = random_pair(&inst, pair_seed);
        let q = induced_joint(&inst, &f1, &f2).unwrap();
        prop_assert!((q.total_mass() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn evaluator_matches_term_by_term_sum(seed in any::<u64>(), index in 0usize..30, pair_seed in any::<u64>()) {
        let (inst, _) = random_instance(seed, index, 3, 3).unwrap();
        let (f1, f2) = random_pair(&inst, pair_seed);
        let fast = Evaluator::new(&inst).expected_utilities(&f1, &f2).unwrap();
        let slow = brute_expected(&inst, &f1, &f2);
        prop_assert!((fast.0 - slow.0).abs() <= 1e-12 && (fast.1 - slow.1).abs() <= 1e-12);
    }

    #[test]
    fn best_response_traces_are_monotone_and_finite(
        seed in any::<u64>(),
        index in 0usize..30,
        lambda in 0.0f64..=1.0,
        pair_seed in any::<u64>(),
    ) {
        let (inst, _) = random_instance(seed, index, 3, 3).unwrap();
        let eval = Evaluator::new(&inst);
        let run = sequential_best_response(&eval, lambda, random_pair(&inst, pair_seed), 100).unwrap();
        prop_assert!(run.trace_is_monotone(1e-12));
        prop_assert!(run.converged);
        prop_assert!((run.w - (lambda * run.u1 + (1.0 - lambda) * run.u2)).abs() <= 1e-9);
    }

    #[test]
    fn best_response_is_idempotent(seed in any::<u64>(), index in 0usize..30, lambda in 0.0f64..=1.0) {
        let (inst, _) = random_instance(seed, index, 3, 3).unwrap();
        let eval = Evaluator::new(&inst);
        let (_, f2) = random_pair(&inst, seed ^ 0x5555);
        let g = eval.best_response(Node::One, lambda, &f2).unwrap();
        let h = eval.best_response(Node::One, lambda, &f2).unwrap();
        prop_assert_eq!(&g, &h);
        let g2 = eval.best_response(Node::Two, lambda, &g).unwrap();
        prop_assert_eq!(g2, eval.best_response(Node::Two, lambda, &g).unwrap());
    }

    #[test]
    fn hub_point_is_the_all_min_pair(seed in any::<u64>(), index in 0usize..30) {
        let (inst, _) = random_instance(seed, index, 3, 3).unwrap();
        let hub = hub_nash(&inst.game, &inst.rho);
        let (u1, u2) = Evaluator::new(&inst)
            .expected_utilities(&inst.min_policy(Node::One), &inst.min_policy(Node::Two))
            .unwrap();
        prop_assert!((hub.u1 - u1).abs() <= 1e-12 && (hub.u2 - u2).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn multi_start_never_beats_the_exhaustive_optimum(
        seed in any::<u64>(),
        index in 0usize..30,
        lambda in 0.0f64..=1.0,
    ) {
        let (inst, _) = random_instance(seed, index, 2, 2).unwrap();
        prop_assume!(exhaustive_cost(&inst) <= EXHAUSTIVE_LIMIT / 10.0);
        let eval = Evaluator::new(&inst);
        let opts = SweepOptions { restarts: 4, seed, max_sweeps: 100 };
        let best = solve_multi_start(&eval, lambda, &opts).unwrap();
        let ex = exhaustive_search(&inst, lambda).unwrap();
        prop_assert!(best.result.w <= ex.w + 1e-12);
    }

    #[test]
    fn more_information_never_hurts(seed in any::<u64>(), index in 0usize..30, lambda in 0.0f64..=1.0) {
        let (base, _) = random_instance(seed, index, 2, 2).unwrap();
        let w = |csi| {
            let inst = with_structure(&base, csi);
            exhaustive_search(&inst, lambda).unwrap().w
        };
        prop_assume!(exhaustive_cost(&with_structure(&base, CsiMode::Local)) <= EXHAUSTIVE_LIMIT / 10.0);
        let (g, l, b) = (w(CsiMode::Global), w(CsiMode::Local), w(CsiMode::Blind));
        prop_assert!(g >= l - 1e-12, "global {} < local {}", g, l);
        prop_assert!(l >= b - 1e-12, "local {} < blind {}", l, b);
    }
}

//! Search-path checks: the fast best-response path against a dense-grid
//! oracle over true utilities, dynamics behavior on the benchmark network,
//! and optimum-vs-equilibrium welfare ordering.

use mobility_core::equilibrium::discrete_combos;
use mobility_core::rng::SeededRng;
use mobility_core::scenario::{builtin, testnet, Instance};
use mobility_core::{
    best_response, prospect_utility, run_dynamics, social_optimum, utility, verify_nash, Action,
    Behavior, BestResponseConfig, MechanicsConfig, TravelerProfile,
};
use mobility_core::prospect::{LotteryKind, ProspectModel};
use mobility_core::{BudgetLottery, ProspectParams, ReferencePolicy};

fn config() -> BestResponseConfig {
    BestResponseConfig::default()
}

#[test]
fn best_response_beats_dense_grid_oracle() {
    let mut rng = SeededRng::new(0xBEA7);
    let config = config();
    for _ in 0..30 {
        let instance = testnet::random_exact_instance(&mut rng);
        let assignment = testnet::random_profile(&instance, &mut rng);
        let i = rng.below(instance.traveler_count());
        let (action, claimed) = best_response(&instance, &Behavior::Rational, &assignment, i, &config);

        // the fast path must agree with the direct utility evaluation
        let direct = utility(&instance, &assignment.with(i, action), i);
        assert!(
            (claimed - direct).abs() <= 1e-9 * direct.abs().max(1.0),
            "fast path {claimed} vs direct {direct}"
        );

        // and must not be beaten by a 10^4-point payment grid over every triple
        let wallet_max = instance.travelers[i].wallet_max;
        let mut oracle_best = f64::NEG_INFINITY;
        for &(route, hub, service_type) in &discrete_combos(&instance) {
            for k in 0..=10_000u32 {
                let payment = wallet_max * k as f64 / 10_000.0;
                let candidate =
                    assignment.with(i, Action { route, hub, service_type, payment });
                oracle_best = oracle_best.max(utility(&instance, &candidate, i));
            }
        }
        assert!(
            claimed >= oracle_best - 1e-6,
            "grid oracle found {oracle_best}, best response only {claimed}"
        );
    }
}

#[test]
fn lone_traveler_takes_the_shorter_route() {
    // two parallel one-stop routes, identical except road length
    let mut config_net = builtin::fig3();
    config_net.traveler_count = 2;
    let mut network = config_net.resolve_network().unwrap();
    // make route 1 longer via xi2 on e2; hubs symmetric otherwise
    network.roads[1].xi2 = 50.0;
    for hub in network.hubs.iter_mut() {
        hub.budget = 0.0;
    }
    let travelers = vec![
        TravelerProfile { id: 0, wallet: 2.0, wallet_max: 10.0, eta: 0.5 },
        TravelerProfile { id: 1, wallet: 2.0, wallet_max: 10.0, eta: 0.5 },
    ];
    let instance = Instance::new(network, travelers, MechanicsConfig::default()).unwrap();
    let assignment = testnet::random_profile(&instance, &mut SeededRng::new(4));
    let (action, _) = best_response(&instance, &Behavior::Rational, &assignment, 0, &config());
    assert_eq!(action.route.0, 0, "expected the short route, got {:?}", action);
}

#[test]
fn rich_hub_draws_strictly_positive_payment() {
    let mut scenario = builtin::fig3();
    scenario.budget_law = mobility_core::scenario::BudgetLaw::Gaussian { mean: 30.0, stddev: 0.5 };
    let instance = scenario.instantiate(3).unwrap();
    let assignment = testnet::random_profile(&instance, &mut SeededRng::new(5));
    for i in 0..3 {
        let (action, _) = best_response(&instance, &Behavior::Rational, &assignment, i, &config());
        assert!(action.payment > 0.0, "traveler {i} refused to transact at a rich hub");
    }
}

#[test]
fn dynamics_started_at_equilibrium_stop_in_one_sweep() {
    let scenario = builtin::fig3();
    let instance = scenario.instantiate(11).unwrap();
    let config = config();
    let mut rng = SeededRng::new(11);
    let first = run_dynamics(
        &instance,
        &Behavior::Rational,
        instance.random_assignment(&mut rng),
        &config,
    );
    assert!(first.is_nash, "seeded run should converge");
    let again = run_dynamics(&instance, &Behavior::Rational, first.assignment.clone(), &config);
    assert!(again.is_nash);
    assert_eq!(again.rounds_used, 1, "restart from equilibrium must be a single quiet sweep");
    assert_eq!(again.potential_trace.len(), 1, "no accepted deviations expected");
}

#[test]
fn potential_trace_is_monotone_on_benchmark_runs() {
    let scenario = builtin::fig3();
    let config = config();
    for seed in 0..8u64 {
        for count in [2usize, 5, 9, 12] {
            let mut scenario = scenario.clone();
            scenario.traveler_count = count as u32;
            let instance = scenario.instantiate(seed).unwrap();
            let mut rng = SeededRng::child(seed, 77);
            let report = run_dynamics(
                &instance,
                &Behavior::Rational,
                instance.random_assignment(&mut rng),
                &config,
            );
            assert!(report.converged, "seed {seed} I={count} did not converge");
            for pair in report.potential_trace.windows(2) {
                assert!(
                    pair[1] >= pair[0] - 1e-9,
                    "potential decreased on an accepted step: {} -> {}",
                    pair[0],
                    pair[1]
                );
            }
        }
    }
}

#[test]
fn verify_nash_detects_planted_deviations() {
    let scenario = builtin::fig3();
    let instance = scenario.instantiate(2).unwrap();
    let config = config();
    let mut rng = SeededRng::new(2);
    let report = run_dynamics(
        &instance,
        &Behavior::Rational,
        instance.random_assignment(&mut rng),
        &config,
    );
    let (ok, gap) = verify_nash(&instance, &Behavior::Rational, &report.assignment, &config);
    assert!(ok && gap <= config.improvement_epsilon);

    // force traveler 0 onto the long route with a silly payment
    let spoiled = report.assignment.with(
        0,
        Action {
            route: mobility_core::RouteId(2),
            hub: mobility_core::HubId(1),
            service_type: mobility_core::ServiceTypeId(0),
            payment: instance.travelers[0].wallet_max,
        },
    );
    let (ok, gap) = verify_nash(&instance, &Behavior::Rational, &spoiled, &config);
    assert!(!ok && gap > 0.0);
}

#[test]
fn lone_traveler_optimum_equals_their_best_response() {
    let network = testnet::fig3_network(4.0);
    let travelers = vec![TravelerProfile { id: 0, wallet: 2.0, wallet_max: 10.0, eta: 0.6 }];
    let mut network = network;
    network.hubs[1].budget = 7.0;
    network.hubs[2].budget = -2.0;
    let instance = Instance::new(network, travelers, MechanicsConfig::default()).unwrap();
    let config = config();
    let optimum = social_optimum(&instance, &Behavior::Rational, &config, 9, &[]);
    assert!(!optimum.heuristic, "single traveler space must be enumerated");
    let start = testnet::random_profile(&instance, &mut SeededRng::new(9));
    let (_, br_value) = best_response(&instance, &Behavior::Rational, &start, 0, &config);
    assert!((optimum.welfare - br_value).abs() <= 1e-6 * br_value.abs().max(1.0));
}

#[test]
fn optimum_welfare_dominates_discovered_equilibria() {
    let mut scenario = builtin::fig3();
    scenario.traveler_count = 5;
    let config = config();
    for seed in [3u64, 14, 15] {
        let instance = scenario.instantiate(seed).unwrap();
        let mut rng = SeededRng::child(seed, 1);
        let ne = run_dynamics(
            &instance,
            &Behavior::Rational,
            instance.random_assignment(&mut rng),
            &config,
        );
        let optimum = social_optimum(&instance, &Behavior::Rational, &config, seed, &[ne.assignment.clone()]);
        assert!(optimum.welfare >= ne.welfare - 1e-9);
    }
}

#[test]
fn degenerate_linear_prospect_reproduces_rational_utilities() {
    let mut rng = SeededRng::new(0x7E57);
    for _ in 0..20 {
        let mut instance = testnet::random_exact_instance(&mut rng);
        // one common budget across hubs, lottery degenerate at it
        let common = rng.range(-5.0, 15.0);
        for hub in instance.network.hubs.iter_mut() {
            if hub.redistributes() {
                hub.budget = common;
            }
        }
        let params = ProspectParams { beta1: 1.0, beta2: 1.0, beta3: 1.0, lambda: 1.0 };
        let model = ProspectModel::compile(
            &instance.network,
            params,
            LotteryKind::Shared(BudgetLottery::degenerate(common)),
            ReferencePolicy::IdealRedistribution,
        )
        .unwrap();
        let assignment = testnet::random_profile(&instance, &mut rng);
        for i in 0..instance.traveler_count() {
            let pt = prospect_utility(&instance, &assignment, i, &model);
            let rational = utility(&instance, &assignment, i);
            assert!(
                (pt - rational).abs() <= 1e-9 * rational.abs().max(1.0),
                "prospect {pt} vs rational {rational}"
            );
        }
    }
}

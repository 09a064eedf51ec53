//! The load-bearing invariant of the whole engine: for any unilateral
//! deviation, the change in the (prospect) potential equals the deviating
//! traveler's change in (prospect) utility. Both sides are evaluated
//! independently - full utility recomputation on one side, the closed-form
//! potential on the other.

use mobility_core::prospect::{LotteryKind, ProspectModel};
use mobility_core::rng::SeededRng;
use mobility_core::scenario::testnet;
use mobility_core::{
    potential, prospect_potential, prospect_utility, utility, BudgetLottery, ProspectParams,
    ReferencePolicy,
};

#[test]
fn rational_potential_matches_unilateral_utility_changes() {
    let mut rng = SeededRng::new(0x1D_E217);
    let mut worst: f64 = 0.0;
    for _ in 0..1200 {
        let instance = testnet::random_exact_instance(&mut rng);
        let before = testnet::random_profile(&instance, &mut rng);
        let i = rng.below(instance.traveler_count());
        let deviation =
            testnet::random_action(&instance, instance.travelers[i].wallet_max, &mut rng);
        let after = before.with(i, deviation);

        let du = utility(&instance, &before, i) - utility(&instance, &after, i);
        let dphi = potential(&instance, &before) - potential(&instance, &after);
        let err = (dphi - du).abs() / du.abs().max(1.0);
        worst = worst.max(err);
        assert!(
            err <= 1e-9,
            "potential drift {err:e} (du = {du}, dphi = {dphi}) on instance with {} travelers",
            instance.traveler_count()
        );
    }
    println!("rational identity worst relative error: {worst:e}");
}

#[test]
fn prospect_potential_matches_unilateral_utility_changes() {
    let mut rng = SeededRng::new(0x9_B3A5);
    let mut worst: f64 = 0.0;
    for case in 0..1200 {
        let instance = testnet::random_exact_instance(&mut rng);
        let params = ProspectParams {
            beta1: 0.88,
            beta2: 0.88,
            beta3: rng.range(0.3, 1.0),
            lambda: rng.range(1.0, 3.0),
        };
        // rotate through the lottery and reference variants
        let lottery = match case % 3 {
            0 => LotteryKind::Shared(BudgetLottery::gaussian(
                rng.range(-3.0, 3.0),
                rng.range(1.0, 12.0),
                33,
            )),
            1 => LotteryKind::Shared(BudgetLottery::degenerate(rng.range(-10.0, 15.0))),
            _ => LotteryKind::DegenerateAtBudgets,
        };
        let reference = if case % 5 == 0 {
            ReferencePolicy::StatusQuoZero
        } else {
            ReferencePolicy::IdealRedistribution
        };
        let model =
            ProspectModel::compile(&instance.network, params, lottery, reference).unwrap();

        let before = testnet::random_profile(&instance, &mut rng);
        let i = rng.below(instance.traveler_count());
        let deviation =
            testnet::random_action(&instance, instance.travelers[i].wallet_max, &mut rng);
        let after = before.with(i, deviation);

        let du = prospect_utility(&instance, &before, i, &model)
            - prospect_utility(&instance, &after, i, &model);
        let dpsi = prospect_potential(&instance, &before, &model)
            - prospect_potential(&instance, &after, &model);
        let err = (dpsi - du).abs() / du.abs().max(1.0);
        worst = worst.max(err);
        assert!(err <= 1e-8, "prospect potential drift {err:e} (du = {du}, dpsi = {dpsi})");
    }
    println!("prospect identity worst relative error: {worst:e}");
}

#[test]
fn payment_only_deviations_close_on_pricing_and_relief() {
    // restricted identity: same route/hub/type, only the payment moves
    let mut rng = SeededRng::new(0xFACE);
    for _ in 0..400 {
        let instance = testnet::random_exact_instance(&mut rng);
        let before = testnet::random_profile(&instance, &mut rng);
        let i = rng.below(instance.traveler_count());
        let mut deviation = before[i];
        deviation.payment = rng.range(0.0, instance.travelers[i].wallet_max);
        let after = before.with(i, deviation);

        let du = utility(&instance, &before, i) - utility(&instance, &after, i);
        let dphi = potential(&instance, &before) - potential(&instance, &after);
        assert!((dphi - du).abs() <= 1e-9 * du.abs().max(1.0));
    }
}

//! The behavioral layer collapses onto the risk-neutral engine when the
//! funds lottery is certain and perception is linear; the anarchy ratio must
//! then agree between the two code paths on the same seeds.

use mobility_core::equilibrium::price_of_anarchy;
use mobility_core::prospect::{LotteryKind, ProspectModel};
use mobility_core::scenario::{builtin, SolverKind};
use mobility_core::{Behavior, ProspectParams, ReferencePolicy};

#[test]
fn linear_certain_prospect_reproduces_rational_anarchy_ratio() {
    let mut scenario = builtin::sweep();
    scenario.traveler_count = 6;
    // the same payment search for both engines
    scenario.solver.payment_solver = SolverKind::Grid;
    scenario.solver.grid_points = 600;

    for seed in [5u64, 21] {
        let instance = scenario.instantiate(seed).unwrap();
        let model = ProspectModel::compile(
            &instance.network,
            ProspectParams { beta1: 1.0, beta2: 1.0, beta3: 1.0, lambda: 1.0 },
            LotteryKind::DegenerateAtBudgets,
            ReferencePolicy::IdealRedistribution,
        )
        .unwrap();

        let rational = price_of_anarchy(
            &instance,
            &Behavior::Rational,
            &scenario.solver,
            scenario.n_starts,
            seed,
        )
        .unwrap();
        let prospect = price_of_anarchy(
            &instance,
            &Behavior::Prospect(model),
            &scenario.solver,
            scenario.n_starts,
            seed,
        )
        .unwrap();

        let (a, b) = (rational.poa.unwrap(), prospect.poa.unwrap());
        assert!(
            (a - b).abs() <= 1e-6 * a.abs().max(1.0),
            "seed {seed}: rational ratio {a} vs prospect ratio {b}"
        );
        assert!(
            (rational.welfare_worst_nash - prospect.welfare_worst_nash).abs()
                <= 1e-6 * rational.welfare_worst_nash.abs().max(1.0)
        );
    }
}

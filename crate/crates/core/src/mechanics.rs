//! Economic primitives of the rational-choice model: the hub pricing
//! mechanism, the empty-wallet disincentive, traveler utility and the exact
//! potential function that certifies unilateral deviations.

use serde::{Deserialize, Serialize};

use crate::network::{HubId, RoadLoads, RouteId, ServiceTypeId};
use crate::scenario::Instance;

/// Wallet state and socioeconomic weight of one traveler.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TravelerProfile {
    pub id: u32,
    /// Current wallet balance, in `[0, wallet_max]`.
    pub wallet: f64,
    /// Wallet ceiling; also bounds the feasible payment.
    pub wallet_max: f64,
    /// Socioeconomic weight in `(0, 1)` scaling how payments relieve the
    /// empty-wallet disincentive.
    pub eta: f64,
}

/// One traveler's full decision: route, hub stop, travel mode, payment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub route: RouteId,
    pub hub: HubId,
    pub service_type: ServiceTypeId,
    pub payment: f64,
}

/// The joint action profile of all travelers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    actions: Vec<Action>,
}

impl Assignment {
    pub fn new(actions: Vec<Action>) -> Self {
        Assignment { actions }
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn set(&mut self, traveler: usize, action: Action) {
        self.actions[traveler] = action;
    }

    /// Copy with one traveler's action replaced.
    pub fn with(&self, traveler: usize, action: Action) -> Self {
        let mut next = self.clone();
        next.actions[traveler] = action;
        next
    }
}

impl std::ops::Index<usize> for Assignment {
    type Output = Action;
    fn index(&self, i: usize) -> &Action {
        &self.actions[i]
    }
}

/// Unit conversion factors and the pricing-curve exponent.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MechanicsConfig {
    /// Time-to-money factor on the congestion term.
    pub zeta1: f64,
    /// Time-to-money factor on the waiting term.
    pub zeta2: f64,
    /// Exponent of the pricing curve: 2 for the quadratic mechanism, 2/3 for
    /// its flattened variant.
    pub pricing_exponent: f64,
}

impl Default for MechanicsConfig {
    fn default() -> Self {
        MechanicsConfig { zeta1: 1.0, zeta2: 1.0, pricing_exponent: 2.0 }
    }
}

/// The per-hub transform behind the pricing mechanism. Plain square at
/// `p = 2`; the sign-preserving power `|x|^p * sign(x)` otherwise, which keeps
/// fractional exponents real-valued on negative balances.
pub fn price_transform(x: f64, exponent: f64) -> f64 {
    if exponent == 2.0 {
        x * x
    } else {
        x.abs().powf(exponent) * x.signum()
    }
}

/// Pricing mechanism for one traveler at a hub: the transform of the excess
/// budget without their payment minus the transform with it. Positive values
/// are rewards, negative values fees.
pub fn pricing(budget: f64, others_sum: f64, payment: f64, exponent: f64) -> f64 {
    price_transform(budget - others_sum, exponent)
        - price_transform(budget - others_sum - payment, exponent)
}

/// Pricing term traveler `i` receives under `assignment`. Zero by convention
/// when the chosen stop is the origin or destination.
pub fn pricing_for(instance: &Instance, assignment: &Assignment, i: usize) -> f64 {
    let action = &assignment[i];
    let hub = instance.network.hub(action.hub);
    if !hub.redistributes() {
        return 0.0;
    }
    let others = payments_at_excluding(assignment, action.hub, i);
    pricing(hub.budget, others, action.payment, instance.mechanics.pricing_exponent)
}

/// Empty-wallet disincentive `wallet_max / (wallet + eta * payment)`.
/// Returns `+inf` on an exactly empty wallet with zero payment, which
/// equilibrium search treats as an infinitely penalized action.
pub fn disincentive(profile: &TravelerProfile, payment: f64) -> f64 {
    let denom = profile.wallet + profile.eta * payment;
    if denom <= 0.0 {
        return f64::INFINITY;
    }
    profile.wallet_max / denom
}

fn payments_at_excluding(assignment: &Assignment, hub: HubId, excluded: usize) -> f64 {
    assignment
        .actions()
        .iter()
        .enumerate()
        .filter(|(k, a)| *k != excluded && a.hub == hub)
        .map(|(_, a)| a.payment)
        .sum()
}

fn cohort_size(assignment: &Assignment, hub: HubId) -> usize {
    assignment.actions().iter().filter(|a| a.hub == hub).count()
}

/// Waiting cost of traveler `i`: cohort size over the service rate at their
/// hub for their mode. Zero at the origin/destination (no-stop variant).
fn waiting_cost(instance: &Instance, assignment: &Assignment, i: usize) -> f64 {
    let action = &assignment[i];
    let hub = instance.network.hub(action.hub);
    if !hub.redistributes() {
        return 0.0;
    }
    let rate = hub.rate(action.service_type).expect("validated instance");
    cohort_size(assignment, action.hub) as f64 / rate
}

fn congestion_cost(instance: &Instance, loads: &RoadLoads, route: RouteId) -> f64 {
    instance
        .network
        .route(route)
        .edges
        .iter()
        .map(|&e| instance.network.road(e).latency(loads.weighted_services(&instance.network, e)))
        .sum()
}

/// Utility of traveler `i` under the risk-neutral model: pricing reward,
/// minus disincentive, congestion and waiting costs. Congestion is evaluated
/// on the full assignment including traveler `i`'s own vehicle.
pub fn utility(instance: &Instance, assignment: &Assignment, i: usize) -> f64 {
    let loads = RoadLoads::tally(&instance.network, assignment);
    utility_with_loads(instance, assignment, i, &loads)
}

pub(crate) fn utility_with_loads(
    instance: &Instance,
    assignment: &Assignment,
    i: usize,
    loads: &RoadLoads,
) -> f64 {
    let action = &assignment[i];
    let tau = pricing_for(instance, assignment, i);
    let g = disincentive(&instance.travelers[i], action.payment);
    let congestion = congestion_cost(instance, loads, action.route);
    let waiting = waiting_cost(instance, assignment, i);
    tau - g - instance.mechanics.zeta1 * congestion - instance.mechanics.zeta2 * waiting
}

/// Social welfare: the sum of all traveler utilities.
pub fn welfare(instance: &Instance, assignment: &Assignment) -> f64 {
    let loads = RoadLoads::tally(&instance.network, assignment);
    (0..assignment.len()).map(|i| utility_with_loads(instance, assignment, i, &loads)).sum()
}

/// Exact potential of the rational-choice game. For every unilateral
/// deviation, the change in potential equals the deviating traveler's change
/// in utility (when vehicle counts move in unit steps and hub service rates
/// do not depend on the mode).
///
/// Terms: negated transform of each hub's excess budget, the summed
/// disincentives, the telescoped road latencies, and the telescoped waiting
/// loads per hub cohort.
pub fn potential(instance: &Instance, assignment: &Assignment) -> f64 {
    let net = &instance.network;
    let loads = RoadLoads::tally(net, assignment);
    let p = instance.mechanics.pricing_exponent;

    let mut pricing_term = 0.0;
    let mut waiting_term = 0.0;
    for hub in &net.hubs {
        if !hub.redistributes() {
            continue;
        }
        let cohort: Vec<usize> = assignment
            .actions()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.hub == hub.id)
            .map(|(k, _)| k)
            .collect();
        let total: f64 = cohort.iter().map(|&k| assignment[k].payment).sum();
        pricing_term -= price_transform(hub.budget - total, p);
        let size = cohort.len() as f64;
        for &k in &cohort {
            let rate = hub.rate(assignment[k].service_type).expect("validated instance");
            waiting_term -= (size + 1.0) / (2.0 * rate);
        }
    }

    let disincentive_term: f64 = (0..assignment.len())
        .map(|i| -disincentive(&instance.travelers[i], assignment[i].payment))
        .sum();

    let latency_term: f64 = net
        .roads
        .iter()
        .map(|road| -road.latency_telescope(loads.weighted_services(net, road.id)))
        .sum();

    pricing_term
        + disincentive_term
        + instance.mechanics.zeta1 * latency_term
        + instance.mechanics.zeta2 * waiting_term
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{HubId, RouteId, ServiceTypeId};
    use crate::rng::SeededRng;
    use crate::scenario::testnet;

    fn profile(wallet: f64, wallet_max: f64, eta: f64) -> TravelerProfile {
        TravelerProfile { id: 0, wallet, wallet_max, eta }
    }

    #[test]
    fn pricing_matches_hand_evaluated_squares() {
        // both squared terms evaluated independently and subtracted
        assert_eq!(pricing(10.0, 2.0, 3.0, 2.0), (10.0f64 - 2.0).powi(2) - (10.0f64 - 5.0).powi(2));
        assert_eq!(pricing(10.0, 2.0, 3.0, 2.0), 39.0);
        assert_eq!(pricing(0.0, 0.0, 2.0, 2.0), -4.0);
    }

    #[test]
    fn zero_payment_prices_at_zero() {
        let mut rng = SeededRng::new(7);
        for _ in 0..50 {
            let b = rng.range(-20.0, 20.0);
            let others = rng.range(0.0, 30.0);
            assert_eq!(pricing(b, others, 0.0, 2.0), 0.0);
            assert!(pricing(b, others, 0.0, 2.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn quadratic_pricing_agrees_with_expanded_form() {
        // 2 pi (b - pi/2 - sum_others) is the expanded quadratic difference
        let mut rng = SeededRng::new(11);
        for _ in 0..200 {
            let b = rng.range(-15.0, 25.0);
            let others = rng.range(0.0, 25.0);
            let pi = rng.range(0.0, 10.0);
            let squares = pricing(b, others, pi, 2.0);
            let expanded = 2.0 * pi * (b - pi / 2.0 - others);
            let scale = squares.abs().max(1.0);
            assert!((squares - expanded).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn fractional_exponent_is_odd_symmetric() {
        let p = 2.0 / 3.0;
        for x in [-8.0, -1.0, -0.3, 0.0, 0.3, 1.0, 8.0] {
            assert!((price_transform(-x, p) + price_transform(x, p)).abs() < 1e-12);
        }
        assert!((price_transform(8.0, p) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn disincentive_examples() {
        assert_eq!(disincentive(&profile(2.0, 10.0, 0.3), 0.0), 5.0);
        assert_eq!(disincentive(&profile(10.0, 10.0, 0.7), 0.0), 1.0);
        assert_eq!(disincentive(&profile(2.0, 10.0, 0.5), 4.0), 2.5);
    }

    #[test]
    fn disincentive_overflows_to_infinity_on_empty_wallet() {
        assert!(disincentive(&profile(0.0, 10.0, 0.5), 0.0).is_infinite());
        // a positive payment makes it finite again
        assert!(disincentive(&profile(0.0, 10.0, 0.5), 1.0).is_finite());
    }

    #[test]
    fn disincentive_is_strictly_decreasing() {
        let mut rng = SeededRng::new(3);
        for _ in 0..200 {
            let eta = rng.range(0.05, 0.95);
            let wallet = rng.range(0.5, 10.0);
            let p = profile(wallet, 10.0, eta);
            let pi = rng.range(0.0, 9.0);
            assert!(disincentive(&p, pi + 0.5) < disincentive(&p, pi));
            let richer = profile(wallet + 0.5, 10.0, eta);
            assert!(disincentive(&richer, pi) < disincentive(&p, pi));
        }
    }

    fn single_traveler_instance() -> Instance {
        let mut net = testnet::fig3_network(1.0);
        for hub in &mut net.hubs {
            hub.budget = 0.0;
        }
        Instance::new(net, vec![profile(2.0, 10.0, 0.5)], MechanicsConfig::default()).unwrap()
    }

    #[test]
    fn utility_composes_all_four_terms() {
        let instance = single_traveler_instance();
        let assignment = Assignment::new(vec![Action {
            route: RouteId(0),
            hub: HubId(1),
            service_type: ServiceTypeId(0),
            payment: 0.0,
        }]);
        // route 0 has two roads, each with the lone traveler's vehicle on it
        let per_road = 5.0 * 1.0 + 3.0;
        let rate = instance.network.hub(HubId(1)).rate(ServiceTypeId(0)).unwrap();
        let expect = 0.0 - 5.0 - 2.0 * per_road - 1.0 / rate;
        assert!((utility(&instance, &assignment, 0) - expect).abs() < 1e-12);
    }

    #[test]
    fn symmetric_travelers_earn_equal_utility() {
        let net = testnet::fig3_network(1.0);
        let travelers = vec![
            TravelerProfile { id: 0, wallet: 2.0, wallet_max: 10.0, eta: 0.4 },
            TravelerProfile { id: 1, wallet: 2.0, wallet_max: 10.0, eta: 0.4 },
        ];
        // equalize budgets so the disjoint positions are exactly symmetric
        let mut net = net;
        net.hubs[1].budget = 4.0;
        net.hubs[2].budget = 4.0;
        let instance = Instance::new(net, travelers, MechanicsConfig::default()).unwrap();
        let assignment = Assignment::new(vec![
            Action { route: RouteId(0), hub: HubId(1), service_type: ServiceTypeId(0), payment: 1.0 },
            Action { route: RouteId(1), hub: HubId(2), service_type: ServiceTypeId(0), payment: 1.0 },
        ]);
        let u0 = utility(&instance, &assignment, 0);
        let u1 = utility(&instance, &assignment, 1);
        assert!((u0 - u1).abs() < 1e-12);
    }

    #[test]
    fn empty_profile_potential_is_pure_disincentive() {
        let mut net = testnet::fig3_network(1.0);
        for hub in &mut net.hubs {
            hub.budget = 0.0;
        }
        let travelers = vec![profile(2.0, 10.0, 0.5), profile(4.0, 10.0, 0.5)];
        let instance = Instance::new(net, travelers, MechanicsConfig::default()).unwrap();
        // park both travelers at the destination with zero payments: every
        // pricing, latency and waiting term vanishes except the disincentive
        let park = Action {
            route: RouteId(0),
            hub: HubId(3),
            service_type: ServiceTypeId(0),
            payment: 0.0,
        };
        let assignment = Assignment::new(vec![park, park]);
        let phi = potential(&instance, &assignment);
        let expect = -(10.0 / 2.0 + 10.0 / 4.0)
            - instance
                .network
                .roads
                .iter()
                .map(|r| {
                    let loads = RoadLoads::tally(&instance.network, &assignment);
                    r.latency_telescope(loads.weighted_services(&instance.network, r.id))
                })
                .sum::<f64>();
        assert!((phi - expect).abs() < 1e-12);
    }
}

//! Equilibrium machinery: best responses over the coupled discrete-continuous
//! action set, round-robin dynamics that ascend the potential, equilibrium
//! certification, social optima, and the Price of Anarchy with its
//! traveler-count bound.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mechanics::{
    disincentive, pricing, utility, welfare, Action, Assignment,
};
use crate::network::{HubId, RoadLoads, RouteId, ServiceTypeId};
use crate::prospect::{prospect_potential, prospect_utility, prospect_welfare, ProspectModel, ReferencePolicy};
use crate::rng::SeededRng;
use crate::scenario::{Instance, SolverKind, SolverSettings};

/// Solver knobs for best-response search. Tolerances are monies; the
/// tie-break is lexicographic over (route, hub, type), lowest ids first.
pub type BestResponseConfig = SolverSettings;

/// Which behavioral model evaluates utilities.
#[derive(Debug, Clone)]
pub enum Behavior {
    Rational,
    Prospect(ProspectModel),
}

impl Behavior {
    pub fn utility(&self, instance: &Instance, assignment: &Assignment, i: usize) -> f64 {
        match self {
            Behavior::Rational => utility(instance, assignment, i),
            Behavior::Prospect(model) => prospect_utility(instance, assignment, i, model),
        }
    }

    pub fn welfare(&self, instance: &Instance, assignment: &Assignment) -> f64 {
        match self {
            Behavior::Rational => welfare(instance, assignment),
            Behavior::Prospect(model) => prospect_welfare(instance, assignment, model),
        }
    }

    pub fn potential(&self, instance: &Instance, assignment: &Assignment) -> f64 {
        match self {
            Behavior::Rational => crate::mechanics::potential(instance, assignment),
            Behavior::Prospect(model) => prospect_potential(instance, assignment, model),
        }
    }
}

/// How the one-dimensional payment maximization runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PaymentSolver {
    GoldenSection,
    Grid { points: u32 },
}

fn resolve_solver(config: &BestResponseConfig, behavior: &Behavior, exponent: f64) -> PaymentSolver {
    match config.payment_solver {
        SolverKind::GoldenSection => PaymentSolver::GoldenSection,
        SolverKind::Grid => PaymentSolver::Grid { points: config.grid_points },
        // golden-section needs the concave case: quadratic pricing under the
        // risk-neutral model; everything else falls back to the grid
        SolverKind::Auto => match behavior {
            Behavior::Rational if exponent == 2.0 => PaymentSolver::GoldenSection,
            _ => PaymentSolver::Grid { points: config.grid_points },
        },
    }
}

/// Maximize `f` on `[0, hi]`. Golden-section assumes concavity; the grid
/// scans `points + 1` evenly spaced payments (step `hi / points`). Ties go
/// to the lower payment.
fn maximize_payment(
    f: &dyn Fn(f64) -> f64,
    hi: f64,
    solver: PaymentSolver,
    tolerance: f64,
) -> (f64, f64) {
    if hi <= 0.0 {
        return (0.0, f(0.0));
    }
    match solver {
        PaymentSolver::GoldenSection => golden_max(f, 0.0, hi, tolerance),
        PaymentSolver::Grid { points } => {
            let n = points.max(1);
            let step = hi / n as f64;
            let mut best = (0.0, f(0.0));
            for k in 1..=n {
                let x = k as f64 * step;
                let v = f(x);
                if v > best.1 {
                    best = (x, v);
                }
            }
            best
        }
    }
}

fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tolerance: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let fa = f(a);
    let fb = f(b);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tolerance {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    let (mut x, mut v) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    // concavity still allows the optimum to sit on a boundary
    if fa >= v {
        x = a.min(x);
        if fa > v {
            x = a;
            v = fa;
        }
    }
    if fb > v {
        x = b;
        v = fb;
    }
    (x, v)
}

/// Payment-dependent part of traveler `i`'s objective at a candidate
/// (hub, type) position: pricing (or prospect gains) plus wallet relief.
/// Latency and waiting are constant in the payment and live outside.
fn payment_objective<'a>(
    instance: &'a Instance,
    behavior: &'a Behavior,
    i: usize,
    hub: HubId,
    others_sum: f64,
) -> Box<dyn Fn(f64) -> f64 + 'a> {
    let traveler = &instance.travelers[i];
    let hub_ref = instance.network.hub(hub);
    let redistributes = hub_ref.redistributes();
    let budget = hub_ref.budget;
    let exponent = instance.mechanics.pricing_exponent;
    match behavior {
        Behavior::Rational => Box::new(move |pi: f64| {
            let tau = if redistributes { pricing(budget, others_sum, pi, exponent) } else { 0.0 };
            tau - disincentive(traveler, pi)
        }),
        Behavior::Prospect(model) => {
            let reference = model.reference;
            Box::new(move |pi: f64| {
                let mut v = -disincentive(traveler, pi);
                if redistributes {
                    v += model.expected_gain(hub, pi);
                    if reference == ReferencePolicy::IdealRedistribution {
                        let full = others_sum + pi;
                        v += others_sum * others_sum - full * full;
                    }
                }
                v
            })
        }
    }
}

/// Per-hub cohort sizes and payment sums with one traveler excluded.
struct HubState {
    count: Vec<u32>,
    paid: Vec<f64>,
}

impl HubState {
    fn excluding(instance: &Instance, assignment: &Assignment, excluded: usize) -> Self {
        let n = instance.network.hubs.len();
        let mut count = vec![0u32; n];
        let mut paid = vec![0.0f64; n];
        for (k, a) in assignment.actions().iter().enumerate() {
            if k == excluded {
                continue;
            }
            count[a.hub.index()] += 1;
            paid[a.hub.index()] += a.payment;
        }
        HubState { count, paid }
    }
}

/// Best response of traveler `i`: exhaustive enumeration over (route, hub,
/// type) with a one-dimensional payment maximization per triple. Returns the
/// chosen action and its utility. Ties resolve to the lexicographically
/// lowest triple.
pub fn best_response(
    instance: &Instance,
    behavior: &Behavior,
    assignment: &Assignment,
    i: usize,
    config: &BestResponseConfig,
) -> (Action, f64) {
    let net = &instance.network;
    let loads = RoadLoads::tally_excluding(net, assignment, i);
    let hubs = HubState::excluding(instance, assignment, i);
    let solver = resolve_solver(config, behavior, instance.mechanics.pricing_exponent);
    let wallet_max = instance.travelers[i].wallet_max;

    let mut best: Option<(Action, f64)> = None;
    for route_idx in 0..net.routes.len() {
        let route = RouteId(route_idx as u32);
        for &hub in instance.stop_options(route) {
            for type_idx in 0..net.service_types.len() {
                let service_type = ServiceTypeId(type_idx as u32);
                let congestion: f64 = net
                    .route(route)
                    .edges
                    .iter()
                    .map(|&e| {
                        net.road(e).latency(loads.weighted_services_plus(net, e, service_type))
                    })
                    .sum();
                let hub_ref = net.hub(hub);
                let waiting = if hub_ref.redistributes() {
                    let rate = hub_ref.rate(service_type).expect("validated instance");
                    (hubs.count[hub.index()] + 1) as f64 / rate
                } else {
                    0.0
                };
                let fixed = -instance.mechanics.zeta1 * congestion
                    - instance.mechanics.zeta2 * waiting;
                let (payment, value) = if hub_ref.redistributes() {
                    let objective =
                        payment_objective(instance, behavior, i, hub, hubs.paid[hub.index()]);
                    maximize_payment(&objective, wallet_max, solver, config.payment_tolerance)
                } else {
                    // no transaction at the endpoint stop
                    (0.0, -disincentive(&instance.travelers[i], 0.0))
                };
                let total = value + fixed;
                let action = Action { route, hub, service_type, payment };
                if best.as_ref().map_or(true, |(_, b)| total > *b) {
                    best = Some((action, total));
                }
            }
        }
    }
    best.expect("nonempty action set")
}

/// Outcome of a dynamics run or an optimum search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub assignment: Assignment,
    pub is_nash: bool,
    pub converged: bool,
    /// Social welfare of the final assignment.
    pub welfare: f64,
    pub rounds_used: u32,
    /// Largest utility any traveler could still gain by deviating.
    pub worst_gap: f64,
    /// Potential value at the initial profile and after every accepted step.
    pub potential_trace: Vec<f64>,
    /// Set when an optimum was searched heuristically rather than enumerated.
    pub heuristic: bool,
}

/// Round-robin best-response dynamics from `initial` until no traveler can
/// improve by more than `improvement_epsilon`, or `max_rounds` sweeps pass.
pub fn run_dynamics(
    instance: &Instance,
    behavior: &Behavior,
    initial: Assignment,
    config: &BestResponseConfig,
) -> EquilibriumReport {
    let mut assignment = initial;
    let mut trace = vec![behavior.potential(instance, &assignment)];
    let mut converged = false;
    let mut rounds_used = 0;
    for round in 1..=config.max_rounds {
        rounds_used = round;
        let mut improved = false;
        for i in 0..instance.traveler_count() {
            let current = behavior.utility(instance, &assignment, i);
            let (action, value) = best_response(instance, behavior, &assignment, i, config);
            if value > current + config.improvement_epsilon {
                assignment.set(i, action);
                trace.push(behavior.potential(instance, &assignment));
                improved = true;
            }
        }
        if !improved {
            converged = true;
            break;
        }
    }
    let (gap_ok, worst_gap) = verify_nash(instance, behavior, &assignment, config);
    EquilibriumReport {
        welfare: behavior.welfare(instance, &assignment),
        is_nash: converged && gap_ok,
        converged,
        rounds_used,
        worst_gap,
        potential_trace: trace,
        heuristic: false,
        assignment,
    }
}

/// Recompute every traveler's best response and report the worst deviation
/// gap; the profile is an equilibrium when no gap exceeds the improvement
/// threshold.
pub fn verify_nash(
    instance: &Instance,
    behavior: &Behavior,
    assignment: &Assignment,
    config: &BestResponseConfig,
) -> (bool, f64) {
    let mut worst: f64 = 0.0;
    for i in 0..instance.traveler_count() {
        let current = behavior.utility(instance, assignment, i);
        let (_, value) = best_response(instance, behavior, assignment, i, config);
        worst = worst.max(value - current);
    }
    (worst <= config.improvement_epsilon, worst)
}

/// All (route, hub, type) triples in tie-break order.
pub fn discrete_combos(instance: &Instance) -> Vec<(RouteId, HubId, ServiceTypeId)> {
    let net = &instance.network;
    let mut combos = Vec::new();
    for route_idx in 0..net.routes.len() {
        let route = RouteId(route_idx as u32);
        for &hub in instance.stop_options(route) {
            for type_idx in 0..net.service_types.len() {
                combos.push((route, hub, ServiceTypeId(type_idx as u32)));
            }
        }
    }
    combos
}

/// Welfare as a function of traveler `i`'s payment with everything else
/// fixed: own pricing and relief plus the coupled terms of co-travelers at
/// the same hub.
fn social_payment_objective<'a>(
    instance: &'a Instance,
    behavior: &'a Behavior,
    assignment: &'a Assignment,
    i: usize,
    hub: HubId,
) -> Box<dyn Fn(f64) -> f64 + 'a> {
    let traveler = &instance.travelers[i];
    let hub_ref = instance.network.hub(hub);
    if !hub_ref.redistributes() {
        return Box::new(move |pi: f64| -disincentive(traveler, pi));
    }
    let budget = hub_ref.budget;
    let exponent = instance.mechanics.pricing_exponent;
    let cohort_payments: Vec<f64> = assignment
        .actions()
        .iter()
        .enumerate()
        .filter(|(k, a)| *k != i && a.hub == hub)
        .map(|(_, a)| a.payment)
        .collect();
    let others_sum: f64 = cohort_payments.iter().sum();
    match behavior {
        Behavior::Rational => Box::new(move |pi: f64| {
            let full = others_sum + pi;
            let mut v = pricing(budget, others_sum, pi, exponent) - disincentive(traveler, pi);
            for &pk in &cohort_payments {
                v += pricing(budget, full - pk, pk, exponent);
            }
            v
        }),
        Behavior::Prospect(model) => {
            let reference = model.reference;
            Box::new(move |pi: f64| {
                let full = others_sum + pi;
                let mut v = model.expected_gain(hub, pi) - disincentive(traveler, pi);
                if reference == ReferencePolicy::IdealRedistribution {
                    v += others_sum * others_sum - full * full;
                    for &pk in &cohort_payments {
                        let others_k = full - pk;
                        v += others_k * others_k - full * full;
                    }
                }
                v
            })
        }
    }
}

/// Cyclic coordinate ascent on the joint payment vector for a fixed discrete
/// profile, tried from both the all-zero and all-cap payment vectors (the
/// welfare surface is not jointly concave, so one ascent can stall).
/// Leaves the better vector in place and returns its welfare.
fn optimize_payments(
    instance: &Instance,
    behavior: &Behavior,
    assignment: &mut Assignment,
    config: &BestResponseConfig,
) -> f64 {
    let mut best: Option<(Assignment, f64)> = None;
    for start in [None, Some(0.0), Some(f64::INFINITY)] {
        let mut candidate = assignment.clone();
        if let Some(level) = start {
            for i in 0..instance.traveler_count() {
                let action = candidate[i];
                let payment = level.min(instance.travelers[i].wallet_max);
                candidate.set(i, Action { payment, ..action });
            }
        }
        let value = ascend_payments(instance, behavior, &mut candidate, config);
        if best.as_ref().map_or(true, |(_, b)| value > *b) {
            best = Some((candidate, value));
        }
    }
    let (winner, value) = best.expect("ascents ran");
    *assignment = winner;
    value
}

fn ascend_payments(
    instance: &Instance,
    behavior: &Behavior,
    assignment: &mut Assignment,
    config: &BestResponseConfig,
) -> f64 {
    let solver = resolve_solver(config, behavior, instance.mechanics.pricing_exponent);
    let mut last = behavior.welfare(instance, assignment);
    for _ in 0..50 {
        for i in 0..instance.traveler_count() {
            let action = assignment[i];
            let payment = {
                let objective =
                    social_payment_objective(instance, behavior, assignment, i, action.hub);
                maximize_payment(
                    &objective,
                    instance.travelers[i].wallet_max,
                    solver,
                    config.payment_tolerance,
                )
                .0
            };
            assignment.set(i, Action { payment, ..action });
        }
        let now = behavior.welfare(instance, assignment);
        if now - last <= config.improvement_epsilon {
            return now;
        }
        last = now;
    }
    last
}

/// Maximize social welfare. Small discrete spaces are enumerated exhaustively
/// with payments optimized per profile; larger ones fall back to multi-start
/// coordinate ascent over full actions and set the `heuristic` flag.
pub fn social_optimum(
    instance: &Instance,
    behavior: &Behavior,
    config: &BestResponseConfig,
    seed: u64,
    warm_starts: &[Assignment],
) -> EquilibriumReport {
    let combos = discrete_combos(instance);
    let n = instance.traveler_count();
    let space: f64 = (combos.len() as f64).powi(n as i32);
    let exhaustive = space <= config.enumeration_cap as f64;

    let mut best: Option<(Assignment, f64)> = None;
    let mut consider = |assignment: Assignment, value: f64| {
        if best.as_ref().map_or(true, |(_, b)| value > *b) {
            best = Some((assignment, value));
        }
    };

    if exhaustive {
        let mut indices = vec![0usize; n];
        loop {
            let actions: Vec<Action> = indices
                .iter()
                .map(|&c| {
                    let (route, hub, service_type) = combos[c];
                    Action { route, hub, service_type, payment: 0.0 }
                })
                .collect();
            let mut assignment = Assignment::new(actions);
            let value = optimize_payments(instance, behavior, &mut assignment, config);
            consider(assignment, value);
            // mixed-radix increment
            let mut pos = 0;
            loop {
                if pos == n {
                    break;
                }
                indices[pos] += 1;
                if indices[pos] < combos.len() {
                    break;
                }
                indices[pos] = 0;
                pos += 1;
            }
            if pos == n {
                break;
            }
        }
    } else {
        let ascend = |start: Assignment, consider: &mut dyn FnMut(Assignment, f64)| {
            let mut assignment = start;
            let mut value = optimize_payments(instance, behavior, &mut assignment, config);
            loop {
                let mut improved = false;
                for i in 0..n {
                    let incumbent = assignment[i];
                    let mut local_best = (incumbent, value);
                    for &(route, hub, service_type) in &combos {
                        let mut candidate =
                            assignment.with(i, Action { route, hub, service_type, payment: 0.0 });
                        let solver = resolve_solver(
                            config,
                            behavior,
                            instance.mechanics.pricing_exponent,
                        );
                        let payment = {
                            let objective =
                                social_payment_objective(instance, behavior, &candidate, i, hub);
                            maximize_payment(
                                &objective,
                                instance.travelers[i].wallet_max,
                                solver,
                                config.payment_tolerance,
                            )
                            .0
                        };
                        candidate.set(i, Action { route, hub, service_type, payment });
                        let v = behavior.welfare(instance, &candidate);
                        if v > local_best.1 + config.improvement_epsilon {
                            local_best = (candidate[i], v);
                        }
                    }
                    if local_best.1 > value + config.improvement_epsilon {
                        assignment.set(i, local_best.0);
                        value = local_best.1;
                        improved = true;
                    }
                }
                if !improved {
                    break;
                }
            }
            consider(assignment, value);
        };
        for warm in warm_starts {
            ascend(warm.clone(), &mut consider);
        }
        for s in 0..config.social_starts {
            let mut rng = SeededRng::child(seed, 0x50C1A1 + s as u64);
            ascend(instance.random_assignment(&mut rng), &mut consider);
        }
    }

    let (assignment, value) = best.expect("at least one profile considered");
    EquilibriumReport {
        welfare: value,
        is_nash: false,
        converged: true,
        rounds_used: 0,
        worst_gap: f64::NAN,
        potential_trace: vec![],
        heuristic: !exhaustive,
        assignment,
    }
}

/// The traveler-count inefficiency bound `2 + (5 / I) * sum_v b(v)^2`.
pub fn anarchy_bound(instance: &Instance) -> f64 {
    let squares: f64 = instance
        .network
        .hubs
        .iter()
        .filter(|h| h.redistributes())
        .map(|h| h.budget * h.budget)
        .sum();
    2.0 + 5.0 / instance.traveler_count() as f64 * squares
}

#[derive(Debug, Error)]
pub enum PoaError {
    #[error("no run converged to an equilibrium in {0} starts")]
    NoEquilibrium(u32),
}

/// Price-of-Anarchy measurement over multi-start dynamics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoaReport {
    /// Optimal welfare over the worst discovered equilibrium welfare;
    /// `None` when the denominator is nonpositive and the ratio undefined.
    pub poa: Option<f64>,
    /// The traveler-count bound the measured ratio is checked against.
    pub bound: f64,
    pub welfare_opt: f64,
    pub welfare_worst_nash: f64,
    pub welfare_best_nash: f64,
    pub n_starts: u32,
    pub n_converged: u32,
    pub rounds_max: u32,
    /// The discovered-equilibria minimum is a lower bound on the true worst
    /// case, and the optimum may itself be heuristic.
    pub heuristic_optimum: bool,
    pub diagnostics: Option<String>,
}

/// Run dynamics from `n_starts` seeded random profiles, take the worst
/// discovered equilibrium welfare, and compare against the social optimum.
pub fn price_of_anarchy(
    instance: &Instance,
    behavior: &Behavior,
    config: &BestResponseConfig,
    n_starts: u32,
    seed: u64,
) -> Result<PoaReport, PoaError> {
    price_of_anarchy_against(instance, behavior, behavior, config, n_starts, seed)
}

/// Variant with a distinct behavioral model for the optimum, used when the
/// benchmark welfare is evaluated at full rationality.
pub fn price_of_anarchy_against(
    instance: &Instance,
    behavior: &Behavior,
    optimum_behavior: &Behavior,
    config: &BestResponseConfig,
    n_starts: u32,
    seed: u64,
) -> Result<PoaReport, PoaError> {
    let mut equilibria: Vec<EquilibriumReport> = Vec::new();
    let mut rounds_max = 0;
    for s in 0..n_starts {
        let mut rng = SeededRng::child(seed, 0xD1CE + s as u64);
        let initial = instance.random_assignment(&mut rng);
        let report = run_dynamics(instance, behavior, initial, config);
        rounds_max = rounds_max.max(report.rounds_used);
        if report.is_nash {
            equilibria.push(report);
        }
    }
    if equilibria.is_empty() {
        return Err(PoaError::NoEquilibrium(n_starts));
    }
    let n_converged = equilibria.len() as u32;
    let (mut worst, mut best) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut best_assignment = None;
    for report in &equilibria {
        let w = optimum_behavior.welfare(instance, &report.assignment);
        if w < worst {
            worst = w;
        }
        if w > best {
            best = w;
            best_assignment = Some(report.assignment.clone());
        }
    }
    let warm: Vec<Assignment> = best_assignment.into_iter().collect();
    let optimum = social_optimum(instance, optimum_behavior, config, seed, &warm);
    let welfare_opt = optimum.welfare.max(best);

    let (poa, diagnostics) = if worst > 0.0 {
        (Some(welfare_opt / worst), None)
    } else {
        (
            None,
            Some(format!(
                "undefined (nonpositive denominator): welfare_opt={welfare_opt}, \
                 welfare_worst_nash={worst}"
            )),
        )
    };
    Ok(PoaReport {
        poa,
        bound: anarchy_bound(instance),
        welfare_opt,
        welfare_worst_nash: worst,
        welfare_best_nash: best,
        n_starts,
        n_converged,
        rounds_max,
        heuristic_optimum: optimum.heuristic,
        diagnostics,
    })
}

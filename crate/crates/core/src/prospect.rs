//! Prospect-theoretic behavioral layer: reference-dependent value function,
//! Prelec probability weighting, the discretized budget-uncertainty lottery,
//! subjective utility and the prospect potential.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mechanics::{disincentive, price_transform, Assignment};
use crate::network::RoadLoads;
use crate::scenario::Instance;

/// Behavioral parameters: diminishing-sensitivity exponents, the Prelec
/// rational index, and the loss-aversion multiplier.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ProspectParams {
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub lambda: f64,
}

impl Default for ProspectParams {
    /// The experimentally calibrated defaults (0.88, 0.88, 2.25) with an
    /// undistorted rational index.
    fn default() -> Self {
        ProspectParams { beta1: 0.88, beta2: 0.88, beta3: 1.0, lambda: 2.25 }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ProspectError {
    #[error("diminishing-sensitivity exponents must lie in (0, 1), got beta1={0}, beta2={1}")]
    BetaRange(f64, f64),
    #[error("value-function evaluation requires beta1 == beta2, got {0} and {1}")]
    BetaMismatch(f64, f64),
    #[error("rational index must lie in (0, 1], got {0}")]
    Beta3Range(f64),
    #[error("loss aversion must be >= 1, got {0}")]
    LambdaRange(f64),
    #[error("probability {0} outside [0, 1]")]
    ProbabilityRange(f64),
    #[error("lottery masses sum to {0}, expected 1")]
    MassSum(f64),
    #[error("lottery nodes must be sorted ascending")]
    UnsortedNodes,
    #[error("lottery needs equally many nodes and masses")]
    LengthMismatch,
}

impl ProspectParams {
    pub fn validate(&self) -> Result<(), ProspectError> {
        if !(0.0 < self.beta1 && self.beta1 < 1.0) || !(0.0 < self.beta2 && self.beta2 < 1.0) {
            // beta = 1 is allowed as the exactly-linear edge used in
            // rationality-reduction checks
            if !(self.beta1 == 1.0 && self.beta2 == 1.0) {
                return Err(ProspectError::BetaRange(self.beta1, self.beta2));
            }
        }
        if self.beta1 != self.beta2 {
            return Err(ProspectError::BetaMismatch(self.beta1, self.beta2));
        }
        if !(0.0 < self.beta3 && self.beta3 <= 1.0) {
            return Err(ProspectError::Beta3Range(self.beta3));
        }
        if self.lambda < 1.0 {
            return Err(ProspectError::LambdaRange(self.lambda));
        }
        Ok(())
    }

    /// The shared diminishing-sensitivity exponent.
    pub fn beta(&self) -> f64 {
        self.beta1
    }
}

/// How the reference point is chosen when evaluating gains and losses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferencePolicy {
    /// The ideal-redistribution reference: the pricing outcome of a hub with
    /// zero surplus funds.
    IdealRedistribution,
    /// Status-quo reference fixed at zero; kept for sensitivity runs.
    StatusQuoZero,
}

/// Reference-dependent value function: gains are dampened by `beta`, losses
/// additionally scaled by the loss-aversion multiplier.
pub fn value(z: f64, z0: f64, params: &ProspectParams) -> f64 {
    if z >= z0 {
        (z - z0).powf(params.beta())
    } else {
        -params.lambda * (z0 - z).powf(params.beta())
    }
}

/// Prelec probability weighting `exp(-(-ln p)^beta3)`, extended continuously
/// with `w(0) = 0` and `w(1) = 1`.
pub fn prelec_weight(p: f64, beta3: f64) -> Result<f64, ProspectError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ProspectError::ProbabilityRange(p));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    Ok((-(-p.ln()).powf(beta3)).exp())
}

/// Discretized budget uncertainty: quadrature nodes over the hub-funds law
/// with probability masses renormalized to one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BudgetLottery {
    pub mean: f64,
    pub stddev: f64,
    pub nodes: Vec<f64>,
    pub masses: Vec<f64>,
}

impl BudgetLottery {
    /// A certain outcome at `value`.
    pub fn degenerate(value: f64) -> Self {
        BudgetLottery { mean: value, stddev: 0.0, nodes: vec![value], masses: vec![1.0] }
    }

    /// Gauss-Hermite discretization of a Gaussian funds law. The nodes are
    /// deterministic, sorted ascending, and the masses are renormalized so
    /// they sum to one exactly.
    pub fn gaussian(mean: f64, stddev: f64, n_nodes: usize) -> Self {
        assert!(n_nodes >= 1 && stddev >= 0.0);
        if stddev == 0.0 {
            return Self::degenerate(mean);
        }
        let (xs, ws) = gauss_hermite(n_nodes);
        let scale = std::f64::consts::SQRT_2 * stddev;
        let nodes: Vec<f64> = xs.iter().map(|x| mean + scale * x).collect();
        let total: f64 = ws.iter().sum();
        let masses: Vec<f64> = ws.iter().map(|w| w / total).collect();
        BudgetLottery { mean, stddev, nodes, masses }
    }

    pub fn explicit(nodes: Vec<f64>, masses: Vec<f64>) -> Result<Self, ProspectError> {
        let lottery = BudgetLottery {
            mean: nodes.iter().zip(&masses).map(|(n, m)| n * m).sum(),
            stddev: 0.0,
            nodes,
            masses,
        };
        lottery.validate()?;
        Ok(lottery)
    }

    pub fn validate(&self) -> Result<(), ProspectError> {
        if self.nodes.len() != self.masses.len() {
            return Err(ProspectError::LengthMismatch);
        }
        let sum: f64 = self.masses.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(ProspectError::MassSum(sum));
        }
        if self.nodes.windows(2).any(|w| w[0] > w[1]) {
            return Err(ProspectError::UnsortedNodes);
        }
        Ok(())
    }
}

/// Physicists' Gauss-Hermite nodes and weights for `int f(x) e^{-x^2} dx`.
/// Newton iteration on the Hermite recurrence; deterministic.
fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    const PIM4: f64 = 0.751_125_544_464_942_5; // pi^(-1/4)
    const EPS: f64 = 3e-14;
    let mut x = vec![0.0f64; n];
    let mut w = vec![0.0f64; n];
    let m = (n + 1) / 2;
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = PIM4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= EPS {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    // recurrence fills largest roots first; report ascending
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap());
    let xs: Vec<f64> = order.iter().map(|&i| x[i]).collect();
    let ws: Vec<f64> = order.iter().map(|&i| w[i]).collect();
    (xs, ws)
}

/// Which funds law feeds the prospect evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum LotteryKind {
    /// One lottery shared by every hub.
    Shared(BudgetLottery),
    /// Certain funds equal to each hub's own budget; the reduction used to
    /// check the prospect layer against the risk-neutral engine.
    DegenerateAtBudgets,
}

/// Precompiled prospect model. The subjective expectation over the lottery
/// factors as `coef(hub) * payment^beta`, so the per-hub coefficients are
/// computed once and shared by the utility, the potential and the
/// best-response payment search.
#[derive(Debug, Clone)]
pub struct ProspectModel {
    pub params: ProspectParams,
    pub lottery: LotteryKind,
    pub reference: ReferencePolicy,
    gain_coef: Vec<f64>,
}

impl ProspectModel {
    pub fn compile(
        network: &crate::network::NetworkSpec,
        params: ProspectParams,
        lottery: LotteryKind,
        reference: ReferencePolicy,
    ) -> Result<Self, ProspectError> {
        params.validate()?;
        let gain_coef = match &lottery {
            LotteryKind::Shared(l) => {
                l.validate()?;
                let c = lottery_coef(l, &params)?;
                vec![c; network.hubs.len()]
            }
            LotteryKind::DegenerateAtBudgets => network
                .hubs
                .iter()
                .map(|h| {
                    let l = BudgetLottery::degenerate(h.budget);
                    lottery_coef(&l, &params)
                })
                .collect::<Result<_, _>>()?,
        };
        Ok(ProspectModel { params, lottery, reference, gain_coef })
    }

    /// `E[Z]` for a traveler paying `payment` at `hub`.
    pub fn expected_gain(&self, hub: crate::network::HubId, payment: f64) -> f64 {
        if payment == 0.0 {
            return 0.0;
        }
        self.gain_coef[hub.index()] * payment.powf(self.params.beta())
    }
}

/// `sum_k value(2 n_k) * w(p_k)`; multiplying by `payment^beta` recovers the
/// full subjective expectation because the value power factors.
fn lottery_coef(lottery: &BudgetLottery, params: &ProspectParams) -> Result<f64, ProspectError> {
    let beta = params.beta();
    let mut coef = 0.0;
    for (&n, &p) in lottery.nodes.iter().zip(&lottery.masses) {
        let w = prelec_weight(p, params.beta3)?;
        if n > 0.0 {
            coef += (2.0 * n).powf(beta) * w;
        } else if n < 0.0 {
            coef -= params.lambda * (2.0 * n.abs()).powf(beta) * w;
        }
    }
    Ok(coef)
}

fn reference_point(instance: &Instance, assignment: &Assignment, i: usize) -> f64 {
    let action = &assignment[i];
    if !instance.network.hub(action.hub).redistributes() {
        return 0.0;
    }
    let mut others = 0.0;
    for (k, a) in assignment.actions().iter().enumerate() {
        if k != i && a.hub == action.hub {
            others += a.payment;
        }
    }
    let full = others + action.payment;
    others * others - full * full
}

/// Subjective expectation of the pricing gamble for traveler `i`, using the
/// closed form `z(n) - z0 = 2 n payment`.
pub fn expected_prospect(
    instance: &Instance,
    assignment: &Assignment,
    i: usize,
    model: &ProspectModel,
) -> f64 {
    let action = &assignment[i];
    if !instance.network.hub(action.hub).redistributes() {
        return 0.0;
    }
    model.expected_gain(action.hub, action.payment)
}

/// Total prospect-theoretic utility: reference point plus subjective
/// expectation, minus disincentive, congestion and waiting costs.
pub fn prospect_utility(
    instance: &Instance,
    assignment: &Assignment,
    i: usize,
    model: &ProspectModel,
) -> f64 {
    let loads = RoadLoads::tally(&instance.network, assignment);
    prospect_utility_with_loads(instance, assignment, i, model, &loads)
}

pub(crate) fn prospect_utility_with_loads(
    instance: &Instance,
    assignment: &Assignment,
    i: usize,
    model: &ProspectModel,
    loads: &RoadLoads,
) -> f64 {
    let net = &instance.network;
    let action = &assignment[i];
    let z0 = match model.reference {
        ReferencePolicy::IdealRedistribution => reference_point(instance, assignment, i),
        ReferencePolicy::StatusQuoZero => 0.0,
    };
    let gain = expected_prospect(instance, assignment, i, model);
    let g = disincentive(&instance.travelers[i], action.payment);
    let congestion: f64 = net
        .route(action.route)
        .edges
        .iter()
        .map(|&e| net.road(e).latency(loads.weighted_services(net, e)))
        .sum();
    let hub = net.hub(action.hub);
    let waiting = if hub.redistributes() {
        let rate = hub.rate(action.service_type).expect("validated instance");
        assignment.actions().iter().filter(|a| a.hub == action.hub).count() as f64 / rate
    } else {
        0.0
    };
    z0 + gain
        - g
        - instance.mechanics.zeta1 * congestion
        - instance.mechanics.zeta2 * waiting
}

pub fn prospect_welfare(instance: &Instance, assignment: &Assignment, model: &ProspectModel) -> f64 {
    let loads = RoadLoads::tally(&instance.network, assignment);
    (0..assignment.len())
        .map(|i| prospect_utility_with_loads(instance, assignment, i, model, &loads))
        .sum()
}

/// Exact potential of the prospect game, mirroring the rational potential:
/// the own-action subjective gains, negated squared cohort payments (the
/// reference-point counterpart of the pricing term), telescoped latencies and
/// waiting loads, and the summed disincentives.
pub fn prospect_potential(
    instance: &Instance,
    assignment: &Assignment,
    model: &ProspectModel,
) -> f64 {
    let net = &instance.network;
    let loads = RoadLoads::tally(net, assignment);

    let gain_term: f64 =
        (0..assignment.len()).map(|i| expected_prospect(instance, assignment, i, model)).sum();

    let mut reference_term = 0.0;
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
        if model.reference == ReferencePolicy::IdealRedistribution {
            let total: f64 = cohort.iter().map(|&k| assignment[k].payment).sum();
            reference_term -= price_transform(total, 2.0);
        }
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

    gain_term
        + reference_term
        + disincentive_term
        + instance.mechanics.zeta1 * latency_term
        + instance.mechanics.zeta2 * waiting_term
}

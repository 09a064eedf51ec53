//! Scenario ingestion and instance assembly: the JSON-comparable config
//! schema, seeded population sampling, built-in scenarios, and the content
//! hash that ties emitted rows back to the exact configuration.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mechanics::{Action, Assignment, MechanicsConfig, TravelerProfile};
use crate::network::{
    Hub, HubId, NetworkError, NetworkSpec, Road, RoadId, Route, RouteId, ServiceType,
    ServiceTypeId,
};
use crate::prospect::{
    BudgetLottery, LotteryKind, ProspectError, ProspectModel, ProspectParams, ReferencePolicy,
};
use crate::rng::SeededRng;

/// A fully resolved game: immutable network, traveler population and
/// economic configuration. Everything downstream assumes `new` validated it.
#[derive(Debug, Clone)]
pub struct Instance {
    pub network: NetworkSpec,
    pub travelers: Vec<TravelerProfile>,
    pub mechanics: MechanicsConfig,
    /// Whether "no intermediate stop" (modeled as stopping at the
    /// destination, with zero pricing and waiting) is a legal action.
    pub allow_no_stop: bool,
    stop_options: Vec<Vec<HubId>>,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("network: {0}")]
    Network(#[from] NetworkError),
    #[error("prospect: {0}")]
    Prospect(#[from] ProspectError),
    #[error("traveler {id}: {problem}")]
    Traveler { id: u32, problem: String },
    #[error("hub {hub} offers no service rate for type {service_type}, required by route {route}")]
    MissingRate { hub: u32, service_type: u32, route: u32 },
    #[error("mechanics: {0}")]
    Mechanics(String),
    #[error("{location}: {problem}")]
    Config { location: String, problem: String },
    #[error("could not parse scenario: {0}")]
    Parse(String),
    #[error("io: {0}")]
    Io(String),
}

impl Instance {
    pub fn new(
        network: NetworkSpec,
        travelers: Vec<TravelerProfile>,
        mechanics: MechanicsConfig,
    ) -> Result<Self, ScenarioError> {
        Self::with_options(network, travelers, mechanics, false)
    }

    pub fn with_options(
        network: NetworkSpec,
        travelers: Vec<TravelerProfile>,
        mechanics: MechanicsConfig,
        allow_no_stop: bool,
    ) -> Result<Self, ScenarioError> {
        network.validate()?;
        for t in &travelers {
            if !(t.wallet_max > 0.0) {
                return Err(ScenarioError::Traveler {
                    id: t.id,
                    problem: format!("wallet_max must be positive, got {}", t.wallet_max),
                });
            }
            if !(0.0..=t.wallet_max).contains(&t.wallet) {
                return Err(ScenarioError::Traveler {
                    id: t.id,
                    problem: format!("wallet {} outside [0, {}]", t.wallet, t.wallet_max),
                });
            }
            if !(t.eta > 0.0 && t.eta < 1.0) {
                return Err(ScenarioError::Traveler {
                    id: t.id,
                    problem: format!("eta {} outside (0, 1)", t.eta),
                });
            }
        }
        if !(mechanics.zeta1 > 0.0 && mechanics.zeta2 > 0.0) {
            return Err(ScenarioError::Mechanics("zeta factors must be positive".into()));
        }
        if !(mechanics.pricing_exponent > 0.0) {
            return Err(ScenarioError::Mechanics("pricing exponent must be positive".into()));
        }
        // every stop hub reachable on a route must serve every type, so the
        // hot path never sees a missing rate
        for route in &network.routes {
            for &hub in &route.hubs_en_route {
                if !network.hub(hub).redistributes() {
                    continue;
                }
                for ty in &network.service_types {
                    if network.hub(hub).rate(ty.id).is_none() {
                        return Err(ScenarioError::MissingRate {
                            hub: hub.0,
                            service_type: ty.id.0,
                            route: route.id.0,
                        });
                    }
                }
            }
        }
        let destination = network.destination();
        let stop_options = network
            .routes
            .iter()
            .map(|route| {
                let mut stops: Vec<HubId> = route
                    .hubs_en_route
                    .iter()
                    .copied()
                    .filter(|&h| network.hub(h).redistributes())
                    .collect();
                stops.sort();
                stops.dedup();
                if allow_no_stop {
                    stops.push(destination);
                }
                stops
            })
            .collect();
        Ok(Instance { network, travelers, mechanics, allow_no_stop, stop_options })
    }

    pub fn traveler_count(&self) -> usize {
        self.travelers.len()
    }

    /// Hub stops a traveler on `route` may choose, in tie-break order.
    pub fn stop_options(&self, route: RouteId) -> &[HubId] {
        &self.stop_options[route.index()]
    }

    /// A seeded random assignment: uniform discrete coordinates, payments at
    /// the type's base fare clipped to the wallet ceiling.
    pub fn random_assignment(&self, rng: &mut SeededRng) -> Assignment {
        let actions = self
            .travelers
            .iter()
            .map(|t| {
                let route = RouteId(rng.below(self.network.routes.len()) as u32);
                let stops = self.stop_options(route);
                let hub = stops[rng.below(stops.len())];
                let service_type = ServiceTypeId(rng.below(self.network.service_types.len()) as u32);
                let fare = self.network.service_type(service_type).base_fare;
                Action { route, hub, service_type, payment: fare.clamp(0.0, t.wallet_max) }
            })
            .collect();
        Assignment::new(actions)
    }
}

// --- configuration schema ---------------------------------------------------

fn default_wallet_max() -> f64 {
    10.0
}
fn default_wallet_init() -> f64 {
    2.0
}
fn default_exponent() -> f64 {
    2.0
}
fn default_n_starts() -> u32 {
    50
}

/// Hub funds law: a seeded Gaussian draw per hub, explicit values by hub
/// label, or a population-scaled Gaussian whose mean tracks demand
/// (`offset + coef * traveler_count`). Gaussian parameters are mean and
/// standard deviation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetLaw {
    Gaussian { mean: f64, stddev: f64 },
    Explicit(BTreeMap<String, f64>),
    PerCapita { offset: f64, coef: f64, stddev: f64 },
}

/// Socioeconomic weight law; Gaussian draws are clipped into [0.01, 0.99].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaLaw {
    Gaussian { mean: f64, stddev: f64 },
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LotteryConfig {
    Gaussian { mean: f64, stddev: f64, nodes: usize },
    DegenerateAtBudgets,
    Explicit { nodes: Vec<f64>, masses: Vec<f64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProspectConfig {
    #[serde(default)]
    pub params: ProspectParams,
    pub lottery: LotteryConfig,
    #[serde(default = "default_reference")]
    pub reference: ReferencePolicy,
}

fn default_reference() -> ReferencePolicy {
    ReferencePolicy::IdealRedistribution
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BehaviorKind {
    Rational,
    Prospect,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverSettings {
    #[serde(default)]
    pub payment_solver: SolverKind,
    #[serde(default = "default_grid_points")]
    pub grid_points: u32,
    #[serde(default = "default_payment_tolerance")]
    pub payment_tolerance: f64,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: u32,
    #[serde(default = "default_improvement_epsilon")]
    pub improvement_epsilon: f64,
    #[serde(default = "default_enumeration_cap")]
    pub enumeration_cap: u64,
    #[serde(default = "default_social_starts")]
    pub social_starts: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    /// Golden-section on the concave quadratic-pricing objective.
    #[default]
    Auto,
    GoldenSection,
    Grid,
}

fn default_grid_points() -> u32 {
    10_000
}
fn default_payment_tolerance() -> f64 {
    1e-6
}
fn default_max_rounds() -> u32 {
    10_000
}
fn default_improvement_epsilon() -> f64 {
    1e-7
}
fn default_enumeration_cap() -> u64 {
    20_000
}
fn default_social_starts() -> u32 {
    8
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            payment_solver: SolverKind::Auto,
            grid_points: default_grid_points(),
            payment_tolerance: default_payment_tolerance(),
            max_rounds: default_max_rounds(),
            improvement_epsilon: default_improvement_epsilon(),
            enumeration_cap: default_enumeration_cap(),
            social_starts: default_social_starts(),
        }
    }
}

/// Network described with human-readable labels; resolved into the indexed
/// `NetworkSpec` with dangling-reference diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub hubs: Vec<HubConfig>,
    pub roads: Vec<RoadConfig>,
    pub routes: Vec<RouteConfig>,
    pub service_types: Vec<TypeConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HubConfig {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub service_rate: Option<RateSpec>,
    #[serde(default)]
    pub origin: bool,
    #[serde(default)]
    pub destination: bool,
}

/// A hub's service rate: one number shared by all types, or per-type values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RateSpec {
    Uniform(f64),
    PerType(Vec<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoadConfig {
    pub label: String,
    pub tail: String,
    pub head: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi2: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RouteConfig {
    pub edges: Vec<String>,
    pub stops: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TypeConfig {
    pub label: String,
    #[serde(default = "one")]
    pub traffic_weight: f64,
    pub max_capacity: u32,
    #[serde(default)]
    pub base_fare: f64,
}

fn one() -> f64 {
    1.0
}

/// One traveler's starting action in an explicit warm start, with hubs and
/// types referenced by label. Payment defaults to the type's base fare.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InitialAction {
    pub route: u32,
    pub hub: String,
    #[serde(rename = "type")]
    pub service_type: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payment: Option<f64>,
}

/// The complete scenario file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub network: NetworkConfig,
    pub traveler_count: u32,
    #[serde(default = "default_wallet_max")]
    pub wallet_max: f64,
    #[serde(default = "default_wallet_init")]
    pub wallet_init: f64,
    pub budget_law: BudgetLaw,
    pub eta_law: EtaLaw,
    /// Default (xi1, xi2) for roads that do not set their own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_params: Option<(f64, f64)>,
    #[serde(default = "default_exponent")]
    pub pricing_exponent: f64,
    pub behavior: BehaviorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prospect: Option<ProspectConfig>,
    pub seed: u64,
    #[serde(default = "default_n_starts")]
    pub n_starts: u32,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub allow_no_stop: bool,
    /// Optional warm start for single solves. Equilibria of this game are not
    /// unique; a scenario that documents one particular equilibrium pins the
    /// basin the dynamics start from. Multi-start searches ignore it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<InitialAction>>,
}

impl ScenarioConfig {
    /// Parse and validate a scenario from JSON text.
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let config: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Canonical serialized form; reloading it yields an identical config.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Content hash of the canonical form (FNV-1a 64), stable across runs
    /// and platforms; stamped on every emitted row.
    pub fn content_hash(&self) -> String {
        format!("{:016x}", fnv1a64(self.to_canonical_json().as_bytes()))
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let err = |location: &str, problem: String| {
            Err(ScenarioError::Config { location: location.to_string(), problem })
        };
        if self.traveler_count < 2 {
            return err("traveler_count", format!("must be >= 2, got {}", self.traveler_count));
        }
        if self.wallet_max <= 0.0 || self.wallet_init < 0.0 || self.wallet_init > self.wallet_max {
            return err(
                "wallet",
                format!("need 0 <= wallet_init <= wallet_max, got ({}, {})",
                    self.wallet_init, self.wallet_max),
            );
        }
        if self.pricing_exponent <= 0.0 {
            return err("pricing_exponent", "must be positive".into());
        }
        if self.behavior == BehaviorKind::Prospect {
            let Some(prospect) = &self.prospect else {
                return err("prospect", "behavior is prospect but no prospect block given".into());
            };
            prospect.params.validate()?;
            // the closed form behind the prospect expectation expands the
            // quadratic pricing difference, so other exponents are rejected
            if self.pricing_exponent != 2.0 {
                return err(
                    "pricing_exponent",
                    "prospect behavior requires the quadratic pricing mechanism (p = 2)".into(),
                );
            }
        }
        if let EtaLaw::Explicit(values) = &self.eta_law {
            if values.len() != self.traveler_count as usize {
                return err(
                    "eta_law",
                    format!("{} explicit values for {} travelers", values.len(),
                        self.traveler_count),
                );
            }
        }
        if let BudgetLaw::Explicit(map) = &self.budget_law {
            for label in map.keys() {
                if !self.network.hubs.iter().any(|h| &h.label == label) {
                    return err("budget_law", format!("unknown hub label {label:?}"));
                }
            }
        }
        if let Some(initial) = &self.initial {
            if initial.len() != self.traveler_count as usize {
                return err(
                    "initial",
                    format!("{} starting actions for {} travelers", initial.len(),
                        self.traveler_count),
                );
            }
        }
        // resolving the network performs the remaining structural checks
        self.resolve_network()?;
        Ok(())
    }

    /// Resolve the optional warm start against an instantiated network.
    pub fn initial_assignment(
        &self,
        instance: &Instance,
    ) -> Result<Option<Assignment>, ScenarioError> {
        let Some(initial) = &self.initial else { return Ok(None) };
        let net = &instance.network;
        let actions = initial
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let location = format!("initial[{i}]");
                if a.route as usize >= net.routes.len() {
                    return Err(ScenarioError::Config {
                        location,
                        problem: format!("route {} out of range", a.route),
                    });
                }
                let hub = net
                    .hubs
                    .iter()
                    .find(|h| h.label == a.hub)
                    .map(|h| h.id)
                    .ok_or_else(|| ScenarioError::Config {
                        location: location.clone(),
                        problem: format!("dangling hub label {:?}", a.hub),
                    })?;
                let service_type = net
                    .service_types
                    .iter()
                    .find(|t| t.label == a.service_type)
                    .map(|t| t.id)
                    .ok_or_else(|| ScenarioError::Config {
                        location: location.clone(),
                        problem: format!("dangling type label {:?}", a.service_type),
                    })?;
                let route = RouteId(a.route);
                if !instance.stop_options(route).contains(&hub) {
                    return Err(ScenarioError::Config {
                        location,
                        problem: format!("hub {:?} is not a stop on route {}", a.hub, a.route),
                    });
                }
                let fare = net.service_type(service_type).base_fare;
                let payment = a
                    .payment
                    .unwrap_or(fare)
                    .clamp(0.0, instance.travelers[i].wallet_max);
                Ok(Action { route, hub, service_type, payment })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Some(Assignment::new(actions)))
    }

    /// Resolve labels into the indexed immutable network. Budgets are left
    /// at zero here; `sample_population` fills them per seed.
    pub fn resolve_network(&self) -> Result<NetworkSpec, ScenarioError> {
        let n_types = self.network.service_types.len();
        let hub_index: BTreeMap<&str, u32> = self
            .network
            .hubs
            .iter()
            .enumerate()
            .map(|(i, h)| (h.label.as_str(), i as u32))
            .collect();
        if hub_index.len() != self.network.hubs.len() {
            return Err(ScenarioError::Config {
                location: "network.hubs".into(),
                problem: "duplicate hub labels".into(),
            });
        }
        let road_index: BTreeMap<&str, u32> = self
            .network
            .roads
            .iter()
            .enumerate()
            .map(|(i, r)| (r.label.as_str(), i as u32))
            .collect();
        let lookup_hub = |label: &str, location: String| {
            hub_index.get(label).copied().map(HubId).ok_or(ScenarioError::Config {
                location,
                problem: format!("dangling hub label {label:?}"),
            })
        };

        let hubs = self
            .network
            .hubs
            .iter()
            .enumerate()
            .map(|(i, h)| {
                let service_rate = match &h.service_rate {
                    None => vec![None; n_types],
                    Some(RateSpec::Uniform(r)) => vec![Some(*r); n_types],
                    Some(RateSpec::PerType(rs)) => {
                        if rs.len() != n_types {
                            return Err(ScenarioError::Config {
                                location: format!("network.hubs[{i}].service_rate"),
                                problem: format!("{} rates for {} types", rs.len(), n_types),
                            });
                        }
                        rs.iter().map(|&r| Some(r)).collect()
                    }
                };
                Ok(Hub {
                    id: HubId(i as u32),
                    label: h.label.clone(),
                    budget: h.budget.unwrap_or(0.0),
                    service_rate,
                    is_origin: h.origin,
                    is_destination: h.destination,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;

        let (default_xi1, default_xi2) = self.latency_params.unwrap_or((5.0, 3.0));
        let roads = self
            .network
            .roads
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let location = format!("network.roads[{i}]");
                Ok::<_, ScenarioError>(Road {
                    id: RoadId(i as u32),
                    label: r.label.clone(),
                    tail: lookup_hub(&r.tail, location.clone())?,
                    head: lookup_hub(&r.head, location)?,
                    xi1: r.xi1.unwrap_or(default_xi1),
                    xi2: r.xi2.unwrap_or(default_xi2),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;

        let routes = self
            .network
            .routes
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let edges = r
                    .edges
                    .iter()
                    .map(|label| {
                        road_index.get(label.as_str()).copied().map(RoadId).ok_or(
                            ScenarioError::Config {
                                location: format!("network.routes[{i}].edges"),
                                problem: format!("dangling road label {label:?}"),
                            },
                        )
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let stops = r
                    .stops
                    .iter()
                    .map(|label| lookup_hub(label, format!("network.routes[{i}].stops")))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok::<_, ScenarioError>(Route { id: RouteId(i as u32), edges, hubs_en_route: stops })
            })
            .collect::<Result<Vec<_>, _>>()?;

        let service_types = self
            .network
            .service_types
            .iter()
            .enumerate()
            .map(|(i, t)| ServiceType {
                id: ServiceTypeId(i as u32),
                label: t.label.clone(),
                traffic_weight: t.traffic_weight,
                max_capacity: t.max_capacity,
                base_fare: t.base_fare,
            })
            .collect();

        let network = NetworkSpec { hubs, roads, routes, service_types };
        network.validate()?;
        Ok(network)
    }

    /// Draw the population for one replication: hub budgets per the budget
    /// law and traveler weights per the eta law, deterministically from
    /// `seed`. Identical seeds give identical draws.
    pub fn sample_population(
        &self,
        seed: u64,
    ) -> Result<(NetworkSpec, Vec<TravelerProfile>), ScenarioError> {
        let mut network = self.resolve_network()?;
        let mut rng = SeededRng::child(seed, 0xB0D6E7);
        for hub in network.hubs.iter_mut() {
            if !hub.redistributes() {
                hub.budget = 0.0;
                continue;
            }
            hub.budget = match &self.budget_law {
                BudgetLaw::Gaussian { mean, stddev } => rng.normal(*mean, *stddev),
                BudgetLaw::Explicit(map) => *map.get(&hub.label).unwrap_or(&hub.budget),
                BudgetLaw::PerCapita { offset, coef, stddev } => {
                    rng.normal(offset + coef * self.traveler_count as f64, *stddev)
                }
            };
        }
        let mut rng = SeededRng::child(seed, 0xE7A0);
        let travelers = (0..self.traveler_count)
            .map(|i| {
                let eta = match &self.eta_law {
                    EtaLaw::Gaussian { mean, stddev } => {
                        clip_eta(rng.normal(*mean, *stddev))
                    }
                    EtaLaw::Explicit(values) => clip_eta(values[i as usize]),
                };
                TravelerProfile {
                    id: i,
                    wallet: self.wallet_init,
                    wallet_max: self.wallet_max,
                    eta,
                }
            })
            .collect();
        Ok((network, travelers))
    }

    /// Assemble the playable instance for one seeded replication.
    pub fn instantiate(&self, seed: u64) -> Result<Instance, ScenarioError> {
        let (network, travelers) = self.sample_population(seed)?;
        let mechanics = MechanicsConfig {
            zeta1: 1.0,
            zeta2: 1.0,
            pricing_exponent: self.pricing_exponent,
        };
        Instance::with_options(network, travelers, mechanics, self.allow_no_stop)
    }

    /// Compile the prospect model against an instantiated network, when the
    /// scenario runs under prospect behavior.
    pub fn prospect_model(&self, network: &NetworkSpec) -> Result<Option<ProspectModel>, ScenarioError> {
        let Some(config) = &self.prospect else { return Ok(None) };
        let lottery = match &config.lottery {
            LotteryConfig::Gaussian { mean, stddev, nodes } => {
                LotteryKind::Shared(BudgetLottery::gaussian(*mean, *stddev, *nodes))
            }
            LotteryConfig::DegenerateAtBudgets => LotteryKind::DegenerateAtBudgets,
            LotteryConfig::Explicit { nodes, masses } => {
                LotteryKind::Shared(BudgetLottery::explicit(nodes.clone(), masses.clone())?)
            }
        };
        Ok(Some(ProspectModel::compile(network, config.params, lottery, config.reference)?))
    }
}

/// Weights drawn for eta land in (0, 1) by clipping, preserving the
/// invariant with minimal distortion.
pub fn clip_eta(raw: f64) -> f64 {
    raw.clamp(0.01, 0.99)
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Load a scenario from a file path, or resolve one of the built-in names
/// (`fig3`, `table1`, `sweep`, `sweep-prospect`) when no such file exists.
pub fn load_scenario(path: &str) -> Result<ScenarioConfig, ScenarioError> {
    if let Some(builtin) = builtin::by_name(path) {
        if !std::path::Path::new(path).exists() {
            return Ok(builtin);
        }
    }
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io(e.to_string()))?;
    ScenarioConfig::from_json(&text)
}

pub mod builtin {
    //! Shipped scenarios: the two-hub five-road benchmark network in its
    //! unit-capacity form (dynamics certified by the potential), the
    //! twelve-traveler pooled instance with fixed budgets, and the sweep
    //! configurations the experiment subcommands default to.

    use super::*;

    pub fn by_name(name: &str) -> Option<ScenarioConfig> {
        match name {
            "fig3" => Some(fig3()),
            "table1" => Some(table1()),
            "sweep" => Some(sweep()),
            "sweep-prospect" => Some(sweep_prospect()),
            _ => None,
        }
    }

    /// Hubs O, A, B, D; roads e1: O->A, e2: O->B, e3: B->A, e4: A->D,
    /// e5: B->D; routes e1-e4 (stop A), e2-e5 (stop B), e2-e3-e4 (stops B, A).
    pub fn two_hub_network(
        rate_a: f64,
        rate_b: f64,
        types: Vec<TypeConfig>,
    ) -> NetworkConfig {
        NetworkConfig {
            hubs: vec![
                HubConfig {
                    label: "O".into(),
                    budget: None,
                    service_rate: None,
                    origin: true,
                    destination: false,
                },
                HubConfig {
                    label: "A".into(),
                    budget: None,
                    service_rate: Some(RateSpec::Uniform(rate_a)),
                    origin: false,
                    destination: false,
                },
                HubConfig {
                    label: "B".into(),
                    budget: None,
                    service_rate: Some(RateSpec::Uniform(rate_b)),
                    origin: false,
                    destination: false,
                },
                HubConfig {
                    label: "D".into(),
                    budget: None,
                    service_rate: None,
                    origin: false,
                    destination: true,
                },
            ],
            roads: ["e1:O:A", "e2:O:B", "e3:B:A", "e4:A:D", "e5:B:D"]
                .iter()
                .map(|spec| {
                    let mut parts = spec.split(':');
                    RoadConfig {
                        label: parts.next().unwrap().into(),
                        tail: parts.next().unwrap().into(),
                        head: parts.next().unwrap().into(),
                        xi1: None,
                        xi2: None,
                    }
                })
                .collect(),
            routes: vec![
                RouteConfig { edges: vec!["e1".into(), "e4".into()], stops: vec!["A".into()] },
                RouteConfig { edges: vec!["e2".into(), "e5".into()], stops: vec!["B".into()] },
                RouteConfig {
                    edges: vec!["e2".into(), "e3".into(), "e4".into()],
                    stops: vec!["B".into(), "A".into()],
                },
            ],
            service_types: types,
        }
    }

    fn unit_types() -> Vec<TypeConfig> {
        ["bike", "bus", "car"]
            .iter()
            .map(|label| TypeConfig {
                label: (*label).into(),
                traffic_weight: 1.0,
                max_capacity: 1,
                base_fare: 1.0,
            })
            .collect()
    }

    /// The benchmark network with unit capacities and Gaussian budgets; the
    /// regime in which the potential certifies every best-response step.
    pub fn fig3() -> ScenarioConfig {
        ScenarioConfig {
            name: "fig3".into(),
            network: two_hub_network(6.0, 6.0, unit_types()),
            traveler_count: 12,
            wallet_max: 10.0,
            wallet_init: 2.0,
            budget_law: BudgetLaw::Gaussian { mean: 0.0, stddev: 10.0 },
            eta_law: EtaLaw::Gaussian { mean: 0.0, stddev: 1.0 },
            latency_params: Some((5.0, 3.0)),
            pricing_exponent: 2.0,
            behavior: BehaviorKind::Rational,
            prospect: None,
            seed: 1,
            n_starts: 50,
            solver: SolverSettings::default(),
            allow_no_stop: false,
            initial: None,
        }
    }

    /// The fixed-budget twelve-traveler instance: b(A) = 9.2, b(B) = 15.1.
    ///
    /// Bikes barely congest but each rider is one vehicle; buses and cars
    /// pool three riders per vehicle. Hub A dispatches cars quickly and
    /// buses slowly, hub B is bike-friendly, and the direct B-road e5 is
    /// long. Together with the mixed socioeconomic weights this supports an
    /// equilibrium where three travelers harvest the rich hub by bike, six
    /// low-weight travelers carpool through A at small negative transfers,
    /// and three high-weight travelers fund A by bus. The warm start selects
    /// that equilibrium among the many the game admits.
    pub fn table1() -> ScenarioConfig {
        let types = vec![
            TypeConfig {
                label: "bike".into(),
                traffic_weight: 0.05,
                max_capacity: 1,
                base_fare: 0.5,
            },
            TypeConfig {
                label: "bus".into(),
                traffic_weight: 0.15,
                max_capacity: 3,
                base_fare: 1.0,
            },
            TypeConfig { label: "car".into(), traffic_weight: 1.0, max_capacity: 3, base_fare: 2.0 },
        ];
        let mut budgets = BTreeMap::new();
        budgets.insert("A".into(), 9.2);
        budgets.insert("B".into(), 15.1);
        let mut network = two_hub_network(1.0, 0.25, types);
        network.hubs[1].service_rate = Some(RateSpec::PerType(vec![0.5, 1.0, 20.0]));
        network.hubs[2].service_rate = Some(RateSpec::PerType(vec![0.3, 0.25, 0.25]));
        network.roads[4].xi2 = Some(14.0); // e5 spans the long side of the network
        let initial = (0..12)
            .map(|i| match i {
                0..=2 => InitialAction {
                    route: 1,
                    hub: "B".into(),
                    service_type: "bike".into(),
                    payment: None,
                },
                3..=5 => InitialAction {
                    route: 2,
                    hub: "A".into(),
                    service_type: "bus".into(),
                    payment: None,
                },
                _ => InitialAction {
                    route: 0,
                    hub: "A".into(),
                    service_type: "car".into(),
                    payment: None,
                },
            })
            .collect();
        ScenarioConfig {
            name: "table1".into(),
            network,
            traveler_count: 12,
            wallet_max: 10.0,
            wallet_init: 2.0,
            budget_law: BudgetLaw::Explicit(budgets),
            eta_law: EtaLaw::Explicit(vec![
                0.95, 0.94, 0.93, 0.92, 0.91, 0.90, 0.2525, 0.25, 0.2475, 0.245, 0.2425, 0.24,
            ]),
            latency_params: Some((5.0, 3.0)),
            pricing_exponent: 2.0,
            behavior: BehaviorKind::Rational,
            prospect: None,
            seed: 12,
            n_starts: 50,
            solver: SolverSettings::default(),
            allow_no_stop: false,
            initial: Some(initial),
        }
    }

    /// Sweep configuration for the traveler-count experiments.
    ///
    /// Hub funding tracks the population and stays above twice the cohort
    /// wallet capacity, the regime where both the equilibrium and the
    /// optimum exhaust wallets and both pricing curves keep equilibrium
    /// welfare positive - the anarchy ratio is undefined otherwise. A
    /// dedicated-lane bus keeps the congestion floor low enough for the
    /// flattened pricing curve to fund.
    pub fn sweep() -> ScenarioConfig {
        let mut config = fig3();
        config.name = "sweep".into();
        config.wallet_init = 75.0;
        config.wallet_max = 150.0;
        config.budget_law = BudgetLaw::PerCapita { offset: 153.0, coef: 150.0, stddev: 1.0 };
        config.network.service_types = vec![
            TypeConfig {
                label: "bike".into(),
                traffic_weight: 0.05,
                max_capacity: 1,
                base_fare: 0.5,
            },
            TypeConfig { label: "bus".into(), traffic_weight: 0.0, max_capacity: 80, base_fare: 1.0 },
            TypeConfig { label: "car".into(), traffic_weight: 1.0, max_capacity: 4, base_fare: 2.0 },
        ];
        config.network.hubs[1].service_rate = Some(RateSpec::PerType(vec![0.5, 8.0, 2.0]));
        config.network.hubs[2].service_rate = Some(RateSpec::PerType(vec![0.5, 8.0, 2.0]));
        config.n_starts = 10;
        config.solver.grid_points = 600;
        config.solver.social_starts = 4;
        config.solver.enumeration_cap = 2_000;
        config
    }

    /// Sweep configuration for the rational-index experiments.
    pub fn sweep_prospect() -> ScenarioConfig {
        let mut config = sweep();
        config.name = "sweep-prospect".into();
        config.behavior = BehaviorKind::Prospect;
        config.prospect = Some(ProspectConfig {
            params: ProspectParams::default(),
            lottery: LotteryConfig::Gaussian { mean: 0.0, stddev: 10.0, nodes: 33 },
            reference: ReferencePolicy::IdealRedistribution,
        });
        config
    }
}

pub mod testnet {
    //! Fixture generators shared by unit, integration and acceptance tests.

    use super::*;

    /// The five-road benchmark network with unit capacities, uniform hub
    /// rates `sigma`, latency 5J + 3, and zeroed budgets.
    pub fn fig3_network(sigma: f64) -> NetworkSpec {
        let config = builtin::fig3();
        let mut network = config.resolve_network().unwrap();
        for hub in network.hubs.iter_mut() {
            if hub.redistributes() {
                hub.service_rate = vec![Some(sigma); network.service_types.len()];
            }
        }
        network
    }

    /// A random instance in the potential-certified regime: unit vehicle
    /// capacities and traffic weights, hub rates uniform across types. Up to
    /// 6 hubs, 8 roads and 12 travelers.
    pub fn random_exact_instance(rng: &mut SeededRng) -> Instance {
        let n_types = 1 + rng.below(3);
        let types: Vec<ServiceType> = (0..n_types)
            .map(|i| ServiceType {
                id: ServiceTypeId(i as u32),
                label: format!("mode{i}"),
                traffic_weight: 1.0,
                max_capacity: 1,
                base_fare: rng.range(0.0, 3.0),
            })
            .collect();

        let n_mid = 1 + rng.below(3);
        let mut hubs = vec![Hub {
            id: HubId(0),
            label: "O".into(),
            budget: 0.0,
            service_rate: vec![None; n_types],
            is_origin: true,
            is_destination: false,
        }];
        for m in 0..n_mid {
            let rate = rng.range(0.5, 8.0);
            hubs.push(Hub {
                id: HubId(1 + m as u32),
                label: format!("M{m}"),
                budget: rng.range(-15.0, 20.0),
                service_rate: vec![Some(rate); n_types],
                is_origin: false,
                is_destination: false,
            });
        }
        let dest = HubId(1 + n_mid as u32);
        hubs.push(Hub {
            id: dest,
            label: "D".into(),
            budget: 0.0,
            service_rate: vec![None; n_types],
            is_origin: false,
            is_destination: true,
        });

        let mut roads = Vec::new();
        let mut road = |tail: HubId, head: HubId, rng: &mut SeededRng| {
            let id = RoadId(roads.len() as u32);
            roads.push(Road {
                id,
                label: format!("e{}", id.0 + 1),
                tail,
                head,
                xi1: rng.range(0.5, 6.0),
                xi2: rng.range(0.0, 4.0),
            });
            id
        };
        let mut routes = Vec::new();
        let mut inbound = Vec::new();
        let mut outbound = Vec::new();
        for m in 0..n_mid {
            let mid = HubId(1 + m as u32);
            let to_mid = road(HubId(0), mid, rng);
            let to_dest = road(mid, dest, rng);
            inbound.push(to_mid);
            outbound.push(to_dest);
            routes.push(Route {
                id: RouteId(routes.len() as u32),
                edges: vec![to_mid, to_dest],
                hubs_en_route: vec![mid],
            });
        }
        if n_mid >= 2 && rng.uniform() < 0.5 {
            let cross = road(HubId(1), HubId(2), rng);
            routes.push(Route {
                id: RouteId(routes.len() as u32),
                edges: vec![inbound[0], cross, outbound[1]],
                hubs_en_route: vec![HubId(1), HubId(2)],
            });
        }

        let network = NetworkSpec { hubs, roads, routes, service_types: types };
        let n_travelers = 2 + rng.below(11);
        let travelers = (0..n_travelers)
            .map(|i| {
                let wallet_max = rng.range(5.0, 15.0);
                TravelerProfile {
                    id: i as u32,
                    wallet: rng.range(0.5, wallet_max),
                    wallet_max,
                    eta: rng.range(0.02, 0.98),
                }
            })
            .collect();
        Instance::new(network, travelers, MechanicsConfig::default()).expect("valid fixture")
    }

    /// A uniformly random action profile with payments anywhere in the
    /// wallet range (not just at base fares).
    pub fn random_profile(instance: &Instance, rng: &mut SeededRng) -> Assignment {
        let actions = instance
            .travelers
            .iter()
            .map(|t| random_action(instance, t.wallet_max, rng))
            .collect();
        Assignment::new(actions)
    }

    /// One uniformly random action for a traveler with the given wallet cap.
    pub fn random_action(instance: &Instance, wallet_max: f64, rng: &mut SeededRng) -> Action {
        let route = RouteId(rng.below(instance.network.routes.len()) as u32);
        let stops = instance.stop_options(route);
        let hub = stops[rng.below(stops.len())];
        let service_type = ServiceTypeId(rng.below(instance.network.service_types.len()) as u32);
        Action { route, hub, service_type, payment: rng.range(0.0, wallet_max) }
    }

    /// A random profile with payments snapped to a `grid_points + 1` lattice
    /// over each wallet, for grid-restricted oracle comparisons.
    pub fn random_grid_profile(
        instance: &Instance,
        grid_points: u32,
        rng: &mut SeededRng,
    ) -> Assignment {
        let actions = instance
            .travelers
            .iter()
            .map(|t| {
                let mut action = random_action(instance, t.wallet_max, rng);
                let step = t.wallet_max / grid_points as f64;
                action.payment = rng.below(grid_points as usize + 1) as f64 * step;
                action
            })
            .collect();
        Assignment::new(actions)
    }
}

//! Transportation multigraph: hubs, roads, routes, service types, and the
//! congestion quantities derived from a joint assignment.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mechanics::Assignment;

macro_rules! id_newtype {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(
            Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl std::fmt::Display for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_newtype!(
    /// Index of a hub (network node).
    HubId
);
id_newtype!(
    /// Index of a directed road (network edge).
    RoadId
);
id_newtype!(
    /// Index of a route in the origin-destination catalog.
    RouteId
);
id_newtype!(
    /// Index of a service type (travel mode).
    ServiceTypeId
);

/// A travel mode offered in the network (car, bus, light rail, bike, ...).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ServiceType {
    pub id: ServiceTypeId,
    pub label: String,
    /// Traffic impact weight of one vehicle of this type, in `[0, 1]`.
    #[serde(default = "one")]
    pub traffic_weight: f64,
    /// Maximum travelers a single vehicle of this type can carry.
    pub max_capacity: u32,
    /// Scenario-level payment anchor; only used to seed initial payments.
    #[serde(default)]
    pub base_fare: f64,
}

fn one() -> f64 {
    1.0
}

/// A directed road with an affine travel-time latency `xi1 * J + xi2`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Road {
    pub id: RoadId,
    #[serde(default)]
    pub label: String,
    pub tail: HubId,
    pub head: HubId,
    /// Latency slope (time per weighted service unit); strictly positive.
    pub xi1: f64,
    /// Latency intercept (proxies road length); nonnegative.
    pub xi2: f64,
}

impl Road {
    /// Travel time on this road at weighted service count `j_e`.
    pub fn latency(&self, j_e: f64) -> f64 {
        debug_assert!(j_e >= 0.0, "negative service count");
        self.xi1 * j_e + self.xi2
    }

    /// Sum of `latency(k)` over integer steps `k = 1..=floor(j)`, with the
    /// last fractional step weighted by `j - floor(j)`. This is the per-road
    /// telescoping term of the potential function.
    pub fn latency_telescope(&self, j: f64) -> f64 {
        debug_assert!(j >= 0.0);
        let m = j.floor();
        let frac = j - m;
        // closed form of xi1 * (1 + 2 + ... + m) + xi2 * m
        let whole = self.xi1 * m * (m + 1.0) / 2.0 + self.xi2 * m;
        whole + frac * self.latency(m + 1.0)
    }
}

/// A network node where travelers may stop, switch modes and transact
/// against the hub budget.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Hub {
    pub id: HubId,
    pub label: String,
    /// Funds available for transactions. Meaningful only on intermediate
    /// hubs; the origin and destination never redistribute.
    #[serde(default)]
    pub budget: f64,
    /// Service rate (travelers/hour) per service type, indexed by type id.
    /// `None` means the hub does not offer that type.
    pub service_rate: Vec<Option<f64>>,
    #[serde(default)]
    pub is_origin: bool,
    #[serde(default)]
    pub is_destination: bool,
}

impl Hub {
    /// Hubs at the endpoints carry no budget and price everything at zero.
    pub fn redistributes(&self) -> bool {
        !self.is_origin && !self.is_destination
    }

    pub fn rate(&self, service_type: ServiceTypeId) -> Option<f64> {
        self.service_rate.get(service_type.index()).copied().flatten()
    }
}

/// An origin-to-destination path plus the hubs that can be chosen as the
/// optional stop while traveling it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Route {
    pub id: RouteId,
    pub edges: Vec<RoadId>,
    pub hubs_en_route: Vec<HubId>,
}

/// The immutable transportation network shared by all travelers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub hubs: Vec<Hub>,
    pub roads: Vec<Road>,
    pub routes: Vec<Route>,
    pub service_types: Vec<ServiceType>,
}

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("network must have exactly one origin hub, found {0}")]
    OriginCount(usize),
    #[error("network must have exactly one destination hub, found {0}")]
    DestinationCount(usize),
    #[error("route catalog is empty")]
    NoRoutes,
    #[error("{entity} {id} references unknown {target} {reference}")]
    DanglingId { entity: &'static str, id: u32, target: &'static str, reference: u32 },
    #[error("{entity} {id} is stored out of order (ids must match positions)")]
    IdOutOfOrder { entity: &'static str, id: u32 },
    #[error("road {0} has non-positive latency slope")]
    LatencySlope(u32),
    #[error("road {0} has negative latency intercept")]
    LatencyIntercept(u32),
    #[error("service type {0} has traffic weight outside [0, 1]")]
    TrafficWeight(u32),
    #[error("service type {0} has zero capacity")]
    ZeroCapacity(u32),
    #[error("hub {hub} offers service type {service_type} at a non-positive rate")]
    NonPositiveRate { hub: u32, service_type: u32 },
    #[error("route {route} is not a connected origin-to-destination path")]
    BrokenPath { route: u32 },
    #[error("route {route} lists stop hub {hub} that is not on its path")]
    StopOffPath { route: u32, hub: u32 },
    #[error("unknown road id {0}")]
    UnknownRoad(u32),
    #[error("unknown hub id {0}")]
    UnknownHub(u32),
}

impl NetworkSpec {
    pub fn origin(&self) -> HubId {
        self.hubs.iter().find(|h| h.is_origin).map(|h| h.id).expect("validated network")
    }

    pub fn destination(&self) -> HubId {
        self.hubs.iter().find(|h| h.is_destination).map(|h| h.id).expect("validated network")
    }

    pub fn hub(&self, id: HubId) -> &Hub {
        &self.hubs[id.index()]
    }

    pub fn road(&self, id: RoadId) -> &Road {
        &self.roads[id.index()]
    }

    pub fn route(&self, id: RouteId) -> &Route {
        &self.routes[id.index()]
    }

    pub fn service_type(&self, id: ServiceTypeId) -> &ServiceType {
        &self.service_types[id.index()]
    }

    /// Structural validation with location diagnostics. Everything downstream
    /// assumes a validated network and indexes without further checks.
    pub fn validate(&self) -> Result<(), NetworkError> {
        let origins = self.hubs.iter().filter(|h| h.is_origin).count();
        if origins != 1 {
            return Err(NetworkError::OriginCount(origins));
        }
        let destinations = self.hubs.iter().filter(|h| h.is_destination).count();
        if destinations != 1 {
            return Err(NetworkError::DestinationCount(destinations));
        }
        if self.routes.is_empty() {
            return Err(NetworkError::NoRoutes);
        }
        for (i, hub) in self.hubs.iter().enumerate() {
            if hub.id.index() != i {
                return Err(NetworkError::IdOutOfOrder { entity: "hub", id: hub.id.0 });
            }
            for (t, rate) in hub.service_rate.iter().enumerate() {
                if let Some(r) = rate {
                    if *r <= 0.0 {
                        return Err(NetworkError::NonPositiveRate {
                            hub: hub.id.0,
                            service_type: t as u32,
                        });
                    }
                }
            }
        }
        for (i, ty) in self.service_types.iter().enumerate() {
            if ty.id.index() != i {
                return Err(NetworkError::IdOutOfOrder { entity: "service type", id: ty.id.0 });
            }
            if !(0.0..=1.0).contains(&ty.traffic_weight) {
                return Err(NetworkError::TrafficWeight(ty.id.0));
            }
            if ty.max_capacity == 0 {
                return Err(NetworkError::ZeroCapacity(ty.id.0));
            }
        }
        for (i, road) in self.roads.iter().enumerate() {
            if road.id.index() != i {
                return Err(NetworkError::IdOutOfOrder { entity: "road", id: road.id.0 });
            }
            for hub in [road.tail, road.head] {
                if hub.index() >= self.hubs.len() {
                    return Err(NetworkError::DanglingId {
                        entity: "road",
                        id: road.id.0,
                        target: "hub",
                        reference: hub.0,
                    });
                }
            }
            if road.xi1 <= 0.0 {
                return Err(NetworkError::LatencySlope(road.id.0));
            }
            if road.xi2 < 0.0 {
                return Err(NetworkError::LatencyIntercept(road.id.0));
            }
        }
        let origin = self.hubs.iter().find(|h| h.is_origin).unwrap().id;
        let destination = self.hubs.iter().find(|h| h.is_destination).unwrap().id;
        for (i, route) in self.routes.iter().enumerate() {
            if route.id.index() != i {
                return Err(NetworkError::IdOutOfOrder { entity: "route", id: route.id.0 });
            }
            let mut at = origin;
            for &edge in &route.edges {
                if edge.index() >= self.roads.len() {
                    return Err(NetworkError::DanglingId {
                        entity: "route",
                        id: route.id.0,
                        target: "road",
                        reference: edge.0,
                    });
                }
                let road = self.road(edge);
                if road.tail != at {
                    return Err(NetworkError::BrokenPath { route: route.id.0 });
                }
                at = road.head;
            }
            if at != destination {
                return Err(NetworkError::BrokenPath { route: route.id.0 });
            }
            let mut on_path = vec![origin];
            for &edge in &route.edges {
                on_path.push(self.road(edge).head);
            }
            for &stop in &route.hubs_en_route {
                if stop.index() >= self.hubs.len() {
                    return Err(NetworkError::DanglingId {
                        entity: "route",
                        id: route.id.0,
                        target: "hub",
                        reference: stop.0,
                    });
                }
                if !on_path.contains(&stop) {
                    return Err(NetworkError::StopOffPath { route: route.id.0, hub: stop.0 });
                }
            }
        }
        Ok(())
    }
}

/// Per-road, per-type traveler counts for one assignment, from which vehicle
/// and weighted service counts are derived.
#[derive(Debug, Clone)]
pub struct RoadLoads {
    /// `counts[road][service_type]` = travelers using that type on that road.
    counts: Vec<Vec<u32>>,
}

impl RoadLoads {
    pub fn tally(network: &NetworkSpec, assignment: &Assignment) -> Self {
        let mut counts = vec![vec![0u32; network.service_types.len()]; network.roads.len()];
        for action in assignment.actions() {
            for &edge in &network.route(action.route).edges {
                counts[edge.index()][action.service_type.index()] += 1;
            }
        }
        RoadLoads { counts }
    }

    /// Same tally with one traveler's action left out.
    pub fn tally_excluding(
        network: &NetworkSpec,
        assignment: &Assignment,
        excluded: usize,
    ) -> Self {
        let mut loads = Self::tally(network, assignment);
        let action = &assignment[excluded];
        for &edge in &network.route(action.route).edges {
            loads.counts[edge.index()][action.service_type.index()] -= 1;
        }
        loads
    }

    pub fn travelers_of_type(&self, road: RoadId, service_type: ServiceTypeId) -> u32 {
        self.counts[road.index()][service_type.index()]
    }

    /// Weighted service count `J_e`: distinct vehicles per type (travelers
    /// divided by vehicle capacity, rounded up) weighted by traffic weight.
    pub fn weighted_services(&self, network: &NetworkSpec, road: RoadId) -> f64 {
        self.counts[road.index()]
            .iter()
            .zip(&network.service_types)
            .map(|(&n, ty)| ty.traffic_weight * vehicles(n, ty.max_capacity) as f64)
            .sum()
    }

    /// `J_e` as seen when one extra traveler of `service_type` joins `road`.
    pub fn weighted_services_plus(
        &self,
        network: &NetworkSpec,
        road: RoadId,
        service_type: ServiceTypeId,
    ) -> f64 {
        let mut total = self.weighted_services(network, road);
        let ty = network.service_type(service_type);
        let n = self.travelers_of_type(road, service_type);
        total += ty.traffic_weight
            * (vehicles(n + 1, ty.max_capacity) - vehicles(n, ty.max_capacity)) as f64;
        total
    }
}

fn vehicles(travelers: u32, capacity: u32) -> u32 {
    travelers.div_ceil(capacity)
}

/// Weighted service count `J_e` on `road` under `assignment`.
pub fn services_on_road(
    network: &NetworkSpec,
    assignment: &Assignment,
    road: RoadId,
) -> Result<f64, NetworkError> {
    if road.index() >= self_len(network) {
        return Err(NetworkError::UnknownRoad(road.0));
    }
    Ok(RoadLoads::tally(network, assignment).weighted_services(network, road))
}

fn self_len(network: &NetworkSpec) -> usize {
    network.roads.len()
}

/// Travel-time latency on `road` at weighted service count `j_e`.
pub fn latency(network: &NetworkSpec, road: RoadId, j_e: f64) -> Result<f64, NetworkError> {
    if road.index() >= network.roads.len() {
        return Err(NetworkError::UnknownRoad(road.0));
    }
    if j_e < 0.0 {
        return Err(NetworkError::UnknownRoad(road.0));
    }
    Ok(network.road(road).latency(j_e))
}

/// The set of travelers stopping at `hub`, including the querying traveler
/// when they stop there themselves.
pub fn hub_cohort(
    network: &NetworkSpec,
    assignment: &Assignment,
    hub: HubId,
) -> Result<Vec<usize>, NetworkError> {
    if hub.index() >= network.hubs.len() {
        return Err(NetworkError::UnknownHub(hub.0));
    }
    Ok(assignment
        .actions()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.hub == hub)
        .map(|(i, _)| i)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanics::Action;
    use crate::scenario::testnet;

    fn act(route: u32, hub: u32, ty: u32) -> Action {
        Action { route: RouteId(route), hub: HubId(hub), service_type: ServiceTypeId(ty), payment: 0.0 }
    }

    #[test]
    fn latency_is_affine_in_load() {
        let net = testnet::fig3_network(1.0);
        let road = RoadId(0);
        assert_eq!(latency(&net, road, 0.0).unwrap(), 3.0);
        assert_eq!(latency(&net, road, 1.0).unwrap(), 8.0);
        assert_eq!(latency(&net, road, 2.0).unwrap(), 13.0);
        // latency(a + b) - latency(b) = xi1 * a
        for (a, b) in [(0.5, 1.5), (2.0, 3.0), (4.0, 0.0)] {
            let lhs = latency(&net, road, a + b).unwrap() - latency(&net, road, b).unwrap();
            assert!((lhs - 5.0 * a).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_assignment_has_no_services() {
        let net = testnet::fig3_network(1.0);
        let assignment = Assignment::new(vec![]);
        for road in 0..net.roads.len() {
            assert_eq!(services_on_road(&net, &assignment, RoadId(road as u32)).unwrap(), 0.0);
        }
    }

    #[test]
    fn bikes_do_not_pool_buses_do() {
        let mut net = testnet::fig3_network(1.0);
        // type 0: capacity 1 (bike-like), type 1: capacity 80 (bus-like)
        net.service_types[0].max_capacity = 1;
        net.service_types[1].max_capacity = 80;
        let three_bikes = Assignment::new(vec![act(0, 1, 0), act(0, 1, 0), act(0, 1, 0)]);
        assert_eq!(services_on_road(&net, &three_bikes, RoadId(0)).unwrap(), 3.0);
        let three_bus = Assignment::new(vec![act(0, 1, 1), act(0, 1, 1), act(0, 1, 1)]);
        assert_eq!(services_on_road(&net, &three_bus, RoadId(0)).unwrap(), 1.0);
    }

    #[test]
    fn services_monotone_in_membership() {
        let net = testnet::fig3_network(1.0);
        let smaller = Assignment::new(vec![act(0, 1, 0)]);
        let larger = Assignment::new(vec![act(0, 1, 0), act(0, 1, 0), act(2, 2, 1)]);
        for road in 0..net.roads.len() {
            let road = RoadId(road as u32);
            assert!(
                services_on_road(&net, &larger, road).unwrap()
                    >= services_on_road(&net, &smaller, road).unwrap()
            );
        }
    }

    #[test]
    fn cohorts_partition_travelers() {
        let net = testnet::fig3_network(1.0);
        let assignment = Assignment::new(vec![act(0, 1, 0), act(1, 2, 2), act(1, 2, 2)]);
        assert_eq!(hub_cohort(&net, &assignment, HubId(1)).unwrap(), vec![0]);
        assert_eq!(hub_cohort(&net, &assignment, HubId(2)).unwrap(), vec![1, 2]);
        assert!(hub_cohort(&net, &assignment, HubId(0)).unwrap().is_empty());
        let total: usize = (0..net.hubs.len())
            .map(|h| hub_cohort(&net, &assignment, HubId(h as u32)).unwrap().len())
            .sum();
        assert!(total <= assignment.len());
    }

    #[test]
    fn unknown_ids_are_structural_errors() {
        let net = testnet::fig3_network(1.0);
        let assignment = Assignment::new(vec![]);
        assert!(services_on_road(&net, &assignment, RoadId(99)).is_err());
        assert!(hub_cohort(&net, &assignment, HubId(99)).is_err());
        assert!(latency(&net, RoadId(99), 0.0).is_err());
    }

    #[test]
    fn telescope_matches_integer_sum() {
        let road = Road { id: RoadId(0), label: "e1".into(), tail: HubId(0), head: HubId(1), xi1: 5.0, xi2: 3.0 };
        let direct: f64 = (1..=4).map(|k| road.latency(k as f64)).sum();
        assert!((road.latency_telescope(4.0) - direct).abs() < 1e-12);
        // fractional tail is weighted by the fractional part
        let frac = road.latency_telescope(2.5);
        let expect = road.latency(1.0) + road.latency(2.0) + 0.5 * road.latency(3.0);
        assert!((frac - expect).abs() < 1e-12);
        assert_eq!(road.latency_telescope(0.0), 0.0);
    }

    #[test]
    fn validation_catches_broken_routes() {
        let mut net = testnet::fig3_network(1.0);
        net.routes[0].edges = vec![RoadId(0), RoadId(4)]; // e1 then e5 does not connect
        assert_eq!(net.validate(), Err(NetworkError::BrokenPath { route: 0 }));

        let mut net = testnet::fig3_network(1.0);
        net.routes[2].hubs_en_route.push(HubId(99));
        assert!(matches!(net.validate(), Err(NetworkError::DanglingId { .. })));

        let mut net = testnet::fig3_network(1.0);
        net.roads[1].xi1 = 0.0;
        assert_eq!(net.validate(), Err(NetworkError::LatencySlope(1)));
    }
}

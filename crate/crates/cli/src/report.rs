//! Equilibrium report emission. The CSV carries one row per traveler in the
//! fixed column order `id,type,route,hub,payment,tau,utility`; the JSON form
//! additionally embeds the raw actions so a stored profile can be re-verified.

use serde::{Deserialize, Serialize};

use mobility_core::scenario::Instance;
use mobility_core::{pricing_for, Action, Assignment, Behavior, EquilibriumReport};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TravelerRow {
    pub id: u32,
    #[serde(rename = "type")]
    pub service_type: String,
    pub route: String,
    pub hub: String,
    pub payment: f64,
    pub tau: f64,
    pub utility: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub scenario: String,
    pub scenario_hash: String,
    pub seed: u64,
    pub behavior: String,
    pub is_nash: bool,
    pub converged: bool,
    pub welfare: f64,
    pub rounds_used: u32,
    pub worst_gap: f64,
    pub anarchy_bound: f64,
    pub actions: Vec<Action>,
    pub travelers: Vec<TravelerRow>,
}

/// Human-readable route name: its road labels joined by dashes.
pub fn route_name(instance: &Instance, route: mobility_core::RouteId) -> String {
    instance
        .network
        .route(route)
        .edges
        .iter()
        .map(|&e| instance.network.road(e).label.clone())
        .collect::<Vec<_>>()
        .join("-")
}

pub fn traveler_rows(
    instance: &Instance,
    behavior: &Behavior,
    assignment: &Assignment,
) -> Vec<TravelerRow> {
    (0..instance.traveler_count())
        .map(|i| {
            let action = &assignment[i];
            TravelerRow {
                id: instance.travelers[i].id,
                service_type: instance.network.service_type(action.service_type).label.clone(),
                route: route_name(instance, action.route),
                hub: instance.network.hub(action.hub).label.clone(),
                payment: action.payment,
                tau: pricing_for(instance, assignment, i),
                utility: behavior.utility(instance, assignment, i),
            }
        })
        .collect()
}

impl SolveReport {
    pub fn new(
        scenario: &str,
        scenario_hash: &str,
        seed: u64,
        behavior: &Behavior,
        instance: &Instance,
        report: &EquilibriumReport,
    ) -> Self {
        let behavior_name = match behavior {
            Behavior::Rational => "rational",
            Behavior::Prospect(_) => "prospect",
        };
        SolveReport {
            scenario: scenario.to_string(),
            scenario_hash: scenario_hash.to_string(),
            seed,
            behavior: behavior_name.to_string(),
            is_nash: report.is_nash,
            converged: report.converged,
            welfare: report.welfare,
            rounds_used: report.rounds_used,
            worst_gap: report.worst_gap,
            anarchy_bound: mobility_core::equilibrium::anarchy_bound(instance),
            actions: report.assignment.actions().to_vec(),
            travelers: traveler_rows(instance, behavior, &report.assignment),
        }
    }
}

pub fn write_csv(report: &SolveReport) -> String {
    let mut out = String::from("id,type,route,hub,payment,tau,utility\n");
    for row in &report.travelers {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.id, row.service_type, row.route, row.hub, row.payment, row.tau, row.utility
        ));
    }
    out
}

pub fn write_json(report: &SolveReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

//! Game-theoretic engine for multimodal mobility networks.
//!
//! Travelers pick a route, a transport-hub stop, a travel mode and a mobility
//! payment in a shared road network. Hubs redistribute budgets through a
//! quadratic pricing mechanism, congestion enters through linear road
//! latencies, and an empty-wallet disincentive couples payments to wallet
//! state. The crate finds pure-strategy Nash equilibria with best-response
//! dynamics, certifies them against the game's exact potential function,
//! computes social optima, and measures the Price of Anarchy under both a
//! risk-neutral and a prospect-theoretic behavioral model.

pub mod equilibrium;
pub mod mechanics;
pub mod network;
pub mod prospect;
pub mod rng;
pub mod scenario;

pub use equilibrium::{
    best_response, price_of_anarchy, run_dynamics, social_optimum, verify_nash, Behavior,
    BestResponseConfig, EquilibriumReport, PaymentSolver, PoaReport,
};
pub use mechanics::{
    disincentive, potential, pricing, pricing_for, utility, welfare, Action, Assignment,
    MechanicsConfig, TravelerProfile,
};
pub use network::{
    Hub, HubId, NetworkSpec, Road, RoadId, Route, RouteId, ServiceType, ServiceTypeId,
};
pub use prospect::{
    expected_prospect, prelec_weight, prospect_potential, prospect_utility, value, BudgetLottery,
    ProspectParams, ReferencePolicy,
};
pub use scenario::{Instance, ScenarioConfig, ScenarioError};

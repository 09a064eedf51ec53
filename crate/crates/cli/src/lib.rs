//! Experiment orchestration around the engine: single solves, traveler-count
//! and rational-index sweeps, and deterministic CSV/JSON emission.

pub mod report;
pub mod sweep;

pub use report::{write_csv, write_json, SolveReport, TravelerRow};
pub use sweep::{run_poa_sweep, run_prospect_sweep, sweep_csv, PricingVariant, SweepRow};

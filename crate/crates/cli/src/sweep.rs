//! Seeded experiment sweeps. Sweep points and replications run as
//! independent parallel tasks; rows are assembled in deterministic
//! (axis, replication) order regardless of scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use mobility_core::equilibrium::{price_of_anarchy, price_of_anarchy_against};
use mobility_core::rng::mix;
use mobility_core::scenario::{BehaviorKind, ScenarioConfig};
use mobility_core::{Behavior, ScenarioError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PricingVariant {
    /// Quadratic pricing curve.
    T1,
    /// Flattened two-thirds exponent.
    T2,
}

impl PricingVariant {
    pub fn exponent(self) -> f64 {
        match self {
            PricingVariant::T1 => 2.0,
            PricingVariant::T2 => 2.0 / 3.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PricingVariant::T1 => "t1",
            PricingVariant::T2 => "t2",
        }
    }
}

impl std::str::FromStr for PricingVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "t1" => Ok(PricingVariant::T1),
            "t2" => Ok(PricingVariant::T2),
            other => Err(format!("unknown pricing variant {other:?} (expected t1 or t2)")),
        }
    }
}

/// One sweep measurement; empty optionals flag rows whose equilibrium search
/// failed without aborting the sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub scenario_hash: String,
    pub seed: u64,
    pub i: u32,
    pub variant: String,
    pub poa: Option<f64>,
    pub bound: f64,
    pub welfare_opt: Option<f64>,
    pub welfare_worst_nash: Option<f64>,
    pub converged: bool,
    pub rounds: u32,
}

/// Fixed sweep CSV schema.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "scenario_hash,seed,i,variant,poa,bound,welfare_opt,welfare_worst_nash,converged,rounds\n",
    );
    for r in rows {
        let opt = |v: &Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.scenario_hash,
            r.seed,
            r.i,
            r.variant,
            opt(&r.poa),
            r.bound,
            opt(&r.welfare_opt),
            opt(&r.welfare_worst_nash),
            r.converged,
            r.rounds
        ));
    }
    out
}

fn behavior_for(
    config: &ScenarioConfig,
    network: &mobility_core::NetworkSpec,
) -> Result<Behavior, ScenarioError> {
    Ok(match config.behavior {
        BehaviorKind::Rational => Behavior::Rational,
        BehaviorKind::Prospect => {
            Behavior::Prospect(config.prospect_model(network)?.expect("validated prospect block"))
        }
    })
}

fn run_point(config: &ScenarioConfig, hash: &str, seed: u64, i: u32, variant: &str) -> SweepRow {
    let mut point = config.clone();
    point.traveler_count = i;
    let failed = |rounds: u32| SweepRow {
        scenario_hash: hash.to_string(),
        seed,
        i,
        variant: variant.to_string(),
        poa: None,
        bound: f64::NAN,
        welfare_opt: None,
        welfare_worst_nash: None,
        converged: false,
        rounds,
    };
    let Ok(instance) = point.instantiate(seed) else { return failed(0) };
    let Ok(behavior) = behavior_for(&point, &instance.network) else { return failed(0) };
    match price_of_anarchy(&instance, &behavior, &point.solver, point.n_starts, seed) {
        Ok(report) => SweepRow {
            scenario_hash: hash.to_string(),
            seed,
            i,
            variant: variant.to_string(),
            poa: report.poa,
            bound: report.bound,
            welfare_opt: Some(report.welfare_opt),
            welfare_worst_nash: Some(report.welfare_worst_nash),
            converged: report.n_converged == report.n_starts,
            rounds: report.rounds_max,
        },
        Err(_) => failed(point.solver.max_rounds),
    }
}

/// Traveler-count sweep under one pricing variant: for every population size
/// and replication, sample a fresh population and measure the anarchy ratio.
pub fn run_poa_sweep(
    config: &ScenarioConfig,
    i_min: u32,
    i_max: u32,
    replications: u32,
    variant: PricingVariant,
) -> Result<Vec<SweepRow>, ScenarioError> {
    if i_min < 2 {
        return Err(ScenarioError::Config {
            location: "i_min".into(),
            problem: format!("population sweeps start at 2, got {i_min}"),
        });
    }
    let mut variant_config = config.clone();
    variant_config.pricing_exponent = variant.exponent();
    variant_config.validate()?;
    let hash = variant_config.content_hash();
    let tasks: Vec<(u32, u32)> =
        (i_min..=i_max).flat_map(|i| (0..replications).map(move |r| (i, r))).collect();
    Ok(tasks
        .par_iter()
        .map(|&(i, rep)| {
            let seed = mix(variant_config.seed, (i as u64) << 32 | rep as u64);
            run_point(&variant_config, &hash, seed, i, variant.label())
        })
        .collect())
}

/// Rational-index sweep: equilibria under each distortion level, benchmarked
/// against the social optimum of the fully rational population.
pub fn run_prospect_sweep(
    config: &ScenarioConfig,
    beta3_values: &[f64],
    replications: u32,
) -> Result<Vec<SweepRow>, ScenarioError> {
    for &b3 in beta3_values {
        if !(0.0 < b3 && b3 <= 1.0) {
            return Err(ScenarioError::Config {
                location: "beta3".into(),
                problem: format!("rational index must lie in (0, 1], got {b3}"),
            });
        }
    }
    let mut base = config.clone();
    base.behavior = BehaviorKind::Prospect;
    if base.prospect.is_none() {
        return Err(ScenarioError::Config {
            location: "prospect".into(),
            problem: "rational-index sweep needs a prospect block".into(),
        });
    }
    base.validate()?;
    let hash = base.content_hash();
    let tasks: Vec<(usize, u32)> = (0..beta3_values.len())
        .flat_map(|v| (0..replications).map(move |r| (v, r)))
        .collect();
    let rows: Vec<SweepRow> = tasks
        .par_iter()
        .map(|&(v, rep)| {
            let beta3 = beta3_values[v];
            let mut point = base.clone();
            point.prospect.as_mut().unwrap().params.beta3 = beta3;
            let seed = mix(point.seed, (v as u64) << 32 | rep as u64);
            let variant = format!("beta3={beta3}");
            let failed = |rounds: u32| SweepRow {
                scenario_hash: hash.clone(),
                seed,
                i: point.traveler_count,
                variant: variant.clone(),
                poa: None,
                bound: f64::NAN,
                welfare_opt: None,
                welfare_worst_nash: None,
                converged: false,
                rounds,
            };
            let Ok(instance) = point.instantiate(seed) else { return failed(0) };
            let Ok(behavior) = behavior_for(&point, &instance.network) else { return failed(0) };
            // the benchmark welfare is evaluated at full rationality
            let mut rational_point = point.clone();
            rational_point.prospect.as_mut().unwrap().params.beta3 = 1.0;
            let Ok(optimum_behavior) = behavior_for(&rational_point, &instance.network) else {
                return failed(0);
            };
            match price_of_anarchy_against(
                &instance,
                &behavior,
                &optimum_behavior,
                &point.solver,
                point.n_starts,
                seed,
            ) {
                Ok(report) => SweepRow {
                    scenario_hash: hash.clone(),
                    seed,
                    i: point.traveler_count,
                    variant,
                    poa: report.poa,
                    bound: report.bound,
                    welfare_opt: Some(report.welfare_opt),
                    welfare_worst_nash: Some(report.welfare_worst_nash),
                    converged: report.n_converged == report.n_starts,
                    rounds: report.rounds_max,
                },
                Err(_) => failed(point.solver.max_rounds),
            }
        })
        .collect();
    Ok(rows)
}

/// Median of the defined ratios among `rows` (used by trend checks).
pub fn median_poa(rows: &[SweepRow]) -> Option<f64> {
    let mut values: Vec<f64> = rows.iter().filter_map(|r| r.poa).collect();
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    Some(if n % 2 == 1 { values[n / 2] } else { (values[n / 2 - 1] + values[n / 2]) / 2.0 })
}

// Temporary tuning harness (not part of the deliverable).
use mobility_core::rng::SeededRng;
use mobility_core::scenario::{builtin, BudgetLaw, EtaLaw, RateSpec, ScenarioConfig};
use mobility_core::{pricing_for, run_dynamics, Behavior};
use rayon::prelude::*;
use std::collections::BTreeMap;

fn table1_variant(
    eta: Vec<f64>,
    rate_a: Vec<f64>,
    rate_b: Vec<f64>,
    caps: [u32; 3],
    weights: [f64; 3],
    fares: [f64; 3],
    e5_len: f64,
    seed: u64,
) -> ScenarioConfig {
    let mut config = builtin::table1();
    config.eta_law = EtaLaw::Explicit(eta);
    config.network.hubs[1].service_rate = Some(RateSpec::PerType(rate_a));
    config.network.hubs[2].service_rate = Some(RateSpec::PerType(rate_b));
    config.network.roads[4].xi2 = Some(e5_len);
    for (t, ty) in config.network.service_types.iter_mut().enumerate() {
        ty.max_capacity = caps[t];
        ty.traffic_weight = weights[t];
        ty.base_fare = fares[t];
    }
    config.seed = seed;
    config
}

struct Outcome {
    split: BTreeMap<String, usize>,
    ok: bool,
    detail: String,
}

fn evaluate(config: &ScenarioConfig) -> Outcome {
    let instance = config.instantiate(config.seed).unwrap();
    let behavior = Behavior::Rational;
    let initial = match config.initial_assignment(&instance).unwrap() {
        Some(a) => a,
        None => {
            let mut rng = SeededRng::child(config.seed, 0x1217);
            instance.random_assignment(&mut rng)
        }
    };
    let report = run_dynamics(&instance, &behavior, initial, &config.solver);
    let mut split: BTreeMap<String, usize> = BTreeMap::new();
    let mut taus: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for i in 0..instance.traveler_count() {
        let a = &report.assignment[i];
        let ty = instance.network.service_type(a.service_type).label.clone();
        *split.entry(ty.clone()).or_default() += 1;
        taus.entry(ty).or_default().push(pricing_for(&instance, &report.assignment, i));
    }
    let bike = taus.get("bike").cloned().unwrap_or_default();
    let bus = taus.get("bus").cloned().unwrap_or_default();
    let car = taus.get("car").cloned().unwrap_or_default();
    let split_ok = split.get("bike") == Some(&3)
        && split.get("bus") == Some(&3)
        && split.get("car") == Some(&6);
    let signs_ok = bike.iter().all(|&t| t > 0.0)
        && bus.iter().all(|&t| t > 0.0)
        && car.iter().all(|&t| t < 0.0);
    let order_ok = match (bike.iter().cloned().reduce(f64::min), bus.iter().cloned().reduce(f64::max))
    {
        (Some(bk), Some(bs)) => bk >= bs,
        _ => false,
    };
    let ok = report.is_nash && split_ok && signs_ok && order_ok;
    Outcome {
        split: split.clone(),
        ok,
        detail: format!(
            "nash={} split={:?} bike_tau={:?} bus_tau={:?} car_tau={:?}",
            report.is_nash,
            split,
            bike.iter().map(|t| (t * 100.0).round() / 100.0).collect::<Vec<_>>(),
            bus.iter().map(|t| (t * 100.0).round() / 100.0).collect::<Vec<_>>(),
            car.iter().map(|t| (t * 100.0).round() / 100.0).collect::<Vec<_>>()
        ),
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mode = args.get(1).map(|s| s.as_str()).unwrap_or("table1");
    match mode {
        "table1" => {
            let high = [0.95, 0.94, 0.93, 0.92, 0.91, 0.90];
            let band = [0.26, 0.255, 0.252, 0.25, 0.245, 0.24];
            let orders: Vec<(&str, Vec<f64>)> = vec![
                ("high-first", high.iter().chain(band.iter()).copied().collect()),
                ("band-first", band.iter().chain(high.iter()).copied().collect()),
                (
                    "interleaved",
                    (0..12)
                        .map(|i| if i % 2 == 0 { high[i / 2] } else { band[i / 2] })
                        .collect(),
                ),
            ];
            let caps = [1, 3, 3];
            let weights = [0.05, 0.15, 1.0];
            let fares = [0.5, 1.0, 2.0];
            for sigma_bus_a in [1.0] {
                let rate_a = vec![0.5, sigma_bus_a, 20.0]; // bike, bus, car at A
                let rate_b = vec![0.3, 0.25, 0.25];
                for (name, eta) in &orders {
                    let hits: Vec<(u64, String)> = (0u64..4000)
                        .into_par_iter()
                        .filter_map(|seed| {
                            let config = table1_variant(
                                eta.clone(),
                                rate_a.clone(),
                                rate_b.clone(),
                                caps,
                                weights,
                                fares,
                                14.0,
                                seed,
                            );
                            let outcome = evaluate(&config);
                            if outcome.ok {
                                Some((seed, outcome.detail))
                            } else {
                                None
                            }
                        })
                        .collect();
                    println!("[sigma_bus_a={sigma_bus_a} {name}] hits: {}", hits.len());
                    for (seed, detail) in hits.iter().take(3) {
                        println!("    seed {seed}: {detail}");
                    }
                }
            }
        }
        "check-table1" => {
            // the shipped scenario, across seeds (warm start makes the seed
            // irrelevant for the solve path, but confirm)
            for seed in [12u64, 0, 1, 99, 12345] {
                let mut config = builtin::table1();
                config.seed = seed;
                let outcome = evaluate(&config);
                println!("seed {seed}: ok={} {}", outcome.ok, outcome.detail);
            }
        }
        "sweep" => {
            let reps: u32 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(4);
            // (name, wallet_init, wallet_max, offset, coef, noise)
            let candidates: Vec<(&str, f64, f64, f64, f64, f64)> = vec![
                ("w150-c150-o153", 75.0, 150.0, 153.0, 150.0, 1.0),
                ("w112-c112-o115", 56.0, 112.0, 115.0, 112.0, 1.0),
            ];
            for (name, wallet_init, wallet, offset, coef, noise) in candidates {
                let mut config = builtin::sweep();
                config.wallet_init = wallet_init;
                config.wallet_max = wallet;
                config.budget_law = BudgetLaw::PerCapita { offset, coef, stddev: noise };
                println!("== {name}");
                for variant in
                    [mobility_cli::PricingVariant::T1, mobility_cli::PricingVariant::T2]
                {
                    let rows = mobility_cli::run_poa_sweep(&config, 2, 12, reps, variant).unwrap();
                    print!("{:?} medians:", variant);
                    for i in 2..=12u32 {
                        let at: Vec<_> = rows.iter().filter(|r| r.i == i).cloned().collect();
                        let defined = at.iter().filter(|r| r.poa.is_some()).count();
                        match mobility_cli::sweep::median_poa(&at) {
                            Some(m) => print!(" {i}:{m:.3}({defined}/{})", at.len()),
                            None => print!(" {i}:undef(0/{})", at.len()),
                        }
                    }
                    println!();
                }
            }
        }
        other => eprintln!("unknown mode {other}"),
    }
}

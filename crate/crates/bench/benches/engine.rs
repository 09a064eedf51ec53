use criterion::{black_box, criterion_group, criterion_main, Criterion};

use mobility_core::rng::SeededRng;
use mobility_core::scenario::builtin;
use mobility_core::{best_response, potential, run_dynamics, utility, Behavior, BestResponseConfig};

fn bench_engine(c: &mut Criterion) {
    let scenario = builtin::fig3();
    let instance = scenario.instantiate(7).unwrap();
    let mut rng = SeededRng::new(7);
    let assignment = instance.random_assignment(&mut rng);
    let config = BestResponseConfig::default();

    c.bench_function("utility fig3 I=12", |b| {
        b.iter(|| utility(black_box(&instance), black_box(&assignment), 5))
    });

    c.bench_function("potential fig3 I=12", |b| {
        b.iter(|| potential(black_box(&instance), black_box(&assignment)))
    });

    c.bench_function("best_response fig3 I=12", |b| {
        b.iter(|| best_response(black_box(&instance), &Behavior::Rational, &assignment, 5, &config))
    });

    c.bench_function("dynamics fig3 I=12", |b| {
        b.iter(|| {
            let mut rng = SeededRng::new(11);
            let initial = instance.random_assignment(&mut rng);
            run_dynamics(black_box(&instance), &Behavior::Rational, initial, &config)
        })
    });
}

criterion_group!(benches, bench_engine);
criterion_main!(benches);

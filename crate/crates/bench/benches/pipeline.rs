use std::hint::black_box;

use copula_exo::regress::{design_with_intercept, ols_fit};
use copula_exo::simlab::{generate_replication, ScenarioSpec};
use copula_exo::transform::normal_scores_continuous;
use copula_exo::{
    instrument_exogeneity_test, regressor_exogeneity_test, RngStream, TestOptions,
};
use criterion::{criterion_group, criterion_main, Criterion};

fn sample(spec: &ScenarioSpec) -> copula_exo::Dataset {
    generate_replication(spec, &mut RngStream::new(1, 0))
        .expect("default scenario generates")
        .dataset
}

fn pipeline(c: &mut Criterion) {
    let options = TestOptions::default();
    let rng = RngStream::new(2, 0);
    for t in [200, 1000] {
        let d = sample(&ScenarioSpec {
            t,
            ..ScenarioSpec::instruments()
        });
        c.bench_function(&format!("instrument_test_t{t}"), |b| {
            b.iter(|| instrument_exogeneity_test(black_box(&d), &options, &rng).unwrap())
        });
    }

    let d = sample(&ScenarioSpec::regressor());
    c.bench_function("regressor_test_t1000", |b| {
        b.iter(|| regressor_exogeneity_test(black_box(&d), &options, &rng).unwrap())
    });

    let column = d.p().to_vec();
    c.bench_function("normal_scores_t1000", |b| {
        b.iter(|| normal_scores_continuous(black_box(&column)).unwrap())
    });

    let design = design_with_intercept(d.n_obs(), [d.exogenous()[0].as_slice(), d.p()]);
    c.bench_function("ols_t1000_k3", |b| b.iter(|| ols_fit(black_box(&design), d.y()).unwrap()));
}

criterion_group!(benches, pipeline);
criterion_main!(benches);

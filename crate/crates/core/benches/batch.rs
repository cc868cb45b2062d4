use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qfn::batch::{map_indexed_par, map_indexed_seq};
use qfn::network::{feedback_slh, feedback_strat, lindblad_generator};
use qfn::sampling::{feedback_strat_case, random_density, random_two_component_network, sample_rng};
use qfn::{reduce_network, NetworkSpec, Operator, Route, StratGenerator, Tolerances};

fn route_error(k: usize) -> f64 {
    let tol = Tolerances::default();
    let (e, split) = feedback_strat_case(&mut sample_rng(1, k as u64));
    let direct = feedback_strat(&e, &split, &tol).unwrap();
    let via = feedback_slh(&e.to_slh(&tol).unwrap(), &split, &tol).unwrap();
    StratGenerator::from_slh(&via, &tol).unwrap().max_abs_diff(&direct)
}

fn lindblad_gap(spec: &NetworkSpec, rho: &Operator) -> f64 {
    let tol = Tolerances::default();
    let a = reduce_network(spec, Route::Ito, &tol).unwrap();
    let b = reduce_network(spec, Route::Strat, &tol).unwrap();
    lindblad_generator(&a.slh, rho)
        .unwrap()
        .max_abs_diff(&lindblad_generator(&b.slh, rho).unwrap())
}

fn bench_routes(c: &mut Criterion) {
    let mut group = c.benchmark_group("feedback routes");
    for n in [64, 512] {
        group.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, &n| {
            b.iter(|| map_indexed_seq(n, route_error))
        });
        group.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, &n| {
            b.iter(|| map_indexed_par(n, route_error))
        });
    }
    group.finish();
}

fn bench_lindblad(c: &mut Criterion) {
    let cases: Vec<(NetworkSpec, Operator)> = (0..100)
        .map(|k| {
            let mut rng = sample_rng(2, k);
            let spec = random_two_component_network(&mut rng);
            let rho = random_density(&mut rng, spec.hilbert_dim);
            (spec, rho)
        })
        .collect();
    let mut group = c.benchmark_group("lindblad oracle");
    group.bench_function("sequential", |b| {
        b.iter(|| map_indexed_seq(cases.len(), |k| lindblad_gap(&cases[k].0, &cases[k].1)))
    });
    group.bench_function("parallel", |b| {
        b.iter(|| map_indexed_par(cases.len(), |k| lindblad_gap(&cases[k].0, &cases[k].1)))
    });
    group.finish();
}

criterion_group!(benches, bench_routes, bench_lindblad);
criterion_main!(benches);

use std::collections::HashMap;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use evcoref::cluster::connected_components;
use evcoref::metrics::{kuhn_munkres, phi4_matrix, score_all, SingletonPolicy};
use evcoref::{seed, Architecture, Clustering, MentionGraph, PairModel, Scope};
use rand::Rng;

fn random_partition(rng: &mut impl Rng, n: usize, k: usize) -> Clustering {
    let mut groups: HashMap<usize, Vec<String>> = HashMap::new();
    for i in 0..n {
        groups.entry(rng.gen_range(0..k)).or_default().push(format!("m{i}"));
    }
    Clustering::new(groups.into_values())
}

fn hungarian(c: &mut Criterion) {
    let mut group = c.benchmark_group("kuhn_munkres");
    let mut rng = seed::rng(1, "bench");
    for size in [10usize, 50, 200] {
        let w: Vec<Vec<f64>> = (0..size).map(|_| (0..size).map(|_| rng.gen()).collect()).collect();
        group.bench_with_input(BenchmarkId::from_parameter(size), &w, |b, w| {
            b.iter(|| kuhn_munkres(black_box(w)).unwrap())
        });
    }
    group.finish();
}

fn components(c: &mut Criterion) {
    let mut group = c.benchmark_group("connected_components");
    let mut rng = seed::rng(2, "bench");
    for n in [100usize, 1000] {
        let mut g = MentionGraph::new(Scope::Wd, (0..n).map(|i| format!("m{i}")));
        for i in 0..n {
            for j in i + 1..n.min(i + 20) {
                g.add_edge(&format!("m{i}"), &format!("m{j}"), rng.gen()).unwrap();
            }
        }
        group.bench_with_input(BenchmarkId::from_parameter(n), &g, |b, g| {
            b.iter(|| connected_components(black_box(g), 0.95, 1e-9))
        });
    }
    group.finish();
}

fn forward(c: &mut Criterion) {
    let mut group = c.benchmark_group("forward");
    for (name, scope, dim, hidden) in [("wd", Scope::Wd, 2418, vec![300]), ("cd", Scope::Cd, 2409, vec![400, 150])] {
        let model = PairModel::init(scope, Architecture::new(dim, hidden).unwrap(), 3);
        let mut rng = seed::rng(3, "bench");
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        group.bench_function(name, |b| b.iter(|| model.forward(black_box(&x)).unwrap()));
    }
    group.finish();
}

fn metrics(c: &mut Criterion) {
    let mut rng = seed::rng(4, "bench");
    let key = random_partition(&mut rng, 3000, 600);
    let response = random_partition(&mut rng, 3000, 800);
    c.bench_function("phi4_matrix", |b| b.iter(|| phi4_matrix(black_box(&key), black_box(&response))));
    c.bench_function("score_all", |b| {
        b.iter(|| score_all(black_box(&key), black_box(&response), SingletonPolicy::Include).unwrap())
    });
}

criterion_group!(benches, hungarian, components, forward, metrics);
criterion_main!(benches);

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use meshroute::{
    dijkstra, generate_random_topology, optimize_path, BbbcConfig, FuzzyInferenceSystem, LinkMetrics, NodeId, Topology,
    TopologyParams,
};

fn reachable(n: usize) -> Topology {
    let fis = FuzzyInferenceSystem::default();
    (0..)
        .map(|seed| {
            let t = generate_random_topology(&TopologyParams::new(n, 500.0, 500.0, 250.0), seed).unwrap();
            fis.cost_links(&t).unwrap()
        })
        .find(|t| t.is_reachable(NodeId(1), NodeId(n as u32)).unwrap())
        .unwrap()
}

fn link_cost(c: &mut Criterion) {
    let fis = FuzzyInferenceSystem::default();
    let m = LinkMetrics::new(0.6, 35.0, 7.0);
    c.bench_function("link_cost", |b| b.iter(|| fis.link_cost(black_box(&m), black_box(0.4)).unwrap()));
}

fn routing(c: &mut Criterion) {
    let mut group = c.benchmark_group("route");
    group.sample_size(10);
    for n in [25, 50, 100] {
        let t = reachable(n);
        let target = NodeId(n as u32);
        group.bench_with_input(BenchmarkId::new("dijkstra", n), &t, |b, t| {
            b.iter(|| dijkstra(t, NodeId(1), target).unwrap())
        });
        let cfg = BbbcConfig::new(50, 100, 1);
        group.bench_with_input(BenchmarkId::new("bbbc_50x100", n), &t, |b, t| {
            b.iter(|| optimize_path(t, NodeId(1), target, &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, link_cost, routing);
criterion_main!(benches);

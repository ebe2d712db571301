use std::hint::black_box;

use care_core::skipgram::{init_embeddings, train};
use care_core::synth::{lfr_like, LfrConfig};
use care_core::walker::generate_corpus;
use care_core::{louvain, AliasSampler, Graph, LouvainConfig, NodeId, Partition, TrainConfig, WalkConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn lfr(nodes: usize) -> Graph {
    lfr_like(&LfrConfig {
        nodes,
        seed: 1,
        ..LfrConfig::default()
    })
    .unwrap()
    .0
}

fn alias_sampling(c: &mut Criterion) {
    let g = lfr(1000);
    let sampler = AliasSampler::new(&g);
    let mut rng = StdRng::seed_from_u64(0);
    let mut group = c.benchmark_group("alias");
    group.throughput(Throughput::Elements(1));
    group.bench_function("neighbor_sample", |b| {
        b.iter(|| {
            let u = NodeId(rng.random_range(0..1000));
            black_box(sampler.sample(&g, u, &mut rng))
        })
    });
    group.bench_function("build_1000", |b| b.iter(|| AliasSampler::new(black_box(&g))));
    group.finish();
}

fn community_detection(c: &mut Criterion) {
    let mut group = c.benchmark_group("louvain");
    group.sample_size(10);
    for nodes in [1000, 5000] {
        let g = lfr(nodes);
        group.bench_with_input(BenchmarkId::from_parameter(nodes), &g, |b, g| {
            b.iter(|| louvain(g, &LouvainConfig::default()).unwrap())
        });
    }
    group.finish();
}

fn walks(c: &mut Criterion) {
    let g = lfr(1000);
    let partition: Partition = louvain(&g, &LouvainConfig::default()).unwrap();
    let mut group = c.benchmark_group("walks");
    group.sample_size(10);
    for alpha in [0.0, 0.2] {
        let config = WalkConfig {
            alpha,
            walks_per_node: 2,
            ..WalkConfig::default()
        };
        group.throughput(Throughput::Elements((g.node_count() * 2 * config.walk_length) as u64));
        group.bench_with_input(BenchmarkId::new("alpha", alpha), &config, |b, config| {
            b.iter(|| generate_corpus(&g, &partition, config, 1).unwrap())
        });
    }
    group.finish();
}

fn skipgram(c: &mut Criterion) {
    let g = lfr(1000);
    let partition = louvain(&g, &LouvainConfig::default()).unwrap();
    let corpus = generate_corpus(
        &g,
        &partition,
        &WalkConfig {
            walks_per_node: 1,
            ..WalkConfig::default()
        },
        1,
    )
    .unwrap();
    let mut group = c.benchmark_group("skipgram");
    group.sample_size(10);
    group.throughput(Throughput::Elements(corpus.token_count() as u64));
    for dim in [64, 128] {
        group.bench_with_input(BenchmarkId::new("dim", dim), &dim, |b, &dim| {
            b.iter(|| {
                let model = init_embeddings(g.node_count(), dim, 0).unwrap();
                train(&corpus, &TrainConfig::default(), model).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, alias_sampling, community_detection, walks, skipgram);
criterion_main!(benches);

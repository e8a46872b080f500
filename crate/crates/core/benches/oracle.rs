use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pinobs::exec::Exec;
use pinobs::gen::chains_with_noise;
use pinobs::network::BooleanNetwork;
use pinobs::oracle::{check_observability, DEFAULT_STATE_CAP};

fn tlgl() -> BooleanNetwork {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/tlgl.bn");
    std::fs::read_to_string(path).unwrap().parse().unwrap()
}

fn bench_oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut cases: Vec<(String, BooleanNetwork)> = [12, 14, 16]
        .into_iter()
        .map(|n| {
            (
                format!("synthetic-{n}"),
                chains_with_noise(&mut rng, n, 2, n / 2),
            )
        })
        .collect();
    cases.push(("tlgl".into(), tlgl()));
    for (name, bn) in &cases {
        for exec in [Exec::Sequential, Exec::Parallel] {
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), name), bn, |b, bn| {
                b.iter(|| check_observability(bn, None, DEFAULT_STATE_CAP, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_oracle);
criterion_main!(benches);

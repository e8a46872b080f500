use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pinobs::exec::Exec;
use pinobs::gen::chains_with_noise;
use pinobs::network::BooleanNetwork;
use pinobs::planner::{plan, CostWeights, PlannerKind};
use pinobs::synthesis::{synthesize, SynthesisOptions};
use pinobs::wiring::{augment, build_wiring_digraph, AugmentMode};

fn fixture(name: &str) -> BooleanNetwork {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap().parse().unwrap()
}

fn run(bn: &BooleanNetwork, exec: Exec) {
    let aug = augment(bn, AugmentMode::Collapse).unwrap();
    let g = build_wiring_digraph(&aug);
    let p = plan(&g, PlannerKind::Cover, CostWeights::default()).unwrap();
    let opts = SynthesisOptions {
        exec,
        ..SynthesisOptions::default()
    };
    synthesize(&aug, &p, opts).unwrap();
}

fn bench_pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("pipeline");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut cases: Vec<(String, BooleanNetwork)> = [40, 160, 640]
        .into_iter()
        .map(|n| {
            (
                format!("synthetic-{n}"),
                chains_with_noise(&mut rng, n, 2, n / 2),
            )
        })
        .collect();
    cases.push(("tlgl".into(), fixture("tlgl.bn")));
    cases.push(("tcell".into(), fixture("tcell.bn")));
    for (name, bn) in &cases {
        for exec in [Exec::Sequential, Exec::Parallel] {
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), name), bn, |b, bn| {
                b.iter(|| run(bn, exec))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_pipeline);
criterion_main!(benches);

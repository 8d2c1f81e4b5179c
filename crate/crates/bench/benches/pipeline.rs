use std::hint::black_box;

use amrseq::neural::{encode, greedy_decode_indices, Dims, ParamSet};
use amrseq::smatch::smatch_score;
use amrseq::synth::{corrupt, random_graph};
use amrseq::{delinearize, linearize, repair_brackets};
use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn graphs(n: u64, max_nodes: usize) -> Vec<amrseq::AmrGraph> {
    (0..n).map(|s| random_graph(&mut ChaCha8Rng::seed_from_u64(s), max_nodes, false)).collect()
}

fn linearization(c: &mut Criterion) {
    let gs = graphs(100, 12);
    let seqs: Vec<_> = gs.iter().map(linearize).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let broken: Vec<_> = seqs.iter().map(|t| corrupt(&mut rng, t)).collect();
    c.bench_function("linearize_100", |b| b.iter(|| gs.iter().map(|g| linearize(black_box(g))).count()));
    c.bench_function("delinearize_100", |b| b.iter(|| seqs.iter().map(|t| delinearize(black_box(t))).count()));
    c.bench_function("repair_100", |b| b.iter(|| broken.iter().map(|t| repair_brackets(black_box(t))).count()));
}

fn smatch(c: &mut Criterion) {
    let gs = graphs(40, 12);
    c.bench_function("smatch_20_pairs", |b| {
        b.iter(|| gs.chunks(2).map(|p| smatch_score(black_box(&p[0]), black_box(&p[1]), 4, 0).f1).sum::<f64>())
    });
}

fn decoder(c: &mut Criterion) {
    let dims = Dims { src_vocab: 500, tgt_vocab: 300, embed: 64, hidden: 64, attn: 64 };
    let p = ParamSet::init_uniform(dims, 0.08, &mut ChaCha8Rng::seed_from_u64(2));
    let input: Vec<usize> = (3..23).collect();
    c.bench_function("encode_20_tokens", |b| b.iter(|| encode(&p, black_box(&input)).map(|e| e.h.len())));
    c.bench_function("greedy_decode_40_steps", |b| {
        b.iter(|| greedy_decode_indices(&p, black_box(&input), 40).map(|o| o.len()))
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = linearization, smatch, decoder
}
criterion_main!(benches);

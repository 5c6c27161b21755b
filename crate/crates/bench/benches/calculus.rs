use criterion::{criterion_group, criterion_main, Criterion};
use monorel::fitz::{box2, fitzpatrick};
use monorel::l2exact::{gap_eval, random_finseq};
use monorel::space::Vector;
use monorel::volterra::Grid;
use monorel_bench::{dense_monotone_relation, probe_coords};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn adjoint(c: &mut Criterion) {
    let rel = dense_monotone_relation(32);
    c.bench_function("adjoint n=32", |b| {
        b.iter(|| black_box(&rel).adjoint());
    });
}

fn fitzpatrick_evaluate(c: &mut Criterion) {
    let g = Grid::new(32).unwrap();
    let f = fitzpatrick(&g.t_relation());
    let ctx = g.ctx().power(2);
    let z = Vector::new(&ctx, probe_coords(32)).unwrap();
    c.bench_function("fitzpatrick build m=32", |b| {
        b.iter(|| fitzpatrick(black_box(&g.t_relation())));
    });
    c.bench_function("fitzpatrick evaluate m=32", |b| {
        b.iter(|| f.evaluate(black_box(&z), 1e-9).unwrap());
    });
}

fn inf_convolution(c: &mut Criterion) {
    let g = Grid::new(16).unwrap();
    let ft = fitzpatrick(&g.t_relation());
    let fts = fitzpatrick(&g.t_star_relation());
    c.bench_function("box2 m=16", |b| {
        b.iter(|| box2(black_box(&ft), black_box(&fts)).unwrap());
    });
}

fn exact_gap(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6761_70);
    let seqs: Vec<_> = (0..64).map(|i| random_finseq(&mut rng, i % 2 == 0)).collect();
    c.bench_function("exact gap over 64 sequences", |b| {
        b.iter(|| {
            for y in &seqs {
                black_box(gap_eval(black_box(y)));
            }
        });
    });
}

criterion_group!(benches, adjoint, fitzpatrick_evaluate, inf_convolution, exact_gap);
criterion_main!(benches);

//! Criterion benchmarks for the hot kernels: Hardy operator sweeps,
//! potential/energy evaluation, and the constant computations.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use mtc_core::constants::{box_constant, SearchMode};
use mtc_core::field::{NodeField, TensorWeight};
use mtc_core::ops;
use mtc_core::poset::{NTree, Tree};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bitree(depth: u32) -> NTree {
    let b = Tree::dyadic(depth, 2, 1 << 22).unwrap();
    NTree::new(vec![b.clone(), b]).unwrap()
}

fn bench_hardy(c: &mut Criterion) {
    let t = bitree(6);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = NodeField::random_leaf_measure(&t, &mut rng, 64);
    c.bench_function("hardy_t2_depth6", |b| b.iter(|| ops::hardy(&t, black_box(&f))));
    c.bench_function("adjoint_hardy_t2_depth6", |b| {
        b.iter(|| ops::adjoint_hardy(&t, black_box(&f)))
    });
}

fn bench_potential(c: &mut Criterion) {
    let t = bitree(5);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let w = TensorWeight::random(&t, &mut rng);
    let mu = NodeField::random_leaf_measure(&t, &mut rng, 32);
    c.bench_function("potential_t2_depth5", |b| {
        b.iter(|| ops::potential(&t, &w, black_box(&mu)))
    });
    c.bench_function("energy_t2_depth5", |b| b.iter(|| ops::energy(&t, &w, black_box(&mu))));
}

fn bench_constants(c: &mut Criterion) {
    let t = bitree(2);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w = TensorWeight::random(&t, &mut rng);
    let mu = NodeField::random_leaf_measure(&t, &mut rng, 4);
    c.bench_function("box_constant_t2_depth2", |b| {
        b.iter(|| box_constant(&t, &w, black_box(&mu)).unwrap())
    });
    c.bench_function("carleson_sampled_t2_depth2", |b| {
        b.iter(|| {
            mtc_core::constants::carleson_constant(
                &t,
                &w,
                black_box(&mu),
                SearchMode::Sampled { trials: 200, seed: 7 },
            )
            .unwrap()
        })
    });
}

criterion_group!(benches, bench_hardy, bench_potential, bench_constants);
criterion_main!(benches);

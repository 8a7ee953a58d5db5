use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sseq_core::filtered::{lambda_fc, spectral_sequence, tensor_lambda_fc};
use sseq_core::harness::{self, gen, Check, GenSpec, Mutation};
use sseq_core::linalg::Matrix;
use sseq_core::multicomplex::{eprime, lambda_mc, mc_path};
use sseq_core::paths::{lambda, mapping_path, path};
use sseq_core::representables::rfib_via_rlp;
use sseq_core::spectral::{is_r_fibration, isomorphic, SpectralMorphism};
use sseq_core::{Field, F7};

fn dense(n: usize, seed: u64) -> Matrix<F7> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(n, n, |_, _| F7::sample(&mut rng))
}

fn linalg(c: &mut Criterion) {
    let mut g = c.benchmark_group("echelon");
    for n in [8, 32, 96] {
        let m = dense(n, n as u64);
        g.bench_with_input(BenchmarkId::new("kernel", n), &m, |b, m| b.iter(|| black_box(m).kernel_basis()));
        g.bench_with_input(BenchmarkId::new("inverse", n), &m, |b, m| b.iter(|| black_box(m).inverse()));
    }
    g.finish();
}

fn pages(c: &mut Criterion) {
    let mut g = c.benchmark_group("pages");
    for r in [1, 3] {
        let b = lambda_fc::<F7>(r);
        let big = tensor_lambda_fc(r, &tensor_lambda_fc(r, &b).object).object;
        g.bench_with_input(BenchmarkId::new("filtered", r), &big, |bch, c| bch.iter(|| spectral_sequence(black_box(c)).unwrap()));
        let mc = mc_path(r, &mc_path(r, &lambda_mc::<F7>(r)).object).object;
        g.bench_with_input(BenchmarkId::new("multicomplex", r), &mc, |bch, m| bch.iter(|| eprime(black_box(m)).unwrap()));
    }
    g.finish();
}

fn predicates(c: &mut Criterion) {
    let mut g = c.benchmark_group("predicates");
    let a = path(2, &lambda::<F7>(1)).object;
    let f = mapping_path(2, &SpectralMorphism::identity(a)).p;
    g.bench_function("is_r_fibration", |b| b.iter(|| is_r_fibration(black_box(&f), 2)));
    g.bench_function("rfib_via_rlp", |b| b.iter(|| rfib_via_rlp(black_box(&f), 2)));
    let spec = GenSpec::default();
    let s = gen::gen_spectral::<F7, _>(&mut harness::trial_rng(7, 0), &spec);
    let t = Arc::new((*s).clone());
    g.bench_function("isomorphism search", |b| b.iter(|| isomorphic(black_box(&s), &t)));
    g.finish();
}

fn trials(c: &mut Criterion) {
    let spec = GenSpec::default();
    let mut g = c.benchmark_group("harness trial");
    for check in [Check::TwoOutOfThree, Check::Lifting, Check::FunctorE, Check::Homotopy] {
        g.bench_function(check.name(), |b| {
            let mut t = 0;
            b.iter(|| {
                t += 1;
                harness::run_trial::<F7>(check, &spec, 1, Mutation::None, t)
            })
        });
    }
    g.finish();
}

criterion_group!(benches, linalg, pages, predicates, trials);
criterion_main!(benches);

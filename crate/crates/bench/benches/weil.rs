use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use weilrep::coeff::CoeffRing;
use weilrep::metaplectic::r0_word;
use weilrep::rational::q;
use weilrep::schwartz::{random_schwartz, HaarContext};
use weilrep::symplectic::{random_omega, QuadForm};
use weilrep::weilfactor::weil_factor;
use weilrep::weilops::scalar_ratio;

fn ctx(p: u64) -> HaarContext {
    HaarContext::new(CoeffRing::cyclotomic(p).unwrap(), 0)
}

fn fourier(c: &mut Criterion) {
    for (p, n) in [(3u64, 1usize), (3, 2), (5, 2)] {
        let cx = ctx(p);
        let phi = random_schwartz(&mut ChaCha8Rng::seed_from_u64(1), &cx, n).unwrap();
        c.bench_function(&format!("fourier p={p} n={n} ({} cosets)", phi.table_len()), |b| {
            b.iter(|| black_box(&phi).fourier(&cx).unwrap())
        });
    }
}

fn gamma(c: &mut Criterion) {
    for p in [3u64, 7] {
        let cx = ctx(p);
        let pi = p as i64;
        let f = QuadForm::diagonal(&[q(1), q(-2), q(-pi), q(2 * pi)]);
        c.bench_function(&format!("weil_factor rank 4 p={p}"), |b| b.iter(|| weil_factor(black_box(&f), &cx, 6).unwrap()));
    }
}

fn ratio(c: &mut Criterion) {
    let cx = ctx(3);
    let mut r = ChaCha8Rng::seed_from_u64(2);
    let (s, s2) = loop {
        let (s, s2) = (random_omega(&mut r, 1, 3, 2), random_omega(&mut r, 1, 3, 2));
        if s.mul(&s2).in_omega() {
            break (s, s2);
        }
    };
    let lhs = r0_word(&s).unwrap().then_apply(&r0_word(&s2).unwrap());
    let rhs = r0_word(&s.mul(&s2)).unwrap();
    c.bench_function("scalar_ratio cocycle words p=3 n=1", |b| b.iter(|| scalar_ratio(&lhs, &rhs, 1, &cx, 1).unwrap()));
}

criterion_group!(benches, fourier, gamma, ratio);
criterion_main!(benches);

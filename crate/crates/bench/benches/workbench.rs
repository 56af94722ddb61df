use criterion::{black_box, criterion_group, criterion_main, Criterion};

use supq::identities::check_sov;
use supq::qchar::{eval_qchar, kr_qchar, Variant};
use supq::spinchain::{baxter_analysis, random_points, transfer, ChainConfig};
use supq::tableaux::{enumerate, Sign};
use supq::{Monomial, Rank, WeightLatticeVector};

fn combinatorics(c: &mut Criterion) {
    let rk = Rank::new(3, 2).unwrap();
    let lam = WeightLatticeVector::new(vec![3, 2, 1, 1, 0]);
    c.bench_function("enumerate gl(3|2) 7 cells", |b| b.iter(|| enumerate(rk, black_box(&lam), Sign::Minus).unwrap()));
    let a = Monomial::gen("a");
    c.bench_function("eval_qchar gl(3|2) 7 cells", |b| {
        b.iter(|| eval_qchar(rk, Variant::Plus, black_box(&lam), &a).unwrap())
    });
    let rk22 = Rank::new(2, 2).unwrap();
    c.bench_function("kr_qchar gl(2|2) W(1,3)", |b| b.iter(|| kr_qchar(rk22, 1, black_box(3), &a).unwrap()));
    c.bench_function("separation of variables gl(2|2) i=3", |b| b.iter(|| check_sov(rk22, black_box(3)).unwrap()));
}

fn chain(c: &mut Criterion) {
    let u = random_points(1, 5)[0];
    for ell in [3, 4] {
        let cfg = ChainConfig::generic(2, 2, ell, 42).unwrap();
        c.bench_function(&format!("transfer gl(2|2) ell={ell}"), |b| {
            b.iter(|| transfer(&cfg, black_box(u), cfg.q).unwrap())
        });
    }
    let cfg = ChainConfig::generic(1, 1, 3, 42).unwrap();
    c.bench_function("baxter analysis gl(1|1) ell=3", |b| b.iter(|| baxter_analysis(&cfg, black_box(11)).unwrap()));
}

criterion_group!(benches, combinatorics, chain);
criterion_main!(benches);

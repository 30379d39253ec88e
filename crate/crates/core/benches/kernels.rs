use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use gowers::analysis::{gowers_norm, random_phase};
use gowers::mforms::{MultiaffineForm, MultilinearForm};
use gowers::par::Exec;
use gowers::pipeline::triaffine_correlation;
use gowers::rank::analytic_rank;
use gowers::Prime;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn norms(c: &mut Criterion) {
    let mut group = c.benchmark_group("gowers_norm");
    group.sample_size(10);
    for (p, n, d) in [(2u64, 6usize, 4usize), (3, 3, 4), (2, 10, 3)] {
        let f = random_phase(Prime::new(p).unwrap(), n, 2, 7);
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, format!("p{p}n{n}U{d}")), &f, |b, f| {
                b.iter(|| gowers_norm(f, d, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn correlations(c: &mut Criterion) {
    let mut group = c.benchmark_group("triaffine_correlation");
    group.sample_size(10);
    let p = Prime::TWO;
    let f = random_phase(p, 5, 3, 11);
    let t = MultilinearForm::from_fn(p, 5, 3, |i| (i.iter().sum::<usize>() % 2) as u8).unwrap();
    let psi = MultiaffineForm::from_multilinear(&t);
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| triaffine_correlation(&f, &psi, exec).unwrap()));
    }
    group.finish();
}

fn ranks(c: &mut Criterion) {
    let mut group = c.benchmark_group("analytic_rank");
    group.sample_size(10);
    let p = Prime::new(3).unwrap();
    let t = MultilinearForm::from_fn(p, 4, 3, |i| (i[0] * i[1] + i[2]) as u8 % 3).unwrap();
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| analytic_rank(&t, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, norms, correlations, ranks);
criterion_main!(benches);

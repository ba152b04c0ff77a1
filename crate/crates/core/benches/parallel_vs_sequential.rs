use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use pme_lab::green_semigroup::duhamel_solve;
use pme_lab::par;
use pme_lab::pme_solvers::energy::random_compact_source;
use pme_lab::{HalfSpaceGrid, SampledField, SigmaParam};

fn duhamel(c: &mut Criterion) {
    let sigma = SigmaParam::new(0.0).unwrap();
    let mut group = c.benchmark_group("duhamel_solve");
    group.sample_size(10);
    for (dim, nv, y_max, nt, ns, horizon) in [(1, 24, 16.0, 1, 16, 1.0), (2, 16, 8.0, 8, 12, 0.5)] {
        let grid = HalfSpaceGrid::new(dim, nv, y_max, nt, 8.0, ns, horizon).unwrap();
        let f = random_compact_source(&grid, 1);
        let u0 = SampledField::zeros(&grid);
        group.bench_with_input(BenchmarkId::new("parallel", dim), &dim, |b, _| {
            b.iter(|| duhamel_solve(&u0, &f, sigma).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", dim), &dim, |b, _| {
            b.iter(|| par::with_sequential(|| duhamel_solve(&u0, &f, sigma).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, duhamel);
criterion_main!(benches);

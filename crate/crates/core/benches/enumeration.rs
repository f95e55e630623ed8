use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use quadrifold::exec::Exec;
use quadrifold::fibration::FibrationSpec;
use quadrifold::gfpoly::{BinaryForm, Field};
use quadrifold::sections::{enumerate_sections, SearchOptions, Strategy};

fn worked() -> FibrationSpec {
    let f = Field::prime(3).unwrap();
    let diag = [[1, 0], [0, 1], [1, 1], [1, -1]].map(|c| BinaryForm::from_i64s(&f, &c));
    FibrationSpec::diagonal(&f, [0; 4], 1, diag).unwrap()
}

fn enumeration(c: &mut Criterion) {
    let fib = worked();
    let mut group = c.benchmark_group("sections_h3");
    group.sample_size(10);
    for strategy in [Strategy::Direct, Strategy::Interpolation] {
        for exec in [Exec::Sequential, Exec::Parallel] {
            let opts = SearchOptions { strategy, exec, ..Default::default() };
            group.bench_with_input(BenchmarkId::new(format!("{strategy:?}"), format!("{exec:?}")), &opts, |b, opts| {
                b.iter(|| enumerate_sections(black_box(&fib), 3, opts).unwrap().sections.len())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, enumeration);
criterion_main!(benches);

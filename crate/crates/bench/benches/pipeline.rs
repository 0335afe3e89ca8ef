use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use paretotopo::diagram::{bottleneck_distance, confidence_band, BandParams};
use paretotopo::persistence::{explicit_rips_persistence, rips_persistence};
use paretotopo::problems::ProblemKind;
use paretotopo::rips::{build_rips, count_rips_simplices};
use paretotopo::simplicity::{test_s2, S2Options};
use paretotopo_bench::fixture;

const DELTA_MAX: f64 = 1.0;

fn persistence(c: &mut Criterion) {
    let mut group = c.benchmark_group("rips_persistence");
    group.sample_size(10);
    for n in [50, 100, 200] {
        let (_, dm) = fixture(ProblemKind::Med, n, 0);
        for maxdim in [1, 2] {
            group.bench_with_input(BenchmarkId::new(format!("med_maxdim{maxdim}"), n), &dm, |b, dm| {
                b.iter(|| rips_persistence(dm, maxdim, Some(DELTA_MAX)).unwrap())
            });
        }
    }
    // the boundary-matrix path materializes every simplex; keep it small
    let (_, dm) = fixture(ProblemKind::Med, 40, 0);
    group.bench_function("explicit_med_40_maxdim1", |b| {
        b.iter(|| explicit_rips_persistence(&dm, 1, Some(DELTA_MAX)).unwrap())
    });
    group.finish();
}

fn complex(c: &mut Criterion) {
    let mut group = c.benchmark_group("rips_complex");
    group.sample_size(10);
    let (_, dm) = fixture(ProblemKind::Med, 200, 0);
    group.bench_function("count_med_200_maxdim2", |b| b.iter(|| count_rips_simplices(&dm, DELTA_MAX, 2)));
    group.bench_function("build_med_200_maxdim1", |b| b.iter(|| build_rips(&dm, 0.5, 1).unwrap()));
    group.finish();
}

fn band(c: &mut Criterion) {
    let mut group = c.benchmark_group("band");
    group.sample_size(10);
    let (_, dm) = fixture(ProblemKind::Dtlz7, 300, 0);
    let params = BandParams { delta_max: Some(DELTA_MAX), ..Default::default() };
    group.bench_function("hausdorff_dtlz7_300", |b| b.iter(|| confidence_band(&dm, &params).unwrap()));
    let (_, a) = fixture(ProblemKind::Dtlz7, 150, 1);
    let (_, bb) = fixture(ProblemKind::Dtlz7, 150, 2);
    let (da, db) = (rips_persistence(&a, 1, Some(DELTA_MAX)).unwrap(), rips_persistence(&bb, 1, Some(DELTA_MAX)).unwrap());
    group.bench_function("bottleneck_h0_dtlz7_150", |b| b.iter(|| bottleneck_distance(&da, &db, 0)));
    group.finish();
}

fn s2(c: &mut Criterion) {
    let mut group = c.benchmark_group("s2");
    group.sample_size(10);
    for kind in [ProblemKind::Med, ProblemKind::Dtlz5] {
        let (pc, dm) = fixture(kind, 150, 0);
        let k = build_rips(&dm, 0.5, 1).unwrap();
        let f = pc.objectives().unwrap().clone();
        let opts = S2Options { max_witnesses: 0, ..Default::default() };
        group.bench_function(format!("edges_{}_150", kind.name()), |b| b.iter(|| test_s2(&k, &f, &opts).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, persistence, complex, band, s2);
criterion_main!(benches);

//! Benchmarks for the pricing engine: the winner-determination oracle
//! against an exhaustive enumerator, each mechanism across page sizes, and
//! the two data-parallel hot spots pinned to one thread versus the default
//! pool. Run with `cargo bench`, or `cargo bench --no-default-features` to
//! measure the sequential build.

#[path = "../tests/support/mod.rs"]
#[allow(dead_code)]
mod support;

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use corefill::{
    compare, gsp_greedy, gsp_optimal, vcg, vcg_pursuit, water_fill, CorePolytope,
    DirectionPolicy, Epsilon, GeneratorConfig, Instance, Mechanism, Money, SlateFamily,
    SlateInstance, SlateOracle, Span, UtilityVector, WinnerOracle,
};

fn slate_config(lines: u32, advertisers: Span, ads: Span, instances: u32) -> GeneratorConfig {
    GeneratorConfig::Slate(SlateFamily {
        instances,
        advertisers,
        ads_per_advertiser: ads,
        lines_per_ad: Span::new(1, 6),
        bid_cents: Span::new(10, 500),
        pclick_percent: Span::new(5, 95),
        h: 4,
        m: lines,
    })
}

fn slate_of(lines: u32, advertisers: Span, ads: Span, seed: u64) -> SlateInstance {
    match slate_config(lines, advertisers, ads, 1).generate_one(seed, 0).unwrap() {
        Instance::Slate(slate) => slate,
        Instance::Xor(_) => unreachable!("slate config produced a bundle auction"),
    }
}

/// Mid-range truncation, the regime the water-filling loop queries most.
fn half_truncation<O: WinnerOracle + ?Sized>(oracle: &O) -> UtilityVector {
    let n = oracle.bidder_ids().len() as u64;
    let share = oracle.total_welfare().micros() / (2 * n.max(1));
    UtilityVector::from_pairs(
        oracle.bidder_ids().iter().map(|&id| (id, Money::from_micros(share))),
    )
}

fn bench_oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");
    for lines in [10u32, 20, 35] {
        let slate = slate_of(lines, Span::new(5, 9), Span::new(2, 3), 41);
        let oracle = Instance::Slate(slate).build_oracle().unwrap();
        let truncation = half_truncation(&oracle);
        group.bench_function(BenchmarkId::new("dp", lines), |b| {
            b.iter(|| oracle.solve(black_box(&truncation)).unwrap().max_welfare)
        });
    }

    // Enumeration only stays feasible on a handful of ads, so the
    // head-to-head runs on a small slate.
    let slate = slate_of(10, Span::new(4, 5), Span::new(1, 2), 43);
    let oracle = Instance::Slate(slate.clone()).build_oracle().unwrap();
    let truncation = half_truncation(&oracle);
    group.bench_function(BenchmarkId::new("dp", "small"), |b| {
        b.iter(|| oracle.solve(black_box(&truncation)).unwrap().max_welfare)
    });
    group.bench_function(BenchmarkId::new("exhaustive", "small"), |b| {
        b.iter(|| support::exhaustive_truncated_slate(black_box(&slate), black_box(&truncation)))
    });
    group.finish();
}

fn bench_mechanisms(c: &mut Criterion) {
    let mut group = c.benchmark_group("mechanisms");
    let epsilon = Money::from_micros(1_000);
    for lines in [10u32, 20, 35] {
        let slate = slate_of(lines, Span::new(5, 9), Span::new(2, 3), 47);
        let slate_oracle = SlateOracle::new(slate.clone()).unwrap();
        let oracle = Instance::Slate(slate).build_oracle().unwrap();
        group.bench_function(BenchmarkId::new("water-fill", lines), |b| {
            b.iter(|| water_fill(&oracle, &DirectionPolicy::Uniform, epsilon).unwrap().utilities)
        });
        group.bench_function(BenchmarkId::new("vcg-pursuit", lines), |b| {
            b.iter(|| vcg_pursuit(&oracle, epsilon).unwrap().run.utilities)
        });
        group.bench_function(BenchmarkId::new("vcg", lines), |b| {
            b.iter(|| vcg(&oracle).unwrap().revenue)
        });
        group.bench_function(BenchmarkId::new("gsp-opt", lines), |b| {
            b.iter(|| gsp_optimal(&slate_oracle).unwrap().revenue)
        });
        group.bench_function(BenchmarkId::new("gsp-greedy", lines), |b| {
            b.iter(|| gsp_greedy(&slate_oracle).unwrap().revenue)
        });
    }
    group.finish();
}

fn pool_of(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()
}

/// The two rayon call sites, one thread against the default pool. Without
/// the `parallel` feature the library iterates sequentially whatever pool
/// is installed, so only the single-thread variant runs.
fn bench_parallel(c: &mut Criterion) {
    let slate = slate_of(12, Span::new(8, 8), Span::new(2, 3), 53);

    let mut group = c.benchmark_group("polytope");
    group.sample_size(20);
    let n = slate.advertisers().len();
    group.bench_function(BenchmarkId::new("one-thread", n), |b| {
        let pool = pool_of(1);
        b.iter(|| pool.install(|| CorePolytope::from_slate(black_box(&slate)).unwrap()))
    });
    if cfg!(feature = "parallel") {
        group.bench_function(BenchmarkId::new("default-pool", n), |b| {
            b.iter(|| CorePolytope::from_slate(black_box(&slate)).unwrap())
        });
    }
    group.finish();

    let ensemble: Vec<(String, Instance)> = slate_config(15, Span::new(5, 9), Span::new(2, 3), 12)
        .generate(59)
        .unwrap()
        .into_iter()
        .enumerate()
        .map(|(k, inst)| (format!("bench-{k:02}"), inst))
        .collect();
    let epsilon = Epsilon::Micro(Money::from_micros(1_000));

    let mut group = c.benchmark_group("compare");
    group.sample_size(10);
    let count = ensemble.len();
    group.bench_function(BenchmarkId::new("one-thread", count), |b| {
        let pool = pool_of(1);
        b.iter(|| pool.install(|| compare(black_box(&ensemble), &Mechanism::ALL, &epsilon).rows))
    });
    if cfg!(feature = "parallel") {
        group.bench_function(BenchmarkId::new("default-pool", count), |b| {
            b.iter(|| compare(black_box(&ensemble), &Mechanism::ALL, &epsilon).rows)
        });
    }
    group.finish();
}

criterion_group!(benches, bench_oracle, bench_mechanisms, bench_parallel);
criterion_main!(benches);

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use leanaug::engine::{enumerate_closure, Engine, EngineConfig, DEFAULT_CLOSURE_LIMIT};
use leanaug::lean::{equivalence_class_hash, parse_statement, structural_hash};
use leanaug::rewrite::RuleRegistry;
use leanaug_bench::{corpus, parsed_corpus, seed};

fn parse(c: &mut Criterion) {
    let texts = corpus();
    c.bench_function("parse_corpus", |b| {
        b.iter(|| {
            for t in &texts {
                black_box(parse_statement(t).unwrap());
            }
        })
    });
    let stmts = parsed_corpus();
    c.bench_function("print_corpus", |b| {
        b.iter(|| {
            for s in &stmts {
                black_box(s.to_string());
            }
        })
    });
}

fn hash(c: &mut Criterion) {
    let stmts = parsed_corpus();
    c.bench_function("structural_hash_corpus", |b| {
        b.iter(|| {
            for s in &stmts {
                black_box(structural_hash(s));
            }
        })
    });
    c.bench_function("equivalence_class_hash_corpus", |b| {
        b.iter(|| {
            for s in &stmts {
                black_box(equivalence_class_hash(s));
            }
        })
    });
}

fn evolve(c: &mut Criterion) {
    let engine = Engine::default();
    let stmts = parsed_corpus();
    let mut group = c.benchmark_group("evolve_corpus");
    for p in [0.2, 0.5, 1.0] {
        let cfg = EngineConfig {
            probability: p,
            rng_seed: 7,
            ..EngineConfig::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(p), &cfg, |b, cfg| {
            b.iter(|| {
                for (i, s) in stmts.iter().enumerate() {
                    black_box(engine.evolve(&i.to_string(), s, cfg).unwrap());
                }
            })
        });
    }
    group.finish();
}

fn closure(c: &mut Criterion) {
    let s = seed();
    let rules = RuleRegistry::builtin().all();
    let mut group = c.benchmark_group("closure_seed");
    group.sample_size(10);
    for depth in [2, 4, 6] {
        group.bench_with_input(BenchmarkId::from_parameter(depth), &depth, |b, &d| {
            b.iter(|| black_box(enumerate_closure(&s, &rules, d, DEFAULT_CLOSURE_LIMIT).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, parse, hash, evolve, closure);
criterion_main!(benches);

//! Parallel vs sequential throughput on the data-parallel inner loops:
//! batch matching, batch correction, and batch scoring.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use gec_templates::batch;
use gec_templates::lm::NgramModel;
use gec_templates::matcher::CompiledTemplateSet;
use gec_templates::template::{CorrectiveAction, Template};

fn fixture_set(n_templates: usize) -> CompiledTemplateSet {
    let templates: Vec<Template> = (0..n_templates)
        .map(|i| {
            let mut t = Template::new(
                format!("t{i:04}"),
                format!("甲{}", char::from_u32('一' as u32 + (i % 400) as u32).unwrap()),
                format!("乙{}", char::from_u32('一' as u32 + (i % 397) as u32).unwrap()),
            );
            t.action = Some(CorrectiveAction::Right);
            t
        })
        .collect();
    CompiledTemplateSet::compile(templates).unwrap()
}

fn fixture_sentences(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            let filler = char::from_u32('一' as u32 + (i % 400) as u32).unwrap();
            format!("句{i}甲{filler}之间有些字乙{filler}然后结束。")
        })
        .collect()
}

fn bench_matching(c: &mut Criterion) {
    let set = fixture_set(500);
    let sentences = fixture_sentences(2000);
    let mut group = c.benchmark_group("find_matches_all");
    group.bench_with_input(BenchmarkId::new("parallel", 2000), &sentences, |b, s| {
        b.iter(|| batch::find_matches_all(&set, s))
    });
    group.bench_with_input(BenchmarkId::new("sequential", 2000), &sentences, |b, s| {
        b.iter(|| batch::find_matches_all_seq(&set, s))
    });
    group.finish();
}

fn bench_correction(c: &mut Criterion) {
    let set = fixture_set(500);
    let sentences = fixture_sentences(2000);
    let mut group = c.benchmark_group("correct_all");
    group.bench_with_input(BenchmarkId::new("parallel", 2000), &sentences, |b, s| {
        b.iter(|| batch::correct_all(&set, s, 0, None).unwrap())
    });
    group.bench_with_input(BenchmarkId::new("sequential", 2000), &sentences, |b, s| {
        b.iter(|| batch::correct_all_seq(&set, s, 0, None).unwrap())
    });
    group.finish();
}

fn bench_scoring(c: &mut Criterion) {
    let corpus = fixture_sentences(500);
    let model = NgramModel::train(corpus.clone(), 3, 0.01).unwrap();
    let sentences = fixture_sentences(2000);
    let mut group = c.benchmark_group("score_all");
    group.bench_with_input(BenchmarkId::new("parallel", 2000), &sentences, |b, s| {
        b.iter(|| batch::score_all(&model, s).unwrap())
    });
    group.bench_with_input(BenchmarkId::new("sequential", 2000), &sentences, |b, s| {
        b.iter(|| batch::score_all_seq(&model, s).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_matching, bench_correction, bench_scoring);
criterion_main!(benches);

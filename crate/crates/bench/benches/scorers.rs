use std::collections::BTreeMap;
use std::hint::black_box;
use std::path::Path;

use criterion::{criterion_group, criterion_main, Criterion};
use triplescore::config::RunConfig;
use triplescore::corpus;
use triplescore::ensemble::{combine, ScoreVector};
use triplescore::features::candidate_pools;
use triplescore::mapping::{map_person, MappingStrategy};
use triplescore::path_ranking::{extract_paths, fit_forest, MaxFeatures, PathOptions, TreeParams};
use triplescore::pipeline::run;
use triplescore::text::Stoplist;
use triplescore::text_scorers::{build_counting_model, build_mle_model, MleConfig};
use triplescore::{EntityId, RawScore, ScorerKind};
use triplescore_bench::fixture;

fn ingest(c: &mut Criterion) {
    let f = fixture(600);
    let stop = Stoplist::english();
    c.bench_function("parse_sentences/600", |b| {
        b.iter(|| corpus::parse_sentences(black_box(&f.world.sentences), Path::new("s"), &stop, None).unwrap())
    });
}

fn text_scorers(c: &mut Criterion) {
    let f = fixture(600);
    let pools = candidate_pools(&f.kb);
    c.bench_function("counting/build", |b| {
        b.iter(|| build_counting_model(&pools, &f.index.texts, 100_000))
    });
    let cfg = MleConfig::default();
    let mle = build_mle_model(&pools, &f.index.texts, &cfg, 1);
    let person = &f.world.persons[0];
    let types: Vec<_> = person.professions.iter().map(|(t, _)| t.clone()).collect();
    let text = f.index.texts.get(&person.id);
    c.bench_function("mle/score_person", |b| b.iter(|| mle.score_person(black_box(text), &types)));
}

fn path_ranking(c: &mut Criterion) {
    let f = fixture(600);
    let person = EntityId::from(&f.world.persons[0].id);
    let ty = EntityId::from(&f.world.persons[0].professions[0].0);
    c.bench_function("extract_paths/len3", |b| {
        b.iter(|| extract_paths(&f.graph, black_box(&person), &ty, PathOptions::default()))
    });
    let x: Vec<Vec<f64>> = (0..400).map(|i| (0..12).map(|j| ((i * 7 + j * 13) % 5) as f64).collect()).collect();
    let y: Vec<bool> = (0..400).map(|i| (i * 7) % 5 >= 2).collect();
    let params = TreeParams {
        min_samples_split: 2,
        max_features: MaxFeatures::Sqrt,
    };
    c.bench_function("forest/fit_50_trees", |b| b.iter(|| fit_forest(&x, &y, params, 50, 3).unwrap()));
}

fn mapping_and_ensemble(c: &mut Criterion) {
    let raws: Vec<RawScore> = (0..5).map(|i| RawScore::WeightedSum(i as f64 * 0.3)).collect();
    c.bench_function("map_person/maplog", |b| {
        b.iter(|| map_person(MappingStrategy::Maplog, black_box(&raws)).unwrap())
    });
    let weights: BTreeMap<ScorerKind, f64> = ScorerKind::ALL.iter().map(|&k| (k, 0.7)).collect();
    let v: ScoreVector = ScorerKind::ALL
        .iter()
        .enumerate()
        .map(|(i, &k)| (k, (i != 2).then_some(i as u8 + 2)))
        .collect();
    c.bench_function("combine/4", |b| b.iter(|| combine(black_box(&v), &weights).unwrap()));
}

fn pipeline(c: &mut Criterion) {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture(200);
    let files = f.world.write(dir.path()).unwrap();
    let mut cfg = RunConfig::for_world(&files);
    cfg.path_ranking.n_trees = 30;
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);
    group.bench_function("world_200", |b| b.iter(|| run(&cfg, 0).unwrap()));
    group.finish();
}

criterion_group!(benches, ingest, text_scorers, path_ranking, mapping_and_ensemble, pipeline);
criterion_main!(benches);

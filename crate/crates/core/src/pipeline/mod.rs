//! End-to-end runs: load inputs, train the enabled scorers, score the
//! requested triples, map, combine, refine, evaluate, and write outputs
//! with a manifest.

pub mod scores;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use scores::{load_queries, load_scored, parse_queries, parse_scored, write_scored, ScoredTriple, ABSTAIN};

use crate::config::RunConfig;
use crate::corpus::{self, GoldTriple, KbAssertion, SentenceIndex};
use crate::ensemble::{combine, derive_weights, ScoreVector};
use crate::error::{Error, Result};
use crate::eval::{evaluate, MetricsReport};
use crate::features::{candidate_pools, sample_examples};
use crate::ids::{PersonId, RelationId, TargetRelation, TypeId};
use crate::mapping::{map_person, MappingTable};
use crate::model_io::{sha256_hex, ModelFile, TrainedModel};
use crate::path_ranking::{build_graph, filter_relations, train_path_ranking, KbGraph};
use crate::score::{RawScore, ScorerKind};
use crate::seed;
use crate::text::Stoplist;
use crate::text_scorers::{build_counting_model, build_mle_model, train_word_classification};
use crate::trigger::lexicon::{
    base_terms, build_lexicon, builtin_nationality_manual, builtin_nationality_names, builtin_profession_hyponyms,
    builtin_profession_synonyms, load_term_map, TermMap,
};
use crate::trigger::{detect_words, refine, split_first_sentence, twd_alone, Abbreviations, TriggerLexicon, Words};

/// Inputs shared by both relations.
#[derive(Debug)]
pub struct SharedInputs {
    pub index: SentenceIndex,
    pub descriptions: Option<BTreeMap<PersonId, String>>,
    pub graph: Option<KbGraph>,
    /// sha256 of every input file read, by path.
    pub hashes: BTreeMap<String, String>,
}

/// Inputs of one target relation.
#[derive(Debug)]
pub struct RelationData {
    pub relation: TargetRelation,
    pub kb: Vec<KbAssertion>,
    pub kb_types: BTreeMap<PersonId, BTreeSet<TypeId>>,
    pub queries: Vec<(PersonId, TypeId)>,
    pub dev: Option<Vec<GoldTriple>>,
    pub gold: Option<Vec<GoldTriple>>,
}

fn read_hashed(path: &Path, hashes: &mut BTreeMap<String, String>) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    hashes.insert(path.display().to_string(), sha256_hex(&bytes));
    String::from_utf8(bytes).map_err(|_| Error::parse(path, 0, "file is not valid UTF-8"))
}

pub fn load_shared(cfg: &RunConfig, need_graph: bool, need_descriptions: bool) -> Result<SharedInputs> {
    let mut hashes = BTreeMap::new();
    let stoplist = match &cfg.features.stopwords {
        Some(p) => Stoplist::parse(&read_hashed(p, &mut hashes)?),
        None => Stoplist::english(),
    };
    let path = &cfg.input.sentences;
    let index = corpus::parse_sentences(&read_hashed(path, &mut hashes)?, path, &stoplist, None)?;
    let descriptions = match (&cfg.input.descriptions, need_descriptions) {
        (Some(p), true) => Some(corpus::parse_descriptions(&read_hashed(p, &mut hashes)?, p)?),
        _ => None,
    };
    let graph = match (&cfg.input.kg, need_graph) {
        (Some(p), true) => {
            let triples = corpus::parse_triples(&read_hashed(p, &mut hashes)?, p)?;
            let kept = filter_relations(triples, &cfg.path_ranking.blocked_prefixes);
            Some(build_graph(&kept))
        }
        (None, true) => return Err(Error::Config("the pathrank scorer needs input.kg".into())),
        _ => None,
    };
    log::info!(
        "loaded {} sentences for {} persons",
        index.corpus.sentences.len(),
        index.texts.len()
    );
    Ok(SharedInputs {
        index,
        descriptions,
        graph,
        hashes,
    })
}

pub fn load_relation(cfg: &RunConfig, relation: TargetRelation, hashes: &mut BTreeMap<String, String>) -> Result<RelationData> {
    let inputs = cfg
        .input
        .relation(relation)
        .ok_or_else(|| Error::Config(format!("[input.{relation}] is missing")))?;
    let kb = corpus::parse_kb(&read_hashed(&inputs.kb, hashes)?, &inputs.kb, relation)?;
    let queries = parse_queries(&read_hashed(&inputs.queries, hashes)?, &inputs.queries)?;
    let dev = match &inputs.dev {
        Some(p) => Some(corpus::parse_gold(&read_hashed(p, hashes)?, p)?),
        None => None,
    };
    let gold = match &inputs.gold {
        Some(p) => Some(corpus::parse_gold(&read_hashed(p, hashes)?, p)?),
        None => None,
    };
    Ok(RelationData {
        relation,
        kb_types: corpus::types_by_person(&kb),
        kb,
        queries,
        dev,
        gold,
    })
}

impl RelationData {
    /// Types to score per person: the person's KB types plus any requested.
    pub fn candidates<'a>(&self, wanted: impl IntoIterator<Item = &'a (PersonId, TypeId)>) -> BTreeMap<PersonId, Vec<TypeId>> {
        let mut out: BTreeMap<PersonId, BTreeSet<TypeId>> = BTreeMap::new();
        for (p, t) in wanted {
            let set = out
                .entry(p.clone())
                .or_insert_with(|| self.kb_types.get(p).cloned().unwrap_or_default());
            set.insert(t.clone());
        }
        out.into_iter().map(|(p, s)| (p, s.into_iter().collect())).collect()
    }

    /// Query triples plus dev triples.
    pub fn wanted(&self) -> Vec<(PersonId, TypeId)> {
        let mut w = self.queries.clone();
        if let Some(dev) = &self.dev {
            w.extend(dev.iter().map(|g| (g.person.clone(), g.type_id.clone())));
        }
        w
    }
}

pub fn relation_seed(cfg: &RunConfig, relation: TargetRelation) -> u64 {
    seed::derive(cfg.seed, relation.name())
}

pub fn train_scorer(kind: ScorerKind, cfg: &RunConfig, shared: &SharedInputs, data: &RelationData) -> Result<TrainedModel> {
    let rel_seed = relation_seed(cfg, data.relation);
    let texts = &shared.index.texts;
    let pools = candidate_pools(&data.kb);
    let model = match kind {
        ScorerKind::WordClassification => {
            let examples = sample_examples(
                &pools,
                &shared.index.popularity,
                cfg.features.bucket_cap,
                seed::derive(rel_seed, "sampling"),
            );
            TrainedModel::WordClassification(train_word_classification(
                &examples,
                texts,
                &cfg.word_classification.to_config(),
                seed::derive(rel_seed, kind.name()),
            ))
        }
        ScorerKind::WordCounting => TrainedModel::WordCounting(build_counting_model(&pools, texts, cfg.word_counting.vocab_cap)),
        ScorerKind::WordMle => TrainedModel::WordMle(build_mle_model(
            &pools,
            texts,
            &cfg.word_mle.to_config(data.relation),
            seed::derive(rel_seed, kind.name()),
        )),
        ScorerKind::PathRanking => {
            let graph = shared
                .graph
                .as_ref()
                .ok_or_else(|| Error::Config("the pathrank scorer needs input.kg".into()))?;
            TrainedModel::PathRanking(train_path_ranking(
                graph,
                &data.kb,
                data.relation,
                &RelationId::new(&cfg.path_ranking.type_relation(data.relation)),
                &cfg.path_ranking.to_config(),
                seed::derive(rel_seed, kind.name()),
            )?)
        }
    };
    Ok(model)
}

/// Raw and mapped scores for every candidate type of every person. The
/// mapping's maximum is taken per person over that person's candidates.
pub fn score_candidates(
    model: &TrainedModel,
    relation: TargetRelation,
    candidates: &BTreeMap<PersonId, Vec<TypeId>>,
    shared: &SharedInputs,
    data: &RelationData,
    table: &MappingTable,
) -> Result<Vec<ScoredTriple>> {
    let kind = model.kind();
    let strategy = table.get(kind, relation);
    if let TrainedModel::PathRanking(_) = model {
        if shared.graph.is_none() {
            return Err(Error::Config("the pathrank scorer needs input.kg".into()));
        }
    }
    let per_person: Vec<Result<Vec<ScoredTriple>>> = candidates
        .par_iter()
        .map(|(person, types)| {
            let text = shared.index.texts.get(person);
            let raws: Vec<RawScore> = match model {
                TrainedModel::WordClassification(m) => types.iter().map(|t| m.score(t, text)).collect(),
                TrainedModel::WordCounting(m) => types.iter().map(|t| m.score(t, text)).collect(),
                TrainedModel::WordMle(m) => m.score_person(text, types),
                TrainedModel::PathRanking(m) => {
                    let graph = shared.graph.as_ref().expect("checked above");
                    let n_kb = data.kb_types.get(person).map_or(0, BTreeSet::len);
                    types.iter().map(|t| m.score(graph, person, t, n_kb)).collect()
                }
            };
            let mapped = map_person(strategy, &raws)?;
            Ok(types
                .iter()
                .zip(raws)
                .zip(mapped)
                .map(|((t, raw), mapped)| ScoredTriple {
                    person: person.clone(),
                    type_id: t.clone(),
                    scorer: kind,
                    raw,
                    mapped,
                })
                .collect())
        })
        .collect();
    let mut out = Vec::new();
    for r in per_person {
        out.extend(r?);
    }
    Ok(out)
}

type MappedLookup = BTreeMap<ScorerKind, BTreeMap<(PersonId, TypeId), Option<u8>>>;

fn lookup(scored: &BTreeMap<ScorerKind, Vec<ScoredTriple>>) -> MappedLookup {
    scored
        .iter()
        .map(|(&k, v)| (k, v.iter().map(|s| ((s.person.clone(), s.type_id.clone()), s.mapped)).collect()))
        .collect()
}

/// Dev ACC per scorer; an abstention counts as a prediction of 0.
pub fn weights_from_dev(
    scored: &BTreeMap<ScorerKind, Vec<ScoredTriple>>,
    dev: &[GoldTriple],
    acc_threshold: u8,
) -> Result<BTreeMap<ScorerKind, f64>> {
    let table = lookup(scored);
    let pairs = table
        .iter()
        .map(|(&k, m)| {
            let v = dev
                .iter()
                .map(|g| {
                    let p = m.get(&(g.person.clone(), g.type_id.clone())).copied().flatten().unwrap_or(0);
                    (p, g.score)
                })
                .collect();
            (k, v)
        })
        .collect();
    derive_weights(&pairs, acc_threshold)
}

/// Explicit weights from the config, else dev-derived ones, else 1.0 for a
/// lone scorer. Returns the weights and where they came from.
pub fn choose_weights(
    cfg: &RunConfig,
    relation: TargetRelation,
    scored: &BTreeMap<ScorerKind, Vec<ScoredTriple>>,
    dev: Option<&[GoldTriple]>,
) -> Result<(BTreeMap<ScorerKind, f64>, String)> {
    match (&cfg.ensemble.weights, dev) {
        (Some(w), _) => {
            let w = w
                .for_relation(relation)
                .ok_or_else(|| Error::Config(format!("ensemble.weights has no entry for {relation}")))?;
            let w = scored
                .keys()
                .map(|k| w.get(k).map(|&v| (*k, v)))
                .collect::<Option<BTreeMap<_, _>>>();
            let w = w.ok_or_else(|| Error::Config(format!("ensemble.weights.{relation} lacks an enabled scorer")))?;
            Ok((w, "config".to_string()))
        }
        (None, Some(dev)) => Ok((
            weights_from_dev(scored, dev, cfg.eval.acc_threshold).map_err(|e| e.in_stage("weights"))?,
            "dev".to_string(),
        )),
        (None, None) if scored.len() == 1 => Ok((scored.keys().map(|&k| (k, 1.0)).collect(), "single".to_string())),
        (None, None) => Err(Error::Config(format!(
            "{relation}: set input.{relation}.dev or ensemble.weights to weight several scorers"
        ))),
    }
}

/// Ensemble score of each query triple. A scorer without a score for a
/// triple is treated as abstaining.
pub fn ensemble_scores(
    scored: &BTreeMap<ScorerKind, Vec<ScoredTriple>>,
    queries: &[(PersonId, TypeId)],
    weights: &BTreeMap<ScorerKind, f64>,
) -> Result<Vec<GoldTriple>> {
    let table = lookup(scored);
    queries
        .iter()
        .map(|(p, t)| {
            let key = (p.clone(), t.clone());
            let vector: ScoreVector = table.iter().map(|(&k, m)| (k, m.get(&key).copied().flatten())).collect();
            Ok(GoldTriple {
                person: p.clone(),
                type_id: t.clone(),
                score: combine(&vector, weights)?,
            })
        })
        .collect()
}

/// Mapped scores of one scorer for the query triples, abstentions as 0.
pub fn single_scorer_predictions(scored: &[ScoredTriple], queries: &[(PersonId, TypeId)]) -> Vec<GoldTriple> {
    let m: BTreeMap<(&PersonId, &TypeId), Option<u8>> = scored.iter().map(|s| ((&s.person, &s.type_id), s.mapped)).collect();
    queries
        .iter()
        .map(|(p, t)| GoldTriple {
            person: p.clone(),
            type_id: t.clone(),
            score: m.get(&(p, t)).copied().flatten().unwrap_or(0),
        })
        .collect()
}

/// Trigger lexicon, sentence splitter and descriptions for one relation.
pub struct Refiner<'a> {
    pub relation: TargetRelation,
    pub lexicon: TriggerLexicon,
    pub descriptions: &'a BTreeMap<PersonId, String>,
    abbreviations: Abbreviations,
}

fn term_map(path: &Option<PathBuf>, builtin: fn() -> TermMap) -> Result<TermMap> {
    match path {
        Some(p) => load_term_map(p),
        None => Ok(builtin()),
    }
}

impl<'a> Refiner<'a> {
    pub fn new<'t>(
        cfg: &RunConfig,
        relation: TargetRelation,
        types: impl IntoIterator<Item = &'t TypeId>,
        descriptions: &'a BTreeMap<PersonId, String>,
    ) -> Result<Self> {
        let t = &cfg.trigger;
        let types: BTreeSet<&TypeId> = types.into_iter().collect();
        let mut lexicon = match t.lexicons.get(&relation) {
            Some(p) => TriggerLexicon::from_term_map(&load_term_map(p)?),
            None => match relation {
                TargetRelation::Profession => build_lexicon(
                    &base_terms(types.iter().copied(), &TermMap::new()),
                    &term_map(&t.profession_synonyms, builtin_profession_synonyms)?,
                    &term_map(&t.profession_hyponyms, builtin_profession_hyponyms)?,
                    &TermMap::new(),
                    true,
                )?,
                TargetRelation::Nationality => build_lexicon(
                    &base_terms(types.iter().copied(), &term_map(&t.nationality_names, builtin_nationality_names)?),
                    &TermMap::new(),
                    &TermMap::new(),
                    &term_map(&t.nationality_manual, builtin_nationality_manual)?,
                    false,
                )?,
            },
        };
        // Types missing from a supplied lexicon never trigger.
        for ty in types {
            lexicon.types.entry(ty.clone()).or_default();
        }
        let abbreviations = match &t.abbreviations {
            Some(p) => Abbreviations::parse(&std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?),
            None => Abbreviations::english(),
        };
        Ok(Refiner {
            relation,
            lexicon,
            descriptions,
            abbreviations,
        })
    }

    /// (in first sentence, in description) per type, or `None` when the
    /// person has no description.
    pub fn flags(&self, person: &PersonId, types: &[&TypeId]) -> Result<Option<Vec<(bool, bool)>>> {
        let Some(desc) = self.descriptions.get(person) else {
            return Ok(None);
        };
        let (first, _) = split_first_sentence(desc, &self.abbreviations);
        let (first_words, all_words) = (Words::new(first), Words::new(desc));
        types
            .iter()
            .map(|t| {
                let in_first = detect_words(&self.lexicon, t, &first_words)?;
                let in_desc = in_first || detect_words(&self.lexicon, t, &all_words)?;
                Ok((in_first, in_desc))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    /// Applies the refinement rules. Persons without a description keep
    /// their scores.
    pub fn refine_all(&self, preds: &[GoldTriple]) -> Result<Vec<GoldTriple>> {
        preds
            .iter()
            .map(|g| {
                let score = match self.flags(&g.person, &[&g.type_id])? {
                    Some(f) => refine(g.score, self.relation, f[0].0, f[0].1)?,
                    None => g.score,
                };
                Ok(GoldTriple { score, ..g.clone() })
            })
            .collect()
    }

    /// Trigger-only baseline; persons without a description get the
    /// no-trigger score.
    pub fn twd_alone_all(&self, queries: &[(PersonId, TypeId)], seed: u64) -> Result<Vec<GoldTriple>> {
        queries
            .iter()
            .map(|(p, t)| {
                let (first, desc) = self.flags(p, &[t])?.map_or((false, false), |f| f[0]);
                let coin = seed::derive(seed, &format!("{p}\t{t}"));
                Ok(GoldTriple {
                    person: p.clone(),
                    type_id: t.clone(),
                    score: twd_alone(self.relation, first, desc, coin)?,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationMetrics {
    pub ensemble: MetricsReport,
    pub ensemble_unrefined: MetricsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub twd_alone: Option<MetricsReport>,
    pub scorers: BTreeMap<ScorerKind, MetricsReport>,
}

#[derive(Debug, Clone)]
pub struct RelationRun {
    pub relation: TargetRelation,
    pub models: BTreeMap<ScorerKind, ModelFile>,
    pub model_hashes: BTreeMap<ScorerKind, String>,
    pub weights: BTreeMap<ScorerKind, f64>,
    pub weight_source: String,
    pub scored: BTreeMap<ScorerKind, Vec<ScoredTriple>>,
    pub unrefined: Vec<GoldTriple>,
    pub predictions: Vec<GoldTriple>,
    pub twd_alone: Option<Vec<GoldTriple>>,
    pub metrics: Option<RelationMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationManifest {
    pub models: BTreeMap<ScorerKind, String>,
    pub weights: BTreeMap<ScorerKind, f64>,
    pub weight_source: String,
    pub n_queries: usize,
    pub predictions_sha256: String,
}

/// Everything needed to reproduce a run from the same inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config: RunConfig,
    pub inputs: BTreeMap<String, String>,
    pub relations: BTreeMap<TargetRelation, RelationManifest>,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialises") + "\n"
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub relations: Vec<RelationRun>,
    pub manifest: RunManifest,
    /// Wall-clock seconds per stage, in execution order.
    pub timing: Vec<(String, f64)>,
}

struct Timer(Vec<(String, f64)>);

impl Timer {
    fn time<T>(&mut self, label: String, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.0.push((label, start.elapsed().as_secs_f64()));
        out
    }
}

fn run_relation(
    cfg: &RunConfig,
    relation: TargetRelation,
    shared: &SharedInputs,
    hashes: &mut BTreeMap<String, String>,
    timer: &mut Timer,
) -> Result<RelationRun> {
    let data = load_relation(cfg, relation, hashes).map_err(|e| e.in_stage("ingest"))?;
    let table = cfg.mapping_table()?;
    let candidates = data.candidates(&data.wanted());
    let mut models = BTreeMap::new();
    let mut model_hashes = BTreeMap::new();
    let mut scored = BTreeMap::new();
    for &kind in &cfg.scorers {
        let model = timer
            .time(format!("{relation}/train/{kind}"), || train_scorer(kind, cfg, shared, &data))
            .map_err(|e| e.in_stage("train"))?;
        let file = ModelFile::new(relation, model);
        model_hashes.insert(kind, file.hash());
        let s = timer
            .time(format!("{relation}/score/{kind}"), || {
                score_candidates(&file.model, relation, &candidates, shared, &data, &table)
            })
            .map_err(|e| e.in_stage("score"))?;
        models.insert(kind, file);
        scored.insert(kind, s);
    }

    let (weights, weight_source) = choose_weights(cfg, relation, &scored, data.dev.as_deref())?;
    log::info!("{relation} weights ({weight_source}): {weights:?}");

    let unrefined = ensemble_scores(&scored, &data.queries, &weights).map_err(|e| e.in_stage("ensemble"))?;
    let types: BTreeSet<&TypeId> = candidates.values().flatten().collect();
    let refiner = match &shared.descriptions {
        Some(d) => Some(Refiner::new(cfg, relation, types, d).map_err(|e| e.in_stage("refine"))?),
        None => None,
    };
    let predictions = match (&refiner, cfg.trigger.refine) {
        (Some(r), true) => r.refine_all(&unrefined).map_err(|e| e.in_stage("refine"))?,
        _ => unrefined.clone(),
    };
    let twd = match &refiner {
        Some(r) => Some(
            r.twd_alone_all(&data.queries, seed::derive(relation_seed(cfg, relation), "twd"))
                .map_err(|e| e.in_stage("refine"))?,
        ),
        None => None,
    };

    let metrics = match &data.gold {
        Some(gold) => {
            let opts = cfg.eval.to_options();
            let eval = |p: &[GoldTriple]| evaluate(p, gold, &opts, None).map_err(|e| e.in_stage("evaluate"));
            let mut per_scorer = BTreeMap::new();
            for (&k, s) in &scored {
                per_scorer.insert(k, eval(&single_scorer_predictions(s, &data.queries))?);
            }
            Some(RelationMetrics {
                ensemble: eval(&predictions)?,
                ensemble_unrefined: eval(&unrefined)?,
                twd_alone: twd.as_deref().map(eval).transpose()?,
                scorers: per_scorer,
            })
        }
        None => None,
    };

    Ok(RelationRun {
        relation,
        models,
        model_hashes,
        weights,
        weight_source,
        scored,
        unrefined,
        predictions,
        twd_alone: twd,
        metrics,
    })
}

pub type WorkerPool = rayon::ThreadPool;

/// A pool of `jobs` threads (0 picks one per core). Output never depends on
/// the thread count.
pub fn worker_pool(jobs: usize) -> Result<WorkerPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Runs every enabled relation in memory on a pool of `jobs` threads
/// (0 picks the default).
pub fn run(cfg: &RunConfig, jobs: usize) -> Result<PipelineOutput> {
    cfg.validate()?;
    worker_pool(jobs)?.install(|| {
        let mut timer = Timer(Vec::new());
        let need_graph = cfg.scorers.contains(&ScorerKind::PathRanking);
        let shared = timer
            .time("ingest".into(), || load_shared(cfg, need_graph, true))
            .map_err(|e| e.in_stage("ingest"))?;
        let mut hashes = shared.hashes.clone();
        let mut relations = Vec::new();
        for &r in &cfg.relations {
            relations.push(run_relation(cfg, r, &shared, &mut hashes, &mut timer)?);
        }
        let manifest = RunManifest {
            tool: "triplescore".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: cfg.seed,
            config: cfg.clone(),
            inputs: hashes,
            relations: relations
                .iter()
                .map(|r| {
                    (
                        r.relation,
                        RelationManifest {
                            models: r.model_hashes.clone(),
                            weights: r.weights.clone(),
                            weight_source: r.weight_source.clone(),
                            n_queries: r.predictions.len(),
                            predictions_sha256: sha256_hex(corpus::write_scores(&r.predictions).as_bytes()),
                        },
                    )
                })
                .collect(),
        };
        Ok(PipelineOutput {
            relations,
            manifest,
            timing: timer.0,
        })
    })
}

/// Files written under an output directory.
pub fn output_paths(out_dir: &Path, relation: TargetRelation) -> RelationPaths {
    let dir = out_dir.join(relation.name());
    RelationPaths {
        predictions: dir.join("predictions.tsv"),
        unrefined: dir.join("ensemble_unrefined.tsv"),
        twd_alone: dir.join("twd_alone.tsv"),
        metrics: dir.join("metrics.json"),
        dir,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationPaths {
    pub dir: PathBuf,
    pub predictions: PathBuf,
    pub unrefined: PathBuf,
    pub twd_alone: PathBuf,
    pub metrics: PathBuf,
}

impl RelationPaths {
    pub fn scores(&self, kind: ScorerKind) -> PathBuf {
        self.dir.join(format!("{kind}.scores.tsv"))
    }

    pub fn model(&self, kind: ScorerKind) -> PathBuf {
        self.dir.join(format!("{kind}.model.json"))
    }
}

fn write_all(out_dir: &Path, output: &PipelineOutput, written: &mut Vec<PathBuf>) -> Result<()> {
    let mut put = |path: PathBuf, bytes: &[u8]| -> Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    for r in &output.relations {
        let paths = output_paths(out_dir, r.relation);
        put(paths.predictions.clone(), corpus::write_scores(&r.predictions).as_bytes())?;
        put(paths.unrefined.clone(), corpus::write_scores(&r.unrefined).as_bytes())?;
        if let Some(t) = &r.twd_alone {
            put(paths.twd_alone.clone(), corpus::write_scores(t).as_bytes())?;
        }
        for (k, s) in &r.scored {
            put(paths.scores(*k), write_scored(s).as_bytes())?;
        }
        for (k, m) in &r.models {
            put(paths.model(*k), &m.to_bytes())?;
        }
        if let Some(m) = &r.metrics {
            put(
                paths.metrics.clone(),
                (serde_json::to_string_pretty(m).expect("metrics serialise") + "\n").as_bytes(),
            )?;
        }
    }
    put(out_dir.join("manifest.json"), output.manifest.to_json().as_bytes())?;
    let timing: BTreeMap<&str, f64> = output.timing.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    put(
        out_dir.join("timing.json"),
        (serde_json::to_string_pretty(&timing).expect("timing serialises") + "\n").as_bytes(),
    )?;
    Ok(())
}

/// Writes a run's outputs; on failure removes whatever was written.
pub fn write_outputs(out_dir: &Path, output: &PipelineOutput) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    match write_all(out_dir, output, &mut written) {
        Ok(()) => Ok(written),
        Err(e) => {
            for p in &written {
                let _ = std::fs::remove_file(p);
            }
            Err(e.in_stage("write"))
        }
    }
}

/// `run` followed by `write_outputs`.
pub fn run_pipeline(cfg: &RunConfig, out_dir: &Path, jobs: usize) -> Result<PipelineOutput> {
    let output = run(cfg, jobs)?;
    write_outputs(out_dir, &output)?;
    Ok(output)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{generate_world, WorldConfig};

    fn world_config(dir: &Path) -> RunConfig {
        let world = generate_world(&WorldConfig {
            n_persons: 160,
            ..WorldConfig::default()
        })
        .unwrap();
        let files = world.write(dir).unwrap();
        let mut cfg = RunConfig::for_world(&files);
        cfg.seed = 3;
        cfg.path_ranking.n_trees = 15;
        cfg.path_ranking.min_professions = 1;
        cfg.word_mle.pseudo_sample = 50;
        cfg
    }

    #[test]
    fn end_to_end_writes_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = world_config(&dir.path().join("world"));
        let out = dir.path().join("out");
        let run = run_pipeline(&cfg, &out, 2).unwrap();
        assert_eq!(run.relations.len(), 2);
        for r in &run.relations {
            let m = r.metrics.as_ref().unwrap();
            assert!((0.0..=1.0).contains(&m.ensemble.acc));
            assert_eq!(m.scorers.len(), 4);
            let p = output_paths(&out, r.relation);
            assert!(p.predictions.exists() && p.metrics.exists());
            let back = ModelFile::load(&p.model(ScorerKind::WordCounting)).unwrap();
            assert_eq!(back.hash(), r.model_hashes[&ScorerKind::WordCounting]);
        }
        assert!(out.join("manifest.json").exists());
    }

    #[test]
    fn single_scorer_is_its_own_ensemble() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = world_config(dir.path());
        cfg.scorers = vec![ScorerKind::WordCounting];
        cfg.trigger.refine = false;
        let run = run(&cfg, 1).unwrap();
        for r in &run.relations {
            let single = single_scorer_predictions(&r.scored[&ScorerKind::WordCounting], &data_queries(&cfg, r.relation));
            assert_eq!(r.predictions, single);
        }
    }

    fn data_queries(cfg: &RunConfig, relation: TargetRelation) -> Vec<(PersonId, TypeId)> {
        load_queries(&cfg.input.relation(relation).unwrap().queries).unwrap()
    }

    #[test]
    fn missing_input_names_the_path() {
        let mut cfg = RunConfig {
            scorers: vec![ScorerKind::WordCounting],
            relations: vec![TargetRelation::Profession],
            ..RunConfig::default()
        };
        cfg.input.sentences = PathBuf::from("/nonexistent/sentences.tsv");
        cfg.input.profession = Some(crate::config::RelationInputs {
            kb: "/nonexistent/p.kb".into(),
            queries: "/nonexistent/p.test".into(),
            dev: None,
            gold: None,
        });
        let err = run(&cfg, 1).unwrap_err().to_string();
        assert!(err.contains("/nonexistent/sentences.tsv"), "{err}");
        assert!(err.contains("ingest"), "{err}");
    }
}

//! `triplescore`: runs the scoring pipeline, or any single stage of it, over a
//! TOML config.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use triplescore::config::{RunConfig, CONFIG_ENV};
use triplescore::corpus::{self, GoldTriple};
use triplescore::eval::{evaluate, generate_world, EvalOptions, WorldConfig};
use triplescore::model_io::ModelFile;
use triplescore::pipeline::{self, load_scored, output_paths, write_scored, Refiner};
use triplescore::{seed, Error, PersonId, Result, ScorerKind, TargetRelation, TypeId};

#[derive(Parser)]
#[command(
    name = "triplescore",
    version,
    about = "Relevance scores (0-7) for profession and nationality triples"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Run config (TOML).
    #[arg(long, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Restricts the run to one relation.
    #[arg(long, value_enum)]
    relation: Option<Relation>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Relation {
    Profession,
    Nationality,
}

impl From<Relation> for TargetRelation {
    fn from(r: Relation) -> Self {
        match r {
            Relation::Profession => TargetRelation::Profession,
            Relation::Nationality => TargetRelation::Nationality,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Scorer {
    Wordclass,
    Wordcount,
    Wordmle,
    Pathrank,
}

impl From<Scorer> for ScorerKind {
    fn from(s: Scorer) -> Self {
        match s {
            Scorer::Wordclass => ScorerKind::WordClassification,
            Scorer::Wordcount => ScorerKind::WordCounting,
            Scorer::Wordmle => ScorerKind::WordMle,
            Scorer::Pathrank => ScorerKind::PathRanking,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check and index the inputs; writes ingest.json.
    Ingest(Common),
    /// Train one scorer and save its model.
    Train {
        #[arg(value_enum)]
        scorer: Scorer,
        #[command(flatten)]
        common: Common,
    },
    /// Raw and mapped scores of one scorer for the queried triples.
    Score {
        #[arg(value_enum)]
        scorer: Scorer,
        /// Model file; defaults to the one `train` writes, trained on the fly if absent.
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Combine the enabled scorers' score files.
    Ensemble(Common),
    /// Apply trigger-word refinement to ensemble scores.
    Refine {
        /// Scores to refine; defaults to the `ensemble` output.
        #[arg(long)]
        pred: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Compare predicted scores with gold scores.
    Evaluate {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        /// Score missing predictions as 0 instead of failing.
        #[arg(long)]
        allow_missing: bool,
        /// Only evaluate the (person, type) pairs listed in this file.
        #[arg(long)]
        restrict: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        acc_threshold: u8,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Every stage end to end.
    Pipeline(Common),
    /// Write a synthetic world and a config that runs on it.
    GenerateWorld {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 600)]
        persons: usize,
        /// Chance that a person's primary type is named in the first description sentence.
        #[arg(long, default_value_t = 1.0)]
        plant: f64,
        /// Decay of secondary type weights; larger means one dominant type.
        #[arg(long, default_value_t = 1.5)]
        sharpness: f64,
    },
}

impl Common {
    fn load(&self) -> Result<RunConfig> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| Error::Config(format!("no config: pass --config or set {CONFIG_ENV}")))?;
        let mut cfg = RunConfig::load(path)?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(r) = self.relation {
            cfg.relations = vec![r.into()];
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn install<T: Send>(&self, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
        pipeline::worker_pool(self.jobs)?.install(f)
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn ingest(common: &Common) -> Result<()> {
    let cfg = common.load()?;
    common.install(|| {
        let need_graph = cfg.scorers.contains(&ScorerKind::PathRanking);
        let shared = pipeline::load_shared(&cfg, need_graph, true)?;
        let mut hashes = shared.hashes.clone();
        let mut relations = BTreeMap::new();
        for &r in &cfg.relations {
            let data = pipeline::load_relation(&cfg, r, &mut hashes)?;
            relations.insert(
                r.name(),
                serde_json::json!({
                    "kb_assertions": data.kb.len(),
                    "kb_persons": data.kb_types.len(),
                    "kb_types": corpus::type_universe(&data.kb).len(),
                    "queries": data.queries.len(),
                    "dev": data.dev.as_ref().map(Vec::len),
                    "gold": data.gold.as_ref().map(Vec::len),
                }),
            );
        }
        let summary = serde_json::json!({
            "sentences": shared.index.corpus.sentences.len(),
            "persons_with_text": shared.index.texts.len(),
            "descriptions": shared.descriptions.as_ref().map(BTreeMap::len),
            "kg_entities": shared.graph.as_ref().map(|g| g.entity_count()),
            "relations": relations,
            "inputs": hashes,
        });
        let text = serde_json::to_string_pretty(&summary).expect("summary serialises") + "\n";
        write_file(&common.out.join("ingest.json"), text.as_bytes())?;
        print!("{text}");
        Ok(())
    })
}

fn train(kind: ScorerKind, common: &Common) -> Result<()> {
    let cfg = common.load()?;
    common.install(|| {
        let shared = pipeline::load_shared(&cfg, kind == ScorerKind::PathRanking, false).map_err(|e| e.in_stage("ingest"))?;
        let mut hashes = BTreeMap::new();
        for &r in &cfg.relations {
            let data = pipeline::load_relation(&cfg, r, &mut hashes).map_err(|e| e.in_stage("ingest"))?;
            let model = pipeline::train_scorer(kind, &cfg, &shared, &data).map_err(|e| e.in_stage("train"))?;
            let path = output_paths(&common.out, r).model(kind);
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            let hash = ModelFile::new(r, model).save(&path)?;
            println!("{r}\t{kind}\t{}\tsha256:{hash}", path.display());
        }
        Ok(())
    })
}

fn score(kind: ScorerKind, model: Option<&Path>, common: &Common) -> Result<()> {
    let cfg = common.load()?;
    if model.is_some() && cfg.relations.len() != 1 {
        return Err(Error::Config("--model needs --relation (or a config with one relation)".into()));
    }
    common.install(|| {
        let shared = pipeline::load_shared(&cfg, kind == ScorerKind::PathRanking, false).map_err(|e| e.in_stage("ingest"))?;
        let table = cfg.mapping_table()?;
        let mut hashes = BTreeMap::new();
        for &r in &cfg.relations {
            let data = pipeline::load_relation(&cfg, r, &mut hashes).map_err(|e| e.in_stage("ingest"))?;
            let paths = output_paths(&common.out, r);
            let default_model = paths.model(kind);
            let file = match model {
                Some(p) => ModelFile::load(p)?,
                None if default_model.exists() => ModelFile::load(&default_model)?,
                None => {
                    log::info!("{r}: no saved {kind} model, training one");
                    ModelFile::new(
                        r,
                        pipeline::train_scorer(kind, &cfg, &shared, &data).map_err(|e| e.in_stage("train"))?,
                    )
                }
            };
            if file.relation != r || file.model.kind() != kind {
                return Err(Error::Model(format!(
                    "model is {} for {}, expected {kind} for {r}",
                    file.model.kind(),
                    file.relation
                )));
            }
            let candidates = data.candidates(&data.wanted());
            let scored =
                pipeline::score_candidates(&file.model, r, &candidates, &shared, &data, &table).map_err(|e| e.in_stage("score"))?;
            write_file(&paths.scores(kind), write_scored(&scored).as_bytes())?;
            println!("{r}\t{kind}\t{}\t{} triples", paths.scores(kind).display(), scored.len());
        }
        Ok(())
    })
}

fn ensemble(common: &Common) -> Result<()> {
    let cfg = common.load()?;
    let mut hashes = BTreeMap::new();
    for &r in &cfg.relations {
        let data = pipeline::load_relation(&cfg, r, &mut hashes).map_err(|e| e.in_stage("ingest"))?;
        let paths = output_paths(&common.out, r);
        let mut scored = BTreeMap::new();
        for &k in &cfg.scorers {
            scored.insert(k, load_scored(&paths.scores(k)).map_err(|e| e.in_stage("ensemble"))?);
        }
        let (weights, source) = pipeline::choose_weights(&cfg, r, &scored, data.dev.as_deref())?;
        let preds = pipeline::ensemble_scores(&scored, &data.queries, &weights).map_err(|e| e.in_stage("ensemble"))?;
        write_file(&paths.unrefined, corpus::write_scores(&preds).as_bytes())?;
        let w: Vec<String> = weights.iter().map(|(k, v)| format!("{k}={v:.4}")).collect();
        println!("{r}\t{}\tweights ({source}): {}", paths.unrefined.display(), w.join(" "));
    }
    Ok(())
}

fn refine_stage(pred: Option<&Path>, common: &Common) -> Result<()> {
    let cfg = common.load()?;
    if pred.is_some() && cfg.relations.len() != 1 {
        return Err(Error::Config("--pred needs --relation (or a config with one relation)".into()));
    }
    let desc_path = cfg
        .input
        .descriptions
        .as_ref()
        .ok_or_else(|| Error::Config("refinement needs input.descriptions".into()))?;
    let descriptions = corpus::load_descriptions(desc_path).map_err(|e| e.in_stage("refine"))?;
    for &r in &cfg.relations {
        let paths = output_paths(&common.out, r);
        let input = pred.map_or(paths.unrefined.clone(), Path::to_path_buf);
        let preds = corpus::load_gold(&input).map_err(|e| e.in_stage("refine"))?;
        let kb = corpus::load_kb(
            &cfg.input
                .relation(r)
                .ok_or_else(|| Error::Config(format!("[input.{r}] is missing")))?
                .kb,
            r,
        )?;
        let types: BTreeSet<TypeId> = corpus::type_universe(&kb)
            .into_iter()
            .chain(preds.iter().map(|g| g.type_id.clone()))
            .collect();
        let refiner = Refiner::new(&cfg, r, &types, &descriptions)?;
        let out = if cfg.trigger.refine {
            refiner.refine_all(&preds).map_err(|e| e.in_stage("refine"))?
        } else {
            preds
        };
        write_file(&paths.predictions, corpus::write_scores(&out).as_bytes())?;
        let queries: Vec<(PersonId, TypeId)> = out.iter().map(|g| (g.person.clone(), g.type_id.clone())).collect();
        let twd = refiner
            .twd_alone_all(&queries, seed::derive(pipeline::relation_seed(&cfg, r), "twd"))
            .map_err(|e| e.in_stage("refine"))?;
        write_file(&paths.twd_alone, corpus::write_scores(&twd).as_bytes())?;
        println!("{r}\t{}", paths.predictions.display());
    }
    Ok(())
}

fn evaluate_files(pred: &Path, gold: &Path, opts: &EvalOptions, restrict: Option<&Path>, format: Format) -> Result<()> {
    let pred: Vec<GoldTriple> = corpus::load_gold(pred)?;
    let gold = corpus::load_gold(gold)?;
    let restrict = match restrict {
        Some(p) => Some(pipeline::load_queries(p)?.into_iter().collect::<BTreeSet<_>>()),
        None => None,
    };
    let report = evaluate(&pred, &gold, opts, restrict.as_ref())?;
    match format {
        Format::Table => print!("{}", report.to_table()),
        Format::Json => print!("{}", report.to_json()),
    }
    Ok(())
}

fn run_pipeline(common: &Common) -> Result<()> {
    let cfg = common.load()?;
    let output = pipeline::run_pipeline(&cfg, &common.out, common.jobs)?;
    for r in &output.relations {
        let paths = output_paths(&common.out, r.relation);
        println!("{}: {}", r.relation, paths.predictions.display());
        if let Some(m) = &r.metrics {
            println!("  ensemble + refinement  {}", m.ensemble.summary());
            println!("  ensemble               {}", m.ensemble_unrefined.summary());
            if let Some(t) = &m.twd_alone {
                println!("  trigger words alone    {}", t.summary());
            }
            for (k, s) in &m.scorers {
                println!("  {:<22} {}", k.name(), s.summary());
            }
        }
    }
    println!("manifest: {}", common.out.join("manifest.json").display());
    Ok(())
}

fn world(out: &Path, seed: u64, persons: usize, plant: f64, sharpness: f64) -> Result<()> {
    let cfg = WorldConfig {
        seed,
        n_persons: persons,
        plant_probability: plant,
        sharpness,
        ..WorldConfig::default()
    };
    let out = &std::path::absolute(out).map_err(|e| Error::io(out, e))?;
    let files = generate_world(&cfg)?.write(out)?;
    let mut run = RunConfig::for_world(&files);
    run.seed = seed;
    let path = out.join("config.toml");
    write_file(&path, run.to_toml().as_bytes())?;
    println!("{}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Ingest(c) => ingest(c),
        Command::Train { scorer, common } => train((*scorer).into(), common),
        Command::Score { scorer, model, common } => score((*scorer).into(), model.as_deref(), common),
        Command::Ensemble(c) => ensemble(c),
        Command::Refine { pred, common } => refine_stage(pred.as_deref(), common),
        Command::Evaluate {
            pred,
            gold,
            allow_missing,
            restrict,
            acc_threshold,
            format,
        } => {
            let opts = EvalOptions {
                acc_threshold: *acc_threshold,
                allow_missing: *allow_missing,
                ..EvalOptions::default()
            };
            evaluate_files(pred, gold, &opts, restrict.as_deref(), *format)
        }
        Command::Pipeline(c) => run_pipeline(c),
        Command::GenerateWorld {
            out,
            seed,
            persons,
            plant,
            sharpness,
        } => world(out, *seed, *persons, *plant, *sharpness),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

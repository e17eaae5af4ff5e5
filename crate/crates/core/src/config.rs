//! Run configuration, read from TOML.
//!
//! Relative paths are resolved against the directory of the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ensemble::EnsembleWeights;
use crate::error::{Error, Result};
use crate::eval::{EvalOptions, WorldFiles};
use crate::ids::TargetRelation;
use crate::mapping::{MappingStrategy, MappingTable};
use crate::path_ranking::{HyperGrid, MaxFeatures, PathOptions, PathRankingConfig};
use crate::score::ScorerKind;
use crate::text_scorers::logistic::NewtonOptions;
use crate::text_scorers::{ClassifierConfig, MleConfig};

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "TRIPLESCORE_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationInputs {
    /// `person<TAB>type` assertions.
    pub kb: PathBuf,
    /// Triples to score: `person<TAB>type`, optionally with a score column.
    pub queries: PathBuf,
    /// Gold scores used to derive ensemble weights.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dev: Option<PathBuf>,
    /// Gold scores for the queries; enables evaluation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    pub sentences: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub descriptions: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kg: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profession: Option<RelationInputs>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nationality: Option<RelationInputs>,
}

impl InputConfig {
    pub fn relation(&self, relation: TargetRelation) -> Option<&RelationInputs> {
        match relation {
            TargetRelation::Profession => self.profession.as_ref(),
            TargetRelation::Nationality => self.nationality.as_ref(),
        }
    }

    pub fn relation_mut(&mut self, relation: TargetRelation) -> &mut Option<RelationInputs> {
        match relation {
            TargetRelation::Profession => &mut self.profession,
            TargetRelation::Nationality => &mut self.nationality,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureSection {
    /// Positives (and as many negatives) kept per popularity bucket.
    pub bucket_cap: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stopwords: Option<PathBuf>,
}

impl Default for FeatureSection {
    fn default() -> Self {
        FeatureSection {
            bucket_cap: 100,
            stopwords: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassificationSection {
    pub vocab_cap: usize,
    pub cv_folds: usize,
    pub grid_size: usize,
    pub grad_tol: f64,
    pub max_iter: usize,
}

impl Default for ClassificationSection {
    fn default() -> Self {
        let c = ClassifierConfig::default();
        ClassificationSection {
            vocab_cap: c.vocab_cap,
            cv_folds: c.cv_folds,
            grid_size: c.grid_size,
            grad_tol: c.newton.grad_tol,
            max_iter: c.newton.max_iter,
        }
    }
}

impl ClassificationSection {
    pub fn to_config(&self) -> ClassifierConfig {
        ClassifierConfig {
            vocab_cap: self.vocab_cap,
            cv_folds: self.cv_folds,
            grid_size: self.grid_size,
            newton: NewtonOptions {
                grad_tol: self.grad_tol,
                max_iter: self.max_iter,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CountingSection {
    pub vocab_cap: usize,
}

impl Default for CountingSection {
    fn default() -> Self {
        CountingSection { vocab_cap: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MleSection {
    pub vocab_cap: usize,
    pub pseudo_sample: usize,
    /// Relations whose mixtures include the background pseudo type.
    pub pseudo_relations: Vec<TargetRelation>,
    pub epsilon: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for MleSection {
    fn default() -> Self {
        let c = MleConfig::default();
        MleSection {
            vocab_cap: c.vocab_cap,
            pseudo_sample: c.pseudo_sample,
            pseudo_relations: vec![TargetRelation::Profession],
            epsilon: c.epsilon,
            max_iter: c.max_iter,
            tol: c.tol,
        }
    }
}

impl MleSection {
    pub fn to_config(&self, relation: TargetRelation) -> MleConfig {
        MleConfig {
            vocab_cap: self.vocab_cap,
            pseudo_sample: self.pseudo_sample,
            use_pseudo: self.pseudo_relations.contains(&relation),
            epsilon: self.epsilon,
            max_iter: self.max_iter,
            tol: self.tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathSection {
    pub n_trees: usize,
    pub top_n: usize,
    pub min_samples_split: Vec<usize>,
    pub max_features: Vec<MaxFeatures>,
    pub validation_fraction: f64,
    pub max_path_len: usize,
    pub inverse_edges: bool,
    pub min_professions: usize,
    /// Graph relations dropped at load time, by name prefix.
    pub blocked_prefixes: Vec<String>,
    /// Graph relation linking persons to type nodes, per target relation.
    pub type_relations: BTreeMap<TargetRelation, String>,
}

impl Default for PathSection {
    fn default() -> Self {
        let c = PathRankingConfig::default();
        PathSection {
            n_trees: c.n_trees,
            top_n: c.top_n,
            min_samples_split: c.grid.min_samples_split,
            max_features: c.grid.max_features,
            validation_fraction: c.validation_fraction,
            max_path_len: c.paths.max_len,
            inverse_edges: c.paths.inverse_edges,
            min_professions: c.min_professions,
            blocked_prefixes: vec!["/base/".into(), "/common/".into()],
            type_relations: TargetRelation::ALL.into_iter().map(|r| (r, r.name().to_string())).collect(),
        }
    }
}

impl PathSection {
    pub fn to_config(&self) -> PathRankingConfig {
        PathRankingConfig {
            n_trees: self.n_trees,
            top_n: self.top_n,
            grid: HyperGrid {
                min_samples_split: self.min_samples_split.clone(),
                max_features: self.max_features.clone(),
            },
            validation_fraction: self.validation_fraction,
            paths: PathOptions {
                max_len: self.max_path_len,
                inverse_edges: self.inverse_edges,
            },
            min_professions: self.min_professions,
        }
    }

    pub fn type_relation(&self, relation: TargetRelation) -> String {
        self.type_relations
            .get(&relation)
            .cloned()
            .unwrap_or_else(|| relation.name().to_string())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSection {
    /// Fixed weights; when absent they are derived from the dev gold files.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<EnsembleWeights>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TriggerSection {
    pub refine: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profession_synonyms: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profession_hyponyms: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nationality_names: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nationality_manual: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abbreviations: Option<PathBuf>,
    /// Complete lexicon files replacing the built ones.
    pub lexicons: BTreeMap<TargetRelation, PathBuf>,
}

impl Default for TriggerSection {
    fn default() -> Self {
        TriggerSection {
            refine: true,
            profession_synonyms: None,
            profession_hyponyms: None,
            nationality_names: None,
            nationality_manual: None,
            abbreviations: None,
            lexicons: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub acc_threshold: u8,
    pub allow_missing: bool,
    pub min_group: usize,
}

impl Default for EvalSection {
    fn default() -> Self {
        let e = EvalOptions::default();
        EvalSection {
            acc_threshold: e.acc_threshold,
            allow_missing: e.allow_missing,
            min_group: e.min_group,
        }
    }
}

impl EvalSection {
    pub fn to_options(&self) -> EvalOptions {
        EvalOptions {
            acc_threshold: self.acc_threshold,
            allow_missing: self.allow_missing,
            min_group: self.min_group,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub relations: Vec<TargetRelation>,
    pub scorers: Vec<ScorerKind>,
    pub input: InputConfig,
    pub features: FeatureSection,
    pub word_classification: ClassificationSection,
    pub word_counting: CountingSection,
    pub word_mle: MleSection,
    pub path_ranking: PathSection,
    /// Per-scorer, per-relation mapping overrides.
    pub mapping: BTreeMap<ScorerKind, BTreeMap<TargetRelation, MappingStrategy>>,
    pub ensemble: EnsembleSection,
    pub trigger: TriggerSection,
    pub eval: EvalSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            relations: TargetRelation::ALL.to_vec(),
            scorers: ScorerKind::ALL.to_vec(),
            input: InputConfig::default(),
            features: FeatureSection::default(),
            word_classification: ClassificationSection::default(),
            word_counting: CountingSection::default(),
            word_mle: MleSection::default(),
            path_ranking: PathSection::default(),
            mapping: BTreeMap::new(),
            ensemble: EnsembleSection::default(),
            trigger: TriggerSection::default(),
            eval: EvalSection::default(),
        }
    }
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() && !p.as_os_str().is_empty() {
        *p = base.join(&*p);
    }
}

fn resolve_opt(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(p) = p {
        resolve(base, p);
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let base = if base.as_os_str().is_empty() { Path::new(".") } else { base };
        let base = std::path::absolute(base).map_err(|e| Error::io(base, e))?;
        Self::from_toml(&text, &base).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.resolve_paths(base_dir);
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises to TOML")
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let i = &mut self.input;
        resolve(base, &mut i.sentences);
        resolve_opt(base, &mut i.descriptions);
        resolve_opt(base, &mut i.kg);
        for r in [&mut i.profession, &mut i.nationality].into_iter().flatten() {
            resolve(base, &mut r.kb);
            resolve(base, &mut r.queries);
            resolve_opt(base, &mut r.dev);
            resolve_opt(base, &mut r.gold);
        }
        resolve_opt(base, &mut self.features.stopwords);
        let t = &mut self.trigger;
        for p in [
            &mut t.profession_synonyms,
            &mut t.profession_hyponyms,
            &mut t.nationality_names,
            &mut t.nationality_manual,
            &mut t.abbreviations,
        ] {
            resolve_opt(base, p);
        }
        for p in t.lexicons.values_mut() {
            resolve(base, p);
        }
    }

    pub fn mapping_table(&self) -> Result<MappingTable> {
        MappingTable::default().with_overrides(&self.mapping)
    }

    /// Checks knobs and that every enabled relation and scorer has its inputs.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.relations.is_empty() {
            return fail("no relations enabled".into());
        }
        if self.scorers.is_empty() {
            return fail("no scorers enabled".into());
        }
        if self.input.sentences.as_os_str().is_empty() {
            return fail("input.sentences is required".into());
        }
        for r in &self.relations {
            if self.input.relation(*r).is_none() {
                return fail(format!("relation {r} is enabled but [input.{r}] is missing"));
            }
        }
        if self.scorers.contains(&ScorerKind::PathRanking) && self.input.kg.is_none() {
            return fail("the pathrank scorer needs input.kg".into());
        }
        let knobs = [
            ("features.bucket_cap", self.features.bucket_cap),
            ("word_classification.vocab_cap", self.word_classification.vocab_cap),
            ("word_classification.grid_size", self.word_classification.grid_size),
            ("word_classification.max_iter", self.word_classification.max_iter),
            ("word_counting.vocab_cap", self.word_counting.vocab_cap),
            ("word_mle.vocab_cap", self.word_mle.vocab_cap),
            ("word_mle.pseudo_sample", self.word_mle.pseudo_sample),
            ("word_mle.max_iter", self.word_mle.max_iter),
            ("path_ranking.n_trees", self.path_ranking.n_trees),
            ("path_ranking.top_n", self.path_ranking.top_n),
            ("path_ranking.max_path_len", self.path_ranking.max_path_len),
        ];
        for (name, v) in knobs {
            if v == 0 {
                return fail(format!("{name} must be positive"));
            }
        }
        if self.word_classification.cv_folds < 2 {
            return fail("word_classification.cv_folds must be at least 2".into());
        }
        if self.path_ranking.min_samples_split.is_empty() || self.path_ranking.max_features.is_empty() {
            return fail("path_ranking grid must not be empty".into());
        }
        if !(0.0..1.0).contains(&self.path_ranking.validation_fraction) {
            return fail("path_ranking.validation_fraction must lie in [0, 1)".into());
        }
        self.mapping_table()?;
        Ok(())
    }

    /// A config running every scorer on a generated world's files, scoring
    /// and evaluating the test split with weights from the dev split.
    pub fn for_world(files: &WorldFiles) -> Self {
        let mut cfg = RunConfig::default();
        cfg.input.sentences = files.sentences.clone();
        cfg.input.descriptions = Some(files.descriptions.clone());
        cfg.input.kg = Some(files.kg.clone());
        for r in TargetRelation::ALL {
            *cfg.input.relation_mut(r) = Some(RelationInputs {
                kb: files.kb(r).to_path_buf(),
                queries: files.test(r).to_path_buf(),
                dev: Some(files.dev(r).to_path_buf()),
                gold: Some(files.test(r).to_path_buf()),
            });
        }
        cfg
    }
}

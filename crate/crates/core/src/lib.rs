//! Relevance scoring for type-like knowledge-base triples: text and
//! knowledge-graph base scorers, score mapping, weighted ensembling,
//! trigger-word refinement and evaluation.

pub mod config;
pub mod corpus;
pub mod ensemble;
pub mod error;
pub mod eval;
pub mod features;
pub mod ids;
pub mod mapping;
pub mod model_io;
pub mod path_ranking;
pub mod pipeline;
pub mod score;
pub mod seed;
pub mod text;
pub mod text_scorers;
pub mod trigger;

pub use config::RunConfig;
pub use corpus::{GoldTriple, KbAssertion, KgTriple};
pub use error::{Error, Result};
pub use eval::MetricsReport;
pub use ids::{EntityId, PersonId, RelationId, TargetRelation, TypeId};
pub use model_io::{ModelFile, TrainedModel};
pub use pipeline::{run_pipeline, PipelineOutput, RunManifest};
pub use score::{RawScore, ScorerKind};

//! Versioned JSON envelope for trained models.
//!
//! ```text
//! {"format": "triplescore-model", "version": 1, "relation": "profession",
//!  "model": {"kind": "wordcount", "body": { ... }}}
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ids::TargetRelation;
use crate::path_ranking::PathRankingModel;
use crate::score::ScorerKind;
use crate::text_scorers::{ClassificationModel, CountingModel, MleModel};

pub const FORMAT: &str = "triplescore-model";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "body")]
pub enum TrainedModel {
    #[serde(rename = "wordclass")]
    WordClassification(ClassificationModel),
    #[serde(rename = "wordcount")]
    WordCounting(CountingModel),
    #[serde(rename = "wordmle")]
    WordMle(MleModel),
    #[serde(rename = "pathrank")]
    PathRanking(PathRankingModel),
}

impl TrainedModel {
    pub fn kind(&self) -> ScorerKind {
        match self {
            TrainedModel::WordClassification(_) => ScorerKind::WordClassification,
            TrainedModel::WordCounting(_) => ScorerKind::WordCounting,
            TrainedModel::WordMle(_) => ScorerKind::WordMle,
            TrainedModel::PathRanking(_) => ScorerKind::PathRanking,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub relation: TargetRelation,
    pub model: TrainedModel,
}

impl ModelFile {
    pub fn new(relation: TargetRelation, model: TrainedModel) -> Self {
        ModelFile {
            format: FORMAT.to_string(),
            version: VERSION,
            relation,
            model,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec(self).expect("model serialises");
        bytes.push(b'\n');
        bytes
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let file: ModelFile = serde_json::from_slice(bytes).map_err(|e| Error::Model(e.to_string()))?;
        if file.format != FORMAT {
            return Err(Error::Model(format!("not a model file (format `{}`)", file.format)));
        }
        if file.version != VERSION {
            return Err(Error::Model(format!(
                "unsupported model version {} (expected {VERSION})",
                file.version
            )));
        }
        Ok(file)
    }

    pub fn save(&self, path: &Path) -> Result<String> {
        let bytes = self.to_bytes();
        std::fs::write(path, &bytes).map_err(|e| Error::io(path, e))?;
        Ok(sha256_hex(&bytes))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|e| match e {
            Error::Model(m) => Error::Model(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn hash(&self) -> String {
        sha256_hex(&self.to_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::TfIdfWeights;
    use std::collections::BTreeMap;

    fn counting() -> ModelFile {
        let mut types = BTreeMap::new();
        types.insert(
            "Actor".into(),
            TfIdfWeights {
                weights: BTreeMap::from([("film".to_string(), 0.1 + 0.2), ("stage".to_string(), 1e-300)]),
            },
        );
        ModelFile::new(TargetRelation::Profession, TrainedModel::WordCounting(CountingModel { types }))
    }

    #[test]
    fn round_trip_is_exact() {
        let m = counting();
        let back = ModelFile::from_bytes(&m.to_bytes()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.hash(), m.hash());
        assert_eq!(back.model.kind(), ScorerKind::WordCounting);
    }

    #[test]
    fn rejects_wrong_format_or_version() {
        let text = String::from_utf8(counting().to_bytes()).unwrap();
        assert!(ModelFile::from_bytes(text.replace("\"version\":1", "\"version\":9").as_bytes()).is_err());
        assert!(ModelFile::from_bytes(text.replace(FORMAT, "other").as_bytes()).is_err());
        assert!(ModelFile::from_bytes(b"{").is_err());
    }
}

//! Tokenization and the shipped stop list.

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};

const DEFAULT_STOPLIST: &str = include_str!("../data/stopwords_en.txt");

/// Lowercased tokens that are dropped from associated text.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stoplist(BTreeSet<String>);

impl Stoplist {
    /// The bundled English stop list.
    pub fn english() -> Self {
        Self::parse(DEFAULT_STOPLIST)
    }

    pub fn empty() -> Self {
        Stoplist(BTreeSet::new())
    }

    /// One word per line; `#` starts a comment line.
    pub fn parse(text: &str) -> Self {
        Stoplist(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for Stoplist {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Stoplist(iter.into_iter().map(|s| s.into().to_lowercase()).collect())
    }
}

/// Splits on whitespace, trims non-alphanumeric characters from both ends,
/// lowercases. Pure-punctuation pieces disappear.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace().filter_map(|raw| {
        let t = raw.trim_matches(|c: char| !c.is_alphanumeric());
        (!t.is_empty()).then(|| t.to_lowercase())
    })
}

/// `tokenize` followed by stop-word removal.
pub fn content_tokens<'a>(text: &'a str, stoplist: &'a Stoplist) -> impl Iterator<Item = String> + 'a {
    tokenize(text).filter(move |t| !stoplist.contains(t))
}

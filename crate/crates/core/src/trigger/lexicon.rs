//! Trigger-word lexicons per type.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{TargetRelation, TypeId};

/// `type_id -> terms`, as read from `type_id<TAB>term` files.
pub type TermMap = BTreeMap<TypeId, Vec<String>>;

pub fn parse_term_map(contents: &str, path: &Path) -> Result<TermMap> {
    let mut out = TermMap::new();
    for (i, raw) in contents.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (ty, term) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, i + 1, "expected `type_id<TAB>term`"))?;
        let (ty, term) = (ty.trim(), term.trim());
        if ty.is_empty() || term.is_empty() {
            return Err(Error::parse(path, i + 1, "empty type id or term"));
        }
        out.entry(TypeId::new(ty)).or_default().push(term.to_string());
    }
    Ok(out)
}

pub fn load_term_map(path: &Path) -> Result<TermMap> {
    let contents = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_term_map(&contents, path)
}

fn builtin(contents: &str, name: &str) -> TermMap {
    parse_term_map(contents, Path::new(name)).expect("bundled term map parses")
}

pub fn builtin_profession_synonyms() -> TermMap {
    builtin(include_str!("../../data/profession_synonyms.tsv"), "profession_synonyms.tsv")
}

pub fn builtin_profession_hyponyms() -> TermMap {
    builtin(include_str!("../../data/profession_hyponyms.tsv"), "profession_hyponyms.tsv")
}

/// Country names and adjectival forms.
pub fn builtin_nationality_names() -> TermMap {
    builtin(include_str!("../../data/nationality_names.tsv"), "nationality_names.tsv")
}

/// Hand-picked extra nationality triggers.
pub fn builtin_nationality_manual() -> TermMap {
    builtin(include_str!("../../data/nationality_manual.tsv"), "nationality_manual.tsv")
}

/// `"FilmDirector"` -> `"film director"`; underscores also separate words.
pub fn split_camel_case(id: &str) -> String {
    let chars: Vec<char> = id.chars().collect();
    let mut out = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c == '_' || c == '-' || c.is_whitespace() {
            if !out.ends_with(' ') && !out.is_empty() {
                out.push(' ');
            }
            continue;
        }
        if i > 0 && c.is_uppercase() {
            let prev = chars[i - 1];
            let next_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
            if (prev.is_lowercase() || prev.is_ascii_digit() || (prev.is_uppercase() && next_lower)) && !out.ends_with(' ') {
                out.push(' ');
            }
        }
        out.extend(c.to_lowercase());
    }
    out.trim().to_string()
}

/// English plural of the last word of `term`.
pub fn pluralize(term: &str) -> String {
    let (head, last) = match term.rsplit_once(' ') {
        Some((h, l)) => (format!("{h} "), l),
        None => (String::new(), term),
    };
    let lower = last.to_lowercase();
    let plural = if ["s", "x", "z", "ch", "sh"].iter().any(|s| lower.ends_with(s)) {
        format!("{last}es")
    } else if lower.ends_with('y')
        && lower
            .chars()
            .rev()
            .nth(1)
            .is_some_and(|c| c.is_alphabetic() && !"aeiou".contains(c))
    {
        format!("{}ies", &last[..last.len() - 1])
    } else {
        format!("{last}s")
    };
    head + &plural
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TriggerLexicon {
    pub types: BTreeMap<TypeId, BTreeSet<String>>,
}

impl TriggerLexicon {
    pub fn triggers(&self, type_id: &TypeId) -> Option<&BTreeSet<String>> {
        self.types.get(type_id)
    }

    pub fn insert(&mut self, type_id: TypeId, trigger: &str) {
        let t = normalise(trigger);
        if !t.is_empty() {
            self.types.entry(type_id).or_default().insert(t);
        }
    }

    /// `type_id<TAB>trigger` lines, sorted.
    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        for (ty, terms) in &self.types {
            for t in terms {
                let _ = writeln!(s, "{ty}\t{t}");
            }
        }
        s
    }

    pub fn from_term_map(map: &TermMap) -> Self {
        let mut lex = TriggerLexicon::default();
        for (ty, terms) in map {
            for t in terms {
                lex.insert(ty.clone(), t);
            }
        }
        lex
    }
}

fn normalise(term: &str) -> String {
    term.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Union of base terms, synonyms, hyponyms and manual additions for every
/// type in `base`. With `plurals`, base terms, synonyms and hyponyms also
/// contribute their plural forms. Errors on a type with no base term.
pub fn build_lexicon(base: &TermMap, synonyms: &TermMap, hyponyms: &TermMap, manual: &TermMap, plurals: bool) -> Result<TriggerLexicon> {
    let mut lex = TriggerLexicon::default();
    let empty = Vec::new();
    for (ty, terms) in base {
        if terms.iter().all(|t| t.trim().is_empty()) {
            return Err(Error::invalid(format!("type {ty} has no base trigger term")));
        }
        let related = terms
            .iter()
            .chain(synonyms.get(ty).unwrap_or(&empty))
            .chain(hyponyms.get(ty).unwrap_or(&empty));
        for t in related {
            let t = normalise(t);
            if t.is_empty() {
                continue;
            }
            if plurals {
                lex.insert(ty.clone(), &pluralize(&t));
            }
            lex.insert(ty.clone(), &t);
        }
        for t in manual.get(ty).unwrap_or(&empty) {
            lex.insert(ty.clone(), t);
        }
    }
    Ok(lex)
}

/// Base terms for `types`: entries of `names` where present, otherwise the
/// type id split into words.
pub fn base_terms<'a>(types: impl IntoIterator<Item = &'a TypeId>, names: &TermMap) -> TermMap {
    types
        .into_iter()
        .map(|t| {
            let terms = names.get(t).cloned().unwrap_or_else(|| vec![split_camel_case(t.as_str())]);
            (t.clone(), terms)
        })
        .collect()
}

/// The default lexicon for a relation over `types`, from the bundled data.
pub fn default_lexicon<'a>(relation: TargetRelation, types: impl IntoIterator<Item = &'a TypeId>) -> Result<TriggerLexicon> {
    match relation {
        TargetRelation::Profession => build_lexicon(
            &base_terms(types, &TermMap::new()),
            &builtin_profession_synonyms(),
            &builtin_profession_hyponyms(),
            &TermMap::new(),
            true,
        ),
        TargetRelation::Nationality => build_lexicon(
            &base_terms(types, &builtin_nationality_names()),
            &TermMap::new(),
            &TermMap::new(),
            &builtin_nationality_manual(),
            false,
        ),
    }
}

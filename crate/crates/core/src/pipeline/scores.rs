//! Intermediate score files and query lists.
//!
//! Scorer output: `person<TAB>type<TAB>scorer<TAB>raw<TAB>mapped`, where an
//! abstention is the literal `ABSTAIN` in both value columns. Lines starting
//! with `#` are comments.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ids::{PersonId, TypeId};
use crate::score::{RawScore, ScorerKind};

pub const ABSTAIN: &str = "ABSTAIN";

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredTriple {
    pub person: PersonId,
    pub type_id: TypeId,
    pub scorer: ScorerKind,
    pub raw: RawScore,
    pub mapped: Option<u8>,
}

pub fn write_scored(triples: &[ScoredTriple]) -> String {
    let mut s = String::from("#person\ttype\tscorer\traw\tmapped\n");
    for t in triples {
        let raw = t.raw.value().map_or_else(|| ABSTAIN.to_string(), |v| v.to_string());
        let mapped = t.mapped.map_or_else(|| ABSTAIN.to_string(), |v| v.to_string());
        let _ = writeln!(s, "{}\t{}\t{}\t{raw}\t{mapped}", t.person, t.type_id, t.scorer);
    }
    s
}

fn data_lines(contents: &str) -> impl Iterator<Item = (usize, &str)> {
    contents
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

pub fn parse_scored(contents: &str, path: &Path) -> Result<Vec<ScoredTriple>> {
    let mut out = Vec::new();
    for (line, raw_line) in data_lines(contents) {
        let f: Vec<&str> = raw_line.split('\t').collect();
        if f.len() != 5 {
            return Err(Error::parse(path, line, format!("expected 5 columns, found {}", f.len())));
        }
        let scorer: ScorerKind = f[2].parse().map_err(|e: Error| Error::parse(path, line, e.to_string()))?;
        let raw = if f[3] == ABSTAIN {
            RawScore::Abstain
        } else {
            let v: f64 = f[3]
                .parse()
                .map_err(|_| Error::parse(path, line, format!("bad raw score `{}`", f[3])))?;
            match scorer {
                ScorerKind::WordCounting => RawScore::WeightedSum(v),
                _ => RawScore::Probability(v),
            }
        };
        let mapped = if f[4] == ABSTAIN {
            None
        } else {
            let v: u8 = f[4]
                .parse()
                .ok()
                .filter(|v| *v <= 7)
                .ok_or_else(|| Error::parse(path, line, format!("bad mapped score `{}`", f[4])))?;
            Some(v)
        };
        if raw.is_abstain() != mapped.is_none() {
            return Err(Error::parse(path, line, "raw and mapped columns disagree on abstention"));
        }
        out.push(ScoredTriple {
            person: PersonId::new(f[0]),
            type_id: TypeId::new(f[1]),
            scorer,
            raw,
            mapped,
        });
    }
    Ok(out)
}

pub fn load_scored(path: &Path) -> Result<Vec<ScoredTriple>> {
    let contents = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scored(&contents, path)
}

/// `person<TAB>type`, with an optional ignored third column, deduplicated
/// in first-occurrence order.
pub fn parse_queries(contents: &str, path: &Path) -> Result<Vec<(PersonId, TypeId)>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (line, raw) in data_lines(contents) {
        let f: Vec<&str> = raw.split('\t').collect();
        if !(2..=3).contains(&f.len()) || f[0].trim().is_empty() || f[1].trim().is_empty() {
            return Err(Error::parse(path, line, "expected `person<TAB>type[<TAB>score]`"));
        }
        let key = (PersonId::new(f[0].trim()), TypeId::new(f[1].trim()));
        if seen.insert(key.clone()) {
            out.push(key);
        }
    }
    Ok(out)
}

pub fn load_queries(path: &Path) -> Result<Vec<(PersonId, TypeId)>> {
    let contents = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_queries(&contents, path)
}

//! Input parsing: annotated sentences, KB files, gold scores, person
//! descriptions, and knowledge-graph triples.
//!
//! All files are UTF-8, tab separated, one record per line. Blank lines are
//! skipped. Line numbers in errors are 1-based.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{EntityId, PersonId, RelationId, TargetRelation, TypeId};
use crate::text::{content_tokens, Stoplist};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mention {
    pub person: PersonId,
    /// Byte range into the sentence text.
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedSentence {
    pub sentence_id: u64,
    pub text: String,
    pub mentions: Vec<Mention>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnnotatedCorpus {
    pub sentences: Vec<AnnotatedSentence>,
}

/// Token counts of every sentence that mentions a person.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssociatedText {
    pub person: PersonId,
    pub token_counts: BTreeMap<String, u32>,
}

impl AssociatedText {
    pub fn new(person: PersonId) -> Self {
        AssociatedText {
            person,
            token_counts: BTreeMap::new(),
        }
    }

    /// Convenience constructor from `(token, count)` pairs.
    pub fn from_counts<'a>(person: &str, counts: impl IntoIterator<Item = (&'a str, u32)>) -> Self {
        let mut text = AssociatedText::new(PersonId::new(person));
        for (tok, n) in counts {
            if n > 0 {
                *text.token_counts.entry(tok.to_string()).or_insert(0) += n;
            }
        }
        text
    }

    pub fn is_empty(&self) -> bool {
        self.token_counts.is_empty()
    }

    pub fn total_tokens(&self) -> u64 {
        self.token_counts.values().map(|&c| c as u64).sum()
    }

    pub fn count(&self, token: &str) -> u32 {
        self.token_counts.get(token).copied().unwrap_or(0)
    }
}

pub type PersonTexts = BTreeMap<PersonId, AssociatedText>;

/// Mention counts per person.
pub type Popularity = BTreeMap<PersonId, u64>;

/// Everything `load_sentences` derives from the sentence file.
#[derive(Debug, Clone, Default)]
pub struct SentenceIndex {
    pub corpus: AnnotatedCorpus,
    pub texts: PersonTexts,
    pub popularity: Popularity,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct KbAssertion {
    pub person: PersonId,
    pub relation: TargetRelation,
    pub type_id: TypeId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldTriple {
    pub person: PersonId,
    pub type_id: TypeId,
    pub score: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KgTriple {
    pub head: EntityId,
    pub relation: RelationId,
    pub tail: EntityId,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty())
}

fn nonempty<'a>(field: &'a str, what: &str, path: &Path, line: usize) -> Result<&'a str> {
    if field.is_empty() {
        Err(Error::parse(path, line, format!("empty {what}")))
    } else {
        Ok(field)
    }
}

pub fn load_sentences(path: &Path, stoplist: &Stoplist, known_persons: Option<&BTreeSet<PersonId>>) -> Result<SentenceIndex> {
    parse_sentences(&read(path)?, path, stoplist, known_persons)
}

/// Parses `sentence_id<TAB>text<TAB>person:start:end...`.
///
/// A sentence's tokens (mention spans excluded) are added once to the
/// associated text of every distinct person it mentions; popularity counts
/// every mention.
pub fn parse_sentences(
    contents: &str,
    path: &Path,
    stoplist: &Stoplist,
    known_persons: Option<&BTreeSet<PersonId>>,
) -> Result<SentenceIndex> {
    let mut index = SentenceIndex::default();
    for (line, raw) in data_lines(contents) {
        let mut fields = raw.split('\t');
        let id_field = fields.next().unwrap_or_default();
        let sentence_id: u64 = id_field
            .parse()
            .map_err(|_| Error::parse(path, line, format!("bad sentence id `{id_field}`")))?;
        let text = fields
            .next()
            .ok_or_else(|| Error::parse(path, line, "missing sentence text"))?
            .to_string();

        let mut mentions = Vec::new();
        for m in fields {
            let mut parts = m.rsplitn(3, ':');
            let (end, start, person) = match (parts.next(), parts.next(), parts.next()) {
                (Some(e), Some(s), Some(p)) if !p.is_empty() => (e, s, p),
                _ => return Err(Error::parse(path, line, format!("bad mention `{m}`"))),
            };
            let start: usize = start
                .parse()
                .map_err(|_| Error::parse(path, line, format!("bad mention start in `{m}`")))?;
            let end: usize = end
                .parse()
                .map_err(|_| Error::parse(path, line, format!("bad mention end in `{m}`")))?;
            if start >= end || end > text.len() {
                return Err(Error::parse(path, line, format!("mention span out of bounds: `{m}`")));
            }
            if !text.is_char_boundary(start) || !text.is_char_boundary(end) {
                return Err(Error::parse(path, line, format!("mention span splits a character: `{m}`")));
            }
            let person = PersonId::new(person);
            if let Some(known) = known_persons {
                if !known.contains(&person) {
                    return Err(Error::parse(path, line, format!("unknown person `{person}`")));
                }
            }
            mentions.push(Mention { person, start, end });
        }

        let mut spans: Vec<_> = mentions.iter().map(|m| (m.start, m.end)).collect();
        spans.sort_unstable();
        if spans.windows(2).any(|w| w[1].0 < w[0].1) {
            return Err(Error::parse(path, line, "overlapping mention spans"));
        }

        let distinct: BTreeSet<&PersonId> = mentions.iter().map(|m| &m.person).collect();
        if !distinct.is_empty() {
            let tokens: Vec<String> = content_tokens(&blank_spans(&text, &spans), stoplist).collect();
            for person in distinct {
                let assoc = index
                    .texts
                    .entry(person.clone())
                    .or_insert_with(|| AssociatedText::new(person.clone()));
                for tok in &tokens {
                    *assoc.token_counts.entry(tok.clone()).or_insert(0) += 1;
                }
            }
        }
        for m in &mentions {
            *index.popularity.entry(m.person.clone()).or_insert(0) += 1;
        }

        index.corpus.sentences.push(AnnotatedSentence {
            sentence_id,
            text,
            mentions,
        });
    }
    Ok(index)
}

/// Replaces mention spans with spaces so mention surfaces are not counted
/// as words of the sentence.
fn blank_spans(text: &str, spans: &[(usize, usize)]) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pos = 0;
    for &(start, end) in spans {
        out.push_str(&text[pos..start]);
        out.push(' ');
        pos = end;
    }
    out.push_str(&text[pos..]);
    out
}

pub fn load_kb(path: &Path, relation: TargetRelation) -> Result<Vec<KbAssertion>> {
    parse_kb(&read(path)?, path, relation)
}

/// Parses `person<TAB>type`; duplicates are dropped, first occurrence order kept.
pub fn parse_kb(contents: &str, path: &Path, relation: TargetRelation) -> Result<Vec<KbAssertion>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (line, raw) in data_lines(contents) {
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != 2 {
            return Err(Error::parse(path, line, format!("expected 2 columns, found {}", fields.len())));
        }
        let a = KbAssertion {
            person: PersonId::new(nonempty(fields[0], "person id", path, line)?),
            relation,
            type_id: TypeId::new(nonempty(fields[1], "type id", path, line)?),
        };
        if seen.insert(a.clone()) {
            out.push(a);
        }
    }
    Ok(out)
}

pub fn write_kb(kb: &[KbAssertion]) -> String {
    let mut out = String::new();
    for a in kb {
        let _ = writeln!(out, "{}\t{}", a.person, a.type_id);
    }
    out
}

pub fn load_gold(path: &Path) -> Result<Vec<GoldTriple>> {
    parse_gold(&read(path)?, path)
}

/// Parses `person<TAB>type<TAB>score` with score in 0..=7.
pub fn parse_gold(contents: &str, path: &Path) -> Result<Vec<GoldTriple>> {
    let mut out = Vec::new();
    for (line, raw) in data_lines(contents) {
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(path, line, format!("expected 3 columns, found {}", fields.len())));
        }
        let score: i64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, line, format!("bad score `{}`", fields[2])))?;
        if !(0..=7).contains(&score) {
            return Err(Error::parse(path, line, format!("score {score} outside 0..=7")));
        }
        out.push(GoldTriple {
            person: PersonId::new(nonempty(fields[0], "person id", path, line)?),
            type_id: TypeId::new(nonempty(fields[1], "type id", path, line)?),
            score: score as u8,
        });
    }
    Ok(out)
}

pub fn write_scores(triples: &[GoldTriple]) -> String {
    let mut out = String::new();
    for t in triples {
        let _ = writeln!(out, "{}\t{}\t{}", t.person, t.type_id, t.score);
    }
    out
}

pub fn load_descriptions(path: &Path) -> Result<BTreeMap<PersonId, String>> {
    parse_descriptions(&read(path)?, path)
}

/// Parses `person<TAB>description`. A repeated person overwrites the earlier
/// line and logs a warning.
pub fn parse_descriptions(contents: &str, path: &Path) -> Result<BTreeMap<PersonId, String>> {
    let mut out = BTreeMap::new();
    for (line, raw) in data_lines(contents) {
        let (person, desc) = raw
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, line, "expected person<TAB>description"))?;
        let person = PersonId::new(nonempty(person, "person id", path, line)?);
        if out.insert(person.clone(), desc.to_string()).is_some() {
            log::warn!(
                "{}:{line}: duplicate description for {person}, keeping the later one",
                path.display()
            );
        }
    }
    Ok(out)
}

pub fn load_triples(path: &Path) -> Result<Vec<KgTriple>> {
    parse_triples(&read(path)?, path)
}

/// Parses `head<TAB>relation<TAB>tail`.
pub fn parse_triples(contents: &str, path: &Path) -> Result<Vec<KgTriple>> {
    let mut out = Vec::new();
    for (line, raw) in data_lines(contents) {
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(path, line, format!("expected 3 columns, found {}", fields.len())));
        }
        out.push(KgTriple {
            head: EntityId::new(nonempty(fields[0], "head", path, line)?),
            relation: RelationId::new(nonempty(fields[1], "relation", path, line)?),
            tail: EntityId::new(nonempty(fields[2], "tail", path, line)?),
        });
    }
    Ok(out)
}

/// Each person's set of types.
pub fn types_by_person(kb: &[KbAssertion]) -> BTreeMap<PersonId, BTreeSet<TypeId>> {
    let mut out: BTreeMap<PersonId, BTreeSet<TypeId>> = BTreeMap::new();
    for a in kb {
        out.entry(a.person.clone()).or_default().insert(a.type_id.clone());
    }
    out
}

/// All types appearing in the KB, sorted.
pub fn type_universe(kb: &[KbAssertion]) -> BTreeSet<TypeId> {
    kb.iter().map(|a| a.type_id.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("test.tsv")
    }

    #[test]
    fn single_sentence_aggregation() {
        let stop: Stoplist = ["in"].into_iter().collect();
        let idx = parse_sentences("1\te1 acts in films\te1:0:2\n", p(), &stop, None).unwrap();
        let text = &idx.texts[&PersonId::new("e1")];
        let expected = AssociatedText::from_counts("e1", [("acts", 1), ("films", 1)]);
        assert_eq!(text, &expected);
        assert_eq!(idx.corpus.sentences[0].text, "e1 acts in films");
    }

    #[test]
    fn two_mentions_in_one_sentence() {
        let stop = Stoplist::empty();
        let idx = parse_sentences("7\tBob met Bob again\tbob:0:3\tbob:8:11\n", p(), &stop, None).unwrap();
        let bob = PersonId::new("bob");
        assert_eq!(idx.popularity[&bob], 2);
        assert_eq!(idx.texts[&bob], AssociatedText::from_counts("bob", [("met", 1), ("again", 1)]));
    }

    #[test]
    fn empty_file_gives_empty_index() {
        let idx = parse_sentences("", p(), &Stoplist::english(), None).unwrap();
        assert!(idx.corpus.sentences.is_empty());
        assert!(idx.texts.is_empty());
        assert!(idx.popularity.is_empty());
    }

    #[test]
    fn malformed_sentence_lines_report_line_numbers() {
        let stop = Stoplist::empty();
        let err = parse_sentences("1\tok\n\nx\tbad id\n", p(), &stop, None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_sentences("1\tshort\te1:0:99\n", p(), &stop, None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_sentences("1\tab cd\te1:0:4\te2:3:5\n", p(), &stop, None).unwrap_err();
        assert!(err.to_string().contains("overlapping"));
        let err = parse_sentences("1\tab\te1-0-2\n", p(), &stop, None).unwrap_err();
        assert!(err.to_string().contains("bad mention"));
    }

    #[test]
    fn unknown_person_is_rejected() {
        let known: BTreeSet<PersonId> = [PersonId::new("e1")].into();
        let err = parse_sentences("1\tab\te2:0:2\n", p(), &Stoplist::empty(), Some(&known)).unwrap_err();
        assert!(err.to_string().contains("unknown person"));
    }

    #[test]
    fn kb_dedup_and_format() {
        let kb = parse_kb("e1\tActor\ne1\tActor\n", p(), TargetRelation::Profession).unwrap();
        assert_eq!(kb.len(), 1);
        let kb = parse_kb("e1\tActor\ne2\tFarmer\n", p(), TargetRelation::Profession).unwrap();
        assert_eq!(kb.len(), 2);
        assert_eq!(kb[1].type_id.as_str(), "Farmer");
        let err = parse_kb("e1\tActor\tX\n", p(), TargetRelation::Profession).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn gold_parsing_and_range() {
        let g = parse_gold("e1\tActor\t7\n", p()).unwrap();
        assert_eq!(
            g,
            vec![GoldTriple {
                person: "e1".into(),
                type_id: "Actor".into(),
                score: 7
            }]
        );
        let err = parse_gold("e1\tActor\t3\ne1\tActor\t8\n", p()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(parse_gold("", p()).unwrap().is_empty());
    }

    #[test]
    fn descriptions_last_wins() {
        let d = parse_descriptions("e1\tJohn Doe is an American actor.\n", p()).unwrap();
        assert_eq!(d[&PersonId::new("e1")], "John Doe is an American actor.");
        let d = parse_descriptions("e1\tfirst\ne1\tsecond\n", p()).unwrap();
        assert_eq!(d[&PersonId::new("e1")], "second");
        assert!(!d.contains_key("e2"));
    }

    #[test]
    fn triples_parse() {
        let t = parse_triples("a\tr\tb\n", p()).unwrap();
        assert_eq!(t[0].relation.as_str(), "r");
        assert!(parse_triples("a\tr\n", p()).is_err());
    }
}

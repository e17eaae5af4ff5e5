//! Rule-based first-sentence splitter.

use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Abbreviations(BTreeSet<String>);

impl Abbreviations {
    pub fn english() -> Self {
        Abbreviations::parse(include_str!("../../data/abbreviations.txt"))
    }

    /// One lowercase abbreviation per line, trailing period included.
    pub fn parse(contents: &str) -> Self {
        Abbreviations(
            contents
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(&word.to_lowercase())
    }
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '\u{201D}' | '\u{2019}')
}

/// Splits off the first sentence. A sentence ends at `.`, `!` or `?`
/// (plus any closing quotes or brackets) followed by whitespace and an
/// uppercase letter, or by the end of the text. Periods ending a listed
/// abbreviation or a single-letter initial do not end a sentence. Without a
/// boundary the whole text is the first sentence.
pub fn split_first_sentence<'a>(text: &'a str, abbreviations: &Abbreviations) -> (&'a str, &'a str) {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    for (k, &(pos, c)) in chars.iter().enumerate() {
        if !matches!(c, '.' | '!' | '?') {
            continue;
        }
        let mut end = k + 1;
        while end < chars.len() && is_closer(chars[end].1) {
            end += 1;
        }
        let boundary = if end == chars.len() {
            true
        } else if chars[end].1.is_whitespace() {
            chars[end..]
                .iter()
                .find(|(_, ch)| !ch.is_whitespace())
                .is_some_and(|(_, ch)| ch.is_uppercase())
        } else {
            false
        };
        if !boundary {
            continue;
        }
        if c == '.' {
            let word_start = text[..pos].rfind(char::is_whitespace).map_or(0, |i| i + 1);
            let word = &text[word_start..=pos];
            let stem = word.trim_start_matches(|ch: char| !ch.is_alphanumeric());
            let letters = stem.trim_end_matches('.');
            let initial = letters.chars().count() == 1 && letters.chars().all(char::is_alphabetic);
            if initial || abbreviations.contains(stem) {
                continue;
            }
        }
        let cut = chars.get(end).map_or(text.len(), |&(i, _)| i);
        return (&text[..cut], text[cut..].trim_start());
    }
    (text, "")
}

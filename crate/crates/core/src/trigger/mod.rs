//! Trigger-word detection in person descriptions, score refinement, and
//! the trigger-only baseline.

pub mod lexicon;
pub mod sentence;

use rand::Rng as _;

pub use lexicon::{build_lexicon, default_lexicon, pluralize, TermMap, TriggerLexicon};
pub use sentence::{split_first_sentence, Abbreviations};

use crate::error::{Error, Result};
use crate::ids::{TargetRelation, TypeId};
use crate::mapping::MAX_SCORE;
use crate::seed;

/// Score given when a trigger is in the first sentence.
pub const UPGRADE_TO: u8 = 5;
/// Score given when no trigger is anywhere in the description.
pub const DOWNGRADE_TO: u8 = 2;

/// Lowercased alphanumeric word sequence of a text, for whole-word matching.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Words(Vec<String>);

impl Words {
    pub fn new(text: &str) -> Self {
        Words(
            text.split(|c: char| !c.is_alphanumeric())
                .filter(|w| !w.is_empty())
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn contains_phrase(&self, phrase: &Words) -> bool {
        !phrase.0.is_empty() && self.0.windows(phrase.0.len()).any(|w| w == phrase.0.as_slice())
    }
}

/// Whether any trigger of `type_id` occurs in `words` as whole words.
pub fn detect_words(lexicon: &TriggerLexicon, type_id: &TypeId, words: &Words) -> Result<bool> {
    let triggers = lexicon
        .triggers(type_id)
        .ok_or_else(|| Error::invalid(format!("type {type_id} has no trigger lexicon")))?;
    Ok(triggers.iter().any(|t| words.contains_phrase(&Words::new(t))))
}

/// Case-insensitive whole-word trigger detection.
pub fn detect(lexicon: &TriggerLexicon, type_id: &TypeId, text: &str) -> Result<bool> {
    detect_words(lexicon, type_id, &Words::new(text))
}

fn check_flags(in_first_sentence: bool, in_description: bool) -> Result<()> {
    if in_first_sentence && !in_description {
        return Err(Error::invalid("trigger found in the first sentence but not in the description"));
    }
    Ok(())
}

/// Raises scores below 5 to 5 on a first-sentence hit; for nationality only,
/// lowers scores above 2 to 2 when the description has no hit.
pub fn refine(score: u8, relation: TargetRelation, in_first_sentence: bool, in_description: bool) -> Result<u8> {
    check_flags(in_first_sentence, in_description)?;
    if score > MAX_SCORE {
        return Err(Error::invalid(format!("score {score} outside 0..=7")));
    }
    let mut s = score;
    if in_first_sentence && s < UPGRADE_TO {
        s = UPGRADE_TO;
    }
    if relation == TargetRelation::Nationality && !in_description && s > DOWNGRADE_TO {
        s = DOWNGRADE_TO;
    }
    Ok(s)
}

/// Trigger-only baseline: 5 on a first-sentence hit, 2 with no hit, and
/// otherwise 3 or 4 by a fair coin drawn from `seed`.
pub fn twd_alone(_relation: TargetRelation, in_first_sentence: bool, in_description: bool, seed: u64) -> Result<u8> {
    check_flags(in_first_sentence, in_description)?;
    Ok(if in_first_sentence {
        UPGRADE_TO
    } else if !in_description {
        DOWNGRADE_TO
    } else if seed::rng(seed).gen_bool(0.5) {
        4
    } else {
        3
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use TargetRelation::*;

    fn actor_lexicon() -> TriggerLexicon {
        default_lexicon(Profession, [&TypeId::new("Actor")]).unwrap()
    }

    #[test]
    fn detection() {
        let lex = actor_lexicon();
        let a: TypeId = "Actor".into();
        assert!(detect(&lex, &a, "an american actor and producer").unwrap());
        assert!(detect(&lex, &a, "Two ACTORS, one stage").unwrap());
        assert!(!detect(&lex, &a, "reactors").unwrap());
        assert!(!detect(&lex, &a, "").unwrap());
        assert!(detect(&lex, &"Farmer".into(), "x").is_err());
    }

    #[test]
    fn multi_word_triggers() {
        let lex = default_lexicon(Nationality, [&TypeId::new("UnitedKingdom")]).unwrap();
        let uk: TypeId = "UnitedKingdom".into();
        assert!(detect(&lex, &uk, "born in the United  Kingdom.").unwrap());
        assert!(!detect(&lex, &uk, "the united states kingdom").unwrap());
    }

    #[test]
    fn refine_branches() {
        assert_eq!(refine(3, Profession, true, true).unwrap(), 5);
        assert_eq!(refine(6, Nationality, false, false).unwrap(), 2);
        assert_eq!(refine(6, Profession, false, false).unwrap(), 6);
        assert_eq!(refine(6, Profession, true, true).unwrap(), 6);
        assert_eq!(refine(3, Nationality, true, true).unwrap(), 5);
        assert_eq!(refine(1, Nationality, false, true).unwrap(), 1);
        assert!(refine(3, Profession, true, false).is_err());
    }

    #[test]
    fn refine_grid_properties() {
        for s in 0..=7u8 {
            for rel in TargetRelation::ALL {
                for (first, desc) in [(false, false), (false, true), (true, true)] {
                    let once = refine(s, rel, first, desc).unwrap();
                    assert_eq!(refine(once, rel, first, desc).unwrap(), once);
                    assert!(once <= 7);
                    if once != s {
                        assert!(once >= 2);
                    }
                    if rel == Profession {
                        assert!(once >= s);
                    }
                }
            }
        }
    }

    #[test]
    fn twd_alone_rules() {
        assert_eq!(twd_alone(Profession, true, true, 1).unwrap(), 5);
        assert_eq!(twd_alone(Profession, false, false, 1).unwrap(), 2);
        let v = twd_alone(Nationality, false, true, 42).unwrap();
        assert!(v == 3 || v == 4);
        assert_eq!(twd_alone(Nationality, false, true, 42).unwrap(), v);
        let fours = (0..10_000u64)
            .filter(|&s| twd_alone(Profession, false, true, s).unwrap() == 4)
            .count();
        assert!((fours as f64 / 1e4 - 0.5).abs() <= 0.02, "{fours}");
    }

    proptest! {
        #[test]
        fn detection_monotone_in_lexicon(text in "[a-z ]{0,40}", extra in "[a-z]{1,6}") {
            let mut lex = actor_lexicon();
            let a: TypeId = "Actor".into();
            let before = detect(&lex, &a, &text).unwrap();
            lex.insert(a.clone(), &extra);
            prop_assert!(!before || detect(&lex, &a, &text).unwrap());
        }
    }
}

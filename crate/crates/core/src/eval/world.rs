//! Deterministic synthetic worlds: persons with weighted types, sentences
//! drawn from per-type vocabularies, descriptions carrying trigger words,
//! and a knowledge graph with per-type relational patterns.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{PersonId, TargetRelation, TypeId};
use crate::seed;
use crate::text::Stoplist;
use crate::trigger::lexicon::{builtin_nationality_names, split_camel_case};

pub const PROFESSIONS: [&str; 12] = [
    "Actor",
    "Singer",
    "Writer",
    "Politician",
    "Farmer",
    "Painter",
    "Engineer",
    "Lawyer",
    "Physician",
    "Journalist",
    "Composer",
    "Athlete",
];

pub const NATIONALITIES: [&str; 12] = [
    "Germany", "France", "Italy", "Spain", "Japan", "Canada", "Brazil", "India", "Mexico", "Sweden", "Norway", "Poland",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldConfig {
    pub seed: u64,
    pub n_persons: usize,
    pub n_professions: usize,
    pub n_nationalities: usize,
    pub max_professions: usize,
    pub max_nationalities: usize,
    /// Decay of secondary type weights; larger means one dominant type.
    pub sharpness: f64,
    pub min_sentences: usize,
    pub max_sentences: usize,
    pub words_per_sentence: usize,
    /// Distinct words per type vocabulary.
    pub topic_words: usize,
    pub filler_words: usize,
    /// Share of sentence words drawn from type vocabularies.
    pub topical_fraction: f64,
    /// Chance that the primary type's trigger is in the first description sentence.
    pub plant_probability: f64,
    /// Chance that a secondary type is named later in the description.
    pub secondary_trigger_probability: f64,
    /// Chance that the primary type is realised as a graph pattern.
    pub pattern_strength: f64,
    /// Fraction of persons with direct type edges in the graph.
    pub direct_edge_fraction: f64,
    pub knows_edges: usize,
    pub dev_fraction: f64,
    pub test_fraction: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            seed: 1,
            n_persons: 600,
            n_professions: 8,
            n_nationalities: 6,
            max_professions: 5,
            max_nationalities: 2,
            sharpness: 1.5,
            min_sentences: 4,
            max_sentences: 16,
            words_per_sentence: 8,
            topic_words: 20,
            filler_words: 80,
            topical_fraction: 0.5,
            plant_probability: 1.0,
            secondary_trigger_probability: 0.7,
            pattern_strength: 0.9,
            direct_edge_fraction: 0.3,
            knows_edges: 2,
            dev_fraction: 0.15,
            test_fraction: 0.15,
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_persons", self.n_persons),
            ("n_professions", self.n_professions),
            ("n_nationalities", self.n_nationalities),
            ("max_professions", self.max_professions),
            ("max_nationalities", self.max_nationalities),
            ("min_sentences", self.min_sentences),
            ("words_per_sentence", self.words_per_sentence),
            ("topic_words", self.topic_words),
            ("filler_words", self.filler_words),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::Config(format!("world {name} must be at least 1")));
            }
        }
        if self.n_professions > PROFESSIONS.len() || self.n_nationalities > NATIONALITIES.len() {
            return Err(Error::Config(format!(
                "worlds support at most {} professions and {} nationalities",
                PROFESSIONS.len(),
                NATIONALITIES.len()
            )));
        }
        if self.max_sentences < self.min_sentences {
            return Err(Error::Config("world max_sentences is below min_sentences".into()));
        }
        let probabilities = [
            ("topical_fraction", self.topical_fraction),
            ("plant_probability", self.plant_probability),
            ("secondary_trigger_probability", self.secondary_trigger_probability),
            ("pattern_strength", self.pattern_strength),
            ("direct_edge_fraction", self.direct_edge_fraction),
            ("dev_fraction", self.dev_fraction),
            ("test_fraction", self.test_fraction),
        ];
        for (name, p) in probabilities {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("world {name} must lie in [0, 1]")));
            }
        }
        if self.dev_fraction + self.test_fraction > 1.0 {
            return Err(Error::Config("world dev and test fractions exceed 1".into()));
        }
        if self.sharpness.is_nan() || self.sharpness < 0.0 {
            return Err(Error::Config("world sharpness must be non-negative".into()));
        }
        Ok(())
    }
}

/// A person's types with gold scores, primary type first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldPerson {
    pub id: PersonId,
    pub professions: Vec<(TypeId, u8)>,
    pub nationalities: Vec<(TypeId, u8)>,
}

impl WorldPerson {
    pub fn types(&self, relation: TargetRelation) -> &[(TypeId, u8)] {
        match relation {
            TargetRelation::Profession => &self.professions,
            TargetRelation::Nationality => &self.nationalities,
        }
    }
}

/// Generated file contents, plus the persons behind them.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub persons: Vec<WorldPerson>,
    pub dev_persons: BTreeSet<PersonId>,
    pub test_persons: BTreeSet<PersonId>,
    pub sentences: String,
    pub descriptions: String,
    pub kg: String,
    pub profession_kb: String,
    pub nationality_kb: String,
    pub profession_dev: String,
    pub profession_test: String,
    pub nationality_dev: String,
    pub nationality_test: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldFiles {
    pub sentences: PathBuf,
    pub descriptions: PathBuf,
    pub kg: PathBuf,
    pub profession_kb: PathBuf,
    pub nationality_kb: PathBuf,
    pub profession_dev: PathBuf,
    pub profession_test: PathBuf,
    pub nationality_dev: PathBuf,
    pub nationality_test: PathBuf,
}

impl WorldFiles {
    pub fn in_dir(dir: &Path) -> Self {
        WorldFiles {
            sentences: dir.join("sentences.tsv"),
            descriptions: dir.join("descriptions.tsv"),
            kg: dir.join("kg.tsv"),
            profession_kb: dir.join("profession.kb"),
            nationality_kb: dir.join("nationality.kb"),
            profession_dev: dir.join("profession.train"),
            profession_test: dir.join("profession.test"),
            nationality_dev: dir.join("nationality.train"),
            nationality_test: dir.join("nationality.test"),
        }
    }

    pub fn kb(&self, relation: TargetRelation) -> &Path {
        match relation {
            TargetRelation::Profession => &self.profession_kb,
            TargetRelation::Nationality => &self.nationality_kb,
        }
    }

    pub fn dev(&self, relation: TargetRelation) -> &Path {
        match relation {
            TargetRelation::Profession => &self.profession_dev,
            TargetRelation::Nationality => &self.nationality_dev,
        }
    }

    pub fn test(&self, relation: TargetRelation) -> &Path {
        match relation {
            TargetRelation::Profession => &self.profession_test,
            TargetRelation::Nationality => &self.nationality_test,
        }
    }
}

impl World {
    pub fn write(&self, dir: &Path) -> Result<WorldFiles> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let files = WorldFiles::in_dir(dir);
        let outputs = [
            (&files.sentences, &self.sentences),
            (&files.descriptions, &self.descriptions),
            (&files.kg, &self.kg),
            (&files.profession_kb, &self.profession_kb),
            (&files.nationality_kb, &self.nationality_kb),
            (&files.profession_dev, &self.profession_dev),
            (&files.profession_test, &self.profession_test),
            (&files.nationality_dev, &self.nationality_dev),
            (&files.nationality_test, &self.nationality_test),
        ];
        for (path, contents) in outputs {
            std::fs::write(path, contents).map_err(|e| Error::io(path.as_path(), e))?;
        }
        Ok(files)
    }
}

fn make_words(n: usize, taken: &mut BTreeSet<String>, stoplist: &Stoplist, rng: &mut seed::Rng) -> Vec<String> {
    const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
    const VOWELS: &[u8] = b"aeiou";
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let syllables = rng.gen_range(2..=3);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push(*CONSONANTS.choose(rng).unwrap() as char);
            w.push(*VOWELS.choose(rng).unwrap() as char);
        }
        if !stoplist.contains(&w) && taken.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

/// Types with gold scores `round(7 * w / sum w)`, where the primary type has
/// weight 1 and the i-th secondary `exp(-sharpness * i) * U(0.5, 1)`.
fn draw_types(pool: &[TypeId], max: usize, sharpness: f64, rng: &mut seed::Rng) -> (Vec<(TypeId, u8)>, Vec<f64>) {
    let k = rng.gen_range(1..=max.min(pool.len()));
    let chosen: Vec<TypeId> = pool.choose_multiple(rng, k).cloned().collect();
    let weights: Vec<f64> = (0..k)
        .map(|i| {
            if i == 0 {
                1.0
            } else {
                (-sharpness * i as f64).exp() * rng.gen_range(0.5..1.0)
            }
        })
        .collect();
    let total: f64 = weights.iter().sum();
    let typed = chosen
        .into_iter()
        .zip(&weights)
        .map(|(t, w)| (t, (7.0 * w / total).round() as u8))
        .collect();
    (typed, weights)
}

fn title_case(term: &str) -> String {
    term.split(' ')
        .map(|w| {
            let mut c = w.chars();
            c.next()
                .map_or(String::new(), |f| f.to_uppercase().collect::<String>() + c.as_str())
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn article(word: &str) -> &'static str {
    if word.starts_with(['a', 'e', 'i', 'o', 'u']) {
        "an"
    } else {
        "a"
    }
}

pub fn generate_world(cfg: &WorldConfig) -> Result<World> {
    cfg.validate()?;
    let mut rng = seed::rng(cfg.seed);
    let stoplist = Stoplist::english();
    let names = builtin_nationality_names();

    let professions: Vec<TypeId> = PROFESSIONS[..cfg.n_professions].iter().map(|&s| TypeId::new(s)).collect();
    let nationalities: Vec<TypeId> = NATIONALITIES[..cfg.n_nationalities].iter().map(|&s| TypeId::new(s)).collect();
    let country_name = |t: &TypeId| {
        names
            .get(t)
            .and_then(|v| v.first())
            .cloned()
            .unwrap_or_else(|| split_camel_case(t.as_str()))
    };
    let country_adjective = |t: &TypeId| {
        names
            .get(t)
            .and_then(|v| v.last())
            .cloned()
            .unwrap_or_else(|| split_camel_case(t.as_str()))
    };

    let mut taken = BTreeSet::new();
    let prof_vocab: Vec<Vec<String>> = professions
        .iter()
        .map(|_| make_words(cfg.topic_words, &mut taken, &stoplist, &mut rng))
        .collect();
    let nat_vocab: Vec<Vec<String>> = nationalities
        .iter()
        .map(|_| make_words(cfg.topic_words, &mut taken, &stoplist, &mut rng))
        .collect();
    let filler = make_words(cfg.filler_words, &mut taken, &stoplist, &mut rng);

    let mut persons = Vec::with_capacity(cfg.n_persons);
    let mut sentences = String::new();
    let mut descriptions = String::new();
    let mut kg = String::new();
    let mut sentence_id = 0u64;

    for t in &professions {
        let _ = writeln!(kg, "Field_{t}\tfieldOf\t{t}");
    }
    for c in &nationalities {
        for k in 0..3 {
            let _ = writeln!(kg, "City_{c}_{k}\tlocatedIn\t{c}");
        }
    }

    for p in 0..cfg.n_persons {
        let id = PersonId::new(&format!("P{p:05}"));
        let (profs, prof_w) = draw_types(&professions, cfg.max_professions, cfg.sharpness, &mut rng);
        let (nats, nat_w) = draw_types(&nationalities, cfg.max_nationalities, cfg.sharpness, &mut rng);
        let prof_idx: Vec<usize> = profs
            .iter()
            .map(|(t, _)| professions.iter().position(|x| x == t).unwrap())
            .collect();
        let nat_idx: Vec<usize> = nats
            .iter()
            .map(|(t, _)| nationalities.iter().position(|x| x == t).unwrap())
            .collect();

        // Associated sentences.
        let prof_pick = WeightedIndex::new(&prof_w).expect("positive weights");
        let nat_pick = WeightedIndex::new(&nat_w).expect("positive weights");
        let n_sent = rng.gen_range(cfg.min_sentences..=cfg.max_sentences);
        for _ in 0..n_sent {
            let pv = &prof_vocab[prof_idx[prof_pick.sample(&mut rng)]];
            let nv = &nat_vocab[nat_idx[nat_pick.sample(&mut rng)]];
            let mut text = id.to_string();
            for _ in 0..cfg.words_per_sentence {
                let r: f64 = rng.gen();
                let w = if r < cfg.topical_fraction * 0.6 {
                    pv.choose(&mut rng).unwrap()
                } else if r < cfg.topical_fraction {
                    nv.choose(&mut rng).unwrap()
                } else {
                    filler.choose(&mut rng).unwrap()
                };
                text.push(' ');
                text.push_str(w);
            }
            text.push('.');
            let _ = writeln!(sentences, "{sentence_id}\t{text}\t{id}:0:{}", id.as_str().len());
            sentence_id += 1;
        }

        // Description.
        let role = if rng.gen_bool(cfg.plant_probability) {
            split_camel_case(profs[0].0.as_str())
        } else {
            "person".to_string()
        };
        let adjective = if rng.gen_bool(cfg.plant_probability) {
            format!("{} ", title_case(&country_adjective(&nats[0].0)))
        } else {
            String::new()
        };
        let lead = if adjective.is_empty() { role.as_str() } else { adjective.as_str() };
        let mut desc = format!("{id} is {} {adjective}{role}.", article(&lead.to_lowercase()));
        let _ = write!(desc, " They were born in {}.", rng.gen_range(1900..2000));
        for (t, _) in &profs[1..] {
            if rng.gen_bool(cfg.secondary_trigger_probability) {
                let term = split_camel_case(t.as_str());
                let _ = write!(desc, " They also worked as {} {term}.", article(&term));
            }
        }
        for (t, _) in &nats[1..] {
            if rng.gen_bool(cfg.secondary_trigger_probability) {
                let _ = write!(desc, " They later lived in {}.", title_case(&country_name(t)));
            }
        }
        let _ = writeln!(descriptions, "{id}\t{desc}");

        // Graph.
        let direct_prof = rng.gen_bool(cfg.direct_edge_fraction);
        let direct_nat = rng.gen_bool(cfg.direct_edge_fraction);
        if rng.gen_bool(cfg.pattern_strength) {
            let _ = writeln!(kg, "{id}\tmemberOf\tField_{}", profs[0].0);
        }
        for (t, _) in &profs {
            if direct_prof {
                let _ = writeln!(kg, "{id}\tprofession\t{t}");
            }
        }
        if rng.gen_bool(cfg.pattern_strength) {
            let _ = writeln!(kg, "{id}\tbornIn\tCity_{}_{}", nats[0].0, rng.gen_range(0..3));
        }
        for (c, _) in &nats {
            if direct_nat {
                let _ = writeln!(kg, "{id}\tnationality\t{c}");
            }
        }
        if cfg.n_persons > 1 {
            for _ in 0..cfg.knows_edges {
                let mut other = rng.gen_range(0..cfg.n_persons - 1);
                if other >= p {
                    other += 1;
                }
                let _ = writeln!(kg, "{id}\tknows\tP{other:05}");
            }
        }

        persons.push(WorldPerson {
            id,
            professions: profs,
            nationalities: nats,
        });
    }

    let mut order: Vec<usize> = (0..persons.len()).collect();
    order.shuffle(&mut rng);
    let n_dev = (cfg.dev_fraction * persons.len() as f64).round() as usize;
    let n_test = ((cfg.test_fraction * persons.len() as f64).round() as usize).min(persons.len() - n_dev);
    let dev_persons: BTreeSet<PersonId> = order[..n_dev].iter().map(|&i| persons[i].id.clone()).collect();
    let test_persons: BTreeSet<PersonId> = order[n_dev..n_dev + n_test].iter().map(|&i| persons[i].id.clone()).collect();

    let kb_of = |rel: TargetRelation| {
        let mut s = String::new();
        for p in &persons {
            let sorted: BTreeSet<&TypeId> = p.types(rel).iter().map(|(t, _)| t).collect();
            for t in sorted {
                let _ = writeln!(s, "{}\t{t}", p.id);
            }
        }
        s
    };
    let gold_of = |rel: TargetRelation, subset: &BTreeSet<PersonId>| {
        let mut s = String::new();
        for p in persons.iter().filter(|p| subset.contains(&p.id)) {
            let mut sorted: Vec<&(TypeId, u8)> = p.types(rel).iter().collect();
            sorted.sort();
            for (t, g) in sorted {
                let _ = writeln!(s, "{}\t{t}\t{g}", p.id);
            }
        }
        s
    };

    Ok(World {
        profession_kb: kb_of(TargetRelation::Profession),
        nationality_kb: kb_of(TargetRelation::Nationality),
        profession_dev: gold_of(TargetRelation::Profession, &dev_persons),
        profession_test: gold_of(TargetRelation::Profession, &test_persons),
        nationality_dev: gold_of(TargetRelation::Nationality, &dev_persons),
        nationality_test: gold_of(TargetRelation::Nationality, &test_persons),
        persons,
        dev_persons,
        test_persons,
        sentences,
        descriptions,
        kg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_descriptions, parse_gold, parse_kb, parse_sentences, parse_triples};
    use crate::trigger::{default_lexicon, detect, split_first_sentence, Abbreviations};

    fn small() -> WorldConfig {
        WorldConfig {
            n_persons: 80,
            ..WorldConfig::default()
        }
    }

    #[test]
    fn files_parse() {
        let w = generate_world(&small()).unwrap();
        let p = Path::new("world");
        let idx = parse_sentences(&w.sentences, p, &Stoplist::english(), None).unwrap();
        assert_eq!(idx.texts.len(), 80);
        assert_eq!(parse_descriptions(&w.descriptions, p).unwrap().len(), 80);
        assert!(!parse_triples(&w.kg, p).unwrap().is_empty());
        assert!(!parse_kb(&w.profession_kb, p, TargetRelation::Profession).unwrap().is_empty());
        let dev = parse_gold(&w.profession_dev, p).unwrap();
        let test = parse_gold(&w.profession_test, p).unwrap();
        assert!(!dev.is_empty() && !test.is_empty());
        let dev_p: BTreeSet<_> = dev.iter().map(|g| &g.person).collect();
        assert!(test.iter().all(|g| !dev_p.contains(&g.person)));
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = generate_world(&small()).unwrap();
        let b = generate_world(&small()).unwrap();
        assert_eq!(a, b);
        let c = generate_world(&WorldConfig { seed: 2, ..small() }).unwrap();
        assert_ne!(a.sentences, c.sentences);
    }

    #[test]
    fn gold_in_range_and_primary_maximal() {
        let w = generate_world(&WorldConfig {
            n_persons: 300,
            ..WorldConfig::default()
        })
        .unwrap();
        for p in &w.persons {
            for rel in TargetRelation::ALL {
                let types = p.types(rel);
                assert!(types.iter().all(|(_, g)| *g <= 7));
                assert!(types.iter().all(|(_, g)| *g <= types[0].1));
            }
        }
    }

    #[test]
    fn infinite_sharpness_gives_seven() {
        let w = generate_world(&WorldConfig {
            sharpness: f64::INFINITY,
            ..small()
        })
        .unwrap();
        for p in &w.persons {
            assert_eq!(p.professions[0].1, 7);
            assert!(p.professions[1..].iter().all(|(_, g)| *g == 0));
        }
    }

    #[test]
    fn planted_triggers_found_in_first_sentence() {
        let w = generate_world(&small()).unwrap();
        let descs = parse_descriptions(&w.descriptions, Path::new("d")).unwrap();
        let abbr = Abbreviations::english();
        for rel in TargetRelation::ALL {
            let types: Vec<TypeId> = w.persons.iter().flat_map(|p| p.types(rel).iter().map(|(t, _)| t.clone())).collect();
            let lex = default_lexicon(rel, &types).unwrap();
            for p in &w.persons {
                let (first, _) = split_first_sentence(&descs[&p.id], &abbr);
                assert!(detect(&lex, &p.types(rel)[0].0, first).unwrap(), "{} {rel}: {first}", p.id);
                for (t, _) in &p.types(rel)[1..] {
                    assert!(!detect(&lex, t, first).unwrap(), "{} {t}: {first}", p.id);
                }
            }
        }
    }

    #[test]
    fn invalid_config() {
        assert!(generate_world(&WorldConfig { n_persons: 0, ..small() }).is_err());
        assert!(generate_world(&WorldConfig {
            plant_probability: 1.5,
            ..small()
        })
        .is_err());
    }
}

//! Benchmark fixtures: a generated world parsed into memory.

use std::path::Path;

use triplescore::corpus::{self, KbAssertion, SentenceIndex};
use triplescore::eval::{generate_world, World, WorldConfig};
use triplescore::path_ranking::{build_graph, KbGraph};
use triplescore::text::Stoplist;
use triplescore::TargetRelation;

pub struct Fixture {
    pub world: World,
    pub index: SentenceIndex,
    pub kb: Vec<KbAssertion>,
    pub graph: KbGraph,
}

pub fn fixture(n_persons: usize) -> Fixture {
    let world = generate_world(&WorldConfig {
        n_persons,
        ..WorldConfig::default()
    })
    .expect("valid world config");
    let here = Path::new("<generated>");
    let index = corpus::parse_sentences(&world.sentences, here, &Stoplist::english(), None).expect("world sentences parse");
    let kb = corpus::parse_kb(&world.profession_kb, here, TargetRelation::Profession).expect("world kb parses");
    let graph = build_graph(&corpus::parse_triples(&world.kg, here).expect("world graph parses"));
    Fixture { world, index, kb, graph }
}

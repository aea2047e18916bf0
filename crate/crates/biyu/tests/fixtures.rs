//! Pins the committed fixtures to the code: config files must equal the
//! built-in defaults, the lexicon must segment the demo corpus as
//! documented, the PSU-format sample must load with its authored
//! counts, and the digest-keyed demo stub must actually drive protocol
//! D over the demo corpus. Regenerate derived fixtures with
//! `cargo run -p biyu --example gen_fixtures` after engine changes.

use std::path::PathBuf;

use biyu::cachestore::FileCacheStore;
use biyu::corpus;
use biyu::files;
use biyu::runner;
use biyu::StubFixtureFile;
use biyu_core::dataset::{stats, DatasetName, LabelType};
use biyu_core::gateway::{default_schemas, default_templates, Backend, Gateway};
use biyu_core::protocol::{Label, ProtocolConfig, ProtocolId, ProtocolResources};
use biyu_core::protocols::simile;
use biyu_core::textprep::{pos_tag, segment};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

#[test]
fn config_fixtures_match_builtin_defaults() {
    for protocol in ProtocolId::ALL {
        let path = fixtures().join(format!(
            "configs/protocol_{}.json",
            protocol.as_str().to_lowercase()
        ));
        let config = biyu::configio::load_config(&path).unwrap();
        assert_eq!(
            config,
            ProtocolConfig::default_for(protocol),
            "{} drifted from the built-in default; regenerate fixtures",
            path.display()
        );
    }
}

#[test]
fn core_marker_config_is_a_documented_reduction() {
    let path = fixtures().join("configs/protocol_d_core.json");
    let config = biyu::configio::load_config(&path).unwrap();
    assert_eq!(config.protocol, ProtocolId::D);
    assert_eq!(config.version, "d-core-1.0.0");
    assert_eq!(config.markers.len(), 6);
    assert!(!config.markers.contains(&"宛如".to_string()));
    assert!(!config.markers.contains(&"如".to_string()));
}

#[test]
fn marker_file_matches_the_default_lexicon() {
    let markers = files::load_markers(&fixtures().join("markers.txt")).unwrap();
    assert_eq!(markers, simile::default_markers());
    assert_eq!(markers.len(), 15);
}

#[test]
fn lexicon_loads_and_segments_the_demo_sentences() {
    let lexicon = files::load_lexicon(&fixtures().join("lexicon.tsv")).unwrap();
    assert!(lexicon.len() > 2000, "lexicon unexpectedly small");

    let expect: &[(&str, &[&str])] = &[
        ("他的话像一把刀。", &["他", "的", "话", "像", "一把", "刀", "。"]),
        ("人生如梦。", &["人生", "如", "梦", "。"]),
        ("这座城市宛如一幅画。", &["这座", "城市", "宛如", "一幅", "画", "。"]),
        ("教训很深刻。", &["教训", "很", "深刻", "。"]),
    ];
    for (text, surfaces) in expect {
        let toks = pos_tag(segment(text, &lexicon), &lexicon);
        let got: Vec<&str> = toks.iter().map(|t| t.surface.as_str()).collect();
        assert_eq!(&got, surfaces, "segmentation drifted for {text}");
        assert!(toks.iter().all(|t| t.char_start < t.char_end));
    }
}

#[test]
fn dictionary_loads_with_core_senses() {
    let dict = files::load_dictionary(&fixtures().join("dictionary.tsv")).unwrap();
    assert!(dict.len() >= 100);
    assert!(dict.get("深").unwrap().contains("距离"));
    assert!(dict.get("梦").unwrap().contains("睡眠"));
}

#[test]
fn psu_sample_imports_with_authored_counts() {
    // 20 blocks, 105 tokens, 17 MRW / 86 literal / 2 MFlag by hand
    // count at authoring time.
    let instances = corpus::import(
        DatasetName::PsuCmc,
        &fixtures().join("corpora/psu_cmc_sample.txt"),
    )
    .unwrap();
    assert_eq!(instances.len(), 20);
    let s = stats(&instances, LabelType::Token);
    assert_eq!(s.total, 105);
    assert_eq!(s.metaphor, 17);
    assert_eq!(s.literal, 86);
    assert_eq!(s.other, 2);
    let registers: std::collections::BTreeSet<_> = instances
        .iter()
        .filter_map(|i| i.register.clone())
        .collect();
    assert_eq!(registers.len(), 3);
}

#[test]
fn demo_corpus_loads_at_sentence_level() {
    let instances = corpus::load_unified(
        &fixtures().join("corpora/demo_sentences.jsonl"),
        LabelType::Sentence,
    )
    .unwrap();
    assert_eq!(instances.len(), 12);
    let s = stats(&instances, LabelType::Sentence);
    assert_eq!(s.metaphor, 7);
    assert_eq!(s.literal, 5);
}

#[test]
fn demo_stub_drives_protocol_d_over_the_demo_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let table = StubFixtureFile::load(&fixtures().join("stub/demo_d.json"))
        .unwrap()
        .into_table()
        .unwrap();
    let templates = default_templates();
    let schemas = default_schemas();
    let store = FileCacheStore::open(dir.path()).unwrap();
    let gateway = Gateway::new(&templates, &schemas, &store, Backend::Stub(&table));
    let config = ProtocolConfig::default_for(ProtocolId::D);
    let instances = corpus::load_unified(
        &fixtures().join("corpora/demo_sentences.jsonl"),
        LabelType::Sentence,
    )
    .unwrap();
    let run = runner::run_dataset(
        &config,
        &ProtocolResources::default(),
        &instances,
        LabelType::Sentence,
        &biyu_core::textprep::Lexicon::new(),
        &gateway,
    )
    .unwrap();
    let labels: Vec<(String, Label)> = run
        .records
        .iter()
        .map(|r| (r.source_id.clone(), r.decision.label))
        .collect();
    let expected = [
        ("s01", Label::Metaphorical), // words-as-knife, cross-domain
        ("s02", Label::Literal),      // same-domain comparison
        ("s03", Label::Literal),      // apple vs apple
        ("s04", Label::Metaphorical), // life-as-dream
        ("s05", Label::Metaphorical), // city-as-painting
        ("s06", Label::Literal),      // marker-free: D cannot see it
        ("s07", Label::Literal),
        ("s08", Label::Literal), // marker-free metaphor: D misses it
        ("s09", Label::Literal),
        ("s10", Label::Literal),
        ("s11", Label::Metaphorical), // heart-as-sea
        ("s12", Label::Literal),
    ];
    for ((id, label), (want_id, want)) in labels.iter().zip(expected) {
        assert_eq!(id, want_id);
        assert_eq!(label, &want, "unexpected label for {id}");
    }
    // No abstentions: the committed stub covers every exchange.
    assert!(run.records.iter().all(|r| r.decision.label != Label::Abstain));
}

#[test]
fn demo_tokens_fixture_is_valid() {
    let instances = corpus::load_unified(
        &fixtures().join("corpora/demo_tokens.jsonl"),
        LabelType::Token,
    )
    .unwrap();
    assert_eq!(instances.len(), 4);
}

//! Regenerates the derived fixtures under fixtures/: the protocol config
//! files and the digest-keyed stub response table for the demo corpus.
//! Run from the workspace root:
//!
//! ```text
//! cargo run -p biyu --example gen_fixtures
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use biyu_core::gateway::cache_key;
use biyu_core::protocol::{ProtocolConfig, ProtocolId};
use biyu_core::protocols::simile;
use biyu_core::textprep::Sentence;

fn main() {
    let root = Path::new("fixtures");
    assert!(
        root.is_dir(),
        "run from the workspace root (fixtures/ not found)"
    );

    for protocol in ProtocolId::ALL {
        let config = ProtocolConfig::default_for(protocol);
        let path = root.join(format!(
            "configs/protocol_{}.json",
            protocol.as_str().to_lowercase()
        ));
        biyu::configio::save_config(&path, &config).unwrap();
        println!("wrote {}", path.display());
    }

    // Reduced marker set for the editability worked example: the core
    // markers minus the bare 如 (so 宛如 sentences stay untouched until
    // the patch adds 宛如 itself).
    let mut core = ProtocolConfig::default_for(ProtocolId::D);
    core.version = "d-core-1.0.0".to_string();
    core.markers = ["像", "似", "仿佛", "好像", "犹如", "如同"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let path = root.join("configs/protocol_d_core.json");
    biyu::configio::save_config(&path, &core).unwrap();
    println!("wrote {}", path.display());

    write_demo_stub(root);
}

/// Digest-keyed stub responses covering protocol D over the demo
/// corpus: every (sentence, marker) extraction plus the domain
/// assignment per extracted pair.
fn write_demo_stub(root: &Path) {
    let config = ProtocolConfig::default_for(ProtocolId::D);
    // sentence text -> (tenor, vehicle, tenor_domain, vehicle_domain)
    let cases: &[(&str, &str, &str, &str, &str)] = &[
        ("他的话像一把刀。", "他的话", "一把刀", "ABSTRACT", "OBJECT"),
        ("她像她妈妈。", "她", "她妈妈", "HUMAN", "HUMAN"),
        (
            "这个苹果像那个苹果一样红。",
            "这个苹果",
            "那个苹果",
            "OBJECT",
            "OBJECT",
        ),
        ("人生如梦。", "人生", "梦", "ABSTRACT", "EVENT"),
        ("这座城市宛如一幅画。", "这座城市", "一幅画", "PLACE", "OBJECT"),
        (
            "他的心像大海一样宽广。",
            "他的心",
            "大海",
            "BODY",
            "NATURAL_PHENOMENON",
        ),
    ];

    let mut digests: BTreeMap<String, String> = BTreeMap::new();
    for (text, tenor, vehicle, tenor_domain, vehicle_domain) in cases {
        let sentence = Sentence::untokenized("demo", *text);
        let markers = simile::detect_markers(&sentence.text, &config.markers);
        assert!(!markers.is_empty(), "no markers in {text}");
        for marker in &markers {
            let req = simile::extract_request(&config, &sentence.text, &marker.marker).unwrap();
            digests.insert(
                cache_key(&req).to_hex(),
                format!("tenor: {tenor}\nvehicle: {vehicle}\n"),
            );
        }
        let req = simile::domains_request(&config, tenor, vehicle).unwrap();
        digests.insert(
            cache_key(&req).to_hex(),
            format!("tenor_domain: {tenor_domain}\nvehicle_domain: {vehicle_domain}\n"),
        );
    }

    let fixture = biyu::StubFixtureFile {
        templates: BTreeMap::new(),
        digests,
    };
    let path = root.join("stub/demo_d.json");
    std::fs::write(&path, serde_json::to_string_pretty(&fixture).unwrap() + "\n").unwrap();
    println!("wrote {}", path.display());
}

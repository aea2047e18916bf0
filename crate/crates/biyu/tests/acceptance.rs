//! Acceptance suite. Each test covers one release criterion at its
//! stated tolerance and prints one PASS line; oracles are independent
//! re-implementations living inside this file.
//!
//! The headline corpus scores require licensed corpora plus a live
//! model, so the final criterion is optional: it runs only when
//! BIYU_CORPORA_DIR points at the real corpora and prints an explicit
//! SKIP notice otherwise.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use biyu::cachestore::FileCacheStore;
use biyu::configio::ConfigPatchFile;
use biyu::corpus;
use biyu::runner;
use biyu::StubFixtureFile;
use biyu_core::audit::{determinism_check, score_rationales, RationaleJudgment, Verdict};
use biyu_core::dataset::{
    sample_indices, to_sentence_level, GoldInstance, LabelType, SentenceLabel, TokenLabel,
};
use biyu_core::gateway::{
    default_schemas, default_templates, Backend, Gateway, LLMRequest, MemoryStore, RuleTable,
};
use biyu_core::metrics::{
    band, baseline_majority, baseline_random, bootstrap_f1, cohen_kappa, prf1, span_partial_f1,
    MatchCriterion, Outcome, DEFAULT_BOOTSTRAP_ITERATIONS,
};
use biyu_core::protocol::{
    run_protocol, Label, ProtocolConfig, ProtocolId, ProtocolResources,
};
use biyu_core::protocols::{mapping, mip, simile, valence, DomainLabel, Valence};
use biyu_core::rng::SplitMix64;
use biyu_core::textprep::{CharSpan, Lexicon, Pos, Sentence};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn pass(n: u32, name: &str) {
    println!("ACCEPTANCE {n:02} {name}: PASS");
}

// ---------------------------------------------------------------------
// Synthetic fixtures
// ---------------------------------------------------------------------

/// Character pool for synthetic sentences; every character is a real
/// noun so a pool lexicon can tag them all as content words.
const POOL: [char; 12] = [
    '山', '海', '树', '花', '鸟', '马', '灯', '桥', '雪', '星', '墙', '河',
];

fn pool() -> Vec<char> {
    POOL.to_vec()
}

/// Deterministic synthetic sentences: `n` total, the first
/// `with_marker` of the form X像Y。, the rest XYZ。 with distinct pool
/// chars and no comparison markers.
fn synthetic_sentences(n: usize, with_marker: usize) -> Vec<Sentence> {
    let pool = pool();
    let mut rng = SplitMix64::new(20_240_817);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Three distinct pool characters.
        let a = pool[rng.next_below(pool.len() as u64) as usize];
        let mut b = a;
        while b == a {
            b = pool[rng.next_below(pool.len() as u64) as usize];
        }
        let mut c = a;
        while c == a || c == b {
            c = pool[rng.next_below(pool.len() as u64) as usize];
        }
        let text = if i < with_marker {
            format!("{a}像{b}。")
        } else {
            format!("{a}{b}{c}。")
        };
        out.push(Sentence::untokenized(format!("syn{i:04}"), text));
    }
    out
}

fn pool_lexicon() -> Lexicon {
    Lexicon::from_entries(pool().into_iter().map(|c| (c.to_string(), 1000u64, Pos::Noun)))
}

fn domain_for(c: char) -> &'static str {
    let all = DomainLabel::ALL;
    all[(c as usize) % all.len()].as_str()
}

/// Deterministic rule table answering every protocol template from the
/// request slots alone.
fn synthetic_rules() -> RuleTable<impl Fn(&LLMRequest) -> Option<String>> {
    RuleTable(|req: &LLMRequest| {
        let slot = |k: &str| req.slot(k).unwrap_or("").to_string();
        let first_char = |s: &str| s.chars().next().unwrap_or('无');
        match req.template_id.as_str() {
            "mip_contextual" => Some(format!("contextual: {}在句中的意思\n", slot("word"))),
            "mip_meanings" => Some(format!(
                "contextual: {w}在句中的意思\nbasic: {w}的基本意思\n",
                w = slot("word")
            )),
            "mip_contrast" => {
                let c = first_char(&slot("word")) as u32;
                let contrasts = if c % 2 == 0 { "yes" } else { "no" };
                let comprehensible = if c % 3 != 0 { "yes" } else { "no" };
                Some(format!(
                    "contrasts: {contrasts}\ncomprehensible: {comprehensible}\n"
                ))
            }
            "mapping_vehicle" => {
                let sentence = slot("sentence");
                let chars: Vec<char> =
                    sentence.chars().filter(|c| !"。像".contains(*c)).collect();
                if (first_char(&sentence) as u32) % 4 == 0 {
                    Some("vehicle:\n".to_string())
                } else {
                    Some(format!("vehicle: {}\n", chars.last().copied().unwrap_or('无')))
                }
            }
            "mapping_tenor" => Some(format!("tenor: {}\n", first_char(&slot("sentence")))),
            "mapping_ground" => {
                let c = first_char(&slot("tenor")) as u32;
                if c % 3 == 0 {
                    Some("ground:\n".to_string())
                } else {
                    Some("ground: 共同的特征\n".to_string())
                }
            }
            "mapping_domains" | "simile_domains" => Some(format!(
                "tenor_domain: {}\nvehicle_domain: {}\n",
                domain_for(first_char(&slot("tenor"))),
                domain_for(first_char(&slot("vehicle")))
            )),
            "valence_overall" => Some("valence: mixed\n".to_string()),
            "valence_incongruity" => {
                let sentence = slot("sentence");
                let c = first_char(&sentence) as u32;
                if c % 2 == 0 {
                    Some(format!(
                        "expression: {}\nliteral: neutral\nfigurative: negative\n",
                        first_char(&sentence)
                    ))
                } else {
                    Some("expression:\n".to_string())
                }
            }
            "valence_resolution" => {
                let c = first_char(&slot("expression")) as u32;
                Some(format!(
                    "resolvable: {}\n",
                    if c % 3 == 0 { "yes" } else { "no" }
                ))
            }
            "simile_extract" => {
                let sentence = slot("sentence");
                let chars: Vec<char> = sentence.chars().collect();
                let marker_at = chars.iter().position(|&c| c == '像')?;
                Some(format!(
                    "tenor: {}\nvehicle: {}\n",
                    chars[..marker_at].iter().collect::<String>(),
                    chars[marker_at + 1..chars.len() - 1].iter().collect::<String>(),
                ))
            }
            _ => None,
        }
    })
}

/// Synthetic PSU-shaped gold labels: 35,745 labels, 3,272 positive,
/// positions drawn deterministically.
fn synthetic_gold() -> Vec<bool> {
    let total = 35_745;
    let positives = 3_272;
    let idx = sample_indices(total, positives, 91).expect("n <= len");
    let mut gold = vec![false; total];
    for i in idx {
        gold[i] = true;
    }
    gold
}

// ---------------------------------------------------------------------
// Criterion 1: determinism
// ---------------------------------------------------------------------

#[test]
fn acceptance_01_determinism() {
    let started = Instant::now();
    let templates = default_templates();
    let schemas = default_schemas();
    let rules = synthetic_rules();
    let resources = ProtocolResources::default();
    let lexicon = pool_lexicon();

    // Engine-level: each protocol twice over a 120-sentence stub-backed
    // fixture; fraction must be exactly 1.0.
    let mut sentences = synthetic_sentences(120, 30);
    // Protocol A needs tokenized sentences.
    for s in &mut sentences {
        *s = Sentence::tokenized(s.source_id.clone(), s.text.clone(), &lexicon);
    }
    for protocol in ProtocolId::ALL {
        let config = ProtocolConfig::default_for(protocol);
        let store = MemoryStore::new();
        let report = determinism_check(&config, &resources, &sentences, |_pass| {
            Gateway::new(&templates, &schemas, &store, Backend::Stub(&rules))
        });
        assert_eq!(report.instances_compared, 120);
        assert_eq!(
            report.fraction, 1.0,
            "protocol {protocol} not deterministic: {:?}",
            report.mismatched
        );
    }

    // CLI-level: record a cache, run once, rerun from the manifest, and
    // require byte-identical outputs, for every protocol.
    let dir = tempfile::tempdir().unwrap();
    let corpus_path = dir.path().join("synthetic.jsonl");
    let instances: Vec<GoldInstance> = sentences
        .iter()
        .map(|s| GoldInstance {
            source_id: s.source_id.clone(),
            text: s.text.clone(),
            register: None,
            tokens: None,
            token_labels: None,
            sentence_label: Some(SentenceLabel::Literal),
            spans: None,
        })
        .collect();
    corpus::save_unified(&corpus_path, &instances).unwrap();
    let lexicon_path = dir.path().join("pool_lexicon.tsv");
    let lexicon_lines: String = pool()
        .into_iter()
        .map(|c| format!("{c}\t1000\tNOUN\n"))
        .collect();
    std::fs::write(&lexicon_path, lexicon_lines).unwrap();

    for protocol in ProtocolId::ALL {
        let tag = protocol.as_str().to_lowercase();
        let cache_dir = dir.path().join(format!("cache_{tag}"));
        // Record all exchanges by running through the rule stub once.
        {
            let config = ProtocolConfig::default_for(protocol);
            let store = FileCacheStore::open(&cache_dir).unwrap();
            let gateway = Gateway::new(&templates, &schemas, &store, Backend::Stub(&rules));
            runner::run_dataset(
                &config,
                &resources,
                &instances,
                LabelType::Sentence,
                &lexicon,
                &gateway,
            )
            .unwrap();
        }
        let out1 = dir.path().join(format!("out1_{tag}"));
        let out2 = dir.path().join(format!("out2_{tag}"));
        let run = Command::new(env!("CARGO_BIN_EXE_biyu"))
            .args([
                "run",
                "--protocol",
                protocol.as_str(),
                "--label-type",
                "sentence",
                "--path",
                corpus_path.to_str().unwrap(),
                "--backend",
                "replay",
                "--cache-dir",
                cache_dir.to_str().unwrap(),
                "--lexicon",
                lexicon_path.to_str().unwrap(),
                "--out",
                out1.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(
            run.status.success(),
            "cli run failed for {protocol}: {}",
            String::from_utf8_lossy(&run.stdout)
        );
        let rerun = Command::new(env!("CARGO_BIN_EXE_biyu"))
            .args([
                "run",
                "--from-manifest",
                out1.join("manifest.json").to_str().unwrap(),
                "--out",
                out2.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(rerun.status.success());
        for file in ["predictions.jsonl", "rationales.json"] {
            assert_eq!(
                std::fs::read(out1.join(file)).unwrap(),
                std::fs::read(out2.join(file)).unwrap(),
                "{file} diverged for protocol {protocol}"
            );
        }
    }

    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "determinism criterion took {elapsed:?}, budget is 10s"
    );
    pass(1, "determinism fraction 1.0 and byte-identical reruns");
}

// ---------------------------------------------------------------------
// Criteria 2 and 3: baselines on PSU-shaped synthetic gold
// ---------------------------------------------------------------------

#[test]
fn acceptance_02_majority_baseline_zero_f1() {
    let gold = synthetic_gold();
    assert_eq!(gold.len(), 35_745);
    assert_eq!(gold.iter().filter(|&&g| g).count(), 3_272);
    let preds = baseline_majority(&gold);
    let report = prf1(&preds, &gold).unwrap();
    assert_eq!(report.f1, 0.0);
    assert_eq!(report.true_pos, 0);
    pass(2, "majority baseline F1 == 0.000 on 9.2% prior");
}

#[test]
fn acceptance_03_random_baseline_mean_f1() {
    let started = Instant::now();
    let gold = synthetic_gold();
    let mut sum = 0.0;
    let seeds = 50;
    for seed in 0..seeds {
        let preds = baseline_random(gold.len(), 0.092, seed).unwrap();
        sum += prf1(&preds, &gold).unwrap().f1;
    }
    let mean = sum / seeds as f64;
    assert!(
        (0.072..=0.107).contains(&mean),
        "mean random-baseline F1 {mean} outside [0.072, 0.107]"
    );
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}, budget 30s");
    pass(3, "random baseline mean F1 within 0.087 +/- 0.015");
}

// ---------------------------------------------------------------------
// Criterion 4: kappa against a brute-force contingency oracle
// ---------------------------------------------------------------------

/// Independent kappa: contingency table, observed agreement, expected
/// agreement from marginal products.
fn kappa_oracle(a: &[u8], b: &[u8]) -> f64 {
    let n = a.len() as f64;
    let mut table = BTreeMap::new();
    let mut ma = BTreeMap::new();
    let mut mb = BTreeMap::new();
    for (x, y) in a.iter().zip(b) {
        *table.entry((*x, *y)).or_insert(0usize) += 1;
        *ma.entry(*x).or_insert(0usize) += 1;
        *mb.entry(*y).or_insert(0usize) += 1;
    }
    let p_o: f64 = table
        .iter()
        .filter(|((x, y), _)| x == y)
        .map(|(_, &c)| c as f64 / n)
        .sum();
    let mut p_e = 0.0;
    for (label, &ca) in &ma {
        if let Some(&cb) = mb.get(label) {
            p_e += (ca as f64 / n) * (cb as f64 / n);
        }
    }
    if p_e >= 1.0 {
        return if p_o >= 1.0 { 1.0 } else { 0.0 };
    }
    (p_o - p_e) / (1.0 - p_e)
}

#[test]
fn acceptance_04_kappa_engine_correctness() {
    let mut rng = SplitMix64::new(44);
    for case in 0..1000 {
        let len = 1 + rng.next_below(60) as usize;
        let alphabet = 1 + rng.next_below(4) as u8;
        let a: Vec<u8> = (0..len).map(|_| rng.next_below(alphabet as u64) as u8).collect();
        let b: Vec<u8> = (0..len).map(|_| rng.next_below(alphabet as u64) as u8).collect();
        let ours = cohen_kappa(&a, &b).unwrap();
        let oracle = kappa_oracle(&a, &b);
        assert!(
            (ours - oracle).abs() <= 1e-12,
            "case {case}: {ours} vs oracle {oracle}"
        );
        let sym = cohen_kappa(&b, &a).unwrap();
        assert!((ours - sym).abs() <= 1e-12, "case {case}: asymmetric");
        assert_eq!(cohen_kappa(&a, &a).unwrap(), 1.0, "case {case}: diagonal");
    }
    assert_eq!(band(0.986), "almost perfect");
    assert_eq!(band(0.001), "slight");
    pass(4, "kappa matches contingency oracle on 1000 fixtures");
}

// ---------------------------------------------------------------------
// Criterion 5: protocol decision rules, exhaustively
// ---------------------------------------------------------------------

#[test]
fn acceptance_05_protocol_truth_tables() {
    // Protocol A: 4 flag combinations.
    for (contrasts, comprehensible, want) in [
        (true, true, Label::Metaphorical),
        (true, false, Label::Literal),
        (false, true, Label::Literal),
        (false, false, Label::Literal),
    ] {
        let pair = mip::MeaningPair {
            token_index: 0,
            word: "深".into(),
            contextual: "c".into(),
            basic: "b".into(),
            basic_source: mip::BasicSource::LlmEnumerated,
            contrasts,
            comprehensible,
            implicit: None,
        };
        assert_eq!(mip::classify(&pair), want);
    }

    // Protocol B: absent, incoherent, coherent.
    let triple = mapping::ConceptTriple {
        tenor: CharSpan::new(2, 3),
        tenor_text: "话".into(),
        vehicle: CharSpan::new(6, 7),
        vehicle_text: "刀".into(),
        ground: "锋利".into(),
        tenor_domain: DomainLabel::Abstract,
        vehicle_domain: DomainLabel::Object,
        coherent: false,
    };
    assert_eq!(mapping::classify(None), Label::Literal);
    assert_eq!(mapping::classify(Some(&triple)), Label::Literal);
    let coherent = mapping::validate_triple(triple);
    assert_eq!(mapping::classify(Some(&coherent)), Label::Metaphorical);

    // Protocol C: 4 combinations of (incongruity present, resolvable).
    for (present, resolvable, want) in [
        (true, true, Label::Metaphorical),
        (true, false, Label::Literal),
        (false, true, Label::Literal),
        (false, false, Label::Literal),
    ] {
        let assessment = valence::ValenceAssessment {
            sentence_valence: Valence::Mixed,
            incongruent: present.then(|| valence::IncongruentSpan {
                span: CharSpan::new(0, 1),
                text: "冷".into(),
                literal: Valence::Neutral,
                figurative: Valence::Negative,
            }),
            resolvable,
        };
        assert_eq!(valence::classify(&assessment), want);
    }

    // Protocol D: 2 cross-domain outcomes.
    let construct = |cross: bool| simile::ComparisonConstruct {
        marker: simile::MarkerHit {
            marker: "像".into(),
            span: CharSpan::new(1, 2),
        },
        tenor: CharSpan::new(0, 1),
        tenor_text: "她".into(),
        vehicle: CharSpan::new(2, 5),
        vehicle_text: "她妈妈".into(),
        tenor_domain: Some(DomainLabel::Human),
        vehicle_domain: Some(if cross {
            DomainLabel::Object
        } else {
            DomainLabel::Human
        }),
        cross_domain: Some(cross),
    };
    assert_eq!(simile::classify(&construct(true)), Label::Metaphorical);
    assert_eq!(simile::classify(&construct(false)), Label::Literal);

    // Full-pipeline checks under the committed stub fixtures: the
    // words-as-knife sentence is metaphorical, the looks-like-her-mother
    // sentence is a literal same-domain comparison.
    let table = StubFixtureFile::load(&fixtures().join("stub/demo_d.json"))
        .unwrap()
        .into_table()
        .unwrap();
    let templates = default_templates();
    let schemas = default_schemas();
    let store = MemoryStore::new();
    let gateway = Gateway::new(&templates, &schemas, &store, Backend::Stub(&table));
    let config = ProtocolConfig::default_for(ProtocolId::D);
    let resources = ProtocolResources::default();

    let knife = Sentence::untokenized("s01", "他的话像一把刀。");
    let run = run_protocol(&config, &resources, &knife, &gateway);
    assert_eq!(run.decisions[0].label, Label::Metaphorical);

    let mother = Sentence::untokenized("s02", "她像她妈妈。");
    let run = run_protocol(&config, &resources, &mother, &gateway);
    assert_eq!(run.decisions[0].label, Label::Literal);

    pass(5, "classify rules exhaustive + committed-fixture examples");
}

// ---------------------------------------------------------------------
// Criterion 6: marker-gated recall bound
// ---------------------------------------------------------------------

#[test]
fn acceptance_06_protocol_d_structural_recall_bound() {
    let sentences = synthetic_sentences(500, 10);
    let templates = default_templates();
    let schemas = default_schemas();
    let store = MemoryStore::new();
    let rules = synthetic_rules();
    let gateway = Gateway::new(&templates, &schemas, &store, Backend::Stub(&rules));
    let config = ProtocolConfig::default_for(ProtocolId::D);
    let resources = ProtocolResources::default();

    let mut metaphorical = 0;
    let mut with_markers = 0;
    for sentence in &sentences {
        if !simile::detect_markers(&sentence.text, &config.markers).is_empty() {
            with_markers += 1;
        }
        let run = run_protocol(&config, &resources, sentence, &gateway);
        if run.decisions[0].label == Label::Metaphorical {
            metaphorical += 1;
        }
    }
    assert_eq!(with_markers, 10, "fixture must contain exactly 10 marker sentences");
    assert!(
        metaphorical <= 10,
        "marker gate violated: {metaphorical} metaphorical decisions"
    );
    pass(6, "protocol D emits <= 10 metaphorical on 10 marker sentences");
}

// ---------------------------------------------------------------------
// Criterion 7: bootstrap against an independent re-implementation
// ---------------------------------------------------------------------

/// Fully independent re-implementation: its own SplitMix64, fork rule,
/// bounded draw, resampling loop, F1, and percentile indices.
fn bootstrap_oracle(
    preds: &[Outcome],
    gold: &[bool],
    iterations: usize,
    seed: u64,
) -> (f64, f64, f64) {
    struct Sm(u64);
    impl Sm {
        fn next(&mut self) -> u64 {
            self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = self.0;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^ (z >> 31)
        }
        fn below(&mut self, n: u64) -> u64 {
            let mut mask = 1u64;
            while mask < n {
                mask = (mask << 1) | 1;
            }
            loop {
                let v = self.next() & mask;
                if v < n {
                    return v;
                }
            }
        }
    }
    fn f1(preds: &[Outcome], gold: &[bool]) -> f64 {
        let mut tp = 0.0;
        let mut fp = 0.0;
        let mut fneg = 0.0;
        for (p, g) in preds.iter().zip(gold) {
            match (*p == Outcome::Positive, *g) {
                (true, true) => tp += 1.0,
                (true, false) => fp += 1.0,
                (false, true) => fneg += 1.0,
                _ => {}
            }
        }
        if tp + fp == 0.0 && tp + fneg == 0.0 {
            return 1.0;
        }
        let p = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let r = if tp + fneg > 0.0 { tp / (tp + fneg) } else { 0.0 };
        if p + r > 0.0 {
            2.0 * p * r / (p + r)
        } else {
            0.0
        }
    }
    let n = preds.len();
    let point = f1(preds, gold);
    let mut stats = Vec::with_capacity(iterations);
    for k in 0..iterations {
        // fork(seed, k): seed SplitMix64 with the first output of the
        // stream at seed + (k+1)*GAMMA.
        let mut base = Sm(seed.wrapping_add((k as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)));
        let mut rng = Sm(base.next());
        let mut p = Vec::with_capacity(n);
        let mut g = Vec::with_capacity(n);
        for _ in 0..n {
            let i = rng.below(n as u64) as usize;
            p.push(preds[i]);
            g.push(gold[i]);
        }
        stats.push(f1(&p, &g));
    }
    stats.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let index = |q: f64| -> usize {
        let product = q * stats.len() as f64;
        let truncated = product as usize;
        let rank = if (truncated as f64) < product {
            truncated + 1
        } else {
            truncated
        };
        rank.clamp(1, stats.len()) - 1
    };
    (point, stats[index(0.025)], stats[index(0.975)])
}

#[test]
fn acceptance_07_bootstrap_oracle_bit_exact() {
    assert_eq!(DEFAULT_BOOTSTRAP_ITERATIONS, 10_000);
    let preds = vec![
        Outcome::Positive,
        Outcome::Negative,
        Outcome::Positive,
        Outcome::Negative,
    ];
    let gold = vec![true, true, false, false];
    let ours = bootstrap_f1(&preds, &gold, 10, 7).unwrap();
    let (point, lo, hi) = bootstrap_oracle(&preds, &gold, 10, 7);
    // Bit-exact: both sides consumed the identical PRNG stream.
    assert_eq!(ours.point_estimate.to_bits(), point.to_bits());
    assert_eq!(ours.ci_low.to_bits(), lo.to_bits());
    assert_eq!(ours.ci_high.to_bits(), hi.to_bits());

    // A second fixture with more iterations, still bit-exact.
    let ours = bootstrap_f1(&preds, &gold, 257, 12345).unwrap();
    let (point, lo, hi) = bootstrap_oracle(&preds, &gold, 257, 12345);
    assert_eq!(
        (ours.point_estimate.to_bits(), ours.ci_low.to_bits(), ours.ci_high.to_bits()),
        (point.to_bits(), lo.to_bits(), hi.to_bits())
    );
    pass(7, "bootstrap bit-exact vs independent re-implementation");
}

// ---------------------------------------------------------------------
// Criterion 8: span metric against a brute-force oracle
// ---------------------------------------------------------------------

fn span_oracle(pred: &[CharSpan], gold: &[CharSpan]) -> (f64, f64, f64) {
    let mut pred = pred.to_vec();
    let mut gold_v = gold.to_vec();
    pred.sort_by_key(|s| (s.start, s.end));
    gold_v.sort_by_key(|s| (s.start, s.end));
    let mut used = vec![false; gold_v.len()];
    let mut matched = 0usize;
    for p in &pred {
        for (i, g) in gold_v.iter().enumerate() {
            let overlap = p.start < g.end && g.start < p.end;
            if !used[i] && overlap {
                used[i] = true;
                matched += 1;
                break;
            }
        }
    }
    if pred.is_empty() && gold_v.is_empty() {
        return (1.0, 1.0, 1.0);
    }
    let precision = if pred.is_empty() {
        0.0
    } else {
        matched as f64 / pred.len() as f64
    };
    let recall = if gold_v.is_empty() {
        0.0
    } else {
        matched as f64 / gold_v.len() as f64
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    (precision, recall, f1)
}

/// Exact-match F1 computed independently for the identical-span check.
fn exact_match_f1(pred: &[CharSpan], gold: &[CharSpan]) -> f64 {
    let mut used = vec![false; gold.len()];
    let mut matched = 0usize;
    for p in pred {
        for (i, g) in gold.iter().enumerate() {
            if !used[i] && p == g {
                used[i] = true;
                matched += 1;
                break;
            }
        }
    }
    if pred.is_empty() && gold.is_empty() {
        return 1.0;
    }
    let precision = if pred.is_empty() {
        0.0
    } else {
        matched as f64 / pred.len() as f64
    };
    let recall = if gold.is_empty() {
        0.0
    } else {
        matched as f64 / gold.len() as f64
    };
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

#[test]
fn acceptance_08_span_metric() {
    let mut rng = SplitMix64::new(808);
    let random_spans = |rng: &mut SplitMix64| -> Vec<CharSpan> {
        let n = rng.next_below(6) as usize;
        (0..n)
            .map(|_| {
                let start = rng.next_below(30) as usize;
                let len = 1 + rng.next_below(8) as usize;
                CharSpan::new(start, start + len)
            })
            .collect()
    };

    for case in 0..200 {
        let pred = random_spans(&mut rng);
        let gold = random_spans(&mut rng);
        let ours = span_partial_f1(&pred, &gold, MatchCriterion::Overlap1).unwrap();
        let (p, r, f1) = span_oracle(&pred, &gold);
        assert!(
            (ours.precision - p).abs() <= 1e-12
                && (ours.recall - r).abs() <= 1e-12
                && (ours.f1 - f1).abs() <= 1e-12,
            "case {case}: ({}, {}, {}) vs oracle ({p}, {r}, {f1})",
            ours.precision,
            ours.recall,
            ours.f1
        );

        // Identical-span sets reduce to exact-match F1.
        let identical = span_partial_f1(&gold, &gold, MatchCriterion::Overlap1).unwrap();
        assert_eq!(identical.f1, exact_match_f1(&gold, &gold));
    }

    // Disjoint fixtures are 0.0.
    let pred = vec![CharSpan::new(0, 2), CharSpan::new(10, 12)];
    let gold = vec![CharSpan::new(4, 6), CharSpan::new(20, 22)];
    assert_eq!(
        span_partial_f1(&pred, &gold, MatchCriterion::Overlap1).unwrap().f1,
        0.0
    );
    pass(8, "span partial F1 matches brute-force oracle on 200 sets");
}

// ---------------------------------------------------------------------
// Criterion 9: sentence-level conversion rule
// ---------------------------------------------------------------------

#[test]
fn acceptance_09_sentence_conversion_rule() {
    let mut rng = SplitMix64::new(909);
    for case in 0..1000 {
        let n = 1 + rng.next_below(12) as usize;
        let labels: Vec<TokenLabel> = (0..n)
            .map(|_| match rng.next_below(3) {
                0 => TokenLabel::Mrw,
                1 => TokenLabel::Literal,
                _ => TokenLabel::MFlag,
            })
            .collect();
        let instance = GoldInstance {
            source_id: format!("conv{case}"),
            text: "字".repeat(n),
            register: None,
            tokens: Some(vec!["字".to_string(); n]),
            token_labels: Some(labels.clone()),
            sentence_label: None,
            spans: None,
        };
        let converted = to_sentence_level(std::slice::from_ref(&instance)).unwrap();
        // Brute-force rule: metaphor iff any token label is MRW; MFlag
        // never triggers.
        let expect = if labels.iter().any(|&l| l == TokenLabel::Mrw) {
            SentenceLabel::Metaphor
        } else {
            SentenceLabel::Literal
        };
        assert_eq!(converted[0].sentence_label, Some(expect), "case {case}");
    }
    pass(9, "sentence conversion matches any-MRW rule on 1000 fixtures");
}

// ---------------------------------------------------------------------
// Criterion 10: rationale scoring
// ---------------------------------------------------------------------

#[test]
fn acceptance_10_rationale_scoring() {
    let mut judgments = Vec::new();
    let mut push = |verdict: Verdict, count: usize, tag: &str| {
        for i in 0..count {
            judgments.push(RationaleJudgment {
                decision_ref: format!("{tag}{i}"),
                verdict,
                judge_id: "j1".to_string(),
            });
        }
    };
    push(Verdict::Correct, 42, "c");
    push(Verdict::PartiallyCorrect, 3, "p");
    push(Verdict::Incorrect, 5, "i");
    let score = score_rationales(&judgments).unwrap();
    assert_eq!(score, 0.87);
    pass(10, "weighted rationale score is exactly 0.87 on the 42/3/5 fixture");
}

// ---------------------------------------------------------------------
// Criterion 11: editability harness
// ---------------------------------------------------------------------

#[test]
fn acceptance_11_editability_harness() {
    let base = biyu::configio::load_config(&fixtures().join("configs/protocol_d_core.json")).unwrap();
    let patch: ConfigPatchFile = serde_json::from_str(
        &std::fs::read_to_string(fixtures().join("patches/add_wanru_marker.json")).unwrap(),
    )
    .unwrap();
    let instances = corpus::load_unified(
        &fixtures().join("corpora/demo_sentences.jsonl"),
        LabelType::Sentence,
    )
    .unwrap();
    let table = StubFixtureFile::load(&fixtures().join("stub/demo_d.json"))
        .unwrap()
        .into_table()
        .unwrap();
    let templates = default_templates();
    let schemas = default_schemas();
    let store = MemoryStore::new();
    let run_trial = |patch: &ConfigPatchFile| {
        biyu::auditio::editability_trial(
            &base,
            patch,
            &["s05".to_string()],
            &instances,
            LabelType::Sentence,
            &Lexicon::new(),
            &ProtocolResources::default(),
            0.01,
            |_pass| Gateway::new(&templates, &schemas, &store, Backend::Stub(&table)),
        )
        .unwrap()
    };

    // The documented marker-addition patch flips its target and does
    // not degrade overall F1 beyond tolerance.
    let report = run_trial(&patch);
    assert!(report.targeted_changed, "patch failed to flip s05");
    assert!(
        report.f1_after >= report.f1_before - 0.01,
        "F1 degraded: {} -> {}",
        report.f1_before,
        report.f1_after
    );
    assert!(report.success);

    // The identity patch changes nothing.
    let identity = ConfigPatchFile {
        base_version: base.version.clone(),
        patch: serde_json::json!({}),
    };
    let report = run_trial(&identity);
    assert!(!report.targeted_changed);
    assert_eq!(report.f1_before, report.f1_after);
    pass(11, "marker patch flips target within tolerance; identity inert");
}

// ---------------------------------------------------------------------
// Criterion 12 (optional): published dataset statistics
// ---------------------------------------------------------------------

#[test]
fn acceptance_12_published_dataset_statistics() {
    let Some(dir) = std::env::var_os("BIYU_CORPORA_DIR") else {
        println!(
            "ACCEPTANCE 12 published dataset statistics: SKIP \
             (BIYU_CORPORA_DIR not set; licensed corpora not present)"
        );
        return;
    };
    let dir = PathBuf::from(dir);
    // Expected layout: one native-format file per corpus.
    let rows: &[(&str, &str, usize, usize, usize, usize)] = &[
        ("PSU_CMC", "psu_cmc.txt", 35_745, 3_272, 32_432, 41),
        ("CMC", "cmc.csv", 8_027, 7_312, 715, 0),
        ("CMDAG", "cmdag.jsonl", 34_463, 34_463, 0, 0),
        ("CHINESE_SIMILE", "chinese_simile.jsonl", 334_069, 144_358, 189_711, 0),
        ("NLPCC2024_T9", "nlpcc2024_t9.jsonl", 35_463, 35_463, 0, 0),
        ("CONFIGURE", "configure.jsonl", 9_010, 4_354, 0, 4_656),
        ("CHINESE_MCORPUS", "chinese_mcorpus.tsv", 745, 480, 265, 0),
    ];
    for (name, file, total, metaphor, literal, other) in rows {
        let dataset = biyu_core::dataset::DatasetName::parse(name).unwrap();
        let path = dir.join(file);
        assert!(path.exists(), "{} missing under BIYU_CORPORA_DIR", path.display());
        let instances = corpus::import(dataset, &path).unwrap();
        let s = biyu_core::dataset::stats(&instances, dataset.label_type());
        assert_eq!(s.total, *total, "{name} total");
        assert_eq!(s.metaphor, *metaphor, "{name} metaphor");
        assert_eq!(s.literal, *literal, "{name} literal");
        assert_eq!(s.other, *other, "{name} other");
    }
    pass(12, "published dataset statistics reproduced");
}

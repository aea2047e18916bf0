//! Run orchestration: executing a protocol over a loaded corpus and
//! writing the prediction, rationale, and manifest files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use biyu_core::gateway::{sha256, CacheStore, Gateway, RequestDigest};
use biyu_core::protocol::{
    run_protocol, serialize_rationales, ProtocolConfig, ProtocolId, ProtocolResources, RunRecord,
    Target,
};
use biyu_core::textprep::{normalize, CharSpan, Lexicon, Sentence};
use biyu_core::dataset::{GoldInstance, LabelType};

use crate::error::{Error, Result};
use crate::predictions::render_predictions;

/// Everything needed to reproduce a run byte-identically in replay mode.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub protocol: ProtocolId,
    pub config_path: String,
    pub config_version: String,
    pub dataset_name: String,
    pub dataset_path: String,
    pub label_type: LabelType,
    pub backend: String,
    pub seed: u64,
    #[serde(default)]
    pub lexicon_path: Option<String>,
    #[serde(default)]
    pub dictionary_path: Option<String>,
    #[serde(default)]
    pub stub_fixtures_path: Option<String>,
    pub cache_dir: String,
    pub out_dir: String,
    pub predictions_file: String,
    pub rationales_file: String,
    /// SHA-256 over the sorted digest hex list of the cache after the
    /// run; pins the exchange set the outputs depend on.
    pub cache_digest_hash: String,
}

pub const PREDICTIONS_FILE: &str = "predictions.jsonl";
pub const RATIONALES_FILE: &str = "rationales.json";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn load_manifest(path: &Path) -> Result<RunManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: 0,
        reason: e.to_string(),
    })
}

pub fn save_manifest(path: &Path, manifest: &RunManifest) -> Result<()> {
    let json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
}

/// Hash pinning the cache contents a run observed.
pub fn cache_digest_hash(store: &dyn CacheStore) -> String {
    let mut digests = store.digests();
    digests.sort_unstable();
    let mut lines = String::new();
    for d in digests {
        lines.push_str(&d.to_hex());
        lines.push('\n');
    }
    RequestDigest(sha256(lines.as_bytes())).to_hex()
}

/// The sentence a protocol run sees for one instance. Token-level work
/// needs a tokenized sentence; sentence/span-level work analyzes the
/// instance text as one unit.
fn sentence_for(
    instance: &GoldInstance,
    protocol: ProtocolId,
    label_type: LabelType,
    lexicon: &Lexicon,
) -> Result<Sentence> {
    let text = normalize(&instance.text);
    if text != instance.text && label_type != LabelType::Sentence {
        return Err(Error::SchemaMismatch(format!(
            "instance {:?}: text is not normalized; re-import the corpus",
            instance.source_id
        )));
    }
    Ok(match protocol {
        ProtocolId::A => Sentence::tokenized(&instance.source_id, text, lexicon),
        _ => Sentence::untokenized(&instance.source_id, text),
    })
}

/// Preprocessed sentences for a whole dataset, in corpus order.
pub fn sentences_for_dataset(
    config: &ProtocolConfig,
    instances: &[GoldInstance],
    label_type: LabelType,
    lexicon: &Lexicon,
) -> Result<Vec<Sentence>> {
    instances
        .iter()
        .map(|inst| sentence_for(inst, config.protocol, label_type, lexicon))
        .collect()
}

/// Output of a dataset run, before any files are written.
pub struct DatasetRun {
    pub records: Vec<RunRecord>,
    /// Char span of each token-target record's token, for the
    /// prediction file.
    pub token_spans: BTreeMap<(String, usize), CharSpan>,
}

/// Runs one protocol over every instance, producing records sorted by
/// (source_id, target index) regardless of input order.
pub fn run_dataset(
    config: &ProtocolConfig,
    resources: &ProtocolResources,
    instances: &[GoldInstance],
    label_type: LabelType,
    lexicon: &Lexicon,
    gateway: &Gateway<'_>,
) -> Result<DatasetRun> {
    let mut records = Vec::new();
    let mut token_spans = BTreeMap::new();
    for instance in instances {
        let sentence = sentence_for(instance, config.protocol, label_type, lexicon)?;
        let run = run_protocol(config, resources, &sentence, gateway);
        for (decision, rationale) in run.decisions.into_iter().zip(run.rationales) {
            if let Target::Token(i) = decision.target {
                let token = &sentence.tokens[i];
                token_spans.insert(
                    (sentence.source_id.clone(), i),
                    CharSpan::new(token.char_start, token.char_end),
                );
            }
            records.push(RunRecord {
                source_id: sentence.source_id.clone(),
                protocol_id: config.protocol,
                config_version: config.version.clone(),
                decision,
                rationale,
            });
        }
    }
    records.sort_by_key(|r| r.sort_key());
    Ok(DatasetRun {
        records,
        token_spans,
    })
}

/// Writes the prediction and rationale files for a finished run.
pub fn write_outputs(out_dir: &Path, run: &DatasetRun) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let predictions = render_predictions(&run.records, |r| {
        r.decision
            .target
            .token_index()
            .and_then(|i| run.token_spans.get(&(r.source_id.clone(), i)).copied())
    });
    let pred_path = out_dir.join(PREDICTIONS_FILE);
    std::fs::write(&pred_path, predictions).map_err(|e| Error::io(&pred_path, e))?;
    let rat_path = out_dir.join(RATIONALES_FILE);
    std::fs::write(&rat_path, serialize_rationales(&run.records))
        .map_err(|e| Error::io(&rat_path, e))?;
    Ok((pred_path, rat_path))
}

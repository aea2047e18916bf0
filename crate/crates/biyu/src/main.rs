//! Command-line entry point: run protocols over corpora, evaluate and
//! compare prediction files, drive the interpretability audits, manage
//! the exchange cache, and print dataset statistics.
//!
//! stdout carries data (reports, result JSON); stderr carries logs. Exit
//! codes: 0 success, 1 evaluation/metric error, 2 IO or schema error,
//! 3 cache error. Failures print one machine-readable JSON object to
//! stdout: `{"error": <kind>, "detail": <message>}`.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use biyu_core::audit::determinism_check;
use biyu_core::dataset::{self, DatasetName, LabelType};
use biyu_core::gateway::{
    default_schemas, default_templates, Backend, BackendKind, CacheStore, FixtureTable, Gateway,
    SchemaRegistry, TemplateRegistry,
};
use biyu_core::metrics::MatchCriterion;
use biyu_core::protocol::{ProtocolConfig, ProtocolId, ProtocolResources};
use biyu_core::protocols::mip::BasicDictionary;
use biyu_core::textprep::Lexicon;

use biyu::auditio;
use biyu::cachestore::FileCacheStore;
use biyu::configio;
use biyu::corpus;
use biyu::error::{Error, Result};
use biyu::evalio;
use biyu::files;
use biyu::predictions;
use biyu::report;
use biyu::runner::{self, RunManifest, MANIFEST_FILE};
use biyu::StubFixtureFile;

#[derive(Parser)]
#[command(name = "biyu", version, about = "Protocol-driven metaphor identification for Chinese text")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a protocol over a corpus, writing predictions, rationales,
    /// and a reproducibility manifest.
    Run(RunArgs),
    /// Score a prediction file against gold labels.
    Eval(EvalArgs),
    /// Pairwise agreement (Cohen's kappa) across prediction files.
    Compare(CompareArgs),
    /// Interpretability audits: determinism, worksheets, edit trials.
    Audit {
        #[command(subcommand)]
        command: AuditCommand,
    },
    /// Inspect, verify, or bundle the exchange cache.
    Cache {
        #[command(subcommand)]
        command: CacheCommand,
    },
    /// Dataset statistics in the published table layout.
    Stats(StatsArgs),
    /// Convert a corpus from its native layout to the unified schema.
    Import(ImportArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Dataset name (PSU_CMC, CMC, CMDAG, CHINESE_SIMILE, NLPCC2024_T9,
    /// CONFIGURE, CHINESE_MCORPUS). Determines the label type.
    #[arg(long)]
    dataset: Option<String>,
    /// Label type for ad-hoc unified files without a dataset name.
    #[arg(long, value_parser = parse_label_type)]
    label_type: Option<LabelType>,
    /// Unified JSON-lines corpus file.
    #[arg(long)]
    path: PathBuf,
}

impl DataArgs {
    fn resolve(&self) -> Result<(String, LabelType)> {
        match (&self.dataset, self.label_type) {
            (Some(name), declared) => {
                let dataset = DatasetName::parse(name)
                    .ok_or_else(|| Error::Invalid(format!("unknown dataset {name:?}")))?;
                if let Some(lt) = declared {
                    if lt != dataset.label_type() {
                        return Err(Error::SchemaMismatch(format!(
                            "dataset {name} is {}-labeled, not {}",
                            dataset.label_type().as_str(),
                            lt.as_str()
                        )));
                    }
                }
                Ok((name.clone(), dataset.label_type()))
            }
            (None, Some(lt)) => Ok((format!("adhoc-{}", lt.as_str()), lt)),
            (None, None) => Err(Error::Invalid(
                "either --dataset or --label-type is required".to_string(),
            )),
        }
    }
}

fn parse_label_type(s: &str) -> std::result::Result<LabelType, String> {
    match s {
        "token" => Ok(LabelType::Token),
        "sentence" => Ok(LabelType::Sentence),
        "span" => Ok(LabelType::Span),
        _ => Err(format!("unknown label type {s:?}")),
    }
}

#[derive(Args)]
struct GatewayArgs {
    /// LLM backend: live, replay, or stub.
    #[arg(long, value_parser = parse_backend)]
    backend: BackendKind,
    /// Exchange cache directory.
    #[arg(long)]
    cache_dir: PathBuf,
    /// Stub fixture file ({"templates": {...}, "digests": {...}}).
    #[arg(long)]
    stub_fixtures: Option<PathBuf>,
}

fn parse_backend(s: &str) -> std::result::Result<BackendKind, String> {
    BackendKind::parse(s).ok_or_else(|| format!("unknown backend {s:?}"))
}

#[derive(Args)]
struct ResourceArgs {
    /// Segmentation lexicon (word<TAB>frequency<TAB>POS), protocol A.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Basic-sense dictionary (word<TAB>gloss), protocol A.
    #[arg(long)]
    dictionary: Option<PathBuf>,
}

impl ResourceArgs {
    fn load(&self) -> Result<(Lexicon, ProtocolResources)> {
        let lexicon = match &self.lexicon {
            Some(path) => files::load_lexicon(path)?,
            None => Lexicon::new(),
        };
        let dictionary = match &self.dictionary {
            Some(path) => files::load_dictionary(path)?,
            None => BasicDictionary::new(),
        };
        Ok((lexicon, ProtocolResources { dictionary }))
    }
}

#[derive(Args)]
struct RunArgs {
    /// Protocol to run: A, B, C, or D.
    #[arg(long)]
    protocol: Option<String>,
    /// Protocol config file (JSON); defaults to the built-in config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    data: Option<DataArgsOpt>,
    #[command(flatten)]
    gateway: Option<GatewayArgsOpt>,
    #[command(flatten)]
    resources: ResourceArgs,
    /// Deterministic seed recorded in the manifest.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for predictions, rationales, and manifest.
    #[arg(long)]
    out: PathBuf,
    /// Reproduce a previous run from its manifest (forces replay).
    #[arg(long)]
    from_manifest: Option<PathBuf>,
}

// Optional flavors of the shared arg groups, for manifest reruns where
// everything can come from the manifest.
#[derive(Args)]
struct DataArgsOpt {
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long, value_parser = parse_label_type)]
    label_type: Option<LabelType>,
    #[arg(long)]
    path: Option<PathBuf>,
}

#[derive(Args)]
struct GatewayArgsOpt {
    #[arg(long, value_parser = parse_backend)]
    backend: Option<BackendKind>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    stub_fixtures: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Prediction file (JSON lines).
    #[arg(long)]
    pred: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    /// Span match criterion: overlap1 or proportional.
    #[arg(long, default_value = "overlap1", value_parser = parse_criterion)]
    span_match: MatchCriterion,
    /// Bootstrap iterations for the F1 confidence interval (0 = skip).
    #[arg(long, default_value_t = 10_000)]
    iterations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Emit the JSON report instead of the text table.
    #[arg(long)]
    json: bool,
}

fn parse_criterion(s: &str) -> std::result::Result<MatchCriterion, String> {
    MatchCriterion::parse(s).ok_or_else(|| format!("unknown span-match criterion {s:?}"))
}

#[derive(Args)]
struct CompareArgs {
    /// Prediction files to compare (repeat; at least two).
    #[arg(long, required = true, num_args = 1..)]
    pred: Vec<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum AuditCommand {
    /// Execute a protocol twice and compare serialized rationales.
    Determinism(DeterminismArgs),
    /// Export a deterministic worksheet sample for human judgment.
    Sample(SampleArgs),
    /// Score a judged worksheet (weighted 0.5 for partially correct).
    Score(ScoreArgs),
    /// Apply a config patch and measure targeted/overall effects.
    Edit(EditArgs),
}

#[derive(Args)]
struct DeterminismArgs {
    #[arg(long)]
    protocol: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    gateway: GatewayArgs,
    #[command(flatten)]
    resources: ResourceArgs,
}

#[derive(Args)]
struct SampleArgs {
    /// Rationale file produced by `run`.
    #[arg(long)]
    rationales: PathBuf,
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worksheet CSV to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ScoreArgs {
    /// Judged worksheet CSV.
    #[arg(long)]
    worksheet: PathBuf,
}

#[derive(Args)]
struct EditArgs {
    #[arg(long)]
    config: PathBuf,
    /// Patch file: {"base_version": ..., "patch": {...}} (JSON
    /// merge-patch semantics).
    #[arg(long)]
    patch: PathBuf,
    /// Comma-separated source ids the patch is meant to flip.
    #[arg(long)]
    targeted: String,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    gateway: GatewayArgs,
    #[command(flatten)]
    resources: ResourceArgs,
    /// Maximum tolerated overall F1 drop.
    #[arg(long, default_value_t = 0.01)]
    tolerance: f64,
}

#[derive(Subcommand)]
enum CacheCommand {
    /// List cached exchange digests and template ids.
    List {
        #[arg(long)]
        cache_dir: PathBuf,
    },
    /// Recompute digests; exit 3 if any entry is corrupt.
    Verify {
        #[arg(long)]
        cache_dir: PathBuf,
    },
    /// Bundle all entries into one archive file.
    Export {
        #[arg(long)]
        cache_dir: PathBuf,
        #[arg(long)]
        archive: PathBuf,
    },
    /// Load entries from an archive into the cache.
    Import {
        #[arg(long)]
        cache_dir: PathBuf,
        #[arg(long)]
        archive: PathBuf,
    },
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Treat --path as the corpus's native layout and import it first.
    #[arg(long)]
    native: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ImportArgs {
    /// Dataset name selecting the native-layout adapter.
    #[arg(long)]
    dataset: String,
    /// Native corpus file.
    #[arg(long)]
    path: PathBuf,
    /// Unified JSON-lines file to write.
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            println!(
                "{}",
                serde_json::json!({"error": e.kind(), "detail": e.to_string()})
            );
            std::process::exit(e.exit_code());
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Audit { command } => match command {
            AuditCommand::Determinism(args) => cmd_audit_determinism(args),
            AuditCommand::Sample(args) => cmd_audit_sample(args),
            AuditCommand::Score(args) => cmd_audit_score(args),
            AuditCommand::Edit(args) => cmd_audit_edit(args),
        },
        Command::Cache { command } => cmd_cache(command),
        Command::Stats(args) => cmd_stats(args),
        Command::Import(args) => cmd_import(args),
    }
}

fn parse_protocol(s: &str) -> Result<ProtocolId> {
    ProtocolId::parse(s).ok_or_else(|| Error::Invalid(format!("unknown protocol {s:?}")))
}

fn load_config_or_default(path: Option<&Path>, protocol: Option<ProtocolId>) -> Result<(ProtocolConfig, String)> {
    match path {
        Some(p) => {
            let config = configio::load_config(p)?;
            if let Some(required) = protocol {
                if config.protocol != required {
                    return Err(Error::Config(format!(
                        "config {} is for protocol {}, not {}",
                        p.display(),
                        config.protocol,
                        required
                    )));
                }
            }
            Ok((config, p.display().to_string()))
        }
        None => {
            let protocol = protocol.ok_or_else(|| {
                Error::Invalid("either --protocol or --config is required".to_string())
            })?;
            Ok((ProtocolConfig::default_for(protocol), "<builtin>".to_string()))
        }
    }
}

struct GatewaySetup {
    templates: TemplateRegistry,
    schemas: SchemaRegistry,
    store: FileCacheStore,
    stub: Option<FixtureTable>,
    kind: BackendKind,
}

impl GatewaySetup {
    fn prepare(
        kind: BackendKind,
        cache_dir: &Path,
        stub_fixtures: Option<&Path>,
    ) -> Result<GatewaySetup> {
        let store = match kind {
            BackendKind::Replay => FileCacheStore::open_existing(cache_dir)?,
            _ => FileCacheStore::open(cache_dir)?,
        };
        let stub = match kind {
            BackendKind::Stub => {
                let path = stub_fixtures.ok_or_else(|| {
                    Error::Invalid("--backend stub requires --stub-fixtures".to_string())
                })?;
                Some(StubFixtureFile::load(path)?.into_table()?)
            }
            _ => None,
        };
        Ok(GatewaySetup {
            templates: default_templates(),
            schemas: default_schemas(),
            store,
            stub,
            kind,
        })
    }

    fn gateway(&self) -> Result<Gateway<'_>> {
        let backend = match self.kind {
            BackendKind::Replay => Backend::Replay,
            BackendKind::Stub => Backend::Stub(self.stub.as_ref().expect("stub table prepared")),
            BackendKind::Live => {
                #[cfg(feature = "live")]
                {
                    return Err(Error::Invalid(
                        "live gateway must be constructed per run; use run_live".to_string(),
                    ));
                }
                #[cfg(not(feature = "live"))]
                return Err(Error::Invalid(
                    "this build has no live backend; rebuild with --features live".to_string(),
                ));
            }
        };
        Ok(Gateway::new(
            &self.templates,
            &self.schemas,
            &self.store,
            backend,
        ))
    }
}

fn cmd_run(args: RunArgs) -> Result<i32> {
    // Resolve the effective settings, either from flags or a manifest.
    let (
        protocol,
        config,
        config_path,
        dataset_name,
        dataset_path,
        label_type,
        backend,
        cache_dir,
        stub_fixtures,
        lexicon_path,
        dictionary_path,
        seed,
    );
    if let Some(manifest_path) = &args.from_manifest {
        let manifest = runner::load_manifest(manifest_path)?;
        protocol = manifest.protocol;
        let cfg_path = (manifest.config_path != "<builtin>")
            .then(|| PathBuf::from(&manifest.config_path));
        let (cfg, cfg_display) = load_config_or_default(cfg_path.as_deref(), Some(protocol))?;
        config = cfg;
        config_path = cfg_display;
        dataset_name = manifest.dataset_name.clone();
        dataset_path = PathBuf::from(&manifest.dataset_path);
        label_type = manifest.label_type;
        // Reruns are replay by definition: the recorded cache is the
        // ground truth.
        backend = BackendKind::Replay;
        cache_dir = PathBuf::from(&manifest.cache_dir);
        stub_fixtures = None;
        lexicon_path = manifest.lexicon_path.as_ref().map(PathBuf::from);
        dictionary_path = manifest.dictionary_path.as_ref().map(PathBuf::from);
        seed = manifest.seed;
    } else {
        let data = args
            .data
            .as_ref()
            .ok_or_else(|| Error::Invalid("--path is required".to_string()))?;
        let gw = args
            .gateway
            .as_ref()
            .ok_or_else(|| Error::Invalid("--backend and --cache-dir are required".to_string()))?;
        let resolved = DataArgs {
            dataset: data.dataset.clone(),
            label_type: data.label_type,
            path: data
                .path
                .clone()
                .ok_or_else(|| Error::Invalid("--path is required".to_string()))?,
        }
        .resolve()?;
        dataset_name = resolved.0;
        label_type = resolved.1;
        dataset_path = data.path.clone().expect("checked above");
        let declared_protocol = args.protocol.as_deref().map(parse_protocol).transpose()?;
        let (cfg, cfg_display) = load_config_or_default(args.config.as_deref(), declared_protocol)?;
        protocol = cfg.protocol;
        config = cfg;
        config_path = cfg_display;
        backend = gw
            .backend
            .ok_or_else(|| Error::Invalid("--backend is required".to_string()))?;
        cache_dir = gw
            .cache_dir
            .clone()
            .ok_or_else(|| Error::Invalid("--cache-dir is required".to_string()))?;
        stub_fixtures = gw.stub_fixtures.clone();
        lexicon_path = args.resources.lexicon.clone();
        dictionary_path = args.resources.dictionary.clone();
        seed = args.seed;
    }

    let setup = GatewaySetup::prepare(backend, &cache_dir, stub_fixtures.as_deref())?;
    config
        .validate(&setup.templates, &setup.schemas)
        .map_err(|e| Error::Config(e.to_string()))?;

    let resources = ResourceArgs {
        lexicon: lexicon_path.clone(),
        dictionary: dictionary_path.clone(),
    };
    let (lexicon, protocol_resources) = resources.load()?;
    let instances = corpus::load_unified(&dataset_path, label_type)?;

    let run = match backend {
        BackendKind::Live => {
            #[cfg(feature = "live")]
            {
                let transport = biyu::live::HttpTransport::from_env()
                    .map_err(|e| Error::Invalid(e.to_string()))?;
                let gateway = Gateway::new(
                    &setup.templates,
                    &setup.schemas,
                    &setup.store,
                    Backend::Live(&transport),
                );
                runner::run_dataset(
                    &config,
                    &protocol_resources,
                    &instances,
                    label_type,
                    &lexicon,
                    &gateway,
                )?
            }
            #[cfg(not(feature = "live"))]
            {
                return Err(Error::Invalid(
                    "this build has no live backend; rebuild with --features live".to_string(),
                ));
            }
        }
        _ => {
            let gateway = setup.gateway()?;
            runner::run_dataset(
                &config,
                &protocol_resources,
                &instances,
                label_type,
                &lexicon,
                &gateway,
            )?
        }
    };

    let (pred_path, rat_path) = runner::write_outputs(&args.out, &run)?;
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        protocol,
        config_path,
        config_version: config.version.clone(),
        dataset_name,
        dataset_path: dataset_path.display().to_string(),
        label_type,
        backend: backend.as_str().to_string(),
        seed,
        lexicon_path: lexicon_path.map(|p| p.display().to_string()),
        dictionary_path: dictionary_path.map(|p| p.display().to_string()),
        stub_fixtures_path: stub_fixtures.map(|p| p.display().to_string()),
        cache_dir: cache_dir.display().to_string(),
        out_dir: args.out.display().to_string(),
        predictions_file: pred_path.display().to_string(),
        rationales_file: rat_path.display().to_string(),
        cache_digest_hash: runner::cache_digest_hash(&setup.store),
    };
    let manifest_path = args.out.join(MANIFEST_FILE);
    runner::save_manifest(&manifest_path, &manifest)?;

    eprintln!(
        "ran protocol {} over {} instances ({} decisions)",
        protocol,
        instances.len(),
        run.records.len()
    );
    println!(
        "{}",
        serde_json::json!({
            "decisions": run.records.len(),
            "predictions": pred_path.display().to_string(),
            "rationales": rat_path.display().to_string(),
            "manifest": manifest_path.display().to_string(),
        })
    );
    Ok(0)
}

fn cmd_eval(args: EvalArgs) -> Result<i32> {
    let (name, label_type) = args.data.resolve()?;
    let gold = corpus::load_unified(&args.data.path, label_type)?;
    let preds = predictions::load_predictions(&args.pred)?;
    let report = match label_type {
        LabelType::Token => evalio::eval_token(&preds, &gold, args.iterations, args.seed)?,
        LabelType::Sentence => evalio::eval_sentence(&preds, &gold, args.iterations, args.seed)?,
        LabelType::Span => evalio::eval_span(
            &preds,
            &gold,
            args.span_match,
            args.iterations,
            args.seed,
        )?,
    };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        print!("{}", report::eval_table(&name, &report));
    }
    Ok(0)
}

fn cmd_compare(args: CompareArgs) -> Result<i32> {
    if args.pred.len() < 2 {
        return Err(Error::Invalid(
            "compare needs at least two --pred files".to_string(),
        ));
    }
    let mut runs = Vec::new();
    let mut seen = BTreeSet::new();
    for path in &args.pred {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_else(|| path.display().to_string());
        let mut name = stem.clone();
        let mut k = 1;
        while !seen.insert(name.clone()) {
            k += 1;
            name = format!("{stem}#{k}");
        }
        runs.push((name, predictions::load_predictions(path)?));
    }
    let report = evalio::compare_runs(&runs)?;
    if args.json {
        let ids = &report.matrix.ids;
        let mut cells = Vec::new();
        for i in 0..ids.len() {
            for j in 0..ids.len() {
                cells.push(serde_json::json!({
                    "a": ids[i],
                    "b": ids[j],
                    "kappa": report.matrix.get(i, j),
                    "band": report.matrix.band_of(i, j),
                }));
            }
        }
        println!(
            "{}",
            serde_json::json!({
                "compared": report.compared,
                "cells": cells,
                "abstains": report.abstains,
            })
        );
    } else {
        print!("{}", report::kappa_table(&report));
    }
    Ok(0)
}

fn cmd_audit_determinism(args: DeterminismArgs) -> Result<i32> {
    let (_, label_type) = args.data.resolve()?;
    let declared_protocol = args.protocol.as_deref().map(parse_protocol).transpose()?;
    let (config, _) = load_config_or_default(args.config.as_deref(), declared_protocol)?;
    let setup = GatewaySetup::prepare(
        args.gateway.backend,
        &args.gateway.cache_dir,
        args.gateway.stub_fixtures.as_deref(),
    )?;
    config
        .validate(&setup.templates, &setup.schemas)
        .map_err(|e| Error::Config(e.to_string()))?;
    let (lexicon, resources) = args.resources.load()?;
    let instances = corpus::load_unified(&args.data.path, label_type)?;
    let sentences = runner::sentences_for_dataset(&config, &instances, label_type, &lexicon)?;

    let mut gateway_err = None;
    let report = determinism_check(&config, &resources, &sentences, |_pass| {
        setup.gateway().unwrap_or_else(|e| {
            gateway_err = Some(e);
            // Unreachable in practice: prepare() already rejected bad
            // backends. Fall back to replay on the same store.
            Gateway::new(&setup.templates, &setup.schemas, &setup.store, Backend::Replay)
        })
    });
    if let Some(e) = gateway_err {
        return Err(e);
    }
    println!(
        "{}",
        serde_json::json!({
            "protocol": report.protocol.as_str(),
            "instances_compared": report.instances_compared,
            "identical": report.identical,
            "fraction": report.fraction,
            "mismatched": report.mismatched,
        })
    );
    eprintln!(
        "determinism: {}/{} identical (fraction {:.2})",
        report.identical, report.instances_compared, report.fraction
    );
    Ok(0)
}

fn cmd_audit_sample(args: SampleArgs) -> Result<i32> {
    let rows = auditio::export_worksheet(&args.rationales, args.n, args.seed, &args.out)?;
    println!(
        "{}",
        serde_json::json!({"worksheet": args.out.display().to_string(), "rows": rows})
    );
    Ok(0)
}

fn cmd_audit_score(args: ScoreArgs) -> Result<i32> {
    let judgments = auditio::read_worksheet(&args.worksheet)?;
    let score = biyu_core::audit::score_rationales(&judgments)
        .map_err(|e| Error::Invalid(e.to_string()))?;
    println!(
        "{}",
        serde_json::json!({"judgments": judgments.len(), "score": score})
    );
    Ok(0)
}

fn cmd_audit_edit(args: EditArgs) -> Result<i32> {
    let (_, label_type) = args.data.resolve()?;
    let config = configio::load_config(&args.config)?;
    let patch = configio::load_patch(&args.patch)?;
    let setup = GatewaySetup::prepare(
        args.gateway.backend,
        &args.gateway.cache_dir,
        args.gateway.stub_fixtures.as_deref(),
    )?;
    let (lexicon, resources) = args.resources.load()?;
    let instances = corpus::load_unified(&args.data.path, label_type)?;
    let targeted: Vec<String> = args
        .targeted
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();

    let mut gateway_err = None;
    let report = auditio::editability_trial(
        &config,
        &patch,
        &targeted,
        &instances,
        label_type,
        &lexicon,
        &resources,
        args.tolerance,
        |_pass| {
            setup.gateway().unwrap_or_else(|e| {
                gateway_err = Some(e);
                Gateway::new(&setup.templates, &setup.schemas, &setup.store, Backend::Replay)
            })
        },
    )?;
    if let Some(e) = gateway_err {
        return Err(e);
    }
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(0)
}

fn cmd_cache(command: CacheCommand) -> Result<i32> {
    match command {
        CacheCommand::List { cache_dir } => {
            let store = FileCacheStore::open_existing(&cache_dir)?;
            let mut rows = Vec::new();
            for digest in store.digests() {
                if let Some(entry) = store.get(&digest) {
                    rows.push(serde_json::json!({
                        "digest": digest.to_hex(),
                        "template_id": entry.request.template_id,
                    }));
                }
            }
            println!("{}", serde_json::json!({"entries": rows.len(), "list": rows}));
            Ok(0)
        }
        CacheCommand::Verify { cache_dir } => {
            let store = FileCacheStore::open_existing(&cache_dir)?;
            let corrupt = store.verify()?;
            println!(
                "{}",
                serde_json::json!({
                    "entries": store.digests().len(),
                    "corrupt": corrupt
                        .iter()
                        .map(|(d, r)| serde_json::json!({"digest": d, "reason": r}))
                        .collect::<Vec<_>>(),
                })
            );
            if let Some((digest, reason)) = corrupt.into_iter().next() {
                return Err(Error::CorruptEntry { digest, reason });
            }
            Ok(0)
        }
        CacheCommand::Export { cache_dir, archive } => {
            let store = FileCacheStore::open_existing(&cache_dir)?;
            let count = store.export(&archive)?;
            println!(
                "{}",
                serde_json::json!({"exported": count, "archive": archive.display().to_string()})
            );
            Ok(0)
        }
        CacheCommand::Import { cache_dir, archive } => {
            let store = FileCacheStore::open(&cache_dir)?;
            let count = store.import(&archive)?;
            println!("{}", serde_json::json!({"imported": count}));
            Ok(0)
        }
    }
}

fn cmd_stats(args: StatsArgs) -> Result<i32> {
    let (name, label_type) = args.data.resolve()?;
    let instances = if args.native {
        let dataset = DatasetName::parse(&name)
            .ok_or_else(|| Error::Invalid("--native requires a known --dataset".to_string()))?;
        corpus::import(dataset, &args.data.path)?
    } else {
        corpus::load_unified(&args.data.path, label_type)?
    };
    let stats = dataset::stats(&instances, label_type);
    if args.json {
        println!(
            "{}",
            serde_json::json!({
                "dataset": name,
                "label_type": label_type.as_str(),
                "stats": stats,
            })
        );
    } else {
        print!("{}", report::stats_table(&[(name, stats, label_type)]));
    }
    Ok(0)
}

fn cmd_import(args: ImportArgs) -> Result<i32> {
    let dataset = DatasetName::parse(&args.dataset)
        .ok_or_else(|| Error::Invalid(format!("unknown dataset {:?}", args.dataset)))?;
    let instances = corpus::import(dataset, &args.path)?;
    corpus::save_unified(&args.out, &instances)?;
    println!(
        "{}",
        serde_json::json!({
            "imported": instances.len(),
            "out": args.out.display().to_string(),
        })
    );
    Ok(0)
}

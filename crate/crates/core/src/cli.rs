//! Command-line front end. Exit codes: 0 success, 1 input or usage error,
//! 2 internal invariant failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use flate2::read::MultiGzDecoder;
use thiserror::Error;

use crate::alias::AliasDictionary;
use crate::classify::{classify_all, TypeMapping, WikiIndex};
use crate::config::{PipelineConfig, CONFIG_ENV};
use crate::conll::{conll_string, corpus_stats, read_conll, split_corpus, validate_iob, AnnotatedCorpus};
use crate::diagnostics::Counters;
use crate::dump::{build_site_index, stream_articles, stream_entities, EntityRecord};
use crate::eval::{confusion, score};
use crate::generate::{generate_corpus, GenerateError, Resources};
use crate::pipeline::{provenance_lines, AliasScan, TOOL_NAME, TOOL_VERSION};
use crate::tagger::{tag_corpus, train, TaggerModel, TrainConfig};

#[derive(Debug, Parser)]
#[command(name = "silver-ner", version, about = "Silver-standard NER corpora from wiki dumps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArg {
    /// Run configuration (key=value lines).
    #[arg(long, env = CONFIG_ENV)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EntityInputs {
    /// Line-delimited entity dump (optionally .gz).
    #[arg(long)]
    wikidata_dump: PathBuf,
    /// Taxonomy mapping file; the built-in table when omitted.
    #[arg(long)]
    mapping: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify entities into PER/ORG/LOC.
    Classify {
        #[command(flatten)]
        entities: EntityInputs,
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        output: PathBuf,
    },
    /// Compile the alias dictionary.
    Aliases {
        #[arg(long)]
        wiki_dump: PathBuf,
        #[command(flatten)]
        entities: EntityInputs,
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        output: PathBuf,
    },
    /// Generate the annotated corpus.
    Generate {
        #[arg(long)]
        wiki_dump: PathBuf,
        #[command(flatten)]
        entities: EntityInputs,
        #[command(flatten)]
        config: ConfigArg,
        /// Use a previously compiled alias dictionary.
        #[arg(long)]
        aliases: Option<PathBuf>,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Sentence, token and entity counts.
    Stats {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Report IOB2 violations.
    Validate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Seeded train/dev split.
    Split {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.8)]
        train_fraction: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        train_output: PathBuf,
        #[arg(long)]
        dev_output: PathBuf,
    },
    /// Train the perceptron tagger.
    Train {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 10)]
        epochs: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        output: PathBuf,
    },
    /// Tag a corpus with a trained model.
    Tag {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Score predictions against gold.
    Evaluate {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        /// Also print the token confusion matrix.
        #[arg(long)]
        confusion: bool,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

fn input_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

impl From<GenerateError> for CliError {
    fn from(e: GenerateError) -> Self {
        match e {
            GenerateError::ThreadPool(_) => CliError::Input(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

/// Key/value record of one run.
#[derive(Debug, Default)]
pub struct RunManifest {
    pub subcommand: String,
    pub inputs: Vec<(String, PathBuf)>,
    pub outputs: Vec<(String, PathBuf)>,
    pub config_digest: Option<String>,
    pub seed: Option<u64>,
    pub counters: Counters,
}

impl RunManifest {
    fn new(subcommand: &str) -> Self {
        Self {
            subcommand: subcommand.into(),
            ..Default::default()
        }
    }

    pub fn render(&self) -> String {
        let mut out = format!("subcommand={}\ntool_version={TOOL_NAME} {TOOL_VERSION}\n", self.subcommand);
        if let Some(d) = &self.config_digest {
            let _ = writeln!(out, "config_digest={d}");
        }
        if let Some(s) = self.seed {
            let _ = writeln!(out, "seed={s}");
        }
        for (k, p) in &self.inputs {
            let _ = writeln!(out, "input.{k}={}", p.display());
        }
        for (k, p) in &self.outputs {
            let _ = writeln!(out, "output.{k}={}", p.display());
        }
        for (k, v) in self.counters.iter() {
            let _ = writeln!(out, "counter.{k}={v}");
        }
        out
    }
}

fn manifest_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_os_string();
    s.push(".manifest");
    PathBuf::from(s)
}

/// Opens a file, transparently decompressing `.gz`.
pub fn open_input(path: &Path) -> Result<Box<dyn BufRead>, CliError> {
    let file = File::open(path).map_err(|e| input_err(path, e))?;
    if path.extension().is_some_and(|e| e == "gz") {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::with_capacity(1 << 16, file)))
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| input_err(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(contents).and_then(|_| w.flush()).map_err(|e| input_err(path, e))
}

fn load_config(arg: &ConfigArg) -> Result<PipelineConfig, CliError> {
    match &arg.config {
        Some(p) => PipelineConfig::load(p).map_err(|e| CliError::Input(e.to_string())),
        None => Ok(PipelineConfig::default()),
    }
}

fn load_mapping(path: Option<&Path>, config: &PipelineConfig) -> Result<TypeMapping, CliError> {
    let mapping = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| input_err(p, e))?;
            TypeMapping::parse(&text).map_err(|e| input_err(p, e))?
        }
        None => TypeMapping::shipped(),
    };
    mapping
        .with_priority(config.priority)
        .map_err(|e| CliError::Input(e.to_string()))
}

fn load_entities(path: &Path, config: &PipelineConfig, counters: &mut Counters) -> Result<Vec<EntityRecord>, CliError> {
    let mut stream = stream_entities(open_input(path)?, config.entity_stream());
    let entities = stream
        .by_ref()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| input_err(path, e))?;
    counters.merge(stream.counters());
    Ok(entities)
}

fn read_corpus(path: &Path) -> Result<AnnotatedCorpus, CliError> {
    read_conll(open_input(path)?).map_err(|e| input_err(path, e))
}

fn write_corpus(path: &Path, corpus: &AnnotatedCorpus, header: bool) -> Result<(), CliError> {
    let violations = validate_iob(corpus);
    if let Some(v) = violations.first() {
        return Err(CliError::Internal(format!(
            "refusing to write an invalid corpus: sentence {}, token {}: {}",
            v.sentence, v.token, v.reason
        )));
    }
    let text = conll_string(corpus, header).map_err(|e| CliError::Internal(e.to_string()))?;
    write_file(path, text.as_bytes())
}

struct Indexed {
    index: WikiIndex,
    dictionary: AliasDictionary,
}

/// Entities → index; one pass over the page dump → redirects and aliases.
fn build_indices(
    wiki_dump: &Path,
    entities: &EntityInputs,
    config: &PipelineConfig,
    manifest: &mut RunManifest,
) -> Result<Indexed, CliError> {
    let mapping = load_mapping(entities.mapping.as_deref(), config)?;
    let records = load_entities(&entities.wikidata_dump, config, &mut manifest.counters)?;
    let mut index = WikiIndex::from_entities(&records, &mapping);
    drop(records);
    manifest.counters.add("site_index_duplicate_titles", index.site_index.duplicate_titles);
    let mut scan = AliasScan::default();
    let mut stream = stream_articles(open_input(wiki_dump)?, config.page_stream());
    for article in stream.by_ref() {
        scan.push(article.map_err(|e| input_err(wiki_dump, e))?, &index);
    }
    manifest.counters.merge(stream.counters());
    let (dictionary, counters) = scan.finish(&mut index, config.alias_config(), config.tokenizer());
    manifest.counters.merge(&counters);
    Ok(Indexed { index, dictionary })
}

fn emit_manifest(manifest: &RunManifest, path: Option<&Path>) -> Result<(), CliError> {
    let text = manifest.render();
    match path {
        Some(p) => write_file(p, text.as_bytes()),
        None => {
            eprint!("{text}");
            Ok(())
        }
    }
}

fn execute(command: Command, stdout: &mut dyn Write) -> Result<(), CliError> {
    let out_err = |e: io::Error| CliError::Input(format!("writing output: {e}"));
    match command {
        Command::Classify { entities, config, output } => {
            let cfg = load_config(&config)?;
            let mut m = RunManifest::new("classify");
            m.config_digest = Some(cfg.digest());
            m.inputs.push(("wikidata_dump".into(), entities.wikidata_dump.clone()));
            if let Some(p) = &entities.mapping {
                m.inputs.push(("mapping".into(), p.clone()));
            }
            let mapping = load_mapping(entities.mapping.as_deref(), &cfg)?;
            let records = load_entities(&entities.wikidata_dump, &cfg, &mut m.counters)?;
            let classes = classify_all(&records, &mapping);
            let sites = build_site_index(&records);
            let mut titles = std::collections::HashMap::new();
            for r in &records {
                if let Some(t) = &r.sitelink {
                    titles.insert(r.id.as_str(), t.as_str());
                }
            }
            let mut text = String::new();
            for (id, t) in &classes {
                let _ = writeln!(text, "{id}\t{t}\t{}", titles.get(id.as_str()).copied().unwrap_or(""));
            }
            m.counters.add("entities_total", records.len() as u64);
            m.counters.add("entities_classified", classes.len() as u64);
            m.counters.add("site_index_duplicate_titles", sites.duplicate_titles);
            write_file(&output, text.as_bytes())?;
            m.outputs.push(("classes".into(), output.clone()));
            emit_manifest(&m, Some(&manifest_path(&output)))
        }
        Command::Aliases {
            wiki_dump,
            entities,
            config,
            output,
        } => {
            let cfg = load_config(&config)?;
            let mut m = RunManifest::new("aliases");
            m.config_digest = Some(cfg.digest());
            m.inputs.push(("wiki_dump".into(), wiki_dump.clone()));
            m.inputs.push(("wikidata_dump".into(), entities.wikidata_dump.clone()));
            let idx = build_indices(&wiki_dump, &entities, &cfg, &mut m)?;
            let bad = idx.dictionary.verify_against(&idx.index);
            if let Some(e) = bad.first() {
                return Err(CliError::Internal(format!("alias `{}` disagrees with its target's class", e.alias)));
            }
            write_file(&output, idx.dictionary.to_tsv().as_bytes())?;
            m.outputs.push(("aliases".into(), output.clone()));
            emit_manifest(&m, Some(&manifest_path(&output)))
        }
        Command::Generate {
            wiki_dump,
            entities,
            config,
            aliases,
            output,
            jobs,
        } => {
            let cfg = load_config(&config)?;
            let mut m = RunManifest::new("generate");
            m.config_digest = Some(cfg.digest());
            m.inputs.push(("wiki_dump".into(), wiki_dump.clone()));
            m.inputs.push(("wikidata_dump".into(), entities.wikidata_dump.clone()));
            let mut idx = build_indices(&wiki_dump, &entities, &cfg, &mut m)?;
            if let Some(p) = &aliases {
                m.inputs.push(("aliases".into(), p.clone()));
                let text = fs::read_to_string(p).map_err(|e| input_err(p, e))?;
                idx.dictionary = AliasDictionary::from_tsv(&text, cfg.alias_config(), cfg.tokenizer())
                    .map_err(|e| input_err(p, e))?;
            }
            let generator = cfg.generator_config(provenance_lines(&cfg));
            let res = Resources {
                index: &idx.index,
                dict: &idx.dictionary,
                config: &generator,
            };
            let mut stream = stream_articles(open_input(&wiki_dump)?, cfg.page_stream());
            let mut failure = None;
            let articles = stream.by_ref().map_while(|r| match r {
                Ok(a) => Some(a),
                Err(e) => {
                    failure = Some(e);
                    None
                }
            });
            let report = generate_corpus(articles, &res, jobs)?;
            if let Some(e) = failure {
                return Err(input_err(&wiki_dump, e));
            }
            m.counters.merge(&report.counters);
            m.counters.add("corpus_sentences", report.stats.sentence_count);
            m.counters.add("corpus_tokens", report.stats.token_count);
            for (t, n) in &report.stats.entity_counts {
                m.counters.add(&format!("corpus_entities_{t}"), *n);
            }
            if report.corpus.sentences.iter().any(|s| s.tags.iter().all(|t| t.netype().is_none())) {
                return Err(CliError::Internal("emitted a sentence without entities".into()));
            }
            write_corpus(&output, &report.corpus, cfg.provenance)?;
            m.outputs.push(("corpus".into(), output.clone()));
            emit_manifest(&m, Some(&manifest_path(&output)))
        }
        Command::Stats { input, manifest } => {
            let corpus = read_corpus(&input)?;
            let stats = corpus_stats(&corpus);
            stdout.write_all(stats.to_tsv().as_bytes()).map_err(out_err)?;
            let mut m = RunManifest::new("stats");
            m.inputs.push(("corpus".into(), input));
            emit_manifest(&m, manifest.as_deref())
        }
        Command::Validate { input, manifest } => {
            let corpus = read_corpus(&input)?;
            let violations = validate_iob(&corpus);
            let mut m = RunManifest::new("validate");
            m.inputs.push(("corpus".into(), input.clone()));
            m.counters.add("violations", violations.len() as u64);
            for v in &violations {
                writeln!(stdout, "sentence {}\ttoken {}\t{}", v.sentence, v.token, v.reason).map_err(out_err)?;
            }
            writeln!(stdout, "{} violation(s)", violations.len()).map_err(out_err)?;
            emit_manifest(&m, manifest.as_deref())?;
            if violations.is_empty() {
                Ok(())
            } else {
                Err(input_err(&input, format!("{} IOB2 violation(s)", violations.len())))
            }
        }
        Command::Split {
            input,
            train_fraction,
            seed,
            train_output,
            dev_output,
        } => {
            let corpus = read_corpus(&input)?;
            let (tr, dv) = split_corpus(&corpus, train_fraction, seed).map_err(|e| input_err(&input, e))?;
            write_corpus(&train_output, &tr, true)?;
            write_corpus(&dev_output, &dv, true)?;
            let mut m = RunManifest::new("split");
            m.seed = Some(seed);
            m.inputs.push(("corpus".into(), input));
            m.outputs.push(("train".into(), train_output.clone()));
            m.outputs.push(("dev".into(), dev_output));
            m.counters.add("train_sentences", tr.len() as u64);
            m.counters.add("dev_sentences", dv.len() as u64);
            emit_manifest(&m, Some(&manifest_path(&train_output)))
        }
        Command::Train {
            input,
            epochs,
            seed,
            config,
            output,
        } => {
            let cfg = load_config(&config)?;
            let corpus = read_corpus(&input)?;
            let tc = TrainConfig {
                epochs,
                seed,
                features: cfg.feature_config(),
                hash_bits: cfg.hash_bits,
            };
            let (model, report) = train(&corpus, &tc).map_err(|e| input_err(&input, e))?;
            write_file(&output, model.to_text().as_bytes())?;
            let mut m = RunManifest::new("train");
            m.config_digest = Some(cfg.digest());
            m.seed = Some(seed);
            m.inputs.push(("corpus".into(), input));
            m.outputs.push(("model".into(), output.clone()));
            m.counters.add("feature_strings", report.distinct_features as u64);
            m.counters.add("feature_collisions", report.collisions as u64);
            m.counters.add("updates", report.updates);
            if let Some(last) = report.mistakes_per_epoch.last() {
                m.counters.add("last_epoch_mistakes", *last as u64);
            }
            emit_manifest(&m, Some(&manifest_path(&output)))
        }
        Command::Tag { model, input, output } => {
            let text = fs::read_to_string(&model).map_err(|e| input_err(&model, e))?;
            let tagger = TaggerModel::from_text(&text).map_err(|e| input_err(&model, e))?;
            let corpus = read_corpus(&input)?;
            let pred = tag_corpus(&tagger, &corpus);
            write_corpus(&output, &pred, true)?;
            let mut m = RunManifest::new("tag");
            m.inputs.push(("model".into(), model));
            m.inputs.push(("corpus".into(), input));
            m.outputs.push(("corpus".into(), output.clone()));
            emit_manifest(&m, Some(&manifest_path(&output)))
        }
        Command::Evaluate {
            gold,
            pred,
            confusion: with_confusion,
            output,
            manifest,
        } => {
            let g = read_corpus(&gold)?;
            let p = read_corpus(&pred)?;
            let report = score(&g, &p).map_err(|e| CliError::Input(format!("{} vs {}: {e}", gold.display(), pred.display())))?;
            let mut text = report.render_table();
            text.push('\n');
            text.push_str(&report.render_tsv());
            if with_confusion {
                let cm = confusion(&g, &p).map_err(|e| CliError::Input(e.to_string()))?;
                text.push('\n');
                text.push_str(&cm.render());
            }
            stdout.write_all(text.as_bytes()).map_err(out_err)?;
            let mut m = RunManifest::new("evaluate");
            m.inputs.push(("gold".into(), gold));
            m.inputs.push(("pred".into(), pred));
            let o = report.overall_counts();
            m.counters.add("chunks_correct", o.correct);
            m.counters.add("chunks_predicted", o.predicted);
            m.counters.add("chunks_gold", o.gold);
            match output {
                Some(path) => {
                    write_file(&path, text.as_bytes())?;
                    m.outputs.push(("report".into(), path.clone()));
                    emit_manifest(&m, Some(manifest.as_deref().unwrap_or(&manifest_path(&path))))
                }
                None => emit_manifest(&m, manifest.as_deref()),
            }
        }
    }
}

/// Parses `args` (program name first) and runs the subcommand, writing
/// results to `stdout` and diagnostics to stderr. Returns the exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("silver-ner: {e}");
            e.exit_code()
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut io::stdout().lock())
}

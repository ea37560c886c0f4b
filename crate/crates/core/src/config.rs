//! `key=value` run configuration shared by all subcommands.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::alias::{AliasConfig, MatchMode};
use crate::classify::DEFAULT_PRIORITY;
use crate::dump::{EntityStreamConfig, PageStreamConfig, DEFAULT_DISAMBIGUATION_CLASS};
use crate::generate::GeneratorConfig;
use crate::tags::NEType;
use crate::tagger::FeatureConfig;
use crate::text::{RuleError, SegmenterConfig, TokenizerRules};

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "SILVER_NER_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Rules {
        path: PathBuf,
        #[source]
        source: RuleError,
    },
}

/// A side file named in the config, kept with its contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SideFile {
    pub path: PathBuf,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineConfig {
    pub wiki_code: String,
    pub namespaces: BTreeSet<i64>,
    pub disambiguation_classes: BTreeSet<String>,
    pub priority: [NEType; 3],
    pub max_record_bytes: Option<usize>,
    pub sentence_initial_exemption: bool,
    pub stoplist: Option<SideFile>,
    pub abbreviations: Option<SideFile>,
    pub tokenizer_rules: Option<SideFile>,
    pub min_alias_length: usize,
    pub require_capitalized: bool,
    pub include_redirect_aliases: bool,
    pub strip_disambiguation_qualifier: bool,
    pub suffixes: Vec<String>,
    pub provenance: bool,
    pub max_ngram: usize,
    pub window: usize,
    pub use_current_word: bool,
    pub use_prev_next_words: bool,
    pub use_word_shape: bool,
    pub hash_bits: u32,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let alias = AliasConfig::default();
        let features = FeatureConfig::default();
        Self {
            wiki_code: "hywiki".into(),
            namespaces: BTreeSet::from([0]),
            disambiguation_classes: BTreeSet::from([DEFAULT_DISAMBIGUATION_CLASS.to_string()]),
            priority: DEFAULT_PRIORITY,
            max_record_bytes: None,
            sentence_initial_exemption: true,
            stoplist: None,
            abbreviations: None,
            tokenizer_rules: None,
            min_alias_length: alias.min_alias_chars,
            require_capitalized: alias.require_capitalized,
            include_redirect_aliases: alias.include_redirects,
            strip_disambiguation_qualifier: alias.strip_disambiguation_qualifier,
            suffixes: Vec::new(),
            provenance: true,
            max_ngram: features.max_ngram,
            window: features.window,
            use_current_word: features.use_current_word,
            use_prev_next_words: features.use_prev_next_words,
            use_word_shape: features.use_word_shape,
            hash_bits: crate::tagger::model::DEFAULT_HASH_BITS,
        }
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" | "yes" | "on" | "1" => Some(true),
        "false" | "no" | "off" | "0" => Some(false),
        _ => None,
    }
}

fn list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

impl PipelineConfig {
    /// Parses config text; relative side-file paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |message: String| ConfigError::Line { line: i + 1, message };
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| bad("expected key=value".into()))?;
            let boolean = || parse_bool(value).ok_or_else(|| bad(format!("`{key}` expects true or false")));
            let number = || value.parse::<usize>().map_err(|_| bad(format!("`{key}` expects a number")));
            let side = || -> Result<Option<SideFile>, ConfigError> {
                if value.is_empty() {
                    return Ok(None);
                }
                let path = base.join(value);
                let contents = fs::read_to_string(&path).map_err(|source| ConfigError::Io {
                    path: path.clone(),
                    source,
                })?;
                Ok(Some(SideFile { path, contents }))
            };
            match key {
                "wiki_code" => cfg.wiki_code = value.to_string(),
                "namespaces" => {
                    cfg.namespaces = list(value)
                        .map(|s| s.parse::<i64>().map_err(|_| bad(format!("bad namespace `{s}`"))))
                        .collect::<Result<_, _>>()?
                }
                "disambiguation_classes" => cfg.disambiguation_classes = list(value).map(String::from).collect(),
                "priority" => {
                    let types: Vec<NEType> = list(value)
                        .map(|s| s.parse::<NEType>().map_err(|e| bad(e.to_string())))
                        .collect::<Result<_, _>>()?;
                    let distinct: HashSet<_> = types.iter().collect();
                    if types.len() != 3 || distinct.len() != 3 {
                        return Err(bad("priority must list PER, ORG and LOC once each".into()));
                    }
                    cfg.priority = [types[0], types[1], types[2]];
                }
                "max_record_bytes" => cfg.max_record_bytes = Some(number()?),
                "sentence_initial_exemption" => cfg.sentence_initial_exemption = boolean()?,
                "stoplist_path" => cfg.stoplist = side()?,
                "abbreviations_path" => cfg.abbreviations = side()?,
                "tokenizer_rules_path" => {
                    cfg.tokenizer_rules = side()?;
                    if let Some(f) = &cfg.tokenizer_rules {
                        TokenizerRules::parse(&f.contents).map_err(|source| ConfigError::Rules {
                            path: f.path.clone(),
                            source,
                        })?;
                    }
                }
                "min_alias_length" => cfg.min_alias_length = number()?,
                "require_capitalized" => cfg.require_capitalized = boolean()?,
                "include_redirect_aliases" => cfg.include_redirect_aliases = boolean()?,
                "strip_disambiguation_qualifier" => cfg.strip_disambiguation_qualifier = boolean()?,
                "suffixes" => cfg.suffixes = list(value).map(String::from).collect(),
                "provenance" => cfg.provenance = boolean()?,
                "max_ngram" => {
                    cfg.max_ngram = number()?;
                    if cfg.max_ngram < 1 {
                        return Err(bad("max_ngram must be at least 1".into()));
                    }
                }
                "window" => cfg.window = number()?,
                "use_current_word" => cfg.use_current_word = boolean()?,
                "use_prev_next_words" => cfg.use_prev_next_words = boolean()?,
                "use_word_shape" => cfg.use_word_shape = boolean()?,
                "hash_bits" => {
                    cfg.hash_bits = number()? as u32;
                    if !(1..=32).contains(&cfg.hash_bits) {
                        return Err(bad("hash_bits must be between 1 and 32".into()));
                    }
                }
                other => return Err(bad(format!("unknown key `{other}`"))),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Every effective setting as sorted `key=value` lines; side files
    /// appear as content hashes so the text does not depend on paths.
    pub fn canonical(&self) -> String {
        let side = |f: &Option<SideFile>| f.as_ref().map_or("none".to_string(), |f| hex(&Sha256::digest(&f.contents)));
        let join = |it: Vec<String>| it.join(",");
        let mut kv: BTreeMap<&str, String> = BTreeMap::new();
        kv.insert("wiki_code", self.wiki_code.clone());
        kv.insert("namespaces", join(self.namespaces.iter().map(|n| n.to_string()).collect()));
        kv.insert("disambiguation_classes", join(self.disambiguation_classes.iter().cloned().collect()));
        kv.insert("priority", join(self.priority.iter().map(|t| t.to_string()).collect()));
        kv.insert("max_record_bytes", self.max_record_bytes.map_or("none".into(), |n| n.to_string()));
        kv.insert("sentence_initial_exemption", self.sentence_initial_exemption.to_string());
        kv.insert("stoplist", side(&self.stoplist));
        kv.insert("abbreviations", side(&self.abbreviations));
        kv.insert("tokenizer_rules", side(&self.tokenizer_rules));
        kv.insert("min_alias_length", self.min_alias_length.to_string());
        kv.insert("require_capitalized", self.require_capitalized.to_string());
        kv.insert("include_redirect_aliases", self.include_redirect_aliases.to_string());
        kv.insert("strip_disambiguation_qualifier", self.strip_disambiguation_qualifier.to_string());
        kv.insert("suffixes", join(self.suffixes.clone()));
        kv.insert("provenance", self.provenance.to_string());
        kv.insert("max_ngram", self.max_ngram.to_string());
        kv.insert("window", self.window.to_string());
        kv.insert("use_current_word", self.use_current_word.to_string());
        kv.insert("use_prev_next_words", self.use_prev_next_words.to_string());
        kv.insert("use_word_shape", self.use_word_shape.to_string());
        kv.insert("hash_bits", self.hash_bits.to_string());
        kv.into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// First 16 hex digits of the SHA-256 of [`canonical`](Self::canonical).
    pub fn digest(&self) -> String {
        hex(&Sha256::digest(self.canonical().as_bytes()))[..16].to_string()
    }

    pub fn tokenizer(&self) -> TokenizerRules {
        self.tokenizer_rules
            .as_ref()
            .map(|f| TokenizerRules::parse(&f.contents).expect("validated at load"))
            .unwrap_or_default()
    }

    pub fn segmenter(&self) -> SegmenterConfig {
        self.abbreviations
            .as_ref()
            .map(|f| SegmenterConfig::with_abbreviation_list(&f.contents))
            .unwrap_or_default()
    }

    pub fn alias_config(&self) -> AliasConfig {
        AliasConfig {
            min_alias_chars: self.min_alias_length,
            require_capitalized: self.require_capitalized,
            include_redirects: self.include_redirect_aliases,
            strip_disambiguation_qualifier: self.strip_disambiguation_qualifier,
            matching: if self.suffixes.is_empty() {
                MatchMode::Exact
            } else {
                MatchMode::SuffixStripping(self.suffixes.clone())
            },
        }
    }

    pub fn generator_config(&self, provenance: Vec<String>) -> GeneratorConfig {
        GeneratorConfig {
            sentence_initial_exemption: self.sentence_initial_exemption,
            stoplist: self
                .stoplist
                .as_ref()
                .map(|f| {
                    f.contents
                        .lines()
                        .map(str::trim)
                        .filter(|l| !l.is_empty() && !l.starts_with('#'))
                        .map(String::from)
                        .collect()
                })
                .unwrap_or_default(),
            segmenter: self.segmenter(),
            tokenizer: self.tokenizer(),
            provenance,
        }
    }

    pub fn page_stream(&self) -> PageStreamConfig {
        PageStreamConfig {
            namespaces: self.namespaces.clone(),
            max_record_bytes: self.max_record_bytes,
        }
    }

    pub fn entity_stream(&self) -> EntityStreamConfig {
        EntityStreamConfig {
            wiki_code: self.wiki_code.clone(),
            disambiguation_classes: self.disambiguation_classes.iter().cloned().collect(),
        }
    }

    pub fn feature_config(&self) -> FeatureConfig {
        FeatureConfig {
            use_current_word: self.use_current_word,
            use_prev_next_words: self.use_prev_next_words,
            max_ngram: self.max_ngram,
            use_word_shape: self.use_word_shape,
            window: self.window,
        }
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

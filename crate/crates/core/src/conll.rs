//! CoNLL `token tag` corpora: reading, writing, validation, statistics and
//! the seeded train/dev split.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};
use std::ops::Add;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::tags::{NEType, Tag};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabeledSentence {
    pub tokens: Vec<String>,
    pub tags: Vec<Tag>,
    /// Title of the article the sentence came from; empty when read from a file.
    pub source_article: String,
}

impl LabeledSentence {
    pub fn new(tokens: Vec<String>, tags: Vec<Tag>) -> Self {
        Self {
            tokens,
            tags,
            source_article: String::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnnotatedCorpus {
    pub sentences: Vec<LabeledSentence>,
    /// Header lines, written as `# ` comments.
    pub provenance: Vec<String>,
}

impl AnnotatedCorpus {
    pub fn new(sentences: Vec<LabeledSentence>) -> Self {
        Self {
            sentences,
            provenance: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(LabeledSentence::len).sum()
    }

    /// Same tokens and tags sentence by sentence; provenance and source
    /// titles are ignored.
    pub fn same_content(&self, other: &AnnotatedCorpus) -> bool {
        self.sentences.len() == other.sentences.len()
            && self
                .sentences
                .iter()
                .zip(&other.sentences)
                .all(|(a, b)| a.tokens == b.tokens && a.tags == b.tags)
    }
}

#[derive(Debug, Error)]
pub enum ConllError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("sentence {sentence}: {message}")]
    Sentence { sentence: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn is_tag_line(line: &str) -> bool {
    let fields: Vec<&str> = line.split_whitespace().collect();
    fields.len() == 2 && fields[1].parse::<Tag>().is_ok()
}

/// Writes the corpus. With `header` set, provenance lines come first as
/// `# ` comments.
pub fn write_conll<W: Write>(corpus: &AnnotatedCorpus, mut out: W, header: bool) -> Result<(), ConllError> {
    if header {
        for line in &corpus.provenance {
            let line = format!("# {}", line.replace('\n', " "));
            if is_tag_line(&line) {
                return Err(ConllError::Sentence {
                    sentence: 0,
                    message: format!("provenance line `{line}` would read back as a token"),
                });
            }
            writeln!(out, "{line}")?;
        }
    }
    for (i, s) in corpus.sentences.iter().enumerate() {
        let bad = |message: String| ConllError::Sentence { sentence: i, message };
        if s.is_empty() {
            return Err(bad("empty sentence".into()));
        }
        if s.tokens.len() != s.tags.len() {
            return Err(bad(format!("{} tokens but {} tags", s.tokens.len(), s.tags.len())));
        }
        for (tok, tag) in s.tokens.iter().zip(&s.tags) {
            if tok.is_empty() || tok.chars().any(char::is_whitespace) {
                return Err(bad(format!("token `{tok}` is empty or contains whitespace")));
            }
            writeln!(out, "{tok} {tag}")?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn conll_string(corpus: &AnnotatedCorpus, header: bool) -> Result<String, ConllError> {
    let mut buf = Vec::new();
    write_conll(corpus, &mut buf, header)?;
    Ok(String::from_utf8(buf).expect("tokens are valid UTF-8"))
}

/// Reads a corpus. Fields may be separated by any run of spaces or tabs;
/// with more than two columns the first is the token and the last the tag.
/// Leading `# ` comment lines become provenance; `-DOCSTART-` lines are skipped.
pub fn read_conll<R: BufRead>(input: R) -> Result<AnnotatedCorpus, ConllError> {
    let mut corpus = AnnotatedCorpus::default();
    let mut current = LabeledSentence::default();
    let mut in_header = true;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        let lineno = i + 1;
        if line.trim().is_empty() {
            if !current.is_empty() {
                corpus.sentences.push(std::mem::take(&mut current));
            }
            continue;
        }
        if in_header && line.starts_with('#') && !is_tag_line(line) {
            let text = line.strip_prefix("# ").unwrap_or(&line[1..]);
            corpus.provenance.push(text.to_string());
            continue;
        }
        in_header = false;
        let fields: Vec<&str> = line.split([' ', '\t']).filter(|f| !f.is_empty()).collect();
        if fields.first() == Some(&"-DOCSTART-") {
            continue;
        }
        if fields.len() < 2 {
            return Err(ConllError::Line {
                line: lineno,
                message: format!("expected `token tag`, found {} field(s)", fields.len()),
            });
        }
        let tag = fields[fields.len() - 1].parse::<Tag>().map_err(|e| ConllError::Line {
            line: lineno,
            message: e.to_string(),
        })?;
        current.tokens.push(fields[0].to_string());
        current.tags.push(tag);
    }
    if !current.is_empty() {
        corpus.sentences.push(current);
    }
    Ok(corpus)
}

pub fn read_conll_str(text: &str) -> Result<AnnotatedCorpus, ConllError> {
    read_conll(text.as_bytes())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub sentence: usize,
    pub token: usize,
    pub reason: String,
}

/// Every `I-X` not preceded by `B-X` or `I-X`, plus length mismatches.
pub fn validate_iob(corpus: &AnnotatedCorpus) -> Vec<Violation> {
    let mut out = Vec::new();
    for (si, s) in corpus.sentences.iter().enumerate() {
        if s.tokens.len() != s.tags.len() {
            out.push(Violation {
                sentence: si,
                token: s.tokens.len().min(s.tags.len()),
                reason: format!("{} tokens but {} tags", s.tokens.len(), s.tags.len()),
            });
        }
        let mut prev = None;
        for (ti, &tag) in s.tags.iter().enumerate() {
            if !tag.may_follow(prev) {
                let after = prev.map_or("sentence start", Tag::as_str);
                out.push(Violation {
                    sentence: si,
                    token: ti,
                    reason: format!("{tag} after {after}"),
                });
            }
            prev = Some(tag);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct CorpusStats {
    pub sentence_count: u64,
    pub token_count: u64,
    pub entity_counts: BTreeMap<NEType, u64>,
}

impl CorpusStats {
    pub fn entities(&self, netype: NEType) -> u64 {
        self.entity_counts.get(&netype).copied().unwrap_or(0)
    }

    /// Tab-separated `sentences`, `tokens`, then one line per type.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("sentences\t{}\ntokens\t{}\n", self.sentence_count, self.token_count);
        for t in NEType::ALL {
            out.push_str(&format!("{t}\t{}\n", self.entities(t)));
        }
        out
    }
}

impl Add for CorpusStats {
    type Output = CorpusStats;

    fn add(mut self, rhs: CorpusStats) -> CorpusStats {
        self.sentence_count += rhs.sentence_count;
        self.token_count += rhs.token_count;
        for (t, n) in rhs.entity_counts {
            *self.entity_counts.entry(t).or_insert(0) += n;
        }
        self
    }
}

/// Sentence, token and per-type entity counts; entities are counted by `B-` tags.
pub fn corpus_stats(corpus: &AnnotatedCorpus) -> CorpusStats {
    let mut stats = CorpusStats {
        sentence_count: corpus.sentences.len() as u64,
        ..Default::default()
    };
    for t in NEType::ALL {
        stats.entity_counts.insert(t, 0);
    }
    for s in &corpus.sentences {
        stats.token_count += s.tokens.len() as u64;
        for tag in &s.tags {
            if let Tag::B(t) = tag {
                *stats.entity_counts.entry(*t).or_insert(0) += 1;
            }
        }
    }
    stats
}

#[derive(Debug, Error, PartialEq)]
pub enum SplitError {
    #[error("cannot split an empty corpus")]
    Empty,
    #[error("train fraction {0} is not strictly between 0 and 1")]
    BadFraction(f64),
}

/// Seeded sentence-level split. The train part holds `round(fraction * N)`
/// sentences; both parts keep the original sentence order.
pub fn split_corpus(
    corpus: &AnnotatedCorpus,
    train_fraction: f64,
    seed: u64,
) -> Result<(AnnotatedCorpus, AnnotatedCorpus), SplitError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(SplitError::BadFraction(train_fraction));
    }
    let n = corpus.sentences.len();
    if n == 0 {
        return Err(SplitError::Empty);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = (train_fraction * n as f64).round() as usize;
    let (train_idx, dev_idx) = order.split_at(n_train);
    let part = |idx: &[usize]| {
        let mut idx = idx.to_vec();
        idx.sort_unstable();
        AnnotatedCorpus {
            sentences: idx.into_iter().map(|i| corpus.sentences[i].clone()).collect(),
            provenance: corpus.provenance.clone(),
        }
    };
    Ok((part(train_idx), part(dev_idx)))
}

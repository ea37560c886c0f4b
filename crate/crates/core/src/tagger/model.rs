//! Averaged structured perceptron, model files and corpus tagging.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use super::decode::{viterbi, Scores};
use super::features::{extract_features, feature_id, FeatureConfig};
use crate::conll::{AnnotatedCorpus, LabeledSentence};
use crate::tags::{Tag, TAG_COUNT};

pub const MODEL_MAGIC: &str = "silver-ner-tagger";
pub const MODEL_VERSION: u32 = 1;
pub const DEFAULT_HASH_BITS: u32 = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct TaggerModel {
    pub features: FeatureConfig,
    pub hash_bits: u32,
    pub epochs: usize,
    pub seed: u64,
    /// Feature id → per-tag weight.
    pub weights: BTreeMap<u32, Scores>,
    pub start: Scores,
    pub transitions: [Scores; TAG_COUNT],
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("epochs must be at least 1")]
    NoEpochs,
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("sentence {0} is not IOB2-valid")]
    InvalidSentence(usize),
    #[error("hash bits must be between 1 and 32, got {0}")]
    HashBits(u32),
}

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("model file line {line}: {message}")]
    Line { line: usize, message: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrainReport {
    pub distinct_features: usize,
    /// Distinct feature strings that landed on an id already used by another string.
    pub collisions: usize,
    pub updates: u64,
    /// Sentences decoded incorrectly, per epoch.
    pub mistakes_per_epoch: Vec<usize>,
}

impl TrainReport {
    pub fn collision_rate(&self) -> f64 {
        if self.distinct_features == 0 {
            0.0
        } else {
            self.collisions as f64 / self.distinct_features as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs: usize,
    pub seed: u64,
    pub features: FeatureConfig,
    pub hash_bits: u32,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            seed: 1,
            features: FeatureConfig::default(),
            hash_bits: DEFAULT_HASH_BITS,
        }
    }
}

impl TaggerModel {
    pub fn empty(features: FeatureConfig, hash_bits: u32) -> Self {
        Self {
            features,
            hash_bits,
            epochs: 0,
            seed: 0,
            weights: BTreeMap::new(),
            start: [0.0; TAG_COUNT],
            transitions: [[0.0; TAG_COUNT]; TAG_COUNT],
        }
    }

    fn feature_ids<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<Vec<u32>> {
        sentence_feature_ids(tokens, &self.features, self.hash_bits)
    }

    fn emissions(&self, ids: &[Vec<u32>]) -> Vec<Scores> {
        ids.iter()
            .map(|fs| {
                let mut s = [0.0; TAG_COUNT];
                for f in fs {
                    if let Some(w) = self.weights.get(f) {
                        for (a, b) in s.iter_mut().zip(w) {
                            *a += b;
                        }
                    }
                }
                s
            })
            .collect()
    }

    pub fn decode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<Tag> {
        let e = self.emissions(&self.feature_ids(tokens));
        viterbi(&e, &self.start, &self.transitions)
    }

    fn header(&self) -> String {
        let f = &self.features;
        format!(
            "{MODEL_MAGIC}\tv{MODEL_VERSION}\tcurrent_word={}\tprev_next_words={}\tmax_ngram={}\tword_shape={}\twindow={}\thash_bits={}\tepochs={}\tseed={}",
            f.use_current_word as u8,
            f.use_prev_next_words as u8,
            f.max_ngram,
            f.use_word_shape as u8,
            f.window,
            self.hash_bits,
            self.epochs,
            self.seed
        )
    }

    /// Header line, then non-zero weights in id and tag order, then transitions.
    pub fn to_text(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for (id, w) in &self.weights {
            for (t, v) in w.iter().enumerate() {
                if *v != 0.0 {
                    let _ = writeln!(out, "f:{id:08x}\t{}\t{v}", Tag::ALL[t]);
                }
            }
        }
        for (t, v) in self.start.iter().enumerate() {
            if *v != 0.0 {
                let _ = writeln!(out, "TRANS\tSTART\t{}\t{v}", Tag::ALL[t]);
            }
        }
        for (p, row) in self.transitions.iter().enumerate() {
            for (t, v) in row.iter().enumerate() {
                if *v != 0.0 {
                    let _ = writeln!(out, "TRANS\t{}\t{}\t{v}", Tag::ALL[p], Tag::ALL[t]);
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, ModelFileError> {
        let mut lines = text.lines().enumerate();
        let err = |line: usize, message: String| ModelFileError::Line { line: line + 1, message };
        let (_, header) = lines.next().ok_or_else(|| err(0, "empty model file".into()))?;
        let mut fields = header.split('\t');
        if fields.next() != Some(MODEL_MAGIC) {
            return Err(err(0, "not a tagger model".into()));
        }
        let version = fields.next().unwrap_or("");
        if version != format!("v{MODEL_VERSION}") {
            return Err(err(0, format!("unsupported model version `{version}`")));
        }
        let mut kv = HashMap::new();
        for f in fields {
            let (k, v) = f.split_once('=').ok_or_else(|| err(0, format!("bad header field `{f}`")))?;
            kv.insert(k, v);
        }
        let num = |k: &str| -> Result<u64, ModelFileError> {
            kv.get(k)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| err(0, format!("missing or bad header field `{k}`")))
        };
        let mut model = TaggerModel::empty(
            FeatureConfig {
                use_current_word: num("current_word")? != 0,
                use_prev_next_words: num("prev_next_words")? != 0,
                max_ngram: num("max_ngram")? as usize,
                use_word_shape: num("word_shape")? != 0,
                window: num("window")? as usize,
            },
            num("hash_bits")? as u32,
        );
        model.epochs = num("epochs")? as usize;
        model.seed = num("seed")?;
        let tag = |i: usize, s: &str| s.parse::<Tag>().map_err(|e| err(i, e.to_string()));
        let weight = |i: usize, s: &str| s.parse::<f64>().map_err(|_| err(i, format!("bad weight `{s}`")));
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            match f.as_slice() {
                ["TRANS", "START", t, w] => model.start[tag(i, t)?.index()] = weight(i, w)?,
                ["TRANS", p, t, w] => model.transitions[tag(i, p)?.index()][tag(i, t)?.index()] = weight(i, w)?,
                [id, t, w] => {
                    let id = id
                        .strip_prefix("f:")
                        .and_then(|h| u32::from_str_radix(h, 16).ok())
                        .ok_or_else(|| err(i, format!("bad feature id `{id}`")))?;
                    model.weights.entry(id).or_insert([0.0; TAG_COUNT])[tag(i, t)?.index()] = weight(i, w)?;
                }
                _ => return Err(err(i, "expected 3 or 4 tab-separated fields".into())),
            }
        }
        Ok(model)
    }
}

fn sentence_feature_ids<S: AsRef<str>>(tokens: &[S], config: &FeatureConfig, bits: u32) -> Vec<Vec<u32>> {
    (0..tokens.len())
        .map(|i| {
            extract_features(tokens, i, config)
                .iter()
                .map(|f| feature_id(f, bits))
                .collect()
        })
        .collect()
}

/// Weights plus the running sums needed for averaging.
struct Learner {
    w: HashMap<u32, Scores>,
    u: HashMap<u32, Scores>,
    start: Scores,
    start_u: Scores,
    trans: [Scores; TAG_COUNT],
    trans_u: [Scores; TAG_COUNT],
    c: f64,
}

impl Learner {
    fn emissions(&self, ids: &[Vec<u32>]) -> Vec<Scores> {
        ids.iter()
            .map(|fs| {
                let mut s = [0.0; TAG_COUNT];
                for f in fs {
                    if let Some(w) = self.w.get(f) {
                        for (a, b) in s.iter_mut().zip(w) {
                            *a += b;
                        }
                    }
                }
                s
            })
            .collect()
    }

    fn bump_feature(&mut self, f: u32, t: usize, delta: f64) {
        self.w.entry(f).or_insert([0.0; TAG_COUNT])[t] += delta;
        self.u.entry(f).or_insert([0.0; TAG_COUNT])[t] += self.c * delta;
    }

    fn bump_transition(&mut self, prev: Option<usize>, t: usize, delta: f64) {
        match prev {
            None => {
                self.start[t] += delta;
                self.start_u[t] += self.c * delta;
            }
            Some(p) => {
                self.trans[p][t] += delta;
                self.trans_u[p][t] += self.c * delta;
            }
        }
    }

    fn update(&mut self, ids: &[Vec<u32>], gold: &[Tag], pred: &[Tag]) {
        for i in 0..gold.len() {
            let (g, p) = (gold[i].index(), pred[i].index());
            if g != p {
                for &f in &ids[i] {
                    self.bump_feature(f, g, 1.0);
                    self.bump_feature(f, p, -1.0);
                }
            }
            let gp = (i > 0).then(|| gold[i - 1].index());
            let pp = (i > 0).then(|| pred[i - 1].index());
            if (gp, g) != (pp, p) {
                self.bump_transition(gp, g, 1.0);
                self.bump_transition(pp, p, -1.0);
            }
        }
    }

    fn averaged(&self) -> (BTreeMap<u32, Scores>, Scores, [Scores; TAG_COUNT]) {
        let avg = |w: f64, u: f64| {
            let v = w - u / self.c;
            if v == 0.0 {
                0.0
            } else {
                v
            }
        };
        let mut weights = BTreeMap::new();
        for (f, w) in &self.w {
            let u = self.u[f];
            let mut a = [0.0; TAG_COUNT];
            for t in 0..TAG_COUNT {
                a[t] = avg(w[t], u[t]);
            }
            if a.iter().any(|v| *v != 0.0) {
                weights.insert(*f, a);
            }
        }
        let mut start = [0.0; TAG_COUNT];
        let mut trans = [[0.0; TAG_COUNT]; TAG_COUNT];
        for t in 0..TAG_COUNT {
            start[t] = avg(self.start[t], self.start_u[t]);
            for (p, row) in trans.iter_mut().enumerate() {
                row[t] = avg(self.trans[p][t], self.trans_u[p][t]);
            }
        }
        (weights, start, trans)
    }
}

/// Averaged structured perceptron. Sentence order is reshuffled every epoch
/// from `seed`, so equal inputs give equal models.
pub fn train(corpus: &AnnotatedCorpus, config: &TrainConfig) -> Result<(TaggerModel, TrainReport), TrainError> {
    if config.epochs < 1 {
        return Err(TrainError::NoEpochs);
    }
    if !(1..=32).contains(&config.hash_bits) {
        return Err(TrainError::HashBits(config.hash_bits));
    }
    let sentences: Vec<&LabeledSentence> = corpus.sentences.iter().filter(|s| !s.is_empty()).collect();
    if sentences.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }
    if let Some(i) = corpus.sentences.iter().position(|s| !crate::tags::is_iob2_valid(&s.tags)) {
        return Err(TrainError::InvalidSentence(i));
    }

    let mut report = TrainReport::default();
    let mut owner: HashMap<u32, String> = HashMap::new();
    let mut seen: HashSet<String> = HashSet::new();
    let ids: Vec<Vec<Vec<u32>>> = sentences
        .iter()
        .map(|s| {
            (0..s.tokens.len())
                .map(|i| {
                    extract_features(&s.tokens, i, &config.features)
                        .into_iter()
                        .map(|f| {
                            let id = feature_id(&f, config.hash_bits);
                            if seen.insert(f.clone()) {
                                match owner.get(&id) {
                                    Some(o) if *o != f => report.collisions += 1,
                                    Some(_) => {}
                                    None => {
                                        owner.insert(id, f);
                                    }
                                }
                            }
                            id
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    report.distinct_features = seen.len();

    let mut learner = Learner {
        w: HashMap::new(),
        u: HashMap::new(),
        start: [0.0; TAG_COUNT],
        start_u: [0.0; TAG_COUNT],
        trans: [[0.0; TAG_COUNT]; TAG_COUNT],
        trans_u: [[0.0; TAG_COUNT]; TAG_COUNT],
        c: 1.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..sentences.len()).collect();
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut mistakes = 0;
        for &k in &order {
            let e = learner.emissions(&ids[k]);
            let pred = viterbi(&e, &learner.start, &learner.trans);
            if pred != sentences[k].tags {
                mistakes += 1;
                report.updates += 1;
                learner.update(&ids[k], &sentences[k].tags, &pred);
            }
            learner.c += 1.0;
        }
        report.mistakes_per_epoch.push(mistakes);
    }
    let (weights, start, transitions) = learner.averaged();
    let model = TaggerModel {
        features: config.features.clone(),
        hash_bits: config.hash_bits,
        epochs: config.epochs,
        seed: config.seed,
        weights,
        start,
        transitions,
    };
    Ok((model, report))
}

/// Replaces every tag with the model's prediction; tokens are untouched.
pub fn tag_corpus(model: &TaggerModel, corpus: &AnnotatedCorpus) -> AnnotatedCorpus {
    let sentences = corpus
        .sentences
        .par_iter()
        .map(|s| LabeledSentence {
            tokens: s.tokens.clone(),
            tags: model.decode(&s.tokens),
            source_article: s.source_article.clone(),
        })
        .collect();
    AnnotatedCorpus {
        sentences,
        provenance: corpus.provenance.clone(),
    }
}

/// A linearly separable toy corpus: disjoint per-type vocabularies and
/// entities always separated by at least one `O` word.
pub fn synthetic_corpus(sentences: usize, seed: u64) -> AnnotatedCorpus {
    use crate::tags::NEType;
    use rand::Rng;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = |netype: NEType, i: usize| match netype {
        NEType::Per => format!("Անձ{i}"),
        NEType::Org => format!("Կազմ{i}"),
        NEType::Loc => format!("Վայր{i}"),
    };
    let mut out = Vec::with_capacity(sentences);
    for _ in 0..sentences {
        let mut tokens = Vec::new();
        let mut tags = Vec::new();
        let parts = rng.random_range(2..6);
        for p in 0..parts {
            if p > 0 || rng.random_bool(0.5) {
                for _ in 0..rng.random_range(1..3) {
                    tokens.push(format!("բառ{}", rng.random_range(0..15)));
                    tags.push(Tag::O);
                }
            }
            let netype = NEType::ALL[rng.random_range(0..3)];
            for k in 0..rng.random_range(1..4) {
                tokens.push(vocab(netype, rng.random_range(0..8)));
                tags.push(if k == 0 { Tag::B(netype) } else { Tag::I(netype) });
            }
        }
        tokens.push("։".into());
        tags.push(Tag::O);
        out.push(LabeledSentence::new(tokens, tags));
    }
    AnnotatedCorpus::new(out)
}

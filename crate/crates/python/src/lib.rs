//! Python bindings for the corpus tools, scorer and baseline tagger.

use std::collections::BTreeMap;
use std::path::Path;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use silver_ner_core::classify::TypeMapping;
use silver_ner_core::config::PipelineConfig;
use silver_ner_core::conll::{self, AnnotatedCorpus as CoreCorpus, LabeledSentence};
use silver_ner_core::dump::{stream_articles, stream_entities};
use silver_ner_core::eval;
use silver_ner_core::pipeline::run_in_memory;
use silver_ner_core::tagger::{self, TaggerModel, TrainConfig};
use silver_ner_core::tags::{NEType, Tag, TAG_COUNT};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_tags(tags: &[String]) -> PyResult<Vec<Tag>> {
    tags.iter().map(|t| t.parse::<Tag>().map_err(value_err)).collect()
}

fn tag_strings(tags: &[Tag]) -> Vec<String> {
    tags.iter().map(|t| t.to_string()).collect()
}

/// An annotated corpus: sentences of (tokens, IOB2 tags) plus provenance lines.
#[pyclass(name = "Corpus", module = "silver_ner", skip_from_py_object)]
#[derive(Clone)]
struct Corpus {
    inner: CoreCorpus,
}

#[pymethods]
impl Corpus {
    #[new]
    #[pyo3(signature = (sentences, provenance = Vec::new()))]
    fn new(sentences: Vec<(Vec<String>, Vec<String>)>, provenance: Vec<String>) -> PyResult<Self> {
        let mut out = Vec::with_capacity(sentences.len());
        for (i, (tokens, tags)) in sentences.into_iter().enumerate() {
            if tokens.len() != tags.len() {
                return Err(PyValueError::new_err(format!(
                    "sentence {i}: {} tokens but {} tags",
                    tokens.len(),
                    tags.len()
                )));
            }
            out.push(LabeledSentence::new(tokens, parse_tags(&tags)?));
        }
        let mut inner = CoreCorpus::new(out);
        inner.provenance = provenance;
        Ok(Self { inner })
    }

    /// Parses CoNLL text.
    #[staticmethod]
    fn from_conll(text: &str) -> PyResult<Self> {
        conll::read_conll_str(text).map(|inner| Self { inner }).map_err(value_err)
    }

    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
        Self::from_conll(&text)
    }

    #[pyo3(signature = (header = true))]
    fn to_conll(&self, header: bool) -> PyResult<String> {
        conll::conll_string(&self.inner, header).map_err(value_err)
    }

    #[getter]
    fn sentences(&self) -> Vec<(Vec<String>, Vec<String>)> {
        self.inner
            .sentences
            .iter()
            .map(|s| (s.tokens.clone(), tag_strings(&s.tags)))
            .collect()
    }

    #[getter]
    fn provenance(&self) -> Vec<String> {
        self.inner.provenance.clone()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Corpus({} sentences, {} tokens)", self.inner.len(), self.inner.token_count())
    }

    /// Sentence, token and per-type entity counts.
    fn stats(&self) -> BTreeMap<String, u64> {
        let s = conll::corpus_stats(&self.inner);
        let mut out = BTreeMap::from([
            ("sentences".to_string(), s.sentence_count),
            ("tokens".to_string(), s.token_count),
        ]);
        for ty in [NEType::Per, NEType::Org, NEType::Loc] {
            out.insert(ty.to_string(), s.entities(ty));
        }
        out
    }

    /// `(sentence, token, reason)` for every IOB2 violation.
    fn validate(&self) -> Vec<(usize, usize, String)> {
        conll::validate_iob(&self.inner)
            .into_iter()
            .map(|v| (v.sentence, v.token, v.reason))
            .collect()
    }

    #[pyo3(signature = (train_fraction = 0.8, seed = 1))]
    fn split(&self, train_fraction: f64, seed: u64) -> PyResult<(Corpus, Corpus)> {
        let (train, dev) = conll::split_corpus(&self.inner, train_fraction, seed).map_err(value_err)?;
        Ok((Corpus { inner: train }, Corpus { inner: dev }))
    }
}

/// Chunk-level scores for a prediction against gold.
#[pyclass(name = "EvalReport", module = "silver_ner")]
struct EvalReport {
    inner: eval::EvalReport,
}

#[pymethods]
impl EvalReport {
    /// `{type: (precision, recall, f1)}` as percentages, with an `overall` key.
    fn scores(&self) -> BTreeMap<String, (f64, f64, f64)> {
        let mut out: BTreeMap<String, (f64, f64, f64)> = self
            .inner
            .per_type
            .iter()
            .map(|(t, p)| (t.to_string(), (p.precision, p.recall, p.f1)))
            .collect();
        let o = self.inner.overall;
        out.insert("overall".into(), (o.precision, o.recall, o.f1));
        out
    }

    #[getter]
    fn f1(&self) -> f64 {
        self.inner.overall.f1
    }

    fn table(&self) -> String {
        self.inner.render_table()
    }

    fn __repr__(&self) -> String {
        format!("EvalReport(f1={:.2})", self.inner.overall.f1)
    }
}

#[pyfunction]
fn evaluate(gold: &Corpus, pred: &Corpus) -> PyResult<EvalReport> {
    eval::score(&gold.inner, &pred.inner)
        .map(|inner| EvalReport { inner })
        .map_err(value_err)
}

/// Token-level confusion counts, rows actual and columns predicted, in tag order.
#[pyfunction]
fn confusion(gold: &Corpus, pred: &Corpus) -> PyResult<(Vec<String>, Vec<Vec<u64>>)> {
    let m = eval::confusion(&gold.inner, &pred.inner).map_err(value_err)?;
    Ok((tag_strings(&Tag::ALL), m.counts.iter().map(|r| r.to_vec()).collect()))
}

/// `(type, start, end)` chunks with inclusive ends.
#[pyfunction]
fn chunks(tags: Vec<String>) -> PyResult<Vec<(String, usize, usize)>> {
    Ok(eval::extract_chunks(&parse_tags(&tags)?)
        .into_iter()
        .map(|c| (c.netype.to_string(), c.start, c.end))
        .collect())
}

fn scores_row(row: &[f64]) -> PyResult<[f64; TAG_COUNT]> {
    row.try_into()
        .map_err(|_| PyValueError::new_err(format!("expected {TAG_COUNT} scores per row, got {}", row.len())))
}

/// Best IOB2-valid tag sequence for per-token emission scores, start scores
/// and a 7x7 transition matrix, all in tag order.
#[pyfunction]
fn viterbi(emissions: Vec<Vec<f64>>, start: Vec<f64>, transitions: Vec<Vec<f64>>) -> PyResult<Vec<String>> {
    let em: Vec<[f64; TAG_COUNT]> = emissions.iter().map(|r| scores_row(r)).collect::<PyResult<_>>()?;
    if transitions.len() != TAG_COUNT {
        return Err(PyValueError::new_err(format!("expected {TAG_COUNT} transition rows")));
    }
    let mut trans = [[0.0; TAG_COUNT]; TAG_COUNT];
    for (dst, row) in trans.iter_mut().zip(&transitions) {
        *dst = scores_row(row)?;
    }
    Ok(tag_strings(&tagger::viterbi(&em, &scores_row(&start)?, &trans)))
}

/// Averaged-perceptron sequence tagger.
#[pyclass(name = "Tagger", module = "silver_ner")]
struct Tagger {
    model: TaggerModel,
}

#[pymethods]
impl Tagger {
    #[staticmethod]
    #[pyo3(signature = (corpus, epochs = 10, seed = 1))]
    fn train(corpus: &Corpus, epochs: usize, seed: u64) -> PyResult<Self> {
        let cfg = TrainConfig {
            epochs,
            seed,
            ..TrainConfig::default()
        };
        let (model, _) = tagger::train(&corpus.inner, &cfg).map_err(value_err)?;
        Ok(Self { model })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        TaggerModel::from_text(text).map(|model| Self { model }).map_err(value_err)
    }

    fn to_text(&self) -> String {
        self.model.to_text()
    }

    fn tag(&self, tokens: Vec<String>) -> Vec<String> {
        tag_strings(&self.model.decode(&tokens))
    }

    fn tag_corpus(&self, corpus: &Corpus) -> Corpus {
        Corpus {
            inner: tagger::tag_corpus(&self.model, &corpus.inner),
        }
    }
}

/// The separable toy corpus used to sanity-check training.
#[pyfunction]
#[pyo3(signature = (sentences = 50, seed = 1))]
fn synthetic_corpus(sentences: usize, seed: u64) -> Corpus {
    Corpus {
        inner: tagger::synthetic_corpus(sentences, seed),
    }
}

/// Runs the generator over an XML page dump and a Wikidata JSON dump held in
/// memory. Returns the corpus and the run counters.
#[pyfunction]
#[pyo3(signature = (pages_xml, entities_json, config = None, jobs = 1))]
fn generate(
    pages_xml: &str,
    entities_json: &str,
    config: Option<&str>,
    jobs: usize,
) -> PyResult<(Corpus, BTreeMap<String, u64>)> {
    let cfg = match config {
        Some(text) => PipelineConfig::parse(text, Path::new(".")).map_err(value_err)?,
        None => PipelineConfig::default(),
    };
    let mut pages = stream_articles(pages_xml.as_bytes(), cfg.page_stream());
    let articles = pages.by_ref().collect::<Result<Vec<_>, _>>().map_err(value_err)?;
    let mut ents = stream_entities(entities_json.as_bytes(), cfg.entity_stream());
    let entities = ents.by_ref().collect::<Result<Vec<_>, _>>().map_err(value_err)?;
    let out = run_in_memory(&articles, &entities, &TypeMapping::shipped(), &cfg, jobs.max(1)).map_err(value_err)?;
    let mut counters = out.report.counters;
    counters.merge(pages.counters());
    counters.merge(ents.counters());
    let counts = counters.iter().map(|(k, v)| (k.to_string(), v)).collect();
    Ok((Corpus { inner: out.report.corpus }, counts))
}

#[pymodule]
fn silver_ner(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Corpus>()?;
    m.add_class::<EvalReport>()?;
    m.add_class::<Tagger>()?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(confusion, m)?)?;
    m.add_function(wrap_pyfunction!(chunks, m)?)?;
    m.add_function(wrap_pyfunction!(viterbi, m)?)?;
    m.add_function(wrap_pyfunction!(synthetic_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    Ok(())
}

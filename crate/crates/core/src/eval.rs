//! Chunk-level scoring in the conlleval style and the token confusion matrix.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::conll::AnnotatedCorpus;
use crate::tags::{NEType, Tag, TAG_COUNT};

/// A typed token run, `start..=end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChunkSpan {
    pub netype: NEType,
    pub sentence: usize,
    pub start: usize,
    pub end: usize,
}

/// Maximal typed runs. A stray `I-X` (after `O` or another type) opens a
/// new chunk of type X. Chunks carry `sentence = 0`.
pub fn extract_chunks(tags: &[Tag]) -> Vec<ChunkSpan> {
    let mut chunks = Vec::new();
    let mut open: Option<(NEType, usize)> = None;
    let close = |open: &mut Option<(NEType, usize)>, end: usize, chunks: &mut Vec<ChunkSpan>| {
        if let Some((netype, start)) = open.take() {
            chunks.push(ChunkSpan {
                netype,
                sentence: 0,
                start,
                end,
            });
        }
    };
    for (i, &tag) in tags.iter().enumerate() {
        match tag {
            Tag::O => close(&mut open, i.wrapping_sub(1), &mut chunks),
            Tag::B(t) => {
                close(&mut open, i.wrapping_sub(1), &mut chunks);
                open = Some((t, i));
            }
            Tag::I(t) => {
                if !matches!(open, Some((cur, _)) if cur == t) {
                    close(&mut open, i.wrapping_sub(1), &mut chunks);
                    open = Some((t, i));
                }
            }
        }
    }
    close(&mut open, tags.len().wrapping_sub(1), &mut chunks);
    chunks
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("gold has {gold} sentences but prediction has {pred}")]
    SentenceCount { gold: usize, pred: usize },
    #[error("sentence {sentence}: gold has {gold} tokens but prediction has {pred}")]
    TokenCount { sentence: usize, gold: usize, pred: usize },
    #[error("sentence {sentence}, token {token}: gold `{gold}` but prediction `{pred}`")]
    TokenText {
        sentence: usize,
        token: usize,
        gold: String,
        pred: String,
    },
}

fn check_alignment(gold: &AnnotatedCorpus, pred: &AnnotatedCorpus) -> Result<(), EvalError> {
    if gold.sentences.len() != pred.sentences.len() {
        return Err(EvalError::SentenceCount {
            gold: gold.sentences.len(),
            pred: pred.sentences.len(),
        });
    }
    for (si, (g, p)) in gold.sentences.iter().zip(&pred.sentences).enumerate() {
        if g.tokens.len() != p.tokens.len() || g.tags.len() != p.tags.len() {
            return Err(EvalError::TokenCount {
                sentence: si,
                gold: g.tokens.len(),
                pred: p.tokens.len(),
            });
        }
        if let Some(ti) = (0..g.tokens.len()).find(|&i| g.tokens[i] != p.tokens[i]) {
            return Err(EvalError::TokenText {
                sentence: si,
                token: ti,
                gold: g.tokens[ti].clone(),
                pred: p.tokens[ti].clone(),
            });
        }
    }
    Ok(())
}

/// Precision, recall and F1 as percentages.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    /// A zero denominator gives 0.
    pub fn from_counts(correct: u64, predicted: u64, gold: u64) -> Self {
        let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { 100.0 * a as f64 / b as f64 };
        let precision = ratio(correct, predicted);
        let recall = ratio(correct, gold);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self { precision, recall, f1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ChunkCounts {
    pub correct: u64,
    pub predicted: u64,
    pub gold: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub per_type: BTreeMap<NEType, Prf>,
    pub overall: Prf,
    pub counts: BTreeMap<NEType, ChunkCounts>,
}

impl EvalReport {
    pub fn support(&self, netype: NEType) -> u64 {
        self.counts.get(&netype).map_or(0, |c| c.gold)
    }

    pub fn overall_counts(&self) -> ChunkCounts {
        self.counts.values().fold(ChunkCounts::default(), |a, c| ChunkCounts {
            correct: a.correct + c.correct,
            predicted: a.predicted + c.predicted,
            gold: a.gold + c.gold,
        })
    }

    /// Aligned table with two-decimal percentages.
    pub fn render_table(&self) -> String {
        let mut out = format!("{:<8}{:>10}{:>10}{:>10}{:>9}\n", "", "Precision", "Recall", "F1", "Support");
        let row = |out: &mut String, name: &str, m: &Prf, support: u64| {
            let _ = writeln!(
                out,
                "{name:<8}{:>10.2}{:>10.2}{:>10.2}{support:>9}",
                m.precision, m.recall, m.f1
            );
        };
        for t in NEType::ALL {
            row(&mut out, t.as_str(), &self.per_type[&t], self.support(t));
        }
        row(&mut out, "Overall", &self.overall, self.overall_counts().gold);
        out
    }

    /// `type<TAB>P<TAB>R<TAB>F1` lines, overall last.
    pub fn render_tsv(&self) -> String {
        let mut out = String::new();
        let mut line = |name: &str, m: &Prf| {
            let _ = writeln!(out, "{name}\t{:.2}\t{:.2}\t{:.2}", m.precision, m.recall, m.f1);
        };
        for t in NEType::ALL {
            line(t.as_str(), &self.per_type[&t]);
        }
        line("overall", &self.overall);
        out
    }
}

/// Exact-match chunk scoring: a predicted chunk is correct when a gold chunk
/// has the same type and the same boundaries.
pub fn score(gold: &AnnotatedCorpus, pred: &AnnotatedCorpus) -> Result<EvalReport, EvalError> {
    check_alignment(gold, pred)?;
    let mut counts: BTreeMap<NEType, ChunkCounts> = NEType::ALL.iter().map(|&t| (t, ChunkCounts::default())).collect();
    for (g, p) in gold.sentences.iter().zip(&pred.sentences) {
        let gc = extract_chunks(&g.tags);
        let pc = extract_chunks(&p.tags);
        for c in &gc {
            counts.get_mut(&c.netype).unwrap().gold += 1;
        }
        for c in &pc {
            let entry = counts.get_mut(&c.netype).unwrap();
            entry.predicted += 1;
            if gc.contains(c) {
                entry.correct += 1;
            }
        }
    }
    let per_type = counts
        .iter()
        .map(|(&t, c)| (t, Prf::from_counts(c.correct, c.predicted, c.gold)))
        .collect();
    let mut report = EvalReport {
        per_type,
        overall: Prf::default(),
        counts,
    };
    let o = report.overall_counts();
    report.overall = Prf::from_counts(o.correct, o.predicted, o.gold);
    Ok(report)
}

/// Token counts indexed by `[actual][predicted]` in tag index order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; TAG_COUNT]; TAG_COUNT],
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn get(&self, actual: Tag, predicted: Tag) -> u64 {
        self.counts[actual.index()][predicted.index()]
    }

    /// Diagonal over column sum per predicted tag, as a percentage; 0 for an empty column.
    pub fn precision_row(&self) -> [f64; TAG_COUNT] {
        let mut row = [0.0; TAG_COUNT];
        for (p, slot) in row.iter_mut().enumerate() {
            let col: u64 = (0..TAG_COUNT).map(|a| self.counts[a][p]).sum();
            if col > 0 {
                *slot = 100.0 * self.counts[p][p] as f64 / col as f64;
            }
        }
        row
    }

    pub fn render(&self) -> String {
        let width = 8;
        let mut out = String::new();
        let _ = write!(out, "{:<width$}", "");
        for t in Tag::ALL {
            let _ = write!(out, "{:>width$}", t.as_str());
        }
        out.push('\n');
        for a in Tag::ALL {
            let _ = write!(out, "{:<width$}", a.as_str());
            for p in Tag::ALL {
                let _ = write!(out, "{:>width$}", self.get(a, p));
            }
            out.push('\n');
        }
        let _ = write!(out, "{:<width$}", "Prec(%)");
        for v in self.precision_row() {
            let _ = write!(out, "{v:>width$.2}");
        }
        out.push('\n');
        out
    }
}

pub fn confusion(gold: &AnnotatedCorpus, pred: &AnnotatedCorpus) -> Result<ConfusionMatrix, EvalError> {
    check_alignment(gold, pred)?;
    let mut counts = [[0u64; TAG_COUNT]; TAG_COUNT];
    for (g, p) in gold.sentences.iter().zip(&pred.sentences) {
        for (a, b) in g.tags.iter().zip(&p.tags) {
            counts[a.index()][b.index()] += 1;
        }
    }
    Ok(ConfusionMatrix { counts })
}

//! Article text to labeled sentences: link labeling, alias inference,
//! boundary adjustment, sentence selection and IOB emission.

use std::collections::HashSet;

use rayon::prelude::*;
use thiserror::Error;

use crate::alias::AliasDictionary;
use crate::classify::{classify_article, WikiIndex};
use crate::conll::{corpus_stats, AnnotatedCorpus, CorpusStats, LabeledSentence};
use crate::diagnostics::Counters;
use crate::dump::RawArticle;
use crate::tags::{NEType, Tag};
use crate::text::{char_slice, segment_sentences, tokenize, SegmenterConfig, Token, TokenizerRules};
use crate::wikitext::{parse_wikitext, WikiLink};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    Explicit,
    Inferred,
}

/// A labeled token range, `start_token..=end_token`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkSpan {
    pub start_token: usize,
    pub end_token: usize,
    pub target: String,
    pub anchor: String,
    pub origin: Origin,
    pub netype: Option<NEType>,
}

impl LinkSpan {
    pub fn overlaps(&self, other: &LinkSpan) -> bool {
        self.start_token <= other.end_token && other.start_token <= self.end_token
    }

    pub fn covers(&self, token: usize) -> bool {
        (self.start_token..=self.end_token).contains(&token)
    }

    fn with_range(&self, start: usize, end: usize, tokens: &[Token]) -> LinkSpan {
        LinkSpan {
            start_token: start,
            end_token: end,
            anchor: join_tokens(&tokens[start..=end]),
            ..self.clone()
        }
    }
}

fn join_tokens(tokens: &[Token]) -> String {
    tokens.iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    /// The first word of a sentence may be capitalized without a link.
    pub sentence_initial_exemption: bool,
    /// Capitalized words that never need a link.
    pub stoplist: HashSet<String>,
    pub segmenter: SegmenterConfig,
    pub tokenizer: TokenizerRules,
    /// Header lines for the emitted corpus.
    pub provenance: Vec<String>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            sentence_initial_exemption: true,
            stoplist: HashSet::new(),
            segmenter: SegmenterConfig::default(),
            tokenizer: TokenizerRules::default(),
            provenance: Vec::new(),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenerateError {
    #[error("article `{article}`: spans {first:?} and {second:?} overlap")]
    OverlappingSpans {
        article: String,
        first: (usize, usize),
        second: (usize, usize),
    },
    #[error("span {start}..={end} is outside a sentence of {len} tokens")]
    SpanOutOfRange { start: usize, end: usize, len: usize },
    #[error("cannot build worker pool: {0}")]
    ThreadPool(String),
}

/// Maps character-offset links onto token spans. Links that do not start and
/// end on token boundaries are widened to the enclosing tokens; a link
/// overlapping an earlier one is dropped.
pub fn label_links(tokens: &[Token], links: &[WikiLink], index: &WikiIndex, counters: &mut Counters) -> Vec<LinkSpan> {
    let mut spans: Vec<LinkSpan> = Vec::new();
    for link in links {
        let first = tokens.iter().position(|t| t.end > link.start);
        let last = tokens.iter().rposition(|t| t.start < link.end);
        let (Some(start), Some(end)) = (first, last) else {
            counters.incr("links_without_tokens");
            continue;
        };
        if start > end {
            counters.incr("links_without_tokens");
            continue;
        }
        if tokens[start].start != link.start || tokens[end].end != link.end {
            counters.incr("links_snapped");
        }
        let netype = classify_article(&link.target, index);
        let span = LinkSpan {
            start_token: start,
            end_token: end,
            target: link.target.clone(),
            anchor: link.anchor.clone(),
            origin: Origin::Explicit,
            netype,
        };
        if spans.iter().any(|s| s.overlaps(&span)) {
            counters.incr("links_overlap_dropped");
            continue;
        }
        counters.incr(if netype.is_some() {
            "links_classified"
        } else {
            "links_unclassified"
        });
        spans.push(span);
    }
    spans.sort_by_key(|s| s.start_token);
    spans
}

/// Longest-match alias spans over tokens not covered by `existing`, scanning
/// left to right and resuming after each match.
pub fn infer_alias_links(tokens: &[Token], existing: &[LinkSpan], dict: &AliasDictionary) -> Vec<LinkSpan> {
    let texts: Vec<&str> = tokens.iter().map(|t| t.text.as_str()).collect();
    let covered = |i: usize| existing.iter().any(|s| s.covers(i));
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        if covered(i) {
            i += 1;
            continue;
        }
        let limit = (i..tokens.len()).find(|&j| covered(j)).unwrap_or(tokens.len());
        match dict.lookup_longest(&texts[..limit], i) {
            Some((entry, k)) => {
                out.push(LinkSpan {
                    start_token: i,
                    end_token: i + k - 1,
                    target: entry.target.clone(),
                    anchor: join_tokens(&tokens[i..i + k]),
                    origin: Origin::Inferred,
                    netype: Some(entry.netype),
                });
                i += k;
            }
            None => i += 1,
        }
    }
    out
}

/// Trims a typed span at its first `(` and handles commas: when every
/// comma-separated part is a dictionary alias the span is split into one span
/// per part, otherwise it is cut at the first comma. Empty results are dropped.
pub fn adjust_boundaries(
    span: &LinkSpan,
    tokens: &[Token],
    dict: &AliasDictionary,
    counters: &mut Counters,
) -> Vec<LinkSpan> {
    let (start, mut end) = (span.start_token, span.end_token);
    if let Some(p) = (start..=end).find(|&i| tokens[i].text == "(") {
        counters.incr("spans_parenthesis_trimmed");
        if p == start {
            counters.incr("spans_dropped_empty");
            return Vec::new();
        }
        end = p - 1;
    }
    let commas: Vec<usize> = (start..=end).filter(|&i| tokens[i].text == ",").collect();
    if commas.is_empty() {
        return vec![span.with_range(start, end, tokens)];
    }
    let mut bounds = Vec::new();
    let mut seg_start = start;
    for &c in commas.iter().chain(std::iter::once(&(end + 1))) {
        bounds.push((seg_start, c));
        seg_start = c + 1;
    }
    let parts: Option<Vec<LinkSpan>> = bounds
        .iter()
        .map(|&(s, e)| {
            if s >= e {
                return None;
            }
            let texts: Vec<&str> = tokens[s..e].iter().map(|t| t.text.as_str()).collect();
            dict.lookup_exact(&texts).map(|entry| LinkSpan {
                start_token: s,
                end_token: e - 1,
                target: entry.target.clone(),
                anchor: join_tokens(&tokens[s..e]),
                origin: span.origin,
                netype: Some(entry.netype),
            })
        })
        .collect();
    if let Some(parts) = parts {
        counters.incr("spans_comma_split");
        return parts;
    }
    counters.incr("spans_comma_truncated");
    if commas[0] == start {
        counters.incr("spans_dropped_empty");
        return Vec::new();
    }
    vec![span.with_range(start, commas[0] - 1, tokens)]
}

/// Whether the sentence has a typed span and every capitalized token is
/// covered by some span or exempt.
pub fn select_sentence(tokens: &[Token], spans: &[LinkSpan], config: &GeneratorConfig) -> bool {
    select_reason(tokens, spans, config).is_none()
}

fn select_reason(tokens: &[Token], spans: &[LinkSpan], config: &GeneratorConfig) -> Option<&'static str> {
    if !spans.iter().any(|s| s.netype.is_some()) {
        return Some("sentences_rejected_no_entity");
    }
    let first_word = tokens.iter().position(|t| t.text.chars().any(char::is_alphanumeric));
    let uncovered = tokens.iter().enumerate().any(|(i, t)| {
        t.is_capitalized()
            && !spans.iter().any(|s| s.covers(i))
            && !(config.sentence_initial_exemption && Some(i) == first_word)
            && !config.stoplist.contains(&t.text)
    });
    uncovered.then_some("sentences_rejected_unlinked_capital")
}

/// B-/I- tags for typed spans, O elsewhere. Untyped spans are ignored.
pub fn emit_iob(tokens: &[Token], spans: &[LinkSpan], source_article: &str) -> Result<LabeledSentence, GenerateError> {
    let mut tags = vec![Tag::O; tokens.len()];
    let mut typed: Vec<&LinkSpan> = spans.iter().filter(|s| s.netype.is_some()).collect();
    typed.sort_by_key(|s| s.start_token);
    for pair in typed.windows(2) {
        if pair[0].overlaps(pair[1]) {
            return Err(GenerateError::OverlappingSpans {
                article: source_article.to_string(),
                first: (pair[0].start_token, pair[0].end_token),
                second: (pair[1].start_token, pair[1].end_token),
            });
        }
    }
    for s in typed {
        if s.start_token > s.end_token || s.end_token >= tokens.len() {
            return Err(GenerateError::SpanOutOfRange {
                start: s.start_token,
                end: s.end_token,
                len: tokens.len(),
            });
        }
        let t = s.netype.expect("typed");
        tags[s.start_token] = Tag::B(t);
        for tag in &mut tags[s.start_token + 1..=s.end_token] {
            *tag = Tag::I(t);
        }
    }
    Ok(LabeledSentence {
        tokens: tokens.iter().map(|t| t.text.clone()).collect(),
        tags,
        source_article: source_article.to_string(),
    })
}

/// Parts of `original` not covered by any of `kept`, as untyped spans.
fn residual_spans(original: &LinkSpan, kept: &[LinkSpan]) -> Vec<LinkSpan> {
    let mut out = Vec::new();
    let mut run: Option<usize> = None;
    for i in original.start_token..=original.end_token + 1 {
        let free = i <= original.end_token && !kept.iter().any(|k| k.covers(i));
        match (free, run) {
            (true, None) => run = Some(i),
            (false, Some(s)) => {
                out.push(LinkSpan {
                    start_token: s,
                    end_token: i - 1,
                    netype: None,
                    ..original.clone()
                });
                run = None;
            }
            _ => {}
        }
    }
    out
}

pub struct Resources<'a> {
    pub index: &'a WikiIndex,
    pub dict: &'a AliasDictionary,
    pub config: &'a GeneratorConfig,
}

/// All labeled sentences of one article.
pub fn generate_article(article: &RawArticle, res: &Resources<'_>) -> Result<(Vec<LabeledSentence>, Counters), GenerateError> {
    let mut counters = Counters::new();
    let mut out = Vec::new();
    counters.incr("articles_seen");
    if article.is_redirect() {
        counters.incr("articles_skipped_redirect");
        return Ok((out, counters));
    }
    if res.index.is_disambiguation(&article.title) {
        counters.incr("articles_skipped_disambiguation");
        return Ok((out, counters));
    }
    let parsed = parse_wikitext(&article.wikitext);
    counters.add("wikitext_blocks_discarded", parsed.discarded_blocks as u64);
    for range in segment_sentences(&parsed.text, &res.config.segmenter) {
        counters.incr("sentences_seen");
        let text = char_slice(&parsed.text, range.clone());
        let tokens = tokenize(&text, &res.config.tokenizer);
        if tokens.is_empty() {
            continue;
        }
        let mut links = Vec::new();
        for l in &parsed.links {
            if l.end <= range.start || l.start >= range.end {
                continue;
            }
            if l.start < range.start || l.end > range.end {
                counters.incr("links_cross_sentence");
                continue;
            }
            links.push(WikiLink {
                start: l.start - range.start,
                end: l.end - range.start,
                ..l.clone()
            });
        }
        let explicit = label_links(&tokens, &links, res.index, &mut counters);
        let inferred = infer_alias_links(&tokens, &explicit, res.dict);
        counters.add("spans_inferred", inferred.len() as u64);

        let mut spans = Vec::new();
        for span in explicit.iter().chain(&inferred) {
            if span.netype.is_none() {
                spans.push(span.clone());
                continue;
            }
            let adjusted = adjust_boundaries(span, &tokens, res.dict, &mut counters);
            spans.extend(residual_spans(span, &adjusted));
            spans.extend(adjusted);
        }
        if let Some(reason) = select_reason(&tokens, &spans, res.config) {
            counters.incr(reason);
            continue;
        }
        let sentence = emit_iob(&tokens, &spans, &article.title)?;
        counters.incr("sentences_selected");
        out.push(sentence);
    }
    Ok((out, counters))
}

#[derive(Debug, Clone)]
pub struct GenerationReport {
    pub corpus: AnnotatedCorpus,
    pub stats: CorpusStats,
    pub counters: Counters,
}

const BATCH: usize = 512;

/// Runs [`generate_article`] over the articles, `jobs` at a time, and keeps
/// dump order in the output.
pub fn generate_corpus<I>(articles: I, res: &Resources<'_>, jobs: usize) -> Result<GenerationReport, GenerateError>
where
    I: IntoIterator<Item = RawArticle>,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| GenerateError::ThreadPool(e.to_string()))?;
    let mut corpus = AnnotatedCorpus {
        sentences: Vec::new(),
        provenance: res.config.provenance.clone(),
    };
    let mut counters = Counters::new();
    let mut batch = Vec::with_capacity(BATCH);
    let mut flush = |batch: &mut Vec<RawArticle>| -> Result<(), GenerateError> {
        let results: Vec<_> = pool.install(|| batch.par_iter().map(|a| generate_article(a, res)).collect());
        batch.clear();
        for r in results {
            let (sentences, c) = r?;
            corpus.sentences.extend(sentences);
            counters.merge(&c);
        }
        Ok(())
    };
    for article in articles {
        batch.push(article);
        if batch.len() == BATCH {
            flush(&mut batch)?;
        }
    }
    flush(&mut batch)?;
    let stats = corpus_stats(&corpus);
    Ok(GenerationReport { corpus, stats, counters })
}

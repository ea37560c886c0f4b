//! Streaming readers for MediaWiki page dumps and Wikidata entity dumps.
//!
//! Both readers hold at most one record in memory at a time. Input is expected
//! to be decompressed already.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::BufRead;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use serde::Deserialize;
use thiserror::Error;

use crate::diagnostics::Counters;

/// The Wikidata class of Wikimedia disambiguation pages.
pub const DEFAULT_DISAMBIGUATION_CLASS: &str = "Q4167410";

const INSTANCE_OF: &str = "P31";
const SUBCLASS_OF: &str = "P279";

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("malformed page dump at byte {offset}: {message}")]
    Malformed { offset: u64, message: String },
    #[error("page dump truncated at byte {offset} inside a <page> record (partial title: {partial_title:?})")]
    Truncated {
        offset: u64,
        partial_title: Option<String>,
    },
    #[error("page record at byte {offset} exceeds the record size cap of {cap} bytes")]
    RecordTooLarge { offset: u64, cap: usize },
    #[error("page record at byte {offset} is invalid: {message}")]
    InvalidRecord { offset: u64, message: String },
    #[error("entity dump contained no parseable entity lines ({skipped} lines skipped)")]
    NoEntities { skipped: u64 },
    #[error("I/O error reading dump: {0}")]
    Io(#[from] std::io::Error),
}

/// Canonical title form: underscores become spaces, whitespace runs collapse,
/// the first letter keeps the case it was written with.
pub fn normalize_title(raw: &str) -> String {
    raw.replace('_', " ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// One page from a page dump.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawArticle {
    pub title: String,
    pub namespace: i64,
    pub redirect_target: Option<String>,
    /// Empty for redirects.
    pub wikitext: String,
}

impl RawArticle {
    pub fn is_redirect(&self) -> bool {
        self.redirect_target.is_some()
    }
}

#[derive(Debug, Clone)]
pub struct PageStreamConfig {
    /// Namespaces to yield. Empty means all.
    pub namespaces: BTreeSet<i64>,
    /// Upper bound on the bytes of a single page record (title + text).
    pub max_record_bytes: Option<usize>,
}

impl Default for PageStreamConfig {
    fn default() -> Self {
        Self {
            namespaces: BTreeSet::from([0]),
            max_record_bytes: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    None,
    Title,
    Ns,
    Text,
}

#[derive(Default)]
struct PartialPage {
    title: Option<String>,
    ns: Option<String>,
    redirect: Option<String>,
    text: String,
    in_revision: bool,
    seen_text: bool,
    bytes: usize,
}

/// Lazily yields pages from an export-format XML dump in dump order.
pub struct ArticleStream<R: BufRead> {
    reader: Reader<R>,
    buf: Vec<u8>,
    config: PageStreamConfig,
    done: bool,
    counters: Counters,
}

pub fn stream_articles<R: BufRead>(source: R, config: PageStreamConfig) -> ArticleStream<R> {
    let mut reader = Reader::from_reader(source);
    reader.config_mut().trim_text(false);
    ArticleStream {
        reader,
        buf: Vec::with_capacity(8 * 1024),
        config,
        done: false,
        counters: Counters::new(),
    }
}

impl<R: BufRead> ArticleStream<R> {
    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    fn next_page(&mut self) -> Result<Option<RawArticle>, DumpError> {
        let mut page: Option<PartialPage> = None;
        let mut field = Field::None;
        let mut depth_in_page = 0usize;
        loop {
            self.buf.clear();
            let offset = self.reader.buffer_position();
            let event = match self.reader.read_event_into(&mut self.buf) {
                Ok(ev) => ev,
                Err(e) => {
                    return Err(DumpError::Malformed {
                        offset: self.reader.error_position(),
                        message: e.to_string(),
                    })
                }
            };
            match event {
                Event::Start(e) => {
                    let name = local_name(&e);
                    match (&mut page, name.as_str()) {
                        (None, "page") => {
                            page = Some(PartialPage::default());
                            depth_in_page = 0;
                        }
                        (None, _) => {}
                        (Some(p), _) => {
                            depth_in_page += 1;
                            field = match name.as_str() {
                                "title" if depth_in_page == 1 => Field::Title,
                                "ns" if depth_in_page == 1 => Field::Ns,
                                "revision" if depth_in_page == 1 => {
                                    p.in_revision = true;
                                    Field::None
                                }
                                "text" if p.in_revision && depth_in_page == 2 => {
                                    if p.seen_text {
                                        // Full-history dumps: keep only the first revision's text.
                                        Field::None
                                    } else {
                                        p.seen_text = true;
                                        Field::Text
                                    }
                                }
                                _ => Field::None,
                            };
                        }
                    }
                }
                Event::Empty(e) => {
                    if let Some(p) = &mut page {
                        let name = local_name(&e);
                        if name == "redirect" && depth_in_page == 0 {
                            let title = e
                                .try_get_attribute("title")
                                .map_err(|err| malformed(&self.reader, err))?
                                .map(|a| a.unescape_value().map(|v| v.into_owned()))
                                .transpose()
                                .map_err(|err| malformed(&self.reader, err))?;
                            p.redirect = Some(title.unwrap_or_default());
                        } else if name == "text" && p.in_revision {
                            p.seen_text = true;
                        }
                    }
                }
                Event::Text(t) => {
                    if let Some(p) = &mut page {
                        if field != Field::None {
                            let text = t.unescape().map_err(|err| malformed(&self.reader, err))?;
                            p.bytes += text.len();
                            if let Some(cap) = self.config.max_record_bytes {
                                if p.bytes > cap {
                                    return Err(DumpError::RecordTooLarge { offset, cap });
                                }
                            }
                            match field {
                                Field::Title => p.title.get_or_insert_with(String::new).push_str(&text),
                                Field::Ns => p.ns.get_or_insert_with(String::new).push_str(&text),
                                Field::Text => p.text.push_str(&text),
                                Field::None => {}
                            }
                        }
                    }
                }
                Event::CData(c) => {
                    if let Some(p) = &mut page {
                        if field == Field::Text {
                            let text = String::from_utf8_lossy(&c);
                            p.bytes += text.len();
                            p.text.push_str(&text);
                        }
                    }
                }
                Event::End(e) => {
                    let name = String::from_utf8_lossy(e.local_name().as_ref()).into_owned();
                    if page.is_some() {
                        if name == "page" && depth_in_page == 0 {
                            let p = page.take().unwrap_or_default();
                            if let Some(article) = self.finish(p, offset)? {
                                return Ok(Some(article));
                            }
                            continue;
                        }
                        if name == "revision" && depth_in_page == 1 {
                            if let Some(p) = &mut page {
                                p.in_revision = false;
                            }
                        }
                        depth_in_page = depth_in_page.saturating_sub(1);
                        field = Field::None;
                    }
                }
                Event::Eof => {
                    if let Some(p) = page {
                        return Err(DumpError::Truncated {
                            offset: self.reader.buffer_position(),
                            partial_title: p.title,
                        });
                    }
                    return Ok(None);
                }
                _ => {}
            }
        }
    }

    fn finish(&mut self, p: PartialPage, offset: u64) -> Result<Option<RawArticle>, DumpError> {
        let title = normalize_title(p.title.as_deref().unwrap_or(""));
        if title.is_empty() {
            return Err(DumpError::InvalidRecord {
                offset,
                message: "page without a title".into(),
            });
        }
        let namespace: i64 = match p.ns.as_deref().map(str::trim) {
            Some(ns) => ns.parse().map_err(|_| DumpError::InvalidRecord {
                offset,
                message: format!("page {title:?} has non-numeric namespace {ns:?}"),
            })?,
            None => 0,
        };
        if namespace < 0 {
            self.counters.incr("pages_negative_namespace");
            return Ok(None);
        }
        if !self.config.namespaces.is_empty() && !self.config.namespaces.contains(&namespace) {
            self.counters.incr("pages_filtered_namespace");
            return Ok(None);
        }
        let redirect_target = p.redirect.map(|t| normalize_title(&t)).filter(|t| !t.is_empty());
        self.counters.incr("pages_read");
        let wikitext = if redirect_target.is_some() {
            self.counters.incr("pages_redirect");
            String::new()
        } else {
            p.text
        };
        Ok(Some(RawArticle {
            title,
            namespace,
            redirect_target,
            wikitext,
        }))
    }
}

impl<R: BufRead> Iterator for ArticleStream<R> {
    type Item = Result<RawArticle, DumpError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.next_page() {
            Ok(Some(a)) => Some(Ok(a)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

fn malformed<R>(reader: &Reader<R>, err: impl std::fmt::Display) -> DumpError {
    DumpError::Malformed {
        offset: reader.error_position(),
        message: err.to_string(),
    }
}

fn local_name(e: &BytesStart<'_>) -> String {
    String::from_utf8_lossy(e.local_name().as_ref()).into_owned()
}

/// One Wikidata item reduced to the fields the pipeline needs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityRecord {
    pub id: String,
    pub instance_of: Vec<String>,
    pub subclass_of: Vec<String>,
    pub sitelink: Option<String>,
    pub is_disambiguation: bool,
}

/// `Q` followed by one or more ASCII digits.
pub fn is_item_id(id: &str) -> bool {
    id.len() > 1 && id.starts_with('Q') && id[1..].bytes().all(|b| b.is_ascii_digit())
}

#[derive(Debug, Clone)]
pub struct EntityStreamConfig {
    /// Site id of the configured wiki, e.g. `hywiki`.
    pub wiki_code: String,
    pub disambiguation_classes: HashSet<String>,
}

impl EntityStreamConfig {
    pub fn new(wiki_code: impl Into<String>) -> Self {
        Self {
            wiki_code: wiki_code.into(),
            disambiguation_classes: HashSet::from([DEFAULT_DISAMBIGUATION_CLASS.to_string()]),
        }
    }
}

#[derive(Deserialize)]
struct JsonEntity {
    id: String,
    #[serde(default)]
    claims: HashMap<String, Vec<JsonClaim>>,
    #[serde(default)]
    sitelinks: HashMap<String, JsonSitelink>,
}

#[derive(Deserialize)]
struct JsonClaim {
    mainsnak: JsonSnak,
}

#[derive(Deserialize)]
struct JsonSnak {
    #[serde(default)]
    datavalue: Option<JsonDataValue>,
}

#[derive(Deserialize)]
struct JsonDataValue {
    value: serde_json::Value,
}

#[derive(Deserialize)]
struct JsonSitelink {
    title: String,
}

fn claim_targets(claims: &HashMap<String, Vec<JsonClaim>>, property: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for claim in claims.get(property).map(Vec::as_slice).unwrap_or(&[]) {
        let Some(dv) = &claim.mainsnak.datavalue else {
            continue;
        };
        let id = match dv.value.get("id").and_then(|v| v.as_str()) {
            Some(id) => id.to_string(),
            None => match dv.value.get("numeric-id").and_then(|v| v.as_u64()) {
                Some(n) => format!("Q{n}"),
                None => continue,
            },
        };
        if is_item_id(&id) && !out.contains(&id) {
            out.push(id);
        }
    }
    out
}

/// Lazily yields entity records from a line-delimited entity dump.
///
/// Accepts both the bare one-object-per-line form and the JSON array form
/// (`[` / `]` lines, trailing commas). Unparseable lines are skipped and
/// counted under `entity_lines_unparseable`.
pub struct EntityStream<R: BufRead> {
    source: R,
    line: String,
    config: EntityStreamConfig,
    parsed: u64,
    skipped: u64,
    done: bool,
    counters: Counters,
}

pub fn stream_entities<R: BufRead>(source: R, config: EntityStreamConfig) -> EntityStream<R> {
    EntityStream {
        source,
        line: String::new(),
        config,
        parsed: 0,
        skipped: 0,
        done: false,
        counters: Counters::new(),
    }
}

impl<R: BufRead> EntityStream<R> {
    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    fn parse_line(&self, line: &str) -> Result<Option<EntityRecord>, ()> {
        let entity: JsonEntity = serde_json::from_str(line).map_err(|_| ())?;
        if !is_item_id(&entity.id) {
            return Ok(None);
        }
        let instance_of = claim_targets(&entity.claims, INSTANCE_OF);
        let subclass_of = claim_targets(&entity.claims, SUBCLASS_OF);
        let sitelink = entity
            .sitelinks
            .get(&self.config.wiki_code)
            .map(|s| normalize_title(&s.title))
            .filter(|t| !t.is_empty());
        let is_disambiguation = instance_of
            .iter()
            .any(|c| self.config.disambiguation_classes.contains(c));
        Ok(Some(EntityRecord {
            id: entity.id,
            instance_of,
            subclass_of,
            sitelink,
            is_disambiguation,
        }))
    }
}

impl<R: BufRead> Iterator for EntityStream<R> {
    type Item = Result<EntityRecord, DumpError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            self.line.clear();
            match self.source.read_line(&mut self.line) {
                Ok(0) => {
                    self.done = true;
                    if self.skipped > 0 {
                        self.counters.add("entity_lines_unparseable", self.skipped);
                    }
                    if self.parsed == 0 {
                        return Some(Err(DumpError::NoEntities {
                            skipped: self.skipped,
                        }));
                    }
                    return None;
                }
                Ok(_) => {}
                Err(e) => {
                    self.done = true;
                    return Some(Err(e.into()));
                }
            }
            let trimmed = self.line.trim();
            let trimmed = trimmed.strip_suffix(',').unwrap_or(trimmed);
            if trimmed.is_empty() || trimmed == "[" || trimmed == "]" {
                continue;
            }
            match self.parse_line(trimmed) {
                Ok(Some(record)) => {
                    self.parsed += 1;
                    return Some(Ok(record));
                }
                Ok(None) => {
                    self.parsed += 1;
                    self.counters.incr("entities_not_items");
                }
                Err(()) => self.skipped += 1,
            }
        }
    }
}

/// Article title → entity id for every entity with a sitelink.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SiteIndex {
    map: HashMap<String, String>,
    pub duplicate_titles: u64,
}

impl SiteIndex {
    pub fn get(&self, title: &str) -> Option<&str> {
        self.map.get(title).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn insert(&mut self, title: String, id: String) {
        if self.map.insert(title, id).is_some() {
            self.duplicate_titles += 1;
        }
    }
}

pub fn build_site_index<'a, I>(entities: I) -> SiteIndex
where
    I: IntoIterator<Item = &'a EntityRecord>,
{
    let mut index = SiteIndex::default();
    for e in entities {
        if let Some(title) = &e.sitelink {
            index.insert(title.clone(), e.id.clone());
        }
    }
    index
}

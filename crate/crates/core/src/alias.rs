//! Alias dictionary: surface strings that refer to classified articles.
//!
//! Aliases come from article titles, redirect titles, titles of
//! disambiguation pages linking to the article, and the anchor texts of
//! links pointing at it. Each alias resolves to a single target.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::classify::{Resolved, WikiIndex};
use crate::diagnostics::Counters;
use crate::dump::RawArticle;
use crate::tags::NEType;
use crate::text::{tokenize, TokenizerRules};
use crate::wikitext::parse_wikitext;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AliasSource {
    Title,
    RedirectTitle,
    DisambiguationTitle,
    AnchorText,
}

impl AliasSource {
    pub fn as_str(self) -> &'static str {
        match self {
            AliasSource::Title => "title",
            AliasSource::RedirectTitle => "redirect_title",
            AliasSource::DisambiguationTitle => "disambiguation_title",
            AliasSource::AnchorText => "anchor_text",
        }
    }
}

impl fmt::Display for AliasSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AliasSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "title" => Ok(AliasSource::Title),
            "redirect_title" => Ok(AliasSource::RedirectTitle),
            "disambiguation_title" => Ok(AliasSource::DisambiguationTitle),
            "anchor_text" => Ok(AliasSource::AnchorText),
            other => Err(format!("unknown alias source `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AliasEntry {
    pub alias: String,
    pub target: String,
    pub netype: NEType,
    pub source: AliasSource,
    pub frequency: u64,
}

/// How token spans are compared with alias surfaces.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum MatchMode {
    #[default]
    Exact,
    /// The last token of a span may carry one of these suffixes
    /// (inflected mentions, e.g. `Երևանում` for `Երևան`).
    SuffixStripping(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AliasConfig {
    pub min_alias_chars: usize,
    /// Aliases must start with an uppercase letter.
    pub require_capitalized: bool,
    pub include_redirects: bool,
    /// Also add `X` for a disambiguation page titled `X (qualifier)`.
    pub strip_disambiguation_qualifier: bool,
    pub matching: MatchMode,
}

impl Default for AliasConfig {
    fn default() -> Self {
        Self {
            min_alias_chars: 2,
            require_capitalized: true,
            include_redirects: true,
            strip_disambiguation_qualifier: true,
            matching: MatchMode::Exact,
        }
    }
}

/// Anchor text and link target pairs with their occurrence counts.
pub type AnchorCounts = BTreeMap<(String, String), u64>;

/// Counts every explicit internal link in the article bodies.
pub fn collect_link_anchors<'a, I>(articles: I) -> AnchorCounts
where
    I: IntoIterator<Item = &'a RawArticle>,
{
    let mut counts = AnchorCounts::new();
    for article in articles {
        if article.is_redirect() {
            continue;
        }
        for link in parse_wikitext(&article.wikitext).links {
            let anchor = normalize_alias(&link.anchor);
            if anchor.is_empty() {
                continue;
            }
            *counts.entry((anchor, link.target)).or_insert(0) += 1;
        }
    }
    counts
}

fn normalize_alias(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// `X (qualifier)` → `X`.
pub fn strip_qualifier(title: &str) -> Option<&str> {
    let t = title.trim_end();
    if !t.ends_with(')') {
        return None;
    }
    let open = t.rfind(" (")?;
    let stripped = t[..open].trim_end();
    (!stripped.is_empty()).then_some(stripped)
}

const KEY_SEP: char = '\u{1F}';

fn token_key<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut key = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            key.push(KEY_SEP);
        }
        key.push_str(t.as_ref());
    }
    key
}

#[derive(Debug, Error)]
pub enum AliasFileError {
    #[error("alias file line {line}: {message}")]
    Line { line: usize, message: String },
}

#[derive(Debug, Clone)]
pub struct AliasDictionary {
    entries: BTreeMap<String, AliasEntry>,
    /// Token-joined alias surface → alias.
    by_tokens: HashMap<String, String>,
    max_tokens: usize,
    config: AliasConfig,
    rules: TokenizerRules,
}

impl PartialEq for AliasDictionary {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl AliasDictionary {
    pub fn empty(config: AliasConfig, rules: TokenizerRules) -> Self {
        Self {
            entries: BTreeMap::new(),
            by_tokens: HashMap::new(),
            max_tokens: 0,
            config,
            rules,
        }
    }

    /// Builds a dictionary directly from entries (later entries replace
    /// earlier ones with the same alias). Config filters are not applied.
    pub fn from_entries<I>(entries: I, config: AliasConfig, rules: TokenizerRules) -> Self
    where
        I: IntoIterator<Item = AliasEntry>,
    {
        let mut dict = Self::empty(config, rules);
        for e in entries {
            dict.insert(e);
        }
        dict
    }

    fn insert(&mut self, entry: AliasEntry) {
        let tokens: Vec<String> = tokenize(&entry.alias, &self.rules).into_iter().map(|t| t.text).collect();
        if tokens.is_empty() {
            return;
        }
        self.max_tokens = self.max_tokens.max(tokens.len());
        self.by_tokens.insert(token_key(&tokens), entry.alias.clone());
        self.entries.insert(entry.alias.clone(), entry);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, alias: &str) -> Option<&AliasEntry> {
        self.entries.get(alias)
    }

    pub fn entries(&self) -> impl Iterator<Item = &AliasEntry> {
        self.entries.values()
    }

    pub fn config(&self) -> &AliasConfig {
        &self.config
    }

    pub fn rules(&self) -> &TokenizerRules {
        &self.rules
    }

    /// Aliases of a given target, in alias order.
    pub fn aliases_of<'a>(&'a self, target: &'a str) -> impl Iterator<Item = &'a AliasEntry> + 'a {
        self.entries.values().filter(move |e| e.target == target)
    }

    /// The entry whose surface tokenizes exactly to `tokens`.
    pub fn lookup_exact<S: AsRef<str>>(&self, tokens: &[S]) -> Option<&AliasEntry> {
        if tokens.is_empty() || tokens.len() > self.max_tokens {
            return None;
        }
        self.lookup_span(tokens)
    }

    fn lookup_span<S: AsRef<str>>(&self, span: &[S]) -> Option<&AliasEntry> {
        let hit = |key: &str| self.by_tokens.get(key).and_then(|a| self.entries.get(a));
        if let Some(e) = hit(&token_key(span)) {
            return Some(e);
        }
        if let MatchMode::SuffixStripping(suffixes) = &self.config.matching {
            let (last, head) = span.split_last()?;
            let last = last.as_ref();
            for suffix in suffixes {
                if let Some(stem) = last.strip_suffix(suffix.as_str()).filter(|s| !s.is_empty()) {
                    let mut parts: Vec<&str> = head.iter().map(AsRef::as_ref).collect();
                    parts.push(stem);
                    if let Some(e) = hit(&token_key(&parts)) {
                        return Some(e);
                    }
                }
            }
        }
        None
    }

    /// The longest alias matching the tokens starting at `start`, with its
    /// length in tokens.
    pub fn lookup_longest<S: AsRef<str>>(&self, tokens: &[S], start: usize) -> Option<(&AliasEntry, usize)> {
        if start >= tokens.len() {
            return None;
        }
        let longest = self.max_tokens.min(tokens.len() - start);
        (1..=longest)
            .rev()
            .find_map(|k| self.lookup_span(&tokens[start..start + k]).map(|e| (e, k)))
    }

    /// Entries whose type disagrees with the index's classification of their target.
    pub fn verify_against(&self, index: &WikiIndex) -> Vec<&AliasEntry> {
        self.entries
            .values()
            .filter(|e| index.classify_title(&e.target) != Some(e.netype))
            .collect()
    }

    /// `alias<TAB>target<TAB>netype<TAB>source<TAB>frequency`, sorted by alias.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for e in self.entries.values() {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                e.alias, e.target, e.netype, e.source, e.frequency
            ));
        }
        out
    }

    pub fn from_tsv(text: &str, config: AliasConfig, rules: TokenizerRules) -> Result<Self, AliasFileError> {
        let mut dict = Self::empty(config, rules);
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let err = |message: String| AliasFileError::Line { line: i + 1, message };
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 5 {
                return Err(err(format!("expected 5 tab-separated fields, found {}", f.len())));
            }
            let netype = f[2].parse::<NEType>().map_err(|e| err(e.to_string()))?;
            let source = f[3].parse::<AliasSource>().map_err(err)?;
            let frequency = f[4]
                .parse::<u64>()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| err(format!("bad frequency `{}`", f[4])))?;
            if f[0].is_empty() {
                return Err(err("empty alias".into()));
            }
            dict.insert(AliasEntry {
                alias: f[0].to_string(),
                target: f[1].to_string(),
                netype,
                source,
                frequency,
            });
        }
        Ok(dict)
    }
}

#[derive(Default)]
struct Candidate {
    frequency: u64,
    source: Option<AliasSource>,
}

#[derive(Default)]
struct CandidateTable {
    by_alias: BTreeMap<String, BTreeMap<String, Candidate>>,
}

impl CandidateTable {
    fn add(&mut self, alias: &str, target: &str, source: AliasSource, n: u64) {
        let alias = normalize_alias(alias);
        if alias.is_empty() {
            return;
        }
        let c = self
            .by_alias
            .entry(alias)
            .or_default()
            .entry(target.to_string())
            .or_default();
        c.frequency += n;
        c.source = Some(c.source.map_or(source, |s| s.min(source)));
    }
}

/// Classified article title for a raw link target, following one redirect hop.
fn classified_target(index: &WikiIndex, raw: &str) -> Option<(String, NEType)> {
    match index.resolve(raw) {
        Resolved::Title(t) => index.classify_title(&t).map(|ty| (t, ty)),
        Resolved::RedirectCycle => None,
    }
}

/// Compiles the alias dictionary.
///
/// Frequencies add up over all sources; an alias claimed by several targets
/// goes to the most frequent one and is dropped on a tie.
pub fn build_dictionary(
    anchors: &AnchorCounts,
    articles: &[RawArticle],
    index: &WikiIndex,
    config: AliasConfig,
    rules: TokenizerRules,
) -> (AliasDictionary, Counters) {
    let mut counters = Counters::new();
    let mut table = CandidateTable::default();

    for article in articles {
        if article.is_redirect() {
            if !config.include_redirects {
                continue;
            }
            if let Some((t, _)) = classified_target(index, &article.title) {
                table.add(&article.title, &t, AliasSource::RedirectTitle, 1);
            }
            continue;
        }
        if index.classify_title(&article.title).is_some() {
            table.add(&article.title, &article.title, AliasSource::Title, 1);
        }
        if index.is_disambiguation(&article.title) {
            let mut targets: Vec<String> = parse_wikitext(&article.wikitext)
                .links
                .iter()
                .filter_map(|l| classified_target(index, &l.target).map(|(t, _)| t))
                .collect();
            targets.sort();
            targets.dedup();
            for t in &targets {
                table.add(&article.title, t, AliasSource::DisambiguationTitle, 1);
                if config.strip_disambiguation_qualifier {
                    if let Some(stripped) = strip_qualifier(&article.title) {
                        table.add(stripped, t, AliasSource::DisambiguationTitle, 1);
                    }
                }
            }
        }
    }

    for ((anchor, raw_target), &count) in anchors {
        if let Some((t, _)) = classified_target(index, raw_target) {
            table.add(anchor, &t, AliasSource::AnchorText, count);
        }
    }

    let mut dict = AliasDictionary::empty(config.clone(), rules);
    for (alias, targets) in table.by_alias {
        if alias.chars().count() < config.min_alias_chars {
            counters.incr("aliases_too_short");
            continue;
        }
        if config.require_capitalized && !alias.chars().next().is_some_and(char::is_uppercase) {
            counters.incr("aliases_not_capitalized");
            continue;
        }
        let best = targets.values().map(|c| c.frequency).max().unwrap_or(0);
        let mut winners = targets.iter().filter(|(_, c)| c.frequency == best);
        let (target, cand) = winners.next().expect("non-empty candidate set");
        if winners.next().is_some() {
            counters.incr("aliases_tied_dropped");
            continue;
        }
        if targets.len() > 1 {
            counters.incr("aliases_conflict_resolved");
        }
        let Some(netype) = index.classify_title(target) else {
            continue;
        };
        dict.insert(AliasEntry {
            alias: alias.clone(),
            target: target.clone(),
            netype,
            source: cand.source.unwrap_or(AliasSource::AnchorText),
            frequency: cand.frequency,
        });
    }
    counters.add("aliases_total", dict.len() as u64);
    (dict, counters)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(alias: &str, target: &str, netype: NEType) -> AliasEntry {
        AliasEntry {
            alias: alias.into(),
            target: target.into(),
            netype,
            source: AliasSource::Title,
            frequency: 1,
        }
    }

    fn dict(entries: &[(&str, NEType)]) -> AliasDictionary {
        AliasDictionary::from_entries(
            entries.iter().map(|(a, t)| entry(a, a, *t)),
            AliasConfig::default(),
            TokenizerRules::default(),
        )
    }

    #[test]
    fn longest_match_wins() {
        let d = dict(&[("Ազգերի լիգա", NEType::Org), ("Ազգերի", NEType::Loc)]);
        let toks = ["Ազգերի", "լիգա", "…"];
        let (e, k) = d.lookup_longest(&toks, 0).unwrap();
        assert_eq!(k, 2);
        assert_eq!(e.netype, NEType::Org);
        let d = dict(&[("A", NEType::Loc), ("A B", NEType::Org)]);
        assert_eq!(d.lookup_longest(&["A", "B"], 0).unwrap().1, 2);
        assert_eq!(d.lookup_longest(&["A", "C"], 0).unwrap().1, 1);
        assert!(d.lookup_longest(&["A", "B"], 1).is_none());
        assert!(d.lookup_longest(&["A", "B"], 5).is_none());
    }

    #[test]
    fn empty_dictionary_matches_nothing() {
        let d = dict(&[]);
        assert!(d.lookup_longest(&["Ա"], 0).is_none());
    }

    #[test]
    fn suffix_stripping_hook() {
        let config = AliasConfig {
            matching: MatchMode::SuffixStripping(vec!["ում".into(), "ի".into()]),
            ..Default::default()
        };
        let d = AliasDictionary::from_entries([entry("Երևան", "Երևան", NEType::Loc)], config, TokenizerRules::default());
        assert_eq!(d.lookup_longest(&["Երևանում"], 0).unwrap().0.alias, "Երևան");
        let exact = dict(&[("Երևան", NEType::Loc)]);
        assert!(exact.lookup_longest(&["Երևանում"], 0).is_none());
    }

    #[test]
    fn qualifier_stripping() {
        assert_eq!(strip_qualifier("Աբովյան (այլ կիրառումներ)"), Some("Աբովյան"));
        assert_eq!(strip_qualifier("Աբովյան"), None);
        assert_eq!(strip_qualifier("(x)"), None);
    }

    #[test]
    fn anchors_counted_per_link() {
        let art = RawArticle {
            title: "T".into(),
            namespace: 0,
            redirect_target: None,
            wikitext: "[[A|b]] [[A]] [[A|b]]".into(),
        };
        let counts = collect_link_anchors([&art]);
        assert_eq!(counts.get(&("b".to_string(), "A".to_string())), Some(&2));
        assert_eq!(counts.get(&("A".to_string(), "A".to_string())), Some(&1));
    }

    #[test]
    fn tsv_round_trip() {
        let d = dict(&[("Սիրիա", NEType::Loc), ("Ազգերի լիգա", NEType::Org)]);
        let text = d.to_tsv();
        assert!(text.starts_with("Ազգերի լիգա\tԱզգերի լիգա\tORG\ttitle\t1\n"));
        let back = AliasDictionary::from_tsv(&text, AliasConfig::default(), TokenizerRules::default()).unwrap();
        assert_eq!(back, d);
        assert_eq!(back.to_tsv(), text);
        assert!(AliasDictionary::from_tsv("a\tb\tMISC\ttitle\t1\n", AliasConfig::default(), TokenizerRules::default()).is_err());
        assert!(AliasDictionary::from_tsv("a\tb\tLOC\ttitle\t0\n", AliasConfig::default(), TokenizerRules::default()).is_err());
    }

    fn article(title: &str, wikitext: &str) -> RawArticle {
        RawArticle {
            title: title.into(),
            namespace: 0,
            redirect_target: None,
            wikitext: wikitext.into(),
        }
    }

    fn redirect(title: &str, target: &str) -> RawArticle {
        RawArticle {
            title: title.into(),
            namespace: 0,
            redirect_target: Some(target.into()),
            wikitext: String::new(),
        }
    }

    fn wiki() -> (Vec<RawArticle>, WikiIndex) {
        let articles = vec![
            article("Սանկտ Պետերբուրգ", "Քաղաք։"),
            redirect("Լենինգրադ", "Սանկտ Պետերբուրգ"),
            redirect("Պետրոգրադ", "Սանկտ Պետերբուրգ"),
            article("Պետրոս Առաջին", "Հիմնել է [[Սանկտ Պետերբուրգ|Պետերբուրգը]] և [[Պետերբուրգ]]ը։"),
            article("Պետերբուրգ (այլ կիրառումներ)", "* [[Սանկտ Պետերբուրգ]]\n* [[Պետերբուրգ (Ֆլորիդա)]]"),
            article("Պետերբուրգ (Ֆլորիդա)", "Քաղաք։"),
            redirect("Պետերբուրգ", "Սանկտ Պետերբուրգ"),
            article("Ալեքսանդր", "[[Ալեքսանդր Մակեդոնացի|Ալեքսանդր]] [[Ալեքսանդր Պուշկին|Ալեքսանդր]]"),
            article("Ալեքսանդր Մակեդոնացի", ""),
            article("Ալեքսանդր Պուշկին", "[[x|ա]] [[Սանկտ Պետերբուրգ|Ս]]"),
        ];
        let mut index = WikiIndex::default();
        for (title, id, ty) in [
            ("Սանկտ Պետերբուրգ", "Q656", Some(NEType::Loc)),
            ("Պետրոս Առաջին", "Q8479", Some(NEType::Per)),
            ("Պետերբուրգ (այլ կիրառումներ)", "Q1", None),
            ("Պետերբուրգ (Ֆլորիդա)", "Q49236", Some(NEType::Loc)),
            ("Ալեքսանդր Մակեդոնացի", "Q8409", Some(NEType::Per)),
            ("Ալեքսանդր Պուշկին", "Q7200", Some(NEType::Per)),
        ] {
            index.site_index.insert(title.into(), id.into());
            if let Some(ty) = ty {
                index.classes.insert(id.into(), ty);
            }
        }
        index.disambiguation_ids.insert("Q1".into());
        index.add_redirects(&articles);
        (articles, index)
    }

    fn build(articles: &[RawArticle], index: &WikiIndex, config: AliasConfig) -> (AliasDictionary, Counters) {
        let anchors = collect_link_anchors(articles);
        build_dictionary(&anchors, articles, index, config, TokenizerRules::default())
    }

    #[test]
    fn dictionary_from_all_sources() {
        let (articles, index) = wiki();
        let (d, counters) = build(&articles, &index, AliasConfig::default());
        let target = |a: &str| d.get(a).map(|e| e.target.as_str());
        assert_eq!(target("Սանկտ Պետերբուրգ"), Some("Սանկտ Պետերբուրգ"));
        assert_eq!(d.get("Սանկտ Պետերբուրգ").unwrap().source, AliasSource::Title);
        assert_eq!(target("Լենինգրադ"), Some("Սանկտ Պետերբուրգ"));
        assert_eq!(d.get("Պետրոգրադ").unwrap().source, AliasSource::RedirectTitle);
        assert_eq!(d.get("Պետերբուրգը").map(|e| (e.target.as_str(), e.frequency)), Some(("Սանկտ Պետերբուրգ", 2)));
        // redirect + stripped disambiguation title vs one disambiguation vote
        let p = d.get("Պետերբուրգ").unwrap();
        assert_eq!((p.target.as_str(), p.frequency, p.source), ("Սանկտ Պետերբուրգ", 2, AliasSource::RedirectTitle));
        // the full disambiguation title is claimed once by each target
        assert!(d.get("Պետերբուրգ (այլ կիրառումներ)").is_none());
        assert!(d.get("Ալեքսանդր").is_none());
        assert!(d.get("Ս").is_none());
        assert!(d.get("ա").is_none());
        assert!(counters.get("aliases_tied_dropped") >= 2);
        assert!(d.verify_against(&index).is_empty());
        assert!(d.aliases_of("Պետրոս Առաջին").all(|e| e.netype == NEType::Per));
    }

    #[test]
    fn redirect_aliases_can_be_disabled() {
        let (articles, index) = wiki();
        let config = AliasConfig {
            include_redirects: false,
            ..Default::default()
        };
        let (d, _) = build(&articles, &index, config);
        assert!(d.get("Լենինգրադ").is_none());
        assert!(d.get("Սանկտ Պետերբուրգ").is_some());
    }

    #[test]
    fn order_independent() {
        let (mut articles, index) = wiki();
        let (a, _) = build(&articles, &index, AliasConfig::default());
        articles.reverse();
        let (b, _) = build(&articles, &index, AliasConfig::default());
        assert_eq!(a.to_tsv(), b.to_tsv());
    }

    #[test]
    fn tie_drops_alias_and_flip_restores_it() {
        let mut index = WikiIndex::default();
        for (title, id) in [("Ա", "Q1"), ("Բ", "Q2")] {
            index.site_index.insert(title.into(), id.into());
            index.classes.insert(id.into(), NEType::Org);
        }
        let mut anchors = AnchorCounts::new();
        anchors.insert(("Իքս".into(), "Ա".into()), 5);
        anchors.insert(("Իքս".into(), "Բ".into()), 5);
        let build = |anchors: &AnchorCounts| {
            build_dictionary(anchors, &[], &index, AliasConfig::default(), TokenizerRules::default())
        };
        let (d, c) = build(&anchors);
        assert!(d.get("Իքս").is_none());
        assert_eq!(c.get("aliases_tied_dropped"), 1);
        anchors.insert(("Իքս".into(), "Բ".into()), 4);
        let (d, _) = build(&anchors);
        assert_eq!(d.get("Իքս").map(|e| (e.target.as_str(), e.frequency)), Some(("Ա", 5)));
    }

    #[test]
    fn short_and_lowercase_aliases_filtered() {
        let mut index = WikiIndex::default();
        index.site_index.insert("Ա".into(), "Q1".into());
        index.classes.insert("Q1".into(), NEType::Loc);
        let mut anchors = AnchorCounts::new();
        for a in ["Ա", "ա", "այստեղ", "Այստեղ"] {
            anchors.insert((a.into(), "Ա".into()), 1);
        }
        let (d, c) = build_dictionary(&anchors, &[], &index, AliasConfig::default(), TokenizerRules::default());
        let aliases: Vec<_> = d.entries().map(|e| e.alias.as_str()).collect();
        assert_eq!(aliases, ["Այստեղ"]);
        assert_eq!(c.get("aliases_too_short"), 2);
        assert_eq!(c.get("aliases_not_capitalized"), 1);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        const VOCAB: &[&str] = &["Ա", "Բ", "Գ", "Դ"];

        fn phrase(idx: &[usize]) -> String {
            idx.iter().map(|&i| VOCAB[i]).collect::<Vec<_>>().join(" ")
        }

        proptest! {
            #[test]
            fn longest_match_agrees_with_enumeration(
                aliases in prop::collection::vec(prop::collection::vec(0..VOCAB.len(), 1..4), 0..8),
                tokens in prop::collection::vec(0..VOCAB.len(), 1..10),
                start in 0usize..10,
            ) {
                let start = start % tokens.len();
                let surfaces: Vec<String> = aliases.iter().map(|a| phrase(a)).collect();
                let d = AliasDictionary::from_entries(
                    surfaces.iter().map(|a| entry(a, a, NEType::Loc)),
                    AliasConfig::default(),
                    TokenizerRules::default(),
                );
                let words: Vec<&str> = tokens.iter().map(|&i| VOCAB[i]).collect();
                let best = (start + 1..=words.len())
                    .filter(|&e| surfaces.contains(&words[start..e].join(" ")))
                    .max()
                    .map(|e| e - start);
                let got = d.lookup_longest(&words, start);
                prop_assert_eq!(got.map(|(_, k)| k), best);
                if let Some((e, k)) = got {
                    prop_assert_eq!(&e.alias, &words[start..start + k].join(" "));
                }
            }
        }
    }
}

//! Rule-based article classification through the Wikidata class hierarchy.
//!
//! An entity is typed by looking at its *first* `instance of` value, reading
//! that class's own `subclass of` list, and mapping those ids through a
//! fixed taxonomy table. Deeper ancestors are never consulted.

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use crate::dump::{is_item_id, normalize_title, EntityRecord, RawArticle, SiteIndex};
use crate::tags::NEType;

/// The shipped taxonomy table, keyed by Wikidata ids.
pub const DEFAULT_MAPPING: &str = include_str!("../data/type_mapping.tsv");

/// Row labels of the taxonomy table, with the class each row maps to.
/// The mapping linter checks every entry's label comment against this list.
pub const TAXONOMY_ROWS: &[(&str, NEType)] = &[
    ("company", NEType::Org),
    ("business enterprise", NEType::Org),
    ("juridical person", NEType::Org),
    ("air carrier", NEType::Org),
    ("political organization", NEType::Org),
    ("government organization", NEType::Org),
    ("secret service", NEType::Org),
    ("political party", NEType::Org),
    ("international organization", NEType::Org),
    ("alliance", NEType::Org),
    ("armed organization", NEType::Org),
    ("higher education institution", NEType::Org),
    ("educational institution", NEType::Org),
    ("university", NEType::Org),
    ("educational organization", NEType::Org),
    ("school", NEType::Org),
    ("fictional magic school", NEType::Org),
    ("broadcaster", NEType::Org),
    ("newspaper", NEType::Org),
    ("periodical literature", NEType::Org),
    ("religious organization", NEType::Org),
    ("football club", NEType::Org),
    ("sports team", NEType::Org),
    ("musical ensemble", NEType::Org),
    ("music organisation", NEType::Org),
    ("vocal-musical ensemble", NEType::Org),
    ("sports organization", NEType::Org),
    ("criminal organization", NEType::Org),
    ("museum of culture", NEType::Org),
    ("scientific organisation", NEType::Org),
    ("non-governmental organization", NEType::Org),
    ("nonprofit organization", NEType::Org),
    ("national sports team", NEType::Org),
    ("legal person", NEType::Org),
    ("scholarly publication", NEType::Org),
    ("academic journal", NEType::Org),
    ("association", NEType::Org),
    ("band", NEType::Org),
    ("sports club", NEType::Org),
    ("institution", NEType::Org),
    ("medical facility", NEType::Org),
    ("state", NEType::Loc),
    ("disputed territory", NEType::Loc),
    ("country", NEType::Loc),
    ("occupied territory", NEType::Loc),
    ("political territorial entity", NEType::Loc),
    ("city", NEType::Loc),
    ("town", NEType::Loc),
    ("village", NEType::Loc),
    ("rural area", NEType::Loc),
    ("rural settlement", NEType::Loc),
    ("urban-type settlement", NEType::Loc),
    ("geographical object", NEType::Loc),
    ("geographic location", NEType::Loc),
    ("geographic region", NEType::Loc),
    ("community", NEType::Loc),
    ("administrative territorial entity", NEType::Loc),
    ("former administrative territorial entity", NEType::Loc),
    ("human settlement", NEType::Loc),
    ("county", NEType::Loc),
    ("province", NEType::Loc),
    ("federated state", NEType::Loc),
    ("district", NEType::Loc),
    ("county-equivalent", NEType::Loc),
    ("municipal formation", NEType::Loc),
    ("raion", NEType::Loc),
    ("nahiyah", NEType::Loc),
    ("mintaqah", NEType::Loc),
    ("muhafazah", NEType::Loc),
    ("realm", NEType::Loc),
    ("principality", NEType::Loc),
    ("historical country", NEType::Loc),
    ("watercourse", NEType::Loc),
    ("lake", NEType::Loc),
    ("sea", NEType::Loc),
    ("still waters", NEType::Loc),
    ("body of water", NEType::Loc),
    ("landmass", NEType::Loc),
    ("minor planet", NEType::Loc),
    ("landform", NEType::Loc),
    ("natural geographic object", NEType::Loc),
    ("mountain range", NEType::Loc),
    ("mountain", NEType::Loc),
    ("protected area", NEType::Loc),
    ("national park", NEType::Loc),
    ("arena", NEType::Loc),
    ("bridge", NEType::Loc),
    ("airport", NEType::Loc),
    ("stadium", NEType::Loc),
    ("performing arts center", NEType::Loc),
    ("public building", NEType::Loc),
    ("venue", NEType::Loc),
    ("sports venue", NEType::Loc),
    ("church", NEType::Loc),
    ("temple", NEType::Loc),
    ("place of worship", NEType::Loc),
    ("retail building", NEType::Loc),
    ("person", NEType::Per),
    ("fictional character", NEType::Per),
    ("fictional humanoid", NEType::Per),
    ("human who may be fictional", NEType::Per),
    ("given name", NEType::Per),
    ("fictional human", NEType::Per),
    ("magician in fantasy", NEType::Per),
];

pub const DEFAULT_PRIORITY: [NEType; 3] = [NEType::Per, NEType::Org, NEType::Loc];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MappingError {
    #[error("mapping line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("mapping id {id} is assigned both {first} and {second}")]
    Conflict {
        id: String,
        first: NEType,
        second: NEType,
    },
    #[error("priority must list each of PER, ORG, LOC exactly once")]
    BadPriority,
}

/// Taxonomy id → entity class, plus the order used to break multi-class hits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeMapping {
    entries: HashMap<String, NEType>,
    priority: [NEType; 3],
}

impl TypeMapping {
    pub fn new(entries: HashMap<String, NEType>, priority: [NEType; 3]) -> Result<Self, MappingError> {
        let mut m = Self {
            entries,
            priority: DEFAULT_PRIORITY,
        };
        m.set_priority(priority)?;
        Ok(m)
    }

    pub fn shipped() -> Self {
        Self::parse(DEFAULT_MAPPING).expect("shipped mapping parses")
    }

    /// Parses `id<TAB>TYPE<TAB># label` lines; `#` lines and blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self, MappingError> {
        let mut entries: HashMap<String, NEType> = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let Some(entry) = parse_mapping_line(raw, line_no)? else {
                continue;
            };
            match entries.get(&entry.id) {
                Some(&prev) if prev != entry.netype => {
                    return Err(MappingError::Conflict {
                        id: entry.id,
                        first: prev,
                        second: entry.netype,
                    })
                }
                _ => {
                    entries.insert(entry.id, entry.netype);
                }
            }
        }
        Ok(Self {
            entries,
            priority: DEFAULT_PRIORITY,
        })
    }

    pub fn set_priority(&mut self, priority: [NEType; 3]) -> Result<(), MappingError> {
        let distinct: HashSet<_> = priority.iter().collect();
        if distinct.len() != 3 {
            return Err(MappingError::BadPriority);
        }
        self.priority = priority;
        Ok(())
    }

    pub fn with_priority(mut self, priority: [NEType; 3]) -> Result<Self, MappingError> {
        self.set_priority(priority)?;
        Ok(self)
    }

    pub fn priority(&self) -> [NEType; 3] {
        self.priority
    }

    pub fn get(&self, id: &str) -> Option<NEType> {
        self.entries.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Highest-priority class among `ids`, if any maps.
    pub fn resolve<'a>(&self, ids: impl IntoIterator<Item = &'a String>) -> Option<NEType> {
        let hits: HashSet<NEType> = ids.into_iter().filter_map(|id| self.get(id)).collect();
        self.priority.iter().copied().find(|t| hits.contains(t))
    }
}

struct MappingLine {
    id: String,
    netype: NEType,
    label: Option<String>,
}

fn parse_mapping_line(raw: &str, line: usize) -> Result<Option<MappingLine>, MappingError> {
    let trimmed = raw.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let mut fields = trimmed.splitn(3, '\t');
    let id = fields.next().unwrap_or("").trim();
    let ty = fields.next().map(str::trim).ok_or_else(|| MappingError::Line {
        line,
        message: "expected `id<TAB>TYPE`".into(),
    })?;
    if !is_item_id(id) {
        return Err(MappingError::Line {
            line,
            message: format!("`{id}` is not an item id"),
        });
    }
    let netype = ty.parse::<NEType>().map_err(|e| MappingError::Line {
        line,
        message: e.to_string(),
    })?;
    let label = fields
        .next()
        .map(str::trim)
        .and_then(|c| c.strip_prefix('#'))
        .map(|c| c.trim().to_string())
        .filter(|c| !c.is_empty());
    Ok(Some(MappingLine {
        id: id.to_string(),
        netype,
        label,
    }))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LintIssue {
    pub line: usize,
    pub message: String,
}

/// Checks a mapping file against the taxonomy table: every entry must carry a
/// label comment naming exactly one table row, with the row's class.
pub fn lint_mapping(text: &str) -> Vec<LintIssue> {
    let rows: HashMap<&str, NEType> = TAXONOMY_ROWS.iter().copied().collect();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut issues = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let entry = match parse_mapping_line(raw, line) {
            Ok(Some(e)) => e,
            Ok(None) => continue,
            Err(e) => {
                issues.push(LintIssue {
                    line,
                    message: e.to_string(),
                });
                continue;
            }
        };
        if let Some(first) = seen.insert(entry.id.clone(), line) {
            issues.push(LintIssue {
                line,
                message: format!("{} already listed on line {first}", entry.id),
            });
        }
        match entry.label.as_deref() {
            None => issues.push(LintIssue {
                line,
                message: format!("{} has no label comment", entry.id),
            }),
            Some(label) => match rows.get(label) {
                None => issues.push(LintIssue {
                    line,
                    message: format!("label `{label}` is not a taxonomy table row"),
                }),
                Some(&row_type) if row_type != entry.netype => issues.push(LintIssue {
                    line,
                    message: format!("`{label}` belongs to {row_type}, mapped as {}", entry.netype),
                }),
                Some(_) => {}
            },
        }
    }
    issues
}

/// Class id → its direct `subclass of` values.
#[derive(Debug, Clone, Default)]
pub struct Taxonomy {
    parents: HashMap<String, Vec<String>>,
}

impl Taxonomy {
    pub fn from_entities<'a, I>(entities: I) -> Self
    where
        I: IntoIterator<Item = &'a EntityRecord>,
    {
        let mut parents = HashMap::new();
        for e in entities {
            if !e.subclass_of.is_empty() {
                parents.insert(e.id.clone(), e.subclass_of.clone());
            }
        }
        Self { parents }
    }

    pub fn insert(&mut self, id: impl Into<String>, subclass_of: Vec<String>) {
        self.parents.insert(id.into(), subclass_of);
    }

    pub fn subclass_of(&self, id: &str) -> &[String] {
        self.parents.get(id).map(Vec::as_slice).unwrap_or(&[])
    }
}

pub fn classify_entity(entity: &EntityRecord, taxonomy: &Taxonomy, mapping: &TypeMapping) -> Option<NEType> {
    let first = entity.instance_of.first()?;
    mapping.resolve(taxonomy.subclass_of(first))
}

/// Entity id → class, for every entity that classifies.
pub fn classify_all(entities: &[EntityRecord], mapping: &TypeMapping) -> BTreeMap<String, NEType> {
    let taxonomy = Taxonomy::from_entities(entities);
    entities
        .iter()
        .filter_map(|e| classify_entity(e, &taxonomy, mapping).map(|t| (e.id.clone(), t)))
        .collect()
}

/// Outcome of resolving an article title through the redirect table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolved {
    Title(String),
    RedirectCycle,
}

/// The indices shared by the alias and corpus stages: sitelinks, entity
/// classes, redirects and disambiguation pages.
#[derive(Debug, Clone, Default)]
pub struct WikiIndex {
    pub site_index: SiteIndex,
    pub classes: BTreeMap<String, NEType>,
    pub redirects: HashMap<String, String>,
    pub disambiguation_ids: HashSet<String>,
}

impl WikiIndex {
    pub fn new(site_index: SiteIndex, classes: BTreeMap<String, NEType>) -> Self {
        Self {
            site_index,
            classes,
            ..Default::default()
        }
    }

    pub fn from_entities(entities: &[EntityRecord], mapping: &TypeMapping) -> Self {
        let mut index = Self::new(crate::dump::build_site_index(entities), classify_all(entities, mapping));
        index.disambiguation_ids = entities
            .iter()
            .filter(|e| e.is_disambiguation)
            .map(|e| e.id.clone())
            .collect();
        index
    }

    pub fn add_redirects<'a, I>(&mut self, articles: I)
    where
        I: IntoIterator<Item = &'a RawArticle>,
    {
        for a in articles {
            if let Some(target) = &a.redirect_target {
                self.redirects.insert(a.title.clone(), target.clone());
            }
        }
    }

    fn known(&self, title: &str) -> bool {
        self.site_index.get(title).is_some() || self.redirects.contains_key(title)
    }

    /// Normalizes a link target and picks the spelling the wiki knows:
    /// the title as written, or with its first letter uppercased.
    pub fn canonical_title(&self, raw: &str) -> String {
        let title = normalize_link_target(raw);
        if self.known(&title) {
            return title;
        }
        let upper = uppercase_first(&title);
        if upper != title && self.known(&upper) {
            return upper;
        }
        title
    }

    /// Follows at most one redirect hop.
    pub fn resolve(&self, raw: &str) -> Resolved {
        let title = self.canonical_title(raw);
        match self.redirects.get(&title) {
            None => Resolved::Title(title),
            Some(target) => {
                let target = self.canonical_title(target);
                if target == title {
                    return Resolved::RedirectCycle;
                }
                if let Some(next) = self.redirects.get(&target) {
                    if self.canonical_title(next) == title {
                        return Resolved::RedirectCycle;
                    }
                }
                Resolved::Title(target)
            }
        }
    }

    pub fn classify_title(&self, title: &str) -> Option<NEType> {
        let id = self.site_index.get(title)?;
        self.classes.get(id).copied()
    }

    pub fn is_disambiguation(&self, title: &str) -> bool {
        self.site_index
            .get(title)
            .is_some_and(|id| self.disambiguation_ids.contains(id))
    }
}

/// `classes[site_index[title]]`, after one redirect hop. Cycles classify as none.
pub fn classify_article(title: &str, index: &WikiIndex) -> Option<NEType> {
    match index.resolve(title) {
        Resolved::Title(t) => index.classify_title(&t),
        Resolved::RedirectCycle => None,
    }
}

/// Strips a `#section` fragment and leading colon, then normalizes as a title.
pub fn normalize_link_target(raw: &str) -> String {
    let without_fragment = raw.split('#').next().unwrap_or("");
    let trimmed = without_fragment.trim().trim_start_matches(':');
    normalize_title(trimmed)
}

pub(crate) fn uppercase_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

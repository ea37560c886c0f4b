//! Glue between the dump readers, indices, alias dictionary and generator.

use crate::alias::{build_dictionary, collect_link_anchors, AliasConfig, AliasDictionary, AnchorCounts};
use crate::classify::{TypeMapping, WikiIndex};
use crate::config::PipelineConfig;
use crate::diagnostics::Counters;
use crate::dump::{EntityRecord, RawArticle};
use crate::generate::{generate_corpus, GenerateError, GenerationReport, Resources};
use crate::text::TokenizerRules;

pub const TOOL_NAME: &str = "silver-ner";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Header lines written at the top of generated corpora.
pub fn provenance_lines(config: &PipelineConfig) -> Vec<String> {
    if !config.provenance {
        return Vec::new();
    }
    vec![
        format!("tool {TOOL_NAME} {TOOL_VERSION}"),
        format!("config_digest {}", config.digest()),
    ]
}

/// Collects what the alias stage needs in one pass over the articles:
/// anchor counts, redirects, titles, and the bodies of disambiguation pages.
#[derive(Debug, Default)]
pub struct AliasScan {
    pub articles: Vec<RawArticle>,
    pub anchors: AnchorCounts,
}

impl AliasScan {
    pub fn push(&mut self, mut article: RawArticle, index: &WikiIndex) {
        for (k, n) in collect_link_anchors([&article]) {
            *self.anchors.entry(k).or_insert(0) += n;
        }
        if !article.is_redirect() && !index.is_disambiguation(&article.title) {
            article.wikitext.clear();
        }
        self.articles.push(article);
    }

    /// Registers the redirects with `index` and compiles the dictionary.
    pub fn finish(self, index: &mut WikiIndex, config: AliasConfig, rules: TokenizerRules) -> (AliasDictionary, Counters) {
        index.add_redirects(&self.articles);
        build_dictionary(&self.anchors, &self.articles, index, config, rules)
    }
}

pub struct PipelineOutput {
    pub index: WikiIndex,
    pub dictionary: AliasDictionary,
    pub report: GenerationReport,
}

/// The whole pipeline over in-memory inputs. The config's priority
/// overrides the mapping's.
pub fn run_in_memory(
    articles: &[RawArticle],
    entities: &[EntityRecord],
    mapping: &TypeMapping,
    config: &PipelineConfig,
    jobs: usize,
) -> Result<PipelineOutput, GenerateError> {
    let mapping = mapping
        .clone()
        .with_priority(config.priority)
        .expect("config priority lists each type once");
    let mut index = WikiIndex::from_entities(entities, &mapping);
    let mut scan = AliasScan::default();
    for a in articles {
        scan.push(a.clone(), &index);
    }
    let (dictionary, alias_counters) = scan.finish(&mut index, config.alias_config(), config.tokenizer());
    let generator = config.generator_config(provenance_lines(config));
    let res = Resources {
        index: &index,
        dict: &dictionary,
        config: &generator,
    };
    let mut report = generate_corpus(articles.iter().cloned(), &res, jobs)?;
    report.counters.merge(&alias_counters);
    Ok(PipelineOutput {
        index,
        dictionary,
        report,
    })
}

pub mod alias;
pub mod classify;
pub mod cli;
pub mod config;
pub mod conll;
pub mod diagnostics;
pub mod dump;
pub mod eval;
pub mod generate;
pub mod pipeline;
pub mod tagger;
pub mod tags;
pub mod text;
pub mod wikitext;

#[cfg(test)]
mod testutil;

//! Linear-chain tagger: hashed lexical features, constrained Viterbi
//! decoding and averaged-perceptron training.

pub mod decode;
pub mod features;
pub mod model;

pub use decode::{sequence_score, viterbi};
pub use features::{extract_features, word_shape, FeatureConfig};
pub use model::{synthetic_corpus, tag_corpus, train, TaggerModel, TrainConfig, TrainError, TrainReport};

//! Lexical feature templates and hashed feature ids.

use std::hash::Hasher;

use fnv::FnvHasher;

pub const BOS: &str = "<S>";
pub const EOS: &str = "</S>";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureConfig {
    pub use_current_word: bool,
    pub use_prev_next_words: bool,
    /// Longest prefix/suffix n-gram.
    pub max_ngram: usize,
    pub use_word_shape: bool,
    /// How many neighbours on each side the word features look at.
    pub window: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            use_current_word: true,
            use_prev_next_words: true,
            max_ngram: 6,
            use_word_shape: true,
            window: 1,
        }
    }
}

/// `X` uppercase, `x` lowercase, `9` digit, `#` other; repeats collapsed.
pub fn word_shape(word: &str) -> String {
    let mut out = String::new();
    for c in word.chars() {
        let s = if c.is_uppercase() {
            'X'
        } else if c.is_lowercase() {
            'x'
        } else if c.is_numeric() {
            '9'
        } else {
            '#'
        };
        if !out.ends_with(s) {
            out.push(s);
        }
    }
    out
}

/// Feature strings for the token at `pos`.
pub fn extract_features<S: AsRef<str>>(tokens: &[S], pos: usize, config: &FeatureConfig) -> Vec<String> {
    let word = tokens[pos].as_ref();
    let mut out = vec!["bias".to_string()];
    if config.use_current_word {
        out.push(format!("w={word}"));
    }
    if config.use_prev_next_words {
        for d in 1..=config.window {
            let prev = pos.checked_sub(d).map_or(BOS, |i| tokens[i].as_ref());
            let next = tokens.get(pos + d).map_or(EOS, |t| t.as_ref());
            out.push(format!("w-{d}={prev}"));
            out.push(format!("w+{d}={next}"));
        }
    }
    let chars: Vec<char> = word.chars().collect();
    for k in 1..=config.max_ngram.min(chars.len()) {
        out.push(format!("p{k}={}", chars[..k].iter().collect::<String>()));
        out.push(format!("s{k}={}", chars[chars.len() - k..].iter().collect::<String>()));
    }
    if config.use_word_shape {
        out.push(format!("shape={}", word_shape(word)));
    }
    out
}

/// FNV-1a folded to `bits` bits.
pub fn feature_id(feature: &str, bits: u32) -> u32 {
    let mut h = FnvHasher::default();
    h.write(feature.as_bytes());
    let h = h.finish();
    let folded = (h ^ (h >> 32)) as u32;
    if bits >= 32 {
        folded
    } else {
        folded & ((1u32 << bits) - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        assert_eq!(word_shape("ՀՀ"), "X");
        assert_eq!(word_shape("Երևան"), "Xx");
        assert_eq!(word_shape("1918-ին"), "9#x");
    }

    #[test]
    fn ngrams_cap_at_word_length() {
        let f = extract_features(&["Աբո"], 0, &FeatureConfig::default());
        for want in ["p1=Ա", "p2=Աբ", "p3=Աբո", "s1=ո", "s2=բո", "s3=Աբո"] {
            assert!(f.contains(&want.to_string()), "{want}");
        }
        assert!(!f.iter().any(|x| x.starts_with("p4=")));
    }

    #[test]
    fn sentinels() {
        let f = extract_features(&["ա", "բ"], 0, &FeatureConfig::default());
        assert!(f.contains(&"w-1=<S>".to_string()));
        assert!(f.contains(&"w+1=բ".to_string()));
        let f = extract_features(&["ա", "բ"], 1, &FeatureConfig::default());
        assert!(f.contains(&"w+1=</S>".to_string()));
    }

    #[test]
    fn ids_respect_bits() {
        assert!(feature_id("w=Երևան", 10) < 1024);
        assert_eq!(feature_id("x", 20), feature_id("x", 20));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn locality(words in prop::collection::vec("[ա-ֆԱ-Ֆ0-9]{1,8}", 4..12), pos in 0usize..12, other in 0usize..12, repl in "[a-z]{1,5}", window in 1usize..3) {
                let n = words.len();
                let (pos, other) = (pos % n, other % n);
                prop_assume!(pos.abs_diff(other) > window);
                let config = FeatureConfig { window, ..Default::default() };
                let before = extract_features(&words, pos, &config);
                let mut changed = words.clone();
                changed[other] = repl;
                prop_assert_eq!(before, extract_features(&changed, pos, &config));
            }
        }
    }
}

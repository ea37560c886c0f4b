//! Rule-based sentence segmentation and tokenization.
//!
//! Offsets are in `char`s, not bytes.

use std::collections::HashSet;
use std::ops::Range;

use thiserror::Error;

/// A token with its character offsets into the sentence text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn new(text: impl Into<String>, start: usize, end: usize) -> Self {
        Self {
            text: text.into(),
            start,
            end,
        }
    }

    pub fn is_capitalized(&self) -> bool {
        self.text.chars().next().is_some_and(char::is_uppercase)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("tokenizer rule line {line}: {message}")]
pub struct RuleError {
    pub line: usize,
    pub message: String,
}

/// Which non-alphanumeric characters stay inside a token.
///
/// `attach` characters always belong to the surrounding word (Armenian
/// emphasis, question and apostrophe marks sit on or after a host letter).
/// `join` characters stay inside a word only between two alphanumerics
/// (hyphenated compounds, `3.5`, elided apostrophes).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizerRules {
    pub attach: HashSet<char>,
    pub join: HashSet<char>,
}

impl Default for TokenizerRules {
    fn default() -> Self {
        Self {
            // ՛ ՜ ՞ ՚
            attach: HashSet::from(['\u{055B}', '\u{055C}', '\u{055E}', '\u{055A}']),
            join: HashSet::from(['-', '\'', '\u{2019}', '.']),
        }
    }
}

impl TokenizerRules {
    /// Parses `attach<TAB>c` / `join<TAB>c` lines. Characters may be written
    /// literally or as `U+XXXX`.
    pub fn parse(text: &str) -> Result<Self, RuleError> {
        let mut rules = Self {
            attach: HashSet::new(),
            join: HashSet::new(),
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim_end_matches(['\r', '\n']);
            if trimmed.trim().is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (kind, spec) = trimmed.split_once('\t').ok_or_else(|| RuleError {
                line,
                message: "expected `kind<TAB>char`".into(),
            })?;
            let c = parse_char_spec(spec.trim()).ok_or_else(|| RuleError {
                line,
                message: format!("`{spec}` is not a single character or U+XXXX"),
            })?;
            match kind.trim() {
                "attach" => rules.attach.insert(c),
                "join" => rules.join.insert(c),
                other => {
                    return Err(RuleError {
                        line,
                        message: format!("unknown rule kind `{other}`"),
                    })
                }
            };
        }
        Ok(rules)
    }
}

fn parse_char_spec(spec: &str) -> Option<char> {
    if let Some(hex) = spec.strip_prefix("U+").or_else(|| spec.strip_prefix("u+")) {
        return u32::from_str_radix(hex, 16).ok().and_then(char::from_u32);
    }
    let mut chars = spec.chars();
    let c = chars.next()?;
    chars.next().is_none().then_some(c)
}

/// Splits on whitespace and separates punctuation into its own tokens.
/// Runs of one repeated punctuation character (`...`) form a single token.
pub fn tokenize(text: &str, rules: &TokenizerRules) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let is_word = |i: usize| -> bool {
        let c = chars[i];
        if c.is_alphanumeric() || rules.attach.contains(&c) || is_mark(c) {
            return true;
        }
        rules.join.contains(&c)
            && i > 0
            && i + 1 < chars.len()
            && chars[i - 1].is_alphanumeric()
            && chars[i + 1].is_alphanumeric()
    };
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if is_word(i) {
            while i < chars.len() && !chars[i].is_whitespace() && is_word(i) {
                i += 1;
            }
        } else {
            let c = chars[i];
            while i < chars.len() && chars[i] == c {
                i += 1;
            }
        }
        tokens.push(Token::new(chars[start..i].iter().collect::<String>(), start, i));
    }
    tokens
}

fn is_mark(c: char) -> bool {
    // Combining diacritical marks; enough for the scripts we see in practice.
    matches!(c, '\u{0300}'..='\u{036F}' | '\u{0483}'..='\u{0489}')
}

pub const ARMENIAN_FULL_STOP: char = '\u{0589}';

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmenterConfig {
    /// Words that end in a period without ending the sentence (`թ.`, `պրոֆ.`).
    pub abbreviations: HashSet<String>,
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        let abbreviations = [
            "թ", "թթ", "դ", "դդ", "մ.թ.ա", "մ.թ", "կմ", "մ", "սմ", "կգ", "պրոֆ", "ակադ", "դոկտ", "տ", "էջ", "հմմտ",
            "այլն", "Mr", "Mrs", "Dr", "St", "etc", "vs", "No",
        ]
        .into_iter()
        .map(String::from)
        .collect();
        Self { abbreviations }
    }
}

impl SegmenterConfig {
    /// One abbreviation per line, without the trailing period.
    pub fn with_abbreviation_list(text: &str) -> Self {
        Self {
            abbreviations: text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(|l| l.trim_end_matches('.').to_string())
                .collect(),
        }
    }
}

fn is_closer(c: char) -> bool {
    matches!(c, '»' | '"' | '\'' | ')' | ']' | '”' | '’' | '›')
}

fn is_opener(c: char) -> bool {
    matches!(c, '«' | '"' | '(' | '[' | '“' | '‹')
}

/// Splits clean text into sentence character ranges.
///
/// Boundaries fall after an Armenian full stop followed by whitespace, after
/// `.`, `?` or `!` followed by whitespace and an uppercase letter, and at every
/// newline. A period after a listed abbreviation or a single-letter initial
/// does not end a sentence. Ranges are trimmed and cover every non-whitespace
/// character exactly once.
pub fn segment_sentences(text: &str, config: &SegmenterConfig) -> Vec<Range<usize>> {
    let chars: Vec<char> = text.chars().collect();
    let n = chars.len();
    let mut ranges = Vec::new();
    let mut start: Option<usize> = None;
    let mut i = 0;
    let close = |start: &mut Option<usize>, end: usize, ranges: &mut Vec<Range<usize>>| {
        if let Some(s) = start.take() {
            let mut e = end;
            while e > s && chars[e - 1].is_whitespace() {
                e -= 1;
            }
            if e > s {
                ranges.push(s..e);
            }
        }
    };
    while i < n {
        let c = chars[i];
        if c == '\n' {
            close(&mut start, i, &mut ranges);
            i += 1;
            continue;
        }
        if start.is_none() {
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            start = Some(i);
        }
        let terminal = matches!(c, ARMENIAN_FULL_STOP | '.' | '?' | '!' | '…');
        if !terminal {
            i += 1;
            continue;
        }
        // Absorb repeated terminators and closing quotes/brackets.
        let mut j = i + 1;
        while j < n && (matches!(chars[j], ARMENIAN_FULL_STOP | '.' | '?' | '!' | '…') || is_closer(chars[j])) {
            j += 1;
        }
        let followed_by_space = j == n || chars[j].is_whitespace();
        let split = if !followed_by_space {
            false
        } else if c == ARMENIAN_FULL_STOP {
            true
        } else {
            let mut k = j;
            while k < n && chars[k].is_whitespace() && chars[k] != '\n' {
                k += 1;
            }
            let next_starts_sentence = k >= n
                || chars[k] == '\n'
                || chars[k].is_uppercase()
                || (is_opener(chars[k]) && k + 1 < n && chars[k + 1].is_uppercase());
            next_starts_sentence && !(c == '.' && is_abbreviation_before(&chars, i, config))
        };
        if split {
            close(&mut start, j, &mut ranges);
        }
        i = j;
    }
    close(&mut start, n, &mut ranges);
    ranges
}

fn is_abbreviation_before(chars: &[char], dot: usize, config: &SegmenterConfig) -> bool {
    let mut s = dot;
    while s > 0 && (chars[s - 1].is_alphanumeric() || (chars[s - 1] == '.' && s >= 2 && chars[s - 2].is_alphanumeric())) {
        s -= 1;
    }
    if s == dot {
        return false;
    }
    let word: String = chars[s..dot].iter().collect();
    if word.chars().count() == 1 && word.chars().all(char::is_uppercase) {
        return true;
    }
    config.abbreviations.contains(&word) || config.abbreviations.contains(&word.to_lowercase())
}

/// Characters `range` of `text` as a `String`.
pub fn char_slice(text: &str, range: Range<usize>) -> String {
    text.chars().skip(range.start).take(range.end - range.start).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(text: &str) -> Vec<String> {
        tokenize(text, &TokenizerRules::default()).into_iter().map(|t| t.text).collect()
    }

    fn sentences(text: &str) -> Vec<String> {
        segment_sentences(text, &SegmenterConfig::default())
            .into_iter()
            .map(|r| char_slice(text, r))
            .collect()
    }

    #[test]
    fn tokenize_parentheses() {
        assert_eq!(words("Աբովյան (քաղաք)"), ["Աբովյան", "(", "քաղաք", ")"]);
        assert_eq!(words("a b"), ["a", "b"]);
        assert!(words("").is_empty());
        assert!(words("   ").is_empty());
    }

    #[test]
    fn tokenize_punctuation_and_joins() {
        assert_eq!(words("Երևան, Հայաստան։"), ["Երևան", ",", "Հայաստան", "։"]);
        assert_eq!(words("ռուս-թուրքական 3.5 ..."), ["ռուս-թուրքական", "3.5", "..."]);
        assert_eq!(words("«Նաիրիտ»"), ["«", "Նաիրիտ", "»"]);
        assert_eq!(words("-ից"), ["-", "ից"]);
        // Emphasis mark stays on its host.
        assert_eq!(words("ա՛յո"), ["ա՛յո"]);
    }

    #[test]
    fn tokenize_offsets() {
        let toks = tokenize("Ա բգ (դ)", &TokenizerRules::default());
        let spans: Vec<_> = toks.iter().map(|t| (t.start, t.end)).collect();
        assert_eq!(spans, [(0, 1), (2, 4), (5, 6), (6, 7), (7, 8)]);
    }

    #[test]
    fn rule_table_parsing() {
        let rules = TokenizerRules::parse("# comment\nattach\tU+055B\njoin\t-\n").unwrap();
        assert!(rules.attach.contains(&'\u{055B}'));
        assert!(rules.join.contains(&'-'));
        assert_eq!(tokenize("ա-բ", &rules).len(), 1);
        assert!(TokenizerRules::parse("bogus\tx\n").is_err());
        assert!(TokenizerRules::parse("join\txy\n").is_err());
    }

    #[test]
    fn armenian_full_stop_splits() {
        assert_eq!(sentences("Ա բ։ Գ դ։"), ["Ա բ։", "Գ դ։"]);
    }

    #[test]
    fn no_terminator_is_one_sentence() {
        assert_eq!(sentences("Ա բ գ"), ["Ա բ գ"]);
        assert!(sentences("  ").is_empty());
    }

    #[test]
    fn abbreviations_and_initials_do_not_split() {
        assert_eq!(sentences("1918 թ. Մայիսին եղավ։ Հետո"), ["1918 թ. Մայիսին եղավ։", "Հետո"]);
        assert_eq!(sentences("Ա. Իսահակյանը գրել է։"), ["Ա. Իսահակյանը գրել է։"]);
        assert_eq!(sentences("It rained. Then it stopped."), ["It rained.", "Then it stopped."]);
        assert_eq!(sentences("Dr. Smith came."), ["Dr. Smith came."]);
        assert_eq!(sentences("a. b"), ["a. b"]);
    }

    #[test]
    fn newline_is_a_boundary_and_closers_stay() {
        assert_eq!(sentences("Ասաց «Այո։» Հետո\nՆոր"), ["Ասաց «Այո։»", "Հետո", "Նոր"]);
    }

    #[test]
    fn ranges_partition_non_whitespace() {
        let text = "Ա բ։ Գ. Դ ե! Զ? է\n\n  Ը թ։";
        let ranges = segment_sentences(text, &SegmenterConfig::default());
        let chars: Vec<char> = text.chars().collect();
        let mut covered = vec![false; chars.len()];
        for r in &ranges {
            for i in r.clone() {
                assert!(!covered[i]);
                covered[i] = true;
            }
        }
        for (i, c) in chars.iter().enumerate() {
            assert_eq!(covered[i], !c.is_whitespace() || ranges.iter().any(|r| r.contains(&i)), "{i}");
        }
    }
}

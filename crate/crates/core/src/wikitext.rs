//! A pragmatic wikitext-to-plain-text converter that keeps internal links.
//!
//! Templates, tables, comments, references, headings and file/category
//! inclusions are dropped; bold/italic quotes are stripped; internal links are
//! replaced by their anchor text and their character ranges recorded. A block
//! whose markup cannot be balanced is discarded whole and counted.
//!
//! This is not a MediaWiki parser: templates are never expanded.

use crate::classify::normalize_link_target;

/// An internal link in the clean text. Offsets are in `char`s.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WikiLink {
    pub start: usize,
    pub end: usize,
    pub target: String,
    pub anchor: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedWikitext {
    /// One line per paragraph or list item.
    pub text: String,
    pub links: Vec<WikiLink>,
    pub discarded_blocks: usize,
}

const POISON: char = '\u{0}';

/// Tags removed together with their content.
const DROPPED_TAGS: &[&str] = &[
    "ref",
    "references",
    "gallery",
    "math",
    "chem",
    "code",
    "pre",
    "timeline",
    "syntaxhighlight",
    "source",
    "score",
    "imagemap",
    "nowiki",
    "graph",
    "mapframe",
];

/// Link prefixes whose links are not prose (files, categories, other namespaces).
const SKIPPED_NAMESPACES: &[&str] = &[
    "file",
    "image",
    "media",
    "category",
    "template",
    "wikipedia",
    "help",
    "portal",
    "special",
    "wikt",
    "wiktionary",
    "commons",
    "s",
    "q",
    "n",
    "b",
    "v",
    "d",
    "mw",
    "meta",
    "user",
    "talk",
    "պատկեր",
    "ֆայլ",
    "կատեգորիա",
    "կաղապար",
    "վիքիպեդիա",
    "պորտալ",
    "օգնություն",
    "մասնակից",
];

pub fn parse_wikitext(raw: &str) -> ParsedWikitext {
    let chars: Vec<char> = raw.chars().collect();
    let stripped = strip_blocks(&chars);
    let mut out = ParsedWikitext::default();
    let mut out_len = 0usize;
    for block in split_blocks(&stripped) {
        if block.contains(&POISON) {
            out.discarded_blocks += 1;
            continue;
        }
        let Ok(line) = render_inline(&block) else {
            out.discarded_blocks += 1;
            continue;
        };
        if line.len == 0 {
            continue;
        }
        if !out.text.is_empty() {
            out.text.push('\n');
            out_len += 1;
        }
        for link in line.links {
            out.links.push(WikiLink {
                start: link.start + out_len,
                end: link.end + out_len,
                ..link
            });
        }
        out.text.push_str(&line.text);
        out_len += line.len;
    }
    out
}

fn starts_with(chars: &[char], i: usize, pat: &str) -> bool {
    let mut rest = chars.get(i..).unwrap_or(&[]).iter();
    pat.chars().all(|p| rest.next() == Some(&p))
}

fn starts_with_ci(chars: &[char], i: usize, pat: &str) -> bool {
    let mut rest = chars.get(i..).unwrap_or(&[]).iter();
    pat.chars()
        .all(|p| rest.next().is_some_and(|c| c.to_lowercase().eq(p.to_lowercase())))
}

fn find(chars: &[char], from: usize, pat: &str) -> Option<usize> {
    (from..chars.len()).find(|&j| starts_with(chars, j, pat))
}

fn find_ci(chars: &[char], from: usize, pat: &str) -> Option<usize> {
    (from..chars.len()).find(|&j| starts_with_ci(chars, j, pat))
}

fn at_line_start(chars: &[char], i: usize) -> bool {
    let mut j = i;
    while j > 0 && (chars[j - 1] == ' ' || chars[j - 1] == '\t') {
        j -= 1;
    }
    j == 0 || chars[j - 1] == '\n'
}

/// Index of the blank line ending the paragraph that contains `i`.
fn paragraph_end(chars: &[char], i: usize) -> usize {
    let mut j = i;
    while j < chars.len() {
        if chars[j] == '\n' {
            let mut k = j + 1;
            while k < chars.len() && (chars[k] == ' ' || chars[k] == '\t') {
                k += 1;
            }
            if k >= chars.len() || chars[k] == '\n' {
                return j;
            }
        }
        j += 1;
    }
    chars.len()
}

/// Position just past the `close` matching the `open` at `i`, counting nesting.
fn match_nested(chars: &[char], i: usize, open: &str, close: &str, line_start_only: bool) -> Option<usize> {
    let mut depth = 0usize;
    let mut j = i;
    let (ol, cl) = (open.chars().count(), close.chars().count());
    while j < chars.len() {
        if starts_with(chars, j, open) && (!line_start_only || at_line_start(chars, j)) {
            depth += 1;
            j += ol;
        } else if starts_with(chars, j, close) && (!line_start_only || at_line_start(chars, j)) {
            depth -= 1;
            j += cl;
            if depth == 0 {
                return Some(j);
            }
        } else {
            j += 1;
        }
    }
    None
}

/// Name of a tag opening at `i` (`<name` followed by whitespace, `>` or `/`).
fn dropped_tag_at(chars: &[char], i: usize) -> Option<&'static str> {
    if chars.get(i) != Some(&'<') {
        return None;
    }
    DROPPED_TAGS.iter().copied().find(|name| {
        starts_with_ci(chars, i + 1, name)
            && chars
                .get(i + 1 + name.len())
                .is_some_and(|&c| c == '>' || c == '/' || c.is_whitespace())
    })
}

/// Removes comments, templates, tables and dropped tags. Unbalanced
/// constructs poison the rest of their paragraph.
fn strip_blocks(chars: &[char]) -> Vec<char> {
    let mut out = Vec::with_capacity(chars.len());
    let mut i = 0;
    let n = chars.len();
    let poison = |out: &mut Vec<char>, from: usize| -> usize {
        out.push(POISON);
        paragraph_end(chars, from)
    };
    while i < n {
        if starts_with(chars, i, "<!--") {
            i = match find(chars, i + 4, "-->") {
                Some(e) => e + 3,
                None => poison(&mut out, i),
            };
            continue;
        }
        if starts_with(chars, i, "{|") && at_line_start(chars, i) {
            i = match match_nested(chars, i, "{|", "|}", true) {
                Some(e) => e,
                None => poison(&mut out, i),
            };
            continue;
        }
        if starts_with(chars, i, "{{") {
            i = match match_nested(chars, i, "{{", "}}", false) {
                Some(e) => e,
                None => poison(&mut out, i),
            };
            continue;
        }
        if starts_with(chars, i, "}}") {
            i = poison(&mut out, i);
            continue;
        }
        if let Some(name) = dropped_tag_at(chars, i) {
            let Some(gt) = find(chars, i, ">") else {
                i = poison(&mut out, i);
                continue;
            };
            if chars[gt - 1] == '/' {
                i = gt + 1;
                continue;
            }
            let close = format!("</{name}");
            i = match find_ci(chars, gt + 1, &close).and_then(|c| find(chars, c, ">")) {
                Some(e) => e + 1,
                None => poison(&mut out, i),
            };
            continue;
        }
        out.push(chars[i]);
        i += 1;
    }
    out
}

fn is_heading(line: &str) -> bool {
    let t = line.trim();
    t.len() >= 2 && t.starts_with('=') && t.ends_with('=')
}

/// Groups lines into renderable blocks: runs of plain lines form one
/// paragraph, each list item is its own block; headings, table remnants and
/// rules are dropped.
fn split_blocks(chars: &[char]) -> Vec<Vec<char>> {
    let text: String = chars.iter().collect();
    let mut blocks = Vec::new();
    let mut para: Vec<char> = Vec::new();
    let flush = |para: &mut Vec<char>, blocks: &mut Vec<Vec<char>>| {
        if para.iter().any(|c| !c.is_whitespace()) {
            blocks.push(std::mem::take(para));
        } else {
            para.clear();
        }
    };
    for line in text.split('\n') {
        let trimmed = line.trim();
        if trimmed.is_empty()
            || is_heading(trimmed)
            || trimmed.starts_with('|')
            || trimmed.starts_with('!')
            || trimmed.starts_with("----")
        {
            // A poisoned heading or table line still poisons its paragraph.
            if trimmed.contains(POISON) {
                para.push(POISON);
            }
            flush(&mut para, &mut blocks);
            continue;
        }
        if trimmed.starts_with(['*', '#', ':', ';']) {
            flush(&mut para, &mut blocks);
            let item = trimmed.trim_start_matches(['*', '#', ':', ';']);
            let mut block: Vec<char> = item.chars().collect();
            if trimmed.contains(POISON) {
                block.push(POISON);
            }
            blocks.push(block);
            continue;
        }
        if !para.is_empty() {
            para.push(' ');
        }
        para.extend(trimmed.chars());
    }
    flush(&mut para, &mut blocks);
    blocks
}

#[derive(Debug)]
struct Unbalanced;

#[derive(Default)]
struct LineBuilder {
    text: String,
    len: usize,
    pending_space: bool,
    link_active: bool,
    link_start: Option<usize>,
    links: Vec<WikiLink>,
}

impl LineBuilder {
    fn push(&mut self, c: char) {
        if c.is_whitespace() {
            if self.len > 0 {
                self.pending_space = true;
            }
            return;
        }
        if self.pending_space {
            self.text.push(' ');
            self.len += 1;
            self.pending_space = false;
        }
        if self.link_active && self.link_start.is_none() {
            self.link_start = Some(self.len);
        }
        self.text.push(c);
        self.len += 1;
    }

    fn push_str(&mut self, s: &str) {
        s.chars().for_each(|c| self.push(c));
    }

    fn begin_link(&mut self) {
        self.link_active = true;
        self.link_start = None;
    }

    fn end_link(&mut self, target: String) {
        self.link_active = false;
        if let Some(start) = self.link_start.take() {
            if target.is_empty() {
                return;
            }
            let anchor: String = self.text.chars().skip(start).collect();
            self.links.push(WikiLink {
                start,
                end: self.len,
                target,
                anchor,
            });
        }
    }
}

fn skipped_namespace(target: &str) -> bool {
    let Some((prefix, _)) = target.split_once(':') else {
        return false;
    };
    let prefix = prefix.trim().to_lowercase();
    if SKIPPED_NAMESPACES.contains(&prefix.as_str()) {
        return true;
    }
    // Interlanguage links: `en:`, `zh-min-nan:`.
    (2..=12).contains(&prefix.len()) && prefix.chars().all(|c| c.is_ascii_lowercase() || c == '-')
}

fn decode_entity(chars: &[char], i: usize) -> Option<(String, usize)> {
    let semi = (i + 1..chars.len().min(i + 12)).find(|&j| chars[j] == ';')?;
    let name: String = chars[i + 1..semi].iter().collect();
    let decoded = match name.as_str() {
        "nbsp" | "ensp" | "emsp" | "thinsp" => " ".to_string(),
        "amp" => "&".into(),
        "lt" => "<".into(),
        "gt" => ">".into(),
        "quot" => "\"".into(),
        "apos" => "'".into(),
        "ndash" => "–".into(),
        "mdash" => "—".into(),
        "laquo" => "«".into(),
        "raquo" => "»".into(),
        _ => {
            let code = if let Some(hex) = name.strip_prefix("#x").or_else(|| name.strip_prefix("#X")) {
                u32::from_str_radix(hex, 16).ok()
            } else {
                name.strip_prefix('#').and_then(|d| d.parse().ok())
            };
            code.and_then(char::from_u32)?.to_string()
        }
    };
    Some((decoded, semi + 1))
}

/// Strips quote markup, tags and entities from link anchor text.
fn plain_anchor(s: &str) -> String {
    let chars: Vec<char> = s.chars().collect();
    let mut out = String::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '\'' && chars.get(i + 1) == Some(&'\'') {
            while i < chars.len() && chars[i] == '\'' {
                i += 1;
            }
            continue;
        }
        if chars[i] == '&' {
            if let Some((d, next)) = decode_entity(&chars, i) {
                out.push_str(&d);
                i = next;
                continue;
            }
        }
        if let Some(next) = skip_tag(&chars, i) {
            i = next;
            continue;
        }
        if chars[i] == '[' || chars[i] == ']' {
            i += 1;
            continue;
        }
        out.push(chars[i]);
        i += 1;
    }
    out
}

/// End of an HTML-ish tag starting at `i`, if there is one.
fn skip_tag(chars: &[char], i: usize) -> Option<usize> {
    if chars[i] != '<' {
        return None;
    }
    let mut j = i + 1;
    if chars.get(j) == Some(&'/') {
        j += 1;
    }
    if !chars.get(j).is_some_and(|c| c.is_ascii_alphabetic()) {
        return None;
    }
    let gt = (j..chars.len()).find(|&k| chars[k] == '>' || chars[k] == '<')?;
    (chars[gt] == '>').then_some(gt + 1)
}

fn render_inline(block: &[char]) -> Result<LineBuilder, Unbalanced> {
    let mut b = LineBuilder::default();
    let n = block.len();
    let mut i = 0;
    while i < n {
        let c = block[i];
        if c == '\'' && block.get(i + 1) == Some(&'\'') {
            while i < n && block[i] == '\'' {
                i += 1;
            }
            continue;
        }
        if starts_with(block, i, "[[") {
            let end = match_nested(block, i, "[[", "]]", false).ok_or(Unbalanced)?;
            let inner: String = block[i + 2..end - 2].iter().collect();
            i = end;
            let (target, anchor) = match inner.split_once('|') {
                Some((t, a)) => (t.to_string(), Some(a.to_string())),
                None => (inner.clone(), None),
            };
            let target_trim = target.trim();
            if let Some(shown) = target_trim.strip_prefix(':') {
                b.push_str(&plain_anchor(anchor.as_deref().unwrap_or(shown)));
                continue;
            }
            if skipped_namespace(target_trim) {
                continue;
            }
            let mut anchor = plain_anchor(anchor.as_deref().filter(|a| !a.trim().is_empty()).unwrap_or(&target));
            // Link trail: letters glued to `]]` join the anchor.
            while i < n && block[i].is_alphabetic() {
                anchor.push(block[i]);
                i += 1;
            }
            b.begin_link();
            b.push_str(&anchor);
            b.end_link(normalize_link_target(target_trim));
            continue;
        }
        if starts_with(block, i, "]]") {
            return Err(Unbalanced);
        }
        if c == '[' {
            let rest: String = block[i + 1..n.min(i + 10)].iter().collect();
            if ["http://", "https://", "ftp://", "//"].iter().any(|p| rest.starts_with(p)) {
                if let Some(close) = (i + 1..n).find(|&j| block[j] == ']') {
                    let inner: String = block[i + 1..close].iter().collect();
                    if let Some((_, label)) = inner.split_once(' ') {
                        b.push_str(&plain_anchor(label));
                    }
                    i = close + 1;
                    continue;
                }
            }
        }
        if c == '&' {
            if let Some((d, next)) = decode_entity(block, i) {
                b.push_str(&d);
                i = next;
                continue;
            }
        }
        if c == '<' {
            if let Some(next) = skip_tag(block, i) {
                b.push(' ');
                i = next;
                continue;
            }
        }
        if c == '_' && starts_with(block, i, "__") {
            let mut j = i + 2;
            while j < n && block[j].is_ascii_uppercase() {
                j += 1;
            }
            if j > i + 2 && starts_with(block, j, "__") {
                i = j + 2;
                continue;
            }
        }
        b.push(c);
        i += 1;
    }
    Ok(b)
}

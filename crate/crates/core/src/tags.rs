//! Entity classes and the seven-tag IOB2 tag set.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The three CoNLL entity classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NEType {
    Per,
    Org,
    Loc,
}

impl NEType {
    pub const ALL: [NEType; 3] = [NEType::Per, NEType::Org, NEType::Loc];

    pub fn as_str(self) -> &'static str {
        match self {
            NEType::Per => "PER",
            NEType::Org => "ORG",
            NEType::Loc => "LOC",
        }
    }
}

impl fmt::Display for NEType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown entity type `{0}` (expected PER, ORG or LOC)")]
pub struct UnknownNEType(pub String);

impl FromStr for NEType {
    type Err = UnknownNEType;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "PER" => Ok(NEType::Per),
            "ORG" => Ok(NEType::Org),
            "LOC" => Ok(NEType::Loc),
            other => Err(UnknownNEType(other.to_string())),
        }
    }
}

/// One IOB2 tag.
///
/// The index order (`O`, `B-PER`, `I-PER`, `B-LOC`, `I-LOC`, `B-ORG`, `I-ORG`)
/// is used for matrix layout and for decoder tie-breaking, so `O` always wins
/// ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tag {
    O,
    B(NEType),
    I(NEType),
}

pub const TAG_COUNT: usize = 7;

impl Tag {
    pub const ALL: [Tag; TAG_COUNT] = [
        Tag::O,
        Tag::B(NEType::Per),
        Tag::I(NEType::Per),
        Tag::B(NEType::Loc),
        Tag::I(NEType::Loc),
        Tag::B(NEType::Org),
        Tag::I(NEType::Org),
    ];

    pub fn index(self) -> usize {
        match self {
            Tag::O => 0,
            Tag::B(NEType::Per) => 1,
            Tag::I(NEType::Per) => 2,
            Tag::B(NEType::Loc) => 3,
            Tag::I(NEType::Loc) => 4,
            Tag::B(NEType::Org) => 5,
            Tag::I(NEType::Org) => 6,
        }
    }

    pub fn from_index(index: usize) -> Option<Tag> {
        Tag::ALL.get(index).copied()
    }

    pub fn netype(self) -> Option<NEType> {
        match self {
            Tag::O => None,
            Tag::B(t) | Tag::I(t) => Some(t),
        }
    }

    /// Whether `self` may directly follow `prev` in a valid IOB2 sequence.
    /// `prev == None` means sentence start.
    pub fn may_follow(self, prev: Option<Tag>) -> bool {
        match self {
            Tag::O | Tag::B(_) => true,
            Tag::I(t) => matches!(prev, Some(Tag::B(p)) | Some(Tag::I(p)) if p == t),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Tag::O => "O",
            Tag::B(NEType::Per) => "B-PER",
            Tag::I(NEType::Per) => "I-PER",
            Tag::B(NEType::Loc) => "B-LOC",
            Tag::I(NEType::Loc) => "I-LOC",
            Tag::B(NEType::Org) => "B-ORG",
            Tag::I(NEType::Org) => "I-ORG",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown tag `{0}`")]
pub struct UnknownTag(pub String);

impl FromStr for Tag {
    type Err = UnknownTag;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Tag::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| UnknownTag(s.to_string()))
    }
}

/// Whether a tag sequence is IOB2-valid.
pub fn is_iob2_valid(tags: &[Tag]) -> bool {
    let mut prev = None;
    for &tag in tags {
        if !tag.may_follow(prev) {
            return false;
        }
        prev = Some(tag);
    }
    true
}

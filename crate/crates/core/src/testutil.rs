use proptest::prelude::*;

use crate::tags::{Tag, TAG_COUNT};

/// Arbitrary tag sequences, including invalid `I-X` placements.
pub fn arb_any_tags(max_len: usize) -> impl Strategy<Value = Vec<Tag>> {
    prop::collection::vec(0..TAG_COUNT, 0..=max_len)
        .prop_map(|idx| idx.into_iter().map(|i| Tag::from_index(i).unwrap()).collect())
}

/// Non-empty IOB2-valid sequences: invalid `I-X` are rewritten to `B-X`.
pub fn arb_valid_tags(max_len: usize) -> impl Strategy<Value = Vec<Tag>> {
    prop::collection::vec(0..TAG_COUNT, 1..=max_len).prop_map(|idx| {
        let mut prev: Option<Tag> = None;
        idx.into_iter()
            .map(|i| {
                let mut t = Tag::from_index(i).unwrap();
                if !t.may_follow(prev) {
                    t = Tag::B(t.netype().unwrap());
                }
                prev = Some(t);
                t
            })
            .collect()
    })
}

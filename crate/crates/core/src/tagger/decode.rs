//! Constrained first-order Viterbi decoding.

use crate::tags::{Tag, TAG_COUNT};

pub type Scores = [f64; TAG_COUNT];

/// Total score of a tag sequence.
pub fn sequence_score(tags: &[Tag], emissions: &[Scores], start: &Scores, trans: &[Scores; TAG_COUNT]) -> f64 {
    let mut total = 0.0;
    for (i, t) in tags.iter().enumerate() {
        let j = t.index();
        total += emissions[i][j];
        total += match i {
            0 => start[j],
            _ => trans[tags[i - 1].index()][j],
        };
    }
    total
}

/// The highest-scoring IOB2-valid sequence. On ties the lower tag index wins
/// at every step, so all-zero scores decode to all `O`.
pub fn viterbi(emissions: &[Scores], start: &Scores, trans: &[Scores; TAG_COUNT]) -> Vec<Tag> {
    let n = emissions.len();
    if n == 0 {
        return Vec::new();
    }
    let allowed = |prev: Option<usize>, cur: usize| Tag::ALL[cur].may_follow(prev.map(|p| Tag::ALL[p]));
    let mut best = vec![[f64::NEG_INFINITY; TAG_COUNT]; n];
    let mut back = vec![[0usize; TAG_COUNT]; n];
    for j in 0..TAG_COUNT {
        if allowed(None, j) {
            best[0][j] = start[j] + emissions[0][j];
        }
    }
    for i in 1..n {
        for j in 0..TAG_COUNT {
            let mut arg = None;
            let mut max = f64::NEG_INFINITY;
            for p in 0..TAG_COUNT {
                if best[i - 1][p] == f64::NEG_INFINITY || !allowed(Some(p), j) {
                    continue;
                }
                let s = best[i - 1][p] + trans[p][j];
                if arg.is_none() || s > max {
                    max = s;
                    arg = Some(p);
                }
            }
            if let Some(p) = arg {
                best[i][j] = max + emissions[i][j];
                back[i][j] = p;
            }
        }
    }
    let mut j = 0;
    for k in 1..TAG_COUNT {
        if best[n - 1][k] > best[n - 1][j] {
            j = k;
        }
    }
    let mut out = vec![Tag::O; n];
    for i in (0..n).rev() {
        out[i] = Tag::ALL[j];
        j = back[i][j];
    }
    out
}

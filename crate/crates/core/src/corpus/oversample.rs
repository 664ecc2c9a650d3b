use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::rng::stream_rng;

const DRAW_STREAM: u64 = 0x05a3_91e0;
const SHUFFLE_STREAM: u64 = 0x05a3_91e1;

/// Random oversampling with replacement.
///
/// Each label is topped up to the majority label's count by drawing
/// uniformly, with replacement, from that label's original items. The
/// duplicates are appended after the originals (labels in ascending order)
/// and the combined list is shuffled with the same seed. When nothing needs
/// to be added the input is returned unchanged.
pub fn oversample<T: Clone, L: Ord + Clone>(items: &[(T, L)], seed: u64) -> Vec<(T, L)> {
    let mut by_label: BTreeMap<&L, Vec<usize>> = BTreeMap::new();
    for (i, (_, label)) in items.iter().enumerate() {
        by_label.entry(label).or_default().push(i);
    }
    let majority = by_label.values().map(Vec::len).max().unwrap_or(0);

    let mut out: Vec<(T, L)> = items.to_vec();
    let mut draw = stream_rng(seed, DRAW_STREAM);
    for members in by_label.values() {
        for _ in members.len()..majority {
            let pick = members[draw.gen_range(0..members.len())];
            out.push(items[pick].clone());
        }
    }
    if out.len() > items.len() {
        out.shuffle(&mut stream_rng(seed, SHUFFLE_STREAM));
    }
    out
}

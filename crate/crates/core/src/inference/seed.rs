//! Random graphs realizing a given degree sequence.

use std::collections::BinaryHeap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graphlib::generators::try_swap;
use crate::graphlib::Graph;

const STUB_MATCHING_ATTEMPTS: usize = 50;
const RANDOMIZING_SWAPS_PER_EDGE: usize = 10;

/// Erdős–Gallai test on a non-increasing sequence.
pub fn is_graphical(seq: &[u32]) -> bool {
    let total: u64 = seq.iter().map(|&d| d as u64).sum();
    if total % 2 == 1 {
        return false;
    }
    let n = seq.len();
    let mut prefix = 0u64;
    for k in 1..=n {
        prefix += seq[k - 1] as u64;
        let tail: u64 = seq[k..].iter().map(|&d| (d as u64).min(k as u64)).sum();
        if prefix > (k as u64) * (k as u64 - 1) + tail {
            return false;
        }
    }
    true
}

/// Sorts non-increasing, drops zeros, and decrements the largest degree until
/// the sequence has even sum and is graphical. Returns the repaired sequence
/// and the number of decrements made.
pub fn repair_sequence(seq: &[u32]) -> (Vec<u32>, u32) {
    let mut s: Vec<u32> = seq.iter().copied().filter(|&d| d > 0).collect();
    s.sort_unstable_by(|a, b| b.cmp(a));
    let mut decrements = 0;
    while !is_graphical(&s) {
        s[0] -= 1;
        decrements += 1;
        s.sort_unstable_by(|a, b| b.cmp(a));
        while s.last() == Some(&0) {
            s.pop();
        }
    }
    if decrements > 0 {
        log::warn!("degree sequence was not graphical; decremented largest degrees {decrements} times");
    }
    (s, decrements)
}

/// A uniformly shuffled stub pairing, or `None` if it produced a loop or repeat.
fn stub_matching<R: Rng>(seq: &[u32], rng: &mut R) -> Option<Graph> {
    let mut stubs: Vec<u32> = Vec::new();
    for (v, &d) in seq.iter().enumerate() {
        stubs.extend(std::iter::repeat_n(v as u32, d as usize));
    }
    stubs.shuffle(rng);
    let mut g = Graph::new(seq.len());
    for pair in stubs.chunks(2) {
        if !g.add_edge(pair[0], pair[1]) {
            return None;
        }
    }
    Some(g)
}

/// Deterministic Havel–Hakimi realization of a graphical sequence.
fn havel_hakimi(seq: &[u32]) -> Graph {
    let mut g = Graph::new(seq.len());
    let mut heap: BinaryHeap<(u32, u32)> = seq.iter().enumerate().map(|(v, &d)| (d, v as u32)).collect();
    let mut taken = Vec::new();
    while let Some((d, v)) = heap.pop() {
        if d == 0 {
            break;
        }
        taken.clear();
        for _ in 0..d {
            let (du, u) = heap.pop().expect("graphical sequence");
            g.add_edge(v, u);
            taken.push((du - 1, u));
        }
        heap.extend(taken.iter().copied().filter(|&(du, _)| du > 0));
    }
    g
}

/// Random simple graph with degree sequence `seq` (after repair).
///
/// Node `i` receives the `i`-th degree of the repaired sequence. Stub
/// matching is tried first; if it keeps producing loops or repeated edges
/// the Havel–Hakimi realization is randomized by double-edge swaps.
pub fn seed_graph<R: Rng>(seq: &[u32], rng: &mut R) -> Graph {
    let (s, _) = repair_sequence(seq);
    for _ in 0..STUB_MATCHING_ATTEMPTS {
        if let Some(g) = stub_matching(&s, rng) {
            return g;
        }
    }
    let mut g = havel_hakimi(&s);
    let swaps = RANDOMIZING_SWAPS_PER_EDGE * g.num_edges();
    let mut done = 0;
    let mut attempts = 0;
    while done < swaps && attempts < 100 * swaps.max(1) {
        attempts += 1;
        if try_swap(&mut g, rng) {
            done += 1;
        }
    }
    g
}

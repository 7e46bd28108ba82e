//! Degree-sequence regression: the cheapest monotone staircase through noisy
//! degree-sequence and CCDF measurements.
//!
//! Grid points are `(x, y)` with `0 ≤ x, y ≤ N`. A path runs from `(0, N)` to
//! `(N, 0)` taking unit steps right or down. A right step `(x, y) → (x+1, y)`
//! says node `x` has degree `y` and costs `|v[x] − y|`; a down step
//! `(x, y+1) → (x, y)` says exactly `x` nodes have degree above `y` and costs
//! `|h[y] − x|`. Reading off the heights of the right steps gives a
//! non-increasing degree sequence.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rustc_hash::FxHashMap;

/// Noisy measurements and the grid cap.
pub struct RegressionGrid<'a> {
    /// `v[x]`: noisy `x`-th largest degree.
    pub sequence: &'a dyn Fn(usize) -> f64,
    /// `h[y]`: noisy number of nodes with degree greater than `y`.
    pub ccdf: &'a dyn Fn(usize) -> f64,
    pub cap: usize,
}

/// Smallest power of two strictly above `nodes + 6/ε`.
pub fn default_cap(noisy_nodes: f64, epsilon: f64) -> usize {
    let bound = noisy_nodes.max(0.0) + 6.0 / epsilon;
    let mut n = 1usize;
    while (n as f64) <= bound {
        n *= 2;
    }
    n
}

#[derive(Clone, Copy)]
struct Cost(f64);

impl PartialEq for Cost {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Lowest-cost staircase, decoded as `N` degrees (trailing zeros included).
///
/// Uniform-cost search; grid vertices are generated only when reached, so
/// the work concentrates in the low-cost trough around the true staircase.
pub fn fit_degree_sequence(grid: &RegressionGrid<'_>) -> Vec<u32> {
    let n = grid.cap;
    let mut v_cache: FxHashMap<usize, f64> = FxHashMap::default();
    let mut h_cache: FxHashMap<usize, f64> = FxHashMap::default();
    let mut dist: FxHashMap<(usize, usize), f64> = FxHashMap::default();
    // predecessor: true when reached by a right step
    let mut came_right: FxHashMap<(usize, usize), bool> = FxHashMap::default();
    let mut heap = BinaryHeap::new();
    dist.insert((0, n), 0.0);
    heap.push(Reverse((Cost(0.0), 0usize, n)));

    while let Some(Reverse((Cost(d), x, y))) = heap.pop() {
        if dist.get(&(x, y)).is_some_and(|&best| d > best) {
            continue;
        }
        if (x, y) == (n, 0) {
            break;
        }
        if x < n {
            let v = *v_cache.entry(x).or_insert_with(|| (grid.sequence)(x));
            relax(
                &mut dist,
                &mut came_right,
                &mut heap,
                (x + 1, y),
                d + (v - y as f64).abs(),
                true,
            );
        }
        if y > 0 {
            let h = *h_cache.entry(y - 1).or_insert_with(|| (grid.ccdf)(y - 1));
            relax(
                &mut dist,
                &mut came_right,
                &mut heap,
                (x, y - 1),
                d + (h - x as f64).abs(),
                false,
            );
        }
    }

    let mut degrees = vec![0u32; n];
    let (mut x, mut y) = (n, 0usize);
    while (x, y) != (0, n) {
        if came_right[&(x, y)] {
            x -= 1;
            degrees[x] = y as u32;
        } else {
            y += 1;
        }
    }
    degrees
}

fn relax(
    dist: &mut FxHashMap<(usize, usize), f64>,
    came_right: &mut FxHashMap<(usize, usize), bool>,
    heap: &mut BinaryHeap<Reverse<(Cost, usize, usize)>>,
    to: (usize, usize),
    cost: f64,
    right: bool,
) {
    let better = dist.get(&to).is_none_or(|&old| cost < old);
    if better {
        dist.insert(to, cost);
        came_right.insert(to, right);
        heap.push(Reverse((Cost(cost), to.0, to.1)));
    }
}

/// Fits from dense slices, treating indices past the end as zero.
pub fn fit_from_slices(sequence: &[f64], ccdf: &[f64], cap: usize) -> Vec<u32> {
    let v = |x: usize| sequence.get(x).copied().unwrap_or(0.0);
    let h = |y: usize| ccdf.get(y).copied().unwrap_or(0.0);
    fit_degree_sequence(&RegressionGrid {
        sequence: &v,
        ccdf: &h,
        cap,
    })
}

/// Total staircase cost of `degrees` (non-increasing, length `cap`) under the grid.
pub fn staircase_cost(grid: &RegressionGrid<'_>, degrees: &[u32]) -> f64 {
    let n = grid.cap;
    let mut total = 0.0;
    for (x, &d) in degrees.iter().enumerate() {
        total += ((grid.sequence)(x) - d as f64).abs();
    }
    // down steps at column x cover heights between the neighbouring degrees
    for y in 0..n {
        let above = degrees.iter().take_while(|&&d| d as usize > y).count();
        total += ((grid.ccdf)(y) - above as f64).abs();
    }
    total
}

//! Benchmark graph generators.

use rand::seq::SliceRandom;
use rand::Rng;

use super::graph::Graph;

/// Prefix sums over nonnegative node weights, for weighted sampling.
struct Fenwick {
    tree: Vec<f64>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick { tree: vec![0.0; n + 1] }
    }

    fn add(&mut self, i: usize, delta: f64) {
        let mut i = i + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    fn total(&self, upto: usize) -> f64 {
        let mut i = upto;
        let mut s = 0.0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }

    /// Smallest index whose inclusive prefix sum exceeds `target`.
    fn find(&self, mut target: f64) -> usize {
        let mut pos = 0;
        let mut step = (self.tree.len() - 1).next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= target {
                pos = next;
                target -= self.tree[next];
            }
            step >>= 1;
        }
        pos.min(self.tree.len() - 2)
    }
}

pub fn complete_graph(n: usize) -> Graph {
    let mut g = Graph::new(n);
    for a in 0..n as u32 {
        for b in a + 1..n as u32 {
            g.add_edge(a, b);
        }
    }
    g
}

/// Preferential attachment with `n` nodes and about `m` edges.
///
/// New nodes attach to existing node `v` with probability proportional to
/// `d_v + A`, where `A = m₀(1/β − 2)` and `m₀ ≈ m/n` is the number of edges a
/// new node brings; `β = ½` is the classic linear model, larger `β` gives
/// heavier tails. Asking for at least `C(n, 2)` edges yields the complete graph.
pub fn barabasi_albert<R: Rng>(n: usize, m: usize, beta: f64, rng: &mut R) -> Graph {
    assert!(beta > 0.0 && beta < 1.0, "dynamical exponent must lie in (0, 1)");
    let max_edges = n * n.saturating_sub(1) / 2;
    if m >= max_edges {
        return complete_graph(n);
    }
    let m0 = ((m as f64 / n as f64).round() as usize).max(1);
    let seed = (m0 + 1).min(n);
    let mut g = Graph::new(n);
    for &(a, b) in complete_graph(seed).edges() {
        g.add_edge(a, b);
    }

    let offset = m0 as f64 * (1.0 / beta - 2.0);
    let weight = |d: u32| (d as f64 + offset).max(1e-6);
    let mut degree = vec![0u32; n];
    for &(a, b) in g.edges() {
        degree[a as usize] += 1;
        degree[b as usize] += 1;
    }
    let mut tree = Fenwick::new(n);
    for (v, &d) in degree.iter().enumerate().take(seed) {
        tree.add(v, weight(d));
    }

    let remaining = m.saturating_sub(g.num_edges()) as f64;
    let rate = if n > seed { remaining / (n - seed) as f64 } else { 0.0 };
    let mut chosen = Vec::new();
    for (step, v) in (seed..n).enumerate() {
        let want = ((step + 1) as f64 * rate).floor() as usize - (step as f64 * rate).floor() as usize;
        let want = want.min(v);
        chosen.clear();
        for _ in 0..want {
            let total = tree.total(v);
            if total <= 0.0 {
                break;
            }
            let target = tree.find(rng.gen::<f64>() * total);
            chosen.push(target);
            // exclude while choosing the rest of this node's edges
            tree.add(target, -weight(degree[target]));
        }
        for &t in &chosen {
            g.add_edge(v as u32, t as u32);
            degree[t] += 1;
            degree[v] += 1;
            tree.add(t, weight(degree[t]));
        }
        tree.add(v, weight(degree[v]));
    }
    g
}

/// Tries one degree-preserving swap `(a,b),(c,d) → (a,d),(c,b)` on random edges.
pub fn try_swap<R: Rng>(g: &mut Graph, rng: &mut R) -> bool {
    let m = g.num_edges();
    if m < 2 {
        return false;
    }
    let i = rng.gen_range(0..m);
    let mut j = rng.gen_range(0..m - 1);
    if j >= i {
        j += 1;
    }
    let (mut a, mut b) = g.edge(i);
    let (mut c, mut d) = g.edge(j);
    if rng.gen_bool(0.5) {
        std::mem::swap(&mut a, &mut b);
    }
    if rng.gen_bool(0.5) {
        std::mem::swap(&mut c, &mut d);
    }
    if a == d || c == b || g.has_edge(a, d) || g.has_edge(c, b) {
        return false;
    }
    g.replace_edge(i, a, d);
    g.replace_edge(j, c, b);
    true
}

/// Degree-preserving randomization by `swaps` successful double-edge swaps.
pub fn rewire<R: Rng>(g: &Graph, swaps: usize, rng: &mut R) -> Graph {
    let mut out = g.clone();
    let mut done = 0;
    let mut attempts = 0;
    let limit = swaps.saturating_mul(100).max(1000);
    while done < swaps && attempts < limit {
        attempts += 1;
        if try_swap(&mut out, rng) {
            done += 1;
        }
    }
    out
}

/// Disjoint cliques of size `clique` over a random node order, plus `extra` random edges.
pub fn planted_cliques<R: Rng>(n: usize, clique: usize, extra: usize, rng: &mut R) -> Graph {
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(rng);
    let mut g = Graph::new(n);
    for group in order.chunks(clique.max(1)) {
        for (i, &a) in group.iter().enumerate() {
            for &b in &group[i + 1..] {
                g.add_edge(a, b);
            }
        }
    }
    add_random_edges(&mut g, n, extra, rng);
    g
}

/// `G(n, m)`: `m` distinct uniformly random edges.
pub fn gnm<R: Rng>(n: usize, m: usize, rng: &mut R) -> Graph {
    let mut g = Graph::new(n);
    add_random_edges(&mut g, n, m, rng);
    g
}

fn add_random_edges<R: Rng>(g: &mut Graph, n: usize, count: usize, rng: &mut R) {
    let target = (g.num_edges() + count).min(n * n.saturating_sub(1) / 2);
    while g.num_edges() < target {
        let a = rng.gen_range(0..n as u32);
        let b = rng.gen_range(0..n as u32);
        g.add_edge(a, b);
    }
}

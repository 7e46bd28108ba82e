//! Exact graph statistics computed directly from a [`Graph`].
//!
//! These are evaluation statistics for synthetic graphs and ground truth for
//! checking the weight calculus of the query plans; none of them is private.

use std::collections::BTreeMap;

use super::graph::Graph;

/// Every triangle `a < b < c`.
pub fn triangles(g: &Graph) -> Vec<(u32, u32, u32)> {
    let adj = g.adjacency();
    let mut out = Vec::new();
    for (a, na) in adj.iter().enumerate() {
        let a = a as u32;
        for &b in na.iter().filter(|&&b| b > a) {
            let nb = &adj[b as usize];
            // intersect the parts of both lists above b
            let (mut i, mut j) = (na.partition_point(|&x| x <= b), nb.partition_point(|&x| x <= b));
            while i < na.len() && j < nb.len() {
                match na[i].cmp(&nb[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        out.push((a, b, na[i]));
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
    }
    out
}

pub fn triangle_count(g: &Graph) -> u64 {
    triangles(g).len() as u64
}

/// Triangle counts per sorted triple of degrees bucketed by `⌊d/k⌋`.
pub fn triangles_by_degree(g: &Graph, bucket: u32) -> BTreeMap<[u32; 3], u64> {
    let d = g.degrees();
    let mut out = BTreeMap::new();
    for (a, b, c) in triangles(g) {
        let mut key = [d[a as usize] / bucket, d[b as usize] / bucket, d[c as usize] / bucket];
        key.sort_unstable();
        *out.entry(key).or_insert(0) += 1;
    }
    out
}

/// `Σ_{triangles} min(1/d_a, 1/d_b) + min(1/d_a, 1/d_c) + min(1/d_b, 1/d_c)`.
pub fn tbi_value(g: &Graph) -> f64 {
    let d = g.degrees();
    triangles(g)
        .into_iter()
        .map(|(a, b, c)| {
            let (ia, ib, ic) = (
                1.0 / d[a as usize] as f64,
                1.0 / d[b as usize] as f64,
                1.0 / d[c as usize] as f64,
            );
            ia.min(ib) + ia.min(ic) + ib.min(ic)
        })
        .sum()
}

/// `Σ_v d_v²`, the size of the length-two path index.
pub fn sum_squared_degrees(g: &Graph) -> u64 {
    g.degrees().iter().map(|&d| (d as u64) * (d as u64)).sum()
}

/// Number of 4-cycles.
pub fn square_count(g: &Graph) -> u64 {
    let adj = g.adjacency();
    let n = adj.len();
    // count common neighbours per unordered pair; each square is seen from both diagonals
    let mut total = 0u64;
    let mut common = vec![0u64; n];
    for a in 0..n {
        let mut touched = Vec::new();
        for &m in &adj[a] {
            for &c in &adj[m as usize] {
                let c = c as usize;
                if c > a {
                    if common[c] == 0 {
                        touched.push(c);
                    }
                    common[c] += 1;
                }
            }
        }
        for c in touched {
            total += common[c] * (common[c] - 1) / 2;
            common[c] = 0;
        }
    }
    total / 2
}

/// Number of `k`-stars, `Σ_v C(d_v, k)`, from a degree sequence.
pub fn kstars_from_sequence(seq: &[u32], k: u32) -> u128 {
    seq.iter().map(|&d| binomial(d as u128, k as u128)).sum()
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Degree assortativity and whether it was degenerate (zero variance, reported as 0).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Assortativity {
    pub r: f64,
    pub degenerate: bool,
}

/// Pearson correlation of endpoint degrees over both orientations of every edge.
pub fn assortativity(g: &Graph) -> Assortativity {
    let d = g.degrees();
    let m = g.num_edges() as f64;
    if m == 0.0 {
        return Assortativity {
            r: 0.0,
            degenerate: true,
        };
    }
    let (mut prod, mut sum, mut sq) = (0.0, 0.0, 0.0);
    for &(a, b) in g.edges() {
        let (x, y) = (d[a as usize] as f64, d[b as usize] as f64);
        prod += x * y;
        sum += 0.5 * (x + y);
        sq += 0.5 * (x * x + y * y);
    }
    let mean = sum / m;
    let num = prod / m - mean * mean;
    let den = sq / m - mean * mean;
    if den.abs() <= 1e-12 * sq.max(1.0) / m {
        return Assortativity {
            r: 0.0,
            degenerate: true,
        };
    }
    Assortativity {
        r: (num / den).clamp(-1.0, 1.0),
        degenerate: false,
    }
}

/// Unscaled triangle estimate for a TbD measurement of the sorted triple `(x, y, z)`.
pub fn unscale_tbd(triple: [u32; 3], value: f64) -> f64 {
    let s: f64 = triple.iter().map(|&d| (d as f64) * (d as f64)).sum();
    if s == 0.0 {
        return 0.0;
    }
    value * s / 3.0
}

/// Laplace scale of an unscaled TbD estimate when the plan used the input `uses` times.
pub fn tbd_unscaled_noise(triple: [u32; 3], epsilon: f64, uses: u64) -> f64 {
    let s: f64 = triple.iter().map(|&d| (d as f64) * (d as f64)).sum();
    (uses as f64 / epsilon) / (3.0 / s)
}

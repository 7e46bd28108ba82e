//! Non-wPINQ baseline: a directly noised joint degree distribution in the
//! style of Sala et al., where the pair `(dᵢ, dⱼ)` receives Laplace noise of
//! scale `4·max(dᵢ, dⱼ)/ε`.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::privacy::NoiseSource;

use super::graph::Graph;

/// Exact undirected JDD over every pair `dᵢ ≤ dⱼ` of degrees present in the
/// graph, including zero-count pairs.
pub fn exact_jdd(g: &Graph) -> BTreeMap<(u32, u32), f64> {
    let d = g.degrees();
    let present: BTreeSet<u32> = d.iter().copied().filter(|&x| x > 0).collect();
    let mut table = BTreeMap::new();
    for &a in &present {
        for &b in present.range(a..) {
            table.insert((a, b), 0.0);
        }
    }
    for &(a, b) in g.edges() {
        let (x, y) = (d[a as usize], d[b as usize]);
        *table.get_mut(&(x.min(y), x.max(y))).expect("pair of present degrees") += 1.0;
    }
    table
}

/// Laplace scale applied to the pair `(dᵢ, dⱼ)`.
pub fn sala_noise_scale(di: u32, dj: u32, epsilon: f64) -> f64 {
    4.0 * di.max(dj) as f64 / epsilon
}

/// The noised table; every pair, zero or not, receives noise.
pub fn jdd_sala_baseline(g: &Graph, epsilon: f64, src: &mut NoiseSource) -> Result<BTreeMap<(u32, u32), f64>> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    let mut table = exact_jdd(g);
    for (&(a, b), value) in table.iter_mut() {
        *value += src.laplace(sala_noise_scale(a, b, epsilon))?;
    }
    Ok(table)
}

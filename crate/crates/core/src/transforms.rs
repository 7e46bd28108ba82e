//! Stable transformations of weighted datasets.
//!
//! Each transformation rescales record weights so that the output changes by
//! at most as much as the input (in `‖·‖`). The batch functions here are the
//! reference semantics; the incremental engine reuses the per-part helpers
//! (`select_many_scaled`, `group_outputs`, `shave_outputs`, `join_part`) so
//! that both evaluation routes agree on every part.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::dataset::{WeightedDataset, WEIGHT_EPSILON};
use crate::parallel;
use crate::record::Record;

pub type Mapper = Arc<dyn Fn(&Record) -> Record + Send + Sync>;
pub type Predicate = Arc<dyn Fn(&Record) -> bool + Send + Sync>;
pub type Expander = Arc<dyn Fn(&Record) -> Vec<(Record, f64)> + Send + Sync>;
/// Receives the records of one group prefix in canonical order.
pub type Reducer = Arc<dyn Fn(&[Record]) -> Record + Send + Sync>;
pub type Combiner = Arc<dyn Fn(&Record, &Record) -> Record + Send + Sync>;
/// The records of one key, as batch operators hand them to the per-key kernels.
pub type Part = Vec<(Record, f64)>;
pub type ScheduleFn = Arc<dyn Fn(&Record) -> Box<dyn Iterator<Item = f64>> + Send + Sync>;

/// Per-record weight schedule for [`shave`].
#[derive(Clone)]
pub enum ShaveSchedule {
    /// `⟨c, c, c, …⟩` for every record.
    Constant(f64),
    /// Arbitrary nonnegative sequence per record. The sequence must either end
    /// or eventually accumulate past any finite weight.
    PerRecord(ScheduleFn),
}

impl std::fmt::Debug for ShaveSchedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ShaveSchedule::Constant(c) => write!(f, "Constant({c})"),
            ShaveSchedule::PerRecord(_) => f.write_str("PerRecord(..)"),
        }
    }
}

/// `Select`: output(x) = Σ_{y: f(y)=x} a(y).
pub fn select<F>(a: &WeightedDataset, f: F) -> WeightedDataset
where
    F: Fn(&Record) -> Record,
{
    a.iter().map(|(r, w)| (f(r), w)).collect()
}

/// `Where`: keeps records satisfying `p` with their weights.
pub fn filter<P>(a: &WeightedDataset, p: P) -> WeightedDataset
where
    P: Fn(&Record) -> bool,
{
    a.iter().filter(|(r, _)| p(r)).map(|(r, w)| (r.clone(), w)).collect()
}

/// Consolidates one expansion and scales it to at most unit size.
pub fn select_many_scaled(mut produced: Vec<(Record, f64)>) -> Vec<(Record, f64)> {
    consolidate(&mut produced);
    let norm: f64 = produced.iter().map(|(_, w)| w.abs()).sum();
    let scale = 1.0 / norm.max(1.0);
    for item in produced.iter_mut() {
        item.1 *= scale;
    }
    produced
}

/// `SelectMany`: Σ_x a(x) · f(x) / max(1, ‖f(x)‖).
pub fn select_many<F>(a: &WeightedDataset, f: F) -> WeightedDataset
where
    F: Fn(&Record) -> Vec<(Record, f64)>,
{
    let mut out = WeightedDataset::new();
    for (r, w) in a.iter() {
        for (x, v) in select_many_scaled(f(r)) {
            out.add(x, w * v);
        }
    }
    out
}

/// Outputs of `GroupBy` for one key part.
///
/// Records are ordered by non-increasing weight (ties by canonical order); the
/// prefix ending at position `i` is reduced and emitted with weight
/// `(w_i − w_{i+1}) / 2`, taking `w_n = 0`.
pub fn group_outputs<R>(key: &Record, part: &[(Record, f64)], reducer: R) -> Vec<(Record, f64)>
where
    R: Fn(&[Record]) -> Record,
{
    let mut ordered: Vec<&(Record, f64)> = part.iter().collect();
    ordered.sort_by(|x, y| y.1.total_cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
    let mut out = Vec::new();
    for i in 0..ordered.len() {
        let next = ordered.get(i + 1).map_or(0.0, |e| e.1);
        let weight = (ordered[i].1 - next) / 2.0;
        if weight.abs() <= WEIGHT_EPSILON {
            continue;
        }
        let mut prefix: Vec<Record> = ordered[..=i].iter().map(|e| e.0.clone()).collect();
        prefix.sort();
        out.push((Record::pair(key.clone(), reducer(&prefix)), weight));
    }
    out
}

/// `GroupBy` with key selector `key` and result selector `reducer`.
///
/// Output records are `(key, reducer(prefix))` pairs.
pub fn group_by<K, R>(a: &WeightedDataset, key: K, reducer: R) -> WeightedDataset
where
    K: Fn(&Record) -> Record,
    R: Fn(&[Record]) -> Record + Sync + Send,
{
    let parts = partition(a, &key);
    let parts: Vec<(Record, Vec<(Record, f64)>)> = parts.into_iter().collect();
    let outputs = parallel::map(&parts, |(k, part)| group_outputs(k, part, &reducer));
    outputs.into_iter().flatten().collect()
}

/// Shave outputs for one record of weight `weight`.
pub fn shave_outputs(record: &Record, weight: f64, schedule: &ShaveSchedule) -> Vec<(Record, f64)> {
    shave_outputs_from(record, weight, schedule, 0)
}

/// Shave outputs with index at least `start`.
pub(crate) fn shave_outputs_from(
    record: &Record,
    weight: f64,
    schedule: &ShaveSchedule,
    start: u64,
) -> Vec<(Record, f64)> {
    let mut out = Vec::new();
    if weight <= WEIGHT_EPSILON {
        return out;
    }
    match schedule {
        ShaveSchedule::Constant(width) => {
            let width = *width;
            assert!(width > 0.0, "constant shave width must be positive");
            let mut index = start;
            loop {
                let remaining = weight - index as f64 * width;
                if remaining <= WEIGHT_EPSILON {
                    break;
                }
                out.push((Record::indexed(record.clone(), index), width.min(remaining)));
                index += 1;
            }
        }
        ShaveSchedule::PerRecord(f) => {
            let mut consumed = 0.0;
            for (index, term) in f(record).enumerate() {
                let remaining = weight - consumed;
                if remaining <= WEIGHT_EPSILON {
                    break;
                }
                let value = term.min(remaining).max(0.0);
                if index as u64 >= start && value > WEIGHT_EPSILON {
                    out.push((Record::indexed(record.clone(), index as u64), value));
                }
                consumed += term;
            }
        }
    }
    out
}

/// `Shave`: splits each record into indexed records following `schedule`.
pub fn shave(a: &WeightedDataset, schedule: &ShaveSchedule) -> WeightedDataset {
    a.iter().flat_map(|(r, w)| shave_outputs(r, w, schedule)).collect()
}

/// Join outputs for one key: `A_k × B_kᵀ / (‖A_k‖ + ‖B_k‖)`.
pub fn join_part<C>(a_k: &[(Record, f64)], b_k: &[(Record, f64)], result: C) -> Vec<(Record, f64)>
where
    C: Fn(&Record, &Record) -> Record,
{
    if a_k.is_empty() || b_k.is_empty() {
        return Vec::new();
    }
    let denominator: f64 =
        a_k.iter().map(|(_, w)| w.abs()).sum::<f64>() + b_k.iter().map(|(_, w)| w.abs()).sum::<f64>();
    let mut out = Vec::with_capacity(a_k.len() * b_k.len());
    for (x, wx) in a_k {
        for (y, wy) in b_k {
            out.push((result(x, y), wx * wy / denominator));
        }
    }
    out
}

/// `Join` of `a` and `b` on `key_a` / `key_b`, combining matches with `result`.
pub fn join<KA, KB, C>(a: &WeightedDataset, b: &WeightedDataset, key_a: KA, key_b: KB, result: C) -> WeightedDataset
where
    KA: Fn(&Record) -> Record,
    KB: Fn(&Record) -> Record,
    C: Fn(&Record, &Record) -> Record + Sync + Send,
{
    let left = partition(a, &key_a);
    let mut right = partition(b, &key_b);
    let matched: Vec<(Part, Part)> = left
        .into_iter()
        .filter_map(|(k, a_k)| right.remove(&k).map(|b_k| (a_k, b_k)))
        .collect();
    let outputs = parallel::map(&matched, |(a_k, b_k)| join_part(a_k, b_k, &result));
    outputs.into_iter().flatten().collect()
}

/// `Union`: pointwise maximum.
pub fn union(a: &WeightedDataset, b: &WeightedDataset) -> WeightedDataset {
    pointwise(a, b, f64::max)
}

/// `Intersect`: pointwise minimum.
pub fn intersect(a: &WeightedDataset, b: &WeightedDataset) -> WeightedDataset {
    pointwise(a, b, f64::min)
}

/// `Concat`: pointwise sum.
pub fn concat(a: &WeightedDataset, b: &WeightedDataset) -> WeightedDataset {
    pointwise(a, b, |x, y| x + y)
}

/// `Except`: pointwise difference; may produce negative weights.
pub fn except(a: &WeightedDataset, b: &WeightedDataset) -> WeightedDataset {
    pointwise(a, b, |x, y| x - y)
}

fn pointwise(a: &WeightedDataset, b: &WeightedDataset, op: impl Fn(f64, f64) -> f64) -> WeightedDataset {
    let mut records: Vec<&Record> = a.records().chain(b.records()).collect();
    records.sort();
    records.dedup();
    records
        .into_iter()
        .map(|r| (r.clone(), op(a.weight_of(r), b.weight_of(r))))
        .collect()
}

fn partition<K>(a: &WeightedDataset, key: K) -> BTreeMap<Record, Vec<(Record, f64)>>
where
    K: Fn(&Record) -> Record,
{
    let mut parts: BTreeMap<Record, Vec<(Record, f64)>> = BTreeMap::new();
    for (r, w) in a.iter() {
        parts.entry(key(r)).or_default().push((r.clone(), w));
    }
    parts
}

/// Sorts and merges duplicate records, dropping exact zeros.
pub(crate) fn consolidate(list: &mut Vec<(Record, f64)>) {
    if list.len() <= 1 {
        list.retain(|x| x.1 != 0.0);
        return;
    }
    list.sort_by(|x, y| x.0.cmp(&y.0));
    let mut write = 0;
    for read in 0..list.len() {
        if write > 0 && list[write - 1].0 == list[read].0 {
            list[write - 1].1 += list[read].1;
        } else {
            list.swap(write, read);
            write += 1;
        }
    }
    list.truncate(write);
    list.retain(|x| x.1 != 0.0);
}

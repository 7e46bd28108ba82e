//! Weighted datasets and signed deltas.

use std::collections::btree_map::{self, BTreeMap};

use crate::error::{Error, Result};
use crate::record::Record;

/// Stored weights with magnitude at or below this are treated as zero and removed.
pub const WEIGHT_EPSILON: f64 = 1e-12;

/// A map from records to nonzero real weights.
///
/// Iteration is in canonical record order. Entries whose magnitude is at most
/// [`WEIGHT_EPSILON`] are never stored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightedDataset {
    entries: BTreeMap<Record, f64>,
}

impl WeightedDataset {
    pub fn new() -> Self {
        Self::default()
    }

    /// Weight of `record`, zero when absent.
    pub fn weight_of(&self, record: &Record) -> f64 {
        self.entries.get(record).copied().unwrap_or(0.0)
    }

    /// Adds `weight` to `record`, pruning the entry if it cancels to zero.
    pub fn add(&mut self, record: Record, weight: f64) {
        if weight == 0.0 {
            return;
        }
        match self.entries.entry(record) {
            btree_map::Entry::Vacant(slot) => {
                if weight.abs() > WEIGHT_EPSILON {
                    slot.insert(weight);
                }
            }
            btree_map::Entry::Occupied(mut slot) => {
                let updated = *slot.get() + weight;
                if updated.abs() > WEIGHT_EPSILON {
                    *slot.get_mut() = updated;
                } else {
                    slot.remove();
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Record, f64)> + '_ {
        self.entries.iter().map(|(r, w)| (r, *w))
    }

    pub fn records(&self) -> impl Iterator<Item = &Record> + '_ {
        self.entries.keys()
    }

    /// `‖A‖`, the sum of absolute weights.
    pub fn size_norm(&self) -> f64 {
        self.entries.values().map(|w| w.abs()).sum()
    }

    /// Multiplies every weight by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        self.iter().map(|(r, w)| (r.clone(), w * factor)).collect()
    }

    /// Checked application of a delta; the result carries no near-zero entries.
    pub fn apply_delta(&self, delta: &DeltaBatch) -> Result<Self> {
        let mut out = self.clone();
        for (record, change) in delta.iter() {
            let updated = out.weight_of(record) + change;
            if !updated.is_finite() {
                return Err(Error::NonFiniteWeight {
                    record: record.encode(),
                    value: updated,
                });
            }
            out.add(record.clone(), change);
        }
        Ok(out)
    }

    /// The delta that turns `self` into `target`.
    pub fn delta_to(&self, target: &WeightedDataset) -> DeltaBatch {
        let mut delta = DeltaBatch::new();
        for (r, w) in target.iter() {
            delta.add(r.clone(), w);
        }
        for (r, w) in self.iter() {
            delta.add(r.clone(), -w);
        }
        delta
    }

    /// Largest absolute per-record difference, a convenience for tolerance checks.
    pub fn max_abs_difference(&self, other: &WeightedDataset) -> f64 {
        let mut worst: f64 = 0.0;
        for (r, w) in self.iter() {
            worst = worst.max((w - other.weight_of(r)).abs());
        }
        for (r, w) in other.iter() {
            if !self.entries.contains_key(r) {
                worst = worst.max(w.abs());
            }
        }
        worst
    }
}

/// `Σ_x |a(x) − b(x)|`.
pub fn difference_norm(a: &WeightedDataset, b: &WeightedDataset) -> f64 {
    let mut total = 0.0;
    let mut left = a.entries.iter().peekable();
    let mut right = b.entries.iter().peekable();
    loop {
        match (left.peek(), right.peek()) {
            (Some((ra, wa)), Some((rb, wb))) => match ra.cmp(rb) {
                std::cmp::Ordering::Less => {
                    total += wa.abs();
                    left.next();
                }
                std::cmp::Ordering::Greater => {
                    total += wb.abs();
                    right.next();
                }
                std::cmp::Ordering::Equal => {
                    total += (*wa - *wb).abs();
                    left.next();
                    right.next();
                }
            },
            (Some((_, wa)), None) => {
                total += wa.abs();
                left.next();
            }
            (None, Some((_, wb))) => {
                total += wb.abs();
                right.next();
            }
            (None, None) => return total,
        }
    }
}

impl FromIterator<(Record, f64)> for WeightedDataset {
    fn from_iter<I: IntoIterator<Item = (Record, f64)>>(iter: I) -> Self {
        let mut out = WeightedDataset::new();
        for (r, w) in iter {
            out.add(r, w);
        }
        out
    }
}

impl Extend<(Record, f64)> for WeightedDataset {
    fn extend<I: IntoIterator<Item = (Record, f64)>>(&mut self, iter: I) {
        for (r, w) in iter {
            self.add(r, w);
        }
    }
}

impl<'a> IntoIterator for &'a WeightedDataset {
    type Item = (&'a Record, &'a f64);
    type IntoIter = btree_map::Iter<'a, Record, f64>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}

/// Signed weight changes to one dataset.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DeltaBatch {
    changes: BTreeMap<Record, f64>,
}

impl DeltaBatch {
    pub fn new() -> Self {
        Self::default()
    }

    /// Accumulates `change` into the entry for `record`; exact cancellations are dropped.
    pub fn add(&mut self, record: Record, change: f64) {
        if change == 0.0 {
            return;
        }
        match self.changes.entry(record) {
            btree_map::Entry::Vacant(slot) => {
                slot.insert(change);
            }
            btree_map::Entry::Occupied(mut slot) => {
                *slot.get_mut() += change;
                if *slot.get() == 0.0 {
                    slot.remove();
                }
            }
        }
    }

    pub fn negated(&self) -> Self {
        DeltaBatch {
            changes: self.changes.iter().map(|(r, w)| (r.clone(), -w)).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Record, f64)> + '_ {
        self.changes.iter().map(|(r, w)| (r, *w))
    }

    pub fn len(&self) -> usize {
        self.changes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.changes.is_empty()
    }

    pub fn into_vec(self) -> Vec<(Record, f64)> {
        self.changes.into_iter().collect()
    }
}

impl FromIterator<(Record, f64)> for DeltaBatch {
    fn from_iter<I: IntoIterator<Item = (Record, f64)>>(iter: I) -> Self {
        let mut out = DeltaBatch::new();
        for (r, w) in iter {
            out.add(r, w);
        }
        out
    }
}

impl From<&WeightedDataset> for DeltaBatch {
    fn from(dataset: &WeightedDataset) -> Self {
        dataset.iter().map(|(r, w)| (r.clone(), w)).collect()
    }
}

//! Noisy counts with memoized noise for records absent from the measured dataset.

use std::collections::BTreeMap;
use std::hash::Hasher;
use std::io::{BufRead, Write};
use std::sync::Mutex;

use fnv::FnvHasher;
use rand::distributions::{Distribution, Open01};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::noise::{laplace_from_uniform, NoiseSource};
use crate::dataset::WeightedDataset;
use crate::error::{Error, Result};
use crate::record::Record;

/// The released result of one `NoisyCount`.
///
/// Records present in the measured dataset are noised eagerly, in canonical
/// order, from the caller's noise source. Any other record receives fresh
/// Laplace noise on first lookup; that value is recorded and returned for
/// every later lookup. The lazy noise for a record is drawn from a stream
/// keyed by the measurement's seed and the record's encoding, so the value
/// does not depend on the order of lookups.
#[derive(Debug)]
pub struct Measurement {
    query_id: String,
    epsilon: f64,
    seed: u64,
    zero_noise: bool,
    observed: BTreeMap<Record, f64>,
    memo: Mutex<BTreeMap<Record, f64>>,
}

impl Clone for Measurement {
    fn clone(&self) -> Self {
        Measurement {
            query_id: self.query_id.clone(),
            epsilon: self.epsilon,
            seed: self.seed,
            zero_noise: self.zero_noise,
            observed: self.observed.clone(),
            memo: Mutex::new(self.memo.lock().unwrap().clone()),
        }
    }
}

/// `NoisyCount(dataset, ε)`.
///
/// Budget must already have been charged; this function only draws noise.
pub fn noisy_count(
    query_id: &str,
    dataset: &WeightedDataset,
    epsilon: f64,
    src: &mut NoiseSource,
) -> Result<Measurement> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    let scale = 1.0 / epsilon;
    let mut observed = BTreeMap::new();
    for (record, weight) in dataset.iter() {
        observed.insert(record.clone(), weight + src.laplace(scale)?);
    }
    Ok(Measurement {
        query_id: query_id.to_string(),
        epsilon,
        seed: src.next_seed(),
        zero_noise: src.is_zero(),
        observed,
        memo: Mutex::new(BTreeMap::new()),
    })
}

impl Measurement {
    pub fn query_id(&self) -> &str {
        &self.query_id
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Seed of the per-record lazy noise streams.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_zero_noise(&self) -> bool {
        self.zero_noise
    }

    /// The noisy count for `record`, drawing and memoizing noise when needed.
    pub fn lookup(&self, record: &Record) -> f64 {
        self.lookup_tracked(record).0
    }

    /// Like [`lookup`](Self::lookup); the flag reports whether this call drew fresh noise.
    pub fn lookup_tracked(&self, record: &Record) -> (f64, bool) {
        if let Some(value) = self.observed.get(record) {
            return (*value, false);
        }
        let mut memo = self.memo.lock().unwrap();
        if let Some(value) = memo.get(record) {
            return (*value, false);
        }
        let value = self.fresh_noise(record);
        memo.insert(record.clone(), value);
        (value, true)
    }

    /// The value for `record` if one has already been released.
    pub fn peek(&self, record: &Record) -> Option<f64> {
        self.observed
            .get(record)
            .copied()
            .or_else(|| self.memo.lock().unwrap().get(record).copied())
    }

    /// Every released (record, value) pair, in canonical order.
    pub fn released(&self) -> Vec<(Record, f64)> {
        let memo = self.memo.lock().unwrap();
        let mut all: BTreeMap<Record, f64> = self.observed.clone();
        all.extend(memo.iter().map(|(r, v)| (r.clone(), *v)));
        all.into_iter().collect()
    }

    pub fn released_count(&self) -> usize {
        self.observed.len() + self.memo.lock().unwrap().len()
    }

    fn fresh_noise(&self, record: &Record) -> f64 {
        if self.zero_noise {
            return 0.0;
        }
        let mut hasher = FnvHasher::default();
        hasher.write(record.encode().as_bytes());
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(hasher.finish());
        let u: f64 = Open01.sample(&mut rng);
        laplace_from_uniform(1.0 / self.epsilon, u)
    }

    /// Writes the measurement as a header followed by `<record> TAB <value>` lines.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# query_id {}", self.query_id)?;
        writeln!(out, "# epsilon {:.16e}", self.epsilon)?;
        writeln!(out, "# seed {}", self.seed)?;
        writeln!(out, "# noise {}", if self.zero_noise { "zero" } else { "laplace" })?;
        for (record, value) in self.released() {
            writeln!(out, "{}\t{:.16e}", record, value)?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Self> {
        let mut query_id = None;
        let mut epsilon = None;
        let mut seed = None;
        let mut zero_noise = false;
        let mut observed = BTreeMap::new();
        for (number, line) in input.lines().enumerate() {
            let line = line?;
            let bad = |what: &str| Error::Parse(format!("measurement line {}: {what}", number + 1));
            if let Some(header) = line.strip_prefix("# ") {
                let (key, value) = header.split_once(' ').ok_or_else(|| bad("malformed header"))?;
                match key {
                    "query_id" => query_id = Some(value.to_string()),
                    "epsilon" => epsilon = Some(value.parse::<f64>().map_err(|_| bad("bad epsilon"))?),
                    "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad("bad seed"))?),
                    "noise" => zero_noise = value == "zero",
                    _ => {}
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let (record, value) = line.rsplit_once('\t').ok_or_else(|| bad("expected record<TAB>value"))?;
            let record: Record = record.parse()?;
            let value: f64 = value.parse().map_err(|_| bad("bad value"))?;
            observed.insert(record, value);
        }
        let epsilon = epsilon.ok_or_else(|| Error::Parse("measurement missing epsilon".into()))?;
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        Ok(Measurement {
            query_id: query_id.ok_or_else(|| Error::Parse("measurement missing query_id".into()))?,
            epsilon,
            seed: seed.ok_or_else(|| Error::Parse("measurement missing seed".into()))?,
            zero_noise,
            observed,
            memo: Mutex::new(BTreeMap::new()),
        })
    }
}

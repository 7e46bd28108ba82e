//! Sampled statistics along an MCMC run.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graphlib::assortativity;
use crate::graphlib::stats::triangle_count;

use super::mcmc::SyntheticState;

pub const TRACE_HEADER: &str = "step,discrepancy,triangles,assortativity";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub step: u64,
    pub discrepancy: f64,
    pub triangles: u64,
    pub assortativity: f64,
}

/// Append-only, step-monotone series of [`TraceRow`]s.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FitTrace {
    rows: Vec<TraceRow>,
}

impl FitTrace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a row; panics if `row.step` goes backwards.
    pub fn push(&mut self, row: TraceRow) {
        if let Some(last) = self.rows.last() {
            assert!(row.step >= last.step, "trace steps must not decrease");
            if row.step == last.step {
                return;
            }
        }
        self.rows.push(row);
    }

    pub fn sample(&mut self, step: u64, state: &SyntheticState) {
        self.push(TraceRow {
            step,
            discrepancy: state.discrepancy(),
            triangles: triangle_count(state.graph()),
            assortativity: assortativity(state.graph()).r,
        });
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    /// Comma-separated text with a header line; reals carry 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{TRACE_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{:.16e},{},{:.16e}",
                r.step, r.discrepancy, r.triangles, r.assortativity
            )?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == TRACE_HEADER => {}
            _ => return Err(Error::Parse("trace: missing header".into())),
        }
        let mut trace = FitTrace::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            let bad = || Error::Parse(format!("trace: bad row {line:?}"));
            if f.len() != 4 {
                return Err(bad());
            }
            trace.push(TraceRow {
                step: f[0].parse().map_err(|_| bad())?,
                discrepancy: f[1].parse().map_err(|_| bad())?,
                triangles: f[2].parse().map_err(|_| bad())?,
                assortativity: f[3].parse().map_err(|_| bad())?,
            });
        }
        Ok(trace)
    }
}

//! Per-input privacy budget accounting under sequential composition.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::plan::QueryPlan;

/// Slack for comparing accumulated floating-point spend against a cap.
///
/// Charges are sums of products such as `9 × 0.1`, which are not exact in
/// binary64; without slack a cap of 1.2 would refuse a 0.3 + 0.9 analysis.
pub const BUDGET_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BudgetAccount {
    inputs: BTreeMap<String, Ledger>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Ledger {
    pub cap: f64,
    pub spent: f64,
}

impl BudgetAccount {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers `input` as protected with total budget `cap`.
    pub fn register(&mut self, input: &str, cap: f64) -> Result<()> {
        if !(cap >= 0.0 && cap.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "budget cap must be finite and nonnegative, got {cap}"
            )));
        }
        self.inputs.insert(input.to_string(), Ledger { cap, spent: 0.0 });
        Ok(())
    }

    /// Restores a ledger entry, e.g. one read back from disk.
    pub fn restore(&mut self, input: &str, ledger: Ledger) {
        self.inputs.insert(input.to_string(), ledger);
    }

    pub fn ledger(&self, input: &str) -> Option<Ledger> {
        self.inputs.get(input).copied()
    }

    pub fn spent(&self, input: &str) -> Result<f64> {
        self.ledger(input)
            .map(|l| l.spent)
            .ok_or_else(|| Error::UnknownInput(input.to_string()))
    }

    pub fn remaining(&self, input: &str) -> Result<f64> {
        self.ledger(input)
            .map(|l| (l.cap - l.spent).max(0.0))
            .ok_or_else(|| Error::UnknownInput(input.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Ledger)> + '_ {
        self.inputs.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Charges `uses × epsilon` to each listed input, all or nothing.
    pub fn charge_uses(&mut self, uses: &[(&str, u64)], epsilon: f64) -> Result<()> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        for &(input, count) in uses {
            let ledger = self
                .inputs
                .get(input)
                .ok_or_else(|| Error::UnknownInput(input.to_string()))?;
            let charge = count as f64 * epsilon;
            if ledger.spent + charge > ledger.cap + BUDGET_TOLERANCE {
                return Err(Error::BudgetExceeded {
                    input: input.to_string(),
                    spent: ledger.spent,
                    charge,
                    cap: ledger.cap,
                });
            }
        }
        for &(input, count) in uses {
            if let Some(ledger) = self.inputs.get_mut(input) {
                ledger.spent += count as f64 * epsilon;
            }
        }
        Ok(())
    }

    /// Cost of measuring `output` of `plan` at `epsilon`, per protected input it reads.
    pub fn cost(&self, plan: &QueryPlan, output: &str, epsilon: f64) -> Result<Vec<(String, f64)>> {
        plan.declared_inputs()
            .iter()
            .map(|input| Ok((input.clone(), plan.uses(output, input)? as f64 * epsilon)))
            .filter(|c| !matches!(c, Ok((_, cost)) if *cost == 0.0))
            .collect()
    }

    /// Charges the measurement of `output` at `epsilon` against every input the plan reads.
    pub fn charge(&mut self, plan: &QueryPlan, output: &str, epsilon: f64) -> Result<()> {
        let mut uses = Vec::new();
        for input in plan.declared_inputs() {
            let count = plan.uses(output, input)?;
            if count > 0 {
                uses.push((input.as_str(), count));
            }
        }
        self.charge_uses(&uses, epsilon)
    }
}

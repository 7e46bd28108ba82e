//! Budget ledger persisted next to a protected edge list.
//!
//! ```text
//! cap 1.0000000000000000e0
//! spent 3.0000000000000004e-1
//! charge 3.0000000000000004e-1 degseq,ccdf,nodecount
//! ```
//!
//! `cap` and `spent` are authoritative; `charge` lines are an append-only history.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use wpinq::privacy::Ledger;

#[derive(Clone, Debug, PartialEq)]
pub struct LedgerFile {
    pub path: PathBuf,
    pub ledger: Ledger,
    history: Vec<String>,
}

/// `graph.txt` → `graph.txt.budget`.
pub fn ledger_path(input: &Path) -> PathBuf {
    let mut name = input.as_os_str().to_owned();
    name.push(".budget");
    PathBuf::from(name)
}

impl LedgerFile {
    /// Loads the ledger for `input`, creating it with `cap` if it does not exist yet.
    pub fn open(input: &Path, cap: Option<f64>) -> Result<Self> {
        let path = ledger_path(input);
        if !path.exists() {
            let cap = cap.context("no budget ledger exists for this input yet; pass --budget to create one")?;
            if !(cap >= 0.0 && cap.is_finite()) {
                bail!("budget cap must be finite and nonnegative, got {cap}");
            }
            return Ok(LedgerFile {
                path,
                ledger: Ledger { cap, spent: 0.0 },
                history: Vec::new(),
            });
        }
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let (mut stored_cap, mut spent, mut history) = (None, None, Vec::new());
        for (number, line) in text.lines().enumerate() {
            let (key, value) = line.split_once(' ').unwrap_or((line, ""));
            let number_at = |v: &str| {
                v.parse::<f64>()
                    .with_context(|| format!("{} line {}: bad number {v:?}", path.display(), number + 1))
            };
            match key {
                "cap" => stored_cap = Some(number_at(value)?),
                "spent" => spent = Some(number_at(value)?),
                "charge" => history.push(value.to_string()),
                "" => {}
                other => bail!("{} line {}: unknown key {other:?}", path.display(), number + 1),
            }
        }
        let stored_cap = stored_cap.with_context(|| format!("{} has no cap line", path.display()))?;
        let spent = spent.with_context(|| format!("{} has no spent line", path.display()))?;
        if let Some(cap) = cap {
            if cap != stored_cap {
                log::warn!(
                    "ignoring --budget {cap}: {} already records cap {stored_cap}",
                    path.display()
                );
            }
        }
        Ok(LedgerFile {
            path,
            ledger: Ledger { cap: stored_cap, spent },
            history,
        })
    }

    /// Records a completed charge and rewrites the file.
    pub fn commit(&mut self, ledger: Ledger, cost: f64, what: &str) -> Result<()> {
        self.ledger = ledger;
        self.history.push(format!("{cost:.16e} {what}"));
        let mut text = format!("cap {:.16e}\nspent {:.16e}\n", ledger.cap, ledger.spent);
        for h in &self.history {
            text.push_str(&format!("charge {h}\n"));
        }
        fs::write(&self.path, text).with_context(|| format!("writing {}", self.path.display()))
    }
}

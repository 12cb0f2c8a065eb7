use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::pricing::{
    procedural_unfairness, revenue_under, substantive_unfairness_under, AcceptanceModel,
    PolicyPair, PriceGrid,
};

/// Slack used when testing ledger constraints and procedural fairness.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Constraints recorded at the end of one epoch:
/// `S(π, F̂) ≤ delta_s` and `R(π, F̂) ≥ revenue_floor`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LedgerEntry {
    pub epoch_index: usize,
    pub fhat: AcceptanceModel,
    pub delta_s: f64,
    /// `R(π̂_k, F̂) − δ_r − L·δ_s`, clipped below at −1 (revenue is never
    /// negative, so the clip does not change the constraint).
    pub revenue_floor: f64,
}

impl LedgerEntry {
    pub fn new(epoch_index: usize, fhat: AcceptanceModel, delta_s: f64, revenue_floor: f64) -> Result<Self> {
        if !(delta_s > 0.0 && delta_s.is_finite()) {
            return Err(Error::Domain("ledger unfairness radius must be positive"));
        }
        if revenue_floor.is_nan() {
            return Err(Error::Domain("ledger revenue floor is NaN"));
        }
        let revenue_floor = revenue_floor.clamp(-1.0, 1.0);
        Ok(LedgerEntry { epoch_index, fhat, delta_s, revenue_floor })
    }

    /// Whether `policy` survives this entry's two constraints.
    pub fn admits(&self, policy: &PolicyPair, q: f64, grid: &PriceGrid) -> Result<bool> {
        let s = substantive_unfairness_under(policy, &self.fhat, grid)?;
        if s > self.delta_s + MEMBERSHIP_TOL {
            return Ok(false);
        }
        let r = revenue_under(policy, &self.fhat, q, grid)?;
        Ok(r >= self.revenue_floor - MEMBERSHIP_TOL)
    }
}

/// The accumulated elimination constraints. An empty ledger stands for every
/// procedurally fair policy; each entry shrinks the candidate set.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EliminationLedger {
    q: f64,
    entries: Vec<LedgerEntry>,
}

impl EliminationLedger {
    /// `q` is the (known) Group 1 share used when evaluating revenue floors.
    pub fn new(q: f64) -> Self {
        EliminationLedger { q, entries: Vec::new() }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last(&self) -> Option<&LedgerEntry> {
        self.entries.last()
    }

    pub fn push(&mut self, entry: LedgerEntry) -> Result<()> {
        if let Some(last) = self.entries.last() {
            if entry.epoch_index <= last.epoch_index {
                return Err(Error::Protocol("ledger epochs must be strictly increasing"));
            }
        }
        self.entries.push(entry);
        Ok(())
    }

    /// A ledger holding only the first `n` entries.
    pub fn prefix(&self, n: usize) -> EliminationLedger {
        EliminationLedger { q: self.q, entries: self.entries[..n.min(self.entries.len())].to_vec() }
    }
}

/// Whether a procedurally fair `policy` survives every ledger entry.
pub fn member(policy: &PolicyPair, ledger: &EliminationLedger, grid: &PriceGrid) -> Result<bool> {
    let u = procedural_unfairness(policy, grid)?;
    if u > MEMBERSHIP_TOL {
        return Err(Error::NotProcedurallyFair(u));
    }
    for entry in &ledger.entries {
        if !entry.admits(policy, ledger.q, grid)? {
            return Ok(false);
        }
    }
    Ok(true)
}

//! Doubly-fair dynamic pricing.
//!
//! A seller offers one item to customers from two groups, proposing a price
//! drawn from a per-group distribution over a fixed price grid. A policy is
//! *procedurally fair* when both groups see the same expected proposed price,
//! and *substantively fair* when both groups pay the same expected accepted
//! price. This crate provides:
//!
//! - [`pricing`]: the domain types and exact revenue / unfairness / regret metrics,
//! - [`linalg`]: a dense linear solver and a small two-phase simplex LP kernel,
//! - [`oracle`]: offline solvers for the fair-optimal policy, its relaxations, and
//!   the elimination ledger used by the online learner,
//! - [`fpa`]: the online fairly-pricing agent with doubling epochs and policy
//!   elimination,
//! - [`sim`]: a seeded market simulator, preset environments and baseline agents.
//!
//! The crate is `no_std` (it needs `alloc`). IO, configuration and the command
//! line live in the `fairprice` companion crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod fpa;
pub mod linalg;
pub mod oracle;
pub mod pricing;
pub mod sim;

mod math;

pub use error::Error;
pub use pricing::{AcceptanceModel, GroupDistribution, MarketConfig, PolicyPair, PriceGrid};

/// Customer group attribution. Group 1 arrives with probability `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Group {
    One,
    Two,
}

impl Group {
    pub const BOTH: [Group; 2] = [Group::One, Group::Two];

    /// Zero-based slot used by per-group arrays.
    pub fn slot(self) -> usize {
        match self {
            Group::One => 0,
            Group::Two => 1,
        }
    }

    /// The 1-based label used in reports (`1` or `2`).
    pub fn label(self) -> u8 {
        match self {
            Group::One => 1,
            Group::Two => 2,
        }
    }
}

//! Work limit for exhaustive searches, read from `PROCOH_BUDGET`.

use crate::error::{Error, Result};

pub const DEFAULT_BUDGET: u64 = 20_000_000;

#[derive(Clone, Debug)]
pub struct Budget {
    remaining: u64,
    limit: u64,
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Budget { remaining: limit, limit }
    }

    /// Uses `PROCOH_BUDGET` when it parses as an integer.
    pub fn from_env() -> Self {
        let limit = std::env::var("PROCOH_BUDGET").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_BUDGET);
        Budget::new(limit)
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn remaining(&self) -> u64 {
        self.remaining
    }

    pub fn spend(&mut self, units: u64, what: &str) -> Result<()> {
        if units > self.remaining {
            self.remaining = 0;
            return Err(Error::Budget(format!("{what} exceeded the budget of {}", self.limit)));
        }
        self.remaining -= units;
        Ok(())
    }
}

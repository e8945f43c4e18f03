//! Hourly request budget, persisted next to the cache so repeated runs
//! share one allowance.

use std::fs;
use std::path::PathBuf;
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
struct BudgetState {
    window_start: u64,
    used: u32,
}

#[derive(Debug)]
pub struct RateLimiter {
    budget_per_hour: u32,
    state_path: PathBuf,
    state: Mutex<BudgetState>,
    clock: fn() -> u64,
}

#[derive(Debug, thiserror::Error)]
#[error("rate budget of {budget} requests/hour exhausted; window resets at epoch {resets_at}")]
pub struct BudgetExhausted {
    pub budget: u32,
    pub resets_at: u64,
}

fn wall_clock() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl RateLimiter {
    pub fn new(budget_per_hour: u32, state_path: PathBuf) -> RateLimiter {
        Self::with_clock(budget_per_hour, state_path, wall_clock)
    }

    pub fn with_clock(budget_per_hour: u32, state_path: PathBuf, clock: fn() -> u64) -> RateLimiter {
        let state = fs::read_to_string(&state_path)
            .ok()
            .and_then(|t| serde_json::from_str(&t).ok())
            .unwrap_or_default();
        RateLimiter {
            budget_per_hour,
            state_path,
            state: Mutex::new(state),
            clock,
        }
    }

    /// Takes one request from the budget or reports when it refills.
    pub fn acquire(&self) -> Result<(), BudgetExhausted> {
        let now = (self.clock)();
        let window = now - now % 3600;
        let mut state = self.state.lock().expect("rate limiter lock");
        if state.window_start != window {
            *state = BudgetState {
                window_start: window,
                used: 0,
            };
        }
        if state.used >= self.budget_per_hour {
            return Err(BudgetExhausted {
                budget: self.budget_per_hour,
                resets_at: window + 3600,
            });
        }
        state.used += 1;
        // best effort; a lost write only makes the budget stricter than needed
        let _ = fs::write(
            &self.state_path,
            serde_json::to_string(&*state).expect("state serializes"),
        );
        Ok(())
    }
}

//! Time and node budgets shared by the exhaustive searches.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::{Duration, Instant};

/// A search budget. Cheap to poll from many threads.
#[derive(Debug)]
pub struct Budget {
    deadline: Option<Instant>,
    max_nodes: Option<u64>,
    nodes: AtomicU64,
    tripped: AtomicBool,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget { deadline: None, max_nodes: None, nodes: AtomicU64::new(0), tripped: AtomicBool::new(false) }
    }

    pub fn with_time(limit: Duration) -> Self {
        Budget { deadline: Some(Instant::now() + limit), ..Self::unlimited() }
    }

    pub fn with_seconds(seconds: f64) -> Self {
        Self::with_time(Duration::from_secs_f64(seconds.max(0.0)))
    }

    pub fn with_nodes(max_nodes: u64) -> Self {
        Budget { max_nodes: Some(max_nodes), ..Self::unlimited() }
    }

    /// Count one search node. Returns `false` once the budget is spent.
    pub fn tick(&self) -> bool {
        if self.tripped.load(Ordering::Relaxed) {
            return false;
        }
        let n = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        let over_nodes = self.max_nodes.is_some_and(|m| n > m);
        // Reading the clock on every node is measurable; every 256th is enough.
        let over_time = n % 256 == 0 && self.deadline.is_some_and(|d| Instant::now() >= d);
        if over_nodes || over_time {
            self.tripped.store(true, Ordering::Relaxed);
            return false;
        }
        true
    }

    pub fn exhausted(&self) -> bool {
        self.tripped.load(Ordering::Relaxed)
    }

    pub fn nodes(&self) -> u64 {
        self.nodes.load(Ordering::Relaxed)
    }
}

impl Default for Budget {
    fn default() -> Self {
        Self::unlimited()
    }
}

//! Thread-local operation and storage accounting.
//!
//! Hot loops report multiply-add counts in bulk and every long-lived real
//! buffer (polynomial coefficients, node coordinates, dense matrices, solver
//! scratch) registers its length while alive. [`measure`] runs a closure
//! against fresh counters and returns what it used, which is how the solver's
//! `O(N^2)` arithmetic and `O(m N)` storage claims are checked.

use std::cell::Cell;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Counters {
    multiply_adds: u64,
    live: usize,
    peak: usize,
    largest_block: usize,
}

thread_local! {
    static COUNTERS: Cell<Counters> = const { Cell::new(Counters {
        multiply_adds: 0,
        live: 0,
        peak: 0,
        largest_block: 0,
    }) };
}

/// Resources consumed by one measured region.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct Usage {
    /// Counted multiply-add (or comparable floating point) operations.
    pub multiply_adds: u64,
    /// Largest number of tracked reals alive at once inside the region.
    pub peak_reals_stored: usize,
    /// Length of the largest single tracked buffer allocated inside the region.
    pub largest_block: usize,
}

/// Adds `count` multiply-adds to the current region.
#[inline]
pub fn count_ops(count: u64) {
    COUNTERS.with(|c| {
        let mut v = c.get();
        v.multiply_adds += count;
        c.set(v);
    });
}

fn track_alloc(len: usize) {
    COUNTERS.with(|c| {
        let mut v = c.get();
        v.live += len;
        v.peak = v.peak.max(v.live);
        v.largest_block = v.largest_block.max(len);
        c.set(v);
    });
}

fn track_free(len: usize) {
    COUNTERS.with(|c| {
        let mut v = c.get();
        v.live = v.live.saturating_sub(len);
        c.set(v);
    });
}

/// Registers `len` reals as live until dropped.
///
/// Containers embed one of these next to their storage; scratch buffers hold
/// one for the duration of their use.
#[derive(Debug)]
pub struct Reservation {
    len: usize,
}

impl Reservation {
    pub fn new(len: usize) -> Self {
        track_alloc(len);
        Reservation { len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

impl Clone for Reservation {
    fn clone(&self) -> Self {
        Reservation::new(self.len)
    }
}

impl Drop for Reservation {
    fn drop(&mut self) {
        track_free(self.len);
    }
}

/// Runs `f` with fresh counters and returns its result together with the
/// resources it consumed. Usage is folded back into any enclosing region.
pub fn measure<R>(f: impl FnOnce() -> R) -> (R, Usage) {
    let outer = COUNTERS.with(|c| c.replace(Counters::default()));
    let out = f();
    let inner = COUNTERS.with(|c| c.get());
    let merged = Counters {
        multiply_adds: outer.multiply_adds + inner.multiply_adds,
        live: outer.live + inner.live,
        peak: outer.peak.max(outer.live + inner.peak),
        largest_block: outer.largest_block.max(inner.largest_block),
    };
    COUNTERS.with(|c| c.set(merged));
    let usage =
        Usage { multiply_adds: inner.multiply_adds, peak_reals_stored: inner.peak, largest_block: inner.largest_block };
    (out, usage)
}

//! Single-threaded discrete-event core: a microsecond clock, an event queue
//! with a total (time, schedule-order) ordering, and the named random streams
//! every stochastic draw is routed through.

use rand_chacha::ChaCha12Rng;
use rand_chacha::rand_core::SeedableRng;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// A point in simulated time, in whole microseconds.
///
/// Integer time keeps event ordering and interval overlap checks exact; no
/// float comparison ever decides what happens next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub fn from_micros(us: u64) -> Self {
        SimTime(us)
    }

    /// Converts seconds to a time point, rounding to the nearest microsecond.
    pub fn from_secs_f64(secs: f64) -> Self {
        assert!(secs >= 0.0 && secs.is_finite(), "time must be finite and non-negative");
        SimTime((secs * 1e6).round() as u64)
    }

    pub fn micros(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 * 1e-6
    }

    pub fn plus_micros(self, us: u64) -> SimTime {
        SimTime(self.0 + us)
    }
}

impl std::fmt::Display for SimTime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.6}s", self.as_secs_f64())
    }
}

#[derive(Debug)]
struct Entry<P> {
    time: SimTime,
    seq: u64,
    payload: P,
}

impl<P> PartialEq for Entry<P> {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.seq == other.seq
    }
}

impl<P> Eq for Entry<P> {}

impl<P> PartialOrd for Entry<P> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<P> Ord for Entry<P> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.time, self.seq).cmp(&(other.time, other.seq))
    }
}

/// Pending events ordered by (time, schedule sequence number).
///
/// Two events at the same instant run in the order they were scheduled, which
/// makes every run with the same inputs replay identically.
#[derive(Debug)]
pub struct EventQueue<P> {
    heap: BinaryHeap<Reverse<Entry<P>>>,
    next_seq: u64,
    now: SimTime,
}

impl<P> EventQueue<P> {
    pub fn new() -> Self {
        EventQueue {
            heap: BinaryHeap::new(),
            next_seq: 0,
            now: SimTime::ZERO,
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Adds an event. Scheduling into the past is a bug in the caller, not a
    /// recoverable condition, and aborts the run.
    pub fn schedule(&mut self, at: SimTime, payload: P) {
        assert!(
            at >= self.now,
            "event scheduled in the past: {} < {}",
            at,
            self.now
        );
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(Entry { time: at, seq, payload }));
    }

    /// Pops the next event if it occurs at or before `until`, advancing the
    /// clock to its timestamp.
    pub fn pop_until(&mut self, until: SimTime) -> Option<(SimTime, P)> {
        let due = matches!(self.heap.peek(), Some(Reverse(e)) if e.time <= until);
        if !due {
            return None;
        }
        let Reverse(e) = self.heap.pop().unwrap();
        self.now = e.time;
        Some((e.time, e.payload))
    }

    /// Moves the clock forward to `at` once no more events are due, so a run
    /// always finishes exactly at its end time.
    pub fn finish_at(&mut self, at: SimTime) {
        if at > self.now {
            self.now = at;
        }
    }
}

impl<P> Default for EventQueue<P> {
    fn default() -> Self {
        EventQueue::new()
    }
}

/// The independent random streams a scenario seed fans out into. Keeping one
/// stream per concern means, for example, that enabling suppression draws
/// does not shift the topology or the transmission jitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamId {
    Topology = 1,
    Activity = 2,
    DataJitter = 3,
    AdJitter = 4,
    Suppression = 5,
    Coordination = 6,
    Fuzz = 7,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the generator for one named stream of a scenario seed.
pub fn stream_rng(seed: u64, stream: StreamId) -> ChaCha12Rng {
    let mixed = splitmix64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (stream as u64) << 32);
    ChaCha12Rng::seed_from_u64(mixed)
}

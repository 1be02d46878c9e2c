use std::collections::BTreeMap;
use std::sync::Mutex;

use chrono::{DateTime, Duration, Utc};

/// Source of the current instant. Implementations never go backwards.
pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

/// Manually advanced clock for simulation and tests.
#[derive(Debug)]
pub struct VirtualClock {
    now: Mutex<DateTime<Utc>>,
}

impl VirtualClock {
    pub fn new(start: DateTime<Utc>) -> Self {
        VirtualClock { now: Mutex::new(start) }
    }

    pub fn advance(&self, by: Duration) -> DateTime<Utc> {
        let mut now = self.now.lock().unwrap();
        if by > Duration::zero() {
            *now += by;
        }
        *now
    }

    /// Moves the clock forward to `instant`; earlier instants are ignored.
    pub fn advance_to(&self, instant: DateTime<Utc>) -> DateTime<Utc> {
        let mut now = self.now.lock().unwrap();
        if instant > *now {
            *now = instant;
        }
        *now
    }
}

impl Clock for VirtualClock {
    fn now(&self) -> DateTime<Utc> {
        *self.now.lock().unwrap()
    }
}

/// Wall clock, clamped so it never reports an earlier instant than before.
#[derive(Debug, Default)]
pub struct SystemClock {
    last: Mutex<Option<DateTime<Utc>>>,
}

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        let mut last = self.last.lock().unwrap();
        let t = match *last {
            Some(prev) => prev.max(Utc::now()),
            None => Utc::now(),
        };
        *last = Some(t);
        t
    }
}

/// Timers ordered by (instant, insertion order).
#[derive(Debug, Clone)]
pub struct TimerQueue<T> {
    timers: BTreeMap<(DateTime<Utc>, u64), T>,
    next: u64,
}

impl<T> Default for TimerQueue<T> {
    fn default() -> Self {
        TimerQueue {
            timers: BTreeMap::new(),
            next: 0,
        }
    }
}

impl<T> TimerQueue<T> {
    pub fn schedule(&mut self, at: DateTime<Utc>, timer: T) {
        self.timers.insert((at, self.next), timer);
        self.next += 1;
    }

    pub fn next_due(&self) -> Option<DateTime<Utc>> {
        self.timers.keys().next().map(|(at, _)| *at)
    }

    /// Removes and returns the earliest timer due at or before `now`.
    pub fn pop_due(&mut self, now: DateTime<Utc>) -> Option<(DateTime<Utc>, T)> {
        let key = *self.timers.keys().next()?;
        if key.0 > now {
            return None;
        }
        self.timers.remove(&key).map(|t| (key.0, t))
    }

    pub fn len(&self) -> usize {
        self.timers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timers.is_empty()
    }
}

//! OBSS occupancy as a renewal process.
//!
//! An undisturbed OBSS alternates geometric idle runs with fixed `d`-slot
//! busy periods; at every idle slot a busy period starts with probability
//! `q`. That schedule is generated independently of the BSS. When a busy
//! period falls due while the BSS holds the channel, the OBSS defers: its
//! airtime is queued and played out as soon as the BSS releases the
//! channel. Total OBSS airtime is therefore the same as in the undisturbed
//! schedule, so the long-run busy fraction stays at the calibrated target.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};

/// Per-idle-slot start probability giving long-run busy fraction `p` for
/// busy periods of `d` slots: `q = p / (d (1 - p) + p)`.
pub fn calibrate_obss(p: f64, d: u64) -> f64 {
    debug_assert!((0.0..1.0).contains(&p) && d >= 1);
    p / (d as f64 * (1.0 - p) + p)
}

#[derive(Debug, Clone)]
pub struct ObssProcess {
    q: f64,
    busy_slots: u64,
    /// Slot of the next scheduled busy-period start (`u64::MAX` if never).
    next_start: u64,
    /// First slot after the most recent scheduled busy period.
    free_from: u64,
    /// OBSS airtime owed to the channel, in slots.
    backlog: u64,
    rng: ChaCha8Rng,
}

impl ObssProcess {
    pub fn new(p: f64, busy_slots: u64, rng: ChaCha8Rng) -> Self {
        let mut proc = ObssProcess {
            q: 0.0,
            busy_slots: busy_slots.max(1),
            next_start: u64::MAX,
            free_from: 0,
            backlog: 0,
            rng,
        };
        proc.set_target(p, 0);
        proc
    }

    /// Retargets the long-run occupancy from slot `now` on. Busy periods
    /// already scheduled or owed are kept.
    pub fn set_target(&mut self, p: f64, now: u64) {
        self.q = calibrate_obss(p, self.busy_slots);
        let from = now.max(self.free_from);
        self.next_start = self.draw_start(from);
    }

    pub fn start_probability(&self) -> f64 {
        self.q
    }

    pub fn busy_period_slots(&self) -> u64 {
        self.busy_slots
    }

    fn draw_start(&mut self, from: u64) -> u64 {
        if self.q <= 0.0 {
            return u64::MAX;
        }
        if self.q >= 1.0 {
            return from;
        }
        let gap = Geometric::new(self.q)
            .expect("start probability in (0, 1)")
            .sample(&mut self.rng);
        from.saturating_add(gap)
    }

    /// Adds the airtime of every busy period scheduled at or before `now`.
    pub fn arrive(&mut self, now: u64) {
        while self.next_start <= now {
            let start = self.next_start;
            self.backlog += self.busy_slots;
            self.free_from = start + self.busy_slots;
            self.next_start = self.draw_start(self.free_from);
        }
    }

    pub fn backlog(&self) -> u64 {
        self.backlog
    }

    pub fn next_start(&self) -> u64 {
        self.next_start
    }

    /// Plays out `slots` of owed airtime.
    pub fn drain(&mut self, slots: u64) {
        debug_assert!(slots <= self.backlog);
        self.backlog -= slots;
    }

    /// Steps the undisturbed process one slot at a time and reports whether
    /// each slot is busy. Only for standalone calibration runs.
    pub fn step_free(&mut self, now: u64) -> bool {
        self.arrive(now);
        if self.backlog > 0 {
            self.backlog -= 1;
            true
        } else {
            false
        }
    }
}

/// Measures the busy fraction of an undisturbed process over `slots` slots.
pub fn measure_busy_fraction(p: f64, busy_slots: u64, slots: u64, rng: ChaCha8Rng) -> f64 {
    let mut proc = ObssProcess::new(p, busy_slots, rng);
    let mut busy = 0u64;
    let mut now = 0u64;
    while now < slots {
        proc.arrive(now);
        if proc.backlog > 0 {
            let run = proc.backlog.min(slots - now);
            busy += run;
            proc.drain(run);
            now += run;
        } else {
            // idle until the next scheduled start
            now = proc.next_start.min(slots);
        }
    }
    busy as f64 / slots as f64
}

//! Channel selection rules for NPCA and the occupancy-driven hybrid.

use std::collections::VecDeque;

use super::channel::{ChannelId, ChannelStatus};

/// Where an NPCA BSS should contend next.
///
/// Leaves for the secondary when OBSS holds the primary and the secondary is
/// free, and returns as soon as the primary is free again. Otherwise stays.
/// Backoff counters are untouched by any switch.
pub fn npca_switch_decision(
    primary: &ChannelStatus,
    secondary: &ChannelStatus,
    current: ChannelId,
) -> ChannelId {
    if primary.is_idle() {
        ChannelId::Primary
    } else if primary.is_obss_busy() && secondary.is_idle() {
        ChannelId::Secondary
    } else {
        current
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessMode {
    Legacy,
    Npca,
}

/// Busy/idle history of the primary over the trailing `k1` slots, kept as
/// run lengths so long busy or idle stretches cost O(1).
#[derive(Debug, Clone)]
pub struct OccupancyWindow {
    len: u64,
    runs: VecDeque<(bool, u64)>,
    covered: u64,
    busy: u64,
}

impl OccupancyWindow {
    pub fn new(k1: u64) -> Self {
        OccupancyWindow {
            len: k1.max(1),
            runs: VecDeque::new(),
            covered: 0,
            busy: 0,
        }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.covered == 0
    }

    pub fn busy_slots(&self) -> u64 {
        self.busy
    }

    /// Appends `slots` slots of the same state and drops what falls out of the window.
    pub fn push(&mut self, busy: bool, slots: u64) {
        if slots == 0 {
            return;
        }
        let slots = slots.min(self.len);
        match self.runs.back_mut() {
            Some((b, n)) if *b == busy => *n += slots,
            _ => self.runs.push_back((busy, slots)),
        }
        self.covered += slots;
        if busy {
            self.busy += slots;
        }
        let mut excess = self.covered.saturating_sub(self.len);
        while excess > 0 {
            let (b, n) = self.runs.front_mut().expect("covered > 0 implies a run");
            let cut = excess.min(*n);
            *n -= cut;
            if *b {
                self.busy -= cut;
            }
            self.covered -= cut;
            excess -= cut;
            if *n == 0 {
                self.runs.pop_front();
            }
        }
    }

    /// `busy / max(1, k1)` over the window. Before the window has filled,
    /// unseen slots count as idle.
    pub fn estimate(&self) -> f64 {
        self.busy as f64 / self.len as f64
    }
}

/// Picks NPCA when the windowed primary occupancy exceeds `thre1`, legacy otherwise.
pub fn hybrid_policy_decision(window: &OccupancyWindow, thre1: f64) -> AccessMode {
    if window.estimate() > thre1 {
        AccessMode::Npca
    } else {
        AccessMode::Legacy
    }
}

/// Slots that must pass before the hybrid decision can flip: the busy count
/// moves by at most one per slot.
pub(crate) fn slots_until_possible_flip(window: &OccupancyWindow, thre1: f64) -> u64 {
    let threshold = thre1 * window.len() as f64;
    let gap = (window.busy_slots() as f64 - threshold).abs();
    (gap.floor() as u64).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    const IDLE: ChannelStatus = ChannelStatus::Idle;
    const OBSS: ChannelStatus = ChannelStatus::ObssBusy { remaining: 10 };

    #[test]
    fn switch_rules() {
        use ChannelId::*;
        assert_eq!(npca_switch_decision(&OBSS, &IDLE, Primary), Secondary);
        assert_eq!(npca_switch_decision(&IDLE, &IDLE, Secondary), Primary);
        assert_eq!(npca_switch_decision(&IDLE, &OBSS, Secondary), Primary);
        assert_eq!(npca_switch_decision(&OBSS, &OBSS, Primary), Primary);
        assert_eq!(npca_switch_decision(&OBSS, &OBSS, Secondary), Secondary);
    }

    fn window_with(busy: u64, idle: u64) -> OccupancyWindow {
        let mut w = OccupancyWindow::new(busy + idle);
        w.push(false, idle);
        w.push(true, busy);
        w
    }

    #[test]
    fn hybrid_threshold() {
        assert_eq!(
            hybrid_policy_decision(&window_with(0, 100), 0.5),
            AccessMode::Legacy
        );
        assert_eq!(
            hybrid_policy_decision(&window_with(100, 0), 0.5),
            AccessMode::Npca
        );
        let w = window_with(60, 40);
        assert_eq!(hybrid_policy_decision(&w, 0.5), AccessMode::Npca);
        assert_eq!(hybrid_policy_decision(&w, 0.7), AccessMode::Legacy);
    }

    #[test]
    fn window_slides() {
        let mut w = OccupancyWindow::new(10);
        w.push(true, 4);
        w.push(false, 3);
        assert_eq!(w.busy_slots(), 4);
        w.push(false, 5);
        // the oldest two busy slots fell out
        assert_eq!(w.busy_slots(), 2);
        w.push(true, 25);
        assert_eq!(w.busy_slots(), 10);
        assert_eq!(w.estimate(), 1.0);
    }

    #[test]
    fn window_matches_naive_history() {
        let mut w = OccupancyWindow::new(37);
        let mut hist: Vec<bool> = Vec::new();
        let pattern = [
            (true, 5),
            (false, 12),
            (true, 1),
            (true, 40),
            (false, 3),
            (true, 9),
        ];
        for &(b, n) in pattern.iter().cycle().take(30) {
            w.push(b, n);
            hist.extend(std::iter::repeat_n(b, n as usize));
            let tail = &hist[hist.len().saturating_sub(37)..];
            assert_eq!(w.busy_slots(), tail.iter().filter(|&&x| x).count() as u64);
        }
    }

    #[test]
    fn flip_bound_is_safe() {
        let w = window_with(30, 70);
        let k = slots_until_possible_flip(&w, 0.5);
        let mut probe = w.clone();
        probe.push(true, k);
        assert_eq!(hybrid_policy_decision(&probe, 0.5), AccessMode::Legacy);
    }
}

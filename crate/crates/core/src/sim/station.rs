use rand::Rng;

/// Backoff state of one saturated station.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StationState {
    pub backoff_counter: u32,
    pub stage: u32,
    pub cw: u32,
}

impl StationState {
    pub fn new<R: Rng>(cw_min: u32, rng: &mut R) -> Self {
        StationState {
            backoff_counter: rng.random_range(0..cw_min),
            stage: 0,
            cw: cw_min,
        }
    }

    /// Back to the first stage with a fresh counter.
    pub fn on_success<R: Rng>(&mut self, cw_min: u32, rng: &mut R) {
        self.stage = 0;
        self.cw = cw_min;
        self.backoff_counter = rng.random_range(0..self.cw);
    }

    /// Doubles the window (up to `cw_max`) and redraws. Frames are never
    /// dropped; past the last stage the window stays at `cw_max`.
    pub fn on_collision<R: Rng>(&mut self, cw_min: u32, cw_max: u32, rng: &mut R) {
        let max_stage = (cw_max / cw_min).trailing_zeros();
        self.stage = (self.stage + 1).min(max_stage);
        self.cw = (cw_min << self.stage).min(cw_max);
        self.backoff_counter = rng.random_range(0..self.cw);
    }

    pub fn is_legal(&self, cw_min: u32, cw_max: u32) -> bool {
        self.backoff_counter < self.cw
            && self.cw == (cw_min << self.stage).min(cw_max)
            && (cw_min..=cw_max).contains(&self.cw)
    }
}

/// Advances backoff by one slot.
///
/// On an idle slot, stations whose counter already reached zero transmit and
/// are returned; if nobody is at zero, every counter counts down by one. A
/// busy slot freezes all counters.
pub fn backoff_step(stations: &mut [StationState], channel_idle: bool) -> Vec<usize> {
    if !channel_idle {
        return Vec::new();
    }
    let ready: Vec<usize> = stations
        .iter()
        .enumerate()
        .filter(|(_, s)| s.backoff_counter == 0)
        .map(|(i, _)| i)
        .collect();
    if ready.is_empty() {
        for s in stations.iter_mut() {
            s.backoff_counter -= 1;
        }
    }
    ready
}

/// Idle slots that will pass before some station transmits.
pub(crate) fn idle_slots_to_transmit(stations: &[StationState]) -> u32 {
    stations
        .iter()
        .map(|s| s.backoff_counter)
        .min()
        .unwrap_or(u32::MAX)
}

/// Counts every counter down by `slots` idle slots without reaching a transmission.
pub(crate) fn count_down(stations: &mut [StationState], slots: u32) {
    for s in stations.iter_mut() {
        s.backoff_counter -= slots;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn at(counters: &[u32]) -> Vec<StationState> {
        counters
            .iter()
            .map(|&c| StationState {
                backoff_counter: c,
                stage: 0,
                cw: 16,
            })
            .collect()
    }

    #[test]
    fn idle_slot_counts_down() {
        let mut s = at(&[3, 1, 7]);
        assert!(backoff_step(&mut s, true).is_empty());
        assert_eq!(
            s.iter().map(|x| x.backoff_counter).collect::<Vec<_>>(),
            [2, 0, 6]
        );
        assert_eq!(backoff_step(&mut s, true), vec![1]);
    }

    #[test]
    fn busy_slot_freezes() {
        let mut s = at(&[3, 0, 7]);
        assert!(backoff_step(&mut s, false).is_empty());
        assert_eq!(s, at(&[3, 0, 7]));
    }

    #[test]
    fn collision_doubles_and_caps() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut s = at(&[0, 0, 4]);
        let tx = backoff_step(&mut s, true);
        assert_eq!(tx, vec![0, 1]);
        for i in tx {
            s[i].on_collision(16, 1024, &mut rng);
            assert_eq!(s[i].cw, 32);
            assert!(s[i].is_legal(16, 1024));
        }
        let mut st = s[0];
        for _ in 0..10 {
            st.on_collision(16, 1024, &mut rng);
            assert!(st.is_legal(16, 1024));
        }
        assert_eq!(st.cw, 1024);
        st.on_success(16, &mut rng);
        assert_eq!((st.stage, st.cw), (0, 16));
    }

    #[test]
    fn bulk_countdown_matches_steps() {
        let mut a = at(&[5, 9, 12]);
        let mut b = a.clone();
        let k = idle_slots_to_transmit(&a);
        count_down(&mut a, k);
        for _ in 0..k {
            assert!(backoff_step(&mut b, true).is_empty());
        }
        assert_eq!(a, b);
        assert_eq!(backoff_step(&mut a, true), vec![0]);
    }
}

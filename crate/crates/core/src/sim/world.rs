//! Slot-level simulation engine.
//!
//! Time is counted in whole slots. Instead of touching every slot, the loop
//! finds the longest stretch over which nothing can change (no OBSS start or
//! end, no BSS frame start or end, no possible hybrid mode flip) and applies
//! it in one step. The result is identical to stepping slot by slot.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::channel::{ChannelId, ChannelStatus};
use super::config::{to_slots, AccessPolicy, SimConfig};
use super::metrics::SimMetrics;
use super::obss::ObssProcess;
use super::policy::{
    hybrid_policy_decision, npca_switch_decision, slots_until_possible_flip, AccessMode,
    OccupancyWindow,
};
use super::station::{count_down, idle_slots_to_transmit, StationState};
use crate::analytic::slot_costs;
use crate::error::SimError;

/// Slots of unusable time charged to the destination channel when the BSS
/// transmits on a different channel than last time: `(l - 1) * T_ppdu`.
pub fn switch_overhead_slots(l: f64, ppdu_us: f64, slot_us: f64) -> u64 {
    to_slots((l - 1.0) * ppdu_us, slot_us)
}

/// One BSS frame exchange, as recorded when tracing is on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TxRecord {
    /// Slot at which the winning station's counter expired.
    pub access_slot: u64,
    /// Slot at which the frame went on air (after any switching overhead).
    pub start_slot: u64,
    pub channel: ChannelId,
    pub overhead_slots: u64,
    pub duration_slots: u64,
    pub duplicated: bool,
    pub success: bool,
}

/// One switching-overhead period, as recorded when tracing is on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OverheadRecord {
    pub channel: ChannelId,
    pub start_slot: u64,
    pub end_slot: u64,
}

#[derive(Debug, Clone)]
struct Frame {
    transmitters: Vec<usize>,
    access_slot: u64,
    overhead: u64,
}

impl Frame {
    fn success(&self) -> bool {
        self.transmitters.len() == 1
    }
}

#[derive(Debug, Clone)]
enum Phase {
    Contending,
    Overhead {
        until: u64,
        frame: Frame,
    },
    Transmitting {
        until: u64,
        frame: Frame,
        duplicated: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Hold {
    Overhead,
    Tx { success: bool },
}

#[derive(Debug, Clone)]
struct Controller {
    policy: AccessPolicy,
    window: Option<OccupancyWindow>,
}

impl Controller {
    fn new(policy: AccessPolicy) -> Self {
        let window = match policy {
            AccessPolicy::Hybrid { k1, .. } => Some(OccupancyWindow::new(k1)),
            _ => None,
        };
        Controller { policy, window }
    }

    fn mode(&self) -> AccessMode {
        match (self.policy, &self.window) {
            (AccessPolicy::Legacy, _) => AccessMode::Legacy,
            (AccessPolicy::Npca, _) => AccessMode::Npca,
            (AccessPolicy::Hybrid { thre1, .. }, Some(w)) => hybrid_policy_decision(w, thre1),
            (AccessPolicy::Hybrid { .. }, None) => unreachable!("hybrid always has a window"),
        }
    }

    fn stable_for(&self) -> u64 {
        match (self.policy, &self.window) {
            (AccessPolicy::Hybrid { thre1, .. }, Some(w)) => slots_until_possible_flip(w, thre1),
            _ => u64::MAX,
        }
    }

    fn observe_primary(&mut self, obss_busy: bool, slots: u64) {
        if let Some(w) = self.window.as_mut() {
            w.push(obss_busy, slots);
        }
    }
}

/// Complete state of one simulation run.
#[derive(Debug, Clone)]
pub struct SimWorld {
    now: u64,
    end: u64,
    difs_slots: u64,
    ts_slots: u64,
    tc_slots: u64,
    overhead_slots: u64,
    payload_bits: u64,
    cw_min: u32,
    cw_max: u32,
    stations: Vec<StationState>,
    rng: ChaCha8Rng,
    obss: [ObssProcess; 2],
    hold_until: [u64; 2],
    hold: [Hold; 2],
    current: ChannelId,
    last_tx: ChannelId,
    /// Channel the radio was retuned to since the last frame, if any.
    retuned: Option<ChannelId>,
    difs_remaining: u64,
    phase: Phase,
    controller: Controller,
    metrics: SimMetrics,
    trace: Option<Vec<TxRecord>>,
    overhead_trace: Option<Vec<OverheadRecord>>,
}

impl SimWorld {
    pub fn new(config: &SimConfig) -> Result<Self, SimError> {
        config.validate()?;
        let slot = config.mac.slot_us;
        let (t_s, t_c) = slot_costs(&config.mac);
        let obss_slots = to_slots(config.obss_ppdu_us(), slot).max(1);

        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(0);
        let obss_rng = |stream: u64| {
            let mut r = ChaCha8Rng::seed_from_u64(config.seed);
            r.set_stream(stream);
            r
        };
        let stations = (0..config.n_stations)
            .map(|_| StationState::new(config.cw_min, &mut rng))
            .collect();
        let difs_slots = to_slots(config.mac.difs_us, slot);

        Ok(SimWorld {
            now: 0,
            end: config.total_slots(),
            difs_slots,
            ts_slots: to_slots(t_s, slot).max(1),
            tc_slots: to_slots(t_c, slot).max(1),
            overhead_slots: switch_overhead_slots(config.l, config.mac.payload_tx_us, slot),
            payload_bits: config.ampdu_bytes as u64 * 8,
            cw_min: config.cw_min,
            cw_max: config.cw_max,
            stations,
            rng,
            obss: [
                ObssProcess::new(config.obss_p1, obss_slots, obss_rng(1)),
                ObssProcess::new(config.obss_p2, obss_slots, obss_rng(2)),
            ],
            hold_until: [0, 0],
            hold: [Hold::Overhead; 2],
            current: ChannelId::Primary,
            last_tx: ChannelId::Primary,
            retuned: None,
            difs_remaining: difs_slots,
            phase: Phase::Contending,
            controller: Controller::new(config.policy),
            metrics: SimMetrics {
                slot_us: slot.round() as u64,
                ..SimMetrics::default()
            },
            trace: None,
            overhead_trace: None,
        })
    }

    /// Records every frame exchange and overhead period.
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self.overhead_trace = Some(Vec::new());
        self
    }

    pub fn trace(&self) -> &[TxRecord] {
        self.trace.as_deref().unwrap_or(&[])
    }

    pub fn overhead_trace(&self) -> &[OverheadRecord] {
        self.overhead_trace.as_deref().unwrap_or(&[])
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn end(&self) -> u64 {
        self.end
    }

    pub fn stations(&self) -> &[StationState] {
        &self.stations
    }

    pub fn current_channel(&self) -> ChannelId {
        self.current
    }

    pub fn metrics(&self) -> &SimMetrics {
        &self.metrics
    }

    pub fn into_metrics(self) -> SimMetrics {
        self.metrics
    }

    pub fn overhead_slots(&self) -> u64 {
        self.overhead_slots
    }

    /// Retargets OBSS occupancy on one channel from the current slot on.
    /// Frames and OBSS periods already in flight run to completion.
    pub fn set_occupancy(&mut self, channel: ChannelId, p: f64) -> Result<(), SimError> {
        if !(p.is_finite() && (0.0..1.0).contains(&p)) {
            return Err(SimError::Config(format!(
                "occupancy {p} must lie in [0, 1)"
            )));
        }
        self.obss[channel.index()].set_target(p, self.now);
        Ok(())
    }

    pub fn channel_status(&self, channel: ChannelId) -> ChannelStatus {
        let k = channel.index();
        if self.hold_until[k] > self.now {
            let remaining = self.hold_until[k] - self.now;
            return match self.hold[k] {
                Hold::Overhead => ChannelStatus::SwitchOverhead { remaining },
                Hold::Tx { success } => ChannelStatus::BssTx { remaining, success },
            };
        }
        match self.obss[k].backlog() {
            0 => ChannelStatus::Idle,
            remaining => ChannelStatus::ObssBusy { remaining },
        }
    }

    /// Runs to the end of the configured simulation time.
    pub fn run(&mut self) {
        self.run_until(self.end);
    }

    /// Runs until slot `target` (capped at the end of the run).
    pub fn run_until(&mut self, target: u64) {
        let target = target.min(self.end);
        while self.now < target {
            self.advance(target);
        }
        self.metrics.total_slots = self.now;
    }

    /// Advances by one stretch of unchanging state, never past `target`.
    /// Returns the number of slots that elapsed (0 if a frame just started).
    pub fn advance(&mut self, target: u64) -> u64 {
        let now = self.now;
        for proc in &mut self.obss {
            proc.arrive(now);
        }
        self.settle_phase();

        // OBSS stations defer to BSS frames but not to a retuning radio.
        let held = [self.tx_hold(0), self.tx_hold(1)];
        let obss_busy = [
            !held[0] && self.obss[0].backlog() > 0,
            !held[1] && self.obss[1].backlog() > 0,
        ];
        let mode = self.controller.mode();

        let mut dt = target.min(self.end).saturating_sub(now);
        let mut countdown = false;
        match &self.phase {
            Phase::Contending => {
                let next = match mode {
                    AccessMode::Legacy => ChannelId::Primary,
                    AccessMode::Npca => npca_switch_decision(
                        &self.channel_status(ChannelId::Primary),
                        &self.channel_status(ChannelId::Secondary),
                        self.current,
                    ),
                };
                if next != self.current {
                    self.current = next;
                    self.difs_remaining = self.difs_slots;
                }
                let k = self.current.index();
                if obss_busy[k] {
                    self.difs_remaining = self.difs_slots;
                } else if self.difs_remaining > 0 {
                    dt = dt.min(self.difs_remaining);
                } else {
                    let wait = idle_slots_to_transmit(&self.stations) as u64;
                    if wait == 0 {
                        self.access();
                        return 0;
                    }
                    dt = dt.min(wait);
                    countdown = true;
                }
            }
            Phase::Overhead { until, .. } | Phase::Transmitting { until, .. } => {
                dt = dt.min(until - now);
            }
        }
        for k in 0..2 {
            let bound = if held[k] {
                self.hold_until[k] - now
            } else if obss_busy[k] {
                self.obss[k].backlog()
            } else {
                self.obss[k].next_start().saturating_sub(now)
            };
            dt = dt.min(bound.max(1));
        }
        dt = dt.min(self.controller.stable_for()).max(1);

        for (k, &busy) in obss_busy.iter().enumerate() {
            if busy {
                self.obss[k].drain(dt);
                self.metrics.channels[k].obss_busy_slots += dt;
            }
        }
        if matches!(self.phase, Phase::Contending) && !obss_busy[self.current.index()] {
            if countdown {
                count_down(&mut self.stations, dt as u32);
            } else {
                self.difs_remaining -= dt;
            }
        }
        self.controller.observe_primary(obss_busy[0], dt);
        self.now += dt;
        dt
    }

    fn tx_hold(&self, k: usize) -> bool {
        self.hold_until[k] > self.now && matches!(self.hold[k], Hold::Tx { .. })
    }

    /// Completes any overhead or frame that ends at the current slot.
    fn settle_phase(&mut self) {
        loop {
            match &self.phase {
                Phase::Overhead { until, .. } if *until <= self.now => {
                    let Phase::Overhead { frame, .. } =
                        std::mem::replace(&mut self.phase, Phase::Contending)
                    else {
                        unreachable!()
                    };
                    self.retuned = Some(self.current);
                    if self.obss[self.current.index()].backlog() > 0 {
                        // OBSS took the channel meanwhile; the frame waits
                        // for the next access with the counters as they are.
                        self.difs_remaining = self.difs_slots;
                    } else {
                        self.begin_tx(frame);
                    }
                }
                Phase::Transmitting { until, .. } if *until <= self.now => {
                    let Phase::Transmitting {
                        frame, duplicated, ..
                    } = std::mem::replace(&mut self.phase, Phase::Contending)
                    else {
                        unreachable!()
                    };
                    self.finish_tx(frame, duplicated);
                }
                _ => return,
            }
        }
    }

    /// A backoff counter expired on the current channel.
    fn access(&mut self) {
        let transmitters: Vec<usize> = self
            .stations
            .iter()
            .enumerate()
            .filter(|(_, s)| s.backoff_counter == 0)
            .map(|(i, _)| i)
            .collect();
        let mut frame = Frame {
            transmitters,
            access_slot: self.now,
            overhead: 0,
        };
        if self.current != self.last_tx
            && self.retuned != Some(self.current)
            && self.overhead_slots > 0
        {
            frame.overhead = self.overhead_slots;
            let k = self.current.index();
            self.hold_until[k] = self.now + self.overhead_slots;
            self.hold[k] = Hold::Overhead;
            self.metrics.channels[k].overhead_slots += self.overhead_slots;
            if let Some(log) = self.overhead_trace.as_mut() {
                log.push(OverheadRecord {
                    channel: self.current,
                    start_slot: self.now,
                    end_slot: self.now + self.overhead_slots,
                });
            }
            self.phase = Phase::Overhead {
                until: self.now + self.overhead_slots,
                frame,
            };
            return;
        }
        self.begin_tx(frame);
    }

    fn begin_tx(&mut self, frame: Frame) {
        if self.current != self.last_tx {
            self.metrics.switch_count += 1;
        }
        let success = frame.success();
        let duration = if success {
            self.ts_slots
        } else {
            self.tc_slots
        };
        let until = self.now + duration;
        let k = self.current.index();
        self.hold_until[k] = until;
        self.hold[k] = Hold::Tx { success };

        // A primary-channel frame is widened onto the secondary when the
        // secondary is free at the moment the frame starts.
        let duplicated = self.current == ChannelId::Primary
            && self.hold_until[1] <= self.now
            && self.obss[1].backlog() == 0;
        if duplicated {
            self.hold_until[1] = until;
            self.hold[1] = Hold::Tx { success };
        }
        if let Some(trace) = self.trace.as_mut() {
            trace.push(TxRecord {
                access_slot: frame.access_slot,
                start_slot: self.now,
                channel: self.current,
                overhead_slots: frame.overhead,
                duration_slots: duration,
                duplicated,
                success,
            });
        }
        self.phase = Phase::Transmitting {
            until,
            frame,
            duplicated,
        };
    }

    fn finish_tx(&mut self, frame: Frame, duplicated: bool) {
        let channel = self.current;
        let success = frame.success();
        let duration = if success {
            self.ts_slots
        } else {
            self.tc_slots
        };
        let mut used = vec![channel];
        if duplicated {
            used.push(ChannelId::Secondary);
        }
        for ch in &used {
            let m = &mut self.metrics.channels[ch.index()];
            m.bss_tx_slots += duration;
            if used.len() == 1 {
                m.solo_tx_slots += duration;
            }
            if success {
                m.successful_payload_bits += self.payload_bits;
                m.success_count += 1;
            } else {
                m.collision_count += 1;
            }
        }
        for &i in &frame.transmitters {
            if success {
                self.stations[i].on_success(self.cw_min, &mut self.rng);
            } else {
                self.stations[i].on_collision(self.cw_min, self.cw_max, &mut self.rng);
            }
        }
        self.last_tx = channel;
        self.retuned = None;
        // DIFS (or EIFS) is already part of the frame's channel time.
        self.difs_remaining = 0;
    }
}

/// Runs one simulation to completion.
pub fn run_sim(config: &SimConfig) -> Result<SimMetrics, SimError> {
    let mut world = SimWorld::new(config)?;
    world.run();
    Ok(world.into_metrics())
}

use serde::Serialize;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ChannelMetrics {
    pub successful_payload_bits: u64,
    pub success_count: u64,
    pub collision_count: u64,
    pub obss_busy_slots: u64,
    pub overhead_slots: u64,
    /// Slots carrying BSS frames (successful or colliding).
    pub bss_tx_slots: u64,
    /// BSS frame slots on this channel with no concurrent BSS frame on the other.
    pub solo_tx_slots: u64,
}

/// Counters accumulated over one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SimMetrics {
    pub channels: [ChannelMetrics; 2],
    pub switch_count: u64,
    pub total_slots: u64,
    pub slot_us: u64,
}

impl SimMetrics {
    pub fn measured_occupancy(&self) -> (f64, f64) {
        if self.total_slots == 0 {
            return (0.0, 0.0);
        }
        let t = self.total_slots as f64;
        (
            self.channels[0].obss_busy_slots as f64 / t,
            self.channels[1].obss_busy_slots as f64 / t,
        )
    }

    pub fn sim_time_s(&self) -> f64 {
        self.total_slots as f64 * self.slot_us as f64 * 1e-6
    }
}

/// Throughput per channel and in total, in Mbit/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasuredThroughput {
    pub primary_mbps: f64,
    pub secondary_mbps: f64,
    pub total_mbps: f64,
}

pub fn measured_throughput(metrics: &SimMetrics, sim_time_s: f64) -> MeasuredThroughput {
    let rate = |bits: u64| {
        if sim_time_s > 0.0 {
            bits as f64 / sim_time_s / 1e6
        } else {
            0.0
        }
    };
    let primary_mbps = rate(metrics.channels[0].successful_payload_bits);
    let secondary_mbps = rate(metrics.channels[1].successful_payload_bits);
    MeasuredThroughput {
        primary_mbps,
        secondary_mbps,
        total_mbps: primary_mbps + secondary_mbps,
    }
}

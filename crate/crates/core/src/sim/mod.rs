//! Slot-level CSMA/CA simulation of one BSS on a primary/non-primary
//! channel pair with OBSS occupancy on both.

pub mod channel;
pub mod config;
pub mod metrics;
pub mod obss;
pub mod policy;
pub mod station;
pub mod world;

pub use channel::{ChannelId, ChannelStatus};
pub use config::{ampdu_airtime_us, to_slots, AccessPolicy, SimConfig, MCS3_20MHZ_MBPS};
pub use metrics::{measured_throughput, ChannelMetrics, MeasuredThroughput, SimMetrics};
pub use obss::{calibrate_obss, measure_busy_fraction, ObssProcess};
pub use policy::{hybrid_policy_decision, npca_switch_decision, AccessMode, OccupancyWindow};
pub use station::{backoff_step, StationState};
pub use world::{run_sim, switch_overhead_slots, OverheadRecord, SimWorld, TxRecord};

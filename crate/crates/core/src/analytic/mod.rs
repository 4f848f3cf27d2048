//! Closed-form throughput models.
//!
//! [`bianchi`] gives the single-channel saturation throughput `S`;
//! [`two_channel`] extends it to a primary/non-primary pair under legacy
//! bonding and NPCA; [`ratio`] compares the two.
//!
//! The coefficients `c1`, `c2` are oriented so that `c1 W1 + c2 W2` expands
//! term by term into the overhead-aware NPCA total: each channel is
//! discounted by the switching probability of transmissions on *that*
//! channel. With `p1 = 0` the primary never pays a switching cost.

pub mod bianchi;
pub mod ratio;
pub mod two_channel;

pub use bianchi::{
    backoff_stages, p_success, p_transmit, saturation_throughput, slot_costs, solve_tau,
    throughput_vs_occupancy, BianchiModel, MacTiming,
};
pub use ratio::{
    balanced_ratio, bisect, crossover_threshold, ratio_factors, throughput_ratio, RatioFactors,
};
pub use two_channel::{
    channel_access_probs, legacy_throughput, npca_classic_throughput, npca_overhead_throughput,
    npca_overhead_total, overhead_coefficients, overhead_probs, power_iterate, steady_state,
    transition_matrix, ModelTag, OccupancyPair, ThroughputReport, TransitionMatrix,
};

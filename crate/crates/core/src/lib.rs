//! Throughput analysis of non-primary channel access (NPCA) on a
//! two-channel WLAN.
//!
//! - [`analytic`]: closed-form saturation throughput, legacy/NPCA two-channel
//!   throughput with switching cost, and the NPCA/legacy ratio.
//! - [`sim`]: slot-level CSMA/CA simulator with OBSS occupancy, NPCA
//!   switching and the occupancy-driven hybrid policy.
//! - [`scenarios`]: sweeps and experiments tying the two together.
//! - [`io`]: config files, CSV output and run manifests.

pub mod analytic;
pub mod error;
pub mod io;
pub mod scenarios;
pub mod sim;

pub use analytic::{BianchiModel, MacTiming, ModelTag, OccupancyPair, ThroughputReport};
pub use error::{ModelError, SimError};
pub use sim::{run_sim, AccessPolicy, SimConfig, SimMetrics};

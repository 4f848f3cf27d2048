use serde::{Deserialize, Serialize};

use crate::analytic::{backoff_stages, MacTiming};
use crate::error::SimError;

/// Data rate for MCS 3 on a 20 MHz, single-stream HE PPDU (0.8 us GI).
pub const MCS3_20MHZ_MBPS: f64 = 34.4;

/// Channel access policy of the BSS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum AccessPolicy {
    Legacy,
    Npca,
    /// Switches between NPCA and legacy on the primary occupancy measured
    /// over the last `k1` slots.
    Hybrid {
        thre1: f64,
        k1: u64,
    },
}

impl AccessPolicy {
    pub const DEFAULT_THRE1: f64 = 0.5;
    pub const DEFAULT_K1: u64 = 2000;

    pub fn hybrid_default() -> Self {
        AccessPolicy::Hybrid {
            thre1: Self::DEFAULT_THRE1,
            k1: Self::DEFAULT_K1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AccessPolicy::Legacy => "legacy",
            AccessPolicy::Npca => "npca",
            AccessPolicy::Hybrid { .. } => "hybrid",
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if let AccessPolicy::Hybrid { thre1, k1 } = *self {
            if !(thre1 > 0.0 && thre1 < 1.0) {
                return Err(SimError::Config(format!(
                    "thre1 = {thre1} must lie in (0, 1)"
                )));
            }
            if k1 < 1 {
                return Err(SimError::Config("k1 must be at least 1 slot".into()));
            }
        }
        Ok(())
    }
}

/// Everything that determines one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub sim_time_s: f64,
    pub n_stations: u32,
    /// `mac.payload_tx_us` must equal the AMPDU airtime at `phy_rate_mbps`.
    pub mac: MacTiming,
    pub cw_min: u32,
    pub cw_max: u32,
    pub packet_bytes: u32,
    pub ampdu_bytes: u32,
    pub phy_rate_mbps: f64,
    pub l: f64,
    pub obss_p1: f64,
    pub obss_p2: f64,
    /// Length of one OBSS busy period; `None` uses the BSS AMPDU airtime.
    pub obss_ppdu_us: Option<f64>,
    pub policy: AccessPolicy,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig::table_defaults()
    }
}

impl SimConfig {
    /// 30 s, 10 stations, 1500 B MPDUs in 18000 B AMPDUs, CW 16..1024,
    /// 9 us slots, SIFS 16 us, MCS 3 at 20 MHz, `l = 2.0`, no OBSS.
    pub fn table_defaults() -> Self {
        let ampdu_bytes = 18_000;
        let phy_rate_mbps = MCS3_20MHZ_MBPS;
        SimConfig {
            sim_time_s: 30.0,
            n_stations: 10,
            mac: MacTiming::ofdm_20mhz(ampdu_airtime_us(ampdu_bytes, phy_rate_mbps)),
            cw_min: 16,
            cw_max: 1024,
            packet_bytes: 1500,
            ampdu_bytes,
            phy_rate_mbps,
            l: 2.0,
            obss_p1: 0.0,
            obss_p2: 0.0,
            obss_ppdu_us: None,
            policy: AccessPolicy::Legacy,
            seed: 1,
        }
    }

    pub fn with_occupancy(mut self, p1: f64, p2: f64) -> Self {
        self.obss_p1 = p1;
        self.obss_p2 = p2;
        self
    }

    pub fn with_policy(mut self, policy: AccessPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_l(mut self, l: f64) -> Self {
        self.l = l;
        self
    }

    pub fn with_sim_time(mut self, sim_time_s: f64) -> Self {
        self.sim_time_s = sim_time_s;
        self
    }

    pub fn payload_bits(&self) -> f64 {
        self.ampdu_bytes as f64 * 8.0
    }

    pub fn obss_ppdu_us(&self) -> f64 {
        self.obss_ppdu_us.unwrap_or(self.mac.payload_tx_us)
    }

    pub fn total_slots(&self) -> u64 {
        (self.sim_time_s * 1e6 / self.mac.slot_us).floor() as u64
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::Config(msg));
        self.mac.validate()?;
        if !(self.sim_time_s.is_finite() && self.sim_time_s > 0.0) {
            return bad(format!("sim_time_s = {} must be positive", self.sim_time_s));
        }
        if self.n_stations < 1 {
            return bad("n_stations must be at least 1".into());
        }
        if self.mac.slot_us <= 0.0 {
            return bad("slot_us must be positive".into());
        }
        backoff_stages(self.cw_min, self.cw_max)?;
        if self.cw_min < 2 {
            return bad(format!("cw_min = {} must be at least 2", self.cw_min));
        }
        if self.packet_bytes == 0 || self.ampdu_bytes < self.packet_bytes {
            return bad(format!(
                "ampdu_bytes ({}) must be at least packet_bytes ({}) and both positive",
                self.ampdu_bytes, self.packet_bytes
            ));
        }
        if !(self.phy_rate_mbps.is_finite() && self.phy_rate_mbps > 0.0) {
            return bad(format!(
                "phy_rate_mbps = {} must be positive",
                self.phy_rate_mbps
            ));
        }
        let airtime = ampdu_airtime_us(self.ampdu_bytes, self.phy_rate_mbps);
        if (airtime - self.mac.payload_tx_us).abs() > 1e-6 * airtime.max(1.0) {
            return bad(format!(
                "payload_tx_us = {} disagrees with ampdu_bytes at phy_rate_mbps ({airtime})",
                self.mac.payload_tx_us
            ));
        }
        if !(self.l.is_finite() && self.l >= 1.0) {
            return bad(format!("l = {} must be >= 1", self.l));
        }
        for (name, p) in [("obss_p1", self.obss_p1), ("obss_p2", self.obss_p2)] {
            if !(p.is_finite() && (0.0..1.0).contains(&p)) {
                return bad(format!("{name} = {p} must lie in [0, 1)"));
            }
        }
        if let Some(d) = self.obss_ppdu_us {
            if !(d.is_finite() && d > 0.0) {
                return bad(format!("obss_ppdu_us = {d} must be positive"));
            }
        }
        self.policy.validate()
    }
}

/// Airtime of an AMPDU of `bytes` at `rate_mbps`, in microseconds.
pub fn ampdu_airtime_us(bytes: u32, rate_mbps: f64) -> f64 {
    bytes as f64 * 8.0 / rate_mbps
}

/// Rounds a duration to whole slots, halves rounding up.
pub fn to_slots(us: f64, slot_us: f64) -> u64 {
    (us / slot_us + 0.5).floor().max(0.0) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = SimConfig::table_defaults();
        c.validate().unwrap();
        assert_eq!(c.mac.difs_us, c.mac.sifs_us + 2.0 * c.mac.slot_us);
        assert_eq!(c.total_slots(), 3_333_333);
        assert_eq!(c.obss_ppdu_us(), c.mac.payload_tx_us);
    }

    #[test]
    fn rejects_bad_values() {
        let c = SimConfig::table_defaults();
        assert!(c.clone().with_occupancy(1.0, 0.0).validate().is_err());
        assert!(c.clone().with_l(0.9).validate().is_err());
        let hybrid = AccessPolicy::Hybrid { thre1: 1.2, k1: 10 };
        assert!(c.clone().with_policy(hybrid).validate().is_err());
        let mut odd = c.clone();
        odd.cw_max = 1000;
        assert!(odd.validate().is_err());
        let mut stale = c;
        stale.ampdu_bytes = 9000;
        assert!(stale.validate().is_err());
    }

    #[test]
    fn slot_rounding() {
        assert_eq!(to_slots(4000.0, 9.0), 444);
        assert_eq!(to_slots(4.5, 9.0), 1);
        assert_eq!(to_slots(4.49, 9.0), 0);
        assert_eq!(to_slots(34.0, 9.0), 4);
    }
}

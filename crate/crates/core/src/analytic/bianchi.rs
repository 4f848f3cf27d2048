//! Single-channel saturation throughput under binary exponential backoff.
//!
//! The per-station transmission probability `tau` comes from the usual
//! two-equation fixed point (conditional collision probability `p` and the
//! backoff chain's stationary transmit probability), solved by bisection.
//! Everything downstream of `tau` is closed form.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

const TAU_TOLERANCE: f64 = 1e-10;
const TAU_ITERATION_CAP: usize = 1_000_000;

/// MAC/PHY time constants, all in microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacTiming {
    pub slot_us: f64,
    pub sifs_us: f64,
    pub difs_us: f64,
    pub phy_header_us: f64,
    pub mac_header_us: f64,
    pub ack_us: f64,
    pub nack_us: f64,
    pub prop_delay_us: f64,
    /// Airtime of one aggregated payload at the PHY rate.
    pub payload_tx_us: f64,
}

impl MacTiming {
    /// 20 MHz OFDM timing with DIFS = SIFS + 2 slots and the given payload airtime.
    pub fn ofdm_20mhz(payload_tx_us: f64) -> Self {
        let slot_us = 9.0;
        let sifs_us = 16.0;
        MacTiming {
            slot_us,
            sifs_us,
            difs_us: sifs_us + 2.0 * slot_us,
            phy_header_us: 40.0,
            mac_header_us: 8.0,
            ack_us: 44.0,
            nack_us: 44.0,
            prop_delay_us: 0.0,
            payload_tx_us,
        }
    }

    /// All overheads zeroed; only the payload airtime remains.
    pub fn zero_overhead(payload_tx_us: f64) -> Self {
        MacTiming {
            slot_us: 0.0,
            sifs_us: 0.0,
            difs_us: 0.0,
            phy_header_us: 0.0,
            mac_header_us: 0.0,
            ack_us: 0.0,
            nack_us: 0.0,
            prop_delay_us: 0.0,
            payload_tx_us,
        }
    }

    pub fn header_us(&self) -> f64 {
        self.phy_header_us + self.mac_header_us
    }

    /// EIFS = SIFS + NACK + DIFS.
    pub fn eifs_us(&self) -> f64 {
        self.sifs_us + self.nack_us + self.difs_us
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("slot_us", self.slot_us),
            ("sifs_us", self.sifs_us),
            ("difs_us", self.difs_us),
            ("phy_header_us", self.phy_header_us),
            ("mac_header_us", self.mac_header_us),
            ("ack_us", self.ack_us),
            ("nack_us", self.nack_us),
            ("prop_delay_us", self.prop_delay_us),
            ("payload_tx_us", self.payload_tx_us),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ModelError::OutOfRange {
                    name,
                    value,
                    bound: "[0, inf)",
                });
            }
        }
        Ok(())
    }
}

/// Busy time of a successful exchange and of a collision: `(Ts, Tc)` in microseconds.
///
/// `Ts = H + E[Pkt] + SIFS + d + ACK + DIFS + d` and `Tc = H + E[Pkt] + d + EIFS`.
pub fn slot_costs(timing: &MacTiming) -> (f64, f64) {
    let frame = timing.header_us() + timing.payload_tx_us;
    let delta = timing.prop_delay_us;
    let t_s = frame + timing.sifs_us + delta + timing.ack_us + timing.difs_us + delta;
    let t_c = frame + delta + timing.eifs_us();
    (t_s, t_c)
}

/// Probability that at least one of `n` stations transmits in a slot.
pub fn p_transmit(tau: f64, n: u32) -> f64 {
    1.0 - (1.0 - tau).powi(n as i32)
}

/// Probability that a busy slot carries exactly one transmission.
pub fn p_success(tau: f64, n: u32) -> Result<f64> {
    let p_tr = p_transmit(tau, n);
    if tau <= 0.0 || p_tr <= 0.0 {
        return Err(ModelError::UndefinedConditional);
    }
    Ok(n as f64 * tau * (1.0 - tau).powi(n as i32 - 1) / p_tr)
}

/// Stationary transmit probability of the backoff chain for a given
/// conditional collision probability.
/// Uses `(1 - (2p)^m) / (1 - 2p) = sum (2p)^k`, which stays finite at p = 1/2.
fn chain_tau(p: f64, cw_min: f64, max_stages: u32) -> f64 {
    let series: f64 = (0..max_stages).map(|k| (2.0 * p).powi(k as i32)).sum();
    2.0 / (cw_min + 1.0 + p * cw_min * series)
}

fn tau_residual(tau: f64, n: u32, cw_min: f64, max_stages: u32) -> f64 {
    let p = 1.0 - (1.0 - tau).powi(n as i32 - 1);
    tau - chain_tau(p, cw_min, max_stages)
}

/// Solves the saturation fixed point for the per-slot transmission probability.
pub fn solve_tau(n: u32, cw_min: u32, max_stages: u32) -> Result<f64> {
    if n < 1 {
        return Err(ModelError::OutOfRange {
            name: "n_stations",
            value: n as f64,
            bound: "[1, inf)",
        });
    }
    if cw_min < 2 {
        return Err(ModelError::OutOfRange {
            name: "cw_min",
            value: cw_min as f64,
            bound: "[2, inf)",
        });
    }
    let w = cw_min as f64;
    let f = |tau: f64| tau_residual(tau, n, w, max_stages);

    // f is increasing in tau: negative near 0, positive near 1.
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut mid = 0.5;
    let mut residual = f(mid);
    for _ in 0..TAU_ITERATION_CAP {
        mid = 0.5 * (lo + hi);
        residual = f(mid);
        if !residual.is_finite() {
            break;
        }
        if residual.abs() < TAU_TOLERANCE && hi - lo < 1e-12 {
            return Ok(mid);
        }
        if residual < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * mid {
            break;
        }
    }
    if residual.is_finite() && residual.abs() < TAU_TOLERANCE && mid > 0.0 && mid < 1.0 {
        Ok(mid)
    } else {
        Err(ModelError::SolverFailure {
            iterations: TAU_ITERATION_CAP,
            residual,
        })
    }
}

/// Number of doubling stages between `cw_min` and `cw_max`.
pub fn backoff_stages(cw_min: u32, cw_max: u32) -> Result<u32> {
    if cw_min == 0
        || cw_max < cw_min
        || !cw_max.is_multiple_of(cw_min)
        || !(cw_max / cw_min).is_power_of_two()
    {
        return Err(ModelError::WindowMismatch { cw_min, cw_max });
    }
    Ok((cw_max / cw_min).trailing_zeros())
}

/// `S = Ps Ptr E[P] / ((1 - Ptr) sigma + Ptr Ps Ts + Ptr (1 - Ps) Tc)` in bit/s.
pub fn saturation_throughput(
    p_tr: f64,
    p_s: f64,
    payload_bits: f64,
    timing: &MacTiming,
) -> Result<f64> {
    let (t_s, t_c) = slot_costs(timing);
    let denom = (1.0 - p_tr) * timing.slot_us + p_tr * p_s * t_s + p_tr * (1.0 - p_s) * t_c;
    if denom <= 0.0 || !denom.is_finite() {
        return Err(ModelError::DegenerateConfig);
    }
    // bits per microsecond -> bit/s
    Ok(p_s * p_tr * payload_bits / denom * 1e6)
}

/// Solved single-channel contention model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BianchiModel {
    pub n_stations: u32,
    pub cw_min: u32,
    pub cw_max: u32,
    pub max_stages: u32,
    pub payload_bits: f64,
    pub tau: f64,
    pub p_tr: f64,
    pub p_s: f64,
    pub t_s_us: f64,
    pub t_c_us: f64,
    pub s_bps: f64,
}

impl BianchiModel {
    pub fn solve(
        n_stations: u32,
        cw_min: u32,
        cw_max: u32,
        payload_bits: f64,
        timing: &MacTiming,
    ) -> Result<Self> {
        timing.validate()?;
        let max_stages = backoff_stages(cw_min, cw_max)?;
        let tau = solve_tau(n_stations, cw_min, max_stages)?;
        let p_tr = p_transmit(tau, n_stations);
        let p_s = p_success(tau, n_stations)?;
        let (t_s_us, t_c_us) = slot_costs(timing);
        let s_bps = saturation_throughput(p_tr, p_s, payload_bits, timing)?;
        Ok(BianchiModel {
            n_stations,
            cw_min,
            cw_max,
            max_stages,
            payload_bits,
            tau,
            p_tr,
            p_s,
            t_s_us,
            t_c_us,
            s_bps,
        })
    }

    /// Throughput ceiling if every slot carried a successful exchange.
    pub fn airtime_bound_bps(&self) -> f64 {
        self.payload_bits / self.t_s_us * 1e6
    }
}

/// Throughput left to a BSS when OBSS traffic occupies a fraction `p` of the air.
///
/// Occupancy removes airtime linearly: `S(p) = (1 - p) S`.
pub fn throughput_vs_occupancy(s_bps: f64, p: f64) -> f64 {
    (1.0 - p) * s_bps
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_timing() -> MacTiming {
        MacTiming {
            phy_header_us: 0.0,
            mac_header_us: 0.0,
            ack_us: 0.0,
            nack_us: 0.0,
            ..MacTiming::ofdm_20mhz(100.0)
        }
    }

    #[test]
    fn single_station_tau() {
        let tau = solve_tau(1, 16, 0).unwrap();
        assert!((tau - 2.0 / 17.0).abs() < 1e-10);
        let tau = solve_tau(1, 16, 6).unwrap();
        assert!((tau - 2.0 / 17.0).abs() < 1e-10);
    }

    #[test]
    fn tau_regression() {
        // bisection on the residual in 30-digit arithmetic
        let tau10 = solve_tau(10, 16, 6).unwrap();
        assert!((tau10 - 0.052_479_894_441_153_95).abs() < 1e-9);
        let tau50 = solve_tau(50, 16, 6).unwrap();
        assert!((tau50 - 0.018_290_394_373_171_7).abs() < 1e-9);
        assert!(tau50 < tau10);
        assert!(tau_residual(tau10, 10, 16.0, 6).abs() < 1e-10);
    }

    #[test]
    fn tau_rejects_bad_input() {
        assert!(solve_tau(0, 16, 6).is_err());
        assert!(solve_tau(10, 1, 6).is_err());
    }

    #[test]
    fn transmit_probability() {
        assert_eq!(p_transmit(0.0, 10), 0.0);
        assert_eq!(p_transmit(0.5, 1), 0.5);
        assert!((p_transmit(0.1, 10) - 0.651_321_559_9).abs() < 1e-9);
    }

    #[test]
    fn success_probability() {
        assert!((p_success(0.3, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!((p_success(0.1, 10).unwrap() - 0.594_822_147_5).abs() < 1e-9);
        assert!((p_success(0.5, 2).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(p_success(0.0, 10), Err(ModelError::UndefinedConditional));
    }

    #[test]
    fn frame_costs() {
        let zero = MacTiming::zero_overhead(100.0);
        assert_eq!(slot_costs(&zero), (100.0, 100.0));

        let t = table_timing();
        assert_eq!(t.eifs_us(), 50.0);
        assert_eq!(slot_costs(&t), (150.0, 150.0));

        let longer_ack = MacTiming {
            ack_us: t.ack_us + 10.0,
            ..t
        };
        let (ts, tc) = slot_costs(&longer_ack);
        assert_eq!(ts, 160.0);
        assert_eq!(tc, 150.0);
    }

    #[test]
    fn throughput_limits() {
        let t = table_timing();
        let (ts, _) = slot_costs(&t);
        let s = saturation_throughput(1.0, 1.0, 1000.0, &t).unwrap();
        assert!((s - 1000.0 / ts * 1e6).abs() < 1e-6);

        let s1 = saturation_throughput(0.6, 0.7, 1000.0, &t).unwrap();
        let s2 = saturation_throughput(0.6, 0.7, 2000.0, &t).unwrap();
        assert!((s2 - 2.0 * s1).abs() < 1e-6);

        let zero = MacTiming::zero_overhead(0.0);
        assert_eq!(
            saturation_throughput(0.0, 1.0, 1000.0, &zero),
            Err(ModelError::DegenerateConfig)
        );
    }

    #[test]
    fn solved_model_respects_airtime_bound() {
        let timing = MacTiming::ofdm_20mhz(144_000.0 / 34.4);
        let m = BianchiModel::solve(10, 16, 1024, 144_000.0, &timing).unwrap();
        assert_eq!(m.max_stages, 6);
        assert!(m.tau > 0.0 && m.tau < 1.0);
        assert!(m.s_bps <= m.airtime_bound_bps());
        assert!(BianchiModel::solve(10, 16, 1000, 144_000.0, &timing).is_err());
    }

    #[test]
    fn occupancy_scaling() {
        assert_eq!(throughput_vs_occupancy(7.0, 0.0), 7.0);
        assert!((throughput_vs_occupancy(10e6, 0.5) - 5e6).abs() < 1e-6);
        assert!((throughput_vs_occupancy(10e6, 0.8) - 2e6).abs() < 1e-6);
    }
}

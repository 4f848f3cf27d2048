//! NPCA-to-legacy throughput ratio and the occupancy at which it equals one.

use serde::Serialize;

use crate::error::{ModelError, Result};

use super::two_channel::{
    legacy_throughput, npca_classic_throughput, npca_overhead_total, OccupancyPair,
};

const CROSSOVER_TOLERANCE: f64 = 1e-8;
const SCAN_POINTS: usize = 1000;

/// Ratio of overhead-aware NPCA throughput to legacy throughput.
///
/// The single-channel throughput cancels, so only occupancy and `l` matter.
pub fn throughput_ratio(occ: &OccupancyPair, l: f64) -> Result<f64> {
    if !(l.is_finite() && l >= 1.0) {
        return Err(ModelError::InvalidOverhead(l));
    }
    let (p1, p2) = (occ.p1(), occ.p2());
    let free = 1.0 - p1 * p2;
    let first = free / (l * p1 * (1.0 - p2) + 1.0 - p1);
    let second =
        free / (p1 * (1.0 - p2) + l * (1.0 - p1)) * p1 / (1.0 - p1) * (1.0 - p2) / (2.0 - p2);
    Ok(first + second)
}

/// Legacy, classic NPCA and overhead-aware NPCA totals normalized to
/// `S(p1) = 1`, with their ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioFactors {
    pub p1: f64,
    pub p2: f64,
    pub l: f64,
    pub s_leg_factor: f64,
    pub s_npca_star_factor: f64,
    pub s_npca_factor: f64,
    pub ratio: f64,
}

pub fn ratio_factors(occ: &OccupancyPair, l: f64) -> Result<RatioFactors> {
    Ok(RatioFactors {
        p1: occ.p1(),
        p2: occ.p2(),
        l,
        s_leg_factor: legacy_throughput(1.0, occ).total_bps,
        s_npca_star_factor: npca_classic_throughput(1.0, occ).total_bps,
        s_npca_factor: npca_overhead_total(1.0, occ, l)?,
        ratio: throughput_ratio(occ, l)?,
    })
}

/// Ratio for equal occupancy `p` on both channels.
pub fn balanced_ratio(p: f64, l: f64) -> Result<f64> {
    if !(p.is_finite() && (0.0..1.0).contains(&p)) {
        return Err(ModelError::OutOfRange {
            name: "p",
            value: p,
            bound: "[0, 1)",
        });
    }
    if !(l.is_finite() && l >= 1.0) {
        return Err(ModelError::InvalidOverhead(l));
    }
    Ok((p + 1.0) / (l * p + 1.0) + p * (p + 1.0) / ((l + p) * (2.0 - p)))
}

/// Bisects `f` on `[lo, hi]`, which must bracket a sign change.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = f(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Equal-occupancy level at which NPCA and legacy break even.
///
/// Scans `(0, 1)` for the first sign change of `balanced_ratio - 1` and
/// refines it by bisection. `None` when the ratio never crosses one (e.g.
/// free switching, where NPCA is never worse).
pub fn crossover_threshold(l: f64) -> Result<Option<f64>> {
    if !(l.is_finite() && l >= 1.0) {
        return Err(ModelError::InvalidOverhead(l));
    }
    let g = |p: f64| balanced_ratio(p, l).map(|r| r - 1.0).unwrap_or(f64::NAN);
    let step = 1.0 / SCAN_POINTS as f64;
    let mut prev_p = step;
    let mut prev = g(prev_p);
    for i in 2..SCAN_POINTS {
        let p = i as f64 * step;
        let cur = g(p);
        if prev != 0.0 && cur != 0.0 && (prev < 0.0) != (cur < 0.0) {
            return Ok(Some(bisect(g, prev_p, p, CROSSOVER_TOLERANCE)));
        }
        prev_p = p;
        prev = cur;
    }
    Ok(None)
}

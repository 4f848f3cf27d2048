//! Two-channel throughput: legacy bonding, classic NPCA, and NPCA with a
//! channel-switching cost.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// OBSS occupancy of the primary (`p1`) and non-primary (`p2`) channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OccupancyPair {
    p1: f64,
    p2: f64,
}

impl OccupancyPair {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        if !(p1.is_finite() && (0.0..=1.0).contains(&p1)) {
            return Err(ModelError::OutOfRange {
                name: "p1",
                value: p1,
                bound: "[0, 1)",
            });
        }
        if p1 == 1.0 {
            return Err(ModelError::Singular);
        }
        if !(p2.is_finite() && (0.0..=1.0).contains(&p2)) {
            return Err(ModelError::OutOfRange {
                name: "p2",
                value: p2,
                bound: "[0, 1]",
            });
        }
        Ok(OccupancyPair { p1, p2 })
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelTag {
    Legacy,
    NpcaClassic,
    NpcaOverhead,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputReport {
    pub model: ModelTag,
    pub primary_bps: f64,
    pub secondary_bps: f64,
    pub total_bps: f64,
}

impl ThroughputReport {
    fn new(model: ModelTag, primary_bps: f64, secondary_bps: f64) -> Self {
        ThroughputReport {
            model,
            primary_bps,
            secondary_bps,
            total_bps: primary_bps + secondary_bps,
        }
    }
}

fn check_overhead(l: f64) -> Result<()> {
    if l.is_finite() && l >= 1.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidOverhead(l))
    }
}

/// Legacy two-channel bonding: the secondary only carries duplicates of
/// primary transmissions, when it happens to be idle.
pub fn legacy_throughput(s_p1: f64, occ: &OccupancyPair) -> ThroughputReport {
    let th1 = s_p1;
    let th2 = s_p1 * (1.0 - occ.p2);
    ThroughputReport::new(ModelTag::Legacy, th1, th2)
}

/// NPCA without switching cost: legacy throughput plus transmissions on
/// the secondary while the primary is held by OBSS.
pub fn npca_classic_throughput(s_p1: f64, occ: &OccupancyPair) -> ThroughputReport {
    let (w1, w2) = npca_components(s_p1, occ);
    ThroughputReport::new(ModelTag::NpcaClassic, w1, w2)
}

fn npca_components(s_p1: f64, occ: &OccupancyPair) -> (f64, f64) {
    let (p1, p2) = (occ.p1, occ.p2);
    let w1 = s_p1 * (2.0 - p2);
    let w2 = s_p1 * (p1 / (1.0 - p1)) * (1.0 - p2);
    (w1, w2)
}

/// Probability that a transmission lands on channel 1 / channel 2.
pub fn channel_access_probs(occ: &OccupancyPair) -> Result<(f64, f64)> {
    let (p1, p2) = (occ.p1, occ.p2);
    let free = 1.0 - p1 * p2;
    if free <= 0.0 {
        return Err(ModelError::NoTransmission);
    }
    Ok(((1.0 - p1) / free, (p1 - p1 * p2) / free))
}

/// Column-stochastic 2x2 matrix; `cols[j][i]` is the probability of moving
/// from channel `j` to channel `i` on the next transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionMatrix {
    cols: [[f64; 2]; 2],
}

impl TransitionMatrix {
    pub fn from_columns(cols: [[f64; 2]; 2]) -> Self {
        TransitionMatrix { cols }
    }

    pub fn entry(&self, to: usize, from: usize) -> f64 {
        self.cols[from][to]
    }

    pub fn column(&self, from: usize) -> [f64; 2] {
        self.cols[from]
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.cols[0][0] * v[0] + self.cols[1][0] * v[1],
            self.cols[0][1] * v[0] + self.cols[1][1] * v[1],
        ]
    }
}

/// Channel choices are independent across transmissions, so both columns
/// equal the per-transmission access probabilities.
pub fn transition_matrix(occ: &OccupancyPair) -> Result<TransitionMatrix> {
    let (a, b) = channel_access_probs(occ)?;
    Ok(TransitionMatrix::from_columns([[a, b], [a, b]]))
}

/// Iterates `P(t+1) = T P(t)` from `start` until successive iterates agree
/// to within `tol`. Returns the final vector and the number of steps taken.
pub fn power_iterate(
    t: &TransitionMatrix,
    start: [f64; 2],
    tol: f64,
    max_steps: usize,
) -> ([f64; 2], usize) {
    let mut v = start;
    for step in 1..=max_steps {
        let next = t.apply(v);
        let delta = (next[0] - v[0]).abs().max((next[1] - v[1]).abs());
        v = next;
        if delta <= tol {
            return (v, step);
        }
    }
    (v, max_steps)
}

/// Stationary transmit-channel distribution `(Pb1, Pb2)`.
///
/// For a two-state chain the balance equation gives
/// `Pb1 = T[0][1] / (T[0][1] + T[1][0])` directly; power iteration from the
/// primary channel is run alongside it as a cross-check.
pub fn steady_state(t: &TransitionMatrix) -> (f64, f64) {
    let into_1 = t.entry(0, 1);
    let out_of_1 = t.entry(1, 0);
    let closed = if into_1 + out_of_1 == 0.0 {
        // both channels absorbing: stay where we started
        (1.0, 0.0)
    } else {
        let pb1 = into_1 / (into_1 + out_of_1);
        (pb1, 1.0 - pb1)
    };
    let (iterated, _) = power_iterate(t, [1.0, 0.0], 1e-15, 10_000);
    debug_assert!(
        (iterated[0] - closed.0).abs() < 1e-9 || into_1 + out_of_1 < 1e-6,
        "power iteration {iterated:?} disagrees with closed form {closed:?}"
    );
    closed
}

/// Probability that a transmission on channel 1 (resp. 2) follows one on
/// the other channel and so pays the switching cost.
pub fn overhead_probs(pb1: f64, pb2: f64) -> (f64, f64) {
    let total = pb1 + pb2;
    (pb2 / total, pb1 / total)
}

/// Per-channel throughput discount for switching cost.
///
/// A channel-k transmission takes `l` times as long with probability `po_k`,
/// so its throughput shrinks by the expected inflation:
/// `c1 = 1 / (l Po1 + Po2)`, `c2 = 1 / (l Po2 + Po1)` (with `Po1 + Po2 = 1`).
pub fn overhead_coefficients(po1: f64, po2: f64, l: f64) -> Result<(f64, f64)> {
    check_overhead(l)?;
    let total = po1 + po2;
    Ok((total / (l * po1 + po2), total / (l * po2 + po1)))
}

/// NPCA throughput with switching cost, composed channel by channel as
/// `c1 W1 + c2 W2`.
pub fn npca_overhead_throughput(
    s_p1: f64,
    occ: &OccupancyPair,
    l: f64,
) -> Result<ThroughputReport> {
    check_overhead(l)?;
    let (w1, w2) = npca_components(s_p1, occ);
    let t = transition_matrix(occ)?;
    let (pb1, pb2) = steady_state(&t);
    let (po1, po2) = overhead_probs(pb1, pb2);
    let (c1, c2) = overhead_coefficients(po1, po2, l)?;
    Ok(ThroughputReport::new(
        ModelTag::NpcaOverhead,
        c1 * w1,
        c2 * w2,
    ))
}

/// Expanded closed form of the overhead-aware NPCA total.
pub fn npca_overhead_total(s_p1: f64, occ: &OccupancyPair, l: f64) -> Result<f64> {
    check_overhead(l)?;
    let (p1, p2) = (occ.p1, occ.p2);
    let free = 1.0 - p1 * p2;
    let first = free * (2.0 - p2) / (l * p1 * (1.0 - p2) + 1.0 - p1);
    let second = free * p1 * (1.0 - p2) / ((p1 * (1.0 - p2) + l * (1.0 - p1)) * (1.0 - p1));
    Ok(s_p1 * (first + second))
}

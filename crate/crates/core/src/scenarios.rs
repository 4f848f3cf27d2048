//! Experiment harness: occupancy sweeps, the simulator-vs-model grid and the
//! randomized-occupancy policy comparison.
//!
//! Every experiment is a list of independent runs executed with rayon and
//! collected in input order, so results never depend on scheduling.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::analytic::{
    crossover_threshold, legacy_throughput, npca_overhead_total, throughput_ratio,
    throughput_vs_occupancy, BianchiModel, ModelTag, OccupancyPair,
};
use crate::error::SimError;
use crate::sim::{measured_throughput, AccessPolicy, ChannelId, SimConfig, SimMetrics, SimWorld};

/// Overhead factors swept by default.
pub const DEFAULT_L_VALUES: [f64; 3] = [1.8, 2.0, 2.2];

/// Occupancy grid of the validation experiment.
pub const VALIDATION_OCCUPANCIES: [f64; 8] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8];

/// Idle, medium and busy occupancy classes of the random-occupancy experiment.
pub const OCCUPANCY_CLASSES: [(f64, f64); 3] = [(0.1, 0.35), (0.35, 0.6), (0.6, 0.85)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Scenario {
    /// Busy primary, quiet secondary: `p2 = 0.2`, `p1` in `[0.6, 0.8]`.
    A,
    /// Quiet primary, busy secondary: `p2 = 0.8`, `p1` in `[0.1, 0.3]`.
    B,
    /// Balanced load, `p1 = p2`.
    C,
}

impl Scenario {
    pub fn label(&self) -> &'static str {
        match self {
            Scenario::A => "a",
            Scenario::B => "b",
            Scenario::C => "c",
        }
    }

    pub fn default_step(&self) -> f64 {
        match self {
            Scenario::A | Scenario::B => 0.02,
            Scenario::C => 0.05,
        }
    }

    /// `(p1, p2)` points visited with the given increment.
    pub fn points(&self, step: f64) -> Vec<(f64, f64)> {
        match self {
            Scenario::A => grid(0.6, 0.8, step).into_iter().map(|p| (p, 0.2)).collect(),
            Scenario::B => grid(0.1, 0.3, step).into_iter().map(|p| (p, 0.8)).collect(),
            Scenario::C => grid(step, 1.0 - 1e-9, step)
                .into_iter()
                .map(|p| (p, p))
                .collect(),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(Scenario::A),
            "b" => Ok(Scenario::B),
            "c" => Ok(Scenario::C),
            other => Err(format!("unknown scenario '{other}' (expected a, b or c)")),
        }
    }
}

/// Inclusive grid from `lo` to `hi`, built from integer steps and rounded
/// to 1e-9 so that printed values stay clean.
fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n)
        .map(|i| ((lo + i as f64 * step) * 1e9).round() / 1e9)
        .collect()
}

/// Seed of replication `r` derived from a base seed.
pub fn replication_seed(base: u64, r: u32) -> u64 {
    base.wrapping_add(r as u64)
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub scenario: Scenario,
    pub l_values: Vec<f64>,
    pub grid_step: f64,
    pub replications: u32,
    pub base: SimConfig,
}

impl SweepSpec {
    /// Default sweep: 5 replications of 10 s each.
    pub fn new(scenario: Scenario, base: SimConfig) -> Self {
        SweepSpec {
            scenario,
            l_values: DEFAULT_L_VALUES.to_vec(),
            grid_step: scenario.default_step(),
            replications: 5,
            base: base.with_sim_time(10.0),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.replications < 1 {
            return Err(SimError::Config("replications must be at least 1".into()));
        }
        if !(self.grid_step > 0.0 && self.grid_step < 1.0) {
            return Err(SimError::Config(format!(
                "grid_step = {} must lie in (0, 1)",
                self.grid_step
            )));
        }
        if self.l_values.is_empty() {
            return Err(SimError::Config("at least one l value is required".into()));
        }
        for &l in &self.l_values {
            self.base.clone().with_l(l).validate()?;
        }
        let points = self.scenario.points(self.grid_step);
        if points.is_empty() {
            return Err(SimError::Config("grid is empty".into()));
        }
        for (p1, p2) in points {
            if !(0.0..1.0).contains(&p1) || !(0.0..1.0).contains(&p2) {
                return Err(SimError::Config(format!(
                    "grid point ({p1}, {p2}) outside [0, 1)"
                )));
            }
        }
        self.base.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub p1: f64,
    pub p2: f64,
    pub l: f64,
    pub analytic_ratio: f64,
    pub sim_legacy_mbps: f64,
    pub sim_npca_mbps: f64,
    pub sim_ratio: f64,
    /// Half-width of the 95% interval of the per-replication ratio.
    pub ci_halfwidth: f64,
}

/// Sample mean and 95% Student-t half-width.
pub fn mean_ci95(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975);
    (mean, t * (var / n as f64).sqrt())
}

fn total_mbps(m: &SimMetrics) -> f64 {
    measured_throughput(m, m.sim_time_s()).total_mbps
}

fn simulate(config: SimConfig) -> Result<f64, SimError> {
    let mut world = SimWorld::new(&config)?;
    world.run();
    Ok(total_mbps(world.metrics()))
}

/// Per-replication Legacy and NPCA throughput at each point, Legacy runs
/// shared across all `l` since they never switch.
struct PairedRuns {
    legacy: Vec<Vec<f64>>,
    npca: Vec<Vec<Vec<f64>>>,
}

fn paired_runs(
    base: &SimConfig,
    points: &[(f64, f64)],
    l_values: &[f64],
    replications: u32,
) -> Result<PairedRuns, SimError> {
    #[derive(Clone, Copy)]
    struct Job {
        point: usize,
        l: Option<usize>,
        rep: u32,
    }
    let mut jobs = Vec::new();
    for point in 0..points.len() {
        for rep in 0..replications {
            jobs.push(Job {
                point,
                l: None,
                rep,
            });
            for li in 0..l_values.len() {
                jobs.push(Job {
                    point,
                    l: Some(li),
                    rep,
                });
            }
        }
    }
    let results: Vec<f64> = jobs
        .par_iter()
        .map(|job| {
            let (p1, p2) = points[job.point];
            let mut config = base
                .clone()
                .with_occupancy(p1, p2)
                .with_seed(replication_seed(base.seed, job.rep));
            config = match job.l {
                None => config.with_policy(AccessPolicy::Legacy),
                Some(li) => config.with_l(l_values[li]).with_policy(AccessPolicy::Npca),
            };
            simulate(config)
        })
        .collect::<Result<_, _>>()?;

    let reps = replications as usize;
    let mut legacy = vec![Vec::with_capacity(reps); points.len()];
    let mut npca = vec![vec![Vec::with_capacity(reps); l_values.len()]; points.len()];
    for (job, mbps) in jobs.iter().zip(results) {
        match job.l {
            None => legacy[job.point].push(mbps),
            Some(li) => npca[job.point][li].push(mbps),
        }
    }
    Ok(PairedRuns { legacy, npca })
}

/// Analytic and simulated NPCA/legacy ratios over one scenario. Rows are
/// ordered by `l`, then by grid point.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<ScenarioResult>, SimError> {
    spec.validate()?;
    let points = spec.scenario.points(spec.grid_step);
    let runs = paired_runs(&spec.base, &points, &spec.l_values, spec.replications)?;

    let mut rows = Vec::with_capacity(points.len() * spec.l_values.len());
    for (li, &l) in spec.l_values.iter().enumerate() {
        for (pi, &(p1, p2)) in points.iter().enumerate() {
            let occ = OccupancyPair::new(p1, p2)?;
            let legacy = &runs.legacy[pi];
            let npca = &runs.npca[pi][li];
            let ratios: Vec<f64> = legacy
                .iter()
                .zip(npca)
                .map(|(&a, &b)| if a > 0.0 { b / a } else { 0.0 })
                .collect();
            let (leg_mean, _) = mean_ci95(legacy);
            let (npca_mean, _) = mean_ci95(npca);
            let (_, ci) = mean_ci95(&ratios);
            rows.push(ScenarioResult {
                p1,
                p2,
                l,
                analytic_ratio: throughput_ratio(&occ, l)?,
                sim_legacy_mbps: leg_mean,
                sim_npca_mbps: npca_mean,
                sim_ratio: if leg_mean > 0.0 {
                    npca_mean / leg_mean
                } else {
                    0.0
                },
                ci_halfwidth: ci,
            });
        }
    }
    Ok(rows)
}

/// Where the simulated ratio of a balanced sweep last rises through 1,
/// by linear interpolation between neighbouring grid points.
pub fn sim_crossover(rows: &[ScenarioResult], l: f64) -> Option<f64> {
    let curve: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| (r.l - l).abs() < 1e-12)
        .map(|r| (r.p1, r.sim_ratio))
        .collect();
    let i = curve.iter().rposition(|&(_, r)| r < 1.0)?;
    let &(x1, y1) = curve.get(i + 1)?;
    let (x0, y0) = curve[i];
    Some(x0 + (1.0 - y0) * (x1 - x0) / (y1 - y0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossoverRow {
    pub l: f64,
    pub analytic_crossover: Option<f64>,
    pub sim_crossover: Option<f64>,
}

/// Analytic and simulated break-even occupancy per `l` of a balanced sweep.
pub fn crossover_table(
    rows: &[ScenarioResult],
    l_values: &[f64],
) -> Result<Vec<CrossoverRow>, SimError> {
    l_values
        .iter()
        .map(|&l| {
            Ok(CrossoverRow {
                l,
                analytic_crossover: crossover_threshold(l)?,
                sim_crossover: sim_crossover(rows, l),
            })
        })
        .collect()
}

/// Saturation throughput of the base configuration, in Mbit/s.
pub fn base_saturation_mbps(base: &SimConfig) -> Result<f64, SimError> {
    let model = BianchiModel::solve(
        base.n_stations,
        base.cw_min,
        base.cw_max,
        base.payload_bits(),
        &base.mac,
    )?;
    Ok(model.s_bps / 1e6)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationRow {
    pub p1: f64,
    pub p2: f64,
    pub l: f64,
    pub model: ModelTag,
    pub sim_mbps: f64,
    pub analytic_mbps: f64,
    /// `|sim - analytic| / analytic`.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub rows: Vec<ValidationRow>,
    pub worst: ValidationRow,
}

impl ValidationReport {
    pub fn worst_for(&self, model: ModelTag) -> Option<&ValidationRow> {
        self.rows
            .iter()
            .filter(|r| r.model == model)
            .max_by(|a, b| a.deviation.total_cmp(&b.deviation))
    }
}

/// Simulated Legacy and NPCA totals against the closed forms over the given
/// occupancies and overhead factors.
pub fn validation_rows(
    base: &SimConfig,
    occupancies: &[f64],
    l_values: &[f64],
    replications: u32,
) -> Result<Vec<ValidationRow>, SimError> {
    if replications < 1 {
        return Err(SimError::Config("replications must be at least 1".into()));
    }
    base.validate()?;
    let s = base_saturation_mbps(base)?;
    let points: Vec<(f64, f64)> = occupancies
        .iter()
        .flat_map(|&p1| occupancies.iter().map(move |&p2| (p1, p2)))
        .collect();
    let runs = paired_runs(base, &points, l_values, replications)?;

    let deviation = |sim: f64, an: f64| if an > 0.0 { (sim - an).abs() / an } else { sim };
    let mut rows = Vec::with_capacity(points.len() * l_values.len() * 2);
    for (pi, &(p1, p2)) in points.iter().enumerate() {
        let occ = OccupancyPair::new(p1, p2)?;
        let s1 = throughput_vs_occupancy(s, p1);
        let leg_an = legacy_throughput(s1, &occ).total_bps;
        let (leg_sim, _) = mean_ci95(&runs.legacy[pi]);
        for (li, &l) in l_values.iter().enumerate() {
            rows.push(ValidationRow {
                p1,
                p2,
                l,
                model: ModelTag::Legacy,
                sim_mbps: leg_sim,
                analytic_mbps: leg_an,
                deviation: deviation(leg_sim, leg_an),
            });
            let npca_an = npca_overhead_total(s1, &occ, l)?;
            let (npca_sim, _) = mean_ci95(&runs.npca[pi][li]);
            rows.push(ValidationRow {
                p1,
                p2,
                l,
                model: ModelTag::NpcaOverhead,
                sim_mbps: npca_sim,
                analytic_mbps: npca_an,
                deviation: deviation(npca_sim, npca_an),
            });
        }
    }
    Ok(rows)
}

/// The full grid: `{0.1, ..., 0.8}^2 x {1.8, 2.0, 2.2}`, both models.
pub fn validation_grid(base: &SimConfig, replications: u32) -> Result<ValidationReport, SimError> {
    let rows = validation_rows(
        base,
        &VALIDATION_OCCUPANCIES,
        &DEFAULT_L_VALUES,
        replications,
    )?;
    let worst = *rows
        .iter()
        .max_by(|a, b| a.deviation.total_cmp(&b.deviation))
        .expect("grid is non-empty");
    Ok(ValidationReport { rows, worst })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomOccupancySpec {
    pub period_s: f64,
    pub n_periods: u32,
    pub occupancy_classes: Vec<(f64, f64)>,
    pub l: f64,
    pub thre1: f64,
    pub k1: u64,
    pub seed: u64,
    pub base: SimConfig,
}

impl RandomOccupancySpec {
    /// 200 one-second periods at `l = 2.2` with the default hybrid parameters.
    pub fn new(base: SimConfig) -> Self {
        RandomOccupancySpec {
            period_s: 1.0,
            n_periods: 200,
            occupancy_classes: OCCUPANCY_CLASSES.to_vec(),
            l: 2.2,
            thre1: AccessPolicy::DEFAULT_THRE1,
            k1: AccessPolicy::DEFAULT_K1,
            seed: base.seed,
            base,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.period_s.is_finite() && self.period_s > 0.0) {
            return Err(SimError::Config(format!(
                "period_s = {} must be positive",
                self.period_s
            )));
        }
        if self.n_periods < 1 {
            return Err(SimError::Config("n_periods must be at least 1".into()));
        }
        if self.occupancy_classes.is_empty() {
            return Err(SimError::Config(
                "at least one occupancy class is required".into(),
            ));
        }
        for &(lo, hi) in &self.occupancy_classes {
            if !(0.0 <= lo && lo < hi && hi <= 1.0) {
                return Err(SimError::Config(format!(
                    "bad occupancy class [{lo}, {hi})"
                )));
            }
        }
        self.config(self.hybrid()).validate()
    }

    pub fn hybrid(&self) -> AccessPolicy {
        AccessPolicy::Hybrid {
            thre1: self.thre1,
            k1: self.k1,
        }
    }

    fn config(&self, policy: AccessPolicy) -> SimConfig {
        self.base
            .clone()
            .with_sim_time(self.period_s * self.n_periods as f64)
            .with_l(self.l)
            .with_seed(self.seed)
            .with_policy(policy)
    }

    /// Per-period `(p1, p2)`: a class picked uniformly, then a value uniform
    /// within it, independently per channel and period.
    pub fn schedule(&self) -> Vec<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(3);
        let classes = &self.occupancy_classes;
        let draw = |rng: &mut ChaCha8Rng| {
            let (lo, hi) = classes[rng.random_range(0..classes.len())];
            rng.random_range(lo..hi)
        };
        (0..self.n_periods)
            .map(|_| {
                let p1 = draw(&mut rng);
                let p2 = draw(&mut rng);
                (p1, p2)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolicyComparison {
    pub legacy_mbps: f64,
    pub npca_mbps: f64,
    pub hybrid_mbps: f64,
}

impl PolicyComparison {
    pub fn rows(&self) -> [(&'static str, f64); 3] {
        [
            ("legacy", self.legacy_mbps),
            ("npca", self.npca_mbps),
            ("hybrid", self.hybrid_mbps),
        ]
    }
}

/// Runs one policy through a period schedule, retargeting OBSS occupancy at
/// each period boundary.
pub fn run_schedule(
    config: &SimConfig,
    period_s: f64,
    schedule: &[(f64, f64)],
) -> Result<SimMetrics, SimError> {
    let (p1, p2) = schedule.first().copied().unwrap_or((0.0, 0.0));
    let mut world = SimWorld::new(&config.clone().with_occupancy(p1, p2))?;
    for (i, &(p1, p2)) in schedule.iter().enumerate() {
        let start = ((i as f64 * period_s) * 1e6 / config.mac.slot_us).floor() as u64;
        world.run_until(start);
        world.set_occupancy(ChannelId::Primary, p1)?;
        world.set_occupancy(ChannelId::Secondary, p2)?;
    }
    world.run();
    Ok(world.into_metrics())
}

/// Legacy, NPCA and Hybrid over the same occupancy schedule and OBSS seeds.
pub fn run_random_occupancy(spec: &RandomOccupancySpec) -> Result<PolicyComparison, SimError> {
    spec.validate()?;
    let schedule = spec.schedule();
    let policies = [AccessPolicy::Legacy, AccessPolicy::Npca, spec.hybrid()];
    let mbps: Vec<f64> = policies
        .par_iter()
        .map(|&policy| {
            let m = run_schedule(&spec.config(policy), spec.period_s, &schedule)?;
            Ok(total_mbps(&m))
        })
        .collect::<Result<_, SimError>>()?;
    Ok(PolicyComparison {
        legacy_mbps: mbps[0],
        npca_mbps: mbps[1],
        hybrid_mbps: mbps[2],
    })
}

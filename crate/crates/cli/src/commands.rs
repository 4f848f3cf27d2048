use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use npca_core::analytic::{crossover_threshold, ratio_factors, OccupancyPair, RatioFactors};
use npca_core::io::{
    ensure_writable_dir, read_config, write_csv, IoError, MetricsRow, RunManifest,
};
use npca_core::scenarios::{
    crossover_table, mean_ci95, replication_seed, run_random_occupancy, run_sweep, validation_grid,
    RandomOccupancySpec, SweepSpec,
};
use npca_core::{run_sim, AccessPolicy, ModelError, SimConfig, SimError};
use serde::Serialize;

use crate::{AnalyticArgs, HybridArgs, PolicyArg, ScenarioArg, SimulateArgs, SweepArgs};

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Config(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Parse(_) | IoError::Config(_) => CliError::Config(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(_) => CliError::Config(e.to_string()),
            SimError::Model(_) => CliError::Runtime(e.to_string()),
        }
    }
}

fn usage(e: ModelError) -> CliError {
    CliError::Usage(e.to_string())
}

fn base_config(path: Option<&Path>) -> Result<SimConfig, CliError> {
    match path {
        Some(p) => Ok(read_config(p)?),
        None => Ok(SimConfig::table_defaults()),
    }
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn finish(
    mut manifest: RunManifest,
    dir: &Path,
    outputs: &[PathBuf],
    started: Instant,
) -> Result<(), CliError> {
    manifest.outputs = outputs.iter().map(|p| file_name(p)).collect();
    manifest.wall_clock_s = started.elapsed().as_secs_f64();
    let path = manifest.write(dir)?;
    for p in outputs {
        println!("wrote {}", p.display());
    }
    println!("wrote {}", path.display());
    Ok(())
}

/// Parses `lo:hi:step` into grid values.
fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("--sweep expects lo:hi:step, got '{spec}'"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let [lo, hi, step] = parts[..] else {
        return Err(bad());
    };
    if !(step > 0.0 && lo <= hi) {
        return Err(bad());
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|i| ((lo + i as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

pub fn analytic(args: AnalyticArgs) -> Result<(), CliError> {
    if args.l.is_empty() {
        return Err(CliError::Usage("at least one --l value is required".into()));
    }
    let points: Vec<(f64, f64)> = match &args.sweep {
        None => vec![(args.p1, args.p2)],
        Some(spec) => {
            let g = parse_grid(spec)?;
            g.iter()
                .flat_map(|&p1| g.iter().map(move |&p2| (p1, p2)))
                .collect()
        }
    };
    let mut rows: Vec<RatioFactors> = Vec::new();
    for &l in &args.l {
        for &(p1, p2) in &points {
            let occ = OccupancyPair::new(p1, p2).map_err(usage)?;
            rows.push(ratio_factors(&occ, l).map_err(usage)?);
        }
    }
    if let Some(dir) = &args.out {
        ensure_writable_dir(dir)?;
    }

    println!(
        "{:>6} {:>6} {:>5} {:>10} {:>10} {:>10} {:>8}",
        "p1", "p2", "l", "legacy", "npca*", "npca", "ratio"
    );
    for r in &rows {
        println!(
            "{:>6.3} {:>6.3} {:>5.2} {:>10.6} {:>10.6} {:>10.6} {:>8.4}",
            r.p1, r.p2, r.l, r.s_leg_factor, r.s_npca_star_factor, r.s_npca_factor, r.ratio
        );
    }
    for &l in &args.l {
        match crossover_threshold(l).map_err(usage)? {
            Some(p) => println!("crossover l={l}: p* = {p:.6}"),
            None => println!("crossover l={l}: none (NPCA never below legacy)"),
        }
    }

    if let Some(dir) = &args.out {
        let started = Instant::now();
        let path = dir.join("analytic.csv");
        write_csv(&path, &rows)?;
        finish(RunManifest::new("analytic", None), dir, &[path], started)?;
    }
    Ok(())
}

fn apply_policy(
    config: &mut SimConfig,
    policy: Option<PolicyArg>,
    thre1: Option<f64>,
    k1: Option<u64>,
) -> Result<(), CliError> {
    let name = policy.map(PolicyArg::name).unwrap_or(config.policy.name());
    let (cur_thre1, cur_k1) = match config.policy {
        AccessPolicy::Hybrid { thre1, k1 } => (Some(thre1), Some(k1)),
        _ => (None, None),
    };
    config.policy = npca_core::io::parse_policy(name, thre1.or(cur_thre1), k1.or(cur_k1))
        .map_err(CliError::Usage)?;
    Ok(())
}

pub fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let mut config = base_config(args.config.as_deref())?;
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(p) = args.p1 {
        config.obss_p1 = p;
    }
    if let Some(p) = args.p2 {
        config.obss_p2 = p;
    }
    if let Some(l) = args.l {
        config.l = l;
    }
    if let Some(t) = args.time {
        config.sim_time_s = t;
    }
    apply_policy(&mut config, args.policy, args.thre1, args.k1)?;
    config.validate()?;
    ensure_writable_dir(&args.out)?;

    let started = Instant::now();
    let metrics = run_sim(&config)?;
    let row = MetricsRow::new(&config, &metrics);
    println!(
        "{}: ch1 {:.4} Mbps, ch2 {:.4} Mbps, total {:.4} Mbps, {} switches",
        row.policy, row.ch1_mbps, row.ch2_mbps, row.total_mbps, row.switch_count
    );
    let path = args.out.join("metrics.csv");
    write_csv(&path, &[row])?;
    finish(
        RunManifest::new("simulate", Some(&config)),
        &args.out,
        &[path],
        started,
    )
}

fn l_tag(l: f64) -> String {
    format!("{l:.2}")
}

pub fn sweep(args: SweepArgs) -> Result<(), CliError> {
    if args.scenario == ScenarioArg::RandomOccupancy {
        return hybrid_experiment(HybridArgs {
            seeds: args.seeds,
            seed: args.seed,
            periods: 200,
            period: 1.0,
            l: 2.2,
            thre1: None,
            k1: None,
            config: args.config,
            out: args.out,
        });
    }
    if args.seeds < 1 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }
    let mut base = base_config(args.config.as_deref())?.with_sim_time(args.time);
    if let Some(s) = args.seed {
        base.seed = s;
    }
    base.validate()?;
    ensure_writable_dir(&args.out)?;
    let started = Instant::now();
    let mut outputs = Vec::new();

    match args.scenario.scenario() {
        Some(scenario) => {
            let mut spec = SweepSpec::new(scenario, base.clone());
            spec.base = base.clone();
            spec.replications = args.seeds;
            if let Some(l) = args.l {
                spec.l_values = l;
            }
            if let Some(step) = args.step {
                spec.grid_step = step;
            }
            let rows = run_sweep(&spec)?;
            for &l in &spec.l_values {
                let subset: Vec<_> = rows.iter().filter(|r| r.l == l).copied().collect();
                let path = args
                    .out
                    .join(format!("scenario_{scenario}_l{}.csv", l_tag(l)));
                write_csv(&path, &subset)?;
                outputs.push(path);
                for r in &subset {
                    println!(
                        "{scenario} p1={:.2} p2={:.2} l={:.2} analytic {:.4} sim {:.4} ± {:.4}",
                        r.p1, r.p2, r.l, r.analytic_ratio, r.sim_ratio, r.ci_halfwidth
                    );
                }
            }
            if scenario == npca_core::scenarios::Scenario::C {
                let table = crossover_table(&rows, &spec.l_values)?;
                let path = args.out.join("scenario_c_crossover.csv");
                write_csv(&path, &table)?;
                outputs.push(path);
            }
        }
        None => {
            let report = validation_grid(&base, args.seeds)?;
            let path = args.out.join("validation.csv");
            write_csv(&path, &report.rows)?;
            outputs.push(path);
            let worst: Vec<_> = [
                npca_core::ModelTag::Legacy,
                npca_core::ModelTag::NpcaOverhead,
            ]
            .iter()
            .filter_map(|&m| report.worst_for(m).copied())
            .collect();
            for w in &worst {
                println!(
                    "worst {:?}: p1={} p2={} l={} sim {:.4} vs {:.4} Mbps ({:.1}%)",
                    w.model,
                    w.p1,
                    w.p2,
                    w.l,
                    w.sim_mbps,
                    w.analytic_mbps,
                    w.deviation * 100.0
                );
            }
            let path = args.out.join("validation_worst.csv");
            write_csv(&path, &worst)?;
            outputs.push(path);
        }
    }
    finish(
        RunManifest::new("sweep", Some(&base)),
        &args.out,
        &outputs,
        started,
    )
}

#[derive(Serialize)]
struct SummaryRow {
    model: &'static str,
    throughput_mbps: f64,
}

#[derive(Serialize)]
struct SeedRow {
    seed: u64,
    legacy_mbps: f64,
    npca_mbps: f64,
    hybrid_mbps: f64,
}

pub fn hybrid_experiment(args: HybridArgs) -> Result<(), CliError> {
    if args.seeds < 1 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }
    let mut base = base_config(args.config.as_deref())?;
    if let Some(s) = args.seed {
        base.seed = s;
    }
    let mut spec = RandomOccupancySpec::new(base.clone());
    spec.n_periods = args.periods;
    spec.period_s = args.period;
    spec.l = args.l;
    if let Some(t) = args.thre1 {
        spec.thre1 = t;
    }
    if let Some(k) = args.k1 {
        spec.k1 = k;
    }
    spec.validate()?;
    ensure_writable_dir(&args.out)?;
    let started = Instant::now();

    let mut per_seed = Vec::new();
    for r in 0..args.seeds {
        let seed = replication_seed(base.seed, r);
        let c = run_random_occupancy(&spec.clone().with_seed(seed))?;
        per_seed.push(SeedRow {
            seed,
            legacy_mbps: c.legacy_mbps,
            npca_mbps: c.npca_mbps,
            hybrid_mbps: c.hybrid_mbps,
        });
    }
    let mean = |f: fn(&SeedRow) -> f64| mean_ci95(&per_seed.iter().map(f).collect::<Vec<_>>()).0;
    let summary = [
        SummaryRow {
            model: "legacy",
            throughput_mbps: mean(|r| r.legacy_mbps),
        },
        SummaryRow {
            model: "npca",
            throughput_mbps: mean(|r| r.npca_mbps),
        },
        SummaryRow {
            model: "hybrid",
            throughput_mbps: mean(|r| r.hybrid_mbps),
        },
    ];
    for s in &summary {
        println!("{:<8} {:.4} Mbps", s.model, s.throughput_mbps);
    }
    let summary_path = args.out.join("random_occupancy_summary.csv");
    write_csv(&summary_path, &summary)?;
    let runs_path = args.out.join("random_occupancy_runs.csv");
    write_csv(&runs_path, &per_seed)?;
    let config = base.with_l(spec.l).with_policy(spec.hybrid());
    finish(
        RunManifest::new("hybrid-experiment", Some(&config)),
        &args.out,
        &[summary_path, runs_path],
        started,
    )
}

impl ScenarioArg {
    fn scenario(self) -> Option<npca_core::scenarios::Scenario> {
        use npca_core::scenarios::Scenario;
        match self {
            ScenarioArg::A => Some(Scenario::A),
            ScenarioArg::B => Some(Scenario::B),
            ScenarioArg::C => Some(Scenario::C),
            ScenarioArg::Validation | ScenarioArg::RandomOccupancy => None,
        }
    }
}

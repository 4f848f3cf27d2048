//! Config files, CSV output and run manifests.
//!
//! Configs are flat TOML with one key per simulation parameter. CSVs are
//! comma separated with a header row and LF line endings; floats use the
//! shortest representation that round-trips, so identical runs give
//! byte-identical files. Anything time dependent goes in the manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::MacTiming;
use crate::error::SimError;
use crate::sim::{ampdu_airtime_us, measured_throughput, AccessPolicy, SimConfig, SimMetrics};

pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error(transparent)]
    Config(#[from] SimError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("non-finite value {value} in column '{column}' (row {row})")]
    NonFinite {
        column: String,
        row: usize,
        value: String,
    },
    #[error("cannot serialize manifest: {0}")]
    Manifest(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// On-disk form of [`SimConfig`]. The PPDU payload airtime is not stored;
/// it follows from `ampdu_bytes` and `phy_rate_mbps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub sim_time_s: f64,
    pub n_stations: u32,
    pub packet_bytes: u32,
    pub ampdu_bytes: u32,
    pub phy_rate_mbps: f64,
    pub cw_min: u32,
    pub cw_max: u32,
    pub slot_us: f64,
    pub sifs_us: f64,
    pub difs_us: f64,
    pub phy_header_us: f64,
    pub mac_header_us: f64,
    pub ack_us: f64,
    pub nack_us: f64,
    pub prop_delay_us: f64,
    pub l: f64,
    pub obss_p1: f64,
    pub obss_p2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obss_ppdu_us: Option<f64>,
    pub policy: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thre1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k1: Option<u64>,
    pub seed: u64,
}

/// Parses a policy name; hybrid parameters fall back to the defaults.
pub fn parse_policy(
    name: &str,
    thre1: Option<f64>,
    k1: Option<u64>,
) -> Result<AccessPolicy, String> {
    match name {
        "legacy" => Ok(AccessPolicy::Legacy),
        "npca" => Ok(AccessPolicy::Npca),
        "hybrid" => Ok(AccessPolicy::Hybrid {
            thre1: thre1.unwrap_or(AccessPolicy::DEFAULT_THRE1),
            k1: k1.unwrap_or(AccessPolicy::DEFAULT_K1),
        }),
        other => Err(format!(
            "unknown policy '{other}' (expected legacy, npca or hybrid)"
        )),
    }
}

impl From<&SimConfig> for ConfigFile {
    fn from(c: &SimConfig) -> Self {
        let (thre1, k1) = match c.policy {
            AccessPolicy::Hybrid { thre1, k1 } => (Some(thre1), Some(k1)),
            _ => (None, None),
        };
        ConfigFile {
            sim_time_s: c.sim_time_s,
            n_stations: c.n_stations,
            packet_bytes: c.packet_bytes,
            ampdu_bytes: c.ampdu_bytes,
            phy_rate_mbps: c.phy_rate_mbps,
            cw_min: c.cw_min,
            cw_max: c.cw_max,
            slot_us: c.mac.slot_us,
            sifs_us: c.mac.sifs_us,
            difs_us: c.mac.difs_us,
            phy_header_us: c.mac.phy_header_us,
            mac_header_us: c.mac.mac_header_us,
            ack_us: c.mac.ack_us,
            nack_us: c.mac.nack_us,
            prop_delay_us: c.mac.prop_delay_us,
            l: c.l,
            obss_p1: c.obss_p1,
            obss_p2: c.obss_p2,
            obss_ppdu_us: c.obss_ppdu_us,
            policy: c.policy.name().to_string(),
            thre1,
            k1,
            seed: c.seed,
        }
    }
}

impl ConfigFile {
    pub fn to_config(&self) -> Result<SimConfig, IoError> {
        let policy = parse_policy(&self.policy, self.thre1, self.k1)
            .map_err(|e| IoError::Parse(format!("policy: {e}")))?;
        let mac = MacTiming {
            slot_us: self.slot_us,
            sifs_us: self.sifs_us,
            difs_us: self.difs_us,
            phy_header_us: self.phy_header_us,
            mac_header_us: self.mac_header_us,
            ack_us: self.ack_us,
            nack_us: self.nack_us,
            prop_delay_us: self.prop_delay_us,
            payload_tx_us: ampdu_airtime_us(self.ampdu_bytes, self.phy_rate_mbps),
        };
        let config = SimConfig {
            sim_time_s: self.sim_time_s,
            n_stations: self.n_stations,
            mac,
            cw_min: self.cw_min,
            cw_max: self.cw_max,
            packet_bytes: self.packet_bytes,
            ampdu_bytes: self.ampdu_bytes,
            phy_rate_mbps: self.phy_rate_mbps,
            l: self.l,
            obss_p1: self.obss_p1,
            obss_p2: self.obss_p2,
            obss_ppdu_us: self.obss_ppdu_us,
            policy,
            seed: self.seed,
        };
        config.validate()?;
        Ok(config)
    }
}

pub fn config_to_toml(config: &SimConfig) -> String {
    toml::to_string(&ConfigFile::from(config)).expect("flat config always serializes")
}

/// Parses and validates a config. A missing or malformed key is named in
/// the error.
pub fn config_from_toml(text: &str) -> Result<SimConfig, IoError> {
    let file: ConfigFile =
        toml::from_str(text).map_err(|e| IoError::Parse(e.message().to_string()))?;
    file.to_config()
}

pub fn read_config(path: &Path) -> Result<SimConfig, IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    config_from_toml(&text)
}

pub fn write_config(path: &Path, config: &SimConfig) -> Result<(), IoError> {
    fs::write(path, config_to_toml(config)).map_err(io_err(path))
}

/// Creates `dir` if needed and checks that files can be created in it.
pub fn ensure_writable_dir(dir: &Path) -> Result<(), IoError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let probe = dir.join(".write-check");
    fs::write(&probe, b"").map_err(io_err(&probe))?;
    fs::remove_file(&probe).map_err(io_err(&probe))
}

/// Serializes rows to CSV text, rejecting NaN and infinite cells.
pub fn csv_string<T: Serialize>(rows: &[T]) -> Result<String, IoError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| IoError::Csv(e.into_error().into()))?;
    let text = String::from_utf8(bytes).expect("csv output is utf-8");
    check_finite(&text)?;
    Ok(text)
}

fn check_finite(text: &str) -> Result<(), IoError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        for (column, cell) in header.iter().zip(rec.iter()) {
            if let Ok(v) = cell.parse::<f64>() {
                if !v.is_finite() {
                    return Err(IoError::NonFinite {
                        column: column.to_string(),
                        row: i + 1,
                        value: cell.to_string(),
                    });
                }
            }
        }
    }
    Ok(())
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), IoError> {
    let text = csv_string(rows)?;
    fs::write(path, text).map_err(io_err(path))
}

/// One simulation run flattened into a CSV row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub policy: String,
    pub seed: u64,
    pub l: f64,
    pub obss_p1: f64,
    pub obss_p2: f64,
    pub sim_time_s: f64,
    pub total_slots: u64,
    pub switch_count: u64,
    pub ch1_success: u64,
    pub ch1_collisions: u64,
    pub ch1_overhead_slots: u64,
    pub ch2_success: u64,
    pub ch2_collisions: u64,
    pub ch2_overhead_slots: u64,
    pub measured_p1: f64,
    pub measured_p2: f64,
    pub ch1_mbps: f64,
    pub ch2_mbps: f64,
    pub total_mbps: f64,
}

impl MetricsRow {
    pub fn new(config: &SimConfig, m: &SimMetrics) -> Self {
        let t = measured_throughput(m, m.sim_time_s());
        let (mp1, mp2) = m.measured_occupancy();
        let [c1, c2] = m.channels;
        MetricsRow {
            policy: config.policy.name().to_string(),
            seed: config.seed,
            l: config.l,
            obss_p1: config.obss_p1,
            obss_p2: config.obss_p2,
            sim_time_s: m.sim_time_s(),
            total_slots: m.total_slots,
            switch_count: m.switch_count,
            ch1_success: c1.success_count,
            ch1_collisions: c1.collision_count,
            ch1_overhead_slots: c1.overhead_slots,
            ch2_success: c2.success_count,
            ch2_collisions: c2.collision_count,
            ch2_overhead_slots: c2.overhead_slots,
            measured_p1: mp1,
            measured_p2: mp2,
            ch1_mbps: t.primary_mbps,
            ch2_mbps: t.secondary_mbps,
            total_mbps: t.total_mbps,
        }
    }
}

/// Provenance of one command invocation, written next to its outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub wall_clock_s: f64,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<ConfigFile>,
}

impl RunManifest {
    pub fn new(command: &str, config: Option<&SimConfig>) -> Self {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.map_or(0, |c| c.seed),
            wall_clock_s: 0.0,
            outputs: Vec::new(),
            config: config.map(ConfigFile::from),
        }
    }

    pub fn to_toml(&self) -> Result<String, IoError> {
        toml::to_string(self).map_err(|e| IoError::Manifest(e.to_string()))
    }

    /// Writes `manifest.toml` into `dir` and returns its path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf, IoError> {
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, self.to_toml()?).map_err(io_err(&path))?;
        Ok(path)
    }
}

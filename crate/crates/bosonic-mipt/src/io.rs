//! Config file schema, result persistence, and the run manifest.
//!
//! The config is a single JSON document with top-level sections `circuit`,
//! `ensemble`, `noise`, `analysis`, and `output`. Unknown keys, type
//! mismatches, and constraint violations are reported with the offending
//! key's dotted path. Floats serialize with 17 significant digits so CSV
//! round-trips reproduce every f64 bit-exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::analysis::{CollapseTable, Crossing};
use crate::entropy::{EntropyBase, EntropyRecord};
use crate::error::{Error, Result};
use crate::gates::{GateMode, SnapPlacement};
use crate::measurement::{MeasurementKind, MeasurementRecord};
use crate::noise::{NoiseParams, NoiseToggles};
use crate::protocols::{AccuracyPoint, BipartiteOptions, CircuitConfig, InitialState, LearnabilityTrial};

/// A config problem, carrying the dotted path of the offending key.
#[derive(Debug, Clone)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error at `{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn cfg_err<T>(key: &str, message: impl Into<String>) -> std::result::Result<T, ConfigError> {
    Err(ConfigError {
        key: key.into(),
        message: message.into(),
    })
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CircuitSection {
    pub l: Option<usize>,
    pub q: Option<u8>,
    pub p: Option<f64>,
    pub u: Option<f64>,
    pub gate_mode: Option<GateMode>,
    pub with_snap: Option<bool>,
    pub snap_placement: Option<SnapPlacement>,
    pub scramble_layers: Option<usize>,
    pub monitored_layers: Option<usize>,
    pub scramble_u: Option<f64>,
    pub scramble_with_snap: Option<bool>,
    pub measurement: Option<MeasurementKind>,
    pub init: Option<InitialState>,
    pub seed: Option<u64>,
    pub entropy_base: Option<EntropyBase>,
    pub record_bipartite: Option<bool>,
    pub bipartite_cut: Option<usize>,
    pub bipartite_base: Option<EntropyBase>,
    pub ancilla_with_a: Option<bool>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub n_realizations: Option<usize>,
    pub p_grid: Option<Vec<f64>>,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct NoiseTogglesSection {
    pub idle_decay: Option<bool>,
    pub beam_splitter: Option<bool>,
    pub snap: Option<bool>,
    pub measurement: Option<bool>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub t1_cavity_ms: Option<f64>,
    pub n_bar_cavity: Option<f64>,
    pub epsilon_readout: Option<f64>,
    pub local_dim: Option<usize>,
    pub coupler: Option<Value>,
    pub transmon: Option<Value>,
    pub durations: Option<Value>,
    pub toggles: Option<NoiseTogglesSection>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    pub input: Option<String>,
    pub z: Option<f64>,
    pub p_c: Option<f64>,
    pub t_over_l: Option<f64>,
    pub sizes: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<String>,
    pub prefix: Option<String>,
    pub save_records: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub circuit: CircuitSection,
    pub ensemble: EnsembleSection,
    pub noise: NoiseSection,
    pub analysis: AnalysisSection,
    pub output: OutputSection,
    /// The parsed document, kept for hashing.
    pub raw: Value,
}

const SECTION_KEYS: &[(&str, &[&str])] = &[
    (
        "circuit",
        &[
            "l",
            "q",
            "p",
            "u",
            "gate_mode",
            "with_snap",
            "snap_placement",
            "scramble_layers",
            "monitored_layers",
            "scramble_u",
            "scramble_with_snap",
            "measurement",
            "init",
            "seed",
            "entropy_base",
            "record_bipartite",
            "bipartite_cut",
            "bipartite_base",
            "ancilla_with_a",
        ],
    ),
    ("ensemble", &["n_realizations", "p_grid", "workers"]),
    (
        "noise",
        &[
            "t1_cavity_ms",
            "n_bar_cavity",
            "epsilon_readout",
            "local_dim",
            "coupler",
            "transmon",
            "durations",
            "toggles",
        ],
    ),
    ("analysis", &["input", "z", "p_c", "t_over_l", "sizes"]),
    ("output", &["dir", "prefix", "save_records"]),
];

const NESTED_KEYS: &[(&str, &[&str])] = &[
    (
        "noise.coupler",
        &["g_over_delta", "t1_us", "t_phi_us", "n_thermal", "spectrum"],
    ),
    ("noise.transmon", &["t1_us", "t_phi_us", "n_thermal"]),
    (
        "noise.durations",
        &["t_snap_us", "t_parity_us", "tau_bs_us", "swap_us"],
    ),
    (
        "noise.toggles",
        &["idle_decay", "beam_splitter", "snap", "measurement"],
    ),
];

fn check_keys(value: &Value) -> std::result::Result<(), ConfigError> {
    let top = match value.as_object() {
        Some(o) => o,
        None => return cfg_err("<root>", "config must be a JSON object"),
    };
    let sections: Vec<&str> = SECTION_KEYS.iter().map(|(s, _)| *s).collect();
    for key in top.keys() {
        if !sections.contains(&key.as_str()) {
            return cfg_err(key, "unknown section");
        }
    }
    for (section, allowed) in SECTION_KEYS {
        if let Some(v) = top.get(*section) {
            let obj = match v.as_object() {
                Some(o) => o,
                None => return cfg_err(section, "section must be a JSON object"),
            };
            for key in obj.keys() {
                if !allowed.contains(&key.as_str()) {
                    return cfg_err(&format!("{section}.{key}"), "unknown key");
                }
            }
        }
    }
    for (path, allowed) in NESTED_KEYS {
        let mut cursor = value;
        for part in path.split('.') {
            cursor = match cursor.get(part) {
                Some(v) => v,
                None => {
                    cursor = &Value::Null;
                    break;
                }
            };
        }
        if let Some(obj) = cursor.as_object() {
            for key in obj.keys() {
                if !allowed.contains(&key.as_str()) {
                    return cfg_err(&format!("{path}.{key}"), "unknown key");
                }
            }
        }
    }
    Ok(())
}

fn parse_section<T: for<'de> Deserialize<'de> + Default>(
    value: &Value,
    name: &str,
) -> std::result::Result<T, ConfigError> {
    match value.get(name) {
        None | Some(Value::Null) => Ok(T::default()),
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| ConfigError {
            key: name.to_string(),
            message: e.to_string(),
        }),
    }
}

/// Parses and key-checks a config document.
pub fn parse_config(text: &str) -> std::result::Result<RunConfig, ConfigError> {
    let raw: Value = serde_json::from_str(text).map_err(|e| ConfigError {
        key: "<root>".into(),
        message: format!("invalid JSON: {e}"),
    })?;
    check_keys(&raw)?;
    let cfg = RunConfig {
        circuit: parse_section(&raw, "circuit")?,
        ensemble: parse_section(&raw, "ensemble")?,
        noise: parse_section(&raw, "noise")?,
        analysis: parse_section(&raw, "analysis")?,
        output: parse_section(&raw, "output")?,
        raw,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> std::result::Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        key: "<config>".into(),
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    parse_config(&text)
}

impl RunConfig {
    fn validate(&self) -> std::result::Result<(), ConfigError> {
        let c = &self.circuit;
        if let Some(l) = c.l {
            if l < 1 {
                return cfg_err("circuit.l", "must be >= 1");
            }
        }
        if let Some(p) = c.p {
            if !(0.0..=1.0).contains(&p) {
                return cfg_err("circuit.p", format!("must be in [0, 1], got {p}"));
            }
        }
        if let Some(MeasurementKind::ModN(n)) = c.measurement {
            if n < 2 {
                return cfg_err("circuit.measurement", "mod_n requires n >= 2");
            }
        }
        if let Some(grid) = &self.ensemble.p_grid {
            if grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return cfg_err("ensemble.p_grid", "entries must be in [0, 1]");
            }
        }
        if let Some(n) = self.ensemble.n_realizations {
            if n == 0 {
                return cfg_err("ensemble.n_realizations", "must be >= 1");
            }
        }
        if let Some(e) = self.noise.epsilon_readout {
            if !(0.0..=1.0).contains(&e) {
                return cfg_err("noise.epsilon_readout", "must be in [0, 1]");
            }
        }
        if let Some(t1) = self.noise.t1_cavity_ms {
            if t1 <= 0.0 {
                return cfg_err("noise.t1_cavity_ms", "must be > 0");
            }
        }
        if let Some(z) = self.analysis.z {
            if z <= 0.0 {
                return cfg_err("analysis.z", "must be > 0");
            }
        }
        if let Some(pc) = self.analysis.p_c {
            if !(0.0..=1.0).contains(&pc) {
                return cfg_err("analysis.p_c", "must be in [0, 1]");
            }
        }
        Ok(())
    }

    /// Builds the simulator config, applying init-dependent layer defaults.
    pub fn circuit_config(&self) -> std::result::Result<CircuitConfig, ConfigError> {
        let c = &self.circuit;
        let l = match c.l {
            Some(l) => l,
            None => return cfg_err("circuit.l", "missing"),
        };
        let init = c.init.unwrap_or(InitialState::HaarPair);
        let mut cfg = match init {
            InitialState::HaarPair => CircuitConfig::haar(l),
            InitialState::Checkerboard => CircuitConfig::checkerboard(l),
        };
        if let Some(q) = c.q {
            cfg.photons = q;
        }
        if let Some(p) = c.p {
            cfg.meas_rate = p;
        }
        if let Some(u) = c.u {
            cfg.hubbard_u = u;
        }
        if let Some(m) = c.gate_mode {
            cfg.gate_mode = m;
        }
        if let Some(s) = c.with_snap {
            cfg.with_snap = s;
        }
        if let Some(pl) = c.snap_placement {
            cfg.snap_placement = pl;
        }
        if let Some(s) = c.scramble_layers {
            cfg.scramble_layers = s;
        }
        if let Some(m) = c.monitored_layers {
            cfg.monitored_layers = m;
        }
        if let Some(u) = c.scramble_u {
            cfg.scramble_u = u;
        }
        if let Some(s) = c.scramble_with_snap {
            cfg.scramble_with_snap = s;
        }
        if let Some(k) = c.measurement {
            cfg.measurement = k;
        }
        if let Some(seed) = c.seed {
            cfg.seed = seed;
        }
        if let Some(b) = c.entropy_base {
            cfg.entropy_base = b;
        }
        if c.record_bipartite.unwrap_or(false) {
            cfg.bipartite = Some(BipartiteOptions {
                cut: c.bipartite_cut.unwrap_or(l / 2),
                base: c.bipartite_base.unwrap_or(EntropyBase::E),
                ancilla_with_a: c.ancilla_with_a.unwrap_or(false),
            });
        }
        cfg.validate().map_err(|e| ConfigError {
            key: "circuit".into(),
            message: e.to_string(),
        })?;
        Ok(cfg)
    }

    pub fn noise_params(&self) -> std::result::Result<NoiseParams, ConfigError> {
        let mut params = NoiseParams::default();
        let n = &self.noise;
        if let Some(t1) = n.t1_cavity_ms {
            params.t1_cavity_us = t1 * 1000.0;
        }
        if let Some(nb) = n.n_bar_cavity {
            params.n_bar_cavity = nb;
        }
        if let Some(e) = n.epsilon_readout {
            params.epsilon_readout = e;
        }
        if let Some(d) = n.local_dim {
            params.local_dim = d;
        }
        let merge = |target: Value, patch: &Value| -> Value {
            let mut obj = target;
            if let (Some(t), Some(p)) = (obj.as_object_mut(), patch.as_object()) {
                for (k, v) in p {
                    t.insert(k.clone(), v.clone());
                }
            }
            obj
        };
        if let Some(patch) = &n.coupler {
            let base = serde_json::to_value(&params.coupler).unwrap();
            params.coupler =
                serde_json::from_value(merge(base, patch)).map_err(|e| ConfigError {
                    key: "noise.coupler".into(),
                    message: e.to_string(),
                })?;
        }
        if let Some(patch) = &n.transmon {
            let base = serde_json::to_value(&params.transmon).unwrap();
            params.transmon =
                serde_json::from_value(merge(base, patch)).map_err(|e| ConfigError {
                    key: "noise.transmon".into(),
                    message: e.to_string(),
                })?;
        }
        if let Some(patch) = &n.durations {
            let base = serde_json::to_value(&params.durations).unwrap();
            params.durations =
                serde_json::from_value(merge(base, patch)).map_err(|e| ConfigError {
                    key: "noise.durations".into(),
                    message: e.to_string(),
                })?;
        }
        Ok(params)
    }

    pub fn noise_toggles(&self) -> NoiseToggles {
        let mut toggles = NoiseToggles::all_on();
        if let Some(t) = &self.noise.toggles {
            if let Some(v) = t.idle_decay {
                toggles.idle_decay = v;
            }
            if let Some(v) = t.beam_splitter {
                toggles.beam_splitter = v;
            }
            if let Some(v) = t.snap {
                toggles.snap = v;
            }
            if let Some(v) = t.measurement {
                toggles.measurement = v;
            }
        }
        toggles
    }

    /// Sweep grid: explicit `ensemble.p_grid`, else the single `circuit.p`,
    /// else the default grid 0, 0.05, ..., 1.
    pub fn p_grid(&self) -> Vec<f64> {
        if let Some(grid) = &self.ensemble.p_grid {
            return grid.clone();
        }
        if let Some(p) = self.circuit.p {
            return vec![p];
        }
        (0..=20).map(|i| i as f64 * 0.05).collect()
    }
}

/// Formats an f64 with 17 significant digits (lossless round-trip).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub const ENTROPY_CSV_HEADER: &str = "L,Q,p,t,mean,sem,n_realizations,base";

pub fn write_entropy_csv<W: Write>(out: &mut W, records: &[EntropyRecord]) -> std::io::Result<()> {
    writeln!(out, "{ENTROPY_CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.l,
            r.q,
            fmt_f64(r.p),
            r.t,
            fmt_f64(r.mean),
            fmt_f64(r.sem),
            r.n_realizations,
            r.base
        )?;
    }
    Ok(())
}

fn parse_base(s: &str) -> Result<EntropyBase> {
    match s {
        "2" => Ok(EntropyBase::Two),
        "e" => Ok(EntropyBase::E),
        other => Err(Error::InvalidConfig(format!("unknown entropy base `{other}`"))),
    }
}

pub fn read_entropy_csv<R: BufRead>(input: R) -> Result<Vec<EntropyRecord>> {
    let mut records = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::InvalidConfig(format!("read error: {e}")))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('L') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::InvalidConfig(format!(
                "line {}: expected 8 CSV fields, got {}",
                i + 1,
                fields.len()
            )));
        }
        let parse_err = |f: &str, e: String| {
            Error::InvalidConfig(format!("line {}: bad field `{f}`: {e}", i + 1))
        };
        records.push(EntropyRecord {
            l: fields[0].parse().map_err(|e: std::num::ParseIntError| parse_err(fields[0], e.to_string()))?,
            q: fields[1].parse().map_err(|e: std::num::ParseIntError| parse_err(fields[1], e.to_string()))?,
            p: fields[2].parse().map_err(|e: std::num::ParseFloatError| parse_err(fields[2], e.to_string()))?,
            t: fields[3].parse().map_err(|e: std::num::ParseIntError| parse_err(fields[3], e.to_string()))?,
            mean: fields[4].parse().map_err(|e: std::num::ParseFloatError| parse_err(fields[4], e.to_string()))?,
            sem: fields[5].parse().map_err(|e: std::num::ParseFloatError| parse_err(fields[5], e.to_string()))?,
            n_realizations: fields[6].parse().map_err(|e: std::num::ParseIntError| parse_err(fields[6], e.to_string()))?,
            base: parse_base(fields[7])?,
        });
    }
    Ok(records)
}

pub const NOISE_CSV_HEADER: &str =
    "L,Q,p,t,mean,sem,n_realizations,base,channel_mask,residual_entropy";

/// Noise rows carry the channel mask and the per-time excess over the ideal
/// mean; the final row's value is the residual entropy.
pub fn write_noise_csv<W: Write>(
    out: &mut W,
    noisy: &[EntropyRecord],
    ideal: &[EntropyRecord],
    channel_mask: &str,
) -> std::io::Result<()> {
    writeln!(out, "{NOISE_CSV_HEADER}")?;
    for (r, i) in noisy.iter().zip(ideal) {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.l,
            r.q,
            fmt_f64(r.p),
            r.t,
            fmt_f64(r.mean),
            fmt_f64(r.sem),
            r.n_realizations,
            r.base,
            channel_mask,
            fmt_f64(r.mean - i.mean)
        )?;
    }
    Ok(())
}

pub const ACCURACY_CSV_HEADER: &str = "L,Q,p,accuracy,sem,n_trials";

pub fn write_accuracy_csv<W: Write>(
    out: &mut W,
    l: usize,
    q: u8,
    points: &[AccuracyPoint],
) -> std::io::Result<()> {
    writeln!(out, "{ACCURACY_CSV_HEADER}")?;
    for pt in points {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            l,
            q,
            fmt_f64(pt.p),
            fmt_f64(pt.accuracy),
            fmt_f64(pt.sem),
            pt.n_trials
        )?;
    }
    Ok(())
}

/// One JSONL line per measurement event, tagged with its trajectory index.
pub fn write_records_jsonl<W: Write>(
    out: &mut W,
    records: &[MeasurementRecord],
) -> std::io::Result<()> {
    for (k, record) in records.iter().enumerate() {
        for e in &record.events {
            let mut line = serde_json::Map::new();
            line.insert("trajectory".into(), Value::from(k));
            line.insert("layer".into(), Value::from(e.layer));
            line.insert("site".into(), Value::from(e.site));
            line.insert("kind".into(), serde_json::to_value(e.kind).unwrap());
            line.insert("outcome".into(), Value::from(e.outcome));
            line.insert("born_probability".into(), Value::from(e.born_probability));
            writeln!(out, "{}", Value::Object(line))?;
        }
    }
    Ok(())
}

/// One JSONL line per learnability trial. Infinite log-probabilities (a
/// record impossible from that branch) serialize as null.
pub fn write_trials_jsonl<W: Write>(
    out: &mut W,
    trials: &[LearnabilityTrial],
) -> std::io::Result<()> {
    let logp = |x: f64| {
        if x.is_finite() {
            Value::from(x)
        } else {
            Value::Null
        }
    };
    for t in trials {
        let mut line = serde_json::Map::new();
        line.insert("seed".into(), Value::from(t.seed));
        line.insert("alpha_true".into(), Value::from(t.alpha_true));
        line.insert("log_p0".into(), logp(t.log_p0));
        line.insert("log_p1".into(), logp(t.log_p1));
        line.insert(
            "prediction".into(),
            serde_json::to_value(t.prediction).unwrap(),
        );
        line.insert("credit".into(), Value::from(t.credit));
        line.insert(
            "record".into(),
            serde_json::to_value(&t.record.events).unwrap(),
        );
        writeln!(out, "{}", Value::Object(line))?;
    }
    Ok(())
}

pub fn write_crossings_json<W: Write>(
    out: &mut W,
    crossings: &[(usize, usize, Vec<Crossing>)],
) -> std::io::Result<()> {
    let items: Vec<Value> = crossings
        .iter()
        .map(|(l1, l2, roots)| {
            serde_json::json!({
                "l1": l1,
                "l2": l2,
                "p_star": roots.first().map(|r| r.p_star),
                "sigma": roots.first().map(|r| r.sigma),
                "ambiguous": roots.len() > 1,
                "all_roots": roots,
            })
        })
        .collect();
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&Value::Array(items)).unwrap()
    )
}

pub fn write_collapse_csv<W: Write>(out: &mut W, table: &CollapseTable) -> std::io::Result<()> {
    writeln!(
        out,
        "# requested_p={} selected_p={} z={}",
        fmt_f64(table.requested_p),
        fmt_f64(table.selected_p),
        fmt_f64(table.z)
    )?;
    writeln!(out, "L,p,t_over_lz,mean,sem")?;
    for row in &table.rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            row.l,
            fmt_f64(row.p),
            fmt_f64(row.x),
            fmt_f64(row.mean),
            fmt_f64(row.sem)
        )?;
    }
    Ok(())
}

/// Provenance sidecar for a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<String>,
}

/// SHA-256 of the canonical (sorted-key) JSON encoding; stable under field
/// reordering in the source document.
pub fn config_hash(raw: &Value) -> String {
    fn canonicalize(v: &Value) -> Value {
        match v {
            Value::Object(map) => {
                let sorted: BTreeMap<String, Value> = map
                    .iter()
                    .map(|(k, val)| (k.clone(), canonicalize(val)))
                    .collect();
                Value::Object(sorted.into_iter().collect())
            }
            Value::Array(items) => Value::Array(items.iter().map(canonicalize).collect()),
            other => other.clone(),
        }
    }
    let canonical = canonicalize(raw).to_string();
    let digest = Sha256::digest(canonical.as_bytes());
    let mut hex = String::with_capacity(64);
    for byte in digest {
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}

impl RunManifest {
    pub fn new(raw: &Value, seed: u64, started: chrono::DateTime<chrono::Utc>) -> Self {
        Self {
            config_hash: config_hash(raw),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started: started.to_rfc3339(),
            finished: String::new(),
            outputs: Vec::new(),
        }
    }

    pub fn finish(mut self, outputs: Vec<String>) -> Self {
        self.finished = chrono::Utc::now().to_rfc3339();
        self.outputs = outputs;
        self
    }
}

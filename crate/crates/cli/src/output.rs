//! File emission: CSV tables, the run manifest and content hashes.

use std::fs;
use std::path::{Path, PathBuf};

use peakon_core::asymptotics::fmt_real;
use peakon_core::flows::{Diagnostics, LedgerEntry};
use peakon_core::lax::Sector;
use peakon_core::{State, Traj};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::SCHEMA_VERSION;
use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct OutputEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub command: String,
    pub versions: serde_json::Value,
    pub config: serde_json::Value,
    /// Momentum dropped by the truncation, when the profile has a tail.
    pub tail_bound: Option<f64>,
    pub results: serde_json::Value,
    pub outputs: Vec<OutputEntry>,
}

/// Collects written files so the manifest can list them.
pub struct OutputSet {
    dir: PathBuf,
    entries: Vec<OutputEntry>,
}

impl OutputSet {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self, CliError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self { dir, entries: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::Config(format!("cannot create {}: {e}", parent.display())))?;
        }
        fs::write(&path, contents).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        self.entries.push(OutputEntry { path: name.into(), sha256: sha256_hex(contents.as_bytes()), bytes: contents.len() });
        Ok(())
    }

    pub fn finish(self, command: &str, config: serde_json::Value, tail_bound: Option<f64>, results: serde_json::Value) -> Result<Manifest, CliError> {
        let manifest = Manifest {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            versions: serde_json::json!({ "peakon-cli": env!("CARGO_PKG_VERSION"), "peakon-core": peakon_core::VERSION }),
            config,
            tail_bound,
            results,
            outputs: self.entries,
        };
        let text = to_json(&manifest)?;
        let path = self.dir.join("manifest.json");
        fs::write(&path, text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        Ok(manifest)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Config(format!("serialization: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// `t,q1..qn,p1..pn`.
pub fn trajectory_csv(times: &[f64], states: &[State]) -> String {
    let n = states.first().map_or(0, State::n);
    let mut out = String::from("t");
    for j in 1..=n {
        out.push_str(&format!(",q{j}"));
    }
    for j in 1..=n {
        out.push_str(&format!(",p{j}"));
    }
    out.push('\n');
    for (t, s) in times.iter().zip(states) {
        out.push_str(&fmt_real(*t));
        for v in s.q.iter().chain(&s.p) {
            out.push(',');
            out.push_str(&fmt_real(*v));
        }
        out.push('\n');
    }
    out
}

/// `t,P,H,trL,trL2,trL3`.
pub fn ledger_csv(times: &[f64], ledger: &[LedgerEntry<f64>]) -> String {
    let mut out = String::from("t,P,H,trL,trL2,trL3\n");
    for (t, e) in times.iter().zip(ledger) {
        let row = [*t, e.total_momentum, e.hamiltonian, e.traces[0], e.traces[1], e.traces[2]];
        out.push_str(&row.iter().map(|v| fmt_real(*v)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

/// Parses a trajectory CSV as written by `simulate`. The sector is inferred
/// from the ordering of the first row.
pub fn read_trajectory(path: &Path) -> Result<Traj, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read trajectory {}: {e}", path.display())))?;
    let bad = |line: usize, msg: &str| CliError::Config(format!("{}:{line}: {msg}", path.display()));
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| bad(1, "empty file"))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() < 3 || cols.len().is_multiple_of(2) || cols[0] != "t" {
        return Err(bad(1, "expected header t,q1..qn,p1..pn"));
    }
    let n = (cols.len() - 1) / 2;
    let mut times = Vec::new();
    let mut rows = Vec::new();
    for (i, line) in lines {
        let vals: Vec<f64> = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| bad(i + 1, &format!("not a number: {e}")))?;
        if vals.len() != cols.len() {
            return Err(bad(i + 1, &format!("expected {} columns, got {}", cols.len(), vals.len())));
        }
        if let Some(&last) = times.last() {
            if vals[0] <= last {
                return Err(bad(i + 1, "times must increase"));
            }
        }
        times.push(vals[0]);
        rows.push((vals[1..=n].to_vec(), vals[n + 1..].to_vec()));
    }
    if rows.is_empty() {
        return Err(bad(2, "no samples"));
    }
    let sector = Sector::infer(&rows[0].0).ok_or_else(|| bad(2, "positions are not strictly ordered"))?;
    let mut states = Vec::with_capacity(rows.len());
    let mut ledger = Vec::with_capacity(rows.len());
    for (k, (q, p)) in rows.into_iter().enumerate() {
        let s = State::from_f64(&q, &p, sector.clone()).map_err(|e| bad(k + 2, &e.to_string()))?;
        ledger.push(LedgerEntry::of(&s).map_err(|e| bad(k + 2, &e.to_string()))?);
        states.push(s);
    }
    Ok(Traj { times, states, ledger, diagnostics: Diagnostics::default() })
}

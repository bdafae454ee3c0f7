//! Versioned JSON reports and atomic file output.

use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA: &str = "rhoforge.report/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Reported for information; never affects the exit status.
    Info,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Info => "info",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub values: Value,
}

/// Accumulates the body of one subcommand's report.
#[derive(Debug, Default)]
pub struct Report {
    checks: Vec<Check>,
    results: Map<String, Value>,
}

impl Report {
    pub fn check(&mut self, name: &str, status: Status, values: Value) {
        self.checks.push(Check { name: name.to_string(), status, values });
    }

    pub fn result(&mut self, key: &str, value: Value) {
        self.results.insert(key.to_string(), value);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn checks(&self) -> &[Check] {
        &self.checks
    }

    pub fn finish(self, envelope: &Envelope, wall_clock_ms: Option<u128>) -> Value {
        let checks: Vec<Value> = self
            .checks
            .into_iter()
            .map(|c| json!({"name": c.name, "status": c.status.as_str(), "values": c.values}))
            .collect();
        let mut out = Map::new();
        out.insert("schema".into(), json!(SCHEMA));
        out.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        out.insert("command".into(), json!(envelope.command));
        out.insert("seed".into(), json!(envelope.seed));
        out.insert("inputs_digest".into(), json!(envelope.digest()));
        out.insert("passed".into(), json!(checks.iter().all(|c| c["status"] != "fail")));
        out.insert("checks".into(), Value::Array(checks));
        out.insert("results".into(), Value::Object(self.results));
        if let Some(ms) = wall_clock_ms {
            out.insert("wall_clock_ms".into(), json!(ms as u64));
        }
        Value::Object(out)
    }
}

/// What went in: the argument list, the seed, and the bytes of every input file.
#[derive(Debug, Clone)]
pub struct Envelope {
    pub command: Vec<String>,
    pub seed: u64,
    inputs: Vec<(String, Vec<u8>)>,
}

impl Envelope {
    pub fn new(command: Vec<String>, seed: u64) -> Self {
        Self { command, seed, inputs: Vec::new() }
    }

    /// Reads an input file and records it for the digest.
    pub fn read_input(&mut self, path: &Path) -> anyhow::Result<String> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        let text = String::from_utf8(bytes.clone()).with_context(|| format!("{} is not UTF-8", path.display()))?;
        self.inputs.push((path.display().to_string(), bytes));
        Ok(text)
    }

    /// SHA-256 over the arguments and input contents, each length-prefixed.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        let mut feed = |bytes: &[u8]| {
            h.update((bytes.len() as u64).to_le_bytes());
            h.update(bytes);
        };
        for arg in &self.command {
            feed(arg.as_bytes());
        }
        feed(&self.seed.to_le_bytes());
        for (_, bytes) in &self.inputs {
            feed(bytes);
        }
        hex::encode(h.finalize())
    }
}

/// Writes through a temporary file in the destination directory, then renames it over
/// the target, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn to_pretty(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("report serialization");
    s.push(b'\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_depends_on_arguments_and_seed() {
        let a = Envelope::new(vec!["fvector".into()], 0);
        let b = Envelope::new(vec!["fvector".into()], 1);
        let c = Envelope::new(vec!["fvector".into(), "x".into()], 0);
        assert_ne!(a.digest(), b.digest());
        assert_ne!(a.digest(), c.digest());
        assert_eq!(a.digest(), a.clone().digest());
        assert_eq!(a.digest().len(), 64);
    }

    #[test]
    fn info_checks_do_not_fail() {
        let mut r = Report::default();
        r.check("a", Status::Pass, json!({}));
        r.check("b", Status::Info, json!({}));
        assert!(r.passed());
        r.check("c", Status::Fail, json!({}));
        assert!(!r.passed());
        let v = r.finish(&Envelope::new(vec![], 0), None);
        assert_eq!(v["passed"], json!(false));
        assert!(v.get("wall_clock_ms").is_none());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}

//! The JSON record written next to every generated graph and join output.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    /// Full command line; `replay` re-runs it verbatim.
    pub argv: Vec<String>,
    pub version: String,
    pub prf_version: u32,
    pub cost_report_version: u32,
    pub threads: usize,
    pub params: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    pub results: serde_json::Value,
    pub outputs: BTreeMap<String, String>,
    pub elapsed_seconds: f64,
}

impl RunManifest {
    pub fn new(argv: Vec<String>, threads: Option<usize>) -> Self {
        RunManifest {
            argv,
            version: env!("CARGO_PKG_VERSION").to_string(),
            prf_version: lsf_join::prf::PRF_VERSION,
            cost_report_version: lsf_join::cluster::COST_REPORT_VERSION,
            threads: threads.unwrap_or_else(rayon::current_num_threads),
            params: serde_json::Value::Null,
            seeds: BTreeMap::new(),
            results: serde_json::Value::Null,
            outputs: BTreeMap::new(),
            elapsed_seconds: 0.0,
        }
    }

    pub fn output(&mut self, name: &str, path: &Path) {
        self.outputs.insert(name.to_string(), path.display().to_string());
    }

    pub fn finish(&mut self, start: Instant) {
        self.elapsed_seconds = start.elapsed().as_secs_f64();
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?);
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let r = BufReader::new(File::open(path).with_context(|| format!("cannot open {}", path.display()))?);
        serde_json::from_reader(r).with_context(|| format!("reading manifest {}", path.display()))
    }
}

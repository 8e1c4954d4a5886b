//! Per-invocation state: resolved config, output directory, network policy
//! and the list of files written, which ends up in the run manifest.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use cogscreen_core::corpus::{load_manifest, Corpus};
use cogscreen_core::lingfeat::{CategoryLexicon, FeatureExtractor, FillerList, RuleTagger, TaggerModel, REGISTRY_VERSION};
use cogscreen_core::net::NetworkPolicy;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::error::CliError;

pub struct Ctx {
    pub cfg: PipelineConfig,
    pub out: PathBuf,
    pub network: NetworkPolicy,
    pub command: String,
    pub args: serde_json::Value,
    /// Nondeterministic side information, kept out of the run manifest.
    pub provenance: serde_json::Map<String, serde_json::Value>,
    written: Vec<PathBuf>,
    started: SystemTime,
    clock: Instant,
}

impl Ctx {
    pub fn new(cfg: PipelineConfig, network: NetworkPolicy, command: &str, args: serde_json::Value) -> Self {
        Self {
            out: cfg.paths.out.clone(),
            cfg,
            network,
            command: command.to_string(),
            args,
            provenance: serde_json::Map::new(),
            written: Vec::new(),
            started: SystemTime::now(),
            clock: Instant::now(),
        }
    }

    pub fn path(&self, rel: impl AsRef<Path>) -> PathBuf {
        self.out.join(rel)
    }

    /// Writes `bytes` under the output directory and records the file.
    pub fn write(&mut self, rel: impl AsRef<Path>, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.path(rel);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, rel: impl AsRef<Path>, value: &T) -> Result<PathBuf, CliError> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::stage("serialize", e))?;
        bytes.push(b'\n');
        self.write(rel, &bytes)
    }

    /// Records a file written by library code.
    pub fn record(&mut self, path: PathBuf) {
        self.written.push(path);
    }

    pub fn corpus(&self) -> Result<Corpus, CliError> {
        load_manifest(&self.cfg.paths.manifest).map_err(|e| CliError::stage("ingest", e))
    }

    pub fn extractor(&self) -> Result<FeatureExtractor, CliError> {
        let lexicon = match &self.cfg.paths.lexicon {
            Some(p) => CategoryLexicon::load(p).map_err(|e| CliError::stage("features", e))?,
            None => CategoryLexicon::bundled(),
        };
        let tagger = match &self.cfg.paths.tagger {
            Some(p) => RuleTagger::new(TaggerModel::load(p).map_err(|e| CliError::stage("features", e))?),
            None => RuleTagger::bundled(),
        };
        Ok(FeatureExtractor::new(lexicon, Box::new(tagger), FillerList::default()))
    }

    /// Config hash with the output location blanked: where results go is
    /// not part of what was run.
    pub fn config_hash(&self) -> String {
        let mut c = self.cfg.clone();
        c.paths.out = PathBuf::new();
        c.hash()
    }

    /// Writes `runs/<command>.json` (deterministic) and
    /// `runs/<command>.provenance.json` (timestamps, durations).
    pub fn finish(mut self) -> Result<(), CliError> {
        let mut outputs = Vec::new();
        self.written.sort();
        self.written.dedup();
        for p in &self.written {
            let bytes = std::fs::read(p).map_err(|e| CliError::io(p, e))?;
            let rel = p.strip_prefix(&self.out).unwrap_or(p);
            outputs.push(json!({ "path": rel.to_string_lossy().replace('\\', "/"), "sha256": hex::encode(Sha256::digest(&bytes)) }));
        }
        let manifest = json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "args": self.args,
            "config_hash": self.config_hash(),
            "seeds": self.cfg.seeds,
            "feature_registry_version": REGISTRY_VERSION,
            "network": self.network,
            "outputs": outputs,
        });
        let unix = |t: SystemTime| t.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
        let mut provenance = json!({
            "command": self.command,
            "started_unix": unix(self.started),
            "finished_unix": unix(SystemTime::now()),
            "wall_ms": self.clock.elapsed().as_millis() as u64,
        });
        provenance.as_object_mut().expect("object").extend(std::mem::take(&mut self.provenance));
        let name = self.command.clone();
        self.write_json(format!("runs/{name}.json"), &manifest)?;
        self.write_json(format!("runs/{name}.provenance.json"), &provenance)?;
        Ok(())
    }
}

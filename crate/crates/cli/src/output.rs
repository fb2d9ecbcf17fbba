use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Map, Value};

/// Seventeen significant digits, enough to round-trip an `f64`.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn join<T: ToString>(items: &[T], sep: &str) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(sep)
}

pub fn complex_cells(z: Complex64) -> [String; 3] {
    [float(z.re), float(z.im), float(z.norm())]
}

/// Collects the artifacts of one invocation and writes its manifest.
pub struct Run {
    out: PathBuf,
    verb: &'static str,
    argv: Vec<String>,
    config: Value,
    seed: u64,
    threads: usize,
    artifacts: Vec<String>,
    results: Map<String, Value>,
    timings: Vec<(String, f64)>,
    start: Instant,
}

impl Run {
    pub fn new(out: &Path, verb: &'static str, config: Value, seed: u64) -> Result<Self> {
        fs::create_dir_all(out).with_context(|| format!("creating output directory {}", out.display()))?;
        Ok(Self {
            out: out.to_path_buf(),
            verb,
            argv: std::env::args().collect(),
            config,
            seed,
            threads: rayon::current_num_threads(),
            artifacts: Vec::new(),
            results: Map::new(),
            timings: Vec::new(),
            start: Instant::now(),
        })
    }

    fn path(&mut self, suffix: &str) -> PathBuf {
        let name = format!("{}{}", self.verb, suffix);
        self.artifacts.push(name.clone());
        self.out.join(name)
    }

    /// Writes `<verb><suffix>` with the given header; rows arrive in their final order.
    pub fn csv<I>(&mut self, suffix: &str, header: &[&str], rows: I) -> Result<PathBuf>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let path = self.path(suffix);
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(path)
    }

    pub fn json(&mut self, suffix: &str, value: &impl Serialize) -> Result<PathBuf> {
        let path = self.path(suffix);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.results.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let v = f();
        self.timings.push((phase.to_string(), t.elapsed().as_secs_f64()));
        v
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        let total = self.start.elapsed().as_secs_f64();
        let mut timings = Map::new();
        for (k, v) in &self.timings {
            timings.insert(k.clone(), json!(v));
        }
        timings.insert("total".into(), json!(total));
        let artifacts = self.artifacts.clone();
        let manifest = json!({
            "command": self.verb,
            "argv": self.argv,
            "config": self.config,
            "seed": self.seed,
            "threads": self.threads,
            "versions": {
                "polyergo": env!("CARGO_PKG_VERSION"),
                "manifest": 1,
            },
            "artifacts": artifacts,
            "results": Value::Object(std::mem::take(&mut self.results)),
            "timings_secs": Value::Object(timings),
        });
        let path = self.out.join(format!("{}.manifest.json", self.verb));
        fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        for a in &self.artifacts {
            println!("wrote {}", self.out.join(a).display());
        }
        println!("wrote {}", path.display());
        Ok(path)
    }
}

//! Experiment configuration: JSON file plus command-line overrides. Every
//! numeric input flows through this struct so a run is fully described by
//! its manifest.

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct ExperimentConfig {
    pub spin: Option<i32>,
    pub l_max: Option<u32>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub alpha: Option<f64>,
    pub c: Option<f64>,
    pub seed: Option<u64>,
    pub n_reps: Option<usize>,
    pub j_list: Option<Vec<i32>>,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fields set in `other` win.
    pub fn merged_with(mut self, other: &ExperimentConfig) -> Self {
        macro_rules! take {
            ($f:ident) => {
                if other.$f.is_some() {
                    self.$f = other.$f.clone();
                }
            };
        }
        take!(spin);
        take!(l_max);
        take!(a);
        take!(b);
        take!(alpha);
        take!(c);
        take!(seed);
        take!(n_reps);
        take!(j_list);
        take!(out_dir);
        self
    }

    pub fn spin(&self) -> i32 {
        self.spin.unwrap_or(2)
    }
    pub fn l_max(&self) -> u32 {
        self.l_max.unwrap_or(32)
    }
    pub fn a(&self) -> f64 {
        self.a.unwrap_or_else(|| 2.0f64.powf(1.0 / 3.0))
    }
    pub fn b(&self) -> f64 {
        self.b.unwrap_or(0.4)
    }
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(3.0)
    }
    pub fn c(&self) -> f64 {
        self.c.unwrap_or(1.0)
    }
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }
    pub fn n_reps(&self) -> usize {
        self.n_reps.unwrap_or(1000)
    }
    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

/// Run manifest written next to the outputs.
#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub command: &'a str,
    pub config: &'a ExperimentConfig,
    pub outputs: Vec<String>,
}

pub fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join("run_manifest.json");
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use paretotopo::simplicity::{AnalysisConfig, SimplicityReport, SubsetReport};

/// Everything needed to rerun a command, echoed into its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub problem: Option<String>,
    pub x_csv: Option<String>,
    pub f_csv: Option<String>,
    pub n_points: Option<usize>,
    pub oversample: Option<usize>,
    pub trial: Option<usize>,
    pub outputs: Vec<String>,
    pub analysis: AnalysisConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub run: RunConfig,
    pub n_points: usize,
    pub subsets: Vec<SubsetReport>,
}

impl Report {
    pub fn new(run: RunConfig, analysis: SimplicityReport) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            run,
            n_points: analysis.n_points,
            subsets: analysis.subsets,
        }
    }

    pub fn full(&self) -> Option<&SubsetReport> {
        self.subsets.iter().max_by_key(|s| s.objectives.len())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_json()?)
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

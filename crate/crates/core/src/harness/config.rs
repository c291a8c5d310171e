use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::DocConfig;
use crate::error::{Error, Result};
use crate::network::DEFAULT_MAX_PATH_EDGES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Congestion {
    Low,
    Medium,
    High,
}

impl Congestion {
    pub const ALL: [Congestion; 3] = [Congestion::Low, Congestion::Medium, Congestion::High];

    /// True flow as a fraction of capacity.
    pub fn multiplier(self) -> f64 {
        match self {
            Congestion::Low => 0.25,
            Congestion::Medium => 0.75,
            Congestion::High => 1.5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Congestion::Low => "low",
            Congestion::Medium => "medium",
            Congestion::High => "high",
        }
    }
}

impl fmt::Display for Congestion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Congestion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Congestion::ALL
            .into_iter()
            .find(|c| c.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown congestion level {s:?} (low, medium, high)"
                ))
            })
    }
}

/// Ordering of this enum is the record order within a repetition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Tacts,
    Doc,
    Tasr,
    Rcs,
    Sc,
    Oracle,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Tacts,
        Algorithm::Doc,
        Algorithm::Tasr,
        Algorithm::Rcs,
        Algorithm::Sc,
        Algorithm::Oracle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Tacts => "tacts",
            Algorithm::Doc => "doc",
            Algorithm::Tasr => "tasr",
            Algorithm::Rcs => "rcs",
            Algorithm::Sc => "sc",
            Algorithm::Oracle => "oracle",
        }
    }

    /// Stream salt for the algorithm's own random source.
    pub fn salt(self) -> u64 {
        0xA160_0000 + self as u64
    }

    /// Parses `"tacts,doc,oracle"`.
    pub fn parse_list(s: &str) -> Result<Vec<Algorithm>> {
        s.split(',')
            .filter(|t| !t.trim().is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == t)
            .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?}")))
    }
}

/// Inclusive range for the number of modalities per instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ModalityRange {
    pub lo: usize,
    pub hi: usize,
}

impl Default for ModalityRange {
    fn default() -> Self {
        Self { lo: 2, hi: 6 }
    }
}

impl FromStr for ModalityRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("modality range {s:?} is not lo:hi"));
        let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
        Ok(Self {
            lo: lo.trim().parse().map_err(|_| bad())?,
            hi: hi.trim().parse().map_err(|_| bad())?,
        })
    }
}

impl TryFrom<String> for ModalityRange {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ModalityRange> for String {
    fn from(r: ModalityRange) -> String {
        format!("{}:{}", r.lo, r.hi)
    }
}

/// Experiment settings. File keys mirror the CLI flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(rename = "network")]
    pub network_path: PathBuf,
    #[serde(rename = "congestion")]
    pub congestion_level: Congestion,
    #[serde(rename = "fc")]
    pub f_c: f64,
    #[serde(rename = "reps")]
    pub repetitions: usize,
    #[serde(rename = "algos")]
    pub algorithms: Vec<Algorithm>,
    #[serde(rename = "modalities")]
    pub modality_count_range: ModalityRange,
    #[serde(rename = "N")]
    pub history_window: usize,
    pub epsilon: f64,
    #[serde(rename = "seed")]
    pub base_seed: u64,
    #[serde(rename = "max-path-edges")]
    pub max_path_edges: usize,
    #[serde(rename = "doc-window")]
    pub doc_window: usize,
    #[serde(rename = "doc-gamma")]
    pub doc_gamma: usize,
    #[serde(rename = "out")]
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let doc = DocConfig::default();
        Self {
            network_path: PathBuf::new(),
            congestion_level: Congestion::Medium,
            f_c: 10.0,
            repetitions: 1,
            algorithms: vec![Algorithm::Tacts, Algorithm::Oracle],
            modality_count_range: ModalityRange::default(),
            history_window: 2,
            epsilon: 0.01,
            base_seed: 0,
            max_path_edges: DEFAULT_MAX_PATH_EDGES,
            doc_window: doc.window,
            doc_gamma: doc.gamma,
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn doc_config(&self) -> DocConfig {
        DocConfig {
            window: self.doc_window,
            gamma: self.doc_gamma,
            initial_modality: 0,
        }
    }

    pub fn wants(&self, algo: Algorithm) -> bool {
        self.algorithms.contains(&algo)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.network_path.as_os_str().is_empty() {
            return fail("no network file given".into());
        }
        if self.repetitions == 0 {
            return fail("repetitions must be at least 1".into());
        }
        if !(self.f_c > 0.0 && self.f_c.is_finite()) {
            return fail(format!("fc must be positive, got {}", self.f_c));
        }
        if self.algorithms.is_empty() {
            return fail("no algorithms selected".into());
        }
        let ModalityRange { lo, hi } = self.modality_count_range;
        if lo == 0 || lo > hi {
            return fail(format!("modality range {lo}:{hi} needs 1 <= lo <= hi"));
        }
        if self.history_window == 0 {
            return fail("N must be at least 1".into());
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return fail(format!("epsilon {} is outside (0, 1)", self.epsilon));
        }
        if self.max_path_edges == 0 {
            return fail("max-path-edges must be at least 1".into());
        }
        self.doc_config()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))
    }
}

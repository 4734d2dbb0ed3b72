use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cycles::CountOptions;
use crate::error::{Error, Result};
use crate::exponents::{derive_exponents, truncation_dimension, AlphaProfile, ExponentTable};
use crate::par::Execution;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Statistics that can be summarized per grid point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Statistic {
    #[serde(rename = "betti")]
    Betti,
    #[serde(rename = "S_m2")]
    SM2,
    #[serde(rename = "V_m2")]
    VM2,
    #[serde(rename = "T_m2")]
    TM2,
    #[serde(rename = "Y_q")]
    YQ,
}

impl Statistic {
    pub const ALL: [Statistic; 5] = [
        Statistic::Betti,
        Statistic::SM2,
        Statistic::VM2,
        Statistic::TM2,
        Statistic::YQ,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::Betti => "betti",
            Statistic::SM2 => "S_m2",
            Statistic::VM2 => "V_m2",
            Statistic::TM2 => "T_m2",
            Statistic::YQ => "Y_q",
        }
    }
}

fn default_alpha() -> AlphaProfile {
    AlphaProfile::new(vec![0.6, 0.0, 0.5]).expect("valid default")
}
fn default_m() -> usize {
    2
}
fn default_n() -> Vec<usize> {
    vec![20, 40, 80, 120, 160, 200]
}
fn default_replications() -> usize {
    200
}
fn default_seed() -> u64 {
    1
}
fn default_epsilons() -> Vec<f64> {
    vec![0.2, 0.4]
}
fn default_true() -> bool {
    true
}
fn default_statistics() -> Vec<Statistic> {
    Statistic::ALL.to_vec()
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

/// One Monte Carlo campaign. Mirrors the TOML configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_alpha")]
    pub alpha: AlphaProfile,
    #[serde(default = "default_m")]
    pub m: usize,
    /// Strictly increasing vertex counts.
    #[serde(default = "default_n")]
    pub n: Vec<usize>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Worker threads; `1` runs sequentially, absent uses every core.
    #[serde(default)]
    pub threads: Option<usize>,
    /// Highest sampled dimension; defaults to `m + 1`.
    #[serde(default)]
    pub d_max_build: Option<usize>,
    /// Relative deficits for the lower-tail experiment.
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    /// Component-based `S_j`/`R_j` (`true`) or subset-based (`false`).
    #[serde(default = "default_true")]
    pub sj_spanning: bool,
    /// Largest component size tabulated; defaults to `m + D`.
    #[serde(default)]
    pub j_max: Option<usize>,
    #[serde(default = "default_statistics")]
    pub statistics: Vec<Statistic>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default = "default_true")]
    pub plots: bool,
    /// Keep per-replication records in the output.
    #[serde(default = "default_true")]
    pub write_records: bool,
    /// Run lower-tail points even when the tail event is not expected.
    #[serde(default)]
    pub allow_unreachable_tail: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults deserialize")
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications must be at least 1".into()));
        }
        if self.n.is_empty() {
            return Err(Error::InvalidConfig("the n grid is empty".into()));
        }
        if self.n.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(format!("n grid {:?} is not strictly increasing", self.n)));
        }
        if self.m == 0 {
            return Err(Error::InvalidConfig("m must be at least 1".into()));
        }
        if self.d_max_build() < self.m + 1 {
            return Err(Error::InvalidConfig(format!(
                "d_max_build = {} is below m + 1 = {}",
                self.d_max_build(),
                self.m + 1
            )));
        }
        if let Some(&n) = self.n.iter().find(|&&n| n < self.d_max_build() + 1) {
            return Err(Error::InvalidConfig(format!("n = {n} is too small for dimension {}", self.d_max_build())));
        }
        if self.epsilons.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(Error::InvalidConfig("epsilons must lie in [0, 1]".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidConfig("threads must be positive".into()));
        }
        Ok(())
    }

    pub fn d_max_build(&self) -> usize {
        self.d_max_build.unwrap_or(self.m + 1)
    }

    pub fn execution(&self) -> Execution {
        Execution::from_threads(self.threads)
    }

    pub fn exponents(&self) -> Result<ExponentTable> {
        derive_exponents(&self.alpha)
    }

    /// `j_max`, or `m + D` when the truncation dimension is defined.
    pub fn count_options(&self, table: &ExponentTable) -> CountOptions {
        let j_max = self
            .j_max
            .or_else(|| truncation_dimension(table, self.m).ok().map(|d| self.m + d));
        CountOptions {
            j_max,
            spanning: self.sj_spanning,
        }
    }

    /// Seed for the grid point `n`: replications at different `n` use
    /// unrelated streams.
    pub fn grid_seed(&self, n: usize) -> u64 {
        derive_seed(self.seed, n as u64)
    }
}

/// SplitMix64 finalizer over `master ^ mix(n)`.
pub fn derive_seed(master: u64, salt: u64) -> u64 {
    let mut z = master ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

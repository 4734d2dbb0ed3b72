use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cycles::{self, CountOptions};
use crate::error::Result;
use crate::harness::config::ExperimentConfig;
use crate::par;
use crate::sampler::{sample_complex, SampleConfig};

/// Statistics of one replication at one grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub n: usize,
    pub rep: u64,
    pub seed: u64,
    pub betti: u64,
    /// `sum r` over components whose restriction is exactly the component.
    pub representation_sum: u64,
    /// Components whose restriction is larger than the component.
    pub non_maximal: u64,
    #[serde(rename = "S_m2")]
    pub s_m2: u64,
    #[serde(rename = "V_m2")]
    pub v_m2: u64,
    #[serde(rename = "T_m2")]
    pub t_m2: u64,
    /// `sum_{j >= m+3} r T_{j,r}`.
    pub higher_order: u64,
    #[serde(rename = "Y_q")]
    pub y_q: u64,
    pub f: Vec<u64>,
    /// `T_{j,r}` keyed `"j,r"`.
    pub components: BTreeMap<String, u64>,
    pub identity_violations: u64,
    pub wall_ms: f64,
}

impl ExperimentRecord {
    /// Copy with the timing zeroed, for determinism comparisons.
    pub fn without_timing(&self) -> Self {
        Self {
            wall_ms: 0.0,
            ..self.clone()
        }
    }
}

/// Samples and analyzes replication `rep` at vertex count `n`.
pub fn run_replication(
    config: &ExperimentConfig,
    n: usize,
    rep: u64,
    q: usize,
    options: CountOptions,
) -> Result<ExperimentRecord> {
    let start = Instant::now();
    let seed = config.grid_seed(n);
    let complex = sample_complex(&SampleConfig {
        n,
        alpha: config.alpha.clone(),
        d_max_build: config.d_max_build(),
        seed,
        replication_index: rep,
    })?;
    let analysis = cycles::analyze(&complex, config.m, q, options)?;
    let counts = &analysis.counts;

    let mut violations = counts.identity_violations();
    let rep_info = &analysis.representation;
    if !rep_info.used_fallback && rep_info.representation_sum != analysis.betti {
        violations.push(format!(
            "representation gives {} but homology gives {}",
            rep_info.representation_sum, analysis.betti
        ));
    }
    if !violations.is_empty() {
        log::error!("n = {n}, rep = {rep}, seed = {seed}: {}", violations.join("; "));
    }

    Ok(ExperimentRecord {
        n,
        rep,
        seed,
        betti: analysis.betti,
        representation_sum: rep_info.representation_sum,
        non_maximal: rep_info.non_maximal.len() as u64,
        s_m2: counts.s_m2,
        v_m2: counts.v_m2,
        t_m2: counts.t_m2,
        higher_order: counts.higher_order_betti(),
        y_q: counts.y_q,
        f: counts.f[..=config.m + 1].to_vec(),
        components: counts.t.iter().map(|(&(j, r), &c)| (format!("{j},{r}"), c)).collect(),
        identity_violations: violations.len() as u64,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// All replications at `n`, in replication order.
pub fn run_grid_point(config: &ExperimentConfig, n: usize) -> Result<Vec<ExperimentRecord>> {
    let table = config.exponents()?;
    let q = table.q();
    let options = config.count_options(&table);
    let records = par::try_map_indexed(config.execution(), config.replications, |rep| {
        run_replication(config, n, rep as u64, q, options)
    })?;
    let excluded = records.iter().filter(|r| r.non_maximal > 0).count();
    if excluded > 0 {
        log::warn!(
            "n = {n}: {excluded} of {} realizations have a component without a maximal restriction",
            records.len()
        );
    }
    Ok(records)
}

pub fn run_grid(config: &ExperimentConfig) -> Result<Vec<Vec<ExperimentRecord>>> {
    config.validate()?;
    config
        .n
        .iter()
        .map(|&n| {
            log::info!("n = {n}: {} replications", config.replications);
            run_grid_point(config, n)
        })
        .collect()
}

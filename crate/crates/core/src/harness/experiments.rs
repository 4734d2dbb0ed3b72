//! The four experiments. Field names follow the notation (`S_m2`, `Y_q`).
#![allow(non_snake_case)]

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::exponents::{check_clt_condition, check_limit_assumption, predict_limits, CltCheck, LimitPrediction, Regime};
use crate::harness::config::{ExperimentConfig, Statistic};
use crate::harness::record::{run_grid, ExperimentRecord};
use crate::oracle;
use crate::stats::{clopper_pearson, ks_distance_standard_normal, standardize, Moments};

/// Confidence of the one-sided Clopper–Pearson bound in the tail check.
pub const TAIL_CONFIDENCE: f64 = 0.99;

/// The tail check needs at least this many expected hits.
pub const MIN_EXPECTED_TAIL_HITS: f64 = 10.0;

/// Moments of one statistic at one grid point, with oracle values when known.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatisticRow {
    pub n: usize,
    pub statistic: String,
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub oracle_mean: Option<f64>,
    pub oracle_variance: Option<f64>,
}

fn column(records: &[ExperimentRecord], stat: Statistic) -> Vec<f64> {
    records
        .iter()
        .map(|r| match stat {
            Statistic::Betti => r.betti,
            Statistic::SM2 => r.s_m2,
            Statistic::VM2 => r.v_m2,
            Statistic::TM2 => r.t_m2,
            Statistic::YQ => r.y_q,
        } as f64)
        .collect()
}

fn statistic_rows(config: &ExperimentConfig, q: usize, grid: &[Vec<ExperimentRecord>]) -> Vec<StatisticRow> {
    let mut rows = Vec::new();
    for (records, &n) in grid.iter().zip(&config.n) {
        for &stat in &config.statistics {
            let m = Moments::of(&column(records, stat));
            let (oracle_mean, oracle_variance) = match stat {
                Statistic::SM2 => (
                    Some(oracle::exact_mean_s_m2(n, &config.alpha, config.m)),
                    Some(oracle::exact_var_s_m2(n, &config.alpha, config.m)),
                ),
                Statistic::VM2 => (Some(oracle::exact_mean_v_m2(n, &config.alpha, config.m)), None),
                Statistic::YQ => (Some(oracle::mean_y_q(n, &config.alpha, q)), None),
                _ => (None, None),
            };
            rows.push(StatisticRow {
                n,
                statistic: stat.name().to_string(),
                count: m.count,
                mean: m.mean,
                variance: m.variance,
                std_error: m.std_error(),
                skewness: m.skewness,
                excess_kurtosis: m.excess_kurtosis,
                oracle_mean,
                oracle_variance,
            });
        }
    }
    rows
}

fn total<F: Fn(&ExperimentRecord) -> u64>(records: &[ExperimentRecord], f: F) -> u64 {
    records.iter().map(f).sum()
}

fn check_grid(config: &ExperimentConfig, grid: &[Vec<ExperimentRecord>]) -> Result<()> {
    if grid.len() != config.n.len() {
        return Err(Error::InvalidConfig(format!(
            "{} record groups for an n grid of {}",
            grid.len(),
            config.n.len()
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SllnRow {
    pub n: usize,
    pub replications: usize,
    /// `beta / n^{tau_{m+1} + alpha_{m+1}}`, averaged.
    pub mean_ratio: f64,
    pub sd_ratio: f64,
    pub se_ratio: f64,
    pub limit: f64,
    /// `|mean_ratio / limit - 1|`.
    pub relative_gap: f64,
    pub mean_betti: f64,
    pub oracle_mean_S_m2: f64,
    /// `|mean_betti / E[S_{m+2}] - 1|`.
    pub oracle_gap: f64,
    /// Share of `beta` carried by `T_{m+2}`.
    pub share_T_m2: f64,
    /// Share of `beta` carried by components on `m + 3` or more vertices.
    pub share_higher: f64,
    pub non_maximal_realizations: usize,
    pub identity_violations: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SllnReport {
    pub config: ExperimentConfig,
    pub prediction: LimitPrediction,
    pub rows: Vec<SllnRow>,
    pub statistics: Vec<StatisticRow>,
    /// Each grid point is strictly closer to the limit than the previous one.
    pub monotone_toward_limit: bool,
    /// The last grid point is closer to the limit than the first.
    pub gap_shrinks: bool,
    /// Per-replication records, grid point by grid point.
    #[serde(skip)]
    pub records: Vec<ExperimentRecord>,
}

pub fn run_slln(config: &ExperimentConfig) -> Result<SllnReport> {
    let table = config.exponents()?;
    predict_limits(&table, config.m)?;
    slln_from_records(config, &run_grid(config)?)
}

pub fn slln_from_records(config: &ExperimentConfig, grid: &[Vec<ExperimentRecord>]) -> Result<SllnReport> {
    check_grid(config, grid)?;
    let table = config.exponents()?;
    let prediction = predict_limits(&table, config.m)?;
    let rows: Vec<SllnRow> = grid
        .iter()
        .zip(&config.n)
        .map(|(records, &n)| {
            let scale = (n as f64).powf(prediction.target_exponent);
            let ratios: Vec<f64> = records.iter().map(|r| r.betti as f64 / scale).collect();
            let mr = Moments::of(&ratios);
            let betti_total = total(records, |r| r.betti);
            let share = |x: u64| if betti_total > 0 { x as f64 / betti_total as f64 } else { f64::NAN };
            let oracle_mean = oracle::exact_mean_s_m2(n, &config.alpha, config.m);
            let mean_betti = betti_total as f64 / records.len() as f64;
            SllnRow {
                n,
                replications: records.len(),
                mean_ratio: mr.mean,
                sd_ratio: mr.variance.sqrt(),
                se_ratio: mr.std_error(),
                limit: prediction.slln_limit,
                relative_gap: (mr.mean / prediction.slln_limit - 1.0).abs(),
                mean_betti,
                oracle_mean_S_m2: oracle_mean,
                oracle_gap: (mean_betti / oracle_mean - 1.0).abs(),
                share_T_m2: share(total(records, |r| r.t_m2)),
                share_higher: share(total(records, |r| r.higher_order)),
                non_maximal_realizations: records.iter().filter(|r| r.non_maximal > 0).count(),
                identity_violations: total(records, |r| r.identity_violations),
            }
        })
        .collect();
    let gaps: Vec<f64> = rows.iter().map(|r| r.relative_gap).collect();
    Ok(SllnReport {
        config: config.clone(),
        prediction,
        monotone_toward_limit: gaps.windows(2).all(|w| w[1] < w[0]),
        gap_shrinks: gaps.last() < gaps.first(),
        statistics: statistic_rows(config, table.q(), grid),
        records: grid.concat(),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltRow {
    pub n: usize,
    pub replications: usize,
    pub regime: Regime,
    pub mean_S_m2_exact: f64,
    pub sd_S_m2_exact: f64,
    pub S_standardized_mean: f64,
    pub S_standardized_variance: f64,
    pub S_skewness: f64,
    pub S_excess_kurtosis: f64,
    pub S_ks: f64,
    pub betti_mean: f64,
    pub betti_sd_asym: f64,
    pub betti_skewness: f64,
    pub betti_excess_kurtosis: f64,
    pub betti_ks: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CltReport {
    pub config: ExperimentConfig,
    pub prediction: LimitPrediction,
    pub regime: Regime,
    pub clt_condition: CltCheck,
    pub S_standardization: &'static str,
    pub betti_standardization: &'static str,
    pub rows: Vec<CltRow>,
    pub statistics: Vec<StatisticRow>,
    /// `|skewness|`, `|excess kurtosis|` and KS of standardized `S_{m+2}`
    /// all decrease from the first to the last grid point.
    pub shape_improves: bool,
    /// Standardized `S_{m+2}` samples per grid point, for histograms.
    #[serde(skip)]
    pub standardized_S: Vec<Vec<f64>>,
    /// Per-replication records, grid point by grid point.
    #[serde(skip)]
    pub records: Vec<ExperimentRecord>,
}

pub fn run_clt(config: &ExperimentConfig) -> Result<CltReport> {
    clt_preconditions(config)?;
    clt_from_records(config, &run_grid(config)?)
}

fn clt_preconditions(config: &ExperimentConfig) -> Result<CltCheck> {
    let table = config.exponents()?;
    let check = check_clt_condition(&table, config.m)?;
    if !check.holds {
        return Err(Error::CltConditionFails {
            m: config.m,
            sup_value: check.sup_value,
        });
    }
    Ok(check)
}

pub fn clt_from_records(config: &ExperimentConfig, grid: &[Vec<ExperimentRecord>]) -> Result<CltReport> {
    check_grid(config, grid)?;
    let clt_condition = clt_preconditions(config)?;
    let table = config.exponents()?;
    let prediction = predict_limits(&table, config.m)?;
    let mut standardized_S = Vec::new();
    let rows: Vec<CltRow> = grid
        .iter()
        .zip(&config.n)
        .map(|(records, &n)| {
            let mean = oracle::exact_mean_s_m2(n, &config.alpha, config.m);
            let sd = oracle::exact_var_s_m2(n, &config.alpha, config.m).sqrt();
            let z = standardize(&column(records, Statistic::SM2), mean, sd);
            let zm = Moments::of(&z);
            let ks = ks_distance_standard_normal(&z);
            standardized_S.push(z);

            let betti = column(records, Statistic::Betti);
            let bm = Moments::of(&betti);
            let (var_asym, _) = oracle::asymptotic_var_s_m2(n, &table, config.m).expect("assumption checked");
            let b_sd = var_asym.sqrt();
            let bz = standardize(&betti, bm.mean, b_sd);
            let bzm = Moments::of(&bz);
            CltRow {
                n,
                replications: records.len(),
                regime: prediction.clt_regime,
                mean_S_m2_exact: mean,
                sd_S_m2_exact: sd,
                S_standardized_mean: zm.mean,
                S_standardized_variance: zm.variance,
                S_skewness: zm.skewness,
                S_excess_kurtosis: zm.excess_kurtosis,
                S_ks: ks,
                betti_mean: bm.mean,
                betti_sd_asym: b_sd,
                betti_skewness: bzm.skewness,
                betti_excess_kurtosis: bzm.excess_kurtosis,
                betti_ks: ks_distance_standard_normal(&bz),
            }
        })
        .collect();
    let shape_improves = match (rows.first(), rows.last()) {
        (Some(a), Some(b)) if rows.len() > 1 => {
            b.S_skewness.abs() < a.S_skewness.abs()
                && b.S_excess_kurtosis.abs() < a.S_excess_kurtosis.abs()
                && b.S_ks < a.S_ks
        }
        _ => false,
    };
    Ok(CltReport {
        config: config.clone(),
        regime: prediction.clt_regime,
        prediction,
        clt_condition,
        S_standardization: "oracle exact mean and exact standard deviation",
        betti_standardization: "empirical mean, asymptotic standard deviation",
        statistics: statistic_rows(config, table.q(), grid),
        records: grid.concat(),
        rows,
        shape_improves,
        standardized_S,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailStatus {
    /// The lower bound was compared with the confidence bound.
    Checked,
    /// `eps = 0`: the scaled bound is 0 and holds in the limit for any
    /// subexponential probability; nothing to check at finite `n`.
    Trivial,
    /// Fewer than the required expected hits; left unchecked.
    Unreachable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdRow {
    pub n: usize,
    pub epsilon: f64,
    /// `a_m = n^{tau_{m+1} + alpha_{m+1}} / (m+2)!`.
    pub a_m: f64,
    pub threshold: f64,
    pub hits: u64,
    pub replications: usize,
    pub frequency: f64,
    pub log_frequency: f64,
    /// One-sided Clopper–Pearson lower bound on the tail probability.
    pub cp_lower: f64,
    pub log_cp_lower: f64,
    pub scale_exponent: f64,
    pub rate_constant: f64,
    /// `-C eps^2 n^{scale}`, a lower bound, not a prediction.
    pub log_lower_bound: f64,
    /// Normal-approximation tail probability used for the reachability check.
    pub predicted_normal: f64,
    pub status: TailStatus,
    pub direction_holds: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LdReport {
    pub config: ExperimentConfig,
    pub prediction: LimitPrediction,
    pub confidence: f64,
    pub rows: Vec<LdRow>,
    pub statistics: Vec<StatisticRow>,
    /// Frequencies never increase with `eps` at fixed `n`.
    pub monotone_in_epsilon: bool,
    /// Every checked row satisfies the lower bound.
    pub direction_holds: bool,
    /// Per-replication records, grid point by grid point.
    #[serde(skip)]
    pub records: Vec<ExperimentRecord>,
}

/// Normal approximation of `P(beta <= threshold)` from the exact mean of
/// `V_{m+2}` and the exact variance of `S_{m+2}`.
fn predicted_tail(config: &ExperimentConfig, n: usize, threshold: f64) -> f64 {
    let mean = oracle::exact_mean_v_m2(n, &config.alpha, config.m);
    let sd = oracle::exact_var_s_m2(n, &config.alpha, config.m).sqrt();
    if sd == 0.0 {
        return if threshold >= mean { 1.0 } else { 0.0 };
    }
    Normal::standard().cdf((threshold + 0.5 - mean) / sd)
}

/// Refuses grid points whose tail event is not expected to occur.
pub fn check_tail_reachable(config: &ExperimentConfig) -> Result<()> {
    let table = config.exponents()?;
    let prediction = predict_limits(&table, config.m)?;
    for &n in &config.n {
        for &eps in config.epsilons.iter().filter(|&&e| e > 0.0) {
            let threshold = (1.0 - eps) * prediction.centering(n);
            let predicted = predicted_tail(config, n, threshold);
            if predicted * (config.replications as f64) < MIN_EXPECTED_TAIL_HITS {
                return Err(Error::TailUnreachable {
                    predicted,
                    replications: config.replications,
                });
            }
        }
    }
    Ok(())
}

pub fn run_ld(config: &ExperimentConfig) -> Result<LdReport> {
    let table = config.exponents()?;
    check_limit_assumption(&table, config.m)?;
    predict_limits(&table, config.m)?;
    if !config.allow_unreachable_tail {
        check_tail_reachable(config)?;
    }
    ld_from_records(config, &run_grid(config)?)
}

pub fn ld_from_records(config: &ExperimentConfig, grid: &[Vec<ExperimentRecord>]) -> Result<LdReport> {
    check_grid(config, grid)?;
    let table = config.exponents()?;
    let prediction = predict_limits(&table, config.m)?;
    let mut rows = Vec::new();
    let mut monotone = true;
    for (records, &n) in grid.iter().zip(&config.n) {
        let a_m = prediction.centering(n);
        let mut eps_sorted = config.epsilons.clone();
        eps_sorted.sort_by(f64::total_cmp);
        let mut last_freq = f64::INFINITY;
        for eps in eps_sorted {
            let threshold = (1.0 - eps) * a_m;
            let hits = records.iter().filter(|r| r.betti as f64 <= threshold).count() as u64;
            let reps = records.len();
            let frequency = hits as f64 / reps as f64;
            monotone &= frequency <= last_freq;
            last_freq = frequency;
            let cp_lower = clopper_pearson(hits, reps as u64, 2.0 * TAIL_CONFIDENCE - 1.0).0;
            let bound = oracle::ld_lower_bound(&prediction, eps, n);
            let predicted_normal = predicted_tail(config, n, threshold);
            let status = if eps == 0.0 {
                TailStatus::Trivial
            } else if predicted_normal * (reps as f64) < MIN_EXPECTED_TAIL_HITS {
                log::warn!("n = {n}, eps = {eps}: tail event expected {:.3} times", predicted_normal * reps as f64);
                TailStatus::Unreachable
            } else {
                TailStatus::Checked
            };
            let direction_holds = (status == TailStatus::Checked).then(|| cp_lower.ln() >= bound.log_lower_bound);
            rows.push(LdRow {
                n,
                epsilon: eps,
                a_m,
                threshold,
                hits,
                replications: reps,
                frequency,
                log_frequency: frequency.ln(),
                cp_lower,
                log_cp_lower: cp_lower.ln(),
                scale_exponent: prediction.ld_scale_exponent,
                rate_constant: prediction.ld_rate_constant,
                log_lower_bound: bound.log_lower_bound,
                predicted_normal,
                status,
                direction_holds,
            });
        }
    }
    Ok(LdReport {
        config: config.clone(),
        prediction,
        confidence: TAIL_CONFIDENCE,
        direction_holds: rows.iter().all(|r| r.direction_holds != Some(false)),
        monotone_in_epsilon: monotone,
        statistics: statistic_rows(config, table.q(), grid),
        records: grid.concat(),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub n: usize,
    pub replications: usize,
    pub S_mean: f64,
    pub S_mean_exact: f64,
    /// `(mean - exact) / standard error`.
    pub S_mean_z: f64,
    pub S_variance: f64,
    pub S_variance_exact: f64,
    pub S_variance_ratio: f64,
    pub V_mean: f64,
    pub V_mean_exact: f64,
    pub V_mean_z: f64,
    pub Y_q_mean: f64,
    pub Y_q_mean_exact: f64,
    pub Y_q_mean_z: f64,
    pub identity_violations: u64,
    pub non_maximal_realizations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<MomentRow>,
    pub statistics: Vec<StatisticRow>,
    pub identity_violations: u64,
    /// Per-replication records, grid point by grid point.
    #[serde(skip)]
    pub records: Vec<ExperimentRecord>,
}

pub fn run_moment_check(config: &ExperimentConfig) -> Result<MomentReport> {
    config.exponents()?;
    moments_from_records(config, &run_grid(config)?)
}

fn z_score(m: &Moments, exact: f64) -> f64 {
    let se = m.std_error();
    if se > 0.0 {
        (m.mean - exact) / se
    } else if m.mean == exact {
        0.0
    } else {
        f64::INFINITY
    }
}

pub fn moments_from_records(config: &ExperimentConfig, grid: &[Vec<ExperimentRecord>]) -> Result<MomentReport> {
    check_grid(config, grid)?;
    let table = config.exponents()?;
    let q = table.q();
    let (alpha, m) = (&config.alpha, config.m);
    let rows: Vec<MomentRow> = grid
        .iter()
        .zip(&config.n)
        .map(|(records, &n)| {
            let s = Moments::of(&column(records, Statistic::SM2));
            let v = Moments::of(&column(records, Statistic::VM2));
            let y = Moments::of(&column(records, Statistic::YQ));
            let (s_exact, s_var) = (oracle::exact_mean_s_m2(n, alpha, m), oracle::exact_var_s_m2(n, alpha, m));
            let v_exact = oracle::exact_mean_v_m2(n, alpha, m);
            let y_exact = oracle::mean_y_q(n, alpha, q);
            MomentRow {
                n,
                replications: records.len(),
                S_mean: s.mean,
                S_mean_exact: s_exact,
                S_mean_z: z_score(&s, s_exact),
                S_variance: s.variance,
                S_variance_exact: s_var,
                S_variance_ratio: s.variance / s_var,
                V_mean: v.mean,
                V_mean_exact: v_exact,
                V_mean_z: z_score(&v, v_exact),
                Y_q_mean: y.mean,
                Y_q_mean_exact: y_exact,
                Y_q_mean_z: z_score(&y, y_exact),
                identity_violations: total(records, |r| r.identity_violations),
                non_maximal_realizations: records.iter().filter(|r| r.non_maximal > 0).count(),
            }
        })
        .collect();
    Ok(MomentReport {
        config: config.clone(),
        identity_violations: rows.iter().map(|r| r.identity_violations).sum(),
        statistics: statistic_rows(config, q, grid),
        records: grid.concat(),
        rows,
    })
}

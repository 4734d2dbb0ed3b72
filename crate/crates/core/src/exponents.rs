//! Exponent calculus for `p_i = n^{-alpha_i}`.
//!
//! Everything here is a pure function of an [`AlphaProfile`]: the growth
//! exponents `psi_j` and `tau_j`, the decay dimension `q`, the critical
//! dimension `k`, assumption checks for a target dimension `m`, and the
//! limit constants attached to the Betti number `beta_m`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::combinatorics::{binomial_f64, factorial};
use crate::error::{Error, Result};

/// Default absolute tolerance for exponent equality tests.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Truncation dimensions above this are refused.
pub const MAX_TRUNCATION_DIMENSION: usize = 100_000;

/// Connectivity exponents `alpha_1..alpha_dmax`.
///
/// Entries may be `f64::INFINITY` (the face probability is zero). Every
/// dimension above `d_max` is treated as `alpha = inf`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaProfile {
    alpha: Vec<f64>,
}

impl AlphaProfile {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidAlpha("at least one exponent is required".into()));
        }
        if let Some((i, a)) = alpha
            .iter()
            .enumerate()
            .find(|(_, a)| a.is_nan() || **a < 0.0)
        {
            return Err(Error::InvalidAlpha(format!("alpha_{} = {a} is not in [0, inf]", i + 1)));
        }
        Ok(Self { alpha })
    }

    /// Largest dimension with an explicit exponent.
    pub fn d_max(&self) -> usize {
        self.alpha.len()
    }

    /// `alpha_i` for `i >= 1`; `alpha_0 = 0` (vertices are always present).
    pub fn get(&self, i: usize) -> f64 {
        match i {
            0 => 0.0,
            i if i <= self.alpha.len() => self.alpha[i - 1],
            _ => f64::INFINITY,
        }
    }

    /// `p_i = n^{-alpha_i}`.
    pub fn probability(&self, i: usize, n: usize) -> f64 {
        let a = self.get(i);
        if a == 0.0 {
            1.0
        } else if a.is_infinite() {
            0.0
        } else {
            (n as f64).powf(-a)
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.alpha
    }
}

impl FromStr for AlphaProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let alpha = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(parse_extended)
            .collect::<Result<Vec<_>>>()?;
        Self::new(alpha)
    }
}

fn parse_extended(token: &str) -> Result<f64> {
    match token.to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
        t => t
            .parse::<f64>()
            .map_err(|_| Error::InvalidAlpha(format!("cannot parse exponent '{token}'"))),
    }
}

impl fmt::Display for AlphaProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .alpha
            .iter()
            .map(|a| if a.is_infinite() { "inf".to_string() } else { a.to_string() })
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ExtendedReal {
    Finite(f64),
    Named(String),
}

impl Serialize for AlphaProfile {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let items: Vec<ExtendedReal> = self
            .alpha
            .iter()
            .map(|&a| {
                if a.is_infinite() {
                    ExtendedReal::Named("inf".into())
                } else {
                    ExtendedReal::Finite(a)
                }
            })
            .collect();
        items.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for AlphaProfile {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let items = Vec::<ExtendedReal>::deserialize(deserializer)?;
        let alpha = items
            .into_iter()
            .map(|item| match item {
                ExtendedReal::Finite(a) => Ok(a),
                ExtendedReal::Named(s) => parse_extended(&s),
            })
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        AlphaProfile::new(alpha).map_err(serde::de::Error::custom)
    }
}

/// CLT regime, by the sign of `(tau_{m+1} + alpha_{m+1}) - tau_q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "CLT-I")]
    I,
    #[serde(rename = "CLT-II")]
    II,
    #[serde(rename = "CLT-III")]
    III,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::I => "CLT-I",
            Regime::II => "CLT-II",
            Regime::III => "CLT-III",
        })
    }
}

/// Derived exponents of a profile.
#[derive(Clone, Debug)]
pub struct ExponentTable {
    alpha: AlphaProfile,
    psi: Vec<f64>,
    tau: Vec<f64>,
    q: usize,
    k: Option<usize>,
    tolerance: f64,
}

/// `sum_{i=1}^{upto} C(top, i + 1) alpha_i`, with `inf` propagation.
fn weighted_alpha_sum(alpha: &AlphaProfile, top: usize, upto: usize) -> f64 {
    (1..=upto)
        .filter(|&i| i < top)
        .map(|i| (i, alpha.get(i)))
        .filter(|&(_, a)| a != 0.0)
        .map(|(i, a)| binomial_f64(top as u64, i as u64 + 1) * a)
        .sum()
}

pub fn derive_exponents(alpha: &AlphaProfile) -> Result<ExponentTable> {
    derive_exponents_with_tolerance(alpha, DEFAULT_TOLERANCE)
}

pub fn derive_exponents_with_tolerance(alpha: &AlphaProfile, tolerance: f64) -> Result<ExponentTable> {
    let d_max = alpha.d_max();
    let q = (1..=d_max)
        .find(|&i| alpha.get(i) > 0.0)
        .ok_or(Error::NoPositiveAlpha)?;
    let psi: Vec<f64> = (1..=d_max).map(|j| psi_of(alpha, j)).collect();
    let tau: Vec<f64> = (0..=d_max).map(|j| tau_of(alpha, j)).collect();
    let mut table = ExponentTable {
        alpha: alpha.clone(),
        psi,
        tau,
        q,
        k: None,
        tolerance,
    };
    table.k = (q..d_max).find(|&j| {
        table.psi(j) < 1.0 - tolerance && table.psi(j + 1) > 1.0 + tolerance
    });
    Ok(table)
}

fn psi_of(alpha: &AlphaProfile, j: usize) -> f64 {
    (1..=j)
        .map(|i| (i, alpha.get(i)))
        .filter(|&(_, a)| a != 0.0)
        .map(|(i, a)| binomial_f64(j as u64, i as u64) * a)
        .sum()
}

/// `tau_j = j + 1 - sum_{i<=j} C(j+1, i+1) alpha_i`.
fn tau_of(alpha: &AlphaProfile, j: usize) -> f64 {
    (j + 1) as f64 - weighted_alpha_sum(alpha, j + 1, j)
}

impl ExponentTable {
    pub fn alpha(&self) -> &AlphaProfile {
        &self.alpha
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn k(&self) -> Option<usize> {
        self.k
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// `psi_j` for any `j >= 1`, including dimensions past `d_max`.
    pub fn psi(&self, j: usize) -> f64 {
        assert!(j >= 1, "psi is indexed from 1");
        self.psi
            .get(j - 1)
            .copied()
            .unwrap_or_else(|| psi_of(&self.alpha, j))
    }

    /// `tau_j` for any `j >= 0`.
    pub fn tau(&self, j: usize) -> f64 {
        self.tau.get(j).copied().unwrap_or_else(|| tau_of(&self.alpha, j))
    }

    /// `tau_{l-1}`, with the empty-sum convention `tau_{-1} = 0`.
    pub fn tau_shifted(&self, l: usize) -> f64 {
        if l == 0 {
            0.0
        } else {
            self.tau(l - 1)
        }
    }

    pub fn psi_values(&self) -> &[f64] {
        &self.psi
    }

    pub fn tau_values(&self) -> &[f64] {
        &self.tau
    }

    /// `tau_{m+1} + alpha_{m+1} = m + 2 - sum_{i<=m} C(m+2, i+1) alpha_i`.
    ///
    /// Computed in closed form so an infinite `alpha_{m+1}` does not
    /// produce `inf - inf`.
    pub fn target_exponent(&self, m: usize) -> f64 {
        (m + 2) as f64 - weighted_alpha_sum(&self.alpha, m + 2, m)
    }

    /// Total exponent `sum_{i<=m} C(m+2, i+1) alpha_i` of the probability
    /// that an `(m+2)`-set carries the full `m`-skeleton.
    pub fn skeleton_exponent(&self, m: usize) -> f64 {
        weighted_alpha_sum(&self.alpha, m + 2, m)
    }

    pub fn regime(&self, m: usize) -> Regime {
        let diff = self.target_exponent(m) - self.tau(self.q);
        if diff.abs() <= self.tolerance {
            Regime::III
        } else if diff > 0.0 {
            Regime::I
        } else {
            Regime::II
        }
    }

    fn require_above_critical(&self, m: usize) -> Result<usize> {
        let k = self.k.ok_or(Error::NoCriticalDimension {
            d_max_minus_one: self.alpha.d_max().saturating_sub(1),
        })?;
        if m <= k {
            return Err(Error::MBelowCritical { m, k });
        }
        Ok(k)
    }
}

/// Clause-by-clause outcome of the positivity assumption.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitAssumption {
    pub m: usize,
    pub target_exponent: f64,
    pub exponent_positive: bool,
    pub alpha_in_range: bool,
}

impl LimitAssumption {
    pub fn passes(&self) -> bool {
        self.exponent_positive && self.alpha_in_range
    }

    fn into_result(self) -> Result<Self> {
        if self.passes() {
            return Ok(self);
        }
        let reason = if !self.exponent_positive {
            format!("tau_(m+1) + alpha_(m+1) = {} is not positive", self.target_exponent)
        } else {
            "alpha_(m+1) is not in (0, inf)".to_string()
        };
        Err(Error::AssumptionFails { m: self.m, reason })
    }
}

pub fn check_limit_assumption(table: &ExponentTable, m: usize) -> Result<LimitAssumption> {
    table.require_above_critical(m)?;
    let target_exponent = table.target_exponent(m);
    let a = table.alpha.get(m + 1);
    Ok(LimitAssumption {
        m,
        target_exponent,
        exponent_positive: target_exponent > table.tolerance,
        alpha_in_range: a > table.tolerance && a.is_finite(),
    })
}

/// Outcome of the triple-overlap CLT condition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CltCheck {
    pub holds: bool,
    /// Maximizing `(l12, l13, l23, l123)`.
    pub witness: [usize; 4],
    pub sup_value: f64,
    pub tuples_checked: usize,
}

/// All `(l12, l13, l23, l123)` realizable as overlaps of three
/// `(m+2)`-sets with pairwise overlaps in `k+2..=m+1`.
pub fn feasible_overlap_tuples(k: usize, m: usize) -> Vec<[usize; 4]> {
    let size = m + 2;
    let range = (k + 2)..=(m + 1);
    let mut out = Vec::new();
    for l12 in range.clone() {
        for l13 in range.clone() {
            for l23 in range.clone() {
                let pair_max = (l12 + l13).max(l12 + l23).max(l13 + l23);
                let lo = pair_max.saturating_sub(size);
                let hi = l12.min(l13).min(l23);
                out.extend((lo..=hi).map(|l123| [l12, l13, l23, l123]));
            }
        }
    }
    out
}

pub fn check_clt_condition(table: &ExponentTable, m: usize) -> Result<CltCheck> {
    check_limit_assumption(table, m)?.into_result()?;
    clt_condition_supremum(table, m)
}

/// The supremum of the CLT condition without first requiring the limit
/// assumption; only `m > k` is enforced.
pub fn clt_condition_supremum(table: &ExponentTable, m: usize) -> Result<CltCheck> {
    let k = table.require_above_critical(m)?;
    let base = 1.5 * table.tau(table.q).min(table.target_exponent(m));
    let tuples = feasible_overlap_tuples(k, m);
    let (witness, sup_value) = tuples
        .iter()
        .map(|t| {
            let v = base + table.tau_shifted(t[3])
                - table.tau_shifted(t[0])
                - table.tau_shifted(t[1])
                - table.tau_shifted(t[2]);
            (*t, v)
        })
        .fold(([0; 4], f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    Ok(CltCheck {
        holds: sup_value < 0.0,
        witness,
        sup_value,
        tuples_checked: tuples.len(),
    })
}

/// Limit constants for `beta_m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitPrediction {
    pub m: usize,
    pub q: usize,
    pub target_exponent: f64,
    pub tau_q: f64,
    /// `1/(m+2)!`.
    pub slln_limit: f64,
    pub clt_regime: Regime,
    pub clt_scale_exponent: f64,
    /// Limit variance as printed in the CLT statement.
    pub theorem_constant: f64,
    /// Leading coefficient of `Var(S_{m+2})` in its variance asymptotics.
    pub variance_lemma_constant: f64,
    pub ld_scale_exponent: f64,
    /// `C` in the lower bound `-C * eps^2` on the scaled log tail.
    pub ld_rate_constant: f64,
}

impl LimitPrediction {
    /// `log P(beta <= (1-eps) a_m) >= -C eps^2 n^{scale}` as `n -> inf`.
    pub fn ld_log_lower_bound(&self, eps: f64, n: usize) -> f64 {
        -self.ld_rate_constant * eps * eps * (n as f64).powf(self.ld_scale_exponent)
    }

    /// `a_m = n^{tau_{m+1} + alpha_{m+1}} / (m+2)!`.
    pub fn centering(&self, n: usize) -> f64 {
        (n as f64).powf(self.target_exponent) * self.slln_limit
    }
}

/// `(q+1)! ((m-q+1)!)^2`.
fn overlap_factorial(m: usize, q: usize) -> f64 {
    factorial(q as u64 + 1) * factorial((m + 1 - q) as u64).powi(2)
}

/// `C_{m,q} = (5^4 2^{2(m+6)-q} v 2^{2(m+5)}) / (q+1)!`.
pub fn ld_constant_cmq(m: usize, q: usize) -> f64 {
    let first = 625.0 * 2f64.powi(2 * (m as i32 + 6) - q as i32);
    let second = 2f64.powi(2 * (m as i32 + 5));
    first.max(second) / factorial(q as u64 + 1)
}

pub fn predict_limits(table: &ExponentTable, m: usize) -> Result<LimitPrediction> {
    let assumption = check_limit_assumption(table, m)?.into_result()?;
    let e = assumption.target_exponent;
    let q = table.q;
    let tau_q = table.tau(q);
    let regime = table.regime(m);
    let top = factorial(m as u64 + 2);
    let overlap = overlap_factorial(m, q);
    let (clt_scale_exponent, theorem_constant, variance_lemma_constant) = match regime {
        Regime::I => (e - tau_q / 2.0, overlap, 1.0 / overlap),
        Regime::II => (e / 2.0, top, 1.0 / top),
        Regime::III => {
            let lemma = 1.0 / overlap + 1.0 / top;
            (e / 2.0, 1.0 / lemma, lemma)
        }
    };
    let (ld_scale_exponent, ld_rate_constant) = if e >= tau_q - table.tolerance {
        (tau_q, ld_constant_cmq(m, q))
    } else {
        (e, 5000.0 / top)
    };
    Ok(LimitPrediction {
        m,
        q,
        target_exponent: e,
        tau_q,
        slln_limit: 1.0 / top,
        clt_regime: regime,
        clt_scale_exponent,
        theorem_constant,
        variance_lemma_constant,
        ld_scale_exponent,
        ld_rate_constant,
    })
}

/// Smallest integer `D > (m + 2 + tau_m) / (psi_m - 1)`, at least 1.
pub fn truncation_dimension(table: &ExponentTable, m: usize) -> Result<usize> {
    let psi = table.psi(m);
    if psi <= 1.0 + table.tolerance {
        return Err(Error::PsiNotSupercritical { m, psi });
    }
    if psi.is_infinite() {
        return Ok(1);
    }
    let ratio = ((m + 2) as f64 + table.tau(m)) / (psi - 1.0);
    if !ratio.is_finite() || ratio >= MAX_TRUNCATION_DIMENSION as f64 {
        return Err(Error::InvalidConfig(format!(
            "truncation dimension {ratio} exceeds the cap {MAX_TRUNCATION_DIMENSION}"
        )));
    }
    let nearest = ratio.round();
    let d = if (ratio - nearest).abs() <= table.tolerance * nearest.abs().max(1.0) {
        nearest + 1.0
    } else {
        ratio.ceil()
    };
    Ok((d.max(1.0)) as usize)
}

/// Serializable digest used by the `exponents` subcommand.
#[derive(Clone, Debug, Serialize)]
pub struct ExponentSummary {
    pub alpha: AlphaProfile,
    pub psi: Vec<f64>,
    pub tau: Vec<f64>,
    pub q: usize,
    pub k: Option<usize>,
    pub m: Option<usize>,
    pub regime: Option<Regime>,
    pub assumption: Option<LimitAssumption>,
    pub clt_condition: Option<CltCheck>,
    pub truncation_dimension: Option<usize>,
    pub constants: Option<LimitPrediction>,
    pub notes: Vec<String>,
}

impl ExponentTable {
    pub fn summary(&self, m: Option<usize>) -> ExponentSummary {
        let mut notes = Vec::new();
        let mut note = |e: Error| notes.push(e.to_string());
        let (mut assumption, mut clt, mut trunc, mut constants) = (None, None, None, None);
        if let Some(m) = m {
            match check_limit_assumption(self, m) {
                Ok(a) => assumption = Some(a),
                Err(e) => note(e),
            }
            match check_clt_condition(self, m) {
                Ok(c) => clt = Some(c),
                Err(e) => note(e),
            }
            match truncation_dimension(self, m) {
                Ok(d) => trunc = Some(d),
                Err(e) => note(e),
            }
            match predict_limits(self, m) {
                Ok(p) => constants = Some(p),
                Err(e) => note(e),
            }
        }
        if self.k.is_none() {
            notes.push("no critical dimension in range".into());
        }
        ExponentSummary {
            alpha: self.alpha.clone(),
            psi: self.psi.clone(),
            tau: self.tau.clone(),
            q: self.q,
            k: self.k,
            m,
            regime: constants.as_ref().map(|c: &LimitPrediction| c.clt_regime),
            assumption,
            clt_condition: clt,
            truncation_dimension: trunc,
            constants,
            notes,
        }
    }
}

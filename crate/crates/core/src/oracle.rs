//! Exact finite-`n` and asymptotic moments of `S_{m+2}`, `V_{m+2}` and
//! `Y_q`, plus the Janson-type quantities `Lambda`, `delta`, `Pi`.
//!
//! `xi_sigma` is the indicator that an `(m+2)`-set `sigma` carries the full
//! `m`-skeleton. Two such sets overlapping in `l` vertices share exactly
//! the faces of an `(l-1)`-simplex, so
//! `E[xi xi'] = E[xi]^2 n^{sum_i C(l, i+1) alpha_i}`. All products are
//! accumulated in log space.

use serde::Serialize;

use crate::combinatorics::{binomial_f64, factorial, ln_binomial};
use crate::error::Result;
use crate::exponents::{derive_exponents, predict_limits, AlphaProfile, ExponentTable, LimitPrediction, Regime};

/// `ln E[xi] = -ln(n) sum_{i<=m} C(m+2, i+1) alpha_i`.
fn ln_skeleton_probability(n: usize, alpha: &AlphaProfile, m: usize) -> f64 {
    -(n as f64).ln() * weighted(alpha, m + 2, m)
}

/// `sum_{i<=upto} C(top, i+1) alpha_i`, skipping zero exponents so that
/// vanishing binomials never meet an infinite exponent.
fn weighted(alpha: &AlphaProfile, top: usize, upto: usize) -> f64 {
    (1..=upto)
        .filter(|&i| i < top)
        .map(|i| (i, alpha.get(i)))
        .filter(|&(_, a)| a != 0.0)
        .map(|(i, a)| binomial_f64(top as u64, i as u64 + 1) * a)
        .sum()
}

/// Log of the number of ordered pairs of `(m+2)`-sets meeting in `l` vertices.
fn ln_pairs(n: usize, m: usize, l: usize) -> f64 {
    let k = m + 2;
    if n < k {
        return f64::NEG_INFINITY;
    }
    ln_binomial(n as u64, k as u64) + ln_binomial(k as u64, l as u64) + ln_binomial((n - k) as u64, (k - l) as u64)
}

/// `E[S_{m+2}] = C(n, m+2) prod_i p_i^{C(m+2, i+1)}`.
pub fn exact_mean_s_m2(n: usize, alpha: &AlphaProfile, m: usize) -> f64 {
    if n < m + 2 {
        return 0.0;
    }
    (ln_binomial(n as u64, m as u64 + 2) + ln_skeleton_probability(n, alpha, m)).exp()
}

/// `E[V_{m+2}] = E[S_{m+2}] (1 - p_{m+1})`.
pub fn exact_mean_v_m2(n: usize, alpha: &AlphaProfile, m: usize) -> f64 {
    exact_mean_s_m2(n, alpha, m) * (1.0 - alpha.probability(m + 1, n))
}

/// `sum_l N_l (E[xi xi']_l - E[xi]^2)` over overlaps `l = 0..=m+2`.
pub fn exact_var_s_m2(n: usize, alpha: &AlphaProfile, m: usize) -> f64 {
    if n < m + 2 {
        return 0.0;
    }
    let ln_p = ln_skeleton_probability(n, alpha, m);
    if ln_p == f64::NEG_INFINITY {
        return 0.0;
    }
    let ln_n = (n as f64).ln();
    (0..=m + 2)
        .map(|l| {
            let shared = weighted(alpha, l, m);
            if shared == 0.0 {
                return 0.0;
            }
            let excess = (shared * ln_n).exp_m1();
            (ln_pairs(n, m, l) + 2.0 * ln_p + excess.ln()).exp()
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LambdaDeltaPi {
    pub mu: f64,
    pub lambda: f64,
    pub delta: f64,
    pub pi: f64,
}

/// `Lambda = mu + sum_{l=q+1}^{m+1} N_l E[xi xi']_l`, `delta = Lambda/mu - 1`,
/// `Pi = E[xi]`.
pub fn lambda_delta_pi(n: usize, alpha: &AlphaProfile, m: usize, q: usize) -> LambdaDeltaPi {
    let mu = exact_mean_s_m2(n, alpha, m);
    let ln_p = ln_skeleton_probability(n, alpha, m);
    let ln_n = (n as f64).ln();
    let cross: f64 = (q + 1..=m + 1)
        .map(|l| (ln_pairs(n, m, l) + 2.0 * ln_p + weighted(alpha, l, m) * ln_n).exp())
        .sum();
    let lambda = mu + cross;
    LambdaDeltaPi {
        mu,
        lambda,
        delta: if mu > 0.0 { cross / mu } else { 0.0 },
        pi: ln_p.exp(),
    }
}

/// `mu(Y_q) = C(floor(n/2), q+1) p_q`.
pub fn mean_y_q(n: usize, alpha: &AlphaProfile, q: usize) -> f64 {
    binomial_f64((n / 2) as u64, q as u64 + 1) * alpha.probability(q, n)
}

/// `n^{tau_q} / (2^{q+1} (q+1)!)`.
pub fn asymptotic_mean_y_q(n: usize, table: &ExponentTable) -> f64 {
    let q = table.q();
    (n as f64).powf(table.tau(q)) / (2f64.powi(q as i32 + 1) * factorial(q as u64 + 1))
}

/// Leading-order `Var(S_{m+2})` (shared by `Var(V_{m+2})`).
pub fn asymptotic_var_s_m2(n: usize, table: &ExponentTable, m: usize) -> Result<(f64, Regime)> {
    let p = predict_limits(table, m)?;
    let nf = n as f64;
    let value = match p.clt_regime {
        Regime::I => nf.powf(2.0 * p.target_exponent - p.tau_q) * p.variance_lemma_constant,
        Regime::II | Regime::III => nf.powf(p.target_exponent) * p.variance_lemma_constant,
    };
    Ok((value, p.clt_regime))
}

/// Leading-order `Lambda` and `delta`.
pub fn asymptotic_lambda_delta(n: usize, table: &ExponentTable, m: usize) -> Result<(f64, f64)> {
    let p = predict_limits(table, m)?;
    let nf = n as f64;
    let overlap = 1.0 / (factorial(p.q as u64 + 1) * factorial((m + 1 - p.q) as u64).powi(2));
    let top = p.slln_limit;
    let e = p.target_exponent;
    let lambda = match p.clt_regime {
        Regime::I => nf.powf(2.0 * e - p.tau_q) * overlap,
        Regime::II => nf.powf(e) * top,
        Regime::III => nf.powf(e) * (overlap + top),
    };
    let delta = match p.clt_regime {
        Regime::II => 0.0,
        _ => nf.powf(e - p.tau_q) * overlap / top,
    };
    Ok((lambda, delta))
}

/// The lower bound `exp(-C eps^2 n^{scale})` on `P(beta <= (1 - eps) a_m)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LdLowerBound {
    pub epsilon: f64,
    pub log_lower_bound: f64,
    pub lower_bound: f64,
}

pub fn ld_lower_bound(prediction: &LimitPrediction, eps: f64, n: usize) -> LdLowerBound {
    let log_lower_bound = prediction.ld_log_lower_bound(eps, n);
    LdLowerBound {
        epsilon: eps,
        log_lower_bound,
        lower_bound: log_lower_bound.exp(),
    }
}

#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub n: usize,
    pub m: usize,
    pub mean_S_m2: f64,
    pub mean_S_m2_asym: f64,
    pub var_S_m2_exact: f64,
    pub var_S_m2_asym: f64,
    pub mean_V_m2: f64,
    /// Only the leading order is available for `V_{m+2}`.
    pub var_V_m2_asym: f64,
    pub lambda: f64,
    pub lambda_asym: f64,
    pub delta: f64,
    pub delta_asym: f64,
    pub pi: f64,
    pub mean_Y_q: f64,
    pub mean_Y_q_asym: f64,
    pub regime: Regime,
    pub constants: LimitPrediction,
}

pub fn moment_report(n: usize, alpha: &AlphaProfile, m: usize) -> Result<MomentReport> {
    let table = derive_exponents(alpha)?;
    let constants = predict_limits(&table, m)?;
    let (var_asym, regime) = asymptotic_var_s_m2(n, &table, m)?;
    let (lambda_asym, delta_asym) = asymptotic_lambda_delta(n, &table, m)?;
    let ldp = lambda_delta_pi(n, alpha, m, table.q());
    Ok(MomentReport {
        n,
        m,
        mean_S_m2: ldp.mu,
        mean_S_m2_asym: constants.centering(n),
        var_S_m2_exact: exact_var_s_m2(n, alpha, m),
        var_S_m2_asym: var_asym,
        mean_V_m2: exact_mean_v_m2(n, alpha, m),
        var_V_m2_asym: var_asym,
        lambda: ldp.lambda,
        lambda_asym,
        delta: ldp.delta,
        delta_asym,
        pi: ldp.pi,
        mean_Y_q: mean_y_q(n, alpha, table.q()),
        mean_Y_q_asym: asymptotic_mean_y_q(n, &table),
        regime,
        constants,
    })
}

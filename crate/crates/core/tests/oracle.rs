use std::collections::BTreeSet;

use approx::assert_relative_eq;
use itertools::Itertools;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use betti_lab::exponents::{check_limit_assumption, derive_exponents, predict_limits, AlphaProfile, ExponentTable, Regime};
use betti_lab::oracle::{
    asymptotic_lambda_delta, asymptotic_var_s_m2, exact_mean_s_m2, exact_mean_v_m2, exact_var_s_m2, lambda_delta_pi,
    ld_lower_bound, mean_y_q, moment_report,
};

fn profile(a: &[f64]) -> AlphaProfile {
    AlphaProfile::new(a.to_vec()).unwrap()
}

/// Faces of dimensions `1..=m` spanned by `sigma`.
fn skeleton(sigma: &[u32], m: usize) -> BTreeSet<Vec<u32>> {
    (2..=m + 1)
        .flat_map(|size| sigma.iter().copied().combinations(size))
        .collect()
}

fn probability(faces: &BTreeSet<Vec<u32>>, alpha: &AlphaProfile, n: usize) -> f64 {
    faces.iter().map(|f| alpha.probability(f.len() - 1, n)).product()
}

struct Brute {
    mean: f64,
    second: f64,
    cross: f64,
}

/// Sums over every ordered pair of `(m+2)`-subsets of `[n]`.
fn brute(n: usize, alpha: &AlphaProfile, m: usize, q: usize) -> Brute {
    let sets: Vec<Vec<u32>> = (0..n as u32).combinations(m + 2).collect();
    let mut out = Brute {
        mean: 0.0,
        second: 0.0,
        cross: 0.0,
    };
    for a in &sets {
        let fa = skeleton(a, m);
        out.mean += probability(&fa, alpha, n);
        for b in &sets {
            let both: BTreeSet<Vec<u32>> = fa.union(&skeleton(b, m)).cloned().collect();
            let p = probability(&both, alpha, n);
            out.second += p;
            let l = a.iter().filter(|v| b.contains(v)).count();
            if (q + 1..=m + 1).contains(&l) {
                out.cross += p;
            }
        }
    }
    out
}

#[test]
fn exact_moments_match_pair_enumeration() {
    let cases: [(&[f64], usize); 4] = [
        (&[0.6, 0.0, 0.5], 2),
        (&[0.3, 0.2, 0.4], 2),
        (&[0.0, 0.5, 0.1, 0.3], 3),
        (&[0.8, 0.1], 1),
    ];
    for (alpha, m) in cases {
        let alpha = profile(alpha);
        let q = derive_exponents(&alpha).unwrap().q();
        for n in (m + 2)..=8 {
            let b = brute(n, &alpha, m, q);
            assert_relative_eq!(exact_mean_s_m2(n, &alpha, m), b.mean, max_relative = 1e-12);
            let var = b.second - b.mean * b.mean;
            assert_relative_eq!(exact_var_s_m2(n, &alpha, m), var, max_relative = 1e-9, epsilon = 1e-12);
            assert_relative_eq!(
                exact_mean_v_m2(n, &alpha, m),
                b.mean * (1.0 - alpha.probability(m + 1, n)),
                max_relative = 1e-12
            );
            let ldp = lambda_delta_pi(n, &alpha, m, q);
            assert_relative_eq!(ldp.lambda, b.mean + b.cross, max_relative = 1e-12);
            assert_relative_eq!(ldp.delta, b.cross / b.mean, max_relative = 1e-9, epsilon = 1e-15);
            assert_relative_eq!(ldp.pi, b.mean / sets_count(n, m), max_relative = 1e-12);
        }
    }
}

fn sets_count(n: usize, m: usize) -> f64 {
    (0..n as u32).combinations(m + 2).count() as f64
}

#[test]
fn y_q_mean_matches_enumeration() {
    let alpha = profile(&[0.0, 0.5, 0.1]);
    for n in [6usize, 9, 12] {
        let count = (0..(n / 2) as u32).combinations(3).count() as f64;
        assert_relative_eq!(mean_y_q(n, &alpha, 2), count * alpha.probability(2, n), max_relative = 1e-12);
    }
}

#[test]
fn default_profile_report_at_moderate_n() {
    let r = moment_report(40, &profile(&[0.6, 0.0, 0.5]), 2).unwrap();
    assert_eq!(r.regime, Regime::II);
    assert!(r.mean_V_m2 < r.mean_S_m2);
    assert!(r.var_S_m2_exact > 0.0);
    assert!(r.lambda >= r.mean_S_m2 && r.delta >= 0.0);
}

fn ratio_ok(exact: f64, asym: f64) -> bool {
    let r = exact / asym;
    (0.5..=2.0).contains(&r)
}

#[test]
fn asymptotics_track_exact_values_at_a_million() {
    let n = 1_000_000;
    for (alpha, m) in [(&[0.6, 0.0, 0.5][..], 2usize), (&[0.26, 0.0, 0.0, 0.0, 0.5][..], 4), (&[0.35, 0.0, 0.0, 0.5][..], 3)] {
        let r = moment_report(n, &profile(alpha), m).unwrap();
        assert!(ratio_ok(r.mean_S_m2, r.mean_S_m2_asym), "{alpha:?}: mean {} vs {}", r.mean_S_m2, r.mean_S_m2_asym);
        assert!(ratio_ok(r.var_S_m2_exact, r.var_S_m2_asym), "{alpha:?}: var {} vs {}", r.var_S_m2_exact, r.var_S_m2_asym);
        assert!(ratio_ok(r.lambda, r.lambda_asym), "{alpha:?}: lambda {} vs {}", r.lambda, r.lambda_asym);
        assert!(ratio_ok(r.mean_Y_q, r.mean_Y_q_asym), "{alpha:?}: Y_q {} vs {}", r.mean_Y_q, r.mean_Y_q_asym);
        if r.regime != Regime::II {
            assert!(ratio_ok(r.delta, r.delta_asym), "{alpha:?}: delta {} vs {}", r.delta, r.delta_asym);
        }
    }
}

fn table(a: &[f64]) -> ExponentTable {
    derive_exponents(&profile(a)).unwrap()
}

#[test]
fn regime_one_variance_uses_the_overlap_constant() {
    let t = table(&[0.26, 0.0, 0.0, 0.0, 0.5]);
    let (v, regime) = asymptotic_var_s_m2(1000, &t, 4).unwrap();
    assert_eq!(regime, Regime::I);
    let p = predict_limits(&t, 4).unwrap();
    // q = 1, m = 4: (q+1)! ((m-q+1)!)^2 = 2 (4!)^2 = 1152
    assert_relative_eq!(p.variance_lemma_constant, 1.0 / 1152.0, max_relative = 1e-12);
    assert_relative_eq!(v, 1000f64.powf(2.0 * p.target_exponent - p.tau_q) / 1152.0, max_relative = 1e-12);
    let (_, delta) = asymptotic_lambda_delta(1000, &t, 4).unwrap();
    assert!(delta > 0.0);
}

#[test]
fn lower_bound_is_a_probability() {
    let p = predict_limits(&table(&[0.6, 0.0, 0.5]), 2).unwrap();
    for eps in [0.0, 0.2, 0.4, 1.0] {
        let b = ld_lower_bound(&p, eps, 40);
        assert!(b.log_lower_bound <= 0.0 && (0.0..=1.0).contains(&b.lower_bound));
    }
    assert_eq!(ld_lower_bound(&p, 0.0, 40).lower_bound, 1.0);
    let loose = ld_lower_bound(&p, 0.2, 40).log_lower_bound;
    let tight = ld_lower_bound(&p, 0.4, 40).log_lower_bound;
    assert!(tight < loose);
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Profiles with a critical dimension whose `m = k + 1` meets the limit assumption.
fn valid_profiles(count: usize, seed: u64) -> Vec<(AlphaProfile, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let d = 3 + (rng.next_u64() % 3) as usize;
        let a: Vec<f64> = (0..d).map(|_| if uniform(&mut rng) < 0.2 { 0.0 } else { 1.2 * uniform(&mut rng) }).collect();
        let alpha = profile(&a);
        let Ok(t) = derive_exponents(&alpha) else { continue };
        let Some(k) = t.k() else { continue };
        if k + 1 >= d || !check_limit_assumption(&t, k + 1).map(|x| x.passes()).unwrap_or(false) {
            continue;
        }
        out.push((alpha, k + 1));
    }
    out
}

#[test]
fn random_profiles_reach_their_asymptotics_by_a_million() {
    let mut misses = Vec::new();
    for (alpha, m) in valid_profiles(100, 5) {
        let r = moment_report(1_000_000, &alpha, m).unwrap();
        if !ratio_ok(r.mean_S_m2, r.mean_S_m2_asym) || !ratio_ok(r.var_S_m2_exact, r.var_S_m2_asym) {
            misses.push(format!(
                "{:?}, m = {m}, {:?}: mean {:.3}, var {:.3}",
                alpha.values(),
                r.regime,
                r.mean_S_m2 / r.mean_S_m2_asym,
                r.var_S_m2_exact / r.var_S_m2_asym
            ));
        }
    }
    assert!(misses.is_empty(), "{}", misses.join("\n"));
}

#[test]
fn moment_inequalities_on_random_profiles() {
    for (alpha, m) in valid_profiles(100, 6) {
        let q = derive_exponents(&alpha).unwrap().q();
        for n in [m + 2, 30, 500] {
            let (s, v) = (exact_mean_s_m2(n, &alpha, m), exact_mean_v_m2(n, &alpha, m));
            assert!(s >= v && v >= 0.0, "{:?} n = {n}: {s} vs {v}", alpha.values());
            let ldp = lambda_delta_pi(n, &alpha, m, q);
            assert!(ldp.lambda >= s && ldp.delta >= 0.0);
            assert!(ldp.pi > 0.0 && ldp.pi < 1.0, "pi = {}", ldp.pi);
        }
        // a single (m+2)-set: S is Bernoulli
        let p = exact_mean_s_m2(m + 2, &alpha, m);
        assert_relative_eq!(exact_var_s_m2(m + 2, &alpha, m), p * (1.0 - p), max_relative = 1e-12);
    }
}

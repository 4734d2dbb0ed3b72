//! Binomial coefficients and the colexicographic rank of sorted tuples.

/// Exact binomial coefficient, `None` on `u128` overflow.
pub fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Binomial coefficient as a float, correctly rounded whenever it fits `u128`.
pub fn binomial_f64(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    match binomial_u128(n, k) {
        Some(v) => v as f64,
        None => ln_binomial(n, k).exp(),
    }
}

/// `ln C(n, k)`, `-inf` when `k > n`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if let Some(v) = binomial_u128(n, k) {
        return (v as f64).ln();
    }
    statrs::function::factorial::ln_binomial(n, k)
}

pub fn factorial(n: u64) -> f64 {
    statrs::function::factorial::factorial(n)
}

/// Colex rank of a strictly increasing tuple: `sum_t C(v_t, t + 1)`.
///
/// Ranks of all `k`-subsets of `{0..n-1}` are exactly `0..C(n, k)`, so the
/// rank doubles as a counter for the face-inclusion uniforms.
pub fn colex_rank(tuple: &[u32]) -> u128 {
    tuple
        .iter()
        .enumerate()
        .map(|(t, &v)| binomial_u128(v as u64, t as u64 + 1).expect("rank overflow"))
        .sum()
}

/// Packs a tuple into a hashable key. Identical to [`colex_rank`] except
/// that it is computed through a precomputed table.
#[derive(Debug, Clone)]
pub struct RankTable {
    n: usize,
    width: usize,
    table: Vec<u128>,
}

impl RankTable {
    /// Table for tuples over `{0..n-1}` with up to `width` entries.
    pub fn new(n: usize, width: usize) -> Option<Self> {
        let mut table = Vec::with_capacity(n * width);
        for v in 0..n {
            for t in 0..width {
                table.push(binomial_u128(v as u64, t as u64 + 1)?);
            }
        }
        // the largest rank must also fit
        binomial_u128(n as u64, width as u64)?;
        Some(Self { n, width, table })
    }

    #[inline]
    pub fn rank(&self, tuple: &[u32]) -> u128 {
        debug_assert!(tuple.len() <= self.width);
        tuple
            .iter()
            .enumerate()
            .map(|(t, &v)| self.table[v as usize * self.width + t])
            .sum()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn width(&self) -> usize {
        self.width
    }
}

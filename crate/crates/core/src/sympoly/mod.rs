//! Elementary symmetric polynomials in log space.
//!
//! `σ_p(Q)` is the sum over all `p`-subsets of `Q` of the product of their
//! entries. Weights of the form `k^-ε` span hundreds of orders of magnitude
//! for realistic degrees, so every table is carried as natural logarithms and
//! combined with log-sum-exp. A zero weight is represented by a log of
//! `-inf`.

mod hops;

pub use hops::{analytic_hops_powerlaw, analytic_hops_uniform, AnalyticHops};

use std::collections::HashMap;

use crate::{Error, Result};

/// Largest rounding amplification tolerated by backward deletion before the
/// excluded polynomial is recomputed from scratch (about `2e-10` relative).
const DELETION_MAX_AMPLIFICATION: f64 = 1e6;

/// Tables with more cells than this use per-index deletion instead of
/// prefix/suffix tables in [`esp_excluding_each`].
const PREFIX_SUFFIX_MAX_CELLS: usize = 1 << 22;

#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Log-sum-exp over a slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + xs.iter().map(|x| (x - hi).exp()).sum::<f64>().ln()
}

/// Non-negative weights together with their logarithms.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    values: Vec<f64>,
    logs: Vec<f64>,
}

impl WeightVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::param(
                "weights",
                format!("entries must be finite and non-negative, got {bad}"),
            ));
        }
        let logs = values.iter().map(|v| v.ln()).collect();
        Ok(Self { values, logs })
    }

    /// Builds the vector from log-weights. Logs may be `-inf` (zero weight);
    /// linear values are allowed to underflow, all arithmetic uses the logs.
    pub fn from_logs(logs: Vec<f64>) -> Result<Self> {
        if let Some(bad) = logs.iter().find(|l| l.is_nan() || **l == f64::INFINITY) {
            return Err(Error::param("weights", format!("invalid log-weight {bad}")));
        }
        let values = logs.iter().map(|l| l.exp()).collect();
        Ok(Self { values, logs })
    }

    /// `k^-ε` for each degree `k`, computed directly in log space.
    pub fn from_degrees(degrees: impl IntoIterator<Item = u32>, epsilon: f64) -> Result<Self> {
        Self::from_logs(
            degrees
                .into_iter()
                .map(|k| -epsilon * f64::from(k).ln())
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.logs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logs.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn logs(&self) -> &[f64] {
        &self.logs
    }
}

/// `logs[p] = ln σ_p(Q)` for `p = 0..=p_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct EspTable {
    logs: Vec<f64>,
    n: usize,
}

impl EspTable {
    pub fn log(&self, p: usize) -> f64 {
        self.logs[p]
    }

    pub fn value(&self, p: usize) -> f64 {
        self.logs[p].exp()
    }

    pub fn logs(&self) -> &[f64] {
        &self.logs
    }

    pub fn p_max(&self) -> usize {
        self.logs.len() - 1
    }

    /// Number of variables the table was built from.
    pub fn n(&self) -> usize {
        self.n
    }
}

/// Forward recurrence `σ_{p,i} = σ_{p,i-1} + q_i σ_{p-1,i-1}` over `logs`.
pub(crate) fn forward_logs<I>(logs: I, p_max: usize) -> Vec<f64>
where
    I: IntoIterator<Item = f64>,
{
    let mut table = vec![f64::NEG_INFINITY; p_max + 1];
    table[0] = 0.0;
    let mut seen = 0usize;
    for lw in logs {
        seen += 1;
        if lw == f64::NEG_INFINITY {
            continue;
        }
        for p in (1..=seen.min(p_max)).rev() {
            let prev = table[p - 1];
            if prev != f64::NEG_INFINITY {
                table[p] = log_add_exp(table[p], lw + prev);
            }
        }
    }
    table
}

/// All `σ_p(Q)` for `p ≤ p_max`, in `O(N · p_max)`.
pub fn esp_all(weights: &WeightVector, p_max: usize) -> Result<EspTable> {
    if p_max > weights.len() {
        return Err(Error::param(
            "p_max",
            format!("{p_max} exceeds the number of weights {}", weights.len()),
        ));
    }
    Ok(EspTable {
        logs: forward_logs(weights.logs.iter().copied(), p_max),
        n: weights.len(),
    })
}

/// `ln σ^{k̄}_p(Q)`: the order-`p` polynomial of `Q` with entry `k` removed.
pub fn esp_excluding(weights: &WeightVector, k: usize, p: usize) -> Result<f64> {
    let n = weights.len();
    if k >= n {
        return Err(Error::param("k", format!("index {k} out of range for {n} weights")));
    }
    if p + 1 > n {
        return Err(Error::param("p", format!("order {p} exceeds N-1 = {}", n - 1)));
    }
    let table = esp_all(weights, p)?;
    Ok(excluding_from_table(weights, &table, k, p)[p])
}

/// `ln σ^{k̄}_j(Q)` for `j = 0..=p_max`, by backward deletion from a full
/// table: `σ^{k̄}_j = σ_j − q_k σ^{k̄}_{j-1}`. When the subtraction cancels
/// enough to amplify rounding error past [`DELETION_MAX_AMPLIFICATION`], the
/// polynomial is recomputed by a forward pass over `Q \ {q_k}`.
pub fn excluding_from_table(
    weights: &WeightVector,
    table: &EspTable,
    k: usize,
    p_max: usize,
) -> Vec<f64> {
    debug_assert!(p_max <= table.p_max());
    let lw = weights.logs[k];
    let mut out = vec![f64::NEG_INFINITY; p_max + 1];
    out[0] = 0.0;
    if lw == f64::NEG_INFINITY {
        out.copy_from_slice(&table.logs[..=p_max]);
        return out;
    }
    // Relative error bound of out[j], in units of machine epsilon.
    let mut amp = 0.0f64;
    for j in 1..=p_max {
        let full = table.logs[j];
        let removed = lw + out[j - 1];
        if removed == f64::NEG_INFINITY {
            out[j] = full;
            amp += 1.0;
            continue;
        }
        let ratio = (removed - full).exp();
        if full == f64::NEG_INFINITY || ratio >= 1.0 {
            return forward_excluding(weights, k, p_max);
        }
        amp = (ratio * (amp + 1.0) + 1.0) / (1.0 - ratio) + 1.0;
        if amp > DELETION_MAX_AMPLIFICATION {
            return forward_excluding(weights, k, p_max);
        }
        out[j] = full + (-ratio).ln_1p();
    }
    out
}

fn forward_excluding(weights: &WeightVector, k: usize, p_max: usize) -> Vec<f64> {
    forward_logs(
        weights
            .logs
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k)
            .map(|(_, &l)| l),
        p_max,
    )
}

/// `ln σ^{k̄}_p(Q)` for every index `k`.
///
/// Uses prefix and suffix tables, `σ^{k̄}_p = Σ_j σ_j(Q_{<k}) σ_{p-j}(Q_{>k})`,
/// which involves no subtraction. Very large tables fall back to per-index
/// deletion.
pub fn esp_excluding_each(weights: &WeightVector, p: usize) -> Result<Vec<f64>> {
    let n = weights.len();
    if n == 0 || p + 1 > n {
        return Err(Error::param("p", format!("order {p} needs at least {} weights", p + 1)));
    }
    let width = p + 1;
    if n.saturating_mul(width) > PREFIX_SUFFIX_MAX_CELLS {
        let table = esp_all(weights, p)?;
        return Ok((0..n)
            .map(|k| excluding_from_table(weights, &table, k, p)[p])
            .collect());
    }
    let logs = &weights.logs;
    // prefix row i covers logs[..i], suffix row i covers logs[i..].
    let mut prefix = vec![f64::NEG_INFINITY; (n + 1) * width];
    let mut suffix = vec![f64::NEG_INFINITY; (n + 1) * width];
    prefix[0] = 0.0;
    suffix[n * width] = 0.0;
    for i in 0..n {
        let (done, rest) = prefix.split_at_mut((i + 1) * width);
        let prev = &done[i * width..];
        let next = &mut rest[..width];
        extend_row(prev, next, logs[i]);
    }
    for i in (0..n).rev() {
        let (head, tail) = suffix.split_at_mut((i + 1) * width);
        let prev = &tail[..width];
        let next = &mut head[i * width..];
        extend_row(prev, next, logs[i]);
    }
    let mut out = Vec::with_capacity(n);
    let mut terms = vec![0.0; width];
    for k in 0..n {
        let pre = &prefix[k * width..(k + 1) * width];
        let suf = &suffix[(k + 1) * width..(k + 2) * width];
        for j in 0..=p {
            terms[j] = pre[j] + suf[p - j];
        }
        out.push(log_sum_exp(&terms));
    }
    Ok(out)
}

fn extend_row(prev: &[f64], next: &mut [f64], lw: f64) {
    next[0] = prev[0];
    for j in 1..prev.len() {
        let with = if prev[j - 1] == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            lw + prev[j - 1]
        };
        next[j] = log_add_exp(prev[j], with);
    }
}

/// Marginal inclusion probabilities `P(v_k ∈ C) = q_k σ^{k̄}_{s-1} / σ_s`
/// when a set `C` of size `s` is drawn with `P(C) ∝ Π_{j∈C} q_j`.
///
/// Entries with identical weights share one deletion pass.
pub fn inclusion_probabilities(weights: &WeightVector, size: usize) -> Result<Vec<f64>> {
    let n = weights.len();
    if size == 0 || size > n {
        return Err(Error::param(
            "size",
            format!("set size {size} must lie in 1..={n}"),
        ));
    }
    let table = esp_all(weights, size)?;
    let total = table.log(size);
    if total == f64::NEG_INFINITY {
        return Err(Error::DegenerateWeights(format!(
            "σ_{size} vanishes: fewer than {size} positive weights"
        )));
    }
    let mut cache: HashMap<u64, f64> = HashMap::new();
    Ok((0..n)
        .map(|k| {
            let lw = weights.logs[k];
            if lw == f64::NEG_INFINITY {
                return 0.0;
            }
            let excl = *cache
                .entry(lw.to_bits())
                .or_insert_with(|| excluding_from_table(weights, &table, k, size - 1)[size - 1]);
            (lw + excl - total).exp()
        })
        .collect())
}

/// `σ_1 σ_q / ((q+1) σ_{q+1})`, the ratio bounded by `Θ(N/(N-q))`.
pub fn pool_ratio(weights: &WeightVector, q: usize) -> Result<f64> {
    let n = weights.len();
    if n < 2 {
        return Err(Error::param("weights", format!("need at least 2 weights, got {n}")));
    }
    if q == 0 || q >= n {
        return Err(Error::param("q", format!("{q} must lie in 1..{n}")));
    }
    let table = esp_all(weights, q + 1)?;
    let denom = table.log(q + 1);
    if denom == f64::NEG_INFINITY {
        return Err(Error::DegenerateWeights(format!("σ_{} vanishes", q + 1)));
    }
    Ok((table.log(1) + table.log(q) - ((q + 1) as f64).ln() - denom).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use proptest::prelude::*;

    fn wv(v: &[f64]) -> WeightVector {
        WeightVector::new(v.to_vec()).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn small_table_matches_enumeration() {
        let t = esp_all(&wv(&[1.0, 2.0, 3.0]), 3).unwrap();
        let expect = oracle::esp_brute_force(&[1.0, 2.0, 3.0]);
        assert_eq!(expect, vec![1.0, 6.0, 11.0, 6.0]);
        for (p, &e) in expect.iter().enumerate() {
            assert!(close(t.value(p), e, 1e-14), "p={p}");
        }
        assert_eq!(t.log(0), 0.0);
    }

    #[test]
    fn equal_weights_give_binomials() {
        let t = esp_all(&wv(&[1.0; 5]), 5).unwrap();
        assert!(close(t.value(2), 10.0, 1e-14));
        let w = 0.37;
        let t = esp_all(&wv(&[w; 9]), 4).unwrap();
        assert!(close(t.value(4), 126.0 * w.powi(4), 1e-13));
    }

    #[test]
    fn tiny_weights_do_not_underflow() {
        let t = esp_all(&wv(&[1e-9; 3]), 3).unwrap();
        let expect = 3.0 * 1e-9f64.ln();
        assert!(t.log(3).is_finite());
        assert!(close(t.log(3), expect, 1e-14));

        // Far below f64 range in linear space.
        let q = WeightVector::from_degrees([1000, 2000, 4000], 120.0).unwrap();
        let t = esp_all(&q, 3).unwrap();
        let expect: f64 = q.logs().iter().sum();
        assert!(close(t.log(3), expect, 1e-14));
    }

    #[test]
    fn p_max_above_n_is_rejected() {
        assert!(esp_all(&wv(&[1.0, 2.0]), 3).is_err());
    }

    #[test]
    fn zero_weights_are_exact() {
        let t = esp_all(&wv(&[0.0, 2.0, 0.0]), 3).unwrap();
        assert_eq!(t.value(1), 2.0);
        assert_eq!(t.log(2), f64::NEG_INFINITY);
        assert_eq!(t.log(3), f64::NEG_INFINITY);
    }

    #[test]
    fn excluding_small_cases() {
        let q = wv(&[1.0, 2.0, 3.0]);
        assert!(close(esp_excluding(&q, 2, 2).unwrap().exp(), 2.0, 1e-14));
        let w = 0.8;
        let q = wv(&[w; 4]);
        for k in 0..4 {
            assert!(close(esp_excluding(&q, k, 1).unwrap().exp(), 3.0 * w, 1e-14));
        }
        assert!(esp_excluding(&q, 4, 1).is_err());
        assert!(esp_excluding(&q, 0, 4).is_err());
    }

    #[test]
    fn deletion_falls_back_when_one_weight_dominates() {
        // q_k carries almost all of σ_p; plain backward deletion would lose
        // every significant digit.
        let mut v = vec![1e-7; 8];
        v[3] = 1e9;
        let q = wv(&v);
        let mut others = v.clone();
        others.remove(3);
        let exact = oracle::esp_brute_force(&others);
        for (p, &want) in exact.iter().enumerate() {
            let got = esp_excluding(&q, 3, p).unwrap().exp();
            assert!(close(got, want, 1e-12), "p={p} got={got} want={want}");
        }
    }

    #[test]
    fn pool_ratio_equal_weights() {
        let r = pool_ratio(&wv(&[1.0; 5]), 2).unwrap();
        assert!(close(r, 5.0 / 3.0, 1e-14));
        let r = pool_ratio(&wv(&[1.0; 10]), 3).unwrap();
        assert!(close(r, 10.0 / 7.0, 1e-14));
        assert!(matches!(
            pool_ratio(&wv(&[1.0, 0.0, 0.0]), 1),
            Err(Error::DegenerateWeights(_))
        ));
        assert!(pool_ratio(&wv(&[1.0]), 1).is_err());
    }

    #[test]
    fn inclusion_probabilities_sum_to_set_size() {
        let q = WeightVector::from_degrees([1, 1, 2, 3, 3, 5, 8, 13], 2.5).unwrap();
        for s in 1..=8 {
            let pi = inclusion_probabilities(&q, s).unwrap();
            let total: f64 = pi.iter().sum();
            assert!(close(total, s as f64, 1e-12), "s={s} total={total}");
            assert!(pi.iter().all(|&p| (0.0..=1.0 + 1e-9).contains(&p)), "s={s} {pi:?}");
        }
        let pi = inclusion_probabilities(&q, 8).unwrap();
        assert!(pi.iter().all(|&p| close(p, 1.0, 1e-9)));
    }

    proptest! {
        #[test]
        fn inclusion_exclusion_identity(
            logs in prop::collection::vec(-8.0f64..8.0, 2..14),
            k_seed in any::<usize>(),
        ) {
            let q = WeightVector::from_logs(logs).unwrap();
            let n = q.len();
            let k = k_seed % n;
            let table = esp_all(&q, n).unwrap();
            let excl = excluding_from_table(&q, &table, k, n - 1);
            for p in 1..n {
                let rebuilt = log_add_exp(excl[p], q.logs()[k] + excl[p - 1]);
                prop_assert!((rebuilt - table.log(p)).abs() < 1e-9);
            }
        }

        #[test]
        fn each_exclusion_matches_single_exclusion(
            logs in prop::collection::vec(-6.0f64..6.0, 2..12),
            p_seed in any::<usize>(),
        ) {
            let q = WeightVector::from_logs(logs).unwrap();
            let n = q.len();
            let p = p_seed % n;
            let each = esp_excluding_each(&q, p).unwrap();
            for (k, got) in each.iter().enumerate() {
                let single = esp_excluding(&q, k, p).unwrap();
                prop_assert!((got - single).abs() < 1e-9, "k={} p={}", k, p);
            }
        }
    }
}

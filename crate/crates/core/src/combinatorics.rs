//! Run-length representation of binary sequences, per-run deletion patterns
//! and the coefficient sums `W_j(n)` and `S3(n)` that enter the deletion and
//! insertion bounds.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{compensated_sum, exact_binomial, sum_by_magnitude, LogFactorials};

/// A non-empty binary sequence `(b; n_1, ..., n_K)`: first-run symbol and
/// the lengths of its maximal runs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct RunLengthSequence {
    first_bit: u8,
    runs: Vec<usize>,
}

impl RunLengthSequence {
    pub fn new(first_bit: u8, runs: Vec<usize>) -> Result<Self> {
        if first_bit > 1 {
            return Err(Error::domain(format!(
                "first run symbol must be 0 or 1, got {first_bit}"
            )));
        }
        if runs.is_empty() {
            return Err(Error::domain(
                "a run-length sequence needs at least one run",
            ));
        }
        if runs.contains(&0) {
            return Err(Error::domain("run lengths must be positive"));
        }
        Ok(RunLengthSequence { first_bit, runs })
    }

    pub fn encode(bits: &[u8]) -> Result<Self> {
        let (&first, _) = bits
            .split_first()
            .ok_or_else(|| Error::domain("cannot run-length encode an empty sequence"))?;
        let mut runs = Vec::new();
        let mut current = first;
        let mut len = 0usize;
        for &b in bits {
            if b > 1 {
                return Err(Error::domain(format!(
                    "binary sequence contains symbol {b}"
                )));
            }
            if b == current {
                len += 1;
            } else {
                runs.push(len);
                current = b;
                len = 1;
            }
        }
        runs.push(len);
        Ok(RunLengthSequence {
            first_bit: first,
            runs,
        })
    }

    pub fn decode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.len());
        for (k, &len) in self.runs.iter().enumerate() {
            out.extend(std::iter::repeat_n(self.run_bit(k), len));
        }
        out
    }

    pub fn first_bit(&self) -> u8 {
        self.first_bit
    }

    pub fn runs(&self) -> &[usize] {
        &self.runs
    }

    /// Symbol carried by run `k` (0-based).
    pub fn run_bit(&self, k: usize) -> u8 {
        self.first_bit ^ (k % 2) as u8
    }

    pub fn run_count(&self) -> usize {
        self.runs.len()
    }

    /// Total length `n`.
    pub fn len(&self) -> usize {
        self.runs.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of runs of length one.
    pub fn singleton_runs(&self) -> usize {
        self.runs.iter().filter(|&&r| r == 1).count()
    }
}

impl fmt::Display for RunLengthSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({};", self.first_bit)?;
        for (i, r) in self.runs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, ")")
    }
}

/// Per-run deletion counts `(d_1, ..., d_K)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct DeletionPattern {
    per_run: Vec<usize>,
}

impl DeletionPattern {
    pub fn new(per_run: Vec<usize>) -> Self {
        DeletionPattern { per_run }
    }

    pub fn per_run(&self) -> &[usize] {
        &self.per_run
    }

    pub fn total(&self) -> usize {
        self.per_run.iter().sum()
    }

    /// `Π_k C(n_k, d_k)`: the number of index sets realising this pattern.
    pub fn multiplicity(&self, runs: &[usize]) -> u128 {
        self.per_run
            .iter()
            .zip(runs)
            .map(|(&d, &n)| exact_binomial(n as u64, d as u64))
            .product()
    }
}

/// Applies `D * x`: removes `d_k` symbols from run `k`. Emptied runs vanish
/// and their neighbours coalesce; `None` when everything is deleted.
pub fn apply_deletion_pattern(
    x: &RunLengthSequence,
    pattern: &DeletionPattern,
) -> Result<Option<RunLengthSequence>> {
    if pattern.per_run.len() != x.runs.len() {
        return Err(Error::domain(format!(
            "deletion pattern has {} entries but the sequence has {} runs",
            pattern.per_run.len(),
            x.runs.len()
        )));
    }
    let mut bits = Vec::with_capacity(x.len());
    for (k, (&n, &d)) in x.runs.iter().zip(&pattern.per_run).enumerate() {
        if d > n {
            return Err(Error::domain(format!(
                "run {k} has length {n} but {d} deletions"
            )));
        }
        bits.extend(std::iter::repeat_n(x.run_bit(k), n - d));
    }
    if bits.is_empty() {
        Ok(None)
    } else {
        RunLengthSequence::encode(&bits).map(Some)
    }
}

/// All `(d_1, ..., d_K)` with `0 <= d_k <= n_k` and `Σ d_k = d`, in
/// decreasing lexicographic order.
pub fn enumerate_deletion_patterns(runs: &[usize], d: usize) -> DeletionPatterns {
    let total: usize = runs.iter().sum();
    let mut suffix_capacity = vec![0usize; runs.len() + 1];
    for k in (0..runs.len()).rev() {
        suffix_capacity[k] = suffix_capacity[k + 1] + runs[k];
    }
    let current = if d <= total && !runs.is_empty() {
        let mut first = vec![0; runs.len()];
        fill_greedy(&mut first, runs, 0, d);
        Some(first)
    } else if d == 0 && runs.is_empty() {
        Some(Vec::new())
    } else {
        None
    };
    DeletionPatterns {
        runs: runs.to_vec(),
        suffix_capacity,
        current,
    }
}

fn fill_greedy(pattern: &mut [usize], runs: &[usize], from: usize, mut remaining: usize) {
    for k in from..runs.len() {
        let take = remaining.min(runs[k]);
        pattern[k] = take;
        remaining -= take;
    }
    debug_assert_eq!(remaining, 0);
}

#[derive(Debug, Clone)]
pub struct DeletionPatterns {
    runs: Vec<usize>,
    suffix_capacity: Vec<usize>,
    current: Option<Vec<usize>>,
}

impl Iterator for DeletionPatterns {
    type Item = DeletionPattern;

    fn next(&mut self) -> Option<DeletionPattern> {
        let out = self.current.take()?;
        // Successor: the rightmost position (not the last) that can give one
        // unit to the positions after it; refill those greedily.
        let k_max = out.len();
        let mut next = out.clone();
        let mut tail: usize = 0;
        let mut found = false;
        for i in (0..k_max).rev() {
            if i + 1 < k_max && next[i] > 0 && tail < self.suffix_capacity[i + 1] {
                next[i] -= 1;
                fill_greedy(&mut next, &self.runs, i + 1, tail + 1);
                found = true;
                break;
            }
            tail += next[i];
        }
        if found {
            self.current = Some(next);
        }
        Some(DeletionPattern { per_run: out })
    }
}

/// Expected number of runs of length `l` in a uniformly random binary
/// sequence of length `n`: `2^{-l-1}(n-l+3)` for `l < n` and `2^{1-n}` for
/// `l = n`. Can exceed one.
pub fn expected_run_count(l: usize, n: usize) -> Result<f64> {
    if l == 0 || l > n {
        return Err(Error::domain(format!("run length {l} outside [1, {n}]")));
    }
    if l == n {
        return Ok((1.0 - n as f64).exp2());
    }
    Ok((-(l as f64) - 1.0).exp2() * (n - l + 3) as f64)
}

/// `W_j(n)`, the normalised expected per-run binomial log term entering the
/// deletion bound.
pub fn w_coefficient(n: usize, j: usize) -> Result<f64> {
    if n == 0 || j == 0 || j > n {
        return Err(Error::domain(format!(
            "W_j(n) needs 1 <= j <= n, got j = {j}, n = {n}"
        )));
    }
    let logs = LogFactorials::new(n);
    Ok(w_with_table(&logs, n, j))
}

/// `W_j(n)` for every `j` in `js`, evaluated in parallel.
pub fn w_coefficients(n: usize, js: &[usize]) -> Result<Vec<f64>> {
    if let Some(&bad) = js.iter().find(|&&j| j == 0 || j > n) {
        return Err(Error::domain(format!(
            "W_j(n) needs 1 <= j <= n, got j = {bad}, n = {n}"
        )));
    }
    let logs = LogFactorials::new(n);
    Ok(js.par_iter().map(|&j| w_with_table(&logs, n, j)).collect())
}

pub(crate) fn w_with_table(logs: &LogFactorials, n: usize, j: usize) -> f64 {
    let log_total = logs.log2_binomial(n, j);
    let mut terms = Vec::new();
    let mut partial = 0.0f64;
    for l in 1..n {
        // Each l contributes at most 2^{-l-1}(n+3) l; stop once the whole
        // remaining tail is below the last bit of the partial sum.
        let tail_bound = (n as f64 + 3.0) * (l as f64 + 1.0) * (-(l as f64)).exp2();
        if partial > 0.0 && tail_bound < partial * (-64f64).exp2() {
            break;
        }
        let log_weight = -(l as f64) - 1.0 + ((n - l + 3) as f64).log2();
        let lo = 1.max(j.saturating_sub(n - l));
        let hi = j.min(l);
        let mut row = 0.0;
        for jp in lo..=hi {
            let log_c = logs.log2_binomial(l, jp);
            if log_c == 0.0 {
                continue;
            }
            let log_term = log_weight + log_c + logs.log2_binomial(n - l, j - jp) - log_total;
            let t = log_term.exp2() * log_c;
            if t > 0.0 {
                terms.push(t);
                row += t;
            }
        }
        partial += row;
    }
    let whole_run = (1.0 - n as f64).exp2() * log_total;
    if whole_run > 0.0 {
        terms.push(whole_run);
    }
    sum_by_magnitude(&mut terms)
}

/// `S3(n)`: the input average of the run-length term of the single-insertion
/// conditional entropy,
/// `(1/(2^{n+2} n)) Σ_{x, K>1} [f(n_1+1) + f(n_K+1) + Σ_{1<k<K} f(n_k+2)] + log2(n)/2^{n+1}`
/// with `f(v) = v log2 v`, reduced over run-length classes.
pub fn s3_coefficient(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("S3(n) needs n >= 1"));
    }
    let nf = n as f64;
    // Per l < n: interior runs of length l have expected count
    // (n-l-1) 2^{-l-1}; a first or last run has length l with prob. 2^{-l}.
    let sum = compensated_sum((1..n).map(|l| {
        let lf = l as f64;
        (-lf - 1.0).exp2() * (nf - lf - 1.0) * (lf + 2.0) * (lf + 2.0).log2()
            + (1.0 - lf).exp2() * (lf + 1.0) * (lf + 1.0).log2()
    }));
    Ok(sum / (4.0 * nf) + nf.log2() / (nf + 1.0).exp2())
}

/// The stated closed-form rewrite of `S3(n)`,
/// `(1/4n) Σ_{l<n} 2^{-l}[(n+1-l)(l+2)log2(l+2) + 2(l+1)log2(l+1)] + log2(n)/2^{n+1}`.
/// It overstates [`s3_coefficient`] for every `n >= 2` (the interior weight
/// should be `2^{-l-1}(n-l-1)`); kept because the reference insertion table
/// values are computed from it.
pub fn s3_closed_form(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("S3(n) needs n >= 1"));
    }
    let nf = n as f64;
    let sum = compensated_sum((1..n).map(|l| {
        let lf = l as f64;
        (-lf).exp2()
            * ((nf + 1.0 - lf) * (lf + 2.0) * (lf + 2.0).log2()
                + 2.0 * (lf + 1.0) * (lf + 1.0).log2())
    }));
    Ok(sum / (4.0 * nf) + nf.log2() / (nf + 1.0).exp2())
}

/// Number of index sets whose deletion turns `x` into `y`, i.e. the number
/// of embeddings of `y` as a subsequence of `x`.
pub fn subsequence_weight(x: &[u8], y: &[u8]) -> u128 {
    if y.len() > x.len() {
        return 0;
    }
    let mut ways = vec![0u128; y.len() + 1];
    ways[0] = 1;
    for &xi in x {
        for j in (1..=y.len()).rev() {
            if y[j - 1] == xi {
                ways[j] += ways[j - 1];
            }
        }
    }
    ways[y.len()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn encode_reference_example() {
        let bits = [0, 0, 1, 1, 1, 1, 0, 1, 1, 0, 0, 0];
        let rls = RunLengthSequence::encode(&bits).unwrap();
        assert_eq!(rls.first_bit(), 0);
        assert_eq!(rls.runs(), &[2, 4, 1, 2, 3]);
        assert_eq!(rls.to_string(), "(0;2,4,1,2,3)");
        assert_eq!(rls.decode(), bits);
        assert_eq!(rls.singleton_runs(), 1);

        let one = RunLengthSequence::encode(&[1]).unwrap();
        assert_eq!((one.first_bit(), one.runs()), (1, &[1usize][..]));
    }

    #[test]
    fn encode_rejects_bad_input() {
        assert!(RunLengthSequence::encode(&[]).is_err());
        assert!(RunLengthSequence::encode(&[0, 2]).is_err());
        assert!(RunLengthSequence::new(0, vec![]).is_err());
        assert!(RunLengthSequence::new(0, vec![1, 0]).is_err());
        assert!(RunLengthSequence::new(2, vec![1]).is_err());
    }

    #[test]
    fn deletion_pattern_merges_runs() {
        let x = RunLengthSequence::new(1, vec![2, 1, 2, 3, 2]).unwrap();
        let a = apply_deletion_pattern(&x, &DeletionPattern::new(vec![1, 1, 2, 3, 0]))
            .unwrap()
            .unwrap();
        let b = apply_deletion_pattern(&x, &DeletionPattern::new(vec![0, 1, 2, 3, 1]))
            .unwrap()
            .unwrap();
        assert_eq!(a.decode(), vec![1, 1, 1]);
        assert_eq!(a, b);
        assert_eq!(a.runs(), &[3]);

        let same = apply_deletion_pattern(&x, &DeletionPattern::new(vec![0; 5]))
            .unwrap()
            .unwrap();
        assert_eq!(same, x);
        assert!(
            apply_deletion_pattern(&x, &DeletionPattern::new(vec![2, 1, 2, 3, 2]))
                .unwrap()
                .is_none()
        );
        assert!(apply_deletion_pattern(&x, &DeletionPattern::new(vec![3, 0, 0, 0, 0])).is_err());
        assert!(apply_deletion_pattern(&x, &DeletionPattern::new(vec![0, 0])).is_err());
    }

    #[test]
    fn pattern_enumeration_small_cases() {
        let got: Vec<_> = enumerate_deletion_patterns(&[2, 1], 1)
            .map(|p| p.per_run().to_vec())
            .collect();
        assert_eq!(got, vec![vec![1, 0], vec![0, 1]]);
        let one_run: Vec<_> = enumerate_deletion_patterns(&[7], 3).collect();
        assert_eq!(one_run, vec![DeletionPattern::new(vec![3])]);
        assert_eq!(enumerate_deletion_patterns(&[2, 2], 5).count(), 0);
        assert_eq!(enumerate_deletion_patterns(&[2, 2], 0).count(), 1);
    }

    #[test]
    fn pattern_enumeration_is_exhaustive_and_unique() {
        let runs = [3, 1, 2, 4];
        for d in 0..=10 {
            let pats: Vec<_> = enumerate_deletion_patterns(&runs, d).collect();
            let mut brute = Vec::new();
            for a in 0..=3 {
                for b in 0..=1 {
                    for c in 0..=2 {
                        for e in 0..=4 {
                            if a + b + c + e == d {
                                brute.push(vec![a, b, c, e]);
                            }
                        }
                    }
                }
            }
            let mut got: Vec<_> = pats.iter().map(|p| p.per_run().to_vec()).collect();
            got.sort();
            brute.sort();
            assert_eq!(got, brute, "d = {d}");
        }
    }

    #[test]
    fn vandermonde_on_all_profiles_up_to_twelve() {
        for n in 1..=12usize {
            // every composition of n is a run profile
            for mask in 0u32..(1 << (n - 1)) {
                let mut runs = vec![1usize];
                for i in 0..n - 1 {
                    if mask >> i & 1 == 1 {
                        runs.push(1);
                    } else {
                        *runs.last_mut().unwrap() += 1;
                    }
                }
                for d in 0..=n {
                    let s: u128 = enumerate_deletion_patterns(&runs, d)
                        .map(|p| p.multiplicity(&runs))
                        .sum();
                    assert_eq!(
                        s,
                        exact_binomial(n as u64, d as u64),
                        "runs {runs:?}, d {d}"
                    );
                }
            }
        }
    }

    #[test]
    fn expected_run_count_values() {
        assert_eq!(expected_run_count(1, 2).unwrap(), 1.0);
        assert_eq!(expected_run_count(5, 5).unwrap(), (-4f64).exp2());
        assert!(expected_run_count(0, 3).is_err());
        assert!(expected_run_count(4, 3).is_err());
    }

    #[test]
    fn expected_run_count_matches_enumeration() {
        for n in 1..=12usize {
            let mut counts = vec![0u64; n + 1];
            for x in 0u32..(1 << n) {
                let bits: Vec<u8> = (0..n).map(|i| (x >> i & 1) as u8).collect();
                for &r in RunLengthSequence::encode(&bits).unwrap().runs() {
                    counts[r] += 1;
                }
            }
            let mut mass = 0.0;
            for (l, &c) in counts.iter().enumerate().skip(1) {
                let brute = c as f64 / (1u64 << n) as f64;
                let closed = expected_run_count(l, n).unwrap();
                assert_abs_diff_eq!(brute, closed, epsilon = 1e-15);
                mass += closed * l as f64;
            }
            assert_abs_diff_eq!(mass, n as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn w_coefficient_edge_cases() {
        assert_eq!(w_coefficient(1, 1).unwrap(), 0.0);
        assert!(w_coefficient(5, 0).is_err());
        assert!(w_coefficient(5, 6).is_err());
        assert!(w_coefficients(5, &[1, 9]).is_err());
    }

    /// Exhaustive right-hand side of the run-averaging identity:
    /// `2^{-n} Σ_x Σ_k Σ_{j_k} C(n_k, j_k) C(n - n_k, j - j_k) log2 C(n_k, j_k)`.
    fn w_brute(n: usize, j: usize) -> f64 {
        let mut acc = 0.0;
        for x in 0u32..(1 << n) {
            let bits: Vec<u8> = (0..n).map(|i| (x >> i & 1) as u8).collect();
            for &nk in RunLengthSequence::encode(&bits).unwrap().runs() {
                for jk in 0..=j.min(nk) {
                    if j - jk > n - nk {
                        continue;
                    }
                    let c = exact_binomial(nk as u64, jk as u64) as f64;
                    acc += c * exact_binomial((n - nk) as u64, (j - jk) as u64) as f64 * c.log2();
                }
            }
        }
        acc / (1u64 << n) as f64
    }

    #[test]
    fn w_coefficient_matches_input_enumeration() {
        for n in 1..=10usize {
            for j in 1..=n {
                let closed =
                    w_coefficient(n, j).unwrap() * exact_binomial(n as u64, j as u64) as f64;
                let brute = w_brute(n, j);
                assert_abs_diff_eq!(closed, brute, epsilon = 1e-10 * brute.max(1.0));
            }
        }
    }

    #[test]
    fn w_coefficients_are_bounded() {
        for &n in &[2usize, 7, 30, 120] {
            let js: Vec<usize> = (1..=n).collect();
            let ws = w_coefficients(n, &js).unwrap();
            for (&j, &w) in js.iter().zip(&ws) {
                let cap = exact_binomial(n as u64, j as u64) as f64;
                assert!(w >= 0.0 && w <= cap.log2() + 1e-12, "n {n} j {j}: {w}");
                assert_eq!(w, w_coefficient(n, j).unwrap());
            }
        }
    }

    #[test]
    fn w1_approaches_run_length_series_at_rate_one_over_n() {
        // W_1(n) = (1/n) Σ_{l<n} 2^{-l-1}(n-l+3) l log2 l, so
        // n (W_1(n) - S_inf) -> Σ_l 2^{-l-1}(3-l) l log2 l.
        let term = |l: usize| (-(l as f64) - 1.0).exp2() * l as f64 * (l as f64).log2();
        let series = compensated_sum((1..=200).map(term));
        let slope = compensated_sum((1..=200).map(|l| (3.0 - l as f64) * term(l)));
        for &n in &[250usize, 1000, 4000] {
            let w1 = w_coefficient(n, 1).unwrap();
            assert_abs_diff_eq!(w1 - series, slope / n as f64, epsilon = 1e-10);
        }
        assert!(
            (w_coefficient(4000, 1).unwrap() - series).abs()
                < (w_coefficient(1000, 1).unwrap() - series).abs()
        );
    }

    #[test]
    fn s3_small_values() {
        assert_eq!(s3_coefficient(1).unwrap(), 0.0);
        assert_eq!(s3_closed_form(1).unwrap(), 0.0);
        assert!(s3_coefficient(0).is_err());
        assert!(s3_closed_form(0).is_err());
        // n = 2: only 01 and 10 have two runs, each contributing 2 log2 2 twice.
        assert_abs_diff_eq!(
            s3_coefficient(2).unwrap(),
            8.0 / 32.0 + 1.0 / 8.0,
            epsilon = 1e-15
        );
        // The reference n = 10 first-order coefficient 1.1591 comes from the closed form.
        assert_abs_diff_eq!(
            s3_closed_form(10).unwrap() - 31.0 / 40.0,
            1.1591,
            epsilon = 5e-5
        );
    }

    #[test]
    fn s3_closed_form_overstates_the_defining_sum() {
        for n in 2..=64 {
            assert!(
                s3_closed_form(n).unwrap() > s3_coefficient(n).unwrap() + 0.5,
                "n = {n}"
            );
        }
    }

    /// The defining double sum over inputs with more than one run.
    fn s3_brute(n: usize) -> f64 {
        let f = |v: usize| v as f64 * (v as f64).log2();
        let mut acc = 0.0;
        for x in 0u32..(1 << n) {
            let bits: Vec<u8> = (0..n).map(|i| (x >> i & 1) as u8).collect();
            let rls = RunLengthSequence::encode(&bits).unwrap();
            let runs = rls.runs();
            let k = runs.len();
            if k == 1 {
                continue;
            }
            acc += f(runs[0] + 1) + f(runs[k - 1] + 1);
            acc += runs[1..k - 1].iter().map(|&r| f(r + 2)).sum::<f64>();
        }
        let nf = n as f64;
        acc / ((nf + 2.0).exp2() * nf) + nf.log2() / (nf + 1.0).exp2()
    }

    #[test]
    fn s3_matches_enumeration() {
        for n in 1..=10 {
            assert_abs_diff_eq!(s3_coefficient(n).unwrap(), s3_brute(n), epsilon = 1e-12);
        }
    }

    #[test]
    fn subsequence_weight_cases() {
        assert_eq!(subsequence_weight(&[1, 0, 1], &[1, 0, 1]), 1);
        assert_eq!(subsequence_weight(&[1, 1, 1], &[1, 1]), 3);
        assert_eq!(subsequence_weight(&[0, 1], &[1, 0]), 0);
        assert_eq!(subsequence_weight(&[0], &[0, 0]), 0);
        assert_eq!(subsequence_weight(&[0, 1, 1], &[]), 1);
    }

    #[test]
    fn exact_binomial_values() {
        assert_eq!(exact_binomial(10, 5), 252);
        assert_eq!(exact_binomial(64, 32), 1_832_624_140_942_590_534);
        assert_eq!(exact_binomial(3, 4), 0);
    }
}

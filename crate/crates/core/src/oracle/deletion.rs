use std::collections::BTreeMap;

use num_rational::BigRational;
use rayon::prelude::*;

use super::word::{ExactDistribution, Word};
use super::{mono, rational_mono, rational_probability, Channel, EntropyReport, RATIONAL_MAX_N};
use crate::combinatorics::{enumerate_deletion_patterns, RunLengthSequence};
use crate::error::{check_probability, Error, Result};
use crate::numerics::{binary_entropy, compensated_sum, exact_binomial, xlog2x, CompensatedSum};

/// Largest block length for the exact deletion law.
pub const DELETION_LAW_MAX_N: usize = 14;
/// Largest block length for the exact deletion-substitution entropies.
pub const DELETION_SUBSTITUTION_MAX_N: usize = 12;

/// Inputs handled per parallel task; fixed so that float merges happen in
/// the same order for any thread count.
const CHUNK: u64 = 64;

fn check_n(n: usize, max: usize, what: &str) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("block length must be at least 1"));
    }
    if n > max {
        return Err(Error::Resource(format!(
            "{what} enumerates 2^{n} inputs; the limit is n = {max}"
        )));
    }
    Ok(())
}

/// `counts[m][y]`: number of size-`m` index sets of `x` that read `y`.
/// Column sums are `C(n, m)`.
pub(crate) fn embedding_counts(x: Word) -> Vec<Vec<u32>> {
    let n = x.len();
    let mut dp: Vec<Vec<u32>> = (0..=n).map(|k| vec![0; 1 << k]).collect();
    dp[0][0] = 1;
    for i in 0..n {
        let b = x.bit(i) as usize;
        // Descending k so that dp[k + 1] only receives the previous dp[k].
        for k in (0..=i).rev() {
            let (lo, hi) = dp.split_at_mut(k + 1);
            for (y, &c) in lo[k].iter().enumerate() {
                if c != 0 {
                    hi[0][y << 1 | b] += c;
                }
            }
        }
    }
    dp
}

/// Scales `p^{n-m} (1-p)^m` of each surviving length `m`, with the input
/// weight `2^{-n}` folded in when `with_input` is set.
fn length_scales(
    n: usize,
    p_d: f64,
    with_input: bool,
) -> (BTreeMap<usize, f64>, BTreeMap<usize, BigRational>) {
    let shift = if with_input { n as i32 } else { 0 };
    let float = (0..=n)
        .map(|m| (m, mono(p_d, n - m, m) * (-shift as f64).exp2()))
        .collect();
    let exact = if n <= RATIONAL_MAX_N {
        (0..=n)
            .map(|m| (m, rational_mono(p_d, n - m, m, shift as usize)))
            .collect()
    } else {
        BTreeMap::new()
    };
    (float, exact)
}

fn law_from_counts(
    n: usize,
    p_d: f64,
    counts: Vec<Vec<u128>>,
    with_input: bool,
) -> ExactDistribution {
    let (float, exact) = length_scales(n, p_d, with_input);
    let entries = counts
        .into_iter()
        .enumerate()
        .filter(|&(m, _)| float[&m] > 0.0)
        .flat_map(|(m, row)| {
            row.into_iter()
                .enumerate()
                .map(move |(y, c)| (Word::from_raw(m, y as u64), c))
        })
        .collect();
    let keep = n <= RATIONAL_MAX_N && 0.0 < p_d && p_d < 1.0;
    ExactDistribution::from_counts(entries, exact, &float, keep)
}

/// Output law of the deletion channel for one input word.
pub fn exact_deletion_conditional(x: Word, p_d: f64) -> Result<ExactDistribution> {
    check_n(x.len(), DELETION_LAW_MAX_N, "the deletion law")?;
    check_probability("p_d", p_d)?;
    let counts = embedding_counts(x)
        .into_iter()
        .map(|r| r.into_iter().map(u128::from).collect())
        .collect();
    Ok(law_from_counts(x.len(), p_d, counts, false))
}

/// Output law of the deletion channel under i.u.d. inputs of length `n`,
/// accumulated from every input. Rational for `n <= 10`.
pub fn exact_deletion_law(n: usize, p_d: f64) -> Result<ExactDistribution> {
    check_n(n, DELETION_LAW_MAX_N, "the deletion law")?;
    check_probability("p_d", p_d)?;
    let empty = || (0..=n).map(|m| vec![0u64; 1 << m]).collect::<Vec<_>>();
    let counts = (0..1u64 << n)
        .into_par_iter()
        .fold(empty, |mut acc, bits| {
            for (row, emb) in acc
                .iter_mut()
                .zip(embedding_counts(Word::from_raw(n, bits)))
            {
                for (a, c) in row.iter_mut().zip(emb) {
                    *a += c as u64;
                }
            }
            acc
        })
        .reduce(empty, |mut a, b| {
            for (ra, rb) in a.iter_mut().zip(b) {
                for (x, y) in ra.iter_mut().zip(rb) {
                    *x += y;
                }
            }
            a
        });
    let counts = counts
        .into_iter()
        .map(|r| r.into_iter().map(u128::from).collect())
        .collect();
    Ok(law_from_counts(n, p_d, counts, true))
}

/// In-place BSC on a probability vector indexed by `m`-bit words.
fn bsc_butterfly(v: &mut [f64], m: usize, p_e: f64) {
    let q = 1.0 - p_e;
    for bit in 0..m {
        let stride = 1 << bit;
        for base in (0..v.len()).step_by(stride << 1) {
            for i in base..base + stride {
                let (a, b) = (v[i], v[i + stride]);
                v[i] = q * a + p_e * b;
                v[i + stride] = p_e * a + q * b;
            }
        }
    }
}

/// Entropy of the distinct-pattern device for one input: every per-run
/// deletion pattern `D` is treated as its own output, with probability
/// `Π C(n_k, d_k) p^d (1-p)^{n-d}`.
pub fn pattern_entropy(x: &RunLengthSequence, p_d: f64) -> Result<f64> {
    check_probability("p_d", p_d)?;
    let n = x.len();
    let mut acc = CompensatedSum::default();
    for d in 0..=n {
        let w = mono(p_d, d, n - d);
        if w == 0.0 {
            continue;
        }
        for pattern in enumerate_deletion_patterns(x.runs(), d) {
            acc.add(-xlog2x(pattern.multiplicity(x.runs()) as f64 * w));
        }
    }
    Ok(acc.total())
}

struct PerInput {
    conditional: f64,
    pattern: f64,
}

/// Exact `H(Y')`, `H(Y'|X)` and `I(X;Y')` of the deletion-substitution
/// channel with i.u.d. inputs (`n <= 12`), together with the distinct-pattern
/// entropy and the bound chain.
pub fn exact_deletion_substitution_entropies(
    n: usize,
    p_d: f64,
    p_e: f64,
) -> Result<EntropyReport> {
    check_n(
        n,
        DELETION_SUBSTITUTION_MAX_N,
        "the deletion-substitution oracle",
    )?;
    check_probability("p_d", p_d)?;
    check_probability("p_e", p_e)?;
    let scales: Vec<f64> = (0..=n).map(|m| mono(p_d, n - m, m)).collect();
    let inv = (-(n as f64)).exp2();
    let chunks = (1u64 << n).div_ceil(CHUNK);
    let partials: Vec<(Vec<Vec<f64>>, Vec<PerInput>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut out: Vec<Vec<f64>> = (0..=n).map(|m| vec![0.0; 1 << m]).collect();
            let mut per = Vec::new();
            for bits in c * CHUNK..((c + 1) * CHUNK).min(1 << n) {
                let x = Word::from_raw(n, bits);
                let mut h = CompensatedSum::default();
                for (m, row) in embedding_counts(x).into_iter().enumerate() {
                    if scales[m] == 0.0 {
                        continue;
                    }
                    let mut v: Vec<f64> = row.into_iter().map(|c| c as f64 * scales[m]).collect();
                    if p_e > 0.0 {
                        bsc_butterfly(&mut v, m, p_e);
                    }
                    for (o, &pr) in out[m].iter_mut().zip(&v) {
                        h.add(-xlog2x(pr));
                        *o += pr * inv;
                    }
                }
                let rl = RunLengthSequence::encode(&x.to_bits()).expect("n >= 1");
                let pattern = pattern_entropy(&rl, p_d).expect("p_d checked");
                per.push(PerInput {
                    conditional: h.total(),
                    pattern,
                });
            }
            (out, per)
        })
        .collect();

    let mut output: Vec<Vec<CompensatedSum>> = (0..=n)
        .map(|m| vec![CompensatedSum::default(); 1 << m])
        .collect();
    let mut conditional = Vec::with_capacity(1 << n);
    let mut pattern = Vec::with_capacity(1 << n);
    for (out, per) in partials {
        for (acc_row, row) in output.iter_mut().zip(out) {
            for (a, v) in acc_row.iter_mut().zip(row) {
                a.add(v);
            }
        }
        for p in per {
            conditional.push(p.conditional);
            pattern.push(p.pattern);
        }
    }
    let probs = output.iter().flatten().map(|a| a.total());
    let output_entropy = -compensated_sum(probs.clone().map(xlog2x));
    let support_size = probs.filter(|&p| p > 0.0).count();
    let conditional_entropy = compensated_sum(conditional) * inv;
    // Substitution patterns are independent of the deletion pattern, so the
    // device gains E[n - T] H_b(p_e) bits.
    let pattern_entropy =
        compensated_sum(pattern) * inv + n as f64 * (1.0 - p_d) * binary_entropy(p_e)?;
    EntropyReport::build(
        Channel::DeletionSubstitution { p_d, p_e },
        n,
        output_entropy,
        conditional_entropy,
        support_size,
        Some(pattern_entropy),
        None,
    )
}

/// Rational `P(y)` for the deletion channel from the per-length closed
/// form `2^{-m} C(n, m) p^{n-m} (1-p)^m`.
pub fn deletion_closed_form_probability(n: usize, m: usize, p_d: f64) -> BigRational {
    rational_probability(exact_binomial(n as u64, m as u64), p_d, n - m, m, m)
}

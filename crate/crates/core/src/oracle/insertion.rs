use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::word::{ExactDistribution, Word};
use super::{mono, rational_mono, Channel, EntropyReport, InsertionParts, RATIONAL_MAX_N};
use crate::combinatorics::RunLengthSequence;
use crate::error::{check_probability, Error, Result};
use crate::numerics::{compensated_sum, exact_binomial, xlog2x, CompensatedSum};

/// Largest block length for the exact insertion oracle; outputs reach
/// `2n` symbols and the dense tables `2^{2n+1}` cells.
pub const INSERTION_MAX_N: usize = 9;

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("block length must be at least 1"));
    }
    if n > INSERTION_MAX_N {
        return Err(Error::Resource(format!(
            "the insertion oracle tabulates outputs of up to {} symbols; the limit is n = {INSERTION_MAX_N}",
            2 * n
        )));
    }
    Ok(())
}

/// `counts[j][y]`: number of (insertion positions, inserted pairs) with `j`
/// insertions that turn `x` into `y` (`|y| = n + j`). Row sums are
/// `C(n, j) 4^j`.
pub(crate) fn insertion_counts(x: Word) -> Vec<Vec<u32>> {
    let n = x.len();
    let mut dp: Vec<Vec<u32>> = vec![vec![1]];
    for i in 0..n {
        let b = x.bit(i) as usize;
        let mut next: Vec<Vec<u32>> = (0..=i + 1).map(|j| vec![0; 1 << (i + 1 + j)]).collect();
        for (j, row) in dp.iter().enumerate() {
            for (y, &c) in row.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                next[j][y << 1 | b] += c;
                for pair in 0..4 {
                    next[j + 1][y << 2 | pair] += c;
                }
            }
        }
        dp = next;
    }
    dp
}

/// Conditional weight `p^j (1-p)^{n-j} / 4^j` of one (positions, pairs)
/// realisation with `j` insertions.
fn realisation_weights(n: usize, p_i: f64) -> Vec<f64> {
    (0..=n)
        .map(|j| mono(p_i, j, n - j) * (-2.0 * j as f64).exp2())
        .collect()
}

fn law_from_counts(
    n: usize,
    p_i: f64,
    counts: Vec<Vec<u128>>,
    input_bits: usize,
) -> ExactDistribution {
    let float: BTreeMap<usize, f64> = realisation_weights(n, p_i)
        .into_iter()
        .enumerate()
        .map(|(j, w)| (n + j, w * (-(input_bits as f64)).exp2()))
        .collect();
    let keep = n <= RATIONAL_MAX_N && 0.0 < p_i && p_i < 1.0;
    let exact = if keep {
        (0..=n)
            .map(|j| (n + j, rational_mono(p_i, j, n - j, 2 * j + input_bits)))
            .collect()
    } else {
        BTreeMap::new()
    };
    let entries = counts
        .into_iter()
        .enumerate()
        .filter(|&(j, _)| float[&(n + j)] > 0.0)
        .flat_map(|(j, row)| {
            row.into_iter()
                .enumerate()
                .map(move |(y, c)| (Word::from_raw(n + j, y as u64), c))
        })
        .collect();
    ExactDistribution::from_counts(entries, exact, &float, keep)
}

/// Output law of the random insertion channel for one input word.
pub fn exact_insertion_conditional(x: Word, p_i: f64) -> Result<ExactDistribution> {
    check_n(x.len())?;
    check_probability("p_i", p_i)?;
    let counts = insertion_counts(x)
        .into_iter()
        .map(|r| r.into_iter().map(u128::from).collect())
        .collect();
    Ok(law_from_counts(x.len(), p_i, counts, 0))
}

fn aggregate_counts(n: usize) -> Vec<Vec<u64>> {
    let empty = || {
        (0..=n)
            .map(|j| vec![0u64; 1 << (n + j)])
            .collect::<Vec<_>>()
    };
    (0..1u64 << n)
        .into_par_iter()
        .fold(empty, |mut acc, bits| {
            for (row, c) in acc
                .iter_mut()
                .zip(insertion_counts(Word::from_raw(n, bits)))
            {
                for (a, v) in row.iter_mut().zip(c) {
                    *a += v as u64;
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
        })
}

/// Output law of the random insertion channel under i.u.d. inputs.
/// Aggregated counts are `C(n, j) 2^j` for every output of length `n + j`.
pub fn exact_insertion_law(n: usize, p_i: f64) -> Result<ExactDistribution> {
    check_n(n)?;
    check_probability("p_i", p_i)?;
    let counts = aggregate_counts(n)
        .into_iter()
        .map(|r| r.into_iter().map(u128::from).collect())
        .collect();
    Ok(law_from_counts(n, p_i, counts, n))
}

/// Per-input entropy of each insertion-count class and its support size.
struct ClassEntropy {
    entropy: Vec<f64>,
    support: Vec<u64>,
}

fn class_entropies(x: Word, weights: &[f64]) -> ClassEntropy {
    let counts = insertion_counts(x);
    let mut entropy = Vec::with_capacity(counts.len());
    let mut support = Vec::with_capacity(counts.len());
    for (row, &w) in counts.iter().zip(weights) {
        let mut h = CompensatedSum::default();
        let mut s = 0u64;
        for &c in row {
            if c != 0 {
                h.add(-xlog2x(c as f64 * w));
                s += 1;
            }
        }
        entropy.push(h.total());
        support.push(s);
    }
    ClassEntropy { entropy, support }
}

/// Exact `H(Y)`, `H(Y|X)` and `I(X;Y)` of the random insertion channel with
/// i.u.d. inputs (`n <= 9`), with the conditional entropy split into the
/// zero/one-insertion part and the multi-insertion part, plus both
/// equiprobable relaxations of the latter.
pub fn exact_insertion_entropies(n: usize, p_i: f64) -> Result<EntropyReport> {
    check_n(n)?;
    check_probability("p_i", p_i)?;
    let weights = realisation_weights(n, p_i);
    let per_input: Vec<ClassEntropy> = (0..1u64 << n)
        .into_par_iter()
        .map(|b| class_entropies(Word::from_raw(n, b), &weights))
        .collect();
    let inv = (-(n as f64)).exp2();
    // ε_j: probability of exactly j insertions.
    let eps: Vec<f64> = (0..=n)
        .map(|j| exact_binomial(n as u64, j as u64) as f64 * mono(p_i, j, n - j))
        .collect();

    let avg = |f: &dyn Fn(&ClassEntropy) -> f64| compensated_sum(per_input.iter().map(f)) * inv;
    let single_part = avg(&|c| c.entropy[0] + c.entropy[1]);
    let multi_part = avg(&|c| compensated_sum((2..=n).map(|j| c.entropy[j])));
    let equiprobable_actual = avg(&|c| {
        compensated_sum((2..=n).map(|j| -xlog2x(eps[j]) + eps[j] * (c.support[j] as f64).log2()))
    });
    let equiprobable_full =
        compensated_sum((2..=n).map(|j| -xlog2x(eps[j]) + eps[j] * (n + j) as f64));

    let law = exact_insertion_law(n, p_i)?;
    let parts = InsertionParts {
        single_part,
        multi_part,
        equiprobable_actual,
        equiprobable_full,
    };
    EntropyReport::build(
        Channel::Insertion { p_i },
        n,
        law.entropy(),
        single_part + multi_part,
        law.len(),
        None,
        Some(parts),
    )
}

/// Which row of the single-insertion table an output belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SingleInsertionCase {
    /// No insertion: `y = x`.
    Unchanged,
    /// Run `k` grows by one symbol.
    RunExtension { run: usize },
    /// An opposite symbol splits run `k` into two non-empty parts.
    SingletonSplit { run: usize, left: usize },
    /// One symbol of run `k` is replaced by two opposite symbols.
    PairReplacement { run: usize, left: usize },
    /// An opposite symbol is prepended.
    LeadingSingleton,
    /// An opposite symbol is appended.
    TrailingSingleton,
}

#[derive(Debug, Clone, Serialize)]
pub struct SingleInsertionOutcome {
    pub output: Word,
    pub case: SingleInsertionCase,
    /// Probability in units of `p_i (1-p_i)^{n-1}`; zero for `Unchanged`.
    pub multiplier: f64,
    pub probability: f64,
}

/// The conditional law of `y` given `x` restricted to at most one insertion
/// (`|y| ∈ {n, n+1}`), built from the run structure of `x` rather than by
/// enumeration.
///
/// Run `k` extends with multiplier `(n_k + [k > 1] + [k < K]) / 4`: its own
/// symbols duplicated plus one boundary pair from each neighbour. For a
/// single run that is `n / 4`.
pub fn single_insertion_law(
    x: &RunLengthSequence,
    p_i: f64,
) -> Result<Vec<SingleInsertionOutcome>> {
    check_probability("p_i", p_i)?;
    let n = x.len();
    if n + 1 > 64 {
        return Err(Error::domain(format!(
            "single-insertion outputs are limited to 64 symbols, n = {n}"
        )));
    }
    let base = mono(p_i, 1, n - 1);
    let runs = x.runs();
    let k_max = runs.len();
    let mut out = vec![SingleInsertionOutcome {
        output: Word::from_bits(&x.decode())?,
        case: SingleInsertionCase::Unchanged,
        multiplier: 0.0,
        probability: mono(p_i, 0, n),
    }];
    let mut push = |bits: Vec<u8>, case, multiplier: f64| -> Result<()> {
        out.push(SingleInsertionOutcome {
            output: Word::from_bits(&bits)?,
            case,
            multiplier,
            probability: multiplier * base,
        });
        Ok(())
    };
    // The word with run k replaced by `middle`.
    let with_run = |k: usize, middle: &[u8]| -> Vec<u8> {
        let mut bits = Vec::with_capacity(n + 1);
        for (i, &len) in runs.iter().enumerate() {
            if i == k {
                bits.extend_from_slice(middle);
            } else {
                bits.extend(std::iter::repeat_n(x.run_bit(i), len));
            }
        }
        bits
    };
    for (k, &len) in runs.iter().enumerate() {
        let b = x.run_bit(k);
        let neighbours = (k > 0) as usize + (k + 1 < k_max) as usize;
        push(
            with_run(k, &vec![b; len + 1]),
            SingleInsertionCase::RunExtension { run: k },
            (len + neighbours) as f64 / 4.0,
        )?;
        for left in 1..len {
            let mut middle = vec![b; left];
            middle.push(1 - b);
            middle.extend(std::iter::repeat_n(b, len - left));
            push(
                with_run(k, &middle),
                SingleInsertionCase::SingletonSplit { run: k, left },
                0.5,
            )?;
        }
        for left in 0..len {
            let mut middle = vec![b; left];
            middle.extend([1 - b, 1 - b]);
            middle.extend(std::iter::repeat_n(b, len - 1 - left));
            push(
                with_run(k, &middle),
                SingleInsertionCase::PairReplacement { run: k, left },
                0.25,
            )?;
        }
    }
    let bits = x.decode();
    let mut lead = vec![1 - bits[0]];
    lead.extend_from_slice(&bits);
    push(lead, SingleInsertionCase::LeadingSingleton, 0.25)?;
    let mut trail = bits.clone();
    trail.push(1 - bits[n - 1]);
    push(trail, SingleInsertionCase::TrailingSingleton, 0.25)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insertion_counts_have_binomial_row_sums() {
        for n in 1..=6 {
            for x in Word::all(n) {
                for (j, row) in insertion_counts(x).iter().enumerate() {
                    let total: u64 = row.iter().map(|&c| c as u64).sum();
                    assert_eq!(total as u128, exact_binomial(n as u64, j as u64) << (2 * j));
                }
            }
        }
    }

    #[test]
    fn aggregated_counts_are_flat() {
        // Σ_x count(x, y) = C(n, j) 2^j for every y of length n + j.
        for n in 1..=7 {
            for (j, row) in aggregate_counts(n).iter().enumerate() {
                let expect = (exact_binomial(n as u64, j as u64) << j) as u64;
                assert!(row.iter().all(|&c| c == expect), "n = {n}, j = {j}");
            }
        }
    }

    #[test]
    fn law_is_exact_and_uniform() {
        let law = exact_insertion_law(6, 0.2).unwrap();
        assert_eq!(law.is_exactly_normalized(), Some(true));
        assert!(law.uniform_within_lengths(0.0));
        let cond = exact_insertion_conditional(Word::from_bits(&[1, 1, 0]).unwrap(), 0.2).unwrap();
        assert_eq!(cond.is_exactly_normalized(), Some(true));
    }

    #[test]
    fn single_insertion_table_matches_enumeration() {
        let p = 0.13;
        for n in 1..=9 {
            for x in Word::all(n) {
                let exact = exact_insertion_conditional(x, p).unwrap();
                let rl = RunLengthSequence::encode(&x.to_bits()).unwrap();
                let table = single_insertion_law(&rl, p).unwrap();
                let mut seen = std::collections::BTreeSet::new();
                for o in &table {
                    assert!(seen.insert(o.output), "{} repeats {}", rl, o.output);
                    let e = exact.probability(&o.output);
                    assert!(
                        (o.probability - e).abs() <= 1e-15 * e.max(1e-300),
                        "{rl} -> {}: {} vs {e}",
                        o.output,
                        o.probability
                    );
                }
                let listed: usize = exact.iter().filter(|(w, _)| w.len() <= n + 1).count();
                assert_eq!(listed, table.len(), "{rl}");
            }
        }
    }

    #[test]
    fn single_run_extension_multiplier() {
        let rl = RunLengthSequence::new(0, vec![5]).unwrap();
        let table = single_insertion_law(&rl, 0.1).unwrap();
        let ext = table
            .iter()
            .find(|o| o.case == SingleInsertionCase::RunExtension { run: 0 })
            .unwrap();
        assert_eq!(ext.multiplier, 5.0 / 4.0);
        let total: f64 = table.iter().map(|o| o.multiplier).sum();
        assert_eq!(total, 5.0);
    }

    #[test]
    fn limits_are_resource_errors() {
        assert!(matches!(
            exact_insertion_law(10, 0.1),
            Err(Error::Resource(_))
        ));
        assert!(matches!(
            exact_insertion_entropies(10, 0.1),
            Err(Error::Resource(_))
        ));
    }
}
